#include <gtest/gtest.h>

#include "detwalk/rational.hpp"

using detwalk::Errc;
using detwalk::Error;
using detwalk::Probability;
using detwalk::Rational;

TEST(Rational, StoresReducedWithPositiveDenominator) {
  Rational r(6, -8);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 4);
  EXPECT_EQ(Rational(2, 4), Rational(1, 2));
}

TEST(Rational, ArithmeticAndOrdering) {
  EXPECT_EQ(Rational(1, 3) + Rational(1, 6), Rational(1, 2));
  EXPECT_EQ(Rational(1, 2) - Rational(3, 4), Rational(-1, 4));
  EXPECT_EQ(Rational(2, 3) * Rational(3, 4), Rational(1, 2));
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_GT(Rational(2, 3), Rational(13, 20));
}

TEST(Rational, FloorTimesIsExact) {
  EXPECT_EQ(Rational(1, 3).floor_times(5), 1);
  EXPECT_EQ(Rational(2, 3).floor_times(3), 2);
  EXPECT_EQ(Rational(1, 3).floor_times(-1), -1);
  EXPECT_EQ(Rational(0, 1).floor_times(1'000'000), 0);
}

TEST(Rational, ZeroDenominatorRejected) {
  try {
    Rational(1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadParams);
  }
}

TEST(Rational, OverflowIsReported) {
  const Rational big(INT64_MAX, 1);
  try {
    (void)(big * Rational(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Overflow);
  }
}

TEST(Probability, RejectsOutsideUnitInterval) {
  EXPECT_NO_THROW(Probability(1, 1));
  EXPECT_NO_THROW(Probability(0, 5));
  EXPECT_THROW(Probability(5, 4), Error);
  EXPECT_THROW(Probability(-1, 4), Error);
}
