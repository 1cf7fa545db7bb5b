#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "detwalk/analysis.hpp"
#include "detwalk/audit.hpp"
#include "detwalk/instances.hpp"
#include "oracles.hpp"

using namespace detwalk;

namespace {

TransitionMatrix two_cycle() { return build_matrix(2, {{0, 1, 1, 1}, {1, 0, 1, 1}}); }
TransitionMatrix uniform_lazy_2() { return build_matrix(2, {{0, 0, 1, 2}, {0, 1, 1, 2}, {1, 0, 1, 2}, {1, 1, 1, 2}}); }

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::IoError;
}

}  // namespace

// ---------------------------------------------------------------------------
// discrepancy

TEST(TvDiscrepancy, Examples) {
  std::vector<TokenCount> chi{4, 0};
  std::vector<double> mu{2.0, 2.0};
  auto d = tv_discrepancy(chi, mu);
  EXPECT_DOUBLE_EQ(d.value, 2.0);
  EXPECT_EQ(d.witness, (std::vector<Vertex>{0}));
  std::vector<double> same{4.0, 0.0};
  EXPECT_DOUBLE_EQ(tv_discrepancy(chi, same).value, 0.0);
  EXPECT_TRUE(tv_discrepancy(chi, same).witness.empty());
  EXPECT_DOUBLE_EQ(linf_discrepancy(chi, mu), 2.0);
}

TEST(TvDiscrepancy, MassMismatchAndLength) {
  std::vector<TokenCount> chi{4, 0};
  std::vector<double> mu{2.0, 1.0};
  EXPECT_EQ(code_of([&] { tv_discrepancy(chi, mu); }), Errc::MassMismatch);
  std::vector<double> shorter{4.0};
  EXPECT_EQ(code_of([&] { tv_discrepancy(chi, shorter); }), Errc::LengthMismatch);
}

TEST(TvDiscrepancy, WitnessAttainsSubsetMaximum) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 12;
    auto inst = random_chain(std::max<std::size_t>(n, 2), 2, 20, static_cast<std::uint64_t>(trial));
    auto traj = run(inst.matrix, inst.router, inst.chi0, 15);
    for (std::size_t t = 0; t <= 15; ++t) {
      auto d = tv_discrepancy(traj.chi[t].tokens(), traj.mu[t]);
      auto chi = traj.chi[t].as_real();
      EXPECT_NEAR(d.value, oracle::max_subset_gap(chi, traj.mu[t]), 1e-9);
      double on_witness = 0.0;
      for (auto v : d.witness) on_witness += chi[v] - traj.mu[t][v];
      EXPECT_NEAR(on_witness, d.value, 1e-9);
    }
  }
}

// ---------------------------------------------------------------------------
// closed forms

TEST(Bounds, Theorem1) {
  EXPECT_DOUBLE_EQ(bound_thm1(16, 2), 48.0);
  EXPECT_DOUBLE_EQ(bound_thm1(4, 1), 6.0);
  auto P = lazy_complete(8, 4).matrix;
  EXPECT_DOUBLE_EQ(bound_thm1(P.edge_count(), mixing_rate(P)), 96.0 * static_cast<double>(mixing_rate(P)));
}

TEST(Bounds, Theorem2) {
  EXPECT_DOUBLE_EQ(bound_thm2(10, 1), 60.0);
  EXPECT_DOUBLE_EQ(bound_thm2(10, 2), 60.0);
  EXPECT_NEAR(bound_thm2(10, 4), 20.0 * (24.0 * std::sqrt(6.0) - 9.0), 1e-9);
  EXPECT_NEAR(bound_thm2(10, 4), 995.755, 0.001);
  EXPECT_DOUBLE_EQ(bound_thm2(1, 3), 78.0);
}

TEST(Bounds, Theorem3) {
  Distribution uniform2 = Distribution::uniform(2);
  EXPECT_DOUBLE_EQ(bound_thm3(0, 2, uniform2, 1), 24.0);
  EXPECT_NEAR(bound_thm3(0, 2, uniform2, 4), 4.0 * (48.0 * std::sqrt(6.0) - 19.0), 1e-9);
  EXPECT_NEAR(bound_thm3(0, 2, uniform2, 4), 394.3, 0.05);
  Distribution skew(std::vector<double>{2.0 / 3.0, 1.0 / 3.0});
  EXPECT_NEAR(bound_thm3(0, 2, skew, 3), 616.0, 1e-9);
  // small branch uses pi_max / pi_min, not pi_w
  EXPECT_NEAR(bound_thm3(1, 2, skew, 2), 48.0, 1e-9);
}

TEST(Bounds, CeilLg) {
  EXPECT_EQ(ceil_lg(1), 0u);
  EXPECT_EQ(ceil_lg(2), 1u);
  EXPECT_EQ(ceil_lg(3), 2u);
  EXPECT_EQ(ceil_lg(4), 2u);
  EXPECT_EQ(ceil_lg(5), 3u);
  EXPECT_EQ(ceil_lg(1024), 10u);
}

TEST(BoundCheck, SlackIsExplicit) {
  EXPECT_TRUE(BoundCheck::make("x", {}, 1.0 + 5e-10, 1.0).pass);
  EXPECT_FALSE(BoundCheck::make("x", {}, 1.0 + 2e-9, 1.0).pass);
}

// ---------------------------------------------------------------------------
// theorem certificates

TEST(CertifyTheorem, Thm1OnLazyComplete) {
  auto inst = lazy_complete(4, 2);
  for (auto kind : {RouterKind::Oblivious, RouterKind::Srt}) {
    RouterSpec spec = inst.router;
    spec.kind = kind;
    auto checks = certify_theorem(TheoremKind::Thm1Oblivious, inst.matrix, spec, inst.chi0, 100);
    ASSERT_EQ(checks.size(), kind == RouterKind::Srt ? 2u : 1u);
    for (const auto& c : checks) EXPECT_TRUE(c.pass) << c.name << " " << c.lhs << " > " << c.rhs;
    EXPECT_EQ(checks[0].name, "thm1");
    EXPECT_DOUBLE_EQ(checks[0].params.at("m"), 16.0);
  }
}

TEST(CertifyTheorem, HypothesisViolations) {
  // ergodic but not lazy: self-loop 1/3
  auto P = build_matrix(2, {{0, 0, 1, 3}, {0, 1, 2, 3}, {1, 0, 1, 2}, {1, 1, 1, 2}});
  Configuration chi({3, 0});
  RouterSpec srt;
  try {
    certify_theorem(TheoremKind::Thm2Srt, P, srt, chi, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::HypothesisViolated);
    EXPECT_EQ(e.detail(), "lazy");
  }
  EXPECT_EQ(code_of([&] { certify_theorem(TheoremKind::Thm1Oblivious, two_cycle(), srt, chi, 10); }),
            Errc::HypothesisViolated);
  RouterSpec obl{RouterKind::Oblivious, OrderingDefault::Ascending, {}};
  EXPECT_EQ(code_of([&] { certify_theorem(TheoremKind::Thm2Srt, uniform_lazy_2(), obl, chi, 10); }),
            Errc::HypothesisViolated);
  auto chord = lazy_chord_cycle(8);
  Configuration c8(std::vector<TokenCount>(8, 1));
  try {
    certify_theorem(TheoremKind::Thm3SrtVertexwise, chord, srt, c8, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.detail(), "reversible");
  }
}

TEST(CertifyTheorem, Thm2OnLazyCycle) {
  auto P = lazy_cycle(8);
  for (TokenCount M : {8, 80, 8000}) {
    Configuration chi0 = detail::point_load(8, M);
    auto checks = certify_theorem(TheoremKind::Thm2Srt, P, RouterSpec{}, chi0, 500);
    ASSERT_EQ(checks.size(), 1u);
    EXPECT_TRUE(checks[0].pass) << checks[0].lhs << " > " << checks[0].rhs;
    EXPECT_DOUBLE_EQ(checks[0].rhs, bound_thm2(24, 6));
  }
}

TEST(CertifyTheorem, Thm3EmitsOneCheckPerVertex) {
  auto P = lazy_hypercube(3);
  auto checks = certify_theorem(TheoremKind::Thm3SrtVertexwise, P, RouterSpec{}, detail::point_load(8, 800), 200);
  ASSERT_EQ(checks.size(), 8u);
  for (std::size_t w = 0; w < 8; ++w) {
    EXPECT_EQ(checks[w].params.at("w"), static_cast<double>(w));
    EXPECT_TRUE(checks[w].pass);
  }
}

// ---------------------------------------------------------------------------
// inequality certificates

TEST(CertifyInequality, DtsumOnLazyComplete) {
  auto P = lazy_complete(6, 3).matrix;
  const auto ts = static_cast<double>(mixing_rate(P));
  InequalityParams p;
  auto c = certify_inequality(InequalityKind::LemmaDtsum, P, p);
  EXPECT_TRUE(c.pass);
  EXPECT_DOUBLE_EQ(c.rhs, ts / 2.0);
  EXPECT_DOUBLE_EQ(c.params.at("truncation"), 40.0 * ts);
}

TEST(CertifyInequality, DtsumMatchesDirectSum) {
  // independent evaluation through the dense power oracle
  auto P = lazy_cycle(8);
  auto props = classify(P);
  oracle::Dense D(8, std::vector<double>(8, 0.0));
  for (const auto& t : P.triplets()) D[t.u][t.v] = static_cast<double>(t.num) / static_cast<double>(t.den);
  const std::size_t ts = *props.t_star;
  for (std::size_t alpha = 1; alpha <= 3; ++alpha) {
    InequalityParams p;
    p.alpha = alpha;
    auto c = certify_inequality(InequalityKind::LemmaDtsum, P, props, p);
    double best = 0.0;
    for (std::size_t u = 0; u < 8; ++u) {
      double s = 0.0;
      for (std::size_t t = alpha * ts; t <= 40 * ts; ++t) {
        s += oracle::max_subset_gap(oracle::power(D, t)[u], std::vector<double>(props.pi->values().begin(),
                                                                               props.pi->values().end()));
      }
      best = std::max(best, s);
    }
    EXPECT_NEAR(c.lhs, best, 1e-9);
  }
}

TEST(CertifyInequality, DltimesLazysumSqrtsum) {
  for (const auto& P : {lazy_cycle(16), lazy_hypercube(4), lazy_chord_cycle(8)}) {
    for (std::size_t ell = 1; ell <= 3; ++ell) {
      InequalityParams p;
      p.ell = ell;
      EXPECT_TRUE(certify_inequality(InequalityKind::PropDltimes, P, p).pass);
    }
    for (std::size_t T : {1u, 10u, 100u}) {
      InequalityParams p;
      p.T = T;
      EXPECT_TRUE(certify_inequality(InequalityKind::LemmaLazysum, P, p).pass);
    }
    EXPECT_TRUE(certify_inequality(InequalityKind::PropSqrtsum, P, InequalityParams{}).pass);
  }
}

TEST(CertifyInequality, SqrtsumOnTwoCycleIsRejected) {
  EXPECT_EQ(code_of([] { certify_inequality(InequalityKind::PropSqrtsum, two_cycle(), InequalityParams{}); }),
            Errc::HypothesisViolated);
}

TEST(CertifyInequality, CouplingTau) {
  auto P = lazy_complete(8, 4).matrix;
  InequalityParams p;
  p.n = 8;
  p.k = 4;
  auto c = certify_inequality(InequalityKind::CouplingTau, P, p);
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.rhs, (7.0 / 6.0) * 4.0 * std::log(4.0), 1e-12);
  EXPECT_LE(c.lhs, 6.0);
  p.k = 3;
  EXPECT_EQ(code_of([&] { certify_inequality(InequalityKind::CouplingTau, P, p); }), Errc::HypothesisViolated);
  p.k = 4;
  p.eps = 1.0;
  EXPECT_EQ(code_of([&] { certify_inequality(InequalityKind::CouplingTau, P, p); }), Errc::BadParams);
}

// ---------------------------------------------------------------------------
// h profile and Abel

TEST(HProfile, Examples) {
  auto h = h_profile(uniform_lazy_2(), 4);
  ASSERT_EQ(h.size(), 5u);
  EXPECT_NEAR(h[0], 0.5, 1e-15);
  for (std::size_t t = 1; t <= 4; ++t) EXPECT_NEAR(h[t], 0.0, 1e-15);
  auto P = lazy_hypercube(3);
  auto pi = stationary(P);
  auto hp = h_profile(P, pi, 60);
  EXPECT_NEAR(hp[0], 1.0 - 1.0 / 8.0, 1e-12);
  for (double eps : {0.25, 0.1, 0.01}) {
    const auto tau = mixing_time(P, pi, eps);
    for (std::size_t t = tau; t <= 60; ++t) EXPECT_LE(hp[t], eps);
  }
  EXPECT_THROW(h_profile(two_cycle(), 3), Error);
}

TEST(Abel, Examples) {
  std::vector<double> one{1.0};
  auto c = abel_identity_check(one, one);
  EXPECT_TRUE(c.pass);
  EXPECT_DOUBLE_EQ(c.params.at("direct"), 1.0);
  std::vector<double> f{1, 1, 1}, g{1, 2, 3};
  auto d = abel_identity_check(f, g);
  EXPECT_DOUBLE_EQ(d.params.at("direct"), 6.0);
  EXPECT_DOUBLE_EQ(d.params.at("by_parts"), 6.0);
  EXPECT_TRUE(d.pass);
  EXPECT_THROW(abel_identity_check(f, one), Error);
  EXPECT_THROW(abel_identity_check(std::vector<double>{}, std::vector<double>{}), Error);
}

TEST(Abel, RandomSequences) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> f(1 + trial * 3), g(f.size());
    for (auto& x : f) x = u(rng);
    for (auto& x : g) x = u(rng);
    EXPECT_TRUE(abel_identity_check(f, g).pass);
  }
}

// ---------------------------------------------------------------------------
// audits

TEST(Audit, ObliviousAndSrtOnRandomChains) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto inst = random_chain(6 + seed, 3, 40, seed);
    auto ob = audit_oblivious_balance(inst.matrix, inst.router, inst.chi0, 100);
    EXPECT_TRUE(ob.pass) << ob.first_violation;
    EXPECT_EQ(ob.rows_checked, 100 * inst.matrix.size());
    EXPECT_FALSE(Rational(1) < ob.worst);
    auto srt = audit_srt_balance(inst.matrix, inst.router, inst.chi0, 100);
    EXPECT_TRUE(srt.prefix_pass && srt.window_pass) << srt.first_violation;
    EXPECT_TRUE(srt.worst_window < Rational(2));
  }
}
