#include <gtest/gtest.h>

#include <filesystem>

#include "detwalk/io.hpp"
#include "detwalk/verify.hpp"

using namespace detwalk;
namespace fs = std::filesystem;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::IoError;
}

fs::path temp_file(const std::string& name) {
  auto dir = fs::temp_directory_path() / "detwalk_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Io, InstanceRoundTrip) {
  for (const auto& inst : {lazy_complete(4, 4), srt_oscillator(2, 0), integrality_gap(8, 2), random_chain(9, 4, 50, 3),
                           standard_suite().front()}) {
    auto path = temp_file(inst.name + ".json").string();
    io::save_instance(inst, path);
    auto back = io::load_instance(path);
    EXPECT_EQ(back, inst) << inst.name;
    // second save is byte-identical
    auto again = temp_file(inst.name + "-2.json").string();
    io::save_instance(back, again);
    EXPECT_EQ(io::read_file(path), io::read_file(again));
  }
}

TEST(Io, RationalsStayIntegerPairs) {
  auto j = io::to_json(lazy_complete(4, 4).matrix);
  for (const auto& e : j.at("entries")) {
    for (const auto& x : e) EXPECT_TRUE(x.is_number_integer());
  }
}

TEST(Io, RouterOverridesRoundTrip) {
  RouterSpec spec{RouterKind::Oblivious, OrderingDefault::SelfFirst, {{2, {3, 2, 1}}}};
  EXPECT_EQ(io::router_from_json(io::to_json(spec)), spec);
  auto minimal = io::router_from_json(io::parse(R"({"type":"srt"})"));
  EXPECT_EQ(minimal, RouterSpec{});
  EXPECT_EQ(code_of([] { io::router_from_json(io::parse(R"({"type":"rotor"})")); }), Errc::SchemaViolation);
  EXPECT_EQ(code_of([] { io::router_from_json(io::parse(R"({"type":"srt","ordering":{"overrides":{"x":[1]}}})")); }),
            Errc::SchemaViolation);
}

TEST(Io, Errors) {
  EXPECT_EQ(code_of([] { io::parse("{not json"); }), Errc::ParseError);
  EXPECT_EQ(code_of([] { io::load_instance("/nonexistent/dir/x.json"); }), Errc::IoError);

  auto j = io::to_json(lazy_complete(4, 2));
  j["matrix"]["entries"][0][2] = 2;  // row 0 no longer sums to 1
  EXPECT_EQ(code_of([&] { io::instance_from_json(j); }), Errc::SchemaViolation);

  auto k = io::to_json(lazy_complete(4, 2));
  k.erase("chi0");
  EXPECT_EQ(code_of([&] { io::instance_from_json(k); }), Errc::SchemaViolation);

  auto l = io::to_json(lazy_complete(4, 2));
  l["chi0"] = {1, 2};
  EXPECT_EQ(code_of([&] { io::instance_from_json(l); }), Errc::SchemaViolation);

  auto m = io::to_json(lazy_complete(4, 2));
  m["router"]["ordering"]["overrides"] = {{"0", {0, 1}}};
  EXPECT_EQ(code_of([&] { io::instance_from_json(m); }), Errc::SchemaViolation);
}

TEST(Io, ExpectedFieldIsOptional) {
  auto j = io::to_json(lazy_complete(4, 2));
  j.erase("expected");
  auto inst = io::instance_from_json(j);
  EXPECT_TRUE(inst.expected.ergodic);
  EXPECT_TRUE(inst.expected.lazy);
  EXPECT_NO_THROW(validate_instance(inst));
}

TEST(Io, TrajectoryCsv) {
  auto inst = srt_oscillator(2, 0);
  auto traj = run(inst.matrix, inst.router, inst.chi0, 10);
  auto csv = io::trajectory_csv(traj);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,l1_discrepancy,linf_discrepancy,sum_tokens");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (rows == 0) {
      EXPECT_EQ(line, "0,0,0,4");
    } else {
      EXPECT_EQ(line.substr(line.find(',') + 1, 2), "2,");
    }
    ++rows;
  }
  EXPECT_EQ(rows, 11u);
  EXPECT_EQ(io::fmt12(1.0 / 3.0), "0.333333333333");
}

TEST(Io, TrajectoryJson) {
  auto inst = lazy_complete(4, 2);
  auto traj = run(inst.matrix, inst.router, inst.chi0, 2, true);
  auto j = io::trajectory_json(traj);
  EXPECT_EQ(j.at("router"), "oblivious");
  EXPECT_EQ(j.at("chi").size(), 3u);
  EXPECT_EQ(j.at("z").size(), 2u);
}

TEST(Io, ReportFormats) {
  auto inst = lazy_complete(4, 2);
  auto rows = verify_instances({inst}, {CheckId::Thm1, CheckId::CouplingTau}, VerifyOptions{});
  ASSERT_EQ(rows.size(), 6u);  // thm1 oblivious, thm1 srt + 3mt variant, coupling-tau x3
  auto j = io::report_json(rows);
  for (const auto& r : j) {
    EXPECT_TRUE(r.contains("name") && r.contains("params") && r.contains("lhs") && r.contains("rhs") &&
                r.contains("pass") && r.contains("instance"));
  }
  auto csv = io::report_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "instance,check,lhs,rhs,pass");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Verify, InapplicableChecksRaiseUnlessSkipped) {
  auto inst = srt_oscillator(2, 0);  // not lazy
  EXPECT_EQ(code_of([&] { verify_instances({inst}, {CheckId::Thm2}, VerifyOptions{}); }), Errc::HypothesisViolated);
  VerifyOptions skip;
  skip.skip_inapplicable = true;
  EXPECT_TRUE(verify_instances({inst}, {CheckId::Thm2}, skip).empty());
  EXPECT_EQ(parse_check("prop-sqrtsum"), CheckId::PropSqrtsum);
  EXPECT_EQ(code_of([] { parse_check("thm9"); }), Errc::BadParams);
}
