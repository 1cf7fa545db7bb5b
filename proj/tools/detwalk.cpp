// detwalk command-line frontend.
//
// Exit codes: 0 ok, 2 usage or invalid input, 3 I/O, 4 runtime failure,
// 5 a certificate failed.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detwalk/detwalk.hpp"

using namespace detwalk;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitRuntime = 4;
constexpr int kExitCertFailed = 5;

int exit_code(Errc c) {
  switch (c) {
    case Errc::IoError:
      return kExitIo;
    case Errc::NoConvergence:
    case Errc::CapExceeded:
    case Errc::InternalInvariantViolation:
    case Errc::Overflow:
    case Errc::GenerationFailed:
      return kExitRuntime;
    default:
      return kExitUsage;
  }
}

struct Global {
  std::string out;
  std::string format;
  std::optional<std::size_t> horizon;
  bool record_z = false;
  std::uint64_t seed = 0;
  std::size_t max_t = kDefaultMaxT;
};

struct FamilyArgs {
  std::string family;
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t nprime = 0;
  std::size_t out_degree = 3;
  std::int64_t max_den = 30;
  std::vector<TokenCount> placement;
};

struct Source {
  std::string instance_path;
  FamilyArgs fam;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::BadParams, what);
}

std::vector<InstanceSpec> build_family(const FamilyArgs& a, std::uint64_t seed) {
  if (a.family == "lazy-complete") {
    require(a.n > 0 && a.k > 0, "lazy-complete needs --n and --k");
    return {lazy_complete(a.n, a.k)};
  }
  if (a.family == "srt-oscillator") {
    require(a.nprime > 0, "srt-oscillator needs --nprime");
    return {srt_oscillator(a.nprime, a.k)};
  }
  if (a.family == "integrality-gap") {
    require(a.n > 0 && a.k > 0, "integrality-gap needs --n and --k");
    if (a.placement.empty()) return {integrality_gap(a.n, a.k)};
    return {integrality_gap(a.n, a.k, a.placement)};
  }
  if (a.family == "random") {
    require(a.n > 0, "random needs --n");
    return {random_chain(a.n, a.out_degree, a.max_den, seed)};
  }
  if (a.family == "suite") return standard_suite();
  throw Error(Errc::BadParams, "unknown family '" + a.family + "'");
}

/// A file holds either one instance object or an array of them.
std::vector<InstanceSpec> load_instances(const std::string& path) {
  auto j = io::parse(io::read_file(path));
  std::vector<InstanceSpec> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(io::instance_from_json(item));
  } else {
    out.push_back(io::instance_from_json(j));
  }
  if (out.empty()) throw Error(Errc::SchemaViolation, path + " holds no instances");
  return out;
}

std::vector<InstanceSpec> resolve(const Source& src, const Global& g) {
  const bool from_file = !src.instance_path.empty();
  const bool from_family = !src.fam.family.empty();
  require(from_file != from_family, "give exactly one of --instance or --family");
  return from_file ? load_instances(src.instance_path) : build_family(src.fam, g.seed);
}

InstanceSpec resolve_one(const Source& src, const Global& g) {
  auto all = resolve(src, g);
  require(all.size() == 1, "expected a single instance, got " + std::to_string(all.size()));
  return std::move(all.front());
}

void emit(const Global& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
  } else {
    io::write_file(g.out, text);
  }
}

void add_family_options(CLI::App* cmd, FamilyArgs& a) {
  cmd->add_option("--n", a.n, "vertex count");
  cmd->add_option("--k", a.k, "family parameter k");
  cmd->add_option("--nprime", a.nprime, "oscillator half size n'");
  cmd->add_option("--out-degree", a.out_degree, "random chain out-degree")->capture_default_str();
  cmd->add_option("--max-den", a.max_den, "random chain largest denominator")->capture_default_str();
  cmd->add_option("--placement", a.placement, "integrality-gap token placement")->delimiter(',');
}

void add_source_options(CLI::App* cmd, Source& s) {
  cmd->add_option("--instance", s.instance_path, "instance JSON file (object or array)");
  cmd->add_option("--family", s.fam.family, "built-in family")
      ->check(CLI::IsMember({"lazy-complete", "srt-oscillator", "integrality-gap", "random", "suite"}));
  add_family_options(cmd, s.fam);
}

std::string summary_line(const InstanceSpec& inst, const ChainProperties& p) {
  std::ostringstream s;
  s << inst.name << ": n=" << inst.matrix.size() << " m=" << inst.matrix.edge_count()
    << " delta=" << inst.matrix.max_degree() << " M=" << inst.chi0.total() << " ergodic=" << std::boolalpha
    << p.ergodic << " lazy=" << p.lazy << " reversible=" << p.reversible << " t_star=";
  if (p.t_star) {
    s << *p.t_star;
  } else {
    s << "-";
  }
  return s.str();
}

// ---------------------------------------------------------------------------

int cmd_generate(const Global& g, const FamilyArgs& a) {
  auto instances = build_family(a, g.seed);
  std::vector<std::string> lines;
  for (const auto& inst : instances) lines.push_back(summary_line(inst, validate_instance(inst, g.max_t)));
  std::string text;
  if (a.family == "suite") {
    io::json arr = io::json::array();
    for (const auto& inst : instances) arr.push_back(io::to_json(inst));
    text = arr.dump(2) + "\n";
  } else {
    text = io::to_json(instances.front()).dump(2) + "\n";
  }
  emit(g, text);
  // keep stdout clean when it carries the JSON
  auto& log = g.out.empty() ? std::cerr : std::cout;
  for (const auto& l : lines) log << l << "\n";
  return 0;
}

int cmd_simulate(const Global& g, const Source& src, const std::string& router, const std::string& ordering) {
  auto inst = resolve_one(src, g);
  RouterSpec spec = inst.router;
  if (!router.empty()) spec.kind = router == "oblivious" ? RouterKind::Oblivious : RouterKind::Srt;
  if (!ordering.empty()) spec.ordering = ordering == "self_first" ? OrderingDefault::SelfFirst : OrderingDefault::Ascending;
  const std::size_t T = g.horizon.value_or(100);
  auto traj = run(inst.matrix, spec, inst.chi0, T, g.record_z);
  emit(g, g.format == "json" ? io::trajectory_json(traj).dump(2) + "\n" : io::trajectory_csv(traj));
  return 0;
}

int cmd_mixing(const Global& g, const Source& src, const std::vector<double>& eps, const std::string& h_path) {
  auto inst = resolve_one(src, g);
  require_ergodic(inst.matrix);
  const auto pi = stationary(inst.matrix);
  std::ostringstream s;
  s << "t_star," << mixing_time(inst.matrix, pi, 0.25, g.max_t) << "\n";
  for (double e : eps) s << "tau(" << io::fmt12(e) << ")," << mixing_time(inst.matrix, pi, e, g.max_t) << "\n";
  emit(g, s.str());
  if (!h_path.empty()) {
    auto h = h_profile(inst.matrix, pi, g.horizon.value_or(100));
    std::string csv = "t,h\n";
    for (std::size_t t = 0; t < h.size(); ++t) csv += std::to_string(t) + "," + io::fmt12(h[t]) + "\n";
    io::write_file(h_path, csv);
  }
  return 0;
}

int cmd_verify(const Global& g, const Source& src, bool suite, const std::vector<std::string>& names, bool skip) {
  std::vector<InstanceSpec> instances;
  if (suite) {
    require(src.instance_path.empty() && src.fam.family.empty(), "--suite excludes --instance and --family");
    instances = standard_suite();
  } else {
    instances = resolve(src, g);
  }
  std::vector<CheckId> checks;
  for (const auto& n : names) checks.push_back(parse_check(n));
  if (checks.empty()) {
    checks.assign(std::begin(kAllChecks), std::end(kAllChecks));
    skip = true;
  }
  VerifyOptions opt;
  opt.horizon = g.horizon.value_or(opt.horizon);
  opt.skip_inapplicable = skip || suite;
  opt.max_t = g.max_t;
  auto rows = verify_instances(instances, checks, opt);
  emit(g, g.format == "csv" ? io::report_csv(rows) : io::report_json(rows).dump(2) + "\n");
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.check.pass ? 0 : 1;
  std::cerr << rows.size() << " checks, " << failed << " failed\n";
  return failed == 0 ? 0 : kExitCertFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic random walks: simulation, mixing and bound certification"};
  app.require_subcommand(1);
  Global g;
  app.add_option("-o,--out", g.out, "output file (default stdout)");
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--horizon", g.horizon, "simulation horizon T");
  app.add_flag("--record-z", g.record_z, "keep per-step Z matrices (json trajectories)");
  app.add_option("--seed", g.seed, "seed for random chains");

  FamilyArgs gen_args;
  auto* gen = app.add_subcommand("generate", "write an instance JSON")->fallthrough();
  gen->add_option("family", gen_args.family, "family")
      ->required()
      ->check(CLI::IsMember({"lazy-complete", "srt-oscillator", "integrality-gap", "random", "suite"}));
  add_family_options(gen, gen_args);

  Source sim_src;
  std::string router, ordering;
  auto* sim = app.add_subcommand("simulate", "run a trajectory and write per-step discrepancies")->fallthrough();
  add_source_options(sim, sim_src);
  sim->add_option("--router", router, "override router kind")->check(CLI::IsMember({"oblivious", "srt"}));
  sim->add_option("--ordering", ordering, "override ordering default")
      ->check(CLI::IsMember({"ascending", "self_first"}));

  Source mix_src;
  std::vector<double> eps{0.25};
  std::string h_path;
  auto* mix = app.add_subcommand("mixing", "mixing times tau(eps) and t*")->fallthrough();
  add_source_options(mix, mix_src);
  mix->add_option("--eps", eps, "eps values")->delimiter(',');
  mix->add_option("--h-profile", h_path, "write h(t) for t <= horizon as CSV");

  Source ver_src;
  bool suite = false, skip = false;
  std::vector<std::string> check_names;
  auto* ver = app.add_subcommand("verify", "certify bounds and inequalities")->fallthrough();
  add_source_options(ver, ver_src);
  ver->add_flag("--suite", suite, "run on the standard suite");
  ver->add_option("--checks", check_names, "comma separated check names")->delimiter(',');
  ver->add_flag("--skip-inapplicable", skip, "skip checks whose hypotheses fail instead of erroring");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (const char* env = std::getenv("DETWALK_MAX_T")) {
      try {
        g.max_t = std::stoull(env);
      } catch (const std::exception&) {
        throw Error(Errc::BadParams, std::string("DETWALK_MAX_T='") + env + "'");
      }
      require(g.max_t > 0, "DETWALK_MAX_T must be positive");
    }
    if (*gen) return cmd_generate(g, gen_args);
    if (*sim) return cmd_simulate(g, sim_src, router, ordering);
    if (*mix) return cmd_mixing(g, mix_src, eps, h_path);
    if (*ver) return cmd_verify(g, ver_src, suite, check_names, skip);
  } catch (const Error& e) {
    std::cerr << "detwalk: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "detwalk: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
