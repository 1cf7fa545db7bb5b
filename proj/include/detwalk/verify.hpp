#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "detwalk/analysis.hpp"
#include "detwalk/chain.hpp"
#include "detwalk/error.hpp"
#include "detwalk/instances.hpp"
#include "detwalk/io.hpp"

namespace detwalk {

enum class CheckId { Thm1, Thm2, Thm3, LemmaDtsum, PropDltimes, LemmaLazysum, PropSqrtsum, CouplingTau };

inline constexpr CheckId kAllChecks[] = {CheckId::Thm1,        CheckId::Thm2,         CheckId::Thm3,
                                         CheckId::LemmaDtsum,  CheckId::PropDltimes,  CheckId::LemmaLazysum,
                                         CheckId::PropSqrtsum, CheckId::CouplingTau};

inline std::string_view to_string(CheckId c) {
  switch (c) {
    case CheckId::Thm1: return "thm1";
    case CheckId::Thm2: return "thm2";
    case CheckId::Thm3: return "thm3";
    case CheckId::LemmaDtsum: return "lemma-dtsum";
    case CheckId::PropDltimes: return "prop-dltimes";
    case CheckId::LemmaLazysum: return "lemma-lazysum";
    case CheckId::PropSqrtsum: return "prop-sqrtsum";
    case CheckId::CouplingTau: return "coupling-tau";
  }
  return "?";
}

inline CheckId parse_check(std::string_view name) {
  for (auto c : kAllChecks) {
    if (to_string(c) == name) return c;
  }
  throw Error(Errc::BadParams, "unknown check '" + std::string(name) + "'");
}

struct VerifyOptions {
  std::size_t horizon = 500;  // simulation length for theorem checks
  bool skip_inapplicable = false;
  std::size_t max_t = kDefaultMaxT;  // cap on mixing scans
};

/// Empty when the check applies, otherwise the violated hypothesis.
inline std::optional<std::string> inapplicable(CheckId c, const InstanceSpec& inst, const ChainProperties& props) {
  if (!props.ergodic) return "ergodic";
  switch (c) {
    case CheckId::Thm1:
    case CheckId::LemmaDtsum:
    case CheckId::PropDltimes:
      return std::nullopt;
    case CheckId::Thm2:
    case CheckId::LemmaLazysum:
    case CheckId::PropSqrtsum:
      if (!props.lazy) return "lazy";
      return std::nullopt;
    case CheckId::Thm3:
      if (!props.lazy) return "lazy";
      if (!props.reversible) return "reversible";
      return std::nullopt;
    case CheckId::CouplingTau:
      if (inst.family.kind != "lazy-complete") return "lazy-complete family";
      return std::nullopt;
  }
  return std::nullopt;
}

/// Runs one check family against one instance. Theorem 1 is run with both
/// router kinds; theorems 2 and 3 with the SRT router. Inequality families
/// sweep their standard parameter sets.
inline std::vector<BoundCheck> run_check(CheckId c, const InstanceSpec& inst, const ChainProperties& props,
                                         const VerifyOptions& opt) {
  if (auto why = inapplicable(c, inst, props)) {
    throw Error(Errc::HypothesisViolated, std::string(to_string(c)) + " on " + inst.name + ": " + *why);
  }
  std::vector<BoundCheck> out;
  auto append = [&](std::vector<BoundCheck> more) { out.insert(out.end(), more.begin(), more.end()); };
  RouterSpec srt = inst.router;
  srt.kind = RouterKind::Srt;
  RouterSpec obl = inst.router;
  obl.kind = RouterKind::Oblivious;
  switch (c) {
    case CheckId::Thm1:
      append(certify_theorem(TheoremKind::Thm1Oblivious, inst.matrix, props, obl, inst.chi0, opt.horizon));
      append(certify_theorem(TheoremKind::Thm1Oblivious, inst.matrix, props, srt, inst.chi0, opt.horizon));
      break;
    case CheckId::Thm2:
      append(certify_theorem(TheoremKind::Thm2Srt, inst.matrix, props, srt, inst.chi0, opt.horizon));
      break;
    case CheckId::Thm3:
      append(certify_theorem(TheoremKind::Thm3SrtVertexwise, inst.matrix, props, srt, inst.chi0, opt.horizon));
      break;
    case CheckId::LemmaDtsum:
      for (std::size_t alpha = 1; alpha <= 4; ++alpha) {
        InequalityParams p;
        p.alpha = alpha;
        out.push_back(certify_inequality(InequalityKind::LemmaDtsum, inst.matrix, props, p));
      }
      break;
    case CheckId::PropDltimes:
      for (std::size_t ell = 1; ell <= 3; ++ell) {
        InequalityParams p;
        p.ell = ell;
        out.push_back(certify_inequality(InequalityKind::PropDltimes, inst.matrix, props, p));
      }
      break;
    case CheckId::LemmaLazysum:
      for (std::size_t T : {1, 10, 100}) {
        InequalityParams p;
        p.T = T;
        out.push_back(certify_inequality(InequalityKind::LemmaLazysum, inst.matrix, props, p));
      }
      break;
    case CheckId::PropSqrtsum: {
      InequalityParams p;
      p.horizon = 500;
      out.push_back(certify_inequality(InequalityKind::PropSqrtsum, inst.matrix, props, p));
      break;
    }
    case CheckId::CouplingTau:
      for (double eps : {0.25, 0.125, 0.0625}) {
        InequalityParams p;
        p.eps = eps;
        p.n = static_cast<std::size_t>(inst.family.params.at("n"));
        p.k = static_cast<std::size_t>(inst.family.params.at("k"));
        out.push_back(certify_inequality(InequalityKind::CouplingTau, inst.matrix, props, p));
      }
      break;
  }
  return out;
}

/// Runs every applicable (instance, check) pair on a pool of worker threads.
/// Each pair writes into its own slot; slots are joined in submission order
/// and then stably sorted by (instance name, check name), so the report does
/// not depend on scheduling.
inline std::vector<io::ReportRow> verify_instances(const std::vector<InstanceSpec>& instances,
                                                   const std::vector<CheckId>& checks, const VerifyOptions& opt) {
  std::vector<ChainProperties> props;
  props.reserve(instances.size());
  for (const auto& inst : instances) props.push_back(validate_instance(inst, opt.max_t));

  struct Task {
    std::size_t instance;
    CheckId check;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (auto c : checks) {
      if (opt.skip_inapplicable && inapplicable(c, instances[i], props[i])) continue;
      tasks.push_back({i, c});
    }
  }

  std::vector<std::vector<BoundCheck>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t j = cursor++; j < tasks.size(); j = cursor++) {
      try {
        results[j] = run_check(tasks[j].check, instances[tasks[j].instance], props[tasks[j].instance], opt);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, tasks.size()); ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<io::ReportRow> rows;
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    for (auto& check : results[j]) rows.push_back({instances[tasks[j].instance].name, std::move(check)});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const io::ReportRow& a, const io::ReportRow& b) {
    if (a.instance != b.instance) return a.instance < b.instance;
    return a.check.name < b.check.name;
  });
  return rows;
}

inline std::vector<io::ReportRow> verify_suite(const VerifyOptions& opt = {}) {
  VerifyOptions o = opt;
  o.skip_inapplicable = true;
  return verify_instances(standard_suite(), std::vector<CheckId>(std::begin(kAllChecks), std::end(kAllChecks)), o);
}

}  // namespace detwalk
