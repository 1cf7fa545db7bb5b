#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "detwalk/chain.hpp"
#include "detwalk/error.hpp"
#include "detwalk/router.hpp"

namespace detwalk {

/// Integer token vector chi^(t) with its conserved total M.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<TokenCount> tokens) : tokens_(std::move(tokens)) {
    for (std::size_t v = 0; v < tokens_.size(); ++v) {
      if (tokens_[v] < 0) throw Error(Errc::NegativeTokens, "vertex " + std::to_string(v));
      if (__builtin_add_overflow(total_, tokens_[v], &total_)) throw Error(Errc::Overflow, "token total");
    }
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  TokenCount total() const noexcept { return total_; }
  TokenCount operator[](Vertex v) const { return tokens_[v]; }
  std::span<const TokenCount> tokens() const noexcept { return tokens_; }

  std::vector<double> as_real() const { return {tokens_.begin(), tokens_.end()}; }

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<TokenCount> tokens_;
  TokenCount total_ = 0;
};

/// Z^(t): rows[v][k] tokens sent along the k-th out-edge of v (row order).
struct ZRecord {
  std::vector<std::vector<TokenCount>> rows;

  friend bool operator==(const ZRecord&, const ZRecord&) = default;
};

struct StepResult {
  Configuration next;
  ZRecord z;
};

/// One synchronous update: every vertex dispatches its load through the
/// router, and chi_u^(t+1) collects Z_{v,u} over the in-neighbours v of u.
inline StepResult step(const TransitionMatrix& P, Router& router, const Configuration& chi) {
  if (chi.size() != P.size()) throw Error(Errc::LengthMismatch, "configuration length");
  const std::size_t n = P.size();
  ZRecord z;
  z.rows.resize(n);
  std::vector<TokenCount> next(n, 0);
  for (Vertex v = 0; v < n; ++v) {
    z.rows[v] = dispatch(router, P, v, chi[v]);
    TokenCount sent = 0;
    const auto row = P.row(v);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (__builtin_add_overflow(next[row[k].target], z.rows[v][k], &next[row[k].target])) {
        throw Error(Errc::Overflow, "accumulating at vertex " + std::to_string(row[k].target));
      }
      sent += z.rows[v][k];
    }
    if (sent != chi[v]) throw Error(Errc::InternalInvariantViolation, "dispatch lost tokens at " + std::to_string(v));
  }
  return {Configuration(std::move(next)), std::move(z)};
}

struct Trajectory {
  std::vector<Configuration> chi;
  std::vector<std::vector<double>> mu;
  std::vector<ZRecord> z;  // z[t] moves chi[t] to chi[t+1]; empty unless recorded
  RouterKind kind = RouterKind::Srt;
  Router final_router;

  std::size_t horizon() const noexcept { return chi.empty() ? 0 : chi.size() - 1; }
};

/// Runs T steps, calling observer(t, chi^(t), Z^(t), router-after-dispatch)
/// for t = 0..T-1. mu is advanced alongside by one floating product per step.
template <class Observer>
Trajectory run(const TransitionMatrix& P, const RouterSpec& spec, Configuration chi0, std::size_t T,
               bool record_z, Observer&& observer) {
  if (chi0.size() != P.size()) throw Error(Errc::LengthMismatch, "initial configuration length");
  Trajectory traj;
  traj.kind = spec.kind;
  Router router = make_router(P, spec);
  traj.chi.reserve(T + 1);
  traj.mu.reserve(T + 1);
  traj.mu.push_back(chi0.as_real());
  traj.chi.push_back(std::move(chi0));
  for (std::size_t t = 0; t < T; ++t) {
    auto res = step(P, router, traj.chi.back());
    observer(t, traj.chi.back(), res.z, router);
    traj.mu.push_back(P.apply(traj.mu.back()));
    traj.chi.push_back(std::move(res.next));
    if (record_z) traj.z.push_back(std::move(res.z));
  }
  traj.final_router = std::move(router);
  return traj;
}

inline Trajectory run(const TransitionMatrix& P, const RouterSpec& spec, Configuration chi0, std::size_t T,
                      bool record_z = false) {
  return run(P, spec, std::move(chi0), T, record_z, [](auto&&...) {});
}

/// phi^(t) = chi^(t) - chi^(t-1) P.
inline std::vector<double> phi_at(const Trajectory& traj, const TransitionMatrix& P, std::size_t t) {
  if (t == 0 || t > traj.horizon()) {
    throw Error(Errc::OutOfRange, "phi index " + std::to_string(t) + " outside [1, " +
                                      std::to_string(traj.horizon()) + "]");
  }
  auto prev = P.apply(traj.chi[t - 1].as_real());
  std::vector<double> phi(P.size());
  for (Vertex u = 0; u < P.size(); ++u) phi[u] = static_cast<double>(traj.chi[t][u]) - prev[u];
  return phi;
}

}  // namespace detwalk
