#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "detwalk/chain.hpp"
#include "detwalk/error.hpp"
#include "detwalk/router.hpp"
#include "detwalk/simulator.hpp"

namespace detwalk {

inline constexpr double kBoundSlack = 1e-9;

struct BoundCheck {
  std::string name;
  std::map<std::string, double> params;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;

  static BoundCheck make(std::string name, std::map<std::string, double> params, double lhs, double rhs) {
    return {std::move(name), std::move(params), lhs, rhs, lhs <= rhs + kBoundSlack};
  }
};

// ---------------------------------------------------------------------------
// Discrepancy

struct TvDiscrepancy {
  double value = 0.0;
  std::vector<Vertex> witness;  // {v : chi_v > mu_v}
};

inline TvDiscrepancy tv_discrepancy(std::span<const TokenCount> chi, std::span<const double> mu) {
  if (chi.size() != mu.size()) throw Error(Errc::LengthMismatch, "chi vs mu");
  double mass_chi = 0.0, mass_mu = 0.0;
  for (std::size_t v = 0; v < chi.size(); ++v) {
    mass_chi += static_cast<double>(chi[v]);
    mass_mu += mu[v];
  }
  if (std::abs(mass_chi - mass_mu) > 1e-6 * std::max(1.0, mass_chi)) {
    throw Error(Errc::MassMismatch, "sum(chi) differs from sum(mu)");
  }
  TvDiscrepancy out;
  double l1 = 0.0;
  for (std::size_t v = 0; v < chi.size(); ++v) {
    const double d = static_cast<double>(chi[v]) - mu[v];
    l1 += std::abs(d);
    if (d > 0.0) out.witness.push_back(v);
  }
  out.value = 0.5 * l1;
  return out;
}

inline double linf_discrepancy(std::span<const TokenCount> chi, std::span<const double> mu) {
  if (chi.size() != mu.size()) throw Error(Errc::LengthMismatch, "chi vs mu");
  double worst = 0.0;
  for (std::size_t v = 0; v < chi.size(); ++v) worst = std::max(worst, std::abs(static_cast<double>(chi[v]) - mu[v]));
  return worst;
}

struct StepDiscrepancy {
  std::size_t t = 0;
  double l1 = 0.0;
  double linf = 0.0;
  TokenCount sum_tokens = 0;
};

inline std::vector<StepDiscrepancy> discrepancy_series(const Trajectory& traj) {
  std::vector<StepDiscrepancy> out;
  out.reserve(traj.chi.size());
  for (std::size_t t = 0; t < traj.chi.size(); ++t) {
    out.push_back({t, tv_discrepancy(traj.chi[t].tokens(), traj.mu[t]).value,
                   linf_discrepancy(traj.chi[t].tokens(), traj.mu[t]), traj.chi[t].total()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed-form bounds

/// Smallest c with 2^c >= t.
inline std::size_t ceil_lg(std::size_t t) {
  std::size_t c = 0;
  while ((std::size_t{1} << c) < t) ++c;
  return c;
}

inline double bound_thm1(std::size_t m, std::size_t t_star) {
  return 1.5 * static_cast<double>(m) * static_cast<double>(t_star);
}

/// 6m for t* <= 2, otherwise 2m (24 sqrt(t* ceil(lg t*) - 2) - 9).
inline double bound_thm2(std::size_t m, std::size_t t_star) {
  const double md = static_cast<double>(m);
  if (t_star <= 2) return 6.0 * md;
  const double inner = static_cast<double>(t_star * ceil_lg(t_star)) - 2.0;
  return 2.0 * md * (24.0 * std::sqrt(inner) - 9.0);
}

/// 12 (pi_max/pi_min) Delta for t* <= 2, otherwise
/// (2 pi_w / pi_min) Delta (48 sqrt(t* ceil(lg t*) - 2) - 19).
inline double bound_thm3(Vertex w, std::size_t delta, const Distribution& pi, std::size_t t_star) {
  const auto vals = pi.values();
  const double pi_min = *std::min_element(vals.begin(), vals.end());
  const double pi_max = *std::max_element(vals.begin(), vals.end());
  const double d = static_cast<double>(delta);
  if (t_star <= 2) return 12.0 * (pi_max / pi_min) * d;
  const double inner = static_cast<double>(t_star * ceil_lg(t_star)) - 2.0;
  return (2.0 * pi.values()[w] / pi_min) * d * (48.0 * std::sqrt(inner) - 19.0);
}

// ---------------------------------------------------------------------------
// Theorem certificates

enum class TheoremKind { Thm1Oblivious, Thm2Srt, Thm3SrtVertexwise };

inline std::string_view to_string(TheoremKind k) {
  switch (k) {
    case TheoremKind::Thm1Oblivious: return "thm1";
    case TheoremKind::Thm2Srt: return "thm2";
    case TheoremKind::Thm3SrtVertexwise: return "thm3";
  }
  return "?";
}

/// Runs the simulation for T steps and compares the worst measured
/// discrepancy over 0..T against the closed-form bound. For SRT runs of
/// thm1 an extra check against 3 m t* is appended. thm3 yields one check per
/// vertex since its bound depends on pi_w.
inline std::vector<BoundCheck> certify_theorem(TheoremKind kind, const TransitionMatrix& P,
                                               const ChainProperties& props, const RouterSpec& spec,
                                               const Configuration& chi0, std::size_t T) {
  if (!props.ergodic) throw Error(Errc::HypothesisViolated, "ergodic");
  if (kind != TheoremKind::Thm1Oblivious) {
    if (!props.lazy) throw Error(Errc::HypothesisViolated, "lazy");
    if (spec.kind != RouterKind::Srt) throw Error(Errc::HypothesisViolated, "srt router");
  }
  if (kind == TheoremKind::Thm3SrtVertexwise && !props.reversible) {
    throw Error(Errc::HypothesisViolated, "reversible");
  }
  const std::size_t t_star = *props.t_star;
  const std::size_t m = P.edge_count();
  auto traj = run(P, spec, chi0, T);

  const double router_flag = spec.kind == RouterKind::Srt ? 1.0 : 0.0;
  std::map<std::string, double> base{{"m", static_cast<double>(m)},
                                     {"t_star", static_cast<double>(t_star)},
                                     {"T", static_cast<double>(T)},
                                     {"srt", router_flag}};
  std::vector<BoundCheck> out;
  if (kind == TheoremKind::Thm3SrtVertexwise) {
    const std::size_t delta = P.max_degree();
    base["delta"] = static_cast<double>(delta);
    for (Vertex w = 0; w < P.size(); ++w) {
      double worst = 0.0;
      for (std::size_t t = 0; t <= T; ++t) {
        worst = std::max(worst, std::abs(static_cast<double>(traj.chi[t][w]) - traj.mu[t][w]));
      }
      auto params = base;
      params["w"] = static_cast<double>(w);
      params["pi_w"] = (*props.pi)[w];
      out.push_back(BoundCheck::make("thm3", std::move(params), worst, bound_thm3(w, delta, *props.pi, t_star)));
    }
    return out;
  }

  double worst = 0.0;
  for (std::size_t t = 0; t <= T; ++t) {
    worst = std::max(worst, tv_discrepancy(traj.chi[t].tokens(), traj.mu[t]).value);
  }
  if (kind == TheoremKind::Thm1Oblivious) {
    out.push_back(BoundCheck::make("thm1", base, worst, bound_thm1(m, t_star)));
    if (spec.kind == RouterKind::Srt) {
      out.push_back(BoundCheck::make("thm1-srt-3mt", base, worst, 3.0 * static_cast<double>(m * t_star)));
    }
  } else {
    out.push_back(BoundCheck::make("thm2", base, worst, bound_thm2(m, t_star)));
  }
  return out;
}

inline std::vector<BoundCheck> certify_theorem(TheoremKind kind, const TransitionMatrix& P, const RouterSpec& spec,
                                               const Configuration& chi0, std::size_t T) {
  return certify_theorem(kind, P, classify(P), spec, chi0, T);
}

// ---------------------------------------------------------------------------
// Inequality certificates

enum class InequalityKind { LemmaDtsum, PropDltimes, LemmaLazysum, PropSqrtsum, CouplingTau };

inline std::string_view to_string(InequalityKind k) {
  switch (k) {
    case InequalityKind::LemmaDtsum: return "lemma-dtsum";
    case InequalityKind::PropDltimes: return "prop-dltimes";
    case InequalityKind::LemmaLazysum: return "lemma-lazysum";
    case InequalityKind::PropSqrtsum: return "prop-sqrtsum";
    case InequalityKind::CouplingTau: return "coupling-tau";
  }
  return "?";
}

struct InequalityParams {
  std::size_t alpha = 1;       // lemma-dtsum
  std::size_t truncation = 0;  // lemma-dtsum, 0 means 40 t*
  std::size_t ell = 1;         // prop-dltimes
  std::size_t T = 1;           // lemma-lazysum
  std::size_t horizon = 500;   // prop-sqrtsum
  double eps = 0.25;           // coupling-tau
  std::size_t n = 0;           // coupling-tau: lazy-complete family parameters
  std::size_t k = 0;
};

/// h(t) = max_u d_TV(P^t_{u,.}, pi) for t = 0..T.
inline std::vector<double> h_profile(const TransitionMatrix& P, const Distribution& pi, std::size_t T) {
  std::vector<double> h;
  h.reserve(T + 1);
  PowerRows rows(P);
  h.push_back(rows.worst_distance(pi));
  for (std::size_t t = 1; t <= T; ++t) {
    rows.advance();
    h.push_back(rows.worst_distance(pi));
  }
  return h;
}

inline std::vector<double> h_profile(const TransitionMatrix& P, std::size_t T) {
  return h_profile(P, stationary(P), T);
}

namespace detail {

inline bool matches_lazy_complete(const TransitionMatrix& P, std::size_t n, std::size_t k) {
  if (n < 3 || k < 1 || P.size() != n) return false;
  const Rational self(static_cast<std::int64_t>(k) - 1, static_cast<std::int64_t>(k));
  const Rational other(1, static_cast<std::int64_t>(k * (n - 1)));
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = 0; v < n; ++v) {
      auto p = P.at(u, v);
      const Rational want = u == v ? self : other;
      if ((p ? p->value() : Rational(0)) != want) return false;
    }
  }
  return true;
}

}  // namespace detail

inline BoundCheck certify_inequality(InequalityKind kind, const TransitionMatrix& P, const ChainProperties& props,
                                     const InequalityParams& params) {
  const std::string name(to_string(kind));
  if (!props.ergodic) throw Error(Errc::HypothesisViolated, name + " requires an ergodic chain");
  const bool needs_lazy = kind == InequalityKind::LemmaLazysum || kind == InequalityKind::PropSqrtsum;
  if (needs_lazy && !props.lazy) throw Error(Errc::HypothesisViolated, name + " requires a lazy chain");
  const Distribution& pi = *props.pi;
  const std::size_t t_star = *props.t_star;
  const double ts = static_cast<double>(t_star);

  switch (kind) {
    case InequalityKind::LemmaDtsum: {
      if (params.alpha < 1) throw Error(Errc::BadParams, "alpha must be positive");
      const std::size_t trunc = params.truncation == 0 ? 40 * t_star : params.truncation;
      PowerRows rows(P);
      std::vector<double> sums(P.size(), 0.0);
      for (std::size_t t = 0; t <= trunc; ++t) {
        if (t >= params.alpha * t_star) {
          for (Vertex u = 0; u < P.size(); ++u) sums[u] += tv_distance(rows.row(u), pi);
        }
        if (t < trunc) rows.advance();
      }
      const double lhs = *std::max_element(sums.begin(), sums.end());
      return BoundCheck::make(name,
                              {{"alpha", static_cast<double>(params.alpha)}, {"t_star", ts},
                               {"truncation", static_cast<double>(trunc)}},
                              lhs, ts / std::ldexp(1.0, static_cast<int>(params.alpha)));
    }
    case InequalityKind::PropDltimes: {
      if (params.ell < 1) throw Error(Errc::BadParams, "ell must be positive");
      const std::size_t first = params.ell * t_star;
      auto h = h_profile(P, pi, first + t_star - 1);
      const double lhs = *std::max_element(h.begin() + static_cast<std::ptrdiff_t>(first), h.end());
      return BoundCheck::make(name, {{"ell", static_cast<double>(params.ell)}, {"t_star", ts}}, lhs,
                              std::ldexp(1.0, -static_cast<int>(params.ell + 1)));
    }
    case InequalityKind::LemmaLazysum:
    case InequalityKind::PropSqrtsum: {
      const bool lazysum = kind == InequalityKind::LemmaLazysum;
      if (lazysum && params.T < 1) throw Error(Errc::BadParams, "T must be positive");
      const std::size_t H = lazysum ? params.T : params.horizon;
      PowerRows rows(P);
      std::vector<std::vector<double>> prev(P.size());
      std::vector<double> sums(P.size(), 0.0);
      double worst_scaled = 0.0;
      for (Vertex u = 0; u < P.size(); ++u) prev[u].assign(rows.row(u).begin(), rows.row(u).end());
      // step t compares P^t with P^{t+1}
      for (std::size_t t = 0; t <= H; ++t) {
        rows.advance();
        for (Vertex u = 0; u < P.size(); ++u) {
          const double d = tv_distance(prev[u], rows.row(u));
          sums[u] += d;
          if (t >= 1) worst_scaled = std::max(worst_scaled, std::sqrt(static_cast<double>(t)) * d);
          prev[u].assign(rows.row(u).begin(), rows.row(u).end());
        }
      }
      if (lazysum) {
        return BoundCheck::make(name, {{"T", static_cast<double>(params.T)}},
                                *std::max_element(sums.begin(), sums.end()),
                                24.0 * std::sqrt(static_cast<double>(params.T)) - 11.0);
      }
      // max_t sqrt(t) d_TV(P^t, P^{t+1}) <= 12 is the pointwise 12/sqrt(t) bound
      return BoundCheck::make(name, {{"horizon", static_cast<double>(H)}}, worst_scaled, 12.0);
    }
    case InequalityKind::CouplingTau: {
      if (!detail::matches_lazy_complete(P, params.n, params.k) || params.n < 3) {
        throw Error(Errc::HypothesisViolated, "coupling-tau applies only to the lazy-complete family");
      }
      if (!(params.eps > 0.0 && params.eps < 1.0)) throw Error(Errc::BadParams, "eps must lie in (0,1)");
      const double n = static_cast<double>(params.n);
      const double k = static_cast<double>(params.k);
      const double tau = static_cast<double>(mixing_time(P, pi, params.eps));
      return BoundCheck::make(name, {{"eps", params.eps}, {"n", n}, {"k", k}}, tau,
                              ((n - 1.0) / (n - 2.0)) * k * std::log(1.0 / params.eps));
    }
  }
  throw Error(Errc::BadParams, "unknown inequality");
}

inline BoundCheck certify_inequality(InequalityKind kind, const TransitionMatrix& P, const InequalityParams& params) {
  auto s = analyze_structure(P);
  if (!s.ergodic()) throw Error(Errc::HypothesisViolated, std::string(to_string(kind)) + " requires an ergodic chain");
  return certify_inequality(kind, P, classify(P), params);
}

// ---------------------------------------------------------------------------
// Summation by parts

/// sum f_t g_t  vs  F_T g_T + sum_{t<T} F_t (g_t - g_{t+1}), F_t = f_0 + ... + f_t.
/// lhs = |difference|, rhs = 1e-9 times the magnitude scale sum |f_t g_t| (at least 1).
inline BoundCheck abel_identity_check(std::span<const double> f, std::span<const double> g) {
  if (f.size() != g.size()) throw Error(Errc::LengthMismatch, "abel sequences");
  if (f.empty()) throw Error(Errc::BadParams, "empty sequences");
  double direct = 0.0, scale = 0.0;
  for (std::size_t t = 0; t < f.size(); ++t) {
    direct += f[t] * g[t];
    scale += std::abs(f[t] * g[t]);
  }
  std::vector<double> F(f.size());
  std::partial_sum(f.begin(), f.end(), F.begin());
  const std::size_t T = f.size() - 1;
  double parts = F[T] * g[T];
  for (std::size_t t = 0; t < T; ++t) parts += F[t] * (g[t] - g[t + 1]);
  return BoundCheck::make("abel-identity", {{"direct", direct}, {"by_parts", parts}}, std::abs(direct - parts),
                          1e-9 * std::max(1.0, scale));
}

}  // namespace detwalk
