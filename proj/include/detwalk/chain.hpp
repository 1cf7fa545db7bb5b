#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "detwalk/error.hpp"
#include "detwalk/rational.hpp"

namespace detwalk {

using Vertex = std::size_t;
using TokenCount = std::int64_t;

/// Default cap on every mixing-time scan.
inline constexpr std::size_t kDefaultMaxT = 1'000'000;

struct Triplet {
  Vertex u = 0;
  Vertex v = 0;
  std::int64_t num = 0;
  std::int64_t den = 1;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

struct Transition {
  Vertex target = 0;
  Probability p;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// Row-stochastic matrix over exact rationals, stored sparsely as the
/// transition diagram: row(v) lists the out-edges of v sorted by target.
class TransitionMatrix {
 public:
  TransitionMatrix() = default;

  std::size_t size() const noexcept { return rows_.size(); }
  std::span<const Transition> row(Vertex v) const { return rows_.at(v); }
  std::span<const Vertex> in_neighbors(Vertex v) const { return in_.at(v); }
  std::size_t out_degree(Vertex v) const { return rows_.at(v).size(); }
  std::size_t in_degree(Vertex v) const { return in_.at(v).size(); }
  std::size_t edge_count() const noexcept { return edges_; }
  std::size_t max_out_degree() const noexcept { return max_out_; }
  std::size_t max_in_degree() const noexcept { return max_in_; }
  /// Max over both directions.
  std::size_t max_degree() const noexcept { return std::max(max_out_, max_in_); }

  std::vector<Vertex> out_neighbors(Vertex v) const {
    std::vector<Vertex> out;
    out.reserve(rows_.at(v).size());
    for (const auto& e : rows_.at(v)) out.push_back(e.target);
    return out;
  }

  std::optional<Probability> at(Vertex u, Vertex v) const {
    const auto& r = rows_.at(u);
    auto it = std::lower_bound(r.begin(), r.end(), v,
                               [](const Transition& e, Vertex x) { return e.target < x; });
    if (it == r.end() || it->target != v) return std::nullopt;
    return it->p;
  }

  Rational diagonal(Vertex v) const {
    auto p = at(v, v);
    return p ? p->value() : Rational(0);
  }

  std::vector<Triplet> triplets() const {
    std::vector<Triplet> out;
    out.reserve(edges_);
    for (Vertex u = 0; u < rows_.size(); ++u) {
      for (const auto& e : rows_[u]) out.push_back({u, e.target, e.p.num(), e.p.den()});
    }
    return out;
  }

  /// out = x P in floating point.
  void apply(std::span<const double> x, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (Vertex u = 0; u < rows_.size(); ++u) {
      const double xu = x[u];
      if (xu == 0.0) continue;
      for (const auto& e : rows_[u]) out[e.target] += xu * e.p.to_double();
    }
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> out(size());
    apply(x, out);
    return out;
  }

  friend bool operator==(const TransitionMatrix& a, const TransitionMatrix& b) {
    return a.rows_ == b.rows_;
  }

  friend TransitionMatrix build_matrix(std::size_t n, std::span<const Triplet> triplets);

 private:
  std::vector<std::vector<Transition>> rows_;
  std::vector<std::vector<Vertex>> in_;
  std::size_t edges_ = 0;
  std::size_t max_out_ = 0;
  std::size_t max_in_ = 0;
};

/// Validates the triplets and builds the transition diagram. Zero entries are
/// dropped since they are not edges.
inline TransitionMatrix build_matrix(std::size_t n, std::span<const Triplet> triplets) {
  if (n == 0) throw Error(Errc::BadParams, "empty vertex set");
  TransitionMatrix m;
  m.rows_.assign(n, {});
  m.in_.assign(n, {});
  for (const auto& t : triplets) {
    if (t.u >= n || t.v >= n) {
      throw Error(Errc::IndexOutOfRange,
                  "(" + std::to_string(t.u) + "," + std::to_string(t.v) + ") with n=" + std::to_string(n));
    }
    if (t.den <= 0) throw Error(Errc::BadParams, "non-positive denominator");
    if (t.num < 0) throw Error(Errc::BadParams, "negative numerator");
    if (t.num == 0) continue;
    m.rows_[t.u].push_back({t.v, Probability(t.num, t.den)});
  }
  for (Vertex u = 0; u < n; ++u) {
    auto& r = m.rows_[u];
    std::sort(r.begin(), r.end(), [](const Transition& a, const Transition& b) { return a.target < b.target; });
    Rational sum(0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i > 0 && r[i].target == r[i - 1].target) {
        throw Error(Errc::DuplicateEntry, "(" + std::to_string(u) + "," + std::to_string(r[i].target) + ")");
      }
      sum += r[i].p.value();
    }
    if (sum != Rational(1)) {
      throw Error(Errc::RowSumNotOne, "row " + std::to_string(u) + " sums to " + sum.str());
    }
    for (const auto& e : r) m.in_[e.target].push_back(u);
    m.edges_ += r.size();
    m.max_out_ = std::max(m.max_out_, r.size());
  }
  for (const auto& in : m.in_) m.max_in_ = std::max(m.max_in_, in.size());
  return m;
}

inline TransitionMatrix build_matrix(std::size_t n, std::initializer_list<Triplet> triplets) {
  return build_matrix(n, std::span<const Triplet>(triplets.begin(), triplets.size()));
}

/// Probability vector. Entries down to -1e-12 are clamped to zero; anything
/// more negative, or a total off by more than 1e-9, is rejected.
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(std::vector<double> values) : values_(std::move(values)) {
    double sum = 0.0;
    for (auto& x : values_) {
      if (x < -1e-12 || !std::isfinite(x)) throw Error(Errc::BadParams, "distribution entry out of range");
      if (x < 0.0) x = 0.0;
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(Errc::BadParams, "distribution does not sum to 1");
  }

  static Distribution point_mass(std::size_t n, Vertex v) {
    std::vector<double> x(n, 0.0);
    x.at(v) = 1.0;
    return Distribution(std::move(x));
  }
  static Distribution uniform(std::size_t n) {
    return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }  // NOLINT(google-explicit-constructor)

 private:
  std::vector<double> values_;
};

struct ChainProperties {
  bool irreducible = false;
  std::size_t period = 0;
  bool ergodic = false;
  bool lazy = false;
  bool reversible = false;
  std::optional<Distribution> pi;
  std::optional<std::size_t> t_star;
  double pi_max = 0.0;
  double pi_min = 0.0;
};

// ---------------------------------------------------------------------------
// Structure

struct DiagramStructure {
  bool irreducible = false;
  std::size_t period = 0;
  bool ergodic() const noexcept { return irreducible && period == 1; }
};

namespace detail {

inline std::vector<bool> reachable(const TransitionMatrix& P, Vertex start, bool forward) {
  const std::size_t n = P.size();
  std::vector<bool> seen(n, false);
  std::vector<Vertex> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    Vertex x = stack.back();
    stack.pop_back();
    auto visit = [&](Vertex y) {
      if (!seen[y]) {
        seen[y] = true;
        stack.push_back(y);
      }
    };
    if (forward) {
      for (const auto& e : P.row(x)) visit(e.target);
    } else {
      for (Vertex y : P.in_neighbors(x)) visit(y);
    }
  }
  return seen;
}

}  // namespace detail

/// Irreducibility from strong connectivity; period as the gcd over edges
/// (u,v) inside the component of vertex 0 of |level(u) + 1 - level(v)|,
/// with levels taken from a BFS rooted at 0.
inline DiagramStructure analyze_structure(const TransitionMatrix& P) {
  const std::size_t n = P.size();
  auto fwd = detail::reachable(P, 0, true);
  auto bwd = detail::reachable(P, 0, false);
  std::vector<bool> in_scc(n);
  bool irreducible = true;
  for (Vertex v = 0; v < n; ++v) {
    in_scc[v] = fwd[v] && bwd[v];
    irreducible = irreducible && in_scc[v];
  }

  std::vector<std::int64_t> level(n, -1);
  std::queue<Vertex> queue;
  level[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    Vertex x = queue.front();
    queue.pop();
    for (const auto& e : P.row(x)) {
      if (in_scc[e.target] && level[e.target] < 0) {
        level[e.target] = level[x] + 1;
        queue.push(e.target);
      }
    }
  }
  std::int64_t g = 0;
  for (Vertex u = 0; u < n; ++u) {
    if (!in_scc[u]) continue;
    for (const auto& e : P.row(u)) {
      if (!in_scc[e.target]) continue;
      g = std::gcd(g, std::abs(level[u] + 1 - level[e.target]));
    }
  }
  return {irreducible, static_cast<std::size_t>(g == 0 ? 1 : g)};
}

inline bool is_lazy(const TransitionMatrix& P) {
  for (Vertex v = 0; v < P.size(); ++v) {
    if (P.diagonal(v) < Rational(1, 2)) return false;
  }
  return true;
}

inline void require_ergodic(const TransitionMatrix& P) {
  auto s = analyze_structure(P);
  if (!s.irreducible) throw Error(Errc::NotErgodic, "chain is reducible");
  if (s.period != 1) throw Error(Errc::NotErgodic, "chain has period " + std::to_string(s.period));
}

// ---------------------------------------------------------------------------
// Distances

inline double tv_distance(std::span<const double> xi, std::span<const double> zeta) {
  if (xi.size() != zeta.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(xi.size()) + " vs " + std::to_string(zeta.size()));
  }
  double l1 = 0.0;
  for (std::size_t i = 0; i < xi.size(); ++i) l1 += std::abs(xi[i] - zeta[i]);
  return 0.5 * l1;
}

// ---------------------------------------------------------------------------
// Stationary distribution

/// Solves (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1,
/// Gaussian elimination with partial pivoting.
inline Distribution stationary_direct(const TransitionMatrix& P) {
  const std::size_t n = P.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (Vertex u = 0; u < n; ++u) {
    for (const auto& e : P.row(u)) a[e.target][u] += e.p.to_double();
  }
  for (Vertex v = 0; v < n; ++v) a[v][v] -= 1.0;
  for (Vertex u = 0; u < n; ++u) a[n - 1][u] = 1.0;
  a[n - 1][n] = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    if (std::abs(a[piv][col]) < 1e-14) throw Error(Errc::NoConvergence, "singular stationary system");
    std::swap(a[col], a[piv]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0) continue;
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = a[i][n] / a[i][i];
  return Distribution(std::move(pi));
}

namespace detail {

inline double stationary_residual(const TransitionMatrix& P, std::span<const double> pi) {
  auto next = P.apply(pi);
  double r = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) r += std::abs(next[i] - pi[i]);
  return r;
}

}  // namespace detail

/// Power iteration from the uniform vector until successive iterates differ
/// by at most 1e-14 in L1 (at most 1e6 rounds), falling back to the direct
/// solve when the iteration stalls or leaves a residual above 1e-10.
inline Distribution stationary(const TransitionMatrix& P) {
  require_ergodic(P);
  const std::size_t n = P.size();
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  bool converged = false;
  for (std::size_t it = 0; it < 1'000'000; ++it) {
    P.apply(x, next);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - x[i]);
    x.swap(next);
    if (change <= 1e-14) {
      converged = true;
      break;
    }
  }
  if (converged) {
    double sum = std::accumulate(x.begin(), x.end(), 0.0);
    for (auto& xi : x) xi /= sum;
    if (detail::stationary_residual(P, x) <= 1e-10) return Distribution(std::move(x));
  }
  auto pi = stationary_direct(P);
  if (detail::stationary_residual(P, pi.values()) > 1e-10) {
    throw Error(Errc::NoConvergence, "stationary residual above 1e-10");
  }
  return pi;
}

// ---------------------------------------------------------------------------
// Powers and mixing

inline Distribution power_row(const TransitionMatrix& P, Vertex v, std::size_t t) {
  if (v >= P.size()) throw Error(Errc::IndexOutOfRange, "start vertex");
  std::vector<double> x(P.size(), 0.0);
  x[v] = 1.0;
  std::vector<double> next(P.size());
  for (std::size_t s = 0; s < t; ++s) {
    P.apply(x, next);
    x.swap(next);
  }
  return Distribution(std::move(x));
}

/// All rows of P^t at once, advanced one step at a time.
class PowerRows {
 public:
  explicit PowerRows(const TransitionMatrix& P) : P_(&P), rows_(P.size(), std::vector<double>(P.size(), 0.0)) {
    for (Vertex v = 0; v < P.size(); ++v) rows_[v][v] = 1.0;
    scratch_.resize(P.size());
  }

  std::size_t time() const noexcept { return t_; }
  std::span<const double> row(Vertex v) const { return rows_[v]; }

  void advance() {
    for (auto& r : rows_) {
      P_->apply(r, scratch_);
      r.swap(scratch_);
    }
    ++t_;
  }

  /// max_v d_TV(P^t_{v,.}, target)
  double worst_distance(std::span<const double> target) const {
    double worst = 0.0;
    for (const auto& r : rows_) worst = std::max(worst, tv_distance(r, target));
    return worst;
  }

 private:
  const TransitionMatrix* P_;
  std::vector<std::vector<double>> rows_;
  std::vector<double> scratch_;
  std::size_t t_ = 0;
};

/// Rounding allowance on the d_TV <= eps test. Without it a distance that is
/// exactly eps (lazy K_4 at t=1 sits exactly on 1/4) can land one ulp above.
inline constexpr double kMixTolerance = 1e-12;

/// Smallest t with max_v d_TV(P^t_{v,.}, pi) <= eps; every t is checked.
inline std::size_t mixing_time(const TransitionMatrix& P, const Distribution& pi, double eps,
                               std::size_t cap = kDefaultMaxT) {
  if (!(eps > 0.0)) throw Error(Errc::BadParams, "eps must be positive");
  PowerRows rows(P);
  while (rows.worst_distance(pi) > eps + kMixTolerance) {
    if (rows.time() >= cap) {
      throw Error(Errc::CapExceeded, "mixing scan exceeded " + std::to_string(cap) + " steps");
    }
    rows.advance();
  }
  return rows.time();
}

inline std::size_t mixing_time(const TransitionMatrix& P, double eps, std::size_t cap = kDefaultMaxT) {
  return mixing_time(P, stationary(P), eps, cap);
}

inline std::size_t mixing_rate(const TransitionMatrix& P, std::size_t cap = kDefaultMaxT) {
  return mixing_time(P, 0.25, cap);
}

inline std::vector<double> expected_config(const TransitionMatrix& P, std::span<const TokenCount> mu0,
                                           std::size_t t) {
  if (mu0.size() != P.size()) throw Error(Errc::LengthMismatch, "initial configuration length");
  std::vector<double> x(mu0.size());
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    if (mu0[i] < 0) throw Error(Errc::NegativeTokens, "vertex " + std::to_string(i));
    x[i] = static_cast<double>(mu0[i]);
  }
  std::vector<double> next(x.size());
  for (std::size_t s = 0; s < t; ++s) {
    P.apply(x, next);
    x.swap(next);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Classification

/// Detailed balance pi_v P_{v,u} = pi_u P_{u,v} within 1e-9 for every pair.
inline bool is_reversible(const TransitionMatrix& P, const Distribution& pi) {
  for (Vertex v = 0; v < P.size(); ++v) {
    for (const auto& e : P.row(v)) {
      auto back = P.at(e.target, v);
      const double rev = back ? pi[e.target] * back->to_double() : 0.0;
      if (std::abs(pi[v] * e.p.to_double() - rev) > 1e-9) return false;
    }
  }
  return true;
}

/// pi and t* are only populated for ergodic chains; reversibility needs pi
/// and is reported false otherwise.
inline ChainProperties classify(const TransitionMatrix& P, std::size_t cap = kDefaultMaxT) {
  ChainProperties props;
  auto s = analyze_structure(P);
  props.irreducible = s.irreducible;
  props.period = s.period;
  props.ergodic = s.ergodic();
  props.lazy = is_lazy(P);
  if (!props.ergodic) return props;
  auto pi = stationary(P);
  props.reversible = is_reversible(P, pi);
  props.pi_max = *std::max_element(pi.values().begin(), pi.values().end());
  props.pi_min = *std::min_element(pi.values().begin(), pi.values().end());
  props.t_star = mixing_time(P, pi, 0.25, cap);
  props.pi = std::move(pi);
  return props;
}

}  // namespace detwalk
