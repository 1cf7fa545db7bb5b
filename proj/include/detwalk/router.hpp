#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "detwalk/chain.hpp"
#include "detwalk/error.hpp"
#include "detwalk/rational.hpp"

namespace detwalk {

/// Largest per-vertex load accepted by the SRT dispatcher.
inline constexpr TokenCount kMaxSrtLoad = TokenCount{1} << 48;

enum class RouterKind { Oblivious, Srt };
enum class OrderingDefault { Ascending, SelfFirst };

struct RouterSpec {
  RouterKind kind = RouterKind::Srt;
  OrderingDefault ordering = OrderingDefault::Ascending;
  std::map<Vertex, std::vector<Vertex>> overrides;

  friend bool operator==(const RouterSpec&, const RouterSpec&) = default;
};

/// Per-vertex permutation of the out-neighbourhood. Used as the surplus order
/// by the oblivious router and as the tie-break order by the SRT router.
class NeighborOrdering {
 public:
  NeighborOrdering() = default;

  static NeighborOrdering make(const TransitionMatrix& P, OrderingDefault base,
                               const std::map<Vertex, std::vector<Vertex>>& overrides = {}) {
    NeighborOrdering ord;
    ord.order_.resize(P.size());
    for (Vertex v = 0; v < P.size(); ++v) {
      auto nbrs = P.out_neighbors(v);  // ascending
      if (base == OrderingDefault::SelfFirst) {
        auto it = std::find(nbrs.begin(), nbrs.end(), v);
        if (it != nbrs.end()) std::rotate(nbrs.begin(), it, it + 1);
      }
      ord.order_[v] = std::move(nbrs);
    }
    for (const auto& [v, seq] : overrides) {
      if (v >= P.size()) throw Error(Errc::IndexOutOfRange, "ordering override vertex " + std::to_string(v));
      auto expected = P.out_neighbors(v);
      auto sorted = seq;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != expected) {
        throw Error(Errc::BadParams, "ordering override at " + std::to_string(v) + " is not a permutation of N+(v)");
      }
      ord.order_[v] = seq;
    }
    return ord;
  }

  std::span<const Vertex> at(Vertex v) const { return order_.at(v); }
  std::size_t size() const noexcept { return order_.size(); }

  /// rank[i] = position of row(v)[i].target in the ordering of v.
  std::vector<std::size_t> ranks(const TransitionMatrix& P, Vertex v) const {
    const auto row = P.row(v);
    const auto& seq = order_.at(v);
    std::vector<std::size_t> rank(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      rank[i] = static_cast<std::size_t>(std::find(seq.begin(), seq.end(), row[i].target) - seq.begin());
    }
    return rank;
  }

 private:
  std::vector<std::vector<Vertex>> order_;
};

/// Z_{v,.} for the oblivious rule: floor(chi_v P_{v,u}) everywhere, plus one
/// surplus token to each of the first i* neighbours in `order`, where i* is
/// chi_v minus the sum of the floors. Output is aligned with `row`.
inline std::vector<TokenCount> oblivious_dispatch(TokenCount chi_v, std::span<const Transition> row,
                                                  std::span<const Vertex> order) {
  if (chi_v < 0) throw Error(Errc::NegativeTokens, "dispatch load");
  std::vector<TokenCount> z(row.size(), 0);
  if (chi_v == 0) return z;
  TokenCount floors = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    z[i] = static_cast<TokenCount>(row[i].p.value().floor_times(chi_v));
    floors += z[i];
  }
  TokenCount surplus = chi_v - floors;
  if (surplus < 0 || static_cast<std::size_t>(surplus) > row.size()) {
    throw Error(Errc::InternalInvariantViolation, "surplus outside [0, deg]");
  }
  for (std::size_t k = 0; k < static_cast<std::size_t>(surplus); ++k) {
    auto it = std::find_if(row.begin(), row.end(), [&](const Transition& e) { return e.target == order[k]; });
    ++z[static_cast<std::size_t>(it - row.begin())];
  }
  return z;
}

/// Stateless between steps; holds only the surplus ordering.
class ObliviousRouter {
 public:
  ObliviousRouter() = default;
  explicit ObliviousRouter(NeighborOrdering ordering) : ordering_(std::move(ordering)) {}

  const NeighborOrdering& ordering() const noexcept { return ordering_; }

  std::vector<TokenCount> dispatch(const TransitionMatrix& P, Vertex v, TokenCount chi_v) const {
    return oblivious_dispatch(chi_v, P.row(v), ordering_.at(v));
  }

 private:
  NeighborOrdering ordering_;
};

/// Served-count summary (s_v, c_{v,.}) of the SRT router sigma_v. The
/// sequence itself is never stored; the rule only depends on these counts.
class SrtRouter {
 public:
  SrtRouter() = default;
  SrtRouter(const TransitionMatrix& P, const NeighborOrdering& ordering) : vertices_(P.size()) {
    for (Vertex v = 0; v < P.size(); ++v) {
      auto& st = vertices_[v];
      for (const auto& e : P.row(v)) {
        st.targets.push_back(e.target);
        st.num.push_back(e.p.num());
        st.den.push_back(e.p.den());
      }
      st.rank = ordering.ranks(P, v);
      st.counts.assign(st.targets.size(), 0);
      st.period = 1;
      for (auto d : st.den) st.period = std::lcm(st.period, d);
    }
  }

  std::size_t size() const noexcept { return vertices_.size(); }
  TokenCount served(Vertex v) const { return vertices_.at(v).served; }
  std::span<const TokenCount> counts(Vertex v) const { return vertices_.at(v).counts; }
  std::span<const Vertex> targets(Vertex v) const { return vertices_.at(v).targets; }

  /// sigma_v(s_v): among neighbours with c_u < (s_v + 1) P_{v,u}, the one
  /// minimising (c_u + 1) / P_{v,u}, ties to the earliest in the ordering.
  /// Advances s_v and c_{v,u}. Returns the index into row(v).
  std::size_t next_index(Vertex v) {
    auto& st = vertices_.at(v);
    const i128 i_plus_1 = static_cast<i128>(st.served) + 1;
    std::size_t best = st.targets.size();
    for (std::size_t k = 0; k < st.targets.size(); ++k) {
      // c - (i+1) p < 0  <=>  c * den < (i+1) * num
      if (!(static_cast<i128>(st.counts[k]) * st.den[k] < i_plus_1 * st.num[k])) continue;
      if (best == st.targets.size()) {
        best = k;
        continue;
      }
      // (c_k + 1) / p_k  vs  (c_b + 1) / p_b
      const i128 lhs = detail::mul_checked(static_cast<i128>(st.counts[k] + 1) * st.den[k], st.num[best]);
      const i128 rhs = detail::mul_checked(static_cast<i128>(st.counts[best] + 1) * st.den[best], st.num[k]);
      if (lhs < rhs || (lhs == rhs && st.rank[k] < st.rank[best])) best = k;
    }
    if (best == st.targets.size()) {
      throw Error(Errc::InternalInvariantViolation, "empty candidate set at vertex " + std::to_string(v));
    }
    ++st.counts[best];
    ++st.served;
    return best;
  }

  Vertex next(Vertex v) { return vertices_.at(v).targets[next_index(v)]; }

  /// chi_v consecutive serves aggregated per destination, aligned with row(v).
  ///
  /// With L the lcm of the row's denominators, any L consecutive serves send
  /// exactly L P_{v,u} tokens to each u and leave every key (c_u + 1) / P_{v,u}
  /// and every membership test shifted by the same amount, so whole periods
  /// are applied in bulk and only the remainder is served one by one.
  std::vector<TokenCount> dispatch(Vertex v, TokenCount chi_v) {
    if (chi_v < 0) throw Error(Errc::NegativeTokens, "dispatch load");
    if (chi_v > kMaxSrtLoad) throw Error(Errc::BadParams, "per-vertex load above 2^48");
    auto& st = vertices_.at(v);
    std::vector<TokenCount> z(st.targets.size(), 0);
    const TokenCount periods = chi_v / st.period;
    if (periods > 0) {
      for (std::size_t k = 0; k < st.targets.size(); ++k) {
        const TokenCount share = detail::narrow_checked(
            static_cast<i128>(periods) * (st.period / st.den[k]) * st.num[k], "srt bulk share");
        z[k] += share;
        st.counts[k] += share;
      }
      st.served += periods * st.period;
    }
    for (TokenCount j = periods * st.period; j < chi_v; ++j) ++z[next_index(v)];
    return z;
  }

  /// c_{v,u} - s_v P_{v,u} for the k-th out-edge of v, exact.
  Rational deviation(Vertex v, std::size_t k) const {
    const auto& st = vertices_.at(v);
    return Rational::from_wide(static_cast<i128>(st.counts[k]) * st.den[k] - static_cast<i128>(st.served) * st.num[k],
                               st.den[k]);
  }

  /// max_u |c_{v,u} - s_v P_{v,u}|
  double prefix_deviation(Vertex v) const {
    double worst = 0.0;
    for (std::size_t k = 0; k < vertices_.at(v).targets.size(); ++k) {
      worst = std::max(worst, std::abs(deviation(v, k).to_double()));
    }
    return worst;
  }

  friend bool operator==(const SrtRouter&, const SrtRouter&) = default;

 private:
  struct VertexState {
    std::vector<Vertex> targets;
    std::vector<std::int64_t> num;
    std::vector<std::int64_t> den;
    std::vector<std::size_t> rank;
    std::vector<TokenCount> counts;
    TokenCount served = 0;
    std::int64_t period = 1;

    friend bool operator==(const VertexState&, const VertexState&) = default;
  };
  std::vector<VertexState> vertices_;
};

using Router = std::variant<ObliviousRouter, SrtRouter>;

inline Router make_router(const TransitionMatrix& P, const RouterSpec& spec) {
  auto ordering = NeighborOrdering::make(P, spec.ordering, spec.overrides);
  if (spec.kind == RouterKind::Oblivious) return ObliviousRouter(std::move(ordering));
  return SrtRouter(P, ordering);
}

inline std::vector<TokenCount> dispatch(Router& router, const TransitionMatrix& P, Vertex v, TokenCount chi_v) {
  return std::visit(
      [&](auto& r) -> std::vector<TokenCount> {
        if constexpr (std::is_same_v<std::decay_t<decltype(r)>, ObliviousRouter>) {
          return r.dispatch(P, v, chi_v);
        } else {
          return r.dispatch(v, chi_v);
        }
      },
      router);
}

inline std::string_view to_string(RouterKind k) { return k == RouterKind::Oblivious ? "oblivious" : "srt"; }
inline std::string_view to_string(OrderingDefault o) {
  return o == OrderingDefault::Ascending ? "ascending" : "self_first";
}

}  // namespace detwalk
