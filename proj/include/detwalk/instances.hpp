#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "detwalk/chain.hpp"
#include "detwalk/error.hpp"
#include "detwalk/router.hpp"
#include "detwalk/simulator.hpp"

namespace detwalk {

struct Family {
  std::string kind;
  std::map<std::string, std::int64_t> params;

  friend bool operator==(const Family&, const Family&) = default;
};

/// Declared chain flags; reversible is left empty when a generator cannot
/// promise it either way.
struct ExpectedFlags {
  bool ergodic = true;
  bool lazy = false;
  std::optional<bool> reversible;

  friend bool operator==(const ExpectedFlags&, const ExpectedFlags&) = default;
};

struct InstanceSpec {
  std::string name;
  TransitionMatrix matrix;
  Configuration chi0;
  RouterSpec router;
  Family family;
  ExpectedFlags expected;

  friend bool operator==(const InstanceSpec&, const InstanceSpec&) = default;
};

/// Throws SchemaViolation when classify disagrees with the declared flags.
inline ChainProperties validate_instance(const InstanceSpec& inst, std::size_t cap = kDefaultMaxT) {
  if (inst.chi0.size() != inst.matrix.size()) {
    throw Error(Errc::SchemaViolation, inst.name + ": chi0 length differs from n");
  }
  auto props = classify(inst.matrix, cap);
  auto mismatch = [&](const char* flag) {
    throw Error(Errc::SchemaViolation, inst.name + ": declared " + flag + " flag does not match the chain");
  };
  if (props.ergodic != inst.expected.ergodic) mismatch("ergodic");
  if (props.lazy != inst.expected.lazy) mismatch("lazy");
  if (inst.expected.reversible && props.reversible != *inst.expected.reversible) mismatch("reversible");
  return props;
}

namespace detail {

inline std::int64_t as_i64(std::size_t x) { return static_cast<std::int64_t>(x); }

/// M tokens dealt one at a time to vertices 0, 1, ..., n-1, 0, ...
inline Configuration round_robin(std::size_t n, TokenCount M) {
  std::vector<TokenCount> chi(n, M / as_i64(n));
  for (std::size_t v = 0; v < static_cast<std::size_t>(M % as_i64(n)); ++v) ++chi[v];
  return Configuration(std::move(chi));
}

inline Configuration point_load(std::size_t n, TokenCount M) {
  std::vector<TokenCount> chi(n, 0);
  chi[0] = M;
  return Configuration(std::move(chi));
}

/// Self-loop `self`, every other vertex `other`.
inline TransitionMatrix complete_with_loops(std::size_t n, Rational self, Rational other) {
  std::vector<Triplet> t;
  t.reserve(n * n);
  for (Vertex u = 0; u < n; ++u) {
    for (Vertex v = 0; v < n; ++v) {
      const Rational& p = u == v ? self : other;
      t.push_back({u, v, p.num(), p.den()});
    }
  }
  return build_matrix(n, t);
}

}  // namespace detail

inline InstanceSpec lazy_complete(std::size_t n, std::size_t k) {
  if (n < 4 || n % 2 != 0) throw Error(Errc::BadParams, "lazy-complete needs even n >= 4");
  if (k < 2) throw Error(Errc::BadParams, "lazy-complete needs k >= 2");
  using detail::as_i64;
  InstanceSpec inst;
  inst.name = "lazy-complete-n" + std::to_string(n) + "-k" + std::to_string(k);
  inst.matrix = detail::complete_with_loops(n, Rational(as_i64(k) - 1, as_i64(k)), Rational(1, as_i64(k * (n - 1))));
  std::vector<TokenCount> chi(n, 0);
  for (std::size_t v = 0; v < n / 2; ++v) chi[v] = as_i64(k);
  inst.chi0 = Configuration(std::move(chi));
  inst.router = {RouterKind::Oblivious, OrderingDefault::SelfFirst, {}};
  inst.family = {"lazy-complete", {{"n", as_i64(n)}, {"k", as_i64(k)}}};
  inst.expected = {true, true, true};
  return inst;
}

/// K_{2n'} with P_{u,v} = 1/(2n') everywhere and (2k+1)n' tokens on each of
/// the first n' vertices, routed by SRT with ascending ties.
inline InstanceSpec srt_oscillator(std::size_t n_prime, std::size_t k) {
  if (n_prime < 1) throw Error(Errc::BadParams, "srt-oscillator needs n' >= 1");
  using detail::as_i64;
  const std::size_t n = 2 * n_prime;
  InstanceSpec inst;
  inst.name = "srt-oscillator-np" + std::to_string(n_prime) + "-k" + std::to_string(k);
  inst.matrix = detail::complete_with_loops(n, Rational(1, as_i64(n)), Rational(1, as_i64(n)));
  std::vector<TokenCount> chi(n, 0);
  for (std::size_t v = 0; v < n_prime; ++v) chi[v] = as_i64((2 * k + 1) * n_prime);
  inst.chi0 = Configuration(std::move(chi));
  inst.router = {RouterKind::Srt, OrderingDefault::Ascending, {}};
  inst.family = {"srt-oscillator", {{"nprime", as_i64(n_prime)}, {"k", as_i64(k)}}};
  inst.expected = {true, n == 2, true};
  return inst;
}

/// Lazy complete carrier (self 1/2, others 1/(2(n-1))) holding
/// M = (k - 1/2) n tokens in the given placement.
inline InstanceSpec integrality_gap(std::size_t n, std::size_t k, std::span<const TokenCount> placement) {
  if (n < 4 || n % 2 != 0) throw Error(Errc::BadParams, "integrality-gap needs even n >= 4");
  if (k < 1) throw Error(Errc::BadParams, "integrality-gap needs k >= 1");
  if (placement.size() != n) throw Error(Errc::BadParams, "placement length differs from n");
  using detail::as_i64;
  const TokenCount M = as_i64((2 * k - 1) * n / 2);
  Configuration chi(std::vector<TokenCount>(placement.begin(), placement.end()));
  if (chi.total() != M) {
    throw Error(Errc::MassMismatch, "placement holds " + std::to_string(chi.total()) + " tokens, expected " +
                                        std::to_string(M));
  }
  InstanceSpec inst;
  inst.name = "integrality-gap-n" + std::to_string(n) + "-k" + std::to_string(k);
  inst.matrix = detail::complete_with_loops(n, Rational(1, 2), Rational(1, as_i64(2 * (n - 1))));
  inst.chi0 = std::move(chi);
  inst.router = {RouterKind::Srt, OrderingDefault::Ascending, {}};
  inst.family = {"integrality-gap", {{"n", as_i64(n)}, {"k", as_i64(k)}}};
  inst.expected = {true, true, true};
  return inst;
}

/// Default placement: the M tokens dealt round-robin.
inline InstanceSpec integrality_gap(std::size_t n, std::size_t k) {
  if (n < 4 || n % 2 != 0) throw Error(Errc::BadParams, "integrality-gap needs even n >= 4");
  if (k < 1) throw Error(Errc::BadParams, "integrality-gap needs k >= 1");
  auto chi = detail::round_robin(n, detail::as_i64((2 * k - 1) * n / 2));
  return integrality_gap(n, k, chi.tokens());
}

// ---------------------------------------------------------------------------
// Standard suite carriers

inline TransitionMatrix lazy_cycle(std::size_t n) {
  if (n < 3) throw Error(Errc::BadParams, "cycle needs n >= 3");
  std::vector<Triplet> t;
  for (Vertex v = 0; v < n; ++v) {
    t.push_back({v, v, 1, 2});
    t.push_back({v, (v + 1) % n, 1, 4});
    t.push_back({v, (v + n - 1) % n, 1, 4});
  }
  return build_matrix(n, t);
}

inline TransitionMatrix lazy_hypercube(std::size_t d) {
  if (d < 1) throw Error(Errc::BadParams, "hypercube needs d >= 1");
  const std::size_t n = std::size_t{1} << d;
  std::vector<Triplet> t;
  for (Vertex v = 0; v < n; ++v) {
    t.push_back({v, v, 1, 2});
    for (std::size_t b = 0; b < d; ++b) t.push_back({v, v ^ (std::size_t{1} << b), 1, static_cast<std::int64_t>(2 * d)});
  }
  return build_matrix(n, t);
}

inline TransitionMatrix lazy_complete_graph(std::size_t n) {
  return detail::complete_with_loops(n, Rational(1, 2), Rational(1, detail::as_i64(2 * (n - 1))));
}

/// Directed cycle v -> v+1 with self-loops 1/2; vertex 0 splits its moving
/// half between 1 and n/2.
inline TransitionMatrix lazy_chord_cycle(std::size_t n) {
  if (n < 4) throw Error(Errc::BadParams, "chord cycle needs n >= 4");
  std::vector<Triplet> t;
  for (Vertex v = 0; v < n; ++v) {
    t.push_back({v, v, 1, 2});
    if (v == 0) {
      t.push_back({0, 1, 1, 4});
      t.push_back({0, n / 2, 1, 4});
    } else {
      t.push_back({v, (v + 1) % n, 1, 2});
    }
  }
  return build_matrix(n, t);
}

/// Each carrier with loads M in {n, 10n, 1000n}, once dealt round-robin and
/// once concentrated on vertex 0. Sorted by name.
inline std::vector<InstanceSpec> standard_suite() {
  struct Carrier {
    std::string name;
    std::string kind;
    std::map<std::string, std::int64_t> params;
    TransitionMatrix matrix;
    bool reversible;
  };
  std::vector<Carrier> carriers;
  for (std::size_t n : {4, 8, 16}) {
    carriers.push_back({"cycle-" + std::to_string(n), "lazy-cycle", {{"n", detail::as_i64(n)}}, lazy_cycle(n), true});
  }
  for (std::size_t d : {2, 3, 4}) {
    carriers.push_back(
        {"hypercube-" + std::to_string(d), "lazy-hypercube", {{"d", detail::as_i64(d)}}, lazy_hypercube(d), true});
  }
  for (std::size_t n : {4, 8}) {
    carriers.push_back({"complete-" + std::to_string(n), "lazy-complete-graph", {{"n", detail::as_i64(n)}},
                        lazy_complete_graph(n), true});
  }
  carriers.push_back({"chord-cycle-8", "lazy-chord-cycle", {{"n", 8}}, lazy_chord_cycle(8), false});

  std::vector<InstanceSpec> suite;
  for (const auto& c : carriers) {
    const auto n = detail::as_i64(c.matrix.size());
    for (std::int64_t factor : {1, 10, 1000}) {
      for (bool spread : {true, false}) {
        InstanceSpec inst;
        inst.name = c.name + "-M" + std::to_string(factor * n) + (spread ? "-rr" : "-point");
        inst.matrix = c.matrix;
        inst.chi0 = spread ? detail::round_robin(c.matrix.size(), factor * n)
                           : detail::point_load(c.matrix.size(), factor * n);
        inst.router = {RouterKind::Srt, OrderingDefault::Ascending, {}};
        inst.family = {c.kind, c.params};
        inst.family.params["M"] = factor * n;
        inst.expected = {true, true, c.reversible};
        suite.push_back(std::move(inst));
      }
    }
  }
  std::sort(suite.begin(), suite.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return suite;
}

// ---------------------------------------------------------------------------
// Random chains

namespace detail {

/// Uniform draw in [lo, hi] from the raw mt19937_64 stream, so instances
/// depend only on the seed and not on the standard library's distributions.
inline std::int64_t draw(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<std::int64_t>(rng() % span);
}

}  // namespace detail

/// Ergodic lazy chain with rational rows. Every vertex has a self-loop of
/// probability >= 1/2, an edge to its successor on a seeded Hamiltonian
/// cycle, and out_degree - 2 further random targets. Carries 10n tokens
/// dropped at seeded random vertices, SRT router with ascending ties.
inline InstanceSpec random_chain(std::size_t n, std::size_t out_degree, std::int64_t max_denominator,
                                 std::uint64_t seed) {
  if (n < 2) throw Error(Errc::BadParams, "random chain needs n >= 2");
  if (out_degree < 2 || out_degree > n) throw Error(Errc::BadParams, "out_degree must lie in [2, n]");
  const auto others = static_cast<std::int64_t>(out_degree - 1);
  const std::int64_t min_den = std::max<std::int64_t>(2, 2 * others);
  if (max_denominator < min_den) throw Error(Errc::BadParams, "max_denominator too small for out_degree");

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<Vertex> cycle(n);
    std::iota(cycle.begin(), cycle.end(), Vertex{0});
    for (std::size_t i = n - 1; i > 0; --i) {
      std::swap(cycle[i], cycle[static_cast<std::size_t>(detail::draw(rng, 0, detail::as_i64(i)))]);
    }
    std::vector<Vertex> succ(n);
    for (std::size_t i = 0; i < n; ++i) succ[cycle[i]] = cycle[(i + 1) % n];

    std::vector<Triplet> triplets;
    for (Vertex v = 0; v < n; ++v) {
      std::vector<Vertex> targets{succ[v]};
      while (targets.size() < out_degree - 1) {
        auto u = static_cast<Vertex>(detail::draw(rng, 0, detail::as_i64(n) - 1));
        if (u != v && std::find(targets.begin(), targets.end(), u) == targets.end()) targets.push_back(u);
      }
      const std::int64_t den = detail::draw(rng, min_den, max_denominator);
      const std::int64_t self = detail::draw(rng, (den + 1) / 2, den - others);
      // split den - self into `others` positive parts
      std::int64_t rest = den - self;
      std::vector<std::int64_t> parts(targets.size(), 1);
      rest -= others;
      while (rest > 0) {
        ++parts[static_cast<std::size_t>(detail::draw(rng, 0, others - 1))];
        --rest;
      }
      triplets.push_back({v, v, self, den});
      for (std::size_t i = 0; i < targets.size(); ++i) triplets.push_back({v, targets[i], parts[i], den});
    }
    auto matrix = build_matrix(n, triplets);
    if (!analyze_structure(matrix).ergodic() || !is_lazy(matrix)) continue;

    std::vector<TokenCount> chi(n, 0);
    for (std::size_t j = 0; j < 10 * n; ++j) ++chi[static_cast<std::size_t>(detail::draw(rng, 0, detail::as_i64(n) - 1))];

    InstanceSpec inst;
    inst.name = "random-n" + std::to_string(n) + "-d" + std::to_string(out_degree) + "-s" + std::to_string(seed);
    inst.matrix = std::move(matrix);
    inst.chi0 = Configuration(std::move(chi));
    inst.router = {RouterKind::Srt, OrderingDefault::Ascending, {}};
    inst.family = {"random",
                   {{"n", detail::as_i64(n)},
                    {"out_degree", detail::as_i64(out_degree)},
                    {"max_denominator", max_denominator},
                    {"seed", static_cast<std::int64_t>(seed)}}};
    inst.expected = {true, true, std::nullopt};
    return inst;
  }
  throw Error(Errc::GenerationFailed, "no ergodic lazy chain within 100 attempts");
}

}  // namespace detwalk
