#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "detwalk/chain.hpp"
#include "detwalk/rational.hpp"
#include "detwalk/router.hpp"
#include "detwalk/simulator.hpp"

namespace detwalk {

/// Exact per-row balance of the oblivious rule: |Z_{v,u} - chi_v P_{v,u}| <= 1
/// on every dispatched row of a T-step run.
struct ObliviousAudit {
  std::size_t rows_checked = 0;
  Rational worst{0};
  bool pass = true;
  std::string first_violation;
};

inline ObliviousAudit audit_oblivious_balance(const TransitionMatrix& P, RouterSpec spec, const Configuration& chi0,
                                              std::size_t T) {
  spec.kind = RouterKind::Oblivious;
  ObliviousAudit audit;
  run(P, spec, chi0, T, false, [&](std::size_t t, const Configuration& chi, const ZRecord& z, const Router&) {
    for (Vertex v = 0; v < P.size(); ++v) {
      const auto row = P.row(v);
      for (std::size_t k = 0; k < row.size(); ++k) {
        const auto& p = row[k].p;
        const Rational dev = Rational::from_wide(
            static_cast<i128>(z.rows[v][k]) * p.den() - static_cast<i128>(chi[v]) * p.num(), p.den());
        const Rational mag = dev < Rational(0) ? Rational(0) - dev : dev;
        if (mag > audit.worst) audit.worst = mag;
        if (mag > Rational(1) && audit.pass) {
          audit.pass = false;
          audit.first_violation = "t=" + std::to_string(t) + " v=" + std::to_string(v) + " u=" +
                                  std::to_string(row[k].target) + " dev=" + dev.str();
        }
      }
      ++audit.rows_checked;
    }
  });
  return audit;
}

/// SRT balance over a T-step run, exact. After every step and for every edge
/// (v,u) the prefix deviation d = c_{v,u} - s_v P_{v,u} must satisfy |d| < 1.
/// Every window sum of Z_{v,u} - chi_v P_{v,u} over steps a..b is the
/// difference of two prefix deviations (the empty prefix included), so the
/// window condition is max d - min d < 2 over the recorded prefixes.
struct SrtAudit {
  std::size_t prefixes_checked = 0;
  Rational worst_prefix{0};
  Rational worst_window{0};
  bool prefix_pass = true;
  bool window_pass = true;
  std::string first_violation;
};

inline SrtAudit audit_srt_balance(const TransitionMatrix& P, RouterSpec spec, const Configuration& chi0,
                                  std::size_t T) {
  spec.kind = RouterKind::Srt;
  SrtAudit audit;
  std::vector<std::vector<Rational>> lo(P.size()), hi(P.size());
  for (Vertex v = 0; v < P.size(); ++v) {
    lo[v].assign(P.out_degree(v), Rational(0));
    hi[v].assign(P.out_degree(v), Rational(0));
  }
  run(P, spec, chi0, T, false, [&](std::size_t t, const Configuration&, const ZRecord&, const Router& router) {
    const auto& srt = std::get<SrtRouter>(router);
    for (Vertex v = 0; v < P.size(); ++v) {
      for (std::size_t k = 0; k < P.out_degree(v); ++k) {
        const Rational d = srt.deviation(v, k);
        const Rational mag = d < Rational(0) ? Rational(0) - d : d;
        if (mag > audit.worst_prefix) audit.worst_prefix = mag;
        if (!(mag < Rational(1)) && audit.prefix_pass) {
          audit.prefix_pass = false;
          audit.first_violation = "prefix t=" + std::to_string(t) + " v=" + std::to_string(v) + " dev=" + d.str();
        }
        if (d < lo[v][k]) lo[v][k] = d;
        if (d > hi[v][k]) hi[v][k] = d;
        const Rational spread = hi[v][k] - lo[v][k];
        if (spread > audit.worst_window) audit.worst_window = spread;
        if (!(spread < Rational(2)) && audit.window_pass) {
          audit.window_pass = false;
          audit.first_violation = "window t=" + std::to_string(t) + " v=" + std::to_string(v) + " spread=" + spread.str();
        }
        ++audit.prefixes_checked;
      }
    }
  });
  return audit;
}

}  // namespace detwalk
