#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "detwalk/analysis.hpp"
#include "detwalk/chain.hpp"
#include "detwalk/error.hpp"
#include "detwalk/instances.hpp"
#include "detwalk/router.hpp"
#include "detwalk/simulator.hpp"

namespace detwalk::io {

using json = nlohmann::json;

/// 12 significant digits, the fixed float format of every CSV we write.
inline std::string fmt12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Matrix

inline json to_json(const TransitionMatrix& P) {
  json entries = json::array();
  for (const auto& t : P.triplets()) entries.push_back({t.u, t.v, t.num, t.den});
  return {{"n", P.size()}, {"entries", std::move(entries)}};
}

namespace detail {

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(Errc::SchemaViolation, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace detail

/// Errors from matrix validation surface as SchemaViolation.
inline TransitionMatrix matrix_from_json(const json& j) {
  const auto n = detail::field<std::size_t>(j, "n");
  const auto raw = detail::field<std::vector<std::vector<std::int64_t>>>(j, "entries");
  std::vector<Triplet> triplets;
  triplets.reserve(raw.size());
  for (const auto& e : raw) {
    if (e.size() != 4 || e[0] < 0 || e[1] < 0) throw Error(Errc::SchemaViolation, "entry must be [u, v, num, den]");
    triplets.push_back({static_cast<Vertex>(e[0]), static_cast<Vertex>(e[1]), e[2], e[3]});
  }
  try {
    return build_matrix(n, triplets);
  } catch (const Error& err) {
    throw Error(Errc::SchemaViolation, err.what());
  }
}

// ---------------------------------------------------------------------------
// Router

inline json to_json(const RouterSpec& spec) {
  json overrides = json::object();
  for (const auto& [v, seq] : spec.overrides) overrides[std::to_string(v)] = seq;
  return {{"type", std::string(to_string(spec.kind))},
          {"ordering", {{"default", std::string(to_string(spec.ordering))}, {"overrides", std::move(overrides)}}}};
}

inline RouterSpec router_from_json(const json& j) {
  RouterSpec spec;
  const auto type = detail::field<std::string>(j, "type");
  if (type == "oblivious") {
    spec.kind = RouterKind::Oblivious;
  } else if (type == "srt") {
    spec.kind = RouterKind::Srt;
  } else {
    throw Error(Errc::SchemaViolation, "router type '" + type + "'");
  }
  if (!j.contains("ordering")) return spec;
  const auto& ord = j.at("ordering");
  if (ord.contains("default")) {
    const auto d = detail::field<std::string>(ord, "default");
    if (d == "ascending") {
      spec.ordering = OrderingDefault::Ascending;
    } else if (d == "self_first") {
      spec.ordering = OrderingDefault::SelfFirst;
    } else {
      throw Error(Errc::SchemaViolation, "ordering default '" + d + "'");
    }
  }
  if (ord.contains("overrides")) {
    const auto& ov = ord.at("overrides");
    if (!ov.is_object()) throw Error(Errc::SchemaViolation, "overrides must be an object");
    for (const auto& [key, seq] : ov.items()) {
      std::size_t pos = 0;
      Vertex v = 0;
      try {
        v = std::stoul(key, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != key.size() || key.empty()) throw Error(Errc::SchemaViolation, "override key '" + key + "'");
      try {
        spec.overrides[v] = seq.get<std::vector<Vertex>>();
      } catch (const json::exception& e) {
        throw Error(Errc::SchemaViolation, std::string("override list: ") + e.what());
      }
    }
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Instance

inline json to_json(const InstanceSpec& inst) {
  json expected = {{"ergodic", inst.expected.ergodic}, {"lazy", inst.expected.lazy}};
  if (inst.expected.reversible) expected["reversible"] = *inst.expected.reversible;
  return {{"name", inst.name},
          {"matrix", to_json(inst.matrix)},
          {"chi0", std::vector<TokenCount>(inst.chi0.tokens().begin(), inst.chi0.tokens().end())},
          {"router", to_json(inst.router)},
          {"family", {{"kind", inst.family.kind}, {"params", inst.family.params}}},
          {"expected", std::move(expected)}};
}

/// "expected" is optional; without it the flags are taken from classify.
inline InstanceSpec instance_from_json(const json& j) {
  InstanceSpec inst;
  inst.name = detail::field<std::string>(j, "name");
  if (!j.contains("matrix")) throw Error(Errc::SchemaViolation, "missing field 'matrix'");
  inst.matrix = matrix_from_json(j.at("matrix"));
  try {
    inst.chi0 = Configuration(detail::field<std::vector<TokenCount>>(j, "chi0"));
  } catch (const Error& err) {
    if (err.code() == Errc::SchemaViolation) throw;
    throw Error(Errc::SchemaViolation, err.what());
  }
  if (inst.chi0.size() != inst.matrix.size()) throw Error(Errc::SchemaViolation, "chi0 length differs from n");
  if (!j.contains("router")) throw Error(Errc::SchemaViolation, "missing field 'router'");
  inst.router = router_from_json(j.at("router"));
  try {
    (void)NeighborOrdering::make(inst.matrix, inst.router.ordering, inst.router.overrides);
  } catch (const Error& err) {
    throw Error(Errc::SchemaViolation, err.what());
  }
  if (!j.contains("family")) throw Error(Errc::SchemaViolation, "missing field 'family'");
  const auto& fam = j.at("family");
  inst.family.kind = detail::field<std::string>(fam, "kind");
  inst.family.params = detail::field<std::map<std::string, std::int64_t>>(fam, "params");
  if (j.contains("expected")) {
    const auto& e = j.at("expected");
    inst.expected.ergodic = detail::field<bool>(e, "ergodic");
    inst.expected.lazy = detail::field<bool>(e, "lazy");
    if (e.contains("reversible")) inst.expected.reversible = detail::field<bool>(e, "reversible");
  } else {
    auto s = analyze_structure(inst.matrix);
    inst.expected.ergodic = s.ergodic();
    inst.expected.lazy = is_lazy(inst.matrix);
  }
  return inst;
}

inline json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(Errc::IoError, "short write to " + path);
}

inline void save_instance(const InstanceSpec& inst, const std::string& path) {
  write_file(path, to_json(inst).dump(2) + "\n");
}

inline InstanceSpec load_instance(const std::string& path) { return instance_from_json(parse(read_file(path))); }

// ---------------------------------------------------------------------------
// Reports and trajectories

inline json to_json(const BoundCheck& c) {
  return {{"name", c.name}, {"params", c.params}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}};
}

struct ReportRow {
  std::string instance;
  BoundCheck check;
};

inline json report_json(const std::vector<ReportRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    auto j = to_json(r.check);
    j["instance"] = r.instance;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = "instance,check,lhs,rhs,pass\n";
  for (const auto& r : rows) {
    out += r.instance + "," + r.check.name + "," + fmt12(r.check.lhs) + "," + fmt12(r.check.rhs) + "," +
           (r.check.pass ? "true" : "false") + "\n";
  }
  return out;
}

inline std::string trajectory_csv(const Trajectory& traj) {
  std::string out = "t,l1_discrepancy,linf_discrepancy,sum_tokens\n";
  for (const auto& s : discrepancy_series(traj)) {
    out += std::to_string(s.t) + "," + fmt12(s.l1) + "," + fmt12(s.linf) + "," + std::to_string(s.sum_tokens) + "\n";
  }
  return out;
}

/// Full state dump: chi and mu per step, Z rows (row order of each vertex)
/// when recorded.
inline json trajectory_json(const Trajectory& traj) {
  json chi = json::array(), mu = json::array(), z = json::array();
  for (const auto& c : traj.chi) chi.push_back(std::vector<TokenCount>(c.tokens().begin(), c.tokens().end()));
  for (const auto& m : traj.mu) mu.push_back(m);
  for (const auto& rec : traj.z) z.push_back(rec.rows);
  json out = {{"router", std::string(to_string(traj.kind))}, {"chi", std::move(chi)}, {"mu", std::move(mu)}};
  if (!traj.z.empty()) out["z"] = std::move(z);
  return out;
}

}  // namespace detwalk::io
