// Copyright 2026 The ucp-lns Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ucplns/tri_graph.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include <json.hpp>

namespace ucplns {

namespace {

using nlohmann::json;

constexpr double kTightTol = 1e-6;

}  // namespace

const std::array<FeatureSlot, kVarFeatures>& var_feature_schema() {
  static const std::array<FeatureSlot, kVarFeatures> s = {{
      {"cost", true},
      {"lower", true},
      {"upper", true},
      {"is_binary", true},
      {"kind_u", true},
      {"kind_P", true},
      {"kind_S", true},
      {"kind_s", true},
      {"kind_d", true},
      {"period_frac", true},
      {"value", false},
  }};
  return s;
}

const std::array<FeatureSlot, kConFeatures>& con_feature_schema() {
  static const std::array<FeatureSlot, kConFeatures> s = {{
      {"rhs", true},
      {"sense_le", true},
      {"sense_eq", true},
      {"sense_ge", true},
      {"nnz", true},
      {"family_C1", true},
      {"family_C2", true},
      {"family_C3", true},
      {"family_C4", true},
      {"family_C5", true},
      {"family_C6", true},
      {"family_C7", true},
  }};
  return s;
}

const std::array<FeatureSlot, kObjFeatures>& obj_feature_schema() {
  static const std::array<FeatureSlot, kObjFeatures> s = {{
      {"num_variables", true},
      {"num_constraints", true},
      {"abs_cost_sum", true},
  }};
  return s;
}

std::string_view var_kind_key(int kind) {
  static constexpr std::string_view keys[] = {"u", "P", "S", "s", "d"};
  return keys[kind];
}

std::string family_key(int family_index) { return "C" + std::to_string(family_index + 1); }

std::size_t TripartiteGraph::num_vc_edges() const {
  std::size_t n = 0;
  for (const auto& per_kind : edges_vc) {
    for (const auto& e : per_kind) n += e.size();
  }
  return n;
}

TripartiteGraph encode(const MipProblem& m) {
  TripartiteGraph g;
  const int periods = std::max(1, m.periods());
  std::vector<std::pair<int, int>> var_slot(m.num_variables());
  for (int j = 0; j < m.num_variables(); ++j) {
    const Variable& v = m.variable(j);
    if (v.tag.kind == VarKind::kAux || v.tag.unit < 0 || v.tag.period < 0) {
      throw Error(ErrorCode::kMissingTags, "variable " + m.variable_name(j) + " has no UCP tag");
    }
  }
  // Order by (kind, unit, period); build_mip already emits this order, other
  // producers may not.
  std::vector<int> order(m.num_variables());
  for (int j = 0; j < m.num_variables(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const VarTag& x = m.variable(a).tag;
    const VarTag& y = m.variable(b).tag;
    return std::tie(x.kind, x.unit, x.period) < std::tie(y.kind, y.unit, y.period);
  });
  for (int j : order) {
    const Variable& v = m.variable(j);
    const int k = static_cast<int>(v.tag.kind);
    VarNodeSet& set = g.var_nodes[k];
    var_slot[j] = {k, set.size()};
    FeatureRow f(kVarFeatures, 0.0);
    f[0] = v.cost;
    f[1] = v.lower;
    f[2] = std::isfinite(v.upper) ? v.upper : 0.0;
    f[3] = v.type == VarType::kBinary ? 1.0 : 0.0;
    f[4 + k] = 1.0;
    f[9] = static_cast<double>(v.tag.period) / periods;
    set.model_index.push_back(j);
    set.unit_period.emplace_back(v.tag.unit, v.tag.period);
    set.features.push_back(std::move(f));
    if (v.cost != 0.0) g.edges_vo[k].push_back({var_slot[j].second, v.cost});
  }
  for (int i = 0; i < m.num_constraints(); ++i) {
    const Constraint& c = m.constraint(i);
    if (c.tag.family == Family::kOther) {
      throw Error(ErrorCode::kMissingTags, "row " + m.constraint_name(i) + " has no UCP family");
    }
    const int f = static_cast<int>(c.tag.family) - 1;
    ConNodeSet& set = g.con_nodes[f];
    const int slot = set.size();
    FeatureRow feat(kConFeatures, 0.0);
    feat[0] = c.rhs;
    feat[1 + static_cast<int>(c.sense)] = 1.0;
    feat[4] = static_cast<double>(c.index.size());
    feat[5 + f] = 1.0;
    set.model_index.push_back(i);
    set.tags.push_back(c.tag);
    set.features.push_back(std::move(feat));
    // Edges sorted by variable node so that output does not depend on the
    // order coefficients were written in.
    std::vector<std::pair<std::pair<int, int>, double>> row;
    for (std::size_t k = 0; k < c.index.size(); ++k) {
      if (c.coef[k] != 0.0) row.push_back({var_slot[c.index[k]], c.coef[k]});
    }
    std::sort(row.begin(), row.end());
    for (const auto& [vs, a] : row) g.edges_vc[vs.first][f].push_back({vs.second, slot, a});
  }
  std::vector<double> abs_costs;
  for (const auto& v : m.variables()) abs_costs.push_back(std::abs(v.cost));
  std::sort(abs_costs.begin(), abs_costs.end());
  double total = 0.0;
  for (double a : abs_costs) total += a;
  g.obj_node.features = {static_cast<double>(m.num_variables()),
                         static_cast<double>(m.num_constraints()), total};
  g.obj_node.units = m.units();
  g.obj_node.periods = m.periods();
  return g;
}

TripartiteGraph attach_solution_features(const TripartiteGraph& g, const std::vector<double>& sol,
                                         SolutionMode /*mode*/) {
  std::size_t expected = 0;
  for (const auto& set : g.var_nodes) expected += set.model_index.size();
  if (sol.size() != expected) {
    throw Error(ErrorCode::kIncompleteSolution, "solution has " + std::to_string(sol.size()) +
                                                    " values, graph has " +
                                                    std::to_string(expected) + " variables");
  }
  TripartiteGraph out = g;
  // Node-local value per (kind, slot).
  std::array<std::vector<double>, kNumVarKinds> value;
  for (int k = 0; k < kNumVarKinds; ++k) {
    auto& set = out.var_nodes[k];
    value[k].resize(set.size());
    for (int i = 0; i < set.size(); ++i) {
      const double x = sol[set.model_index[i]];
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::kIncompleteSolution,
                    "no value for variable " + std::to_string(set.model_index[i]));
      }
      value[k][i] = x;
      set.features[i][kVarValueSlot] = x;
    }
  }
  for (int f = 0; f < kNumFamilies; ++f) {
    const auto& set = out.con_nodes[f];
    std::vector<double> activity(set.size(), 0.0), scale(set.size(), 0.0);
    for (int k = 0; k < kNumVarKinds; ++k) {
      for (const EdgeVC& e : out.edges_vc[k][f]) {
        activity[e.con] += e.coef * value[k][e.var];
        scale[e.con] = std::max(scale[e.con], std::abs(e.coef));
      }
    }
    auto& co = out.edges_co[f];
    co.clear();
    for (int j = 0; j < set.size(); ++j) {
      const double rhs = set.features[j][0];
      const bool eq = set.features[j][2] != 0.0;
      const double s = scale[j] > 0.0 ? scale[j] : 1.0;
      if (eq || std::abs(activity[j] - rhs) / s <= kTightTol) co.push_back({j, rhs});
    }
  }
  return out;
}

std::string serialize(const TripartiteGraph& g) {
  json var_nodes = json::object();
  for (int k = 0; k < kNumVarKinds; ++k) {
    const auto& set = g.var_nodes[k];
    if (set.size() == 0) continue;
    json up = json::array();
    for (auto [u, t] : set.unit_period) up.push_back({u, t});
    var_nodes[std::string(var_kind_key(k))] = {
        {"index", set.model_index}, {"tags", up}, {"features", set.features}};
  }
  json con_nodes = json::object();
  for (int f = 0; f < kNumFamilies; ++f) {
    const auto& set = g.con_nodes[f];
    json tags = json::array();
    for (const ConTag& t : set.tags) {
      tags.push_back({std::string(to_string(t.equation)), t.unit, t.period, t.step});
    }
    con_nodes[family_key(f)] = {{"index", set.model_index}, {"tags", tags}, {"features", set.features}};
  }
  json edges_vc = json::object();
  for (int k = 0; k < kNumVarKinds; ++k) {
    for (int f = 0; f < kNumFamilies; ++f) {
      if (g.edges_vc[k][f].empty()) continue;
      json list = json::array();
      for (const EdgeVC& e : g.edges_vc[k][f]) list.push_back({e.var, e.con, e.coef});
      edges_vc[std::string(var_kind_key(k)) + "-" + family_key(f)] = std::move(list);
    }
  }
  json edges_vo = json::object();
  for (int k = 0; k < kNumVarKinds; ++k) {
    if (g.var_nodes[k].size() == 0) continue;
    json list = json::array();
    for (const EdgeVO& e : g.edges_vo[k]) list.push_back({e.var, e.coef});
    edges_vo[std::string(var_kind_key(k))] = std::move(list);
  }
  json edges_co = json::object();
  for (int f = 0; f < kNumFamilies; ++f) {
    json list = json::array();
    for (const EdgeCO& e : g.edges_co[f]) list.push_back({e.con, e.rhs});
    edges_co[family_key(f)] = std::move(list);
  }
  json doc = {{"schema_version", g.schema_version},
              {"var_nodes", var_nodes},
              {"con_nodes", con_nodes},
              {"obj_node",
               {{"features", g.obj_node.features},
                {"units", g.obj_node.units},
                {"periods", g.obj_node.periods}}},
              {"edges_vc", edges_vc},
              {"edges_vo", edges_vo},
              {"edges_co", edges_co}};
  return doc.dump();
}

namespace {

[[noreturn]] void malformed(const std::string& msg) {
  throw Error(ErrorCode::kMalformedInput, "graph: " + msg);
}

int kind_from_key(const std::string& key) {
  for (int k = 0; k < kNumVarKinds; ++k) {
    if (key == var_kind_key(k)) return k;
  }
  malformed("unknown variable kind '" + key + "'");
}

int family_from_key(const std::string& key) {
  for (int f = 0; f < kNumFamilies; ++f) {
    if (key == family_key(f)) return f;
  }
  malformed("unknown constraint family '" + key + "'");
}

Equation equation_from_string(const std::string& s) {
  for (int e = 0; e <= static_cast<int>(Equation::kOther); ++e) {
    if (to_string(static_cast<Equation>(e)) == s) return static_cast<Equation>(e);
  }
  malformed("unknown equation '" + s + "'");
}

void check_rows(const std::vector<FeatureRow>& rows, std::size_t width, std::size_t count,
                const std::string& where) {
  if (rows.size() != count) malformed(where + ": feature count differs from node count");
  for (const auto& r : rows) {
    if (r.size() != width) malformed(where + ": feature row of width " + std::to_string(r.size()));
  }
}

}  // namespace

TripartiteGraph deserialize(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  if (!doc.is_object()) malformed("document is not an object");
  TripartiteGraph g;
  try {
    g.schema_version = doc.at("schema_version").get<int>();
    if (g.schema_version != kGraphSchemaVersion) {
      throw Error(ErrorCode::kVersionMismatch,
                  "graph schema version " + std::to_string(g.schema_version) + ", expected " +
                      std::to_string(kGraphSchemaVersion));
    }
    for (const auto& key : {"var_nodes", "con_nodes", "obj_node", "edges_vc", "edges_vo", "edges_co"}) {
      if (!doc.contains(key)) malformed(std::string("missing key ") + key);
    }
    for (auto& [key, val] : doc.at("var_nodes").items()) {
      auto& set = g.var_nodes[kind_from_key(key)];
      set.model_index = val.at("index").get<std::vector<int>>();
      for (const auto& t : val.at("tags")) set.unit_period.emplace_back(t.at(0).get<int>(), t.at(1).get<int>());
      set.features = val.at("features").get<std::vector<FeatureRow>>();
      if (set.unit_period.size() != set.model_index.size()) malformed(key + ": tag count");
      check_rows(set.features, kVarFeatures, set.model_index.size(), key);
    }
    for (auto& [key, val] : doc.at("con_nodes").items()) {
      auto& set = g.con_nodes[family_from_key(key)];
      const Family fam = static_cast<Family>(family_from_key(key) + 1);
      set.model_index = val.at("index").get<std::vector<int>>();
      for (const auto& t : val.at("tags")) {
        set.tags.push_back({fam, equation_from_string(t.at(0).get<std::string>()), t.at(1).get<int>(),
                            t.at(2).get<int>(), t.at(3).get<int>()});
      }
      set.features = val.at("features").get<std::vector<FeatureRow>>();
      if (set.tags.size() != set.model_index.size()) malformed(key + ": tag count");
      check_rows(set.features, kConFeatures, set.model_index.size(), key);
    }
    const json& obj = doc.at("obj_node");
    g.obj_node.features = obj.at("features").get<FeatureRow>();
    g.obj_node.units = obj.at("units").get<int>();
    g.obj_node.periods = obj.at("periods").get<int>();
    if (g.obj_node.features.size() != kObjFeatures) malformed("objective feature width");

    for (auto& [key, val] : doc.at("edges_vc").items()) {
      const auto dash = key.find('-');
      if (dash == std::string::npos) malformed("bad edge key '" + key + "'");
      const int k = kind_from_key(key.substr(0, dash));
      const int f = family_from_key(key.substr(dash + 1));
      for (const auto& e : val) {
        EdgeVC edge{e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()};
        if (edge.var < 0 || edge.var >= g.var_nodes[k].size() || edge.con < 0 ||
            edge.con >= g.con_nodes[f].size()) {
          malformed("edge " + key + " references a missing node");
        }
        g.edges_vc[k][f].push_back(edge);
      }
    }
    for (auto& [key, val] : doc.at("edges_vo").items()) {
      const int k = kind_from_key(key);
      for (const auto& e : val) {
        EdgeVO edge{e.at(0).get<int>(), e.at(1).get<double>()};
        if (edge.var < 0 || edge.var >= g.var_nodes[k].size()) malformed("edge_vo out of range");
        g.edges_vo[k].push_back(edge);
      }
    }
    for (auto& [key, val] : doc.at("edges_co").items()) {
      const int f = family_from_key(key);
      for (const auto& e : val) {
        EdgeCO edge{e.at(0).get<int>(), e.at(1).get<double>()};
        if (edge.con < 0 || edge.con >= g.con_nodes[f].size()) malformed("edge_co out of range");
        g.edges_co[f].push_back(edge);
      }
    }
  } catch (const json::exception& e) {
    malformed(e.what());
  }
  return g;
}

}  // namespace ucplns
