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

#include "ucplns/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ucplns/simplex.hpp"

namespace ucplns {

namespace {

using nlohmann::json;

constexpr double kLnEps = 1e-5;
constexpr double kScoreFloor = 1e-12;

Linear make_linear(int in, int out) {
  Linear l;
  l.in = in;
  l.out = out;
  l.weight.assign(static_cast<std::size_t>(in) * out, 0.0);
  l.bias.assign(out, 0.0);
  return l;
}

Mlp make_mlp(int in, int hidden) { return {make_linear(in, hidden), make_linear(hidden, hidden)}; }

template <typename F>
void for_each_mlp(PolicyWeights& w, F&& f) {
  for (auto& m : w.embed_var) f(m);
  for (auto& m : w.embed_con) f(m);
  f(w.embed_obj);
  for (auto& layer : w.layers) {
    for (auto& m : layer.f_vo) f(m);
    for (auto& m : layer.f_oc) f(m);
    for (auto& row : layer.f_vc) for (auto& m : row) f(m);
    for (auto& m : layer.f_co) f(m);
    for (auto& m : layer.f_ov) f(m);
    for (auto& row : layer.f_cv) for (auto& m : row) f(m);
    f(layer.f_o);
    for (auto& m : layer.f_c) f(m);
    for (auto& m : layer.f_v) f(m);
  }
}

void apply(const Linear& l, const double* x, double* y) {
  for (int o = 0; o < l.out; ++o) {
    const double* row = l.weight.data() + static_cast<std::size_t>(o) * l.in;
    double acc = l.bias[o];
    for (int i = 0; i < l.in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

std::vector<double> run(const Mlp& m, const std::vector<double>& x) {
  std::vector<double> h(m.l1.out), y(m.l2.out);
  apply(m.l1, x.data(), h.data());
  for (double& v : h) v = std::max(v, 0.0);
  apply(m.l2, h.data(), y.data());
  for (double& v : y) v = std::max(v, 0.0);
  return y;
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

std::vector<double> concat(const std::vector<double>& a, const std::vector<double>& b, double e) {
  std::vector<double> out = concat(a, b);
  out.push_back(e);
  return out;
}

std::vector<double> layer_norm(const std::vector<double>& x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  const double inv = 1.0 / std::sqrt(var + kLnEps);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) * inv;
  return out;
}

// Sum of a multiset of values that does not depend on their order.
double ordered_sum(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

// Collects messages per target node and sums them dimension-wise in sorted
// order, so relabeling the sources cannot change the result.
class Aggregator {
 public:
  Aggregator(int nodes, int hidden) : hidden_(hidden), msgs_(nodes) {}
  void add(int node, const std::vector<double>& m) { msgs_[node].push_back(m); }
  std::vector<double> sum(int node) {
    std::vector<double> out(hidden_, 0.0), col;
    auto& list = msgs_[node];
    for (int d = 0; d < hidden_; ++d) {
      col.clear();
      for (const auto& m : list) col.push_back(m[d]);
      out[d] = ordered_sum(col);
    }
    return out;
  }

 private:
  int hidden_;
  std::vector<std::vector<std::vector<double>>> msgs_;
};

// Per-kind standardization of the normalize-slots.
template <std::size_t W>
std::vector<std::vector<double>> normalize(const std::vector<FeatureRow>& rows,
                                           const std::array<FeatureSlot, W>& schema) {
  std::vector<std::vector<double>> out(rows);
  if (rows.empty()) return out;
  const double n = static_cast<double>(rows.size());
  std::vector<double> col;
  for (std::size_t s = 0; s < W; ++s) {
    if (!schema[s].normalize) continue;
    col.clear();
    for (const auto& r : rows) col.push_back(r[s]);
    const double mean = ordered_sum(col) / n;
    col.clear();
    for (const auto& r : rows) col.push_back((r[s] - mean) * (r[s] - mean));
    const double sd = std::sqrt(ordered_sum(col) / n);
    const double div = sd > 1e-12 ? sd : 1.0;
    for (auto& r : out) r[s] = (r[s] - mean) / div;
  }
  return out;
}

void check_linear(const Linear& l, int in, int out, const char* what) {
  if (l.in != in || l.out != out || l.weight.size() != static_cast<std::size_t>(in) * out ||
      l.bias.size() != static_cast<std::size_t>(out)) {
    throw Error(ErrorCode::kSchemaMismatch,
                std::string(what) + ": expected " + std::to_string(out) + "x" + std::to_string(in) +
                    ", got " + std::to_string(l.out) + "x" + std::to_string(l.in));
  }
}

void check_mlp(const Mlp& m, int in, int hidden, const char* what) {
  check_linear(m.l1, in, hidden, what);
  check_linear(m.l2, hidden, hidden, what);
}

json linear_json(const Linear& l) {
  return {{"shape", {l.out, l.in}}, {"weight", l.weight}, {"bias", l.bias}};
}

Linear linear_from(const json& j) {
  Linear l;
  const auto shape = j.at("shape").get<std::vector<int>>();
  if (shape.size() != 2) throw Error(ErrorCode::kMalformedInput, "weights: shape needs 2 entries");
  l.out = shape[0];
  l.in = shape[1];
  l.weight = j.at("weight").get<std::vector<double>>();
  l.bias = j.at("bias").get<std::vector<double>>();
  if (l.weight.size() != static_cast<std::size_t>(l.in) * l.out || l.bias.size() != static_cast<std::size_t>(l.out)) {
    throw Error(ErrorCode::kMalformedInput, "weights: block size disagrees with its shape");
  }
  return l;
}

json mlp_json(const Mlp& m) { return {{"l1", linear_json(m.l1)}, {"l2", linear_json(m.l2)}}; }
Mlp mlp_from(const json& j) { return {linear_from(j.at("l1")), linear_from(j.at("l2"))}; }

template <std::size_t K>
json keyed_json(const std::array<Mlp, K>& a, bool families) {
  json out = json::object();
  for (std::size_t i = 0; i < K; ++i) {
    out[families ? family_key(static_cast<int>(i)) : std::string(var_kind_key(static_cast<int>(i)))] =
        mlp_json(a[i]);
  }
  return out;
}

template <std::size_t K>
void keyed_from(const json& j, std::array<Mlp, K>& a, bool families) {
  for (std::size_t i = 0; i < K; ++i) {
    const std::string key =
        families ? family_key(static_cast<int>(i)) : std::string(var_kind_key(static_cast<int>(i)));
    a[i] = mlp_from(j.at(key));
  }
}

}  // namespace

PolicyWeights zero_weights(int hidden, int rounds) {
  PolicyWeights w;
  w.hidden = hidden;
  const int h = hidden;
  for (auto& m : w.embed_var) m = make_mlp(kVarFeatures, h);
  for (auto& m : w.embed_con) m = make_mlp(kConFeatures, h);
  w.embed_obj = make_mlp(kObjFeatures, h);
  w.layers.resize(rounds);
  for (auto& layer : w.layers) {
    for (auto& m : layer.f_vo) m = make_mlp(2 * h + 1, h);
    for (auto& m : layer.f_oc) m = make_mlp(2 * h + 1, h);
    for (auto& row : layer.f_vc) for (auto& m : row) m = make_mlp(2 * h + 1, h);
    for (auto& m : layer.f_co) m = make_mlp(2 * h + 1, h);
    for (auto& m : layer.f_ov) m = make_mlp(2 * h + 1, h);
    for (auto& row : layer.f_cv) for (auto& m : row) m = make_mlp(2 * h + 1, h);
    layer.f_o = make_mlp(2 * h, h);
    for (auto& m : layer.f_c) m = make_mlp(2 * h, h);
    for (auto& m : layer.f_v) m = make_mlp(2 * h, h);
  }
  w.head1 = make_linear(h, h);
  w.head2 = make_linear(h, 1);
  return w;
}

PolicyWeights random_weights(std::uint64_t seed, int hidden, int rounds) {
  PolicyWeights w = zero_weights(hidden, rounds);
  std::mt19937_64 rng(seed);
  auto fill = [&](Linear& l) {
    const double a = std::sqrt(6.0 / (l.in + l.out));
    std::uniform_real_distribution<double> d(-a, a);
    for (double& v : l.weight) v = d(rng);
  };
  for_each_mlp(w, [&](Mlp& m) {
    fill(m.l1);
    fill(m.l2);
  });
  fill(w.head1);
  fill(w.head2);
  return w;
}

void check_weights(const PolicyWeights& w) {
  const int h = w.hidden;
  if (h <= 0) throw Error(ErrorCode::kSchemaMismatch, "hidden width must be positive");
  for (const auto& m : w.embed_var) check_mlp(m, kVarFeatures, h, "embed_var");
  for (const auto& m : w.embed_con) check_mlp(m, kConFeatures, h, "embed_con");
  check_mlp(w.embed_obj, kObjFeatures, h, "embed_obj");
  for (const auto& layer : w.layers) {
    for (const auto& m : layer.f_vo) check_mlp(m, 2 * h + 1, h, "f_vo");
    for (const auto& m : layer.f_oc) check_mlp(m, 2 * h + 1, h, "f_oc");
    for (const auto& row : layer.f_vc) for (const auto& m : row) check_mlp(m, 2 * h + 1, h, "f_vc");
    for (const auto& m : layer.f_co) check_mlp(m, 2 * h + 1, h, "f_co");
    for (const auto& m : layer.f_ov) check_mlp(m, 2 * h + 1, h, "f_ov");
    for (const auto& row : layer.f_cv) for (const auto& m : row) check_mlp(m, 2 * h + 1, h, "f_cv");
    check_mlp(layer.f_o, 2 * h, h, "f_o");
    for (const auto& m : layer.f_c) check_mlp(m, 2 * h, h, "f_c");
    for (const auto& m : layer.f_v) check_mlp(m, 2 * h, h, "f_v");
  }
  check_linear(w.head1, h, h, "head1");
  check_linear(w.head2, h, 1, "head2");
}

std::string weights_to_json(const PolicyWeights& w) {
  json layers = json::array();
  for (const auto& layer : w.layers) {
    json vc = json::object(), cv = json::object();
    for (int k = 0; k < kNumVarKinds; ++k) {
      for (int f = 0; f < kNumFamilies; ++f) {
        vc[std::string(var_kind_key(k)) + "-" + family_key(f)] = mlp_json(layer.f_vc[k][f]);
        cv[family_key(f) + "-" + std::string(var_kind_key(k))] = mlp_json(layer.f_cv[f][k]);
      }
    }
    layers.push_back({{"f_vo", keyed_json(layer.f_vo, false)},
                      {"f_oc", keyed_json(layer.f_oc, true)},
                      {"f_vc", vc},
                      {"f_co", keyed_json(layer.f_co, true)},
                      {"f_ov", keyed_json(layer.f_ov, false)},
                      {"f_cv", cv},
                      {"f_o", mlp_json(layer.f_o)},
                      {"f_c", keyed_json(layer.f_c, true)},
                      {"f_v", keyed_json(layer.f_v, false)}});
  }
  json doc = {{"schema_version", w.schema_version},
              {"hidden", w.hidden},
              {"rounds", w.rounds()},
              {"embed",
               {{"var", keyed_json(w.embed_var, false)},
                {"con", keyed_json(w.embed_con, true)},
                {"obj", mlp_json(w.embed_obj)}}},
              {"layers", layers},
              {"head", {{"l1", linear_json(w.head1)}, {"l2", linear_json(w.head2)}}}};
  return doc.dump();
}

PolicyWeights weights_from_json(std::string_view text) {
  PolicyWeights w;
  try {
    const json doc = json::parse(text);
    w.schema_version = doc.at("schema_version").get<int>();
    w.hidden = doc.at("hidden").get<int>();
    const int rounds = doc.at("rounds").get<int>();
    const json& embed = doc.at("embed");
    keyed_from(embed.at("var"), w.embed_var, false);
    keyed_from(embed.at("con"), w.embed_con, true);
    w.embed_obj = mlp_from(embed.at("obj"));
    for (const json& lj : doc.at("layers")) {
      LayerWeights layer;
      keyed_from(lj.at("f_vo"), layer.f_vo, false);
      keyed_from(lj.at("f_oc"), layer.f_oc, true);
      keyed_from(lj.at("f_co"), layer.f_co, true);
      keyed_from(lj.at("f_ov"), layer.f_ov, false);
      keyed_from(lj.at("f_c"), layer.f_c, true);
      keyed_from(lj.at("f_v"), layer.f_v, false);
      layer.f_o = mlp_from(lj.at("f_o"));
      for (int k = 0; k < kNumVarKinds; ++k) {
        for (int f = 0; f < kNumFamilies; ++f) {
          layer.f_vc[k][f] = mlp_from(lj.at("f_vc").at(std::string(var_kind_key(k)) + "-" + family_key(f)));
          layer.f_cv[f][k] = mlp_from(lj.at("f_cv").at(family_key(f) + "-" + std::string(var_kind_key(k))));
        }
      }
      w.layers.push_back(std::move(layer));
    }
    if (w.rounds() != rounds) throw Error(ErrorCode::kMalformedInput, "weights: rounds disagree with layers");
    w.head1 = linear_from(doc.at("head").at("l1"));
    w.head2 = linear_from(doc.at("head").at("l2"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("weights: ") + e.what());
  }
  check_weights(w);
  return w;
}

PolicyWeights load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return weights_from_json(buf.str());
}

void save_weights(const PolicyWeights& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
  out << weights_to_json(w) << '\n';
}

ScoreVector rgcn_forward(const TripartiteGraph& g, const PolicyWeights& w) {
  if (g.schema_version != w.schema_version) {
    throw Error(ErrorCode::kSchemaMismatch, "graph schema " + std::to_string(g.schema_version) +
                                                " vs weights schema " + std::to_string(w.schema_version));
  }
  check_weights(w);
  const int h = w.hidden;
  using Vec = std::vector<double>;

  std::array<std::vector<Vec>, kNumVarKinds> hv;
  std::array<std::vector<Vec>, kNumFamilies> hc;
  for (int k = 0; k < kNumVarKinds; ++k) {
    for (const auto& x : normalize(g.var_nodes[k].features, var_feature_schema())) {
      hv[k].push_back(run(w.embed_var[k], x));
    }
  }
  for (int f = 0; f < kNumFamilies; ++f) {
    for (const auto& x : normalize(g.con_nodes[f].features, con_feature_schema())) {
      hc[f].push_back(run(w.embed_con[f], x));
    }
  }
  Vec ho = run(w.embed_obj, normalize(std::vector<FeatureRow>{g.obj_node.features}, obj_feature_schema())[0]);

  // Objective-edge features indexed by node; NaN marks "no edge".
  std::array<std::vector<double>, kNumVarKinds> vo_coef;
  for (int k = 0; k < kNumVarKinds; ++k) {
    vo_coef[k].assign(hv[k].size(), std::nan(""));
    for (const EdgeVO& e : g.edges_vo[k]) vo_coef[k][e.var] = e.coef;
  }
  std::array<std::vector<double>, kNumFamilies> co_rhs;
  for (int f = 0; f < kNumFamilies; ++f) {
    co_rhs[f].assign(hc[f].size(), std::nan(""));
    for (const EdgeCO& e : g.edges_co[f]) co_rhs[f][e.con] = e.rhs;
  }
  const Vec zero(h, 0.0);

  for (const LayerWeights& L : w.layers) {
    {  // variables -> objective
      Aggregator agg(1, h);
      for (int k = 0; k < kNumVarKinds; ++k) {
        for (const EdgeVO& e : g.edges_vo[k]) agg.add(0, run(L.f_vo[k], concat(hv[k][e.var], ho, e.coef)));
      }
      ho = run(L.f_o, concat(ho, layer_norm(agg.sum(0))));
    }
    for (int f = 0; f < kNumFamilies; ++f) {  // objective -> constraints
      for (std::size_t j = 0; j < hc[f].size(); ++j) {
        const Vec m = std::isnan(co_rhs[f][j]) ? zero : run(L.f_oc[f], concat(ho, hc[f][j], co_rhs[f][j]));
        hc[f][j] = run(L.f_c[f], concat(hc[f][j], layer_norm(m)));
      }
    }
    for (int f = 0; f < kNumFamilies; ++f) {  // variables -> constraints
      Aggregator agg(static_cast<int>(hc[f].size()), h);
      for (int k = 0; k < kNumVarKinds; ++k) {
        for (const EdgeVC& e : g.edges_vc[k][f]) {
          agg.add(e.con, run(L.f_vc[k][f], concat(hv[k][e.var], hc[f][e.con], e.coef)));
        }
      }
      for (std::size_t j = 0; j < hc[f].size(); ++j) {
        hc[f][j] = run(L.f_c[f], concat(hc[f][j], layer_norm(agg.sum(static_cast<int>(j)))));
      }
    }
    {  // constraints -> objective
      Aggregator agg(1, h);
      for (int f = 0; f < kNumFamilies; ++f) {
        for (const EdgeCO& e : g.edges_co[f]) agg.add(0, run(L.f_co[f], concat(hc[f][e.con], ho, e.rhs)));
      }
      ho = run(L.f_o, concat(ho, layer_norm(agg.sum(0))));
    }
    for (int k = 0; k < kNumVarKinds; ++k) {  // objective -> variables
      for (std::size_t i = 0; i < hv[k].size(); ++i) {
        const Vec m = std::isnan(vo_coef[k][i]) ? zero : run(L.f_ov[k], concat(ho, hv[k][i], vo_coef[k][i]));
        hv[k][i] = run(L.f_v[k], concat(hv[k][i], layer_norm(m)));
      }
    }
    for (int k = 0; k < kNumVarKinds; ++k) {  // constraints -> variables
      Aggregator agg(static_cast<int>(hv[k].size()), h);
      for (int f = 0; f < kNumFamilies; ++f) {
        for (const EdgeVC& e : g.edges_vc[k][f]) {
          agg.add(e.var, run(L.f_cv[f][k], concat(hc[f][e.con], hv[k][e.var], e.coef)));
        }
      }
      for (std::size_t i = 0; i < hv[k].size(); ++i) {
        hv[k][i] = run(L.f_v[k], concat(hv[k][i], layer_norm(agg.sum(static_cast<int>(i)))));
      }
    }
  }

  const auto& unodes = g.var_nodes[static_cast<int>(VarKind::kU)];
  ScoreVector out(g.obj_node.units, g.obj_node.periods, 0.0);
  if (static_cast<std::size_t>(unodes.size()) != out.size()) {
    throw Error(ErrorCode::kShapeMismatch, "u-node count differs from units x periods");
  }
  Vec z(h);
  for (int i = 0; i < unodes.size(); ++i) {
    const Vec& x = hv[static_cast<int>(VarKind::kU)][i];
    apply(w.head1, x.data(), z.data());
    for (double& v : z) v = std::max(v, 0.0);
    double logit = 0.0;
    apply(w.head2, z.data(), &logit);
    const double s = 1.0 / (1.0 + std::exp(-logit));
    if (!std::isfinite(logit) || !std::isfinite(s)) {
      const auto [unit, period] = unodes.unit_period[i];
      throw Error(ErrorCode::kNonFiniteOutput, "non-finite score at unit " + std::to_string(unit) +
                                                   ", period " + std::to_string(period) +
                                                   " (logit " + std::to_string(logit) + ")");
    }
    const auto [unit, period] = unodes.unit_period[i];
    out(unit, period) = std::clamp(s, kScoreFloor, 1.0 - kScoreFloor);
  }
  return out;
}

ScoreVector lp_fractional_policy(const MipProblem& m) {
  MipSolution lp = solve_lp(m);
  if (lp.status != SolveStatus::kOptimal) {
    throw Error(ErrorCode::kLpInfeasible, "LP relaxation status " + std::string(to_string(lp.status)));
  }
  ScoreVector s(m.units(), m.periods());
  for (int g = 0; g < m.units(); ++g) {
    for (int t = 0; t < m.periods(); ++t) {
      s(g, t) = std::clamp(lp.values[m.u_index(g, t)], 1e-6, 1.0 - 1e-6);
    }
  }
  return s;
}

ScoreVector parse_scores(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("scores: ") + e.what());
  }
  std::vector<int> shape;
  std::vector<double> values;
  try {
    shape = doc.at("shape").get<std::vector<int>>();
    for (const json& v : doc.at("scores")) {
      values.push_back(v.is_number() ? v.get<double>() : std::nan(""));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("scores: ") + e.what());
  }
  if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0) {
    throw Error(ErrorCode::kShapeMismatch, "scores: shape must be [N, T]");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange,
                  "scores: entry " + std::to_string(i) + " = " + std::to_string(values[i]) + " outside [0, 1]");
    }
    values[i] = std::clamp(values[i], kScoreFloor, 1.0 - kScoreFloor);
  }
  return ScoreVector(shape[0], shape[1], std::move(values));
}

std::string scores_to_json(const ScoreVector& s) {
  return json{{"shape", {s.units(), s.periods()}}, {"scores", s.values()}}.dump();
}

ScoreVector file_scores_policy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scores(buf.str());
}

ScoreVector file_scores_policy(const std::string& path, int units, int periods) {
  ScoreVector s = file_scores_policy(path);
  if (!s.same_shape(units, periods)) {
    throw Error(ErrorCode::kShapeMismatch, "score file is " + std::to_string(s.units()) + "x" +
                                               std::to_string(s.periods()) + ", instance is " +
                                               std::to_string(units) + "x" + std::to_string(periods));
  }
  return s;
}

void save_scores(const ScoreVector& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
  out << scores_to_json(s) << '\n';
}

}  // namespace ucplns
