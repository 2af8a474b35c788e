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

#pragma once

// Straight-line forward pass used to check rgcn_forward. Plain loops, plain
// left-to-right sums, no shared helpers with the library.

#include <cmath>
#include <vector>

#include "ucplns/policy.hpp"
#include "ucplns/tri_graph.hpp"

namespace reference {

using Vec = std::vector<double>;

inline Vec dense(const ucplns::Linear& l, const Vec& x) {
  Vec y(l.out);
  for (int o = 0; o < l.out; ++o) {
    double acc = l.bias[o];
    for (int i = 0; i < l.in; ++i) acc += l.weight[o * l.in + i] * x[i];
    y[o] = acc;
  }
  return y;
}

inline Vec relu(Vec x) {
  for (double& v : x) v = v > 0 ? v : 0;
  return x;
}

inline Vec mlp(const ucplns::Mlp& m, const Vec& x) { return relu(dense(m.l2, relu(dense(m.l1, x)))); }

inline Vec cat(Vec a, const Vec& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline Vec cat3(const Vec& a, const Vec& b, double e) {
  Vec out = cat(a, b);
  out.push_back(e);
  return out;
}

inline Vec ln(const Vec& x) {
  const double n = static_cast<double>(x.size());
  double mean = 0;
  for (double v : x) mean += v;
  mean /= n;
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= n;
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (x[i] - mean) / std::sqrt(var + 1e-5);
  return out;
}

inline void add_into(Vec& acc, const Vec& m) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += m[i];
}

inline std::vector<Vec> standardize(const std::vector<ucplns::FeatureRow>& rows, int skip_slot) {
  std::vector<Vec> out(rows.begin(), rows.end());
  if (rows.empty()) return out;
  const std::size_t width = rows[0].size();
  for (std::size_t s = 0; s < width; ++s) {
    if (static_cast<int>(s) == skip_slot) continue;
    double mean = 0;
    for (const auto& r : rows) mean += r[s];
    mean /= rows.size();
    double var = 0;
    for (const auto& r : rows) var += (r[s] - mean) * (r[s] - mean);
    double sd = std::sqrt(var / rows.size());
    if (sd <= 1e-12) sd = 1;
    for (auto& r : out) r[s] = (r[s] - mean) / sd;
  }
  return out;
}

inline ucplns::ScoreVector forward(const ucplns::TripartiteGraph& g, const ucplns::PolicyWeights& w) {
  using namespace ucplns;
  const int K = kNumVarKinds, F = kNumFamilies, H = w.hidden;
  std::vector<std::vector<Vec>> V(K), C(F);
  for (int k = 0; k < K; ++k) {
    for (const Vec& x : standardize(g.var_nodes[k].features, kVarValueSlot)) V[k].push_back(mlp(w.embed_var[k], x));
  }
  for (int f = 0; f < F; ++f) {
    for (const Vec& x : standardize(g.con_nodes[f].features, -1)) C[f].push_back(mlp(w.embed_con[f], x));
  }
  Vec O = mlp(w.embed_obj, standardize({g.obj_node.features}, -1)[0]);

  for (const LayerWeights& L : w.layers) {
    // V -> O
    Vec acc(H, 0.0);
    for (int k = 0; k < K; ++k)
      for (const auto& e : g.edges_vo[k]) add_into(acc, mlp(L.f_vo[k], cat3(V[k][e.var], O, e.coef)));
    O = mlp(L.f_o, cat(O, ln(acc)));
    // O -> C
    for (int f = 0; f < F; ++f) {
      std::vector<Vec> msg(C[f].size(), Vec(H, 0.0));
      for (const auto& e : g.edges_co[f]) msg[e.con] = mlp(L.f_oc[f], cat3(O, C[f][e.con], e.rhs));
      for (std::size_t j = 0; j < C[f].size(); ++j) C[f][j] = mlp(L.f_c[f], cat(C[f][j], ln(msg[j])));
    }
    // V -> C
    for (int f = 0; f < F; ++f) {
      std::vector<Vec> msg(C[f].size(), Vec(H, 0.0));
      for (int k = 0; k < K; ++k)
        for (const auto& e : g.edges_vc[k][f])
          add_into(msg[e.con], mlp(L.f_vc[k][f], cat3(V[k][e.var], C[f][e.con], e.coef)));
      for (std::size_t j = 0; j < C[f].size(); ++j) C[f][j] = mlp(L.f_c[f], cat(C[f][j], ln(msg[j])));
    }
    // C -> O
    Vec acc2(H, 0.0);
    for (int f = 0; f < F; ++f)
      for (const auto& e : g.edges_co[f]) add_into(acc2, mlp(L.f_co[f], cat3(C[f][e.con], O, e.rhs)));
    O = mlp(L.f_o, cat(O, ln(acc2)));
    // O -> V
    for (int k = 0; k < K; ++k) {
      std::vector<Vec> msg(V[k].size(), Vec(H, 0.0));
      for (const auto& e : g.edges_vo[k]) msg[e.var] = mlp(L.f_ov[k], cat3(O, V[k][e.var], e.coef));
      for (std::size_t i = 0; i < V[k].size(); ++i) V[k][i] = mlp(L.f_v[k], cat(V[k][i], ln(msg[i])));
    }
    // C -> V
    for (int k = 0; k < K; ++k) {
      std::vector<Vec> msg(V[k].size(), Vec(H, 0.0));
      for (int f = 0; f < F; ++f)
        for (const auto& e : g.edges_vc[k][f])
          add_into(msg[e.var], mlp(L.f_cv[f][k], cat3(C[f][e.con], V[k][e.var], e.coef)));
      for (std::size_t i = 0; i < V[k].size(); ++i) V[k][i] = mlp(L.f_v[k], cat(V[k][i], ln(msg[i])));
    }
  }
  ScoreVector out(g.obj_node.units, g.obj_node.periods);
  const auto& u = g.var_nodes[0];
  for (int i = 0; i < u.size(); ++i) {
    const Vec z = relu(dense(w.head1, V[0][i]));
    const double logit = dense(w.head2, z)[0];
    out(u.unit_period[i].first, u.unit_period[i].second) = 1.0 / (1.0 + std::exp(-logit));
  }
  return out;
}

}  // namespace reference
