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

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ucplns/grid.hpp"
#include "ucplns/mip.hpp"
#include "ucplns/tri_graph.hpp"

namespace ucplns {

// y = W x + b with W stored row-major (out x in).
struct Linear {
  int in = 0;
  int out = 0;
  std::vector<double> weight;
  std::vector<double> bias;
  friend bool operator==(const Linear&, const Linear&) = default;
};

// relu(l2(relu(l1(x)))).
struct Mlp {
  Linear l1;
  Linear l2;
  friend bool operator==(const Mlp&, const Mlp&) = default;
};

struct LayerWeights {
  std::array<Mlp, kNumVarKinds> f_vo;                               // [h_v, h_o, coef]
  std::array<Mlp, kNumFamilies> f_oc;                               // [h_o, h_c, rhs]
  std::array<std::array<Mlp, kNumFamilies>, kNumVarKinds> f_vc;     // [h_v, h_c, coef]
  std::array<Mlp, kNumFamilies> f_co;                               // [h_c, h_o, rhs]
  std::array<Mlp, kNumVarKinds> f_ov;                               // [h_o, h_v, coef]
  std::array<std::array<Mlp, kNumVarKinds>, kNumFamilies> f_cv;     // [h_c, h_v, coef]
  Mlp f_o;                                                          // [h_o, ln(agg)]
  std::array<Mlp, kNumFamilies> f_c;                                // [h_c, ln(agg)]
  std::array<Mlp, kNumVarKinds> f_v;                                // [h_v, ln(agg)]
  friend bool operator==(const LayerWeights&, const LayerWeights&) = default;
};

struct PolicyWeights {
  int schema_version = kGraphSchemaVersion;
  int hidden = 32;
  std::array<Mlp, kNumVarKinds> embed_var;
  std::array<Mlp, kNumFamilies> embed_con;
  Mlp embed_obj;
  std::vector<LayerWeights> layers;  // one per message-passing round
  Linear head1;                      // hidden -> hidden, relu
  Linear head2;                      // hidden -> 1, sigmoid
  int rounds() const { return static_cast<int>(layers.size()); }
  friend bool operator==(const PolicyWeights&, const PolicyWeights&) = default;
};

PolicyWeights zero_weights(int hidden = 32, int rounds = 2);
// Glorot-uniform weights, zero biases.
PolicyWeights random_weights(std::uint64_t seed, int hidden = 32, int rounds = 2);
// Throws SchemaMismatch when a block shape disagrees with the hidden width.
void check_weights(const PolicyWeights& w);

std::string weights_to_json(const PolicyWeights& w);
PolicyWeights weights_from_json(std::string_view text);
PolicyWeights load_weights(const std::string& path);
void save_weights(const PolicyWeights& w, const std::string& path);

// Scores of the u-nodes, shaped by the objective node's units x periods.
// Throws SchemaMismatch or NonFiniteOutput.
ScoreVector rgcn_forward(const TripartiteGraph& g, const PolicyWeights& w);

// LP relaxation values of u clamped to [1e-6, 1 - 1e-6]. Throws LpInfeasible.
ScoreVector lp_fractional_policy(const MipProblem& m);

// Score file: {"shape":[N,T],"scores":[...]} row-major. Values must lie in
// [0, 1]; they are clamped into the open interval on load.
ScoreVector parse_scores(std::string_view text);
std::string scores_to_json(const ScoreVector& s);
ScoreVector file_scores_policy(const std::string& path);
// Same, also checking the shape against an instance (ShapeMismatch).
ScoreVector file_scores_policy(const std::string& path, int units, int periods);
void save_scores(const ScoreVector& s, const std::string& path);

}  // namespace ucplns
