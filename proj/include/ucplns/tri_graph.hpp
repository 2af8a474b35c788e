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
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ucplns/mip.hpp"

namespace ucplns {

inline constexpr int kGraphSchemaVersion = 1;

// Feature slots. The value slot of variable nodes carries an LP relaxation
// or incumbent value and is exempt from input normalization.
inline constexpr int kVarFeatures = 11;
inline constexpr int kConFeatures = 12;
inline constexpr int kObjFeatures = 3;
inline constexpr int kVarValueSlot = 10;

struct FeatureSlot {
  std::string_view name;
  bool normalize;
};
const std::array<FeatureSlot, kVarFeatures>& var_feature_schema();
const std::array<FeatureSlot, kConFeatures>& con_feature_schema();
const std::array<FeatureSlot, kObjFeatures>& obj_feature_schema();

using FeatureRow = std::vector<double>;

struct VarNodeSet {
  std::vector<int> model_index;              // column in the MipProblem
  std::vector<std::pair<int, int>> unit_period;
  std::vector<FeatureRow> features;
  int size() const { return static_cast<int>(model_index.size()); }
  friend bool operator==(const VarNodeSet&, const VarNodeSet&) = default;
};

struct ConNodeSet {
  std::vector<int> model_index;  // row in the MipProblem
  std::vector<ConTag> tags;
  std::vector<FeatureRow> features;
  int size() const { return static_cast<int>(model_index.size()); }
  friend bool operator==(const ConNodeSet&, const ConNodeSet&) = default;
};

struct ObjNode {
  FeatureRow features;
  int units = 0;
  int periods = 0;
  friend bool operator==(const ObjNode&, const ObjNode&) = default;
};

struct EdgeVC {
  int var = 0;  // index within the variable kind
  int con = 0;  // index within the constraint family
  double coef = 0.0;
  friend bool operator==(const EdgeVC&, const EdgeVC&) = default;
};
struct EdgeVO {
  int var = 0;
  double coef = 0.0;
  friend bool operator==(const EdgeVO&, const EdgeVO&) = default;
};
struct EdgeCO {
  int con = 0;
  double rhs = 0.0;
  friend bool operator==(const EdgeCO&, const EdgeCO&) = default;
};

// Node sets are indexed by VarKind (u, P, S, s, d) and by family - 1 (C1..C7).
// A kind absent from the model has an empty node set.
struct TripartiteGraph {
  int schema_version = kGraphSchemaVersion;
  std::array<VarNodeSet, kNumVarKinds> var_nodes;
  std::array<ConNodeSet, kNumFamilies> con_nodes;
  ObjNode obj_node;
  std::array<std::array<std::vector<EdgeVC>, kNumFamilies>, kNumVarKinds> edges_vc;
  std::array<std::vector<EdgeVO>, kNumVarKinds> edges_vo;
  // Present only for constraints that are tight at the attached solution.
  std::array<std::vector<EdgeCO>, kNumFamilies> edges_co;

  std::size_t num_vc_edges() const;
  friend bool operator==(const TripartiteGraph&, const TripartiteGraph&) = default;
};

// Nodes are ordered by tag: kinds in VarKind order then (unit, period);
// families C1..C7 then model row order. Throws MissingTags when a variable
// or row lacks a UCP tag.
TripartiteGraph encode(const MipProblem& m);

enum class SolutionMode : std::uint8_t { kLpRelax, kIncumbent };

// Writes sol into the value slot and rebuilds E^CO from the rows tight at sol.
// Throws IncompleteSolution when sol does not cover every variable.
TripartiteGraph attach_solution_features(const TripartiteGraph& g, const std::vector<double>& sol,
                                         SolutionMode mode);

// Self-describing JSON, byte-stable for equal graphs.
std::string serialize(const TripartiteGraph& g);
// Throws VersionMismatch or MalformedInput.
TripartiteGraph deserialize(std::string_view text);

std::string_view var_kind_key(int kind);  // "u", "P", "S", "s", "d"
std::string family_key(int family_index);  // "C1".."C7"

}  // namespace ucplns
