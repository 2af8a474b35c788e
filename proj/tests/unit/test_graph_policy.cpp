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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "reference_rgcn.hpp"
#include "ucplns/branch_and_bound.hpp"
#include "ucplns/instance_gen.hpp"
#include "ucplns/policy.hpp"
#include "ucplns/simplex.hpp"
#include "ucplns/tri_graph.hpp"
#include "ucplns/ucp_model.hpp"

namespace ucplns {
namespace {

constexpr int kU = static_cast<int>(VarKind::kU);
constexpr int kP = static_cast<int>(VarKind::kP);

TEST(Encode, CountsMatchBuilder) {
  auto inst = make_random_instance(1, 2, 3);
  auto m = build_mip(inst, Formulation::kOneBin);
  auto g = encode(m);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(g.var_nodes[k].size(), 6);
  EXPECT_EQ(g.var_nodes[3].size(), 0);
  std::array<int, kNumFamilies> counts{};
  for (const auto& c : m.constraints()) ++counts[static_cast<int>(c.tag.family) - 1];
  for (int f = 0; f < kNumFamilies; ++f) EXPECT_EQ(g.con_nodes[f].size(), counts[f]);
  EXPECT_EQ(g.num_vc_edges(), m.nonzeros());
  EXPECT_TRUE(g.edges_vc[kU][3].empty());  // balance rows hold only P
  for (const auto& e : g.edges_co) EXPECT_TRUE(e.empty());
}

TEST(Encode, EdgesCarryCoefficients) {
  auto m = build_mip(make_random_instance(2, 3, 4), Formulation::kThreeBin);
  auto g = encode(m);
  for (int k = 0; k < kNumVarKinds; ++k) {
    for (int f = 0; f < kNumFamilies; ++f) {
      for (const EdgeVC& e : g.edges_vc[k][f]) {
        const Constraint& row = m.constraint(g.con_nodes[f].model_index[e.con]);
        const int col = g.var_nodes[k].model_index[e.var];
        double coef = 0.0;
        for (std::size_t q = 0; q < row.index.size(); ++q) {
          if (row.index[q] == col) coef += row.coef[q];
        }
        EXPECT_EQ(coef, e.coef);
      }
    }
  }
}

TEST(Encode, ObjectiveEdgesFollowCosts) {
  auto inst = make_random_instance(3, 2, 3);
  inst.units[1].beta = 0.0;
  auto g = encode(build_mip(inst, Formulation::kOneBin));
  std::vector<int> seen(g.var_nodes[kP].size(), 0);
  for (const EdgeVO& e : g.edges_vo[kP]) ++seen[e.var];
  for (int i = 0; i < g.var_nodes[kP].size(); ++i) {
    const int unit = g.var_nodes[kP].unit_period[i].first;
    EXPECT_EQ(seen[i], unit == 1 ? 0 : 1);
  }
}

TEST(Encode, RejectsUntaggedRows) {
  auto m = build_mip(make_random_instance(4, 2, 3), Formulation::kOneBin);
  Constraint extra;
  extra.index = {0};
  extra.coef = {1.0};
  extra.rhs = 1.0;
  m.add_constraint(extra);
  try {
    encode(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingTags);
  }
}

TEST(AttachSolution, TightRowsMatchDirectActivities) {
  auto m = build_mip(fixtures::lp_feasible(5, 3, 5, Formulation::kThreeBin), Formulation::kThreeBin);
  auto lp = solve_lp(m);
  ASSERT_EQ(lp.status, SolveStatus::kOptimal);
  auto g = attach_solution_features(encode(m), lp.values, SolutionMode::kLpRelax);
  std::set<int> active;
  for (int f = 0; f < kNumFamilies; ++f) {
    for (const EdgeCO& e : g.edges_co[f]) {
      active.insert(g.con_nodes[f].model_index[e.con]);
      EXPECT_EQ(e.rhs, m.constraint(g.con_nodes[f].model_index[e.con]).rhs);
    }
  }
  for (int i = 0; i < m.num_constraints(); ++i) {
    const Constraint& c = m.constraint(i);
    double scale = 0.0;
    for (double a : c.coef) scale = std::max(scale, std::abs(a));
    const double slack = std::abs(m.row_activity(i, lp.values) - c.rhs) / std::max(scale, 1.0);
    const bool tight = c.sense == Sense::kEqual || slack <= 1e-6;
    EXPECT_EQ(active.count(i) == 1, tight) << m.constraint_name(i);
  }
  for (int k = 0; k < kNumVarKinds; ++k) {
    for (int i = 0; i < g.var_nodes[k].size(); ++i) {
      EXPECT_EQ(g.var_nodes[k].features[i][kVarValueSlot], lp.values[g.var_nodes[k].model_index[i]]);
    }
  }
}

TEST(AttachSolution, SlackRowHasNoEdgeAndShortSolutionThrows) {
  auto m = build_mip(make_random_instance(6, 2, 3), Formulation::kOneBin);
  std::vector<double> x(m.num_variables(), 0.0);
  for (int j : m.u_indices()) x[j] = 1.0;
  auto g = attach_solution_features(encode(m), x, SolutionMode::kIncumbent);
  // Reserve rows are strictly slack with everything on.
  EXPECT_TRUE(g.edges_co[1].empty());
  x.pop_back();
  try {
    attach_solution_features(encode(m), x, SolutionMode::kIncumbent);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteSolution);
  }
}

TEST(Serialize, RoundTripAndByteStability) {
  auto m = build_mip(fixtures::lp_feasible(7, 2, 4, Formulation::kThreeBin), Formulation::kThreeBin);
  auto g = attach_solution_features(encode(m), solve_lp(m).values, SolutionMode::kLpRelax);
  const std::string a = serialize(g);
  EXPECT_EQ(serialize(g), a);
  auto back = deserialize(a);
  EXPECT_EQ(back, g);
  EXPECT_EQ(serialize(back), a);
}

TEST(Serialize, RejectsOutOfRangeEdgeAndWrongVersion) {
  auto g = encode(build_mip(make_random_instance(8, 2, 3), Formulation::kOneBin));
  g.edges_vc[kU][0].push_back({999, 0, 1.0});
  try {
    deserialize(serialize(g));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedInput);
  }
  g.edges_vc[kU][0].pop_back();
  g.schema_version = kGraphSchemaVersion + 1;
  try {
    deserialize(serialize(g));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVersionMismatch);
  }
  EXPECT_THROW(deserialize("{not json"), Error);
}

// Same multisets of node features and edge triples after relabeling units.
TEST(Encode, UnitPermutationGivesIsomorphicGraph) {
  auto inst = make_random_instance(9, 3, 4);
  const std::vector<int> perm = {2, 0, 1};
  for (Formulation f : {Formulation::kOneBin, Formulation::kThreeBin}) {
    auto a = encode(build_mip(inst, f));
    auto b = encode(build_mip(fixtures::permute_units(inst, perm), f));
    for (int k = 0; k < kNumVarKinds; ++k) {
      auto fa = a.var_nodes[k].features, fb = b.var_nodes[k].features;
      std::sort(fa.begin(), fa.end());
      std::sort(fb.begin(), fb.end());
      EXPECT_EQ(fa, fb);
    }
    for (int c = 0; c < kNumFamilies; ++c) {
      auto fa = a.con_nodes[c].features, fb = b.con_nodes[c].features;
      std::sort(fa.begin(), fa.end());
      std::sort(fb.begin(), fb.end());
      EXPECT_EQ(fa, fb);
    }
    EXPECT_EQ(a.obj_node, b.obj_node);
    EXPECT_EQ(a.num_vc_edges(), b.num_vc_edges());
  }
}

TEST(Weights, JsonRoundTripAndShapeCheck) {
  auto w = random_weights(3, 8, 2);
  auto back = weights_from_json(weights_to_json(w));
  EXPECT_EQ(back, w);
  w.layers[1].f_vc[0][2].l1.bias.pop_back();
  EXPECT_THROW(check_weights(w), Error);
  w = random_weights(3, 8, 2);
  w.head2 = Linear{8, 2, std::vector<double>(16, 0.0), std::vector<double>(2, 0.0)};
  try {
    check_weights(w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}

TEST(Forward, ZeroWeightsGiveOneHalf) {
  auto g = encode(build_mip(make_random_instance(10, 2, 3), Formulation::kOneBin));
  auto s = rgcn_forward(g, zero_weights(16, 2));
  for (double v : s.values()) EXPECT_EQ(v, 0.5);
}

TEST(Forward, SchemaMismatchThrows) {
  auto g = encode(build_mip(make_random_instance(10, 2, 3), Formulation::kOneBin));
  auto w = zero_weights(4, 1);
  w.schema_version = 99;
  try {
    rgcn_forward(g, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}

TEST(Forward, NonFiniteOutputIsReported) {
  auto g = encode(build_mip(make_random_instance(10, 2, 3), Formulation::kOneBin));
  auto w = zero_weights(4, 1);
  w.head2.bias[0] = std::nan("");
  try {
    rgcn_forward(g, w);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteOutput);
  }
}

TEST(Forward, MatchesReferenceAndStaysInRange) {
  for (int seed = 0; seed < 4; ++seed) {
    const Formulation form = seed % 2 ? Formulation::kThreeBin : Formulation::kOneBin;
    auto m = build_mip(fixtures::lp_feasible(20 + 50 * seed, 2 + seed % 2, 3 + seed, form), form);
    auto g = attach_solution_features(encode(m), solve_lp(m).values, SolutionMode::kLpRelax);
    auto w = random_weights(100 + seed, 8, 1 + seed % 3);
    auto got = rgcn_forward(g, w);
    auto want = reference::forward(g, w);
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i], want[i], 1e-9);
      EXPECT_GT(got[i], 0.0);
      EXPECT_LT(got[i], 1.0);
    }
    EXPECT_EQ(rgcn_forward(g, w), got);
  }
}

TEST(Forward, EquivariantUnderUnitPermutation) {
  auto inst = fixtures::lp_feasible(31, 4, 4, Formulation::kThreeBin);
  auto m = build_mip(inst, Formulation::kThreeBin);
  auto lp = solve_lp(m);
  auto w = random_weights(5, 8, 2);
  auto base = rgcn_forward(attach_solution_features(encode(m), lp.values, SolutionMode::kLpRelax), w);
  std::vector<int> perm = {3, 1, 0, 2};
  auto pinst = fixtures::permute_units(inst, perm);
  auto pm = build_mip(pinst, Formulation::kThreeBin);
  auto px = fixtures::permute_solution(m, pm, lp.values, perm);
  auto ps = rgcn_forward(attach_solution_features(encode(pm), px, SolutionMode::kLpRelax), w);
  for (int g = 0; g < 4; ++g) {
    for (int t = 0; t < 4; ++t) EXPECT_EQ(ps(g, t), base(perm[g], t));
  }
}

TEST(LpFractional, ClampsRelaxedValues) {
  auto m = build_mip(fixtures::lp_feasible(40, 3, 5), Formulation::kOneBin);
  auto lp = solve_lp(m);
  auto s = lp_fractional_policy(m);
  for (int g = 0; g < m.units(); ++g) {
    for (int t = 0; t < m.periods(); ++t) {
      EXPECT_EQ(s(g, t), std::clamp(lp.values[m.u_index(g, t)], 1e-6, 1 - 1e-6));
    }
  }
  // Pin one variable at each bound to see both clamps.
  MipProblem pinned = fix_and_sub(m, extract_commitment(m, solve_mip(m).values), NeighborhoodMask(3, 5, 0));
  auto ps = lp_fractional_policy(pinned);
  for (double v : ps.values()) EXPECT_TRUE(v == 1e-6 || v == 1 - 1e-6) << v;
}

TEST(LpFractional, InfeasibleRelaxationThrows) {
  auto m = build_mip(make_random_instance(40, 3, 5), Formulation::kOneBin);
  for (int j : m.u_indices()) m.variable(j).upper = 0.0;
  try {
    lp_fractional_policy(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLpInfeasible);
  }
}

TEST(ScoreFile, LoadsAndValidates) {
  const auto dir = std::filesystem::temp_directory_path() / "ucplns_scores";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "s.json").string();
  save_scores(ScoreVector(2, 3, 0.5), path);
  auto s = file_scores_policy(path, 2, 3);
  for (double v : s.values()) EXPECT_EQ(v, 0.5);
  try {
    file_scores_policy(path, 3, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
  try {
    parse_scores(R"({"shape":[1,2],"scores":[0.2,1.5]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOutOfRange);
  }
  try {
    parse_scores(R"({"shape":[2,2],"scores":[0.2,0.5]})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

}  // namespace
}  // namespace ucplns
