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

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ucplns/branch_and_bound.hpp"
#include "ucplns/grid.hpp"
#include "ucplns/policy.hpp"

namespace ucplns {

struct LnsConfig {
  double lt = 0.1;  // local-search thresholds
  double ut = 0.9;
  double psi_l = 1.1;  // adaptive size
  double psi_u = 0.8;
  double phi_l = 0.3;
  double phi_u = 0.1;
  double psi_gd = 0.9;  // weight descent
  double psi_ld = 0.5;
  double phi_gd = 0.8;
  double phi_ld = 0.01;
  double zeta0 = 0.2;
  int max_step = 100;
  int stall_limit = 5;
  int row_width = 1;
  double time_limit = kInf;           // seconds for the whole run
  std::int64_t node_budget = -1;      // branch-and-bound nodes for the whole run
  // Per sub-MIP limits; negative means budget / 20.
  double iter_time_limit = -1.0;
  std::int64_t iter_node_limit = -1;
};

// Throws MalformedInput when the constants break their ordering rules.
void check_config(const LnsConfig& cfg);

// Binaries fixed to u, continuous part optimized. No solution when u is
// infeasible for m.
MipSolution commitment_solution(const MipProblem& m, const Commitment& u);

struct LocalSearchResult {
  Commitment u;
  std::vector<double> values;
  double objective = kInf;
  NeighborhoodMask free;  // entries left to the solver
  std::int64_t nodes = 0;
};

// Scores at or beyond the thresholds fix u to u_star; the rest stay free and
// the sub-MIP is warm-started from the better of u_star and the rounded
// scores. Never returns anything worse than u_star.
LocalSearchResult local_search(const MipProblem& m, const ScoreVector& scores, const Commitment& u_star,
                               const LnsConfig& cfg, const MipLimits& limits = {});

// The ceil(zeta * N * T) largest entries of p * gd * ld, ties by lower (g, t).
NeighborhoodMask greedy_select(const ScoreVector& p, double zeta, const ScoreVector& gd, const ScoreVector& ld);

// First and last `width` periods of every maximal on-run.
NeighborhoodMask row_neighborhood(const Commitment& u, int width = 1);

double adaptive_size(double zeta, bool improved, const LnsConfig& cfg);

// ld is rebuilt from ones on every call.
std::pair<ScoreVector, ScoreVector> weight_descend(const ScoreVector& gd, const ScoreVector& ld,
                                                   const NeighborhoodMask& mask,
                                                   const NeighborhoodMask& changed, const LnsConfig& cfg);

// Scores for the incumbent (its commitment and full values).
using NeighborhoodPolicy =
    std::function<ScoreVector(const MipProblem& m, const Commitment& u, const std::vector<double>& x)>;

NeighborhoodPolicy rgcn_policy(PolicyWeights weights);
NeighborhoodPolicy lp_relaxation_policy();
NeighborhoodPolicy constant_policy(ScoreVector scores);
NeighborhoodPolicy random_policy(std::uint64_t seed);

struct LnsIteration {
  int k = 0;
  double zeta = 0.0;
  int mask_size = 0;
  double objective = kInf;  // incumbent after the step
  double bound = -kInf;     // sub-MIP bound
  double wall_ms = 0.0;     // since the start of the run
  std::int64_t nodes = 0;   // cumulative
  bool improved = false;
  NeighborhoodMask mask;
};

struct LnsResult {
  Commitment u;
  std::vector<double> values;
  double objective = kInf;
  std::vector<LnsIteration> log;
  std::int64_t nodes = 0;
  double wall_time = 0.0;
};

// Throws IncompleteSolution when u0 is not feasible for m.
LnsResult lns_run(const MipProblem& m, const Commitment& u0, const NeighborhoodPolicy& policy,
                  const LnsConfig& cfg);

// One JSON object per line: {k, zeta, mask_size, objective, bound, wall_ms}.
std::string iteration_log_jsonl(const std::vector<LnsIteration>& log);

}  // namespace ucplns
