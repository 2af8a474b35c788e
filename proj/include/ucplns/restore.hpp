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

#include <vector>

#include "ucplns/branch_and_bound.hpp"
#include "ucplns/grid.hpp"
#include "ucplns/ucp_model.hpp"

namespace ucplns {

struct RestorationResult {
  Commitment u_star;
  ScoreVector merged_scores;
  // Entries on in u_star whose rounded score was 0.
  NeighborhoodMask forced_on;
  bool pump_used = false;
  double objective = kInf;
  double wall_time = 0.0;
};

// Index order used by the reserve repair: ascending full-load average cost
// (alpha + beta * p_max) / p_max, then larger p_max, then lower unit index.
std::vector<int> priority_order(const UcpInstance& inst);

// 1 where the score is >= 0.5.
Commitment round_scores(const ScoreVector& scores);

// Every maximal on-run of a unit gets the largest score inside the run.
ScoreVector merge_on_runs(const ScoreVector& scores, const Commitment& u);

// Rounding, initial-status locks, minimum up/down repair, reserve repair by
// priority list, then a full check; the feasibility pump handles whatever the
// heuristics leave infeasible. Repairs only ever switch units on. Throws
// NoFeasibleCommitment when the pump proves the instance infeasible.
RestorationResult heuristic_restore(const UcpInstance& inst, Formulation form,
                                    const ScoreVector& scores, const MipLimits& pump_limits = {});

// Closest feasible commitment in Hamming distance, stopping at the first one
// found. Throws ProvenInfeasible when none exists, NoFeasibleCommitment when
// the limits run out first.
Commitment feasibility_pump(const UcpInstance& inst, Formulation form, const Commitment& u_bad,
                            const MipLimits& limits = {});

}  // namespace ucplns
