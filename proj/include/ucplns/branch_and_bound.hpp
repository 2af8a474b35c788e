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
#include <optional>
#include <vector>

#include "ucplns/mip.hpp"

namespace ucplns {

struct MipLimits {
  double time_limit = kInf;      // seconds; 0 means "evaluate the start only"
  std::int64_t node_limit = -1;  // LP solves inside the tree; -1 = unlimited
  double gap = 1e-7;             // relative
  bool first_feasible = false;   // stop at the first incumbent
};

struct IncumbentEvent {
  const std::vector<double>& values;
  double objective;
  std::int64_t nodes;
  double wall_time;
  bool from_start;
};
using IncumbentCallback = std::function<void(const IncumbentEvent&)>;

// Per-variable start values; NaN marks a variable without a value. Binary
// start values are fixed, the LP then completes the continuous part.
using Assignment = std::vector<double>;

// u plus the startup/shutdown indicators it implies; everything else unset.
Assignment start_from_commitment(const MipProblem& m, const Commitment& u);

// Depth-first branch-and-bound with LP bounding. Branches on the most
// fractional u-variable (lowest (g, t) on ties), then on other binaries;
// the round-down child is explored first.
MipSolution solve_mip(const MipProblem& m, const MipLimits& limits = {},
                      const std::optional<Assignment>& start = std::nullopt,
                      const IncumbentCallback& on_incumbent = {});

}  // namespace ucplns
