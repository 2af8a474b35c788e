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
#include <string>
#include <string_view>
#include <vector>

#include "ucplns/grid.hpp"
#include "ucplns/mip.hpp"

namespace ucplns {

// Thermal unit data. Periods are counted in scheduling intervals.
struct UnitParams {
  double alpha = 0.0;       // no-load cost per committed period
  double beta = 0.0;        // cost per MWh
  double c_hot = 0.0;       // hot startup cost
  double c_cold = 0.0;      // cold startup cost
  int t_on = 1;             // minimum up time
  int t_off = 1;            // minimum down time
  int t_cold = 0;           // cold startup time
  double p_max = 0.0;
  double p_min = 0.0;
  double ramp_up = 0.0;
  double ramp_down = 0.0;
  double ramp_start = 0.0;
  double ramp_shut = 0.0;
  int u0 = 0;               // status at the end of period 0
  int t0 = -1;              // periods online (>0) or offline (<0) before period 1
};

struct UcpInstance {
  std::vector<UnitParams> units;
  std::vector<double> demand;
  std::vector<double> reserve;
  int horizon = 0;

  int num_units() const { return static_cast<int>(units.size()); }
};

enum class Formulation : std::uint8_t { kOneBin, kThreeBin };
std::string_view to_string(Formulation f);
Formulation parse_formulation(std::string_view s);  // "1bin" / "3bin"

struct FlagTag {};
using FlagGrid = Grid<std::uint8_t, FlagTag>;

// Per-unit constants implied by the initial status.
struct DerivedConstants {
  std::vector<int> u_lock;                  // periods forced on at the start
  std::vector<int> l_lock;                  // periods forced off at the start
  std::vector<int> n_d;                     // startup cost intervals
  std::vector<std::vector<double>> k_step;  // k_step[g][tau - 1], tau = 1..n_d
  FlagGrid f_init;                          // 3-bin cold-start offset
};

DerivedConstants derive_constants(const UcpInstance& inst);

// u_{g,s} for s <= 0 (s = 0 is the last period before the horizon).
int history_status(const UnitParams& unit, int s);

struct InstanceIssue {
  std::string field;
  int unit = -1;
  int period = -1;
  std::string message;
};

// Empty result means the instance is valid.
std::vector<InstanceIssue> validate_instance(const UcpInstance& inst);

// Variables: u (row-major by (g, t)), P, S and for 3-bin s, d. Throws
// InvalidInstance when validate_instance reports anything.
MipProblem build_mip(const UcpInstance& inst, Formulation form);

struct ConstraintViolation {
  Family family = Family::kOther;
  Equation equation = Equation::kOther;
  int unit = -1;
  int period = -1;
};

struct CommitmentEvaluation {
  bool feasible = false;
  double objective = kInf;
  std::vector<ConstraintViolation> violations;
  std::vector<double> values;  // optimal dispatch of the full model
};

CommitmentEvaluation evaluate_commitment(const UcpInstance& inst, Formulation form,
                                         const Commitment& u);
// Same, reusing a model produced by build_mip(inst, form).
CommitmentEvaluation evaluate_commitment(const UcpInstance& inst, const MipProblem& built,
                                         const Commitment& u);

// Instance file: {"units":[...], "demand":[...], "reserve":[...], "horizon":T}.
UcpInstance parse_instance(std::string_view json_text);
std::string instance_to_json(const UcpInstance& inst);
UcpInstance load_instance(const std::string& path);
void save_instance(const UcpInstance& inst, const std::string& path);

}  // namespace ucplns
