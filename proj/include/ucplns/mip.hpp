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
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ucplns/grid.hpp"

namespace ucplns {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarType : std::uint8_t { kContinuous, kBinary };

// Variable families of a UCP model. kAux covers anything added on top of a
// built model (distance variables of the feasibility pump, for instance).
enum class VarKind : std::uint8_t { kU, kP, kS, kStartup, kShutdown, kAux };
inline constexpr int kNumVarKinds = 5;  // kAux excluded

// Constraint families C1..C7. kOther tags rows that are not part of the
// UCP formulation (no-good cuts, pump linearization, ...).
enum class Family : std::uint8_t { kC1 = 1, kC2, kC3, kC4, kC5, kC6, kC7, kOther };
inline constexpr int kNumFamilies = 7;

// Equation a row was generated from.
enum class Equation : std::uint8_t {
  kStartupStep,    // 1-bin stepwise startup cost
  kStartupHot,     // 3-bin hot startup
  kStartupCold,    // 3-bin cold startup
  kGenMin,         // u * Pmin <= P
  kGenMax,         // P <= u * Pmax
  kBalance,
  kReserve,
  kRampUp1,        // 1-bin ramp up
  kRampDown1,      // 1-bin ramp down
  kRampUp3,        // 3-bin ramp up
  kRampDown3,      // 3-bin ramp down
  kMinUp1,
  kMinDown1,
  kMinUp3,
  kMinDown3,
  kInitialStatus,
  kStateLink,      // s - d = u_t - u_{t-1}
  kOther,
};

enum class Sense : std::uint8_t { kLessEqual, kEqual, kGreaterEqual };

struct VarTag {
  VarKind kind = VarKind::kAux;
  int unit = -1;
  int period = -1;

  friend bool operator==(const VarTag&, const VarTag&) = default;
};

struct ConTag {
  Family family = Family::kOther;
  Equation equation = Equation::kOther;
  int unit = -1;
  int period = -1;
  int step = -1;  // tau for stepwise rows, partner period for min up/down rows

  friend bool operator==(const ConTag&, const ConTag&) = default;
};

struct Variable {
  VarType type = VarType::kContinuous;
  double lower = 0.0;
  double upper = kInf;
  double cost = 0.0;
  VarTag tag;
  std::string name;  // empty means "derive from tag"
};

struct Constraint {
  std::vector<int> index;
  std::vector<double> coef;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
  ConTag tag;
  std::string name;
};

std::string_view to_string(VarKind kind);
std::string_view to_string(Family family);
std::string_view to_string(Equation eq);
std::string_view to_string(Sense sense);

// Minimization problem over continuous and binary variables with linear rows.
// Variables and rows carry semantic tags so that downstream consumers (graph
// encoding, neighborhood search) can find the commitment variables.
class MipProblem {
 public:
  int add_variable(Variable v);
  int add_constraint(Constraint c);

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }
  Variable& variable(int j) { return vars_[j]; }
  const Variable& variable(int j) const { return vars_[j]; }
  const Constraint& constraint(int i) const { return rows_[i]; }

  double objective_offset() const { return objective_offset_; }
  void set_objective_offset(double v) { objective_offset_ = v; }

  // Shape of the commitment matrix; zero when the problem has no u-variables.
  int units() const { return units_; }
  int periods() const { return periods_; }

  // Index of u[g][t], or -1.
  int u_index(int g, int t) const;
  const std::vector<int>& u_indices() const { return u_index_; }

  std::string variable_name(int j) const;
  std::string constraint_name(int i) const;

  // Number of nonzero coefficients over all rows.
  std::size_t nonzeros() const;

  // Objective value of a full assignment.
  double objective_value(const std::vector<double>& x) const;
  double row_activity(int i, const std::vector<double>& x) const;
  // Largest violation over rows and bounds, rows scaled by their largest
  // absolute coefficient.
  double max_violation(const std::vector<double>& x) const;

  // Rebuilds the u index after external edits of tags.
  void reindex();

 private:
  void note_tag(int j);

  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
  double objective_offset_ = 0.0;
  int units_ = 0;
  int periods_ = 0;
  std::vector<int> u_index_;  // row-major (g, t) -> variable index
};

std::string default_name(const VarTag& tag, int index);
std::string default_name(const ConTag& tag, int index);
// Inverse of default_name; nullopt when the name does not encode a tag.
std::optional<VarTag> parse_var_name(std::string_view name);
std::optional<ConTag> parse_con_name(std::string_view name);

enum class SolveStatus : std::uint8_t {
  kOptimal,
  kFeasible,
  kInfeasible,
  kTimeLimit,
  kNodeLimit,
  kUnbounded,
};
std::string_view to_string(SolveStatus s);

struct MipSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> values;
  double objective = kInf;
  double bound = -kInf;
  double wall_time = 0.0;
  std::int64_t nodes = 0;
  std::int64_t lp_iterations = 0;
  // Incumbent updates found by the search itself (a warm start does not count).
  int improvements = 0;

  bool has_solution() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kFeasible ||
           ((status == SolveStatus::kTimeLimit || status == SolveStatus::kNodeLimit) &&
            !values.empty());
  }
};

// Binary part of a solution as a commitment matrix (values rounded).
Commitment extract_commitment(const MipProblem& m, const std::vector<double>& values);

// Copy of `m` where every u-variable with mask == 0 is fixed to u_vals.
MipProblem fix_and_sub(const MipProblem& m, const Commitment& u_vals,
                       const NeighborhoodMask& mask);

}  // namespace ucplns
