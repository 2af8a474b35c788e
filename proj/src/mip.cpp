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

#include "ucplns/mip.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <utility>

namespace ucplns {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInstance: return "InvalidInstance";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMissingTags: return "MissingTags";
    case ErrorCode::kIncompleteSolution: return "IncompleteSolution";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kMalformedInput: return "MalformedInput";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kNonFiniteOutput: return "NonFiniteOutput";
    case ErrorCode::kLpInfeasible: return "LpInfeasible";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kNoFeasibleCommitment: return "NoFeasibleCommitment";
    case ErrorCode::kProvenInfeasible: return "ProvenInfeasible";
    case ErrorCode::kInstanceInfeasible: return "InstanceInfeasible";
    case ErrorCode::kNoPositives: return "NoPositives";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kMalformedCsv: return "MalformedCsv";
    case ErrorCode::kMissingReference: return "MissingReference";
  }
  return "Unknown";
}

namespace {

constexpr std::array<std::string_view, 6> kKindNames = {"u", "P", "S", "s", "d", "z"};

struct EqName {
  Equation eq;
  std::string_view code;
};
constexpr std::array<EqName, 18> kEqNames = {{
    {Equation::kStartupStep, "step"}, {Equation::kStartupHot, "hot"},
    {Equation::kStartupCold, "cold"}, {Equation::kGenMin, "gmin"},
    {Equation::kGenMax, "gmax"},      {Equation::kBalance, "bal"},
    {Equation::kReserve, "res"},      {Equation::kRampUp1, "rup1"},
    {Equation::kRampDown1, "rdn1"},   {Equation::kRampUp3, "rup3"},
    {Equation::kRampDown3, "rdn3"},   {Equation::kMinUp1, "mup1"},
    {Equation::kMinDown1, "mdn1"},    {Equation::kMinUp3, "mup3"},
    {Equation::kMinDown3, "mdn3"},    {Equation::kInitialStatus, "init"},
    {Equation::kStateLink, "link"},   {Equation::kOther, "other"},
}};

std::string index_token(int v) { return v < 0 ? std::string("n") : std::to_string(v); }

std::optional<int> parse_index(std::string_view s) {
  if (s == "n") return -1;
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string_view to_string(VarKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::string_view to_string(Family family) {
  static constexpr std::array<std::string_view, 9> names = {
      "?", "C1", "C2", "C3", "C4", "C5", "C6", "C7", "other"};
  return names[static_cast<int>(family)];
}

std::string_view to_string(Equation eq) {
  for (const auto& e : kEqNames) {
    if (e.eq == eq) return e.code;
  }
  return "other";
}

std::string_view to_string(Sense sense) {
  switch (sense) {
    case Sense::kLessEqual: return "<=";
    case Sense::kEqual: return "=";
    case Sense::kGreaterEqual: return ">=";
  }
  return "?";
}

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kFeasible: return "Feasible";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kTimeLimit: return "TimeLimit";
    case SolveStatus::kNodeLimit: return "NodeLimit";
    case SolveStatus::kUnbounded: return "Unbounded";
  }
  return "?";
}

std::string default_name(const VarTag& tag, int index) {
  if (tag.kind == VarKind::kAux && (tag.unit < 0 || tag.period < 0)) {
    return "x" + std::to_string(index);
  }
  return std::string(to_string(tag.kind)) + "_" + index_token(tag.unit) + "_" +
         index_token(tag.period);
}

std::string default_name(const ConTag& tag, int index) {
  if (tag.family == Family::kOther) return "R" + std::to_string(index);
  return std::string(to_string(tag.family)) + "_" + std::string(to_string(tag.equation)) +
         "_" + index_token(tag.unit) + "_" + index_token(tag.period) + "_" +
         index_token(tag.step);
}

std::optional<VarTag> parse_var_name(std::string_view name) {
  auto parts = split(name, '_');
  if (parts.size() != 3) return std::nullopt;
  for (int k = 0; k < static_cast<int>(kKindNames.size()); ++k) {
    if (parts[0] != kKindNames[k]) continue;
    auto g = parse_index(parts[1]);
    auto t = parse_index(parts[2]);
    if (!g || !t) return std::nullopt;
    return VarTag{static_cast<VarKind>(k), *g, *t};
  }
  return std::nullopt;
}

std::optional<ConTag> parse_con_name(std::string_view name) {
  auto parts = split(name, '_');
  if (parts.size() != 5 || parts[0].size() != 2 || parts[0][0] != 'C') return std::nullopt;
  int fam = parts[0][1] - '0';
  if (fam < 1 || fam > kNumFamilies) return std::nullopt;
  ConTag tag;
  tag.family = static_cast<Family>(fam);
  bool found = false;
  for (const auto& e : kEqNames) {
    if (e.code == parts[1]) {
      tag.equation = e.eq;
      found = true;
    }
  }
  if (!found) return std::nullopt;
  auto g = parse_index(parts[2]);
  auto t = parse_index(parts[3]);
  auto k = parse_index(parts[4]);
  if (!g || !t || !k) return std::nullopt;
  tag.unit = *g;
  tag.period = *t;
  tag.step = *k;
  return tag;
}

int MipProblem::add_variable(Variable v) {
  vars_.push_back(std::move(v));
  int j = num_variables() - 1;
  note_tag(j);
  return j;
}

int MipProblem::add_constraint(Constraint c) {
  rows_.push_back(std::move(c));
  return num_constraints() - 1;
}

void MipProblem::note_tag(int j) {
  const VarTag& tag = vars_[j].tag;
  if (tag.kind != VarKind::kU) return;
  if (tag.unit < 0 || tag.period < 0) return;
  if (tag.unit >= units_ || tag.period >= periods_) {
    // Grow the index; existing entries keep their (g, t) position.
    int nu = std::max(units_, tag.unit + 1);
    int np = std::max(periods_, tag.period + 1);
    std::vector<int> grown(static_cast<std::size_t>(nu) * np, -1);
    for (int g = 0; g < units_; ++g) {
      for (int t = 0; t < periods_; ++t) {
        grown[static_cast<std::size_t>(g) * np + t] =
            u_index_[static_cast<std::size_t>(g) * periods_ + t];
      }
    }
    u_index_ = std::move(grown);
    units_ = nu;
    periods_ = np;
  }
  u_index_[static_cast<std::size_t>(tag.unit) * periods_ + tag.period] = j;
}

void MipProblem::reindex() {
  units_ = 0;
  periods_ = 0;
  u_index_.clear();
  for (int j = 0; j < num_variables(); ++j) note_tag(j);
}

int MipProblem::u_index(int g, int t) const {
  if (g < 0 || t < 0 || g >= units_ || t >= periods_) return -1;
  return u_index_[static_cast<std::size_t>(g) * periods_ + t];
}

std::string MipProblem::variable_name(int j) const {
  const Variable& v = vars_[j];
  return v.name.empty() ? default_name(v.tag, j) : v.name;
}

std::string MipProblem::constraint_name(int i) const {
  const Constraint& c = rows_[i];
  return c.name.empty() ? default_name(c.tag, i) : c.name;
}

std::size_t MipProblem::nonzeros() const {
  std::size_t nnz = 0;
  for (const auto& r : rows_) {
    for (double a : r.coef) nnz += (a != 0.0);
  }
  return nnz;
}

double MipProblem::objective_value(const std::vector<double>& x) const {
  double obj = objective_offset_;
  for (int j = 0; j < num_variables(); ++j) obj += vars_[j].cost * x[j];
  return obj;
}

double MipProblem::row_activity(int i, const std::vector<double>& x) const {
  const Constraint& c = rows_[i];
  double act = 0.0;
  for (std::size_t k = 0; k < c.index.size(); ++k) act += c.coef[k] * x[c.index[k]];
  return act;
}

double MipProblem::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    worst = std::max(worst, vars_[j].lower - x[j]);
    worst = std::max(worst, x[j] - vars_[j].upper);
  }
  for (int i = 0; i < num_constraints(); ++i) {
    const Constraint& c = rows_[i];
    double scale = 0.0;
    for (double a : c.coef) scale = std::max(scale, std::abs(a));
    if (scale == 0.0) scale = 1.0;
    double act = row_activity(i, x);
    double v = 0.0;
    if (c.sense != Sense::kGreaterEqual) v = std::max(v, act - c.rhs);
    if (c.sense != Sense::kLessEqual) v = std::max(v, c.rhs - act);
    worst = std::max(worst, v / scale);
  }
  return worst;
}

Commitment extract_commitment(const MipProblem& m, const std::vector<double>& values) {
  Commitment u(m.units(), m.periods());
  for (int g = 0; g < m.units(); ++g) {
    for (int t = 0; t < m.periods(); ++t) {
      int j = m.u_index(g, t);
      if (j >= 0) u(g, t) = values.at(j) > 0.5 ? 1 : 0;
    }
  }
  return u;
}

MipProblem fix_and_sub(const MipProblem& m, const Commitment& u_vals,
                       const NeighborhoodMask& mask) {
  if (!u_vals.same_shape(m.units(), m.periods()) ||
      !mask.same_shape(m.units(), m.periods())) {
    throw Error(ErrorCode::kShapeMismatch,
                "fix_and_sub expects " + std::to_string(m.units()) + "x" +
                    std::to_string(m.periods()) + " commitment and mask");
  }
  MipProblem sub = m;
  for (int g = 0; g < m.units(); ++g) {
    for (int t = 0; t < m.periods(); ++t) {
      if (mask(g, t)) continue;
      int j = m.u_index(g, t);
      if (j < 0) continue;
      double v = u_vals(g, t) ? 1.0 : 0.0;
      sub.variable(j).lower = v;
      sub.variable(j).upper = v;
    }
  }
  return sub;
}

}  // namespace ucplns
