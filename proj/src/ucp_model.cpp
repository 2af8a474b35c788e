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

#include "ucplns/ucp_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <set>
#include <tuple>
#include <utility>

#include <json.hpp>

#include "ucplns/simplex.hpp"

namespace ucplns {

std::string_view to_string(Formulation f) {
  return f == Formulation::kOneBin ? "1bin" : "3bin";
}

Formulation parse_formulation(std::string_view s) {
  if (s == "1bin" || s == "1-bin" || s == "onebin") return Formulation::kOneBin;
  if (s == "3bin" || s == "3-bin" || s == "threebin") return Formulation::kThreeBin;
  throw Error(ErrorCode::kMalformedInput, "unknown formulation '" + std::string(s) + "'");
}

int history_status(const UnitParams& unit, int s) {
  // The unit has held u0 for |t0| periods, and the opposite status before.
  return s > -std::abs(unit.t0) ? unit.u0 : 1 - unit.u0;
}

DerivedConstants derive_constants(const UcpInstance& inst) {
  const int n = inst.num_units();
  const int horizon = inst.horizon;
  DerivedConstants dc;
  dc.u_lock.resize(n);
  dc.l_lock.resize(n);
  dc.n_d.resize(n);
  dc.k_step.resize(n);
  dc.f_init = FlagGrid(n, horizon);
  for (int g = 0; g < n; ++g) {
    const UnitParams& u = inst.units[g];
    dc.u_lock[g] = std::max(0, std::min(horizon, u.u0 * (u.t_on - u.t0)));
    dc.l_lock[g] = std::max(0, std::min(horizon, (1 - u.u0) * (u.t_off + u.t0)));
    const int hot_steps = u.t_off + u.t_cold;
    dc.n_d[g] = hot_steps + 1;
    dc.k_step[g].resize(dc.n_d[g]);
    for (int tau = 1; tau <= dc.n_d[g]; ++tau) {
      dc.k_step[g][tau - 1] = tau <= hot_steps ? u.c_hot : u.c_cold;
    }
    for (int p = 1; p <= horizon; ++p) {
      const int shifted = p - u.t_off - u.t_cold;
      const bool active = shifted <= 0 && std::max(-u.t0, 0) < std::abs(shifted - 1) + 1;
      dc.f_init(g, p - 1) = active ? 1 : 0;
    }
  }
  return dc;
}

std::vector<InstanceIssue> validate_instance(const UcpInstance& inst) {
  std::vector<InstanceIssue> issues;
  auto add = [&](std::string field, int g, int t, std::string msg) {
    issues.push_back({std::move(field), g, t, std::move(msg)});
  };
  if (inst.horizon <= 0) add("horizon", -1, -1, "horizon must be positive");
  if (static_cast<int>(inst.demand.size()) != inst.horizon) {
    add("demand", -1, -1, "demand length differs from horizon");
  }
  if (static_cast<int>(inst.reserve.size()) != inst.horizon) {
    add("reserve", -1, -1, "reserve length differs from horizon");
  }
  if (inst.units.empty()) add("units", -1, -1, "no units");
  for (int g = 0; g < inst.num_units(); ++g) {
    const UnitParams& u = inst.units[g];
    if (!(u.p_min >= 0.0)) add("p_min", g, -1, "p_min must be nonnegative");
    if (!(u.p_min <= u.p_max)) add("p_min", g, -1, "p_min exceeds p_max");
    if (u.t_on < 1) add("t_on", g, -1, "t_on must be at least 1");
    if (u.t_off < 1) add("t_off", g, -1, "t_off must be at least 1");
    if (u.t_cold < 0) add("t_cold", g, -1, "t_cold must be nonnegative");
    if (!(u.ramp_start >= u.p_min)) add("ramp_start", g, -1, "ramp_start below p_min");
    if (!(u.ramp_shut >= u.p_min)) add("ramp_shut", g, -1, "ramp_shut below p_min");
    if (u.ramp_up < 0.0) add("ramp_up", g, -1, "ramp_up must be nonnegative");
    if (u.ramp_down < 0.0) add("ramp_down", g, -1, "ramp_down must be nonnegative");
    if (u.u0 != 0 && u.u0 != 1) add("u0", g, -1, "u0 must be 0 or 1");
    if (u.u0 == 1 && u.t0 <= 0) add("t0", g, -1, "online unit needs t0 > 0");
    if (u.u0 == 0 && u.t0 >= 0) add("t0", g, -1, "offline unit needs t0 < 0");
    if (u.c_hot < 0.0 || u.c_cold < 0.0) add("c_hot", g, -1, "negative startup cost");
  }
  double capacity = 0.0;
  for (const auto& u : inst.units) capacity += u.p_max;
  const int len = std::min<int>({inst.horizon, static_cast<int>(inst.demand.size()),
                                 static_cast<int>(inst.reserve.size())});
  for (int t = 0; t < len; ++t) {
    if (!(inst.demand[t] > 0.0)) add("demand", -1, t, "demand must be positive");
    if (inst.reserve[t] < 0.0) add("reserve", -1, t, "reserve must be nonnegative");
    if (inst.demand[t] + inst.reserve[t] > capacity) {
      add("capacity", -1, t, "demand plus reserve exceeds total p_max");
    }
  }
  return issues;
}

namespace {

class RowBuilder {
 public:
  void add(int var, double coef) {
    if (coef == 0.0) return;
    row_.index.push_back(var);
    row_.coef.push_back(coef);
  }
  Constraint take(Sense sense, double rhs, ConTag tag) {
    row_.sense = sense;
    row_.rhs = rhs;
    row_.tag = tag;
    Constraint out = std::move(row_);
    row_ = Constraint{};
    return out;
  }

 private:
  Constraint row_;
};

}  // namespace

MipProblem build_mip(const UcpInstance& inst, Formulation form) {
  auto issues = validate_instance(inst);
  if (!issues.empty()) {
    std::string msg = std::to_string(issues.size()) + " issue(s), first: " +
                      issues.front().field + ": " + issues.front().message;
    throw Error(ErrorCode::kInvalidInstance, msg);
  }
  const int n = inst.num_units();
  const int horizon = inst.horizon;
  const bool three = form == Formulation::kThreeBin;
  const DerivedConstants dc = derive_constants(inst);

  MipProblem m;
  auto add_family = [&](VarKind kind, VarType type, auto lower, auto upper, auto cost) {
    std::vector<int> idx(static_cast<std::size_t>(n) * horizon);
    for (int g = 0; g < n; ++g) {
      for (int t = 0; t < horizon; ++t) {
        Variable v;
        v.type = type;
        v.lower = lower(g);
        v.upper = upper(g);
        v.cost = cost(g);
        v.tag = VarTag{kind, g, t};
        idx[static_cast<std::size_t>(g) * horizon + t] = m.add_variable(std::move(v));
      }
    }
    return idx;
  };
  const auto& units = inst.units;
  auto zero = [](int) { return 0.0; };
  auto one = [](int) { return 1.0; };
  auto inf = [](int) { return kInf; };
  const auto u = add_family(VarKind::kU, VarType::kBinary, zero, one,
                            [&](int g) { return units[g].alpha; });
  const auto p = add_family(VarKind::kP, VarType::kContinuous, zero,
                            [&](int g) { return units[g].p_max; },
                            [&](int g) { return units[g].beta; });
  const auto startup_cost = add_family(VarKind::kS, VarType::kContinuous, zero, inf, one);
  std::vector<int> s, d;
  if (three) {
    s = add_family(VarKind::kStartup, VarType::kBinary, zero, one, zero);
    d = add_family(VarKind::kShutdown, VarType::kBinary, zero, one, zero);
  }
  auto at = [horizon](const std::vector<int>& fam, int g, int t) {
    return fam[static_cast<std::size_t>(g) * horizon + t];
  };

  RowBuilder rb;
  // C1: startup cost.
  for (int g = 0; g < n; ++g) {
    const UnitParams& up = units[g];
    for (int t = 0; t < horizon; ++t) {
      const int period = t + 1;
      if (!three) {
        double k_max = -kInf;
        for (int tau = 1; tau <= dc.n_d[g]; ++tau) {
          const double k = dc.k_step[g][tau - 1];
          // A step whose cost does not exceed an earlier one is dominated.
          if (tau > 1 && k <= k_max) continue;
          k_max = std::max(k_max, k);
          rb.add(at(startup_cost, g, t), 1.0);
          rb.add(at(u, g, t), -k);
          double rhs = 0.0;
          for (int j = 1; j <= tau; ++j) {
            const int prev = period - j;
            if (prev >= 1) {
              rb.add(at(u, g, prev - 1), k);
            } else {
              rhs -= k * history_status(up, prev);
            }
          }
          m.add_constraint(rb.take(Sense::kGreaterEqual, rhs,
                                   {Family::kC1, Equation::kStartupStep, g, t, tau}));
        }
      } else {
        rb.add(at(startup_cost, g, t), 1.0);
        rb.add(at(s, g, t), -up.c_hot);
        m.add_constraint(
            rb.take(Sense::kGreaterEqual, 0.0, {Family::kC1, Equation::kStartupHot, g, t, -1}));
        rb.add(at(startup_cost, g, t), 1.0);
        rb.add(at(s, g, t), -up.c_cold);
        const int first = std::max(period - up.t_off - up.t_cold, 1);
        for (int tau = first; tau <= period - 1; ++tau) rb.add(at(d, g, tau - 1), up.c_cold);
        m.add_constraint(rb.take(Sense::kGreaterEqual, -up.c_cold * dc.f_init(g, t),
                                 {Family::kC1, Equation::kStartupCold, g, t, -1}));
      }
    }
  }
  // C2: spinning reserve.
  for (int t = 0; t < horizon; ++t) {
    for (int g = 0; g < n; ++g) rb.add(at(u, g, t), units[g].p_max);
    m.add_constraint(rb.take(Sense::kGreaterEqual, inst.demand[t] + inst.reserve[t],
                             {Family::kC2, Equation::kReserve, -1, t, -1}));
  }
  // C3: generation limits.
  for (int g = 0; g < n; ++g) {
    for (int t = 0; t < horizon; ++t) {
      rb.add(at(p, g, t), 1.0);
      rb.add(at(u, g, t), -units[g].p_min);
      m.add_constraint(
          rb.take(Sense::kGreaterEqual, 0.0, {Family::kC3, Equation::kGenMin, g, t, -1}));
      rb.add(at(p, g, t), 1.0);
      rb.add(at(u, g, t), -units[g].p_max);
      m.add_constraint(
          rb.take(Sense::kLessEqual, 0.0, {Family::kC3, Equation::kGenMax, g, t, -1}));
    }
  }
  // C4: power balance.
  for (int t = 0; t < horizon; ++t) {
    for (int g = 0; g < n; ++g) rb.add(at(p, g, t), 1.0);
    m.add_constraint(
        rb.take(Sense::kEqual, inst.demand[t], {Family::kC4, Equation::kBalance, -1, t, -1}));
  }
  // C5: initial status.
  for (int g = 0; g < n; ++g) {
    for (int t = 0; t < dc.u_lock[g] + dc.l_lock[g]; ++t) {
      rb.add(at(u, g, t), 1.0);
      m.add_constraint(rb.take(Sense::kEqual, units[g].u0,
                               {Family::kC5, Equation::kInitialStatus, g, t, -1}));
    }
  }
  // C6: minimum up/down time (and state linking for 3-bin).
  for (int g = 0; g < n; ++g) {
    const UnitParams& up = units[g];
    for (int t = 0; t < horizon; ++t) {
      const int period = t + 1;
      if (!three) {
        const int u_prev_const = period == 1 ? up.u0 : -1;
        for (int tau = period + 1; tau <= std::min(period + up.t_on - 1, horizon); ++tau) {
          // u_t - u_{t-1} <= u_tau
          if (u_prev_const == 1) break;  // implied by the variable bounds
          rb.add(at(u, g, t), 1.0);
          if (u_prev_const < 0) rb.add(at(u, g, t - 1), -1.0);
          rb.add(at(u, g, tau - 1), -1.0);
          m.add_constraint(rb.take(Sense::kLessEqual, 0.0,
                                   {Family::kC6, Equation::kMinUp1, g, t, tau - 1}));
        }
        for (int tau = period + 1; tau <= std::min(period + up.t_off - 1, horizon); ++tau) {
          // u_{t-1} - u_t <= 1 - u_tau
          if (u_prev_const == 0) break;
          double rhs = 1.0;
          if (u_prev_const < 0) {
            rb.add(at(u, g, t - 1), 1.0);
          } else {
            rhs -= u_prev_const;
          }
          rb.add(at(u, g, t), -1.0);
          rb.add(at(u, g, tau - 1), 1.0);
          m.add_constraint(rb.take(Sense::kLessEqual, rhs,
                                   {Family::kC6, Equation::kMinDown1, g, t, tau - 1}));
        }
      } else {
        if (period >= dc.u_lock[g] + 1) {
          for (int w = std::max(period - up.t_on, 0) + 1; w <= period; ++w) {
            rb.add(at(s, g, w - 1), 1.0);
          }
          rb.add(at(u, g, t), -1.0);
          m.add_constraint(
              rb.take(Sense::kLessEqual, 0.0, {Family::kC6, Equation::kMinUp3, g, t, -1}));
        }
        if (period >= dc.l_lock[g] + 1) {
          for (int w = std::max(period - up.t_off, 0) + 1; w <= period; ++w) {
            rb.add(at(d, g, w - 1), 1.0);
          }
          rb.add(at(u, g, t), 1.0);
          m.add_constraint(
              rb.take(Sense::kLessEqual, 1.0, {Family::kC6, Equation::kMinDown3, g, t, -1}));
        }
        rb.add(at(s, g, t), 1.0);
        rb.add(at(d, g, t), -1.0);
        rb.add(at(u, g, t), -1.0);
        double rhs = 0.0;
        if (period == 1) {
          rhs = -up.u0;
        } else {
          rb.add(at(u, g, t - 1), 1.0);
        }
        m.add_constraint(
            rb.take(Sense::kEqual, rhs, {Family::kC6, Equation::kStateLink, g, t, -1}));
      }
    }
  }
  // C7: ramping. No output is known for period 0, so rows start at period 2.
  for (int g = 0; g < n; ++g) {
    const UnitParams& up = units[g];
    for (int t = 1; t < horizon; ++t) {
      if (!three) {
        rb.add(at(p, g, t), 1.0);
        rb.add(at(p, g, t - 1), -1.0);
        rb.add(at(u, g, t - 1), up.ramp_start - up.ramp_up);
        rb.add(at(u, g, t), -up.ramp_start);
        m.add_constraint(
            rb.take(Sense::kLessEqual, 0.0, {Family::kC7, Equation::kRampUp1, g, t, -1}));
        rb.add(at(p, g, t - 1), 1.0);
        rb.add(at(p, g, t), -1.0);
        rb.add(at(u, g, t), up.ramp_shut - up.ramp_down);
        rb.add(at(u, g, t - 1), -up.ramp_shut);
        m.add_constraint(
            rb.take(Sense::kLessEqual, 0.0, {Family::kC7, Equation::kRampDown1, g, t, -1}));
      } else {
        rb.add(at(p, g, t), 1.0);
        rb.add(at(p, g, t - 1), -1.0);
        rb.add(at(u, g, t), -(up.ramp_up + up.p_min));
        rb.add(at(u, g, t - 1), up.p_min);
        rb.add(at(s, g, t), -(up.ramp_start - up.ramp_up - up.p_min));
        m.add_constraint(
            rb.take(Sense::kLessEqual, 0.0, {Family::kC7, Equation::kRampUp3, g, t, -1}));
        rb.add(at(p, g, t - 1), 1.0);
        rb.add(at(p, g, t), -1.0);
        rb.add(at(u, g, t - 1), -(up.ramp_down + up.p_min));
        rb.add(at(u, g, t), up.p_min);
        rb.add(at(d, g, t), -(up.ramp_shut - up.ramp_down - up.p_min));
        m.add_constraint(
            rb.take(Sense::kLessEqual, 0.0, {Family::kC7, Equation::kRampDown3, g, t, -1}));
      }
    }
  }
  return m;
}

CommitmentEvaluation evaluate_commitment(const UcpInstance& inst, Formulation form,
                                         const Commitment& u) {
  return evaluate_commitment(inst, build_mip(inst, form), u);
}

CommitmentEvaluation evaluate_commitment(const UcpInstance& inst, const MipProblem& built,
                                         const Commitment& u) {
  const int n = inst.num_units();
  const int horizon = inst.horizon;
  if (!u.same_shape(n, horizon)) {
    throw Error(ErrorCode::kShapeMismatch, "commitment shape differs from the instance");
  }
  const bool three = built.num_variables() > 3 * n * horizon;
  CommitmentEvaluation ev;
  const DerivedConstants dc = derive_constants(inst);
  auto status = [&](int g, int t) {  // 0-based t, history for t < 0
    return t >= 0 ? static_cast<int>(u(g, t)) : history_status(inst.units[g], t + 1);
  };

  for (int g = 0; g < n; ++g) {
    const UnitParams& up = inst.units[g];
    for (int t = 0; t < dc.u_lock[g] + dc.l_lock[g]; ++t) {
      if (u(g, t) != up.u0) {
        ev.violations.push_back({Family::kC5, Equation::kInitialStatus, g, t});
      }
    }
    for (int t = 0; t < horizon; ++t) {
      const int now = status(g, t), prev = status(g, t - 1);
      if (now == 1 && prev == 0) {
        for (int tau = t + 1; tau <= std::min(t + up.t_on - 1, horizon - 1); ++tau) {
          if (u(g, tau) == 0) {
            ev.violations.push_back(
                {Family::kC6, three ? Equation::kMinUp3 : Equation::kMinUp1, g, t});
            break;
          }
        }
      }
      if (now == 0 && prev == 1) {
        for (int tau = t + 1; tau <= std::min(t + up.t_off - 1, horizon - 1); ++tau) {
          if (u(g, tau) == 1) {
            ev.violations.push_back(
                {Family::kC6, three ? Equation::kMinDown3 : Equation::kMinDown1, g, t});
            break;
          }
        }
      }
    }
  }
  for (int t = 0; t < horizon; ++t) {
    double cap_max = 0.0, cap_min = 0.0;
    for (int g = 0; g < n; ++g) {
      if (!u(g, t)) continue;
      cap_max += inst.units[g].p_max;
      cap_min += inst.units[g].p_min;
    }
    const double need = inst.demand[t] + inst.reserve[t];
    if (cap_max < need - 1e-9 * std::max(1.0, need)) {
      ev.violations.push_back({Family::kC2, Equation::kReserve, -1, t});
    }
    if (cap_max < inst.demand[t] - 1e-9 || cap_min > inst.demand[t] + 1e-9) {
      ev.violations.push_back({Family::kC4, Equation::kBalance, -1, t});
    }
  }
  if (!ev.violations.empty()) return ev;

  SimplexSolver lp(built);
  for (int g = 0; g < n; ++g) {
    for (int t = 0; t < horizon; ++t) {
      const int j = built.u_index(g, t);
      const double v = u(g, t) ? 1.0 : 0.0;
      lp.set_bounds(j, v, v);
    }
  }
  LpResult r = lp.solve();
  if (r.status == SolveStatus::kOptimal) {
    ev.feasible = true;
    ev.objective = r.objective + built.objective_offset();
    ev.values = std::move(r.x);
    return ev;
  }
  std::set<std::tuple<int, int, int, int>> seen;
  for (int i : r.infeasible_rows) {
    const ConTag& tag = built.constraint(i).tag;
    auto key = std::make_tuple(static_cast<int>(tag.family), static_cast<int>(tag.equation),
                               tag.unit, tag.period);
    if (seen.insert(key).second) {
      ev.violations.push_back({tag.family, tag.equation, tag.unit, tag.period});
    }
  }
  if (ev.violations.empty()) {
    // Dispatch infeasible without a residual row; ramping is the only family left.
    ev.violations.push_back({Family::kC7, Equation::kOther, -1, -1});
  }
  return ev;
}

namespace {

using nlohmann::json;

template <typename T>
T field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorCode::kMalformedInput, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) {
      throw Error(ErrorCode::kMalformedInput,
                  std::string("unknown field '") + it.key() + "' in " + where);
    }
  }
}

}  // namespace

UcpInstance parse_instance(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("instance: ") + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::kMalformedInput, "instance must be an object");
  reject_unknown(doc, {"units", "demand", "reserve", "horizon"}, "instance");
  UcpInstance inst;
  inst.horizon = field<int>(doc, "horizon");
  inst.demand = field<std::vector<double>>(doc, "demand");
  inst.reserve = field<std::vector<double>>(doc, "reserve");
  const json& units = doc.at("units");
  if (!units.is_array()) throw Error(ErrorCode::kMalformedInput, "units must be an array");
  for (const json& j : units) {
    if (!j.is_object()) throw Error(ErrorCode::kMalformedInput, "unit must be an object");
    reject_unknown(j,
                   {"alpha", "beta", "c_hot", "c_cold", "t_on", "t_off", "t_cold", "p_max",
                    "p_min", "ramp_up", "ramp_down", "ramp_start", "ramp_shut", "u0", "t0"},
                   "unit");
    UnitParams u;
    u.alpha = field<double>(j, "alpha");
    u.beta = field<double>(j, "beta");
    u.c_hot = field<double>(j, "c_hot");
    u.c_cold = field<double>(j, "c_cold");
    u.t_on = field<int>(j, "t_on");
    u.t_off = field<int>(j, "t_off");
    u.t_cold = field<int>(j, "t_cold");
    u.p_max = field<double>(j, "p_max");
    u.p_min = field<double>(j, "p_min");
    u.ramp_up = field<double>(j, "ramp_up");
    u.ramp_down = field<double>(j, "ramp_down");
    u.ramp_start = field<double>(j, "ramp_start");
    u.ramp_shut = field<double>(j, "ramp_shut");
    u.u0 = field<int>(j, "u0");
    u.t0 = field<int>(j, "t0");
    inst.units.push_back(u);
  }
  return inst;
}

std::string instance_to_json(const UcpInstance& inst) {
  json units = json::array();
  for (const auto& u : inst.units) {
    units.push_back({{"alpha", u.alpha},
                     {"beta", u.beta},
                     {"c_hot", u.c_hot},
                     {"c_cold", u.c_cold},
                     {"t_on", u.t_on},
                     {"t_off", u.t_off},
                     {"t_cold", u.t_cold},
                     {"p_max", u.p_max},
                     {"p_min", u.p_min},
                     {"ramp_up", u.ramp_up},
                     {"ramp_down", u.ramp_down},
                     {"ramp_start", u.ramp_start},
                     {"ramp_shut", u.ramp_shut},
                     {"u0", u.u0},
                     {"t0", u.t0}});
  }
  json doc = {{"units", units},
              {"demand", inst.demand},
              {"reserve", inst.reserve},
              {"horizon", inst.horizon}};
  return doc.dump(1);
}

UcpInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

void save_instance(const UcpInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path);
  out << instance_to_json(inst) << '\n';
}

}  // namespace ucplns
