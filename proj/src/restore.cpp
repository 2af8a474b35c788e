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

#include "ucplns/restore.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <tuple>

namespace ucplns {

namespace {

struct Repairer {
  const UcpInstance& inst;
  const ScoreVector& scores;
  const DerivedConstants& dc;
  Commitment& u;

  int status(int g, int t) const {
    return t >= 0 ? static_cast<int>(u(g, t)) : history_status(inst.units[g], t + 1);
  }
  bool locked_off(int g, int t) const {
    return t >= dc.u_lock[g] && t < dc.u_lock[g] + dc.l_lock[g] && inst.units[g].u0 == 0;
  }
  double flip_cost(int g, int from, int to) const {
    double c = 0.0;
    for (int t = from; t <= to; ++t) {
      if (!u(g, t)) c += std::abs(scores(g, t) - 0.5);
    }
    return c;
  }
  void switch_on(int g, int from, int to) {
    for (int t = std::max(from, 0); t <= std::min(to, inst.horizon - 1); ++t) u(g, t) = 1;
  }

  // Length of the run that holds status(g, t) and ends at t, counting history.
  int run_length_ending(int g, int t) const {
    const int v = status(g, t);
    int len = 0;
    for (int s = t; status(g, s) == v; --s) {
      ++len;
      if (s < -std::abs(inst.units[g].t0) - 1) break;  // history is constant beyond this
    }
    return len;
  }

  // Fixes the first minimum up/down breach of unit g; false when none is left.
  bool fix_one(int g) {
    const UnitParams& p = inst.units[g];
    const int horizon = inst.horizon;
    for (int t = 0; t < horizon; ++t) {
      const int before = status(g, t - 1);
      if (before == status(g, t)) continue;
      const int len = run_length_ending(g, t - 1);
      if (before == 1 && len < p.t_on) {
        // On-run [t - len, t - 1] is too short: extend forward or backward.
        const int start = t - len;
        const int missing = p.t_on - len;
        const int fwd_to = std::min(t - 1 + missing, horizon - 1);
        const double fwd = flip_cost(g, t, fwd_to);
        bool back_ok = start - missing >= 0;
        for (int s = start - missing; back_ok && s < start; ++s) back_ok = !locked_off(g, s);
        const double back = back_ok ? flip_cost(g, start - missing, start - 1) : kInf;
        if (back < fwd) {
          switch_on(g, start - missing, start - 1);
        } else {
          switch_on(g, t, fwd_to);
        }
        return true;
      }
      if (before == 0 && len < p.t_off) {
        // Off-run too short: keep the unit on through it.
        switch_on(g, t - len, t - 1);
        return true;
      }
    }
    return false;
  }

  void fix_up_down() {
    for (int g = 0; g < inst.num_units(); ++g) {
      for (int guard = 0; guard <= inst.horizon * 4 && fix_one(g); ++guard) {
      }
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<int> priority_order(const UcpInstance& inst) {
  std::vector<int> order(inst.num_units());
  std::iota(order.begin(), order.end(), 0);
  auto avg = [&](int g) {
    const UnitParams& u = inst.units[g];
    return (u.alpha + u.beta * u.p_max) / u.p_max;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return std::make_tuple(avg(a), -inst.units[a].p_max, a) <
           std::make_tuple(avg(b), -inst.units[b].p_max, b);
  });
  return order;
}

Commitment round_scores(const ScoreVector& scores) {
  Commitment u(scores.units(), scores.periods());
  for (std::size_t i = 0; i < scores.size(); ++i) u[i] = scores[i] >= 0.5 ? 1 : 0;
  return u;
}

ScoreVector merge_on_runs(const ScoreVector& scores, const Commitment& u) {
  if (!scores.same_shape(u)) throw Error(ErrorCode::kShapeMismatch, "scores and commitment differ in shape");
  ScoreVector out = scores;
  for (int g = 0; g < u.units(); ++g) {
    int t = 0;
    while (t < u.periods()) {
      if (!u(g, t)) {
        ++t;
        continue;
      }
      int end = t;
      double best = scores(g, t);
      while (end + 1 < u.periods() && u(g, end + 1)) best = std::max(best, scores(g, ++end));
      for (int s = t; s <= end; ++s) out(g, s) = best;
      t = end + 1;
    }
  }
  return out;
}

Commitment feasibility_pump(const UcpInstance& inst, Formulation form, const Commitment& u_bad,
                            const MipLimits& limits) {
  MipProblem m = build_mip(inst, form);
  if (!u_bad.same_shape(inst.num_units(), inst.horizon)) {
    throw Error(ErrorCode::kShapeMismatch, "commitment shape differs from the instance");
  }
  for (int j = 0; j < m.num_variables(); ++j) m.variable(j).cost = 0.0;
  for (int g = 0; g < inst.num_units(); ++g) {
    for (int t = 0; t < inst.horizon; ++t) {
      Variable z;
      z.lower = 0.0;
      z.upper = kInf;
      z.cost = 1.0;
      z.name = "dist_" + std::to_string(g) + "_" + std::to_string(t);
      const int zj = m.add_variable(z);
      const int uj = m.u_index(g, t);
      const double target = u_bad(g, t);
      Constraint above;  // z >= u - u*
      above.index = {zj, uj};
      above.coef = {1.0, -1.0};
      above.sense = Sense::kGreaterEqual;
      above.rhs = -target;
      m.add_constraint(above);
      Constraint below;  // z >= u* - u
      below.index = {zj, uj};
      below.coef = {1.0, 1.0};
      below.sense = Sense::kGreaterEqual;
      below.rhs = target;
      m.add_constraint(below);
    }
  }
  MipLimits lim = limits;
  lim.first_feasible = true;
  MipSolution sol = solve_mip(m, lim);
  if (sol.status == SolveStatus::kInfeasible) {
    throw Error(ErrorCode::kProvenInfeasible, "no commitment satisfies the model");
  }
  if (!sol.has_solution()) {
    throw Error(ErrorCode::kNoFeasibleCommitment, "feasibility pump stopped before finding a commitment");
  }
  return extract_commitment(m, sol.values);
}

RestorationResult heuristic_restore(const UcpInstance& inst, Formulation form, const ScoreVector& scores,
                                    const MipLimits& pump_limits) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = inst.num_units();
  const int horizon = inst.horizon;
  if (!scores.same_shape(n, horizon)) {
    throw Error(ErrorCode::kShapeMismatch, "scores shape differs from the instance");
  }
  const MipProblem model = build_mip(inst, form);
  const DerivedConstants dc = derive_constants(inst);
  const Commitment rounded = round_scores(scores);
  Commitment u = rounded;

  for (int g = 0; g < n; ++g) {
    for (int t = 0; t < std::min(horizon, dc.u_lock[g] + dc.l_lock[g]); ++t) u(g, t) = inst.units[g].u0;
  }
  Repairer rep{inst, scores, dc, u};
  rep.fix_up_down();

  const std::vector<int> order = priority_order(inst);
  for (int t = 0; t < horizon; ++t) {
    const double need = inst.demand[t] + inst.reserve[t];
    for (;;) {
      double cap = 0.0;
      for (int g = 0; g < n; ++g) cap += u(g, t) ? inst.units[g].p_max : 0.0;
      if (cap >= need - 1e-9 * std::max(1.0, need)) break;
      int pick = -1;
      for (int g : order) {
        if (!u(g, t) && !rep.locked_off(g, t)) {
          pick = g;
          break;
        }
      }
      if (pick < 0) break;  // left to the pump
      u(pick, t) = 1;
      rep.fix_up_down();
    }
  }

  RestorationResult res;
  CommitmentEvaluation ev = evaluate_commitment(inst, model, u);
  if (!ev.feasible) {
    try {
      u = feasibility_pump(inst, form, u, pump_limits);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kProvenInfeasible) {
        throw Error(ErrorCode::kNoFeasibleCommitment, std::string("restoration failed: ") + e.what());
      }
      throw;
    }
    res.pump_used = true;
    ev = evaluate_commitment(inst, model, u);
    if (!ev.feasible) {
      throw Error(ErrorCode::kNoFeasibleCommitment, "pump result failed the dispatch check");
    }
  }
  res.u_star = u;
  res.objective = ev.objective;
  res.merged_scores = merge_on_runs(scores, u);
  res.forced_on = NeighborhoodMask(n, horizon);
  for (std::size_t i = 0; i < u.size(); ++i) res.forced_on[i] = (u[i] && !rounded[i]) ? 1 : 0;
  res.wall_time = seconds_since(t0);
  return res;
}

}  // namespace ucplns
