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

#include "ucplns/branch_and_bound.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <utility>

#include "ucplns/simplex.hpp"

namespace ucplns {

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kFeasTol = 1e-6;

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  std::vector<BoundChange> changes;
  double parent_bound = -kInf;
  std::shared_ptr<const LpBasis> basis;
};

double fractionality(double v) { return std::abs(v - std::round(v)); }

class BranchAndBound {
 public:
  BranchAndBound(const MipProblem& m, const MipLimits& limits, const IncumbentCallback& cb)
      : m_(m), limits_(limits), cb_(cb), lp_(m), start_(std::chrono::steady_clock::now()) {
    for (int j = 0; j < m.num_variables(); ++j) {
      if (m.variable(j).type == VarType::kBinary) binaries_.push_back(j);
    }
    for (int j : m.u_indices()) {
      if (j >= 0 && m.variable(j).type == VarType::kBinary) u_vars_.push_back(j);
    }
  }

  MipSolution run(const std::optional<Assignment>& start) {
    if (start) try_start(*start);
    if (limits_.time_limit <= 0.0) return finish(SolveStatus::kTimeLimit, -kInf);
    if (limits_.first_feasible && has_incumbent()) return finish(SolveStatus::kFeasible, -kInf);

    std::vector<Node> stack;
    stack.push_back(Node{});
    const LpBasis* current_basis = nullptr;

    while (!stack.empty()) {
      double bound = global_bound(stack);
      if (has_incumbent() && gap_closed(bound)) return finish(SolveStatus::kOptimal, bound);
      if (elapsed() >= limits_.time_limit) return finish(SolveStatus::kTimeLimit, bound);
      if (limits_.node_limit >= 0 && nodes_ >= limits_.node_limit) {
        return finish(has_incumbent() ? SolveStatus::kFeasible : SolveStatus::kNodeLimit,
                      bound);
      }

      Node node = std::move(stack.back());
      stack.pop_back();
      if (node.parent_bound >= cutoff()) continue;

      apply(node.changes);
      if (node.basis && node.basis.get() != current_basis) lp_.set_basis(*node.basis);
      LpResult r = lp_.solve();
      current_basis = nullptr;
      ++nodes_;
      iterations_ += r.iterations;
      if (r.status == SolveStatus::kUnbounded && nodes_ == 1 && !has_incumbent()) {
        return finish(SolveStatus::kUnbounded, -kInf);
      }
      if (r.status != SolveStatus::kOptimal) continue;
      double obj = r.objective + m_.objective_offset();
      if (obj >= cutoff()) continue;

      int branch = pick_branch(r.x);
      if (branch < 0) {
        if (m_.max_violation(r.x) <= kFeasTol && obj < inc_obj_) {
          set_incumbent(std::move(r.x), obj, false);
          if (limits_.first_feasible) return finish(SolveStatus::kFeasible, global_bound(stack));
        }
        continue;
      }

      auto snapshot = std::make_shared<const LpBasis>(lp_.basis());
      current_basis = snapshot.get();
      Node up{node.changes, obj, snapshot};
      up.changes.push_back({branch, 1.0, 1.0});
      Node down{std::move(node.changes), obj, snapshot};
      down.changes.push_back({branch, 0.0, 0.0});
      stack.push_back(std::move(up));
      stack.push_back(std::move(down));
    }
    return finish(has_incumbent() ? SolveStatus::kOptimal : SolveStatus::kInfeasible,
                  has_incumbent() ? inc_obj_ : kInf);
  }

 private:
  bool has_incumbent() const { return std::isfinite(inc_obj_); }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  double gap_tolerance() const {
    return std::max(limits_.gap * std::abs(inc_obj_), 1e-9);
  }

  double cutoff() const { return has_incumbent() ? inc_obj_ - gap_tolerance() : kInf; }

  bool gap_closed(double bound) const { return inc_obj_ - bound <= gap_tolerance(); }

  double global_bound(const std::vector<Node>& stack) const {
    double b = inc_obj_;
    for (const Node& n : stack) b = std::min(b, n.parent_bound);
    return b;
  }

  void apply(const std::vector<BoundChange>& changes) {
    for (int j : binaries_) lp_.set_bounds(j, m_.variable(j).lower, m_.variable(j).upper);
    for (const BoundChange& c : changes) lp_.set_bounds(c.var, c.lower, c.upper);
  }

  int pick_branch(const std::vector<double>& x) const {
    auto most_fractional = [&](const std::vector<int>& candidates) {
      int best = -1;
      double best_frac = kIntTol;
      for (int j : candidates) {
        double f = fractionality(x[j]);
        if (f > best_frac) {
          best_frac = f;
          best = j;
        }
      }
      return best;
    };
    int j = most_fractional(u_vars_);
    return j >= 0 ? j : most_fractional(binaries_);
  }

  void try_start(const Assignment& start) {
    if (static_cast<int>(start.size()) != m_.num_variables()) {
      throw Error(ErrorCode::kShapeMismatch, "start assignment has wrong length");
    }
    for (int j : binaries_) {
      if (std::isnan(start[j])) continue;
      double v = start[j] > 0.5 ? 1.0 : 0.0;
      lp_.set_bounds(j, v, v);
    }
    LpResult r = lp_.solve();
    iterations_ += r.iterations;
    apply({});
    if (r.status != SolveStatus::kOptimal) return;
    if (pick_branch(r.x) >= 0 || m_.max_violation(r.x) > kFeasTol) return;
    set_incumbent(std::move(r.x), r.objective + m_.objective_offset(), true);
  }

  void set_incumbent(std::vector<double> x, double obj, bool from_start) {
    inc_ = std::move(x);
    inc_obj_ = obj;
    if (!from_start) ++improvements_;
    if (cb_) cb_(IncumbentEvent{inc_, inc_obj_, nodes_, elapsed(), from_start});
  }

  MipSolution finish(SolveStatus status, double bound) {
    MipSolution sol;
    sol.status = status;
    sol.values = inc_;
    sol.objective = inc_obj_;
    sol.bound = std::min(bound, inc_obj_);
    sol.nodes = nodes_;
    sol.lp_iterations = iterations_;
    sol.improvements = improvements_;
    sol.wall_time = elapsed();
    return sol;
  }

  const MipProblem& m_;
  MipLimits limits_;
  const IncumbentCallback& cb_;
  SimplexSolver lp_;
  std::chrono::steady_clock::time_point start_;
  std::vector<int> binaries_;
  std::vector<int> u_vars_;
  std::vector<double> inc_;
  double inc_obj_ = kInf;
  std::int64_t nodes_ = 0;
  std::int64_t iterations_ = 0;
  int improvements_ = 0;
};

}  // namespace

Assignment start_from_commitment(const MipProblem& m, const Commitment& u) {
  if (!u.same_shape(m.units(), m.periods())) {
    throw Error(ErrorCode::kShapeMismatch, "start commitment does not match the model");
  }
  Assignment a(m.num_variables(), std::nan(""));
  for (int g = 0; g < m.units(); ++g) {
    for (int t = 0; t < m.periods(); ++t) {
      int j = m.u_index(g, t);
      if (j >= 0) a[j] = u(g, t) ? 1.0 : 0.0;
    }
  }
  // Startup/shutdown indicators follow from u. The status before the
  // horizon is read off the period-0 state-link row: s - d - u = -u0.
  std::vector<int> before(m.units(), 0);
  for (const Constraint& c : m.constraints()) {
    if (c.tag.equation == Equation::kStateLink && c.tag.period == 0 && c.tag.unit >= 0 &&
        c.tag.unit < m.units()) {
      before[c.tag.unit] = c.rhs < -0.5 ? 1 : 0;
    }
  }
  for (int j = 0; j < m.num_variables(); ++j) {
    const VarTag& tag = m.variable(j).tag;
    if (tag.kind != VarKind::kStartup && tag.kind != VarKind::kShutdown) continue;
    if (tag.unit < 0 || tag.unit >= m.units() || tag.period < 0 || tag.period >= m.periods()) continue;
    const int now = u(tag.unit, tag.period);
    const int prev = tag.period > 0 ? u(tag.unit, tag.period - 1) : before[tag.unit];
    const int diff = tag.kind == VarKind::kStartup ? now - prev : prev - now;
    a[j] = diff > 0 ? 1.0 : 0.0;
  }
  return a;
}

MipSolution solve_mip(const MipProblem& m, const MipLimits& limits,
                      const std::optional<Assignment>& start,
                      const IncumbentCallback& on_incumbent) {
  BranchAndBound bnb(m, limits, on_incumbent);
  return bnb.run(start);
}

}  // namespace ucplns
