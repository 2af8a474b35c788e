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

#include "ucplns/simplex.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

namespace ucplns {

namespace {

using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Lu = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

// One product-form update: column `row` of the identity replaced by alpha.
struct Eta {
  int row = 0;
  double pivot = 1.0;
  std::vector<int> index;  // excludes `row`
  std::vector<double> value;
};

}  // namespace

struct SimplexSolver::Impl {
  SimplexOptions opts;
  int n = 0;
  int m = 0;

  // Scaled constraint matrix, column-major.
  std::vector<int> col_start;
  std::vector<int> row_index;
  std::vector<double> value;
  std::vector<double> row_scale;

  std::vector<double> cost;  // structural costs divided by cost_scale
  double cost_scale = 1.0;
  std::vector<double> orig_cost;
  std::vector<double> lo;  // n + m
  std::vector<double> up;

  std::vector<int> head;
  std::vector<BasisStatus> status;
  std::vector<double> x;  // n + m

  mutable Lu lu;  // transpose().solve() is non-const in Eigen
  bool factored = false;
  std::vector<Eta> etas;

  // Bounds before a degeneracy perturbation; empty when none is active.
  std::vector<double> lo_saved, up_saved;

  explicit Impl(const MipProblem& mp, SimplexOptions o) : opts(o) {
    n = mp.num_variables();
    m = mp.num_constraints();
    row_scale.assign(m, 1.0);
    for (int i = 0; i < m; ++i) {
      double mx = 0.0;
      for (double a : mp.constraint(i).coef) mx = std::max(mx, std::abs(a));
      if (mx > 0.0) row_scale[i] = 1.0 / mx;
    }
    // Transpose row storage into columns.
    std::vector<int> count(n + 1, 0);
    for (int i = 0; i < m; ++i) {
      const Constraint& c = mp.constraint(i);
      for (std::size_t k = 0; k < c.index.size(); ++k) {
        if (c.coef[k] != 0.0) ++count[c.index[k] + 1];
      }
    }
    col_start.assign(n + 1, 0);
    for (int j = 0; j < n; ++j) col_start[j + 1] = col_start[j] + count[j + 1];
    row_index.resize(col_start[n]);
    value.resize(col_start[n]);
    std::vector<int> fill(col_start.begin(), col_start.end() - 1);
    for (int i = 0; i < m; ++i) {
      const Constraint& c = mp.constraint(i);
      for (std::size_t k = 0; k < c.index.size(); ++k) {
        if (c.coef[k] == 0.0) continue;
        int p = fill[c.index[k]]++;
        row_index[p] = i;
        value[p] = c.coef[k] * row_scale[i];
      }
    }
    // Duplicate entries of one variable within a row are summed by the
    // factorization but would confuse pricing; merge them here.
    for (int j = 0; j < n; ++j) {
      int b = col_start[j], e = col_start[j + 1];
      std::vector<std::pair<int, double>> entries;
      for (int p = b; p < e; ++p) entries.emplace_back(row_index[p], value[p]);
      std::sort(entries.begin(), entries.end());
      for (std::size_t k = 1; k < entries.size(); ++k) {
        if (entries[k].first == entries[k - 1].first) {
          entries[k].second += entries[k - 1].second;
          entries[k - 1].second = 0.0;
        }
      }
      for (int p = b; p < e; ++p) {
        row_index[p] = entries[p - b].first;
        value[p] = entries[p - b].second;
      }
    }

    orig_cost.resize(n);
    double cmax = 0.0;
    for (int j = 0; j < n; ++j) {
      orig_cost[j] = mp.variable(j).cost;
      cmax = std::max(cmax, std::abs(orig_cost[j]));
    }
    cost_scale = cmax > 0.0 ? cmax : 1.0;
    cost.resize(n);
    for (int j = 0; j < n; ++j) cost[j] = orig_cost[j] / cost_scale;

    lo.resize(n + m);
    up.resize(n + m);
    for (int j = 0; j < n; ++j) {
      const Variable& v = mp.variable(j);
      lo[j] = v.lower;
      up[j] = v.upper;
      if (v.type == VarType::kBinary) {
        lo[j] = std::max(lo[j], 0.0);
        up[j] = std::min(up[j], 1.0);
      }
    }
    for (int i = 0; i < m; ++i) {
      const Constraint& c = mp.constraint(i);
      double r = c.rhs * row_scale[i];
      lo[n + i] = c.sense == Sense::kLessEqual ? -kInf : r;
      up[n + i] = c.sense == Sense::kGreaterEqual ? kInf : r;
    }
    x.assign(n + m, 0.0);
    reset_basis();
  }

  void reset_basis() {
    head.resize(m);
    status.assign(n + m, BasisStatus::kAtLower);
    for (int i = 0; i < m; ++i) {
      head[i] = n + i;
      status[n + i] = BasisStatus::kBasic;
    }
    for (int j = 0; j < n; ++j) status[j] = default_status(j);
    factored = false;
  }

  BasisStatus default_status(int j) const {
    if (std::isfinite(lo[j])) return BasisStatus::kAtLower;
    if (std::isfinite(up[j])) return BasisStatus::kAtUpper;
    return BasisStatus::kAtZero;
  }

  // Keeps nonbasic statuses consistent with (possibly changed) bounds and
  // places nonbasic variables on their bound.
  void place_nonbasic() {
    for (int j = 0; j < n + m; ++j) {
      BasisStatus& s = status[j];
      if (s == BasisStatus::kBasic) continue;
      if (s == BasisStatus::kAtLower && !std::isfinite(lo[j])) s = default_status(j);
      if (s == BasisStatus::kAtUpper && !std::isfinite(up[j])) s = default_status(j);
      if (s == BasisStatus::kAtZero && (std::isfinite(lo[j]) || std::isfinite(up[j]))) {
        s = default_status(j);
      }
      x[j] = s == BasisStatus::kAtLower ? lo[j] : s == BasisStatus::kAtUpper ? up[j] : 0.0;
    }
  }

  bool refactor() {
    etas.clear();
    factored = false;
    if (m == 0) {
      factored = true;
      return true;
    }
    std::vector<Eigen::Triplet<double, int>> trip;
    trip.reserve(static_cast<std::size_t>(m) * 4);
    for (int i = 0; i < m; ++i) {
      int j = head[i];
      if (j >= n) {
        trip.emplace_back(j - n, i, -1.0);
      } else {
        for (int p = col_start[j]; p < col_start[j + 1]; ++p) {
          if (value[p] != 0.0) trip.emplace_back(row_index[p], i, value[p]);
        }
      }
    }
    SpMat b(m, m);
    b.setFromTriplets(trip.begin(), trip.end());
    b.makeCompressed();
    lu.analyzePattern(b);
    lu.factorize(b);
    if (lu.info() != Eigen::Success) return false;
    factored = true;
    return true;
  }

  void ftran(std::vector<double>& v) const {
    if (m == 0) return;
    Eigen::Map<Eigen::VectorXd> rhs(v.data(), m);
    Eigen::VectorXd sol = lu.solve(rhs);
    for (int i = 0; i < m; ++i) v[i] = sol[i];
    for (const Eta& e : etas) {
      double xr = v[e.row] / e.pivot;
      v[e.row] = xr;
      if (xr == 0.0) continue;
      for (std::size_t k = 0; k < e.index.size(); ++k) v[e.index[k]] -= e.value[k] * xr;
    }
  }

  void btran(std::vector<double>& w) const {
    if (m == 0) return;
    for (auto it = etas.rbegin(); it != etas.rend(); ++it) {
      const Eta& e = *it;
      double acc = w[e.row];
      for (std::size_t k = 0; k < e.index.size(); ++k) acc -= e.value[k] * w[e.index[k]];
      w[e.row] = acc / e.pivot;
    }
    Eigen::Map<Eigen::VectorXd> rhs(w.data(), m);
    Eigen::VectorXd sol = lu.transpose().solve(rhs);
    for (int i = 0; i < m; ++i) w[i] = sol[i];
  }

  // Dense copy of column j of [A, -I].
  void column(int j, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    if (j >= n) {
      out[j - n] = -1.0;
      return;
    }
    for (int p = col_start[j]; p < col_start[j + 1]; ++p) out[row_index[p]] += value[p];
  }

  double dot_column(int j, const std::vector<double>& y) const {
    if (j >= n) return -y[j - n];
    double s = 0.0;
    for (int p = col_start[j]; p < col_start[j + 1]; ++p) s += value[p] * y[row_index[p]];
    return s;
  }

  void recompute_basic() {
    if (m == 0) return;
    std::vector<double> rhs(m, 0.0);
    for (int j = 0; j < n + m; ++j) {
      if (status[j] == BasisStatus::kBasic || x[j] == 0.0) continue;
      if (j >= n) {
        rhs[j - n] += x[j];
      } else {
        for (int p = col_start[j]; p < col_start[j + 1]; ++p) {
          rhs[row_index[p]] -= value[p] * x[j];
        }
      }
    }
    ftran(rhs);
    for (int i = 0; i < m; ++i) x[head[i]] = rhs[i];
  }

  double ptol(double bound) const { return opts.primal_tol * (1.0 + std::abs(bound)); }

  bool below(int j) const { return x[j] < lo[j] - ptol(lo[j]); }
  bool above(int j) const { return x[j] > up[j] + ptol(up[j]); }

  void ensure_factored() {
    if (factored) return;
    if (!refactor()) {
      // Numerically singular warm start; fall back to the slack basis.
      reset_basis();
      refactor();
    }
  }

  // Widens every bound that is not a fixed structural by a small
  // index-dependent amount. Anything feasible before stays feasible, so an
  // infeasible verdict carries over to the original bounds.
  void perturb() {
    lo_saved = lo;
    up_saved = up;
    for (int j = 0; j < n + m; ++j) {
      if (j < n && lo[j] == up[j]) continue;
      // Knuth multiplicative hash for a deterministic spread in [0.5, 1).
      const double u = 0.5 + 0.5 * static_cast<double>((static_cast<std::uint32_t>(j) * 2654435761U) >> 8) / 16777216.0;
      if (std::isfinite(lo[j])) lo[j] -= 1e-6 * u * (1.0 + std::abs(lo[j]));
      if (std::isfinite(up[j])) up[j] += 1e-6 * u * (1.0 + std::abs(up[j]));
    }
    for (int j = 0; j < n + m; ++j) {
      if (status[j] == BasisStatus::kAtLower) x[j] = lo[j];
      if (status[j] == BasisStatus::kAtUpper) x[j] = up[j];
    }
    recompute_basic();
  }

  void unperturb() {
    lo = std::move(lo_saved);
    up = std::move(up_saved);
    lo_saved.clear();
    up_saved.clear();
    place_nonbasic();
    recompute_basic();
  }

  bool perturbed() const { return !lo_saved.empty(); }

  LpResult solve() {
    LpResult res = solve_inner();
    if (perturbed()) unperturb();
    return res;
  }

  LpResult solve_inner() {
    LpResult res;
    const std::int64_t max_it =
        opts.max_iterations >= 0 ? opts.max_iterations : 20LL * (n + m) + 1000;
    place_nonbasic();
    ensure_factored();
    recompute_basic();

    std::vector<double> cb(m), y(m), alpha(m);
    // Candidates whose priced reduced cost did not survive the check against
    // the updated column; cleared whenever y changes.
    std::vector<char> rejected(n + m, 0);
    bool any_rejected = false;
    auto clear_rejected = [&] {
      if (any_rejected) std::fill(rejected.begin(), rejected.end(), 0);
      any_rejected = false;
    };
    bool perturbation_used = false;
    int degenerate_run = 0;
    int recheck = 0;
    std::int64_t it = 0;
    while (true) {
      if (static_cast<int>(etas.size()) >= opts.refactor_interval) {
        if (!refactor()) {
          reset_basis();
          place_nonbasic();
          refactor();
        }
        recompute_basic();
        clear_rejected();
      }
      if (!perturbation_used && degenerate_run > opts.bland_after) {
        perturb();
        perturbation_used = true;
        degenerate_run = 0;
        clear_rejected();
      }

      bool infeasible = false;
      for (int i = 0; i < m; ++i) {
        int j = head[i];
        if (below(j)) {
          cb[i] = -1.0;
          infeasible = true;
        } else if (above(j)) {
          cb[i] = 1.0;
          infeasible = true;
        } else {
          cb[i] = 0.0;
        }
      }
      const bool phase1 = infeasible;
      if (!phase1) {
        for (int i = 0; i < m; ++i) cb[i] = head[i] < n ? cost[head[i]] : 0.0;
      }
      y = cb;
      btran(y);

      const bool bland = perturbation_used && !perturbed() && degenerate_run > opts.bland_after;
      int q = -1;
      double dq = 0.0;
      double best = 0.0;
      for (int j = 0; j < n + m; ++j) {
        BasisStatus s = status[j];
        if (s == BasisStatus::kBasic || lo[j] == up[j] || rejected[j]) continue;
        double cj = (phase1 || j >= n) ? 0.0 : cost[j];
        double d = cj - dot_column(j, y);
        bool eligible = (s == BasisStatus::kAtLower && d < -opts.dual_tol) ||
                        (s == BasisStatus::kAtUpper && d > opts.dual_tol) ||
                        (s == BasisStatus::kAtZero && std::abs(d) > opts.dual_tol);
        if (!eligible) continue;
        if (bland) {
          q = j;
          dq = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dq = d;
        }
      }

      if (q < 0) {
        // Guard against drift in the incrementally updated values.
        if (recheck < 2 && !etas.empty()) {
          ++recheck;
          if (refactor()) {
            recompute_basic();
            clear_rejected();
            continue;
          }
        }
        if (perturbed() && !phase1) {
          // Optimal for the widened bounds; clean up on the original ones.
          unperturb();
          recheck = 0;
          degenerate_run = 0;
          clear_rejected();
          continue;
        }
        if (perturbed()) unperturb();
        if (phase1) {
          res.status = SolveStatus::kInfeasible;
          for (int i = 0; i < m; ++i) {
            int j = head[i];
            if (j >= n && (below(j) || above(j))) res.infeasible_rows.push_back(j - n);
          }
          std::sort(res.infeasible_rows.begin(), res.infeasible_rows.end());
        } else {
          res.status = SolveStatus::kOptimal;
        }
        break;
      }
      if (it >= max_it) {
        res.status = SolveStatus::kNodeLimit;
        break;
      }
      ++it;

      column(q, alpha);
      ftran(alpha);
      {
        // y comes from btran and alpha from ftran; after many eta updates
        // they can disagree. Recompute the reduced cost from alpha.
        double check = (phase1 || q >= n) ? 0.0 : cost[q];
        for (int i = 0; i < m; ++i) check -= cb[i] * alpha[i];
        if (!(check * dq > 0.0 && std::abs(check) > opts.dual_tol)) {
          rejected[q] = 1;
          any_rejected = true;
          continue;
        }
      }
      const double dir = dq < 0.0 ? 1.0 : -1.0;

      // Harris two-pass ratio test.
      double theta_max = kInf;
      for (int i = 0; i < m; ++i) {
        double a = alpha[i];
        if (std::abs(a) < opts.pivot_tol) continue;
        double delta = -dir * a;
        int j = head[i];
        double r = kInf;
        if (phase1 && below(j)) {
          if (delta > 0.0) r = (lo[j] - x[j] + ptol(lo[j])) / delta;
        } else if (phase1 && above(j)) {
          if (delta < 0.0) r = (x[j] - up[j] + ptol(up[j])) / -delta;
        } else if (delta < 0.0) {
          if (std::isfinite(lo[j])) r = (x[j] - lo[j] + ptol(lo[j])) / -delta;
        } else if (std::isfinite(up[j])) {
          r = (up[j] - x[j] + ptol(up[j])) / delta;
        }
        theta_max = std::min(theta_max, r);
      }
      const double own_range = up[q] - lo[q];
      // Bland's rule needs the exact minimum ratio; Harris' relaxed bound
      // would let it cycle.
      double limit = theta_max;
      if (bland && std::isfinite(theta_max)) {
        double exact = kInf;
        for (int i = 0; i < m; ++i) {
          double a = alpha[i];
          if (std::abs(a) < opts.pivot_tol) continue;
          double delta = -dir * a;
          int j = head[i];
          double r = kInf;
          if (phase1 && below(j)) {
            if (delta > 0.0) r = (lo[j] - x[j]) / delta;
          } else if (phase1 && above(j)) {
            if (delta < 0.0) r = (x[j] - up[j]) / -delta;
          } else if (delta < 0.0) {
            if (std::isfinite(lo[j])) r = (x[j] - lo[j]) / -delta;
          } else if (std::isfinite(up[j])) {
            r = (up[j] - x[j]) / delta;
          }
          exact = std::min(exact, std::max(r, 0.0));
        }
        limit = exact + 1e-12;
      }

      int leave = -1;
      double theta = kInf;
      bool leave_to_lower = false;
      if (std::isfinite(theta_max)) {
        double best_piv = 0.0;
        for (int i = 0; i < m; ++i) {
          double a = alpha[i];
          if (std::abs(a) < opts.pivot_tol) continue;
          double delta = -dir * a;
          int j = head[i];
          double r = kInf;
          bool to_lower = false;
          if (phase1 && below(j)) {
            if (delta > 0.0) {
              r = (lo[j] - x[j]) / delta;
              to_lower = true;
            }
          } else if (phase1 && above(j)) {
            if (delta < 0.0) r = (x[j] - up[j]) / -delta;
          } else if (delta < 0.0) {
            if (std::isfinite(lo[j])) {
              r = (x[j] - lo[j]) / -delta;
              to_lower = true;
            }
          } else if (std::isfinite(up[j])) {
            r = (up[j] - x[j]) / delta;
          }
          if (r > limit) continue;
          bool better = bland ? (leave < 0 || head[i] < head[leave])
                              : std::abs(a) > best_piv;
          if (better) {
            best_piv = std::abs(a);
            leave = i;
            theta = std::max(r, 0.0);
            leave_to_lower = to_lower;
          }
        }
      }

      if (std::isfinite(own_range) && own_range <= theta) {
        // Bound flip of the entering variable, basis unchanged.
        theta = own_range;
        leave = -1;
      } else if (leave < 0) {
        if (phase1) {
          // The phase-1 objective is bounded, so a ray here is round-off.
          rejected[q] = 1;
          any_rejected = true;
          continue;
        }
        res.status = SolveStatus::kUnbounded;
        break;
      }

      clear_rejected();
      degenerate_run = theta < 1e-12 ? degenerate_run + 1 : 0;
      if (theta > 0.0) {
        x[q] += dir * theta;
        for (int i = 0; i < m; ++i) {
          if (alpha[i] != 0.0) x[head[i]] -= dir * theta * alpha[i];
        }
      }

      if (leave < 0) {
        status[q] = status[q] == BasisStatus::kAtLower ? BasisStatus::kAtUpper
                                                       : BasisStatus::kAtLower;
        x[q] = status[q] == BasisStatus::kAtLower ? lo[q] : up[q];
        continue;
      }

      int jl = head[leave];
      status[jl] = leave_to_lower ? BasisStatus::kAtLower : BasisStatus::kAtUpper;
      x[jl] = leave_to_lower ? lo[jl] : up[jl];
      status[q] = BasisStatus::kBasic;
      head[leave] = q;

      Eta eta;
      eta.row = leave;
      eta.pivot = alpha[leave];
      for (int i = 0; i < m; ++i) {
        if (i != leave && alpha[i] != 0.0) {
          eta.index.push_back(i);
          eta.value.push_back(alpha[i]);
        }
      }
      etas.push_back(std::move(eta));
    }

    res.iterations = it;
    res.x.assign(x.begin(), x.begin() + n);
    if (res.status == SolveStatus::kOptimal) {
      double obj = 0.0;
      for (int j = 0; j < n; ++j) obj += orig_cost[j] * res.x[j];
      res.objective = obj;
    }
    return res;
  }
};

SimplexSolver::SimplexSolver(const MipProblem& m, SimplexOptions opts)
    : impl_(std::make_unique<Impl>(m, opts)) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

int SimplexSolver::num_structural() const { return impl_->n; }
int SimplexSolver::num_rows() const { return impl_->m; }

void SimplexSolver::set_bounds(int j, double lower, double upper) {
  impl_->lo[j] = lower;
  impl_->up[j] = upper;
}
double SimplexSolver::lower(int j) const { return impl_->lo[j]; }
double SimplexSolver::upper(int j) const { return impl_->up[j]; }

LpResult SimplexSolver::solve() { return impl_->solve(); }

LpBasis SimplexSolver::basis() const { return {impl_->head, impl_->status}; }

void SimplexSolver::set_basis(const LpBasis& basis) {
  if (static_cast<int>(basis.head.size()) != impl_->m ||
      static_cast<int>(basis.status.size()) != impl_->n + impl_->m) {
    throw Error(ErrorCode::kShapeMismatch, "basis does not match the problem size");
  }
  impl_->head = basis.head;
  impl_->status = basis.status;
  impl_->factored = false;
}

void SimplexSolver::reset_basis() { impl_->reset_basis(); }

MipSolution solve_lp(const MipProblem& m) {
  auto start = std::chrono::steady_clock::now();
  SimplexSolver solver(m);
  LpResult r = solver.solve();
  MipSolution sol;
  sol.lp_iterations = r.iterations;
  sol.status = r.status;
  if (r.status == SolveStatus::kOptimal) {
    sol.values = std::move(r.x);
    sol.objective = r.objective + m.objective_offset();
    sol.bound = sol.objective;
  }
  sol.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace ucplns
