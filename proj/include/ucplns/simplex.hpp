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
#include <memory>
#include <vector>

#include "ucplns/mip.hpp"

namespace ucplns {

enum class BasisStatus : std::uint8_t { kBasic, kAtLower, kAtUpper, kAtZero };

// Simplex basis over structural columns [0, n) and row logicals [n, n + m).
struct LpBasis {
  std::vector<int> head;
  std::vector<BasisStatus> status;

  bool empty() const { return head.empty() && status.empty(); }
};

struct LpResult {
  // kOptimal, kInfeasible, kUnbounded, or kNodeLimit when the iteration cap hit.
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> x;
  double objective = kInf;
  std::int64_t iterations = 0;
  // Rows whose logical variable is still out of bounds at the end of phase 1.
  std::vector<int> infeasible_rows;
};

struct SimplexOptions {
  std::int64_t max_iterations = -1;  // -1: 20 * (n + m) + 1000
  int refactor_interval = 64;
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  // Consecutive degenerate pivots before switching to Bland's rule.
  int bland_after = 50;
};

// Bounded-variable primal simplex over the continuous relaxation of a
// MipProblem (binaries relaxed to their bounds). Rows are scaled by their
// largest absolute coefficient and the basis is kept as a sparse LU
// factorization followed by product-form eta updates.
//
// The solver keeps its basis between calls, so changing bounds and calling
// solve() again warm-starts from the previous optimum.
class SimplexSolver {
 public:
  explicit SimplexSolver(const MipProblem& m, SimplexOptions opts = {});
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  int num_structural() const;
  int num_rows() const;

  void set_bounds(int j, double lower, double upper);
  double lower(int j) const;
  double upper(int j) const;

  LpResult solve();

  LpBasis basis() const;
  void set_basis(const LpBasis& basis);
  void reset_basis();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Solves the LP relaxation of `m` from a slack basis.
MipSolution solve_lp(const MipProblem& m);

}  // namespace ucplns
