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

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "ucplns/instance_gen.hpp"
#include "ucplns/mip.hpp"
#include "ucplns/simplex.hpp"
#include "ucplns/ucp_model.hpp"

namespace fixtures {

// Instance with unit g of the result equal to unit perm[g] of the input.
inline ucplns::UcpInstance permute_units(const ucplns::UcpInstance& inst, const std::vector<int>& perm) {
  ucplns::UcpInstance out = inst;
  for (std::size_t g = 0; g < perm.size(); ++g) out.units[g] = inst.units[perm[g]];
  return out;
}

// Carries a solution of `from` over to `to` by matching variable tags, with
// units relabeled through perm (to-unit g is from-unit perm[g]).
inline std::vector<double> permute_solution(const ucplns::MipProblem& from, const ucplns::MipProblem& to,
                                            const std::vector<double>& x, const std::vector<int>& perm) {
  std::vector<int> inverse(perm.size());
  for (std::size_t g = 0; g < perm.size(); ++g) inverse[perm[g]] = static_cast<int>(g);
  std::vector<double> out(to.num_variables(), std::nan(""));
  for (int j = 0; j < from.num_variables(); ++j) {
    ucplns::VarTag tag = from.variable(j).tag;
    tag.unit = inverse[tag.unit];
    for (int k = 0; k < to.num_variables(); ++k) {
      if (to.variable(k).tag == tag) {
        out[k] = x[j];
        break;
      }
    }
  }
  return out;
}

// First satisfiable random instance at or after seed; seed is advanced past it.
inline ucplns::UcpInstance satisfiable(std::uint64_t& seed, int units, int periods,
                                       double* optimum = nullptr) {
  for (;; ++seed) {
    auto inst = ucplns::make_random_instance(seed, units, periods);
    auto ref = oracle::enumerate(inst);
    if (std::isfinite(ref.objective)) {
      if (optimum) *optimum = ref.objective;
      ++seed;
      return inst;
    }
  }
}

// First random instance at or after seed whose LP relaxation is feasible.
inline ucplns::UcpInstance lp_feasible(std::uint64_t seed, int units, int periods,
                                       ucplns::Formulation form = ucplns::Formulation::kOneBin) {
  for (;; ++seed) {
    auto inst = ucplns::make_random_instance(seed, units, periods);
    if (ucplns::solve_lp(ucplns::build_mip(inst, form)).status == ucplns::SolveStatus::kOptimal) return inst;
  }
}

}  // namespace fixtures
