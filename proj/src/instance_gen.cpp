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
#include "ucplns/instance_gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ucplns {

UcpInstance make_random_instance(std::uint64_t seed, int units, int periods) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  // Round to two decimals so instance files stay readable.
  auto r2 = [](double v) { return std::round(v * 100.0) / 100.0; };

  UcpInstance inst;
  inst.horizon = periods;
  double capacity = 0.0;
  for (int g = 0; g < units; ++g) {
    UnitParams u;
    u.p_max = r2(uni(40.0, 160.0));
    u.p_min = r2(u.p_max * uni(0.2, 0.45));
    u.alpha = r2(uni(10.0, 80.0));
    u.beta = r2(uni(12.0, 30.0));
    u.c_hot = r2(uni(20.0, 150.0));
    u.c_cold = r2(u.c_hot * uni(1.2, 2.5));
    u.t_on = pick(1, 3);
    u.t_off = pick(1, 3);
    u.t_cold = pick(0, 2);
    u.ramp_up = r2(u.p_max * uni(0.3, 0.8));
    u.ramp_down = r2(u.p_max * uni(0.3, 0.8));
    u.ramp_start = r2(u.p_min + uni(0.0, 1.0) * u.ramp_up);
    u.ramp_shut = r2(u.p_min + uni(0.0, 1.0) * u.ramp_down);
    u.u0 = pick(0, 1);
    u.t0 = u.u0 ? pick(1, 4) : -pick(1, 4);
    capacity += u.p_max;
    inst.units.push_back(u);
  }
  double level = uni(0.35, 0.7);
  for (int t = 0; t < periods; ++t) {
    level = std::clamp(level + uni(-0.12, 0.12), 0.2, 0.8);
    const double d = r2(level * capacity);
    inst.demand.push_back(d);
    inst.reserve.push_back(r2(0.1 * d));
  }
  return inst;
}

}  // namespace ucplns
