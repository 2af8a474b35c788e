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

#include "ucplns/ucp_model.hpp"

namespace ucplns {

// Small random instance with t_on, t_off in [1, 3] and t_cold in [0, 2].
// Startup/shutdown ramps satisfy ramp_start <= ramp_up + p_min (same for
// shutdown), under which both formulations describe the same schedules.
// Not every seed gives a satisfiable instance.
UcpInstance make_random_instance(std::uint64_t seed, int units, int periods);

}  // namespace ucplns
