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

#include <string>
#include <string_view>

#include "ucplns/mip.hpp"

namespace ucplns {

// MPS text with the usual section layout. Fields are whitespace separated
// and values printed with 17 significant digits so that a round trip is
// exact. Binaries sit between INTORG/INTEND markers. Row and column order
// equals the model order, names come from tags.
std::string export_mps(const MipProblem& m, std::string_view name = "UCP");

// Parses what export_mps writes (and plain free-format MPS in general). Tags
// are recovered from names where possible. Throws MalformedInput.
MipProblem import_mps(std::string_view text);

// Writes <workdir>/model.mps, runs  with "{mps}" and "{sol}"
// replaced by the two paths, then reads "name value" lines from the solution
// file. A line "objective <v>" is accepted and ignored. Variables missing
// from the file raise IncompleteSolution.
MipSolution solve_external(const MipProblem& m, const std::string& command,
                           const std::string& workdir);

}  // namespace ucplns
