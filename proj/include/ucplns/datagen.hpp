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
#include <string>
#include <vector>

#include "ucplns/branch_and_bound.hpp"
#include "ucplns/grid.hpp"
#include "ucplns/tri_graph.hpp"
#include "ucplns/ucp_model.hpp"

namespace ucplns {

inline constexpr int kDatasetSchemaVersion = 1;

struct PoolEntry {
  Commitment u;
  double objective = kInf;
};

struct CommitmentPools {
  UcpInstance inst;
  Formulation form = Formulation::kOneBin;
  std::vector<PoolEntry> high;
  std::vector<PoolEntry> middle;
  std::vector<PoolEntry> low;
};

struct PoolBudgets {
  int high_max = 10;
  double high_gap = 1e-7;
  double middle_filter = 1e-5;  // relative gap to the mean high objective
  int low_max = 90;
  double low_gap = 1e-2;
  std::int64_t node_limit = 5000;  // per solve
  double time_limit = kInf;        // per solve, seconds
};

// Near-optimal (high), incumbent (middle) and loose-gap (low) commitments,
// each pool deduplicated. The pool search re-solves with no-good cuts on u.
// Throws InstanceInfeasible when the first solve finds nothing.
CommitmentPools collect_pools(const UcpInstance& inst, Formulation form, const PoolBudgets& budgets = {});

struct SampleParams {
  double alpha_p = 0.6;
  double alpha_size = 0.2;
  double alpha_c = 10.0;
  double alpha_n = 0.05;
  std::int64_t node_limit = 5000;  // per neighborhood search
  int max_passes = 40;             // negative-sampling passes per base
  std::uint64_t seed = 0;
};

struct NeighborhoodSample {
  int base = -1;  // index into pools.middle
  NeighborhoodMask mask;
  bool positive = false;
  double improvement = 0.0;
};

struct SkippedBase {
  int base = -1;
  ErrorCode reason = ErrorCode::kNoPositives;
  std::string detail;
};

struct SampleSet {
  std::vector<NeighborhoodSample> samples;
  std::vector<SkippedBase> skipped;
};

// Objective drop from re-optimizing the free entries of `mask` around base,
// warm-started at base, under a node limit. Never negative.
double neighborhood_improvement(const MipProblem& m, const PoolEntry& base, const NeighborhoodMask& mask,
                                std::int64_t node_limit);

// Contrastive samples for every middle commitment. Bases without a usable
// positive are recorded in `skipped` (NoPositives) and produce no samples.
SampleSet gen_samples(const CommitmentPools& pools, const SampleParams& params = {});

// Negatives wanted for a base with `positives` kept positives.
std::size_t negative_target(std::size_t positives, double alpha_c);
// Entries flipped on negative-sampling pass `pass` (pass 0 flips nothing).
std::size_t perturbation_flips(int pass, std::size_t entries);

// Same, for a single base; throws NoPositives.
std::vector<NeighborhoodSample> gen_samples_for(const MipProblem& m, const CommitmentPools& pools, int base,
                                                const SampleParams& params);

// Appends one instance's records to a dataset directory and keeps
// manifest.json in sync. Single writer per directory.
class DatasetWriter {
 public:
  explicit DatasetWriter(std::string dir);

  // Writes the neighborhood records (base graph with incumbent features)
  // and, when the high pool is non-empty, one initial-prediction record (LP
  // features, target = best high commitment). Returns the records written.
  int add(const std::string& instance_name, const CommitmentPools& pools, const std::vector<NeighborhoodSample>& samples);
  void finish();

  int positives() const { return positives_; }
  int negatives() const { return negatives_; }
  int initial() const { return initial_; }

 private:
  std::string dir_;
  int positives_ = 0;
  int negatives_ = 0;
  int initial_ = 0;
  std::vector<std::pair<std::string, std::string>> records_;  // (file, kind)
  std::vector<std::string> instances_;
};

void export_training_set(const std::string& dir, const CommitmentPools& pools,
                         const std::vector<NeighborhoodSample>& samples, const std::string& instance_name = "instance");

struct DatasetRecord {
  std::string kind;  // "neighborhood" or "initial"
  std::string instance;
  TripartiteGraph graph;
  // neighborhood records
  Commitment base;
  NeighborhoodMask mask;
  bool positive = false;
  double improvement = 0.0;
  // initial records
  Commitment target;
};

struct Dataset {
  int positives = 0;
  int negatives = 0;
  int initial = 0;
  std::vector<DatasetRecord> records;
};

// Throws IoFailure or MalformedInput.
Dataset read_dataset(const std::string& dir);

}  // namespace ucplns
