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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ucplns/search.hpp"
#include "ucplns/ucp_model.hpp"

namespace ucplns {

// `copies` replicas of the base unit list; demand and reserve scaled by copies.
UcpInstance generate_system(const UcpInstance& base, int copies);

struct IngestOptions {
  double rho = 0.8;            // peak load as a share of total p_max
  double reserve_ratio = 0.1;  // reserve = ratio * demand
  double jitter = 0.0;         // multiplicative noise half-width, 0 disables
  std::uint64_t seed = 0;
};

struct LoadProfile {
  int day = 0;
  std::string split;  // "train", "validation" or "test"
  std::vector<double> demand;
  std::vector<double> reserve;
};

// 3 -> validation, 7 -> test, anything else -> train (last decimal digit).
std::string_view split_for_day(int day);

// CSV rows "day,load_1,...,load_T"; a non-numeric first row is a header.
// Every row needs inst.horizon loads. Throws MalformedCsv.
std::vector<LoadProfile> ingest_loads_text(std::string_view csv, const UcpInstance& inst,
                                           const IngestOptions& opts = {});
std::vector<LoadProfile> ingest_loads(const std::string& path, const UcpInstance& inst,
                                      const IngestOptions& opts = {});

UcpInstance with_profile(const UcpInstance& inst, const LoadProfile& p);

struct TracePoint {
  double wall_ms = 0.0;
  std::int64_t nodes = 0;
  double objective = kInf;
  double bound = -kInf;
};

struct RunRecord {
  std::string instance;
  std::string method;  // IP-LNS, IP-WS, WS, BnB
  std::vector<TracePoint> trace;
  std::string status;
  double final_objective = kInf;
};

enum class CutAxis : std::uint8_t { kWallMs, kNodes };

struct MetricRow {
  std::string method;
  CutAxis axis = CutAxis::kNodes;
  double cut = 0.0;
  double mean_gap = kInf;
  double median_gap = kInf;
  double best_rate = 0.0;
  double survival = 0.0;
  int instances = 0;
};

inline constexpr double kSurvivalGap = 1e-3;

// Best objective of a record among trace points at or before the cut.
double objective_at(const RunRecord& r, CutAxis axis, double cut);

// Gap (v - v*) / v* per method and cut, the share of instances where the
// method ties the best objective of all methods at that cut, and the share
// with gap <= 1e-3. No solution at a cut counts as an infinite gap. Throws
// MissingReference when an instance has no v*.
std::vector<MetricRow> compute_metrics(const std::vector<RunRecord>& records,
                                       const std::map<std::string, double>& reference, CutAxis axis,
                                       const std::vector<double>& cuts);

// `count` cuts spaced logarithmically from budget / 10^decades to budget.
std::vector<double> log_cuts(double budget, int count, double decades = 2.0);

// Best final objective per instance across records.
std::map<std::string, double> best_known(const std::vector<RunRecord>& records);

enum class PolicySource : std::uint8_t { kLp, kRgcn, kFile, kRandom };
PolicySource parse_policy_source(std::string_view s);
std::string_view to_string(PolicySource p);

struct PipelineConfig {
  Formulation form = Formulation::kOneBin;
  PolicySource policy = PolicySource::kLp;
  std::string weights_path;  // rgcn
  std::string scores_path;   // file
  std::uint64_t seed = 0;
  std::int64_t node_budget = 10000;  // per arm
  double time_limit = kInf;          // per arm, seconds
  LnsConfig lns;
  std::vector<std::string> arms = {"IP-LNS", "IP-WS", "WS", "BnB"};
};

struct Prediction {
  ScoreVector scores;
  Commitment u_star;
  ScoreVector merged;
  double objective = kInf;  // restored commitment
  bool pump_used = false;
  double wall_ms = 0.0;     // predict + restore
};

// Initial scores from the configured source, then heuristic restoration.
Prediction predict_and_restore(const UcpInstance& inst, const MipProblem& m, const PipelineConfig& cfg);

std::vector<RunRecord> run_pipeline(const UcpInstance& inst, const PipelineConfig& cfg,
                                    const std::string& instance_id = "instance");

// One pipeline per instance on up to `jobs` threads; records in input order.
std::vector<RunRecord> run_bench(const std::vector<std::pair<std::string, UcpInstance>>& instances,
                                 const PipelineConfig& cfg, int jobs = 1);

std::string records_to_jsonl(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_jsonl(std::string_view text);
std::string metrics_to_csv(const std::vector<MetricRow>& rows);

// records.jsonl, summary.csv and metrics.csv under dir.
void write_report(const std::string& dir, const std::vector<RunRecord>& records, const std::vector<MetricRow>& rows);

}  // namespace ucplns
