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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "ucplns/datagen.hpp"
#include "ucplns/search.hpp"

namespace ucplns {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ucplns_datagen_" + name);
  fs::remove_all(p);
  return p;
}

// All schedules of a small instance with their costs.
std::vector<std::pair<Commitment, double>> all_feasible(const UcpInstance& inst) {
  const int n = inst.num_units(), horizon = inst.horizon, bits = n * horizon;
  std::vector<std::pair<Commitment, double>> out;
  for (std::uint64_t code = 0; code < (1ULL << bits); ++code) {
    oracle::Schedule s(n, std::vector<int>(horizon));
    for (int k = 0; k < bits; ++k) s[k / horizon][k % horizon] = static_cast<int>((code >> k) & 1U);
    const double c = oracle::schedule_cost(inst, s);
    if (std::isfinite(c)) out.emplace_back(oracle::to_commitment(s), c);
  }
  return out;
}

TEST(CollectPools, UniqueOptimumGivesSingleHighEntry) {
  std::uint64_t seed = 1;
  int checked = 0;
  for (int rep = 0; rep < 30 && checked < 3; ++rep) {
    double opt = 0.0;
    auto inst = fixtures::satisfiable(seed, 2, 4, &opt);
    const auto all = all_feasible(inst);
    int near = 0;
    for (const auto& [u, c] : all) near += c <= opt + 1e-7 * std::max(1.0, opt);
    if (near != 1) continue;
    const auto pools = collect_pools(inst, Formulation::kOneBin);
    ASSERT_EQ(pools.high.size(), 1u);
    EXPECT_EQ(pools.high[0].u, oracle::to_commitment(oracle::enumerate(inst).u));
    EXPECT_NEAR(pools.high[0].objective, opt, 1e-6 * opt);
    ++checked;
  }
  EXPECT_EQ(checked, 3);
}

TEST(CollectPools, HighPoolIsEveryNearOptimalCommitment) {
  std::uint64_t seed = 40;
  for (int rep = 0; rep < 5; ++rep) {
    double opt = 0.0;
    auto inst = fixtures::satisfiable(seed, 2, 4, &opt);
    std::set<std::vector<std::uint8_t>> want;
    for (const auto& [u, c] : all_feasible(inst)) {
      if (c <= opt + 1e-7 * std::max(1.0, opt)) want.insert(u.values());
    }
    for (Formulation form : {Formulation::kOneBin, Formulation::kThreeBin}) {
      const auto pools = collect_pools(inst, form);
      std::set<std::vector<std::uint8_t>> got;
      for (const auto& e : pools.high) got.insert(e.u.values());
      if (want.size() <= 10) {
        EXPECT_EQ(got, want);
      } else {
        EXPECT_EQ(got.size(), 10u);
      }
    }
  }
}

TEST(CollectPools, EveryEntryIsFeasibleAndPoolsAreDeduplicated) {
  std::uint64_t seed = 70;
  for (int rep = 0; rep < 3; ++rep) {
    auto inst = fixtures::satisfiable(seed, 3, 5);
    PoolBudgets b;
    b.low_max = 15;
    const auto pools = collect_pools(inst, Formulation::kOneBin, b);
    ASSERT_FALSE(pools.high.empty());
    double mean = 0.0;
    for (const auto& e : pools.high) mean += e.objective;
    mean /= static_cast<double>(pools.high.size());
    for (const auto* pool : {&pools.high, &pools.middle, &pools.low}) {
      std::set<std::vector<std::uint8_t>> keys;
      for (const auto& e : *pool) {
        const auto ev = evaluate_commitment(inst, Formulation::kOneBin, e.u);
        ASSERT_TRUE(ev.feasible);
        EXPECT_NEAR(ev.objective, e.objective, 1e-6 * std::max(1.0, e.objective));
        EXPECT_TRUE(keys.insert(e.u.values()).second);
      }
    }
    for (const auto& e : pools.middle) EXPECT_GT((e.objective - mean) / std::max(1.0, mean), 1e-5);
    EXPECT_LE(pools.low.size(), 15u);
  }
}

TEST(CollectPools, ZeroLowBudgetLeavesLowEmpty) {
  std::uint64_t seed = 70;
  auto inst = fixtures::satisfiable(seed, 2, 4);
  PoolBudgets b;
  b.low_max = 0;
  const auto pools = collect_pools(inst, Formulation::kOneBin, b);
  EXPECT_TRUE(pools.low.empty());
  EXPECT_FALSE(pools.high.empty());
}

TEST(CollectPools, InfeasibleInstanceThrows) {
  UcpInstance inst;
  inst.horizon = 3;
  UnitParams u;
  u.alpha = 1;
  u.beta = 1;
  u.p_min = 10;
  u.p_max = 100;
  u.ramp_up = u.ramp_down = 5;
  u.ramp_start = u.ramp_shut = 15;
  u.u0 = 1;
  u.t0 = 3;
  inst.units = {u};
  inst.demand = {20, 80, 20};
  inst.reserve = {2, 8, 2};
  try {
    collect_pools(inst, Formulation::kOneBin);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInstanceInfeasible);
  }
}

// Pools over an instance with a forced structure: the middle entry is a
// worse feasible commitment, high holds the optimum.
CommitmentPools hand_pools(std::uint64_t& seed, int n, int horizon) {
  CommitmentPools pools;
  pools.inst = fixtures::satisfiable(seed, n, horizon);
  auto all = all_feasible(pools.inst);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  pools.high.push_back({all.front().first, all.front().second});
  for (std::size_t i = 1; i < all.size(); ++i) {
    const auto d = xor_mask(all[i].first, all.front().first).count_nonzero();
    if (d >= 1 && d <= 0.2 * n * horizon && all[i].second > all.front().second + 1e-6) {
      pools.middle.push_back({all[i].first, all[i].second});
      break;
    }
  }
  for (std::size_t i = all.size(); i-- > 1;) {
    if (pools.low.size() >= 8) break;
    pools.low.push_back({all[i].first, all[i].second});
  }
  return pools;
}

TEST(GenSamples, SinglePositiveIsKept) {
  std::uint64_t seed = 200;
  auto pools = hand_pools(seed, 2, 5);
  while (pools.middle.empty()) pools = hand_pools(seed, 2, 5);
  SampleParams p;
  p.alpha_c = 0.0;
  const auto set = gen_samples(pools, p);
  ASSERT_TRUE(set.skipped.empty());
  ASSERT_EQ(set.samples.size(), 1u);
  EXPECT_TRUE(set.samples[0].positive);
  EXPECT_EQ(set.samples[0].mask, xor_mask(pools.middle[0].u, pools.high[0].u));
  EXPECT_GT(set.samples[0].improvement, 0.0);
}

TEST(GenSamples, IdenticalHighEntryIsDiscarded) {
  std::uint64_t seed = 200;
  auto pools = hand_pools(seed, 2, 5);
  while (pools.middle.empty()) pools = hand_pools(seed, 2, 5);
  // x_hat itself in the high pool gives an empty xor mask.
  pools.high.push_back(pools.middle[0]);
  SampleParams p;
  p.alpha_c = 0.0;
  const auto set = gen_samples(pools, p);
  ASSERT_EQ(set.samples.size(), 1u);
  EXPECT_GT(set.samples[0].mask.count_nonzero(), 0u);
}

TEST(GenSamples, NoPositivesIsSkippedWithRecord) {
  std::uint64_t seed = 200;
  auto pools = hand_pools(seed, 2, 5);
  while (pools.middle.empty()) pools = hand_pools(seed, 2, 5);
  pools.high = {pools.middle[0]};
  const auto set = gen_samples(pools);
  EXPECT_TRUE(set.samples.empty());
  ASSERT_EQ(set.skipped.size(), 1u);
  EXPECT_EQ(set.skipped[0].reason, ErrorCode::kNoPositives);
  const MipProblem m = build_mip(pools.inst, pools.form);
  try {
    gen_samples_for(m, pools, 0, SampleParams{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoPositives);
  }
}

TEST(GenSamples, LabelsAreSoundAndDeterministic) {
  std::uint64_t seed = 300;
  int total_neg = 0;
  for (int rep = 0; rep < 3; ++rep) {
    auto inst = fixtures::satisfiable(seed, 3, 5);
    PoolBudgets b;
    b.low_max = 12;
    const auto pools = collect_pools(inst, Formulation::kOneBin, b);
    SampleParams p;
    p.alpha_size = 0.5;
    p.max_passes = 6;
    p.seed = 9;
    const auto set = gen_samples(pools, p);
    const auto again = gen_samples(pools, p);
    ASSERT_EQ(set.samples.size(), again.samples.size());
    const MipProblem m = build_mip(inst, Formulation::kOneBin);
    std::map<int, double> best;
    std::map<int, int> pos, neg;
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
      const auto& s = set.samples[i];
      EXPECT_EQ(s.mask, again.samples[i].mask);
      EXPECT_EQ(s.positive, again.samples[i].positive);
      EXPECT_GE(s.mask.count_nonzero(), 1u);
      const double imp = neighborhood_improvement(m, pools.middle[s.base], s.mask, p.node_limit);
      EXPECT_NEAR(imp, s.improvement, 1e-9 * std::max(1.0, imp));
      if (s.positive) {
        best[s.base] = std::max(best[s.base], s.improvement);
        EXPECT_LE(static_cast<double>(s.mask.count_nonzero()), p.alpha_size * 15 + 1e-9);
        ++pos[s.base];
      } else {
        ++neg[s.base];
      }
    }
    for (const auto& s : set.samples) {
      if (s.positive) {
        EXPECT_GE(s.improvement, p.alpha_p * best[s.base] - 1e-12);
      } else {
        EXPECT_LE(s.improvement, p.alpha_n * best[s.base] + 1e-12);
      }
    }
    for (const auto& [b, count] : neg) {
      EXPECT_LE(count, static_cast<int>(std::ceil(p.alpha_c * pos[b])));
      total_neg += count;
    }
  }
  EXPECT_GT(total_neg, 0);
}

TEST(GenSamples, NegativeTargetIsTenPerPositive) {
  std::uint64_t seed = 400;
  auto pools = hand_pools(seed, 2, 5);
  while (pools.middle.empty()) pools = hand_pools(seed, 2, 5);
  // Plenty of low entries so the target is reachable.
  const auto all = all_feasible(pools.inst);
  pools.low.clear();
  for (const auto& [u, c] : all) pools.low.push_back({u, c});
  SampleParams p;
  p.max_passes = 30;
  const auto set = gen_samples(pools, p);
  int pos = 0, neg = 0;
  for (const auto& s : set.samples) (s.positive ? pos : neg) += 1;
  ASSERT_GE(pos, 1);
  EXPECT_LE(neg, 10 * pos);
}

TEST(GenSamples, NegativeScheduleConstants) {
  EXPECT_EQ(negative_target(2, SampleParams{}.alpha_c), 20U);
  EXPECT_EQ(negative_target(0, 10.0), 0U);
  EXPECT_EQ(negative_target(3, 0.5), 2U);
  EXPECT_EQ(perturbation_flips(0, 100), 0U);
  EXPECT_EQ(perturbation_flips(1, 100), 5U);
  EXPECT_EQ(perturbation_flips(2, 100), 10U);
  EXPECT_EQ(perturbation_flips(20, 100), 100U);
  EXPECT_EQ(perturbation_flips(35, 100), 100U);
  EXPECT_EQ(perturbation_flips(1, 6), 1U);  // at least one entry once perturbing
}

TEST(Dataset, EmptyExportHasZeroCountsAndNoRecords) {
  const fs::path dir = scratch("empty");
  CommitmentPools pools;
  export_training_set(dir.string(), pools, {});
  const auto ds = read_dataset(dir.string());
  EXPECT_EQ(ds.positives, 0);
  EXPECT_EQ(ds.negatives, 0);
  EXPECT_EQ(ds.initial, 0);
  EXPECT_TRUE(ds.records.empty());
  EXPECT_TRUE(fs::is_empty(dir / "records"));
  fs::remove_all(dir);
}

TEST(Dataset, RoundTripAndCounts) {
  const fs::path dir = scratch("roundtrip");
  std::uint64_t seed = 300;
  auto inst = fixtures::satisfiable(seed, 3, 5);
  PoolBudgets b;
  b.low_max = 12;
  const auto pools = collect_pools(inst, Formulation::kOneBin, b);
  SampleParams p;
  p.alpha_size = 0.5;
  p.max_passes = 4;
  const auto set = gen_samples(pools, p);
  int pos = 0, neg = 0;
  for (const auto& s : set.samples) (s.positive ? pos : neg) += 1;

  DatasetWriter w(dir.string());
  w.add("a", pools, set.samples);
  w.finish();
  // A second writer appends to the same manifest.
  DatasetWriter w2(dir.string());
  w2.add("b", pools, set.samples);
  w2.finish();

  const auto ds = read_dataset(dir.string());
  EXPECT_EQ(ds.positives, 2 * pos);
  EXPECT_EQ(ds.negatives, 2 * neg);
  EXPECT_EQ(ds.initial, 2);
  ASSERT_EQ(ds.records.size(), 2 * set.samples.size() + 2);

  const MipProblem m = build_mip(inst, Formulation::kOneBin);
  const auto graph = encode(m);
  std::size_t k = 0;
  for (const auto& s : set.samples) {
    const auto& r = ds.records[k++];
    EXPECT_EQ(r.kind, "neighborhood");
    EXPECT_EQ(r.instance, "a");
    EXPECT_EQ(r.mask, s.mask);
    EXPECT_EQ(r.positive, s.positive);
    EXPECT_DOUBLE_EQ(r.improvement, s.improvement);
    EXPECT_EQ(r.base, pools.middle[s.base].u);
    const auto sol = commitment_solution(m, pools.middle[s.base].u);
    EXPECT_EQ(r.graph, attach_solution_features(graph, sol.values, SolutionMode::kIncumbent));
  }
  EXPECT_EQ(ds.records[k].kind, "initial");
  EXPECT_EQ(ds.records[k].target, pools.high[0].u);
  EXPECT_EQ(ds.records[k].graph.con_nodes, graph.con_nodes);
  fs::remove_all(dir);
}

TEST(Dataset, CorruptManifestIsRejected) {
  const fs::path dir = scratch("corrupt");
  fs::create_directories(dir);
  std::ofstream(dir / "manifest.json") << "{\"schema_version\": 1, \"counts\": {\"positive\": 3, "
                                          "\"negative\": 0, \"initial\": 0}, \"records\": []}";
  EXPECT_THROW(read_dataset(dir.string()), Error);
  EXPECT_THROW(read_dataset((dir / "missing").string()), Error);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace ucplns
