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

#include "ucplns/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ucplns/search.hpp"
#include "ucplns/simplex.hpp"

namespace ucplns {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Key = std::vector<std::uint8_t>;

class Pool {
 public:
  explicit Pool(std::vector<PoolEntry>& out) : out_(out) {}
  bool contains(const Commitment& u) const { return keys_.count(u.values()) != 0; }
  bool add(const Commitment& u, double objective) {
    if (!keys_.insert(u.values()).second) return false;
    out_.push_back({u, objective});
    return true;
  }

 private:
  std::vector<PoolEntry>& out_;
  std::set<Key> keys_;
};

// sum_{c=0} u - sum_{c=1} u >= 1 - |c|: at least one entry differs from c.
void add_no_good(MipProblem& m, const Commitment& c) {
  Constraint row;
  double ones = 0.0;
  for (int g = 0; g < c.units(); ++g) {
    for (int t = 0; t < c.periods(); ++t) {
      row.index.push_back(m.u_index(g, t));
      row.coef.push_back(c(g, t) ? -1.0 : 1.0);
      ones += c(g, t);
    }
  }
  row.sense = Sense::kGreaterEqual;
  row.rhs = 1.0 - ones;
  row.name = "nogood_" + std::to_string(m.num_constraints());
  m.add_constraint(std::move(row));
}

struct Observed {
  Commitment u;
  double objective;
};

MipSolution pool_solve(const MipProblem& m, const PoolBudgets& b, double gap, std::vector<Observed>& seen) {
  MipLimits lim;
  lim.gap = gap;
  lim.node_limit = b.node_limit;
  lim.time_limit = b.time_limit;
  return solve_mip(m, lim, std::nullopt, [&](const IncumbentEvent& e) {
    seen.push_back({extract_commitment(m, e.values), e.objective});
  });
}

bool within(double value, double ref, double rel) {
  return value <= ref + rel * std::max(1.0, std::abs(ref));
}

json grid_json(const Commitment& c) {
  json rows = json::array();
  for (int g = 0; g < c.units(); ++g) {
    json r = json::array();
    for (int t = 0; t < c.periods(); ++t) r.push_back(static_cast<int>(c(g, t)));
    rows.push_back(std::move(r));
  }
  return rows;
}

json grid_json(const NeighborhoodMask& mask) {
  return grid_json(Commitment(mask.units(), mask.periods(), mask.values()));
}

Commitment grid_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw Error(ErrorCode::kMalformedInput, what + " must be a nested array");
  }
  const int n = static_cast<int>(j.size()), horizon = static_cast<int>(j[0].size());
  Commitment c(n, horizon);
  for (int g = 0; g < n; ++g) {
    if (!j[g].is_array() || static_cast<int>(j[g].size()) != horizon) {
      throw Error(ErrorCode::kMalformedInput, what + " rows differ in length");
    }
    for (int t = 0; t < horizon; ++t) {
      const int v = j[g][t].get<int>();
      if (v != 0 && v != 1) throw Error(ErrorCode::kMalformedInput, what + " entries must be 0 or 1");
      c(g, t) = static_cast<std::uint8_t>(v);
    }
  }
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, path.string() + ": " + e.what());
  }
}

}  // namespace

std::size_t negative_target(std::size_t positives, double alpha_c) {
  return static_cast<std::size_t>(std::ceil(alpha_c * static_cast<double>(positives) - 1e-9));
}

std::size_t perturbation_flips(int pass, std::size_t entries) {
  if (pass <= 0 || entries == 0) return 0;
  const double share = std::min(1.0, 0.05 * pass);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(share * static_cast<double>(entries))));
}

CommitmentPools collect_pools(const UcpInstance& inst, Formulation form, const PoolBudgets& budgets) {
  CommitmentPools pools;
  pools.inst = inst;
  pools.form = form;
  MipProblem m = build_mip(inst, form);

  std::vector<Observed> incumbents;
  const MipSolution first = pool_solve(m, budgets, budgets.high_gap, incumbents);
  if (!first.has_solution()) {
    throw Error(ErrorCode::kInstanceInfeasible, first.status == SolveStatus::kInfeasible
                                                    ? "the model has no feasible commitment"
                                                    : "no feasible commitment within the node budget");
  }
  Pool high(pools.high);
  const double best = first.objective;
  Commitment last = extract_commitment(m, first.values);
  if (budgets.high_max > 0) high.add(last, first.objective);

  MipProblem cut = m;
  while (static_cast<int>(pools.high.size()) < budgets.high_max) {
    add_no_good(cut, last);
    const MipSolution s = pool_solve(cut, budgets, budgets.high_gap, incumbents);
    if (!s.has_solution()) break;
    last = extract_commitment(cut, s.values);
    if (!within(s.objective, best, budgets.high_gap)) break;
    high.add(last, s.objective);
  }

  double mean = 0.0;
  for (const auto& e : pools.high) mean += e.objective;
  mean = pools.high.empty() ? best : mean / static_cast<double>(pools.high.size());
  Pool middle(pools.middle);
  for (const auto& o : incumbents) {
    if (high.contains(o.u)) continue;
    if ((o.objective - mean) / std::max(1.0, std::abs(mean)) > budgets.middle_filter) middle.add(o.u, o.objective);
  }

  Pool low(pools.low);
  MipProblem loose = m;
  for (const auto& e : pools.high) add_no_good(loose, e.u);
  while (static_cast<int>(pools.low.size()) < budgets.low_max) {
    std::vector<Observed> found;
    const MipSolution s = pool_solve(loose, budgets, budgets.low_gap, found);
    if (!s.has_solution()) break;
    found.push_back({extract_commitment(loose, s.values), s.objective});
    bool grew = false;
    for (const auto& o : found) {
      if (static_cast<int>(pools.low.size()) >= budgets.low_max) break;
      if (high.contains(o.u)) continue;
      if (low.add(o.u, o.objective)) {
        add_no_good(loose, o.u);
        grew = true;
      }
    }
    if (!grew) break;
  }
  return pools;
}

double neighborhood_improvement(const MipProblem& m, const PoolEntry& base, const NeighborhoodMask& mask,
                                std::int64_t node_limit) {
  const MipSolution start = commitment_solution(m, base.u);
  if (!start.has_solution()) {
    throw Error(ErrorCode::kIncompleteSolution, "base commitment is infeasible for the model");
  }
  const MipProblem sub = fix_and_sub(m, base.u, mask);
  MipLimits lim;
  lim.node_limit = node_limit;
  const MipSolution s = solve_mip(sub, lim, start_from_commitment(sub, base.u));
  if (!s.has_solution()) return 0.0;
  return std::max(0.0, start.objective - s.objective);
}

std::vector<NeighborhoodSample> gen_samples_for(const MipProblem& m, const CommitmentPools& pools, int base,
                                                const SampleParams& params) {
  const PoolEntry& x = pools.middle.at(base);
  const double size_cap = params.alpha_size * static_cast<double>(x.u.size());
  std::set<Key> seen;

  std::vector<NeighborhoodSample> positives;
  double best = 0.0;
  for (const auto& p : pools.high) {
    NeighborhoodMask mask = xor_mask(x.u, p.u);
    const auto size = mask.count_nonzero();
    if (size == 0 || static_cast<double>(size) > size_cap + 1e-9) continue;
    if (!seen.insert(mask.values()).second) continue;
    NeighborhoodSample s;
    s.base = base;
    s.mask = std::move(mask);
    s.positive = true;
    s.improvement = neighborhood_improvement(m, x, s.mask, params.node_limit);
    best = std::max(best, s.improvement);
    positives.push_back(std::move(s));
  }
  if (positives.empty() || best <= 1e-9 * std::max(1.0, std::abs(x.objective))) {
    throw Error(ErrorCode::kNoPositives, "middle commitment " + std::to_string(base) +
                                             (positives.empty() ? ": no high commitment within the size bound"
                                                                : ": no candidate improves the objective"));
  }
  std::erase_if(positives, [&](const NeighborhoodSample& s) { return s.improvement < params.alpha_p * best; });

  std::vector<NeighborhoodSample> out = positives;
  const std::size_t wanted = negative_target(positives.size(), params.alpha_c);
  std::size_t negatives = 0;
  std::mt19937_64 rng(params.seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(base) + 1)));
  const std::size_t total = x.u.size();
  std::vector<std::size_t> order(total);
  for (int pass = 0; pass < params.max_passes && negatives < wanted && !pools.low.empty(); ++pass) {
    const std::size_t flips = perturbation_flips(pass, total);
    for (const auto& n : pools.low) {
      if (negatives >= wanted) break;
      NeighborhoodMask mask = xor_mask(x.u, n.u);
      if (flips > 0) {
        // Partial Fisher-Yates: the first `flips` entries are a uniform sample.
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = 0; i < flips; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, total - 1);
          std::swap(order[i], order[pick(rng)]);
          mask[order[i]] ^= 1;
        }
      }
      if (mask.count_nonzero() == 0 || !seen.insert(mask.values()).second) continue;
      const double imp = neighborhood_improvement(m, x, mask, params.node_limit);
      if (imp > params.alpha_n * best) continue;
      NeighborhoodSample s;
      s.base = base;
      s.mask = std::move(mask);
      s.positive = false;
      s.improvement = imp;
      out.push_back(std::move(s));
      ++negatives;
    }
  }
  return out;
}

SampleSet gen_samples(const CommitmentPools& pools, const SampleParams& params) {
  SampleSet set;
  const MipProblem m = build_mip(pools.inst, pools.form);
  for (int b = 0; b < static_cast<int>(pools.middle.size()); ++b) {
    try {
      auto part = gen_samples_for(m, pools, b, params);
      set.samples.insert(set.samples.end(), std::make_move_iterator(part.begin()),
                         std::make_move_iterator(part.end()));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoPositives) throw;
      set.skipped.push_back({b, e.code(), e.what()});
    }
  }
  return set;
}

DatasetWriter::DatasetWriter(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(fs::path(dir_) / "records", ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + dir_ + ": " + ec.message());
  const fs::path manifest = fs::path(dir_) / "manifest.json";
  if (fs::exists(manifest)) {
    const json j = read_json(manifest);
    positives_ = j.at("counts").at("positive").get<int>();
    negatives_ = j.at("counts").at("negative").get<int>();
    initial_ = j.at("counts").at("initial").get<int>();
    for (const auto& r : j.at("records")) records_.emplace_back(r.at("file"), r.at("kind"));
    for (const auto& name : j.at("instances")) instances_.push_back(name.get<std::string>());
  }
}

int DatasetWriter::add(const std::string& instance_name, const CommitmentPools& pools,
                       const std::vector<NeighborhoodSample>& samples) {
  if (samples.empty() && pools.high.empty()) return 0;
  const MipProblem m = build_mip(pools.inst, pools.form);
  const TripartiteGraph graph = encode(m);
  instances_.push_back(instance_name);
  int written = 0;
  auto emit = [&](const std::string& kind, json record) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.json", records_.size());
    const std::string file = std::string("records/") + name;
    record["kind"] = kind;
    record["instance"] = instance_name;
    write_text(fs::path(dir_) / file, record.dump());
    records_.emplace_back(file, kind);
    ++written;
  };

  std::vector<json> base_graphs(pools.middle.size());
  for (const auto& s : samples) {
    const PoolEntry& x = pools.middle.at(s.base);
    if (base_graphs[s.base].is_null()) {
      const MipSolution sol = commitment_solution(m, x.u);
      if (!sol.has_solution()) throw Error(ErrorCode::kIncompleteSolution, "middle commitment is infeasible");
      base_graphs[s.base] = json::parse(serialize(attach_solution_features(graph, sol.values, SolutionMode::kIncumbent)));
    }
    emit("neighborhood", {{"graph", base_graphs[s.base]},
                          {"base", grid_json(x.u)},
                          {"mask", grid_json(s.mask)},
                          {"label", s.positive ? 1 : 0},
                          {"improvement", s.improvement}});
    (s.positive ? positives_ : negatives_) += 1;
  }
  if (!pools.high.empty()) {
    const MipSolution lp = solve_lp(m);
    if (lp.status == SolveStatus::kOptimal) {
      const auto best = std::min_element(pools.high.begin(), pools.high.end(),
                                         [](const PoolEntry& a, const PoolEntry& b) { return a.objective < b.objective; });
      emit("initial", {{"graph", json::parse(serialize(attach_solution_features(graph, lp.values, SolutionMode::kLpRelax)))},
                       {"target", grid_json(best->u)}});
      ++initial_;
    }
  }
  return written;
}

void DatasetWriter::finish() {
  json records = json::array();
  for (const auto& [file, kind] : records_) records.push_back({{"file", file}, {"kind", kind}});
  const json manifest = {{"schema_version", kDatasetSchemaVersion},
                         {"graph_schema_version", kGraphSchemaVersion},
                         {"counts", {{"positive", positives_}, {"negative", negatives_}, {"initial", initial_}}},
                         {"instances", instances_},
                         {"records", records}};
  write_text(fs::path(dir_) / "manifest.json", manifest.dump(2) + "\n");
}

void export_training_set(const std::string& dir, const CommitmentPools& pools,
                         const std::vector<NeighborhoodSample>& samples, const std::string& instance_name) {
  DatasetWriter w(dir);
  w.add(instance_name, pools, samples);
  w.finish();
}

Dataset read_dataset(const std::string& dir) {
  const json manifest = read_json(fs::path(dir) / "manifest.json");
  Dataset ds;
  try {
    if (manifest.at("schema_version").get<int>() != kDatasetSchemaVersion) {
      throw Error(ErrorCode::kVersionMismatch, "dataset schema version " + manifest.at("schema_version").dump());
    }
    ds.positives = manifest.at("counts").at("positive").get<int>();
    ds.negatives = manifest.at("counts").at("negative").get<int>();
    ds.initial = manifest.at("counts").at("initial").get<int>();
    int pos = 0, neg = 0, init = 0;
    for (const auto& entry : manifest.at("records")) {
      const json j = read_json(fs::path(dir) / entry.at("file").get<std::string>());
      DatasetRecord r;
      r.kind = j.at("kind").get<std::string>();
      r.instance = j.at("instance").get<std::string>();
      r.graph = deserialize(j.at("graph").dump());
      if (r.kind == "neighborhood") {
        r.base = grid_from_json(j.at("base"), "base");
        const Commitment mask = grid_from_json(j.at("mask"), "mask");
        r.mask = NeighborhoodMask(mask.units(), mask.periods(), mask.values());
        r.positive = j.at("label").get<int>() == 1;
        r.improvement = j.at("improvement").get<double>();
        (r.positive ? pos : neg) += 1;
      } else if (r.kind == "initial") {
        r.target = grid_from_json(j.at("target"), "target");
        ++init;
      } else {
        throw Error(ErrorCode::kMalformedInput, "unknown record kind " + r.kind);
      }
      ds.records.push_back(std::move(r));
    }
    if (pos != ds.positives || neg != ds.negatives || init != ds.initial) {
      throw Error(ErrorCode::kMalformedInput, "manifest counts disagree with the records");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("dataset: ") + e.what());
  }
  return ds;
}

}  // namespace ucplns
