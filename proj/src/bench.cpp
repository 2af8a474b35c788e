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

#include "ucplns/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "ucplns/policy.hpp"
#include "ucplns/restore.hpp"
#include "ucplns/simplex.hpp"
#include "ucplns/tri_graph.hpp"

namespace ucplns {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or(const json& j, double fallback) { return j.is_null() ? fallback : j.get<double>(); }

std::string read_file(const std::string& path, ErrorCode code) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(code, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

std::string status_name(const MipSolution& s) { return std::string(to_string(s.status)); }

// Appends a point, keeping the objective series nonincreasing.
void push(RunRecord& r, double wall_ms, std::int64_t nodes, double objective, double bound = -kInf) {
  if (!r.trace.empty()) objective = std::min(objective, r.trace.back().objective);
  r.trace.push_back({wall_ms, nodes, objective, bound});
  r.final_objective = objective;
}

NeighborhoodPolicy lns_policy(const PipelineConfig& cfg, const Prediction& pred) {
  switch (cfg.policy) {
    case PolicySource::kLp:
      return lp_relaxation_policy();
    case PolicySource::kRgcn:
      return rgcn_policy(load_weights(cfg.weights_path));
    case PolicySource::kFile:
      return constant_policy(pred.scores);
    case PolicySource::kRandom:
      return random_policy(cfg.seed + 1);
  }
  return lp_relaxation_policy();
}

}  // namespace

UcpInstance generate_system(const UcpInstance& base, int copies) {
  if (copies < 1) throw Error(ErrorCode::kMalformedInput, "copies must be at least 1");
  UcpInstance out = base;
  out.units.clear();
  for (int c = 0; c < copies; ++c) out.units.insert(out.units.end(), base.units.begin(), base.units.end());
  for (double& d : out.demand) d *= copies;
  for (double& r : out.reserve) r *= copies;
  return out;
}

std::string_view split_for_day(int day) {
  const int digit = (day < 0 ? -day : day) % 10;
  if (digit == 3) return "validation";
  if (digit == 7) return "test";
  return "train";
}

std::vector<LoadProfile> ingest_loads_text(std::string_view csv, const UcpInstance& inst,
                                           const IngestOptions& opts) {
  if (!(opts.rho > 0.0) || opts.reserve_ratio < 0.0 || opts.jitter < 0.0 || opts.jitter >= 1.0) {
    throw Error(ErrorCode::kMalformedInput, "ingest options out of range");
  }
  double capacity = 0.0;
  for (const auto& u : inst.units) capacity += u.p_max;
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> noise(-opts.jitter, opts.jitter);

  std::vector<LoadProfile> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const auto nl = csv.find('\n', pos);
    const std::string_view line = trim(csv.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? csv.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    double day_value = 0.0;
    if (!parse_double(fields[0], day_value)) {
      if (out.empty() && line_no == 1) continue;  // header
      throw Error(ErrorCode::kMalformedCsv, "line " + std::to_string(line_no) + ": day is not a number");
    }
    if (day_value != std::floor(day_value)) {
      throw Error(ErrorCode::kMalformedCsv, "line " + std::to_string(line_no) + ": day must be an integer");
    }
    if (static_cast<int>(fields.size()) - 1 != inst.horizon) {
      throw Error(ErrorCode::kMalformedCsv, "line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(inst.horizon) + " loads, got " +
                                                std::to_string(fields.size() - 1));
    }
    std::vector<double> load(inst.horizon);
    for (int t = 0; t < inst.horizon; ++t) {
      if (!parse_double(fields[t + 1], load[t]) || load[t] < 0.0) {
        throw Error(ErrorCode::kMalformedCsv, "line " + std::to_string(line_no) + ": bad load in column " +
                                                  std::to_string(t + 2));
      }
    }
    const double peak = *std::max_element(load.begin(), load.end());
    if (!(peak > 0.0)) throw Error(ErrorCode::kMalformedCsv, "line " + std::to_string(line_no) + ": all loads zero");

    LoadProfile p;
    p.day = static_cast<int>(day_value);
    p.split = std::string(split_for_day(p.day));
    const double scale = opts.rho * capacity / peak;
    // Jitter never pushes demand plus reserve past the installed capacity.
    const double ceiling = capacity / (1.0 + opts.reserve_ratio);
    for (int t = 0; t < inst.horizon; ++t) {
      double d = load[t] * scale;
      if (opts.jitter > 0.0) d = std::min(d * (1.0 + noise(rng)), ceiling);
      p.demand.push_back(d);
      p.reserve.push_back(opts.reserve_ratio * d);
    }
    out.push_back(std::move(p));
  }
  if (out.empty()) throw Error(ErrorCode::kMalformedCsv, "no load rows");
  return out;
}

std::vector<LoadProfile> ingest_loads(const std::string& path, const UcpInstance& inst, const IngestOptions& opts) {
  return ingest_loads_text(read_file(path, ErrorCode::kMalformedCsv), inst, opts);
}

UcpInstance with_profile(const UcpInstance& inst, const LoadProfile& p) {
  if (static_cast<int>(p.demand.size()) != inst.horizon || p.reserve.size() != p.demand.size()) {
    throw Error(ErrorCode::kShapeMismatch, "profile length differs from the horizon");
  }
  UcpInstance out = inst;
  out.demand = p.demand;
  out.reserve = p.reserve;
  return out;
}

double objective_at(const RunRecord& r, CutAxis axis, double cut) {
  double best = kInf;
  for (const auto& p : r.trace) {
    const double key = axis == CutAxis::kWallMs ? p.wall_ms : static_cast<double>(p.nodes);
    if (key <= cut) best = std::min(best, p.objective);
  }
  return best;
}

std::vector<MetricRow> compute_metrics(const std::vector<RunRecord>& records,
                                       const std::map<std::string, double>& reference, CutAxis axis,
                                       const std::vector<double>& cuts) {
  std::vector<std::string> methods;
  std::set<std::string> instances;
  for (const auto& r : records) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    instances.insert(r.instance);
    if (!reference.count(r.instance)) throw Error(ErrorCode::kMissingReference, "no reference objective for " + r.instance);
  }
  std::vector<MetricRow> rows;
  for (double cut : cuts) {
    // Best objective over all methods per instance at this cut.
    std::map<std::string, double> best;
    for (const auto& r : records) {
      const double v = objective_at(r, axis, cut);
      auto [it, fresh] = best.emplace(r.instance, v);
      if (!fresh) it->second = std::min(it->second, v);
    }
    for (const auto& method : methods) {
      MetricRow row;
      row.method = method;
      row.axis = axis;
      row.cut = cut;
      std::vector<double> gaps;
      int best_hits = 0, survived = 0;
      for (const auto& r : records) {
        if (r.method != method) continue;
        const double v = objective_at(r, axis, cut);
        const double ref = reference.at(r.instance);
        const double gap = std::isfinite(v) ? (v - ref) / ref : kInf;
        gaps.push_back(gap);
        const double b = best.at(r.instance);
        if (std::isfinite(v) && v <= b) ++best_hits;
        if (gap <= kSurvivalGap) ++survived;
      }
      row.instances = static_cast<int>(gaps.size());
      if (!gaps.empty()) {
        double sum = 0.0;
        for (double g : gaps) sum += g;
        row.mean_gap = sum / static_cast<double>(gaps.size());
        std::sort(gaps.begin(), gaps.end());
        const std::size_t n = gaps.size();
        row.median_gap = n % 2 ? gaps[n / 2] : 0.5 * (gaps[n / 2 - 1] + gaps[n / 2]);
        row.best_rate = static_cast<double>(best_hits) / static_cast<double>(n);
        row.survival = static_cast<double>(survived) / static_cast<double>(n);
      }
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<double> log_cuts(double budget, int count, double decades) {
  std::vector<double> out;
  if (count <= 0) return out;
  if (count == 1) return {budget};
  for (int i = 0; i < count; ++i) {
    const double e = -decades + decades * static_cast<double>(i) / (count - 1);
    out.push_back(budget * std::pow(10.0, e));
  }
  out.back() = budget;
  return out;
}

std::map<std::string, double> best_known(const std::vector<RunRecord>& records) {
  std::map<std::string, double> best;
  for (const auto& r : records) {
    auto [it, fresh] = best.emplace(r.instance, r.final_objective);
    if (!fresh) it->second = std::min(it->second, r.final_objective);
  }
  return best;
}

PolicySource parse_policy_source(std::string_view s) {
  if (s == "lp") return PolicySource::kLp;
  if (s == "rgcn") return PolicySource::kRgcn;
  if (s == "file") return PolicySource::kFile;
  if (s == "random") return PolicySource::kRandom;
  throw Error(ErrorCode::kMalformedInput, "unknown policy '" + std::string(s) + "'");
}

std::string_view to_string(PolicySource p) {
  switch (p) {
    case PolicySource::kLp: return "lp";
    case PolicySource::kRgcn: return "rgcn";
    case PolicySource::kFile: return "file";
    case PolicySource::kRandom: return "random";
  }
  return "lp";
}

Prediction predict_and_restore(const UcpInstance& inst, const MipProblem& m, const PipelineConfig& cfg) {
  const auto t0 = Clock::now();
  Prediction p;
  switch (cfg.policy) {
    case PolicySource::kLp:
      p.scores = lp_fractional_policy(m);
      break;
    case PolicySource::kRgcn: {
      const MipSolution lp = solve_lp(m);
      if (lp.status != SolveStatus::kOptimal) throw Error(ErrorCode::kLpInfeasible, "LP relaxation has no optimum");
      const auto g = attach_solution_features(encode(m), lp.values, SolutionMode::kLpRelax);
      p.scores = rgcn_forward(g, load_weights(cfg.weights_path));
      break;
    }
    case PolicySource::kFile:
      p.scores = file_scores_policy(cfg.scores_path, m.units(), m.periods());
      break;
    case PolicySource::kRandom: {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> d(1e-6, 1.0 - 1e-6);
      p.scores = ScoreVector(m.units(), m.periods());
      for (std::size_t i = 0; i < p.scores.size(); ++i) p.scores[i] = d(rng);
      break;
    }
  }
  MipLimits pump;
  pump.node_limit = cfg.node_budget;
  pump.time_limit = cfg.time_limit;
  const RestorationResult r = heuristic_restore(inst, cfg.form, p.scores, pump);
  p.u_star = r.u_star;
  p.merged = r.merged_scores;
  p.objective = r.objective;
  p.pump_used = r.pump_used;
  p.wall_ms = ms_since(t0);
  return p;
}

std::vector<RunRecord> run_pipeline(const UcpInstance& inst, const PipelineConfig& cfg, const std::string& id) {
  const MipProblem m = build_mip(inst, cfg.form);
  bool needs_prediction = false;
  for (const auto& arm : cfg.arms) needs_prediction |= arm != "BnB";
  Prediction pred;
  if (needs_prediction) pred = predict_and_restore(inst, m, cfg);

  const std::int64_t budget = cfg.node_budget;
  const std::int64_t slice = budget > 0 ? std::max<std::int64_t>(1, budget / 20) : -1;
  const double slice_time = std::isfinite(cfg.time_limit) ? cfg.time_limit / 20.0 : kInf;
  auto remaining = [&](std::int64_t used) { return budget >= 0 ? std::max<std::int64_t>(0, budget - used) : -1; };

  std::vector<RunRecord> out;
  for (const auto& arm : cfg.arms) {
    RunRecord rec;
    rec.instance = id;
    rec.method = arm;
    const auto t0 = Clock::now();
    const double offset = arm == "BnB" ? 0.0 : pred.wall_ms;
    auto now_ms = [&] { return offset + ms_since(t0); };
    auto time_left = [&] { return std::isfinite(cfg.time_limit) ? std::max(0.0, cfg.time_limit - now_ms() / 1000.0) : kInf; };
    if (arm != "BnB") push(rec, offset, 0, pred.objective);

    std::int64_t used = 0;
    Commitment start = pred.u_star;
    if (arm == "IP-LNS" || arm == "IP-WS") {
      MipLimits lim;
      lim.node_limit = slice;
      lim.time_limit = std::min(slice_time, time_left());
      const LocalSearchResult ls = local_search(m, pred.merged, pred.u_star, cfg.lns, lim);
      used += ls.nodes;
      start = ls.u;
      push(rec, now_ms(), used, ls.objective);
    }
    if (arm == "IP-LNS") {
      LnsConfig lc = cfg.lns;
      lc.node_budget = remaining(used);
      lc.time_limit = time_left();
      if (lc.iter_node_limit < 0) lc.iter_node_limit = slice;
      if (lc.iter_time_limit < 0) lc.iter_time_limit = slice_time;
      const double base_ms = now_ms();
      const std::int64_t base_nodes = used;
      const LnsResult r = lns_run(m, start, lns_policy(cfg, pred), lc);
      for (const auto& it : r.log) push(rec, base_ms + it.wall_ms, base_nodes + it.nodes, it.objective);
      used += r.nodes;
      rec.status = "LNS";
    } else if (arm == "IP-WS" || arm == "WS" || arm == "BnB") {
      MipLimits lim;
      lim.node_limit = remaining(used);
      lim.time_limit = time_left();
      const std::int64_t base_nodes = used;
      std::optional<Assignment> warm;
      if (arm != "BnB") warm = start_from_commitment(m, start);
      const MipSolution s = solve_mip(m, lim, warm, [&](const IncumbentEvent& e) {
        if (!e.from_start) push(rec, now_ms(), base_nodes + e.nodes, e.objective);
      });
      used += s.nodes;
      if (s.has_solution()) push(rec, now_ms(), used, s.objective, s.bound);
      rec.status = status_name(s);
    } else {
      throw Error(ErrorCode::kMalformedInput, "unknown arm '" + arm + "'");
    }
    if (rec.trace.empty()) rec.final_objective = kInf;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<RunRecord> run_bench(const std::vector<std::pair<std::string, UcpInstance>>& instances,
                                 const PipelineConfig& cfg, int jobs) {
  std::vector<std::vector<RunRecord>> per(instances.size());
  std::vector<std::exception_ptr> errors(instances.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < instances.size();) {
      try {
        per[i] = run_pipeline(instances[i].second, cfg, instances[i].first);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(instances.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < n; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<RunRecord> out;
  for (auto& v : per) out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
  return out;
}

std::string records_to_jsonl(const std::vector<RunRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    json trace = json::array();
    for (const auto& p : r.trace) {
      trace.push_back({{"wall_ms", p.wall_ms},
                       {"nodes", p.nodes},
                       {"objective", number_or_null(p.objective)},
                       {"bound", number_or_null(p.bound)}});
    }
    const json j = {{"instance", r.instance},
                    {"method", r.method},
                    {"status", r.status},
                    {"final_objective", number_or_null(r.final_objective)},
                    {"trace", trace}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<RunRecord> records_from_jsonl(std::string_view text) {
  std::vector<RunRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      RunRecord r;
      r.instance = j.at("instance").get<std::string>();
      r.method = j.at("method").get<std::string>();
      r.status = j.value("status", "");
      r.final_objective = number_or(j.at("final_objective"), kInf);
      for (const auto& p : j.at("trace")) {
        r.trace.push_back({p.at("wall_ms").get<double>(), p.at("nodes").get<std::int64_t>(),
                           number_or(p.at("objective"), kInf), number_or(p.at("bound"), -kInf)});
      }
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedInput, "records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string metrics_to_csv(const std::vector<MetricRow>& rows) {
  std::string out = "method,axis,cut,mean_gap,median_gap,best_rate,survival,instances\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.method.c_str(),
                  r.axis == CutAxis::kNodes ? "nodes" : "wall_ms", r.cut, r.mean_gap, r.median_gap, r.best_rate,
                  r.survival, r.instances);
    out += buf;
  }
  return out;
}

void write_report(const std::string& dir, const std::vector<RunRecord>& records, const std::vector<MetricRow>& rows) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + dir + ": " + ec.message());
  write_file(fs::path(dir) / "records.jsonl", records_to_jsonl(records));
  std::string summary = "instance,method,status,final_objective,points\n";
  char buf[512];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.17g,%zu\n", r.instance.c_str(), r.method.c_str(), r.status.c_str(),
                  r.final_objective, r.trace.size());
    summary += buf;
  }
  write_file(fs::path(dir) / "summary.csv", summary);
  write_file(fs::path(dir) / "metrics.csv", metrics_to_csv(rows));
}

}  // namespace ucplns
