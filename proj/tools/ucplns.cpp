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

// Command-line front end for the unit-commitment LNS toolkit.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "json_config.hpp"
#include "ucplns/bench.hpp"
#include "ucplns/branch_and_bound.hpp"
#include "ucplns/datagen.hpp"
#include "ucplns/instance_gen.hpp"
#include "ucplns/mps.hpp"
#include "ucplns/policy.hpp"
#include "ucplns/restore.hpp"
#include "ucplns/search.hpp"
#include "ucplns/simplex.hpp"
#include "ucplns/tri_graph.hpp"
#include "ucplns/ucp_model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ucplns;

namespace {

struct Globals {
  std::string form = "1bin";
  std::string policy = "lp";
  std::string weights;
  std::string scores;
  std::uint64_t seed = 0;
  double time_limit = kInf;
  std::int64_t node_limit = -1;
  std::string out = ".";
};

fs::path out_dir(const Globals& g) {
  fs::path p(g.out);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, "cannot create " + g.out + ": " + ec.message());
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
}

template <typename T, typename Tag>
json grid_json(const Grid<T, Tag>& grid) {
  json rows = json::array();
  for (int g = 0; g < grid.units(); ++g) {
    json r = json::array();
    for (int t = 0; t < grid.periods(); ++t) {
      if constexpr (std::is_same_v<T, double>) {
        r.push_back(grid(g, t));
      } else {
        r.push_back(static_cast<int>(grid(g, t)));
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

json objective_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

PipelineConfig pipeline_config(const Globals& g) {
  PipelineConfig c;
  c.form = parse_formulation(g.form);
  c.policy = parse_policy_source(g.policy);
  c.weights_path = g.weights;
  c.scores_path = g.scores;
  c.seed = g.seed;
  c.node_budget = g.node_limit;
  c.time_limit = g.time_limit;
  return c;
}

MipLimits limits(const Globals& g) {
  MipLimits lim;
  lim.node_limit = g.node_limit;
  lim.time_limit = g.time_limit;
  return lim;
}

// Instance files named on the command line plus every *.json in the listed
// directories, in sorted order.
std::vector<std::pair<std::string, UcpInstance>> gather(const std::vector<std::string>& files,
                                                        const std::vector<std::string>& dirs) {
  std::vector<std::string> paths = files;
  for (const auto& d : dirs) {
    std::vector<std::string> found;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_regular_file() && e.path().extension() == ".json") found.push_back(e.path().string());
    }
    std::sort(found.begin(), found.end());
    paths.insert(paths.end(), found.begin(), found.end());
  }
  if (paths.empty()) throw Error(ErrorCode::kMalformedInput, "no instances given");
  std::vector<std::pair<std::string, UcpInstance>> out;
  for (const auto& p : paths) out.emplace_back(fs::path(p).stem().string(), load_instance(p));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unit-commitment MIP toolkit with learned large neighborhood search"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<cli::JsonConfig>());
  app.set_config("--config", "", "JSON file with option values");

  Globals g;
  app.add_option("--form", g.form, "Formulation: 1bin or 3bin")->capture_default_str();
  app.add_option("--policy", g.policy, "Score source: lp, rgcn, file or random")->capture_default_str();
  app.add_option("--weights", g.weights, "Policy weight file (rgcn)");
  app.add_option("--scores", g.scores, "Score file (file policy)");
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--time-limit", g.time_limit, "Seconds");
  app.add_option("--node-limit", g.node_limit, "Branch-and-bound node budget, -1 for none")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  // gen-system
  auto* gen = app.add_subcommand("gen-system", "Replicate a base system, or draw a random one");
  std::string base_path;
  int copies = 1, rand_units = 0, rand_periods = 24;
  gen->add_option("--base", base_path, "Base instance file");
  gen->add_option("--copies", copies, "Number of replicas")->capture_default_str();
  gen->add_option("--random-units", rand_units, "Draw a random instance with this many units instead");
  gen->add_option("--periods", rand_periods, "Horizon of a random instance")->capture_default_str();
  gen->callback([&] {
    UcpInstance inst;
    if (rand_units > 0) {
      inst = make_random_instance(g.seed, rand_units, rand_periods);
    } else {
      if (base_path.empty()) throw CLI::RequiredError("--base or --random-units");
      inst = generate_system(load_instance(base_path), copies);
    }
    const auto path = out_dir(g) / "system.json";
    save_instance(inst, path.string());
    std::printf("%d units, %d periods -> %s\n", inst.num_units(), inst.horizon, path.c_str());
  });

  // ingest-loads
  auto* ingest = app.add_subcommand("ingest-loads", "Map daily load curves onto a system");
  std::string inst_path, csv_path;
  IngestOptions io;
  ingest->add_option("--instance", inst_path, "System file")->required();
  ingest->add_option("--csv", csv_path, "Load CSV, one day per row")->required();
  ingest->add_option("--rho", io.rho, "Peak load / total capacity")->capture_default_str();
  ingest->add_option("--reserve-ratio", io.reserve_ratio, "Reserve / demand")->capture_default_str();
  ingest->add_option("--jitter", io.jitter, "Multiplicative noise half-width")->capture_default_str();
  ingest->callback([&] {
    io.seed = g.seed;
    const auto inst = load_instance(inst_path);
    const auto days = ingest_loads(csv_path, inst, io);
    std::map<std::string, int> counts;
    for (const auto& d : days) {
      const auto dir = out_dir(g) / d.split;
      fs::create_directories(dir);
      char name[32];
      std::snprintf(name, sizeof name, "day_%03d.json", d.day);
      save_instance(with_profile(inst, d), (dir / name).string());
      ++counts[d.split];
    }
    for (const auto& [split, n] : counts) std::printf("%s: %d\n", split.c_str(), n);
  });

  // build
  auto* build = app.add_subcommand("build", "Write the MIP as MPS and its tripartite graph");
  std::string build_inst;
  bool lp_features = false;
  build->add_option("--instance", build_inst, "Instance file")->required();
  build->add_flag("--lp-features", lp_features, "Attach LP relaxation values to the graph");
  build->callback([&] {
    const auto m = build_mip(load_instance(build_inst), parse_formulation(g.form));
    const auto dir = out_dir(g);
    write_text(dir / "model.mps", export_mps(m));
    auto graph = encode(m);
    if (lp_features) {
      const auto lp = solve_lp(m);
      if (lp.status != SolveStatus::kOptimal) throw Error(ErrorCode::kLpInfeasible, "LP relaxation has no optimum");
      graph = attach_solution_features(graph, lp.values, SolutionMode::kLpRelax);
    }
    write_text(dir / "graph.json", serialize(graph));
    std::printf("%d variables, %d constraints, %zu nonzeros\n", m.num_variables(), m.num_constraints(), m.nonzeros());
  });

  // solve
  auto* solve = app.add_subcommand("solve", "Solve the full MIP");
  std::string solve_inst, external, start_path;
  double gap = 1e-7;
  solve->add_option("--instance", solve_inst, "Instance file")->required();
  solve->add_option("--gap", gap, "Relative gap")->capture_default_str();
  solve->add_option("--external", external, "External solver command with {mps} and {sol} placeholders");
  solve->add_option("--start", start_path, "Warm start: a restore or solve result file");
  solve->callback([&] {
    const auto inst = load_instance(solve_inst);
    const auto m = build_mip(inst, parse_formulation(g.form));
    const auto dir = out_dir(g);
    MipSolution s;
    if (!external.empty()) {
      s = solve_external(m, external, dir.string());
    } else {
      MipLimits lim = limits(g);
      lim.gap = gap;
      std::optional<Assignment> start;
      if (!start_path.empty()) {
        std::ifstream in(start_path);
        const json j = json::parse(in);
        const json& rows = j.contains("u_star") ? j["u_star"] : j.at("commitment");
        Commitment u(static_cast<int>(rows.size()), static_cast<int>(rows.at(0).size()));
        for (int a = 0; a < u.units(); ++a) {
          for (int t = 0; t < u.periods(); ++t) u(a, t) = static_cast<std::uint8_t>(rows[a][t].get<int>());
        }
        start = start_from_commitment(m, u);
      }
      s = solve_mip(m, lim, start);
    }
    json out = {{"status", std::string(to_string(s.status))},
                {"objective", objective_json(s.objective)},
                {"bound", objective_json(s.bound)},
                {"nodes", s.nodes},
                {"wall_time", s.wall_time}};
    if (s.has_solution()) out["commitment"] = grid_json(extract_commitment(m, s.values));
    write_text(dir / "solution.json", out.dump(2) + "\n");
    std::printf("%s objective %.10g bound %.10g nodes %lld\n", std::string(to_string(s.status)).c_str(), s.objective,
                s.bound, static_cast<long long>(s.nodes));
  });

  // restore
  auto* restore = app.add_subcommand("restore", "Predict scores and restore a feasible commitment");
  std::string restore_inst;
  restore->add_option("--instance", restore_inst, "Instance file")->required();
  restore->callback([&] {
    const auto inst = load_instance(restore_inst);
    const auto cfg = pipeline_config(g);
    const auto m = build_mip(inst, cfg.form);
    const Prediction p = predict_and_restore(inst, m, cfg);
    const auto dir = out_dir(g);
    save_scores(p.merged, (dir / "merged_scores.json").string());
    const json out = {{"u_star", grid_json(p.u_star)},
                      {"scores", grid_json(p.scores)},
                      {"merged_scores", grid_json(p.merged)},
                      {"pump_used", p.pump_used},
                      {"objective", objective_json(p.objective)},
                      {"wall_ms", p.wall_ms}};
    write_text(dir / "restored.json", out.dump(2) + "\n");
    std::printf("objective %.10g%s\n", p.objective, p.pump_used ? " (pump)" : "");
  });

  // lns
  auto* lns = app.add_subcommand("lns", "Predict, restore, local search, then LNS");
  std::string lns_inst;
  LnsConfig lc;
  lns->add_option("--instance", lns_inst, "Instance file")->required();
  lns->add_option("--max-step", lc.max_step, "Iteration cap")->capture_default_str();
  lns->add_option("--stall-limit", lc.stall_limit, "Consecutive non-improving steps")->capture_default_str();
  lns->add_option("--zeta0", lc.zeta0, "Initial neighborhood ratio")->capture_default_str();
  lns->add_option("--lt", lc.lt, "Lower fixing threshold")->capture_default_str();
  lns->add_option("--ut", lc.ut, "Upper fixing threshold")->capture_default_str();
  lns->add_option("--row-width", lc.row_width, "Row neighborhood width")->capture_default_str();
  lns->callback([&] {
    const auto inst = load_instance(lns_inst);
    PipelineConfig cfg = pipeline_config(g);
    cfg.lns = lc;
    cfg.arms = {"IP-LNS"};
    const auto m = build_mip(inst, cfg.form);
    const Prediction p = predict_and_restore(inst, m, cfg);
    MipLimits lim = limits(g);
    if (g.node_limit > 0) lim.node_limit = std::max<std::int64_t>(1, g.node_limit / 20);
    const auto ls = local_search(m, p.merged, p.u_star, lc, lim);
    LnsConfig run = lc;
    run.node_budget = g.node_limit >= 0 ? std::max<std::int64_t>(0, g.node_limit - ls.nodes) : -1;
    run.time_limit = g.time_limit;
    NeighborhoodPolicy policy;
    switch (cfg.policy) {
      case PolicySource::kLp: policy = lp_relaxation_policy(); break;
      case PolicySource::kRgcn: policy = rgcn_policy(load_weights(cfg.weights_path)); break;
      case PolicySource::kFile: policy = constant_policy(p.scores); break;
      case PolicySource::kRandom: policy = random_policy(g.seed + 1); break;
    }
    const LnsResult r = lns_run(m, ls.u, policy, run);
    const auto dir = out_dir(g);
    write_text(dir / "lns_log.jsonl", iteration_log_jsonl(r.log));
    const json out = {{"restored_objective", objective_json(p.objective)},
                      {"local_search_objective", objective_json(ls.objective)},
                      {"objective", objective_json(r.objective)},
                      {"iterations", r.log.size()},
                      {"nodes", r.nodes + ls.nodes},
                      {"commitment", grid_json(r.u)}};
    write_text(dir / "result.json", out.dump(2) + "\n");
    std::printf("restored %.10g, local search %.10g, LNS %.10g after %zu iterations\n", p.objective, ls.objective,
                r.objective, r.log.size());
  });

  // datagen
  auto* dg = app.add_subcommand("datagen", "Collect commitment pools and export training samples");
  std::vector<std::string> dg_files, dg_dirs;
  PoolBudgets pb;
  SampleParams sp;
  dg->add_option("--instance", dg_files, "Instance files");
  dg->add_option("--instances", dg_dirs, "Directories of instance files");
  dg->add_option("--high-max", pb.high_max, "High pool size")->capture_default_str();
  dg->add_option("--low-max", pb.low_max, "Low pool size")->capture_default_str();
  dg->add_option("--pool-nodes", pb.node_limit, "Node limit per pool solve")->capture_default_str();
  dg->add_option("--sample-nodes", sp.node_limit, "Node limit per neighborhood search")->capture_default_str();
  dg->add_option("--alpha-p", sp.alpha_p)->capture_default_str();
  dg->add_option("--alpha-size", sp.alpha_size)->capture_default_str();
  dg->add_option("--alpha-c", sp.alpha_c)->capture_default_str();
  dg->add_option("--alpha-n", sp.alpha_n)->capture_default_str();
  dg->callback([&] {
    sp.seed = g.seed;
    const auto form = parse_formulation(g.form);
    DatasetWriter writer(out_dir(g).string());
    for (const auto& [name, inst] : gather(dg_files, dg_dirs)) {
      const auto pools = collect_pools(inst, form, pb);
      const auto set = gen_samples(pools, sp);
      for (const auto& s : set.skipped) std::fprintf(stderr, "%s: skipped base %d: %s\n", name.c_str(), s.base, s.detail.c_str());
      const int n = writer.add(name, pools, set.samples);
      std::printf("%s: high %zu, middle %zu, low %zu, records %d\n", name.c_str(), pools.high.size(),
                  pools.middle.size(), pools.low.size(), n);
    }
    writer.finish();
    std::printf("positive %d, negative %d, initial %d\n", writer.positives(), writer.negatives(), writer.initial());
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Run pipeline arms and write a report");
  std::vector<std::string> b_files, b_dirs;
  std::vector<std::string> arms = {"IP-LNS", "IP-WS", "WS", "BnB"};
  int jobs = 1, cut_count = 5;
  bench->add_option("--instance", b_files, "Instance files");
  bench->add_option("--instances", b_dirs, "Directories of instance files");
  bench->add_option("--arms", arms, "Arms to run")->capture_default_str();
  bench->add_option("--jobs", jobs, "Worker threads, one instance each")->capture_default_str();
  bench->add_option("--cuts", cut_count, "Number of logarithmic budget cuts")->capture_default_str();
  bench->callback([&] {
    PipelineConfig cfg = pipeline_config(g);
    cfg.arms = arms;
    if (cfg.node_budget < 0 && !std::isfinite(cfg.time_limit)) cfg.node_budget = 10000;
    const auto recs = run_bench(gather(b_files, b_dirs), cfg, jobs);
    const CutAxis axis = cfg.node_budget >= 0 ? CutAxis::kNodes : CutAxis::kWallMs;
    const double budget = cfg.node_budget >= 0 ? static_cast<double>(cfg.node_budget) : cfg.time_limit * 1000.0;
    const auto rows = compute_metrics(recs, best_known(recs), axis, log_cuts(budget, cut_count));
    write_report(out_dir(g).string(), recs, rows);
    std::fputs(metrics_to_csv(rows).c_str(), stdout);
  });

  // report
  auto* report = app.add_subcommand("report", "Recompute metrics from a records file");
  std::string records_path, reference_path, axis_name = "nodes";
  double budget = 10000;
  report->add_option("--records", records_path, "records.jsonl from bench")->required();
  report->add_option("--reference", reference_path, "JSON object instance -> reference objective");
  report->add_option("--axis", axis_name, "nodes or wall_ms")->capture_default_str();
  report->add_option("--budget", budget, "Largest cut")->capture_default_str();
  report->add_option("--cuts", cut_count, "Number of logarithmic cuts")->capture_default_str();
  report->callback([&] {
    std::ifstream in(records_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIoFailure, "cannot read " + records_path);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto recs = records_from_jsonl(text);
    std::map<std::string, double> ref = best_known(recs);
    if (!reference_path.empty()) {
      std::ifstream rin(reference_path);
      ref = json::parse(rin).get<std::map<std::string, double>>();
    }
    if (axis_name != "nodes" && axis_name != "wall_ms") throw CLI::ValidationError("--axis", "nodes or wall_ms");
    const auto rows = compute_metrics(recs, ref, axis_name == "nodes" ? CutAxis::kNodes : CutAxis::kWallMs,
                                      log_cuts(budget, cut_count));
    const auto dir = out_dir(g);
    write_text(dir / "metrics.csv", metrics_to_csv(rows));
    std::fputs(metrics_to_csv(rows).c_str(), stdout);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
