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

#include "ucplns/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ucplns/simplex.hpp"
#include "ucplns/tri_graph.hpp"

namespace ucplns {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool improves(double candidate, double incumbent) {
  return candidate < incumbent - 1e-9 * std::max(1.0, std::abs(incumbent));
}

}  // namespace

void check_config(const LnsConfig& c) {
  auto bad = [](const char* msg) { throw Error(ErrorCode::kMalformedInput, std::string("LNS config: ") + msg); };
  if (!(0.0 <= c.lt && c.lt < c.ut && c.ut <= 1.0)) bad("need 0 <= lt < ut <= 1");
  if (!(c.psi_l > 1.0)) bad("psi_l must exceed 1");
  if (!(c.psi_u > 0.0 && c.psi_u < 1.0)) bad("psi_u must lie in (0, 1)");
  if (!(0.0 < c.phi_u && c.phi_u < c.phi_l && c.phi_l <= 1.0)) bad("need 0 < phi_u < phi_l <= 1");
  if (!(c.zeta0 >= c.phi_u && c.zeta0 <= c.phi_l)) bad("zeta0 outside [phi_u, phi_l]");
  if (!(c.psi_gd > 0.0 && c.psi_gd <= 1.0 && c.phi_gd > 0.0 && c.phi_gd <= 1.0)) bad("gd factors in (0, 1]");
  if (!(c.psi_ld > 0.0 && c.psi_ld <= 1.0 && c.phi_ld > 0.0 && c.phi_ld <= 1.0)) bad("ld factors in (0, 1]");
  if (c.row_width < 0) bad("row_width must be nonnegative");
}

MipSolution commitment_solution(const MipProblem& m, const Commitment& u) {
  MipLimits lim;
  lim.time_limit = 0.0;  // evaluate the start only
  MipSolution s = solve_mip(m, lim, start_from_commitment(m, u));
  if (s.values.empty()) s.objective = kInf;
  return s;
}

LocalSearchResult local_search(const MipProblem& m, const ScoreVector& scores, const Commitment& u_star,
                               const LnsConfig& cfg, const MipLimits& limits) {
  if (!scores.same_shape(u_star) || !u_star.same_shape(m.units(), m.periods())) {
    throw Error(ErrorCode::kShapeMismatch, "local search inputs differ in shape");
  }
  LocalSearchResult res;
  res.free = NeighborhoodMask(u_star.units(), u_star.periods());
  Commitment rounded_start = u_star;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool fixed = scores[i] <= cfg.lt || scores[i] >= cfg.ut;
    res.free[i] = fixed ? 0 : 1;
    if (!fixed) rounded_start[i] = scores[i] >= 0.5 ? 1 : 0;
  }
  const MipSolution base = commitment_solution(m, u_star);
  res.u = u_star;
  res.values = base.values;
  res.objective = base.has_solution() ? base.objective : kInf;

  const MipProblem sub = fix_and_sub(m, u_star, res.free);
  Commitment start = u_star;
  if (rounded_start != u_star) {
    const MipSolution alt = commitment_solution(sub, rounded_start);
    if (alt.has_solution() && alt.objective < res.objective) start = rounded_start;
  }
  const MipSolution sol = solve_mip(sub, limits, start_from_commitment(sub, start));
  res.nodes = sol.nodes;
  if (sol.has_solution() && improves(sol.objective, res.objective)) {
    res.u = extract_commitment(sub, sol.values);
    res.values = sol.values;
    res.objective = sol.objective;
  }
  return res;
}

NeighborhoodMask greedy_select(const ScoreVector& p, double zeta, const ScoreVector& gd, const ScoreVector& ld) {
  if (!p.same_shape(gd) || !p.same_shape(ld)) throw Error(ErrorCode::kShapeMismatch, "weights differ in shape");
  const std::size_t total = p.size();
  std::size_t k = 0;
  if (zeta > 0.0) {
    // The small offset keeps 0.25 * 16 from rounding up to 5.
    k = static_cast<std::size_t>(std::ceil(zeta * static_cast<double>(total) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, total);
  }
  std::vector<double> q(total);
  for (std::size_t i = 0; i < total; ++i) q[i] = p[i] * gd[i] * ld[i];
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });
  NeighborhoodMask mask(p.units(), p.periods());
  for (std::size_t r = 0; r < k; ++r) mask[idx[r]] = 1;
  return mask;
}

NeighborhoodMask row_neighborhood(const Commitment& u, int width) {
  NeighborhoodMask mask(u.units(), u.periods());
  for (int g = 0; g < u.units(); ++g) {
    int t = 0;
    while (t < u.periods()) {
      if (!u(g, t)) {
        ++t;
        continue;
      }
      int end = t;
      while (end + 1 < u.periods() && u(g, end + 1)) ++end;
      for (int s = t; s < std::min(t + width, end + 1); ++s) mask(g, s) = 1;
      for (int s = std::max(end - width + 1, t); s <= end; ++s) mask(g, s) = 1;
      t = end + 1;
    }
  }
  return mask;
}

double adaptive_size(double zeta, bool improved, const LnsConfig& cfg) {
  return improved ? std::max(zeta * cfg.psi_u, cfg.phi_u) : std::min(zeta * cfg.psi_l, cfg.phi_l);
}

std::pair<ScoreVector, ScoreVector> weight_descend(const ScoreVector& gd, const ScoreVector& /*ld*/,
                                                   const NeighborhoodMask& mask,
                                                   const NeighborhoodMask& changed, const LnsConfig& cfg) {
  if (!gd.same_shape(mask) || !gd.same_shape(changed)) {
    throw Error(ErrorCode::kShapeMismatch, "weight descent inputs differ in shape");
  }
  ScoreVector g2 = gd;
  ScoreVector l2(gd.units(), gd.periods(), 1.0);
  for (std::size_t i = 0; i < gd.size(); ++i) {
    if (!mask[i]) continue;
    g2[i] = gd[i] * cfg.psi_gd;
    l2[i] = cfg.psi_ld;
    if (changed[i]) {
      g2[i] *= cfg.phi_gd;
      l2[i] *= cfg.phi_ld;
    }
  }
  return {g2, l2};
}

NeighborhoodPolicy rgcn_policy(PolicyWeights weights) {
  auto w = std::make_shared<const PolicyWeights>(std::move(weights));
  check_weights(*w);
  struct Cache {
    const MipProblem* model = nullptr;
    TripartiteGraph graph;
  };
  auto cache = std::make_shared<Cache>();
  return [w, cache](const MipProblem& m, const Commitment&, const std::vector<double>& x) {
    if (cache->model != &m) {
      cache->graph = encode(m);
      cache->model = &m;
    }
    return rgcn_forward(attach_solution_features(cache->graph, x, SolutionMode::kIncumbent), *w);
  };
}

NeighborhoodPolicy lp_relaxation_policy() {
  struct Cache {
    const MipProblem* model = nullptr;
    ScoreVector scores;
  };
  auto cache = std::make_shared<Cache>();
  return [cache](const MipProblem& m, const Commitment&, const std::vector<double>&) {
    if (cache->model != &m) {
      cache->scores = lp_fractional_policy(m);
      cache->model = &m;
    }
    return cache->scores;
  };
}

NeighborhoodPolicy constant_policy(ScoreVector scores) {
  return [scores = std::move(scores)](const MipProblem& m, const Commitment&, const std::vector<double>&) {
    if (!scores.same_shape(m.units(), m.periods())) {
      throw Error(ErrorCode::kShapeMismatch, "score file does not match the model");
    }
    return scores;
  };
}

NeighborhoodPolicy random_policy(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng](const MipProblem& m, const Commitment&, const std::vector<double>&) {
    std::uniform_real_distribution<double> d(1e-6, 1.0 - 1e-6);
    ScoreVector s(m.units(), m.periods());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = d(*rng);
    return s;
  };
}

LnsResult lns_run(const MipProblem& m, const Commitment& u0, const NeighborhoodPolicy& policy,
                  const LnsConfig& cfg) {
  check_config(cfg);
  const auto start = Clock::now();
  LnsResult res;
  const MipSolution first = commitment_solution(m, u0);
  if (!first.has_solution()) {
    throw Error(ErrorCode::kIncompleteSolution, "initial commitment is infeasible for the model");
  }
  res.u = u0;
  res.values = first.values;
  res.objective = first.objective;

  const int n = m.units(), horizon = m.periods();
  ScoreVector gd(n, horizon, 1.0), ld(n, horizon, 1.0);
  double zeta = cfg.zeta0;
  int stall = 0;
  const std::int64_t iter_nodes =
      cfg.iter_node_limit >= 0 ? cfg.iter_node_limit : (cfg.node_budget > 0 ? std::max<std::int64_t>(1, cfg.node_budget / 20) : -1);
  const double iter_time = cfg.iter_time_limit >= 0.0 ? cfg.iter_time_limit
                                                      : (std::isfinite(cfg.time_limit) ? cfg.time_limit / 20.0 : kInf);

  for (int k = 1; k <= cfg.max_step; ++k) {
    const double elapsed = seconds_since(start);
    if (elapsed >= cfg.time_limit) break;
    if (cfg.node_budget >= 0 && res.nodes >= cfg.node_budget) break;

    const ScoreVector p = policy(m, res.u, res.values);
    const NeighborhoodMask mask =
        mask_union(greedy_select(p, zeta, gd, ld), row_neighborhood(res.u, cfg.row_width));

    MipLimits lim;
    lim.time_limit = std::min(iter_time, cfg.time_limit - elapsed);
    lim.node_limit = iter_nodes;
    if (cfg.node_budget >= 0) {
      const std::int64_t left = cfg.node_budget - res.nodes;
      lim.node_limit = lim.node_limit < 0 ? left : std::min(lim.node_limit, left);
    }
    const MipProblem sub = fix_and_sub(m, res.u, mask);
    const MipSolution sol = solve_mip(sub, lim, start_from_commitment(sub, res.u));
    res.nodes += sol.nodes;

    const Commitment before = res.u;
    const bool better = sol.has_solution() && improves(sol.objective, res.objective);
    if (better) {
      res.u = extract_commitment(sub, sol.values);
      res.values = sol.values;
      res.objective = sol.objective;
    }
    const NeighborhoodMask changed = xor_mask(before, res.u);

    LnsIteration it;
    it.k = k;
    it.zeta = zeta;
    it.mask_size = static_cast<int>(mask.count_nonzero());
    it.objective = res.objective;
    it.bound = sol.bound;
    it.wall_ms = seconds_since(start) * 1000.0;
    it.nodes = res.nodes;
    it.improved = better;
    it.mask = mask;
    res.log.push_back(std::move(it));

    zeta = adaptive_size(zeta, better, cfg);
    std::tie(gd, ld) = weight_descend(gd, ld, mask, changed, cfg);
    stall = better ? 0 : stall + 1;
    if (stall >= cfg.stall_limit) break;
  }
  res.wall_time = seconds_since(start);
  return res;
}

std::string iteration_log_jsonl(const std::vector<LnsIteration>& log) {
  std::string out;
  for (const LnsIteration& it : log) {
    nlohmann::json j = {{"k", it.k},
                        {"zeta", it.zeta},
                        {"mask_size", it.mask_size},
                        {"objective", it.objective},
                        {"bound", std::isfinite(it.bound) ? nlohmann::json(it.bound) : nlohmann::json(nullptr)},
                        {"wall_ms", it.wall_ms},
                        {"nodes", it.nodes}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace ucplns
