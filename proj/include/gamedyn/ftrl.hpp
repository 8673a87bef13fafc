// Copyright 2026 The gamedyn Authors
//
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

#ifndef GAMEDYN_FTRL_HPP
#define GAMEDYN_FTRL_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gamedyn/game.hpp"
#include "gamedyn/linalg.hpp"
#include "gamedyn/noise.hpp"
#include "gamedyn/parallel.hpp"
#include "gamedyn/regularizer.hpp"
#include "gamedyn/rng.hpp"
#include "gamedyn/sde.hpp"

namespace gamedyn {

struct FtrlConfig {
  enum class Init { dual_vector, uniform_random_primal };

  double step = 0.1;  // constant learning rate gamma
  long n_steps = 100;
  int n_runs = 1;
  long record_stride = 1;
  Init init = Init::dual_vector;
  Vec y0;  // initial score when init == dual_vector; empty means the origin

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step))
      throw std::invalid_argument("FtrlConfig: step must be positive and finite");
    if (n_steps < 1) throw std::invalid_argument("FtrlConfig: n_steps must be >= 1");
    if (n_runs < 1) throw std::invalid_argument("FtrlConfig: n_runs must be >= 1");
    if (record_stride < 1) throw std::invalid_argument("FtrlConfig: record_stride must be >= 1");
    if (static_cast<double>(n_runs) * static_cast<double>(n_steps) > 1e10)
      throw std::invalid_argument("FtrlConfig: n_runs * n_steps exceeds 1e10");
  }
};

// One constant-step update y' = y + gamma * SFO(Q(y)).
inline Vec ftrl_step(const Vec& y, const GameSpec& game, const RegularizerSet& regs,
                     const NoiseSpec& noise, double gamma, SeededStream& stream) {
  if (!(gamma > 0.0)) throw std::domain_error("ftrl_step: step must be positive");
  const Vec x = regs.mirror(y);
  const Vec g = sfo(game, noise, x, stream);
  Vec yn(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) yn[i] = y[i] + gamma * g[i];
  if (!all_finite(yn)) throw std::runtime_error("ftrl_step: non-finite score");
  return yn;
}

// Initial score for one run. Uniform-random-primal draws the starting action
// uniformly from the feasible set and lifts it through the canonical dual
// preimage; the draw consumes the run's own stream.
inline Vec initial_score(const FtrlConfig& cfg, const GameSpec& game, const RegularizerSet& regs,
                         SeededStream& stream) {
  if (cfg.init == FtrlConfig::Init::dual_vector) {
    if (cfg.y0.empty()) return Vec(static_cast<std::size_t>(game.dim()), 0.0);
    if (static_cast<int>(cfg.y0.size()) != game.dim())
      throw std::invalid_argument("run_ftrl: y0 dimension mismatch");
    return cfg.y0;
  }
  if (!game.bounded())
    throw std::invalid_argument("run_ftrl: uniform-random-primal needs a bounded action space");
  const Vec x0 = game.sample_feasible(stream);
  return regs.dual_preimage(x0);
}

namespace detail {

template <typename Visitor>
void ftrl_drive_run(const GameSpec& game, const RegularizerSet& regs, const NoiseSpec& noise,
                    const FtrlConfig& cfg, SeededStream& stream, Visitor&& visit) {
  Vec y = initial_score(cfg, game, regs, stream);
  Vec x(y.size());
  regs.mirror_into(y, x);
  visit(0L, y, x);
  const bool iso = noise.model == NoiseSpec::Model::isotropic;
  for (long k = 1; k <= cfg.n_steps; ++k) {
    Vec g = game.gradient_field(x);
    if (iso) {
      if (noise.sigma != 0.0)
        for (double& gi : g) gi += noise.sigma * stream.normal();
    } else {
      const Vec u = sample_gradient_noise(noise, x, stream);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += u[i];
    }
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += cfg.step * g[i];
    if (!all_finite(y))
      throw std::runtime_error("ftrl run diverged at step " + std::to_string(k));
    regs.mirror_into(y, x);
    if (k % cfg.record_stride == 0 || k == cfg.n_steps) visit(k, y, x);
  }
}

}  // namespace detail

template <typename Visitor>
void ftrl_run_visit(const GameSpec& game, const RegularizerSet& regs, const NoiseSpec& noise,
                    const FtrlConfig& cfg, std::uint64_t seed, std::uint64_t run,
                    Visitor&& visit) {
  SeededStream stream(seed, run);
  try {
    detail::ftrl_drive_run(game, regs, noise, cfg, stream, visit);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("run " + std::to_string(run) + " (seed " + std::to_string(seed) +
                             "): " + e.what());
  }
}

// Ensemble of independent constant-step runs; trajectory "times" hold the
// step indices.
inline std::vector<Trajectory> run_ftrl(const GameSpec& game, const RegularizerSet& regs,
                                        const NoiseSpec& noise, const FtrlConfig& cfg,
                                        std::uint64_t seed, int threads = 1) {
  cfg.validate();
  return run_paths<Trajectory>(cfg.n_runs, threads, [&](int run) {
    Trajectory traj;
    traj.game_id = game.id;
    traj.reg_id = regs.id();
    traj.noise_sigma = noise.sigma;
    traj.step = cfg.step;
    traj.seed = seed;
    traj.stream = static_cast<std::uint64_t>(run);
    ftrl_run_visit(game, regs, noise, cfg, seed, static_cast<std::uint64_t>(run),
                   [&](long k, const Vec& y, const Vec&) {
                     traj.times.push_back(static_cast<double>(k));
                     traj.scores.push_back(y);
                   });
    return traj;
  });
}

// Fenchel energy F_n = F(p, y_n) along the recorded steps.
inline std::vector<double> fenchel_energy_curve(const Trajectory& traj,
                                                const RegularizerSet& regs, const Vec& p) {
  std::vector<double> f;
  f.reserve(traj.scores.size());
  for (const Vec& y : traj.scores) f.push_back(regs.fenchel(p, y));
  return f;
}

}  // namespace gamedyn

#endif  // GAMEDYN_FTRL_HPP
