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

#ifndef GAMEDYN_SDE_HPP
#define GAMEDYN_SDE_HPP

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

namespace gamedyn {

struct SdeConfig {
  double dt = 1e-3;
  double horizon = 1.0;
  long record_stride = 1;
  int n_paths = 1;
  Vec y0;  // empty means the origin of the score space

  long n_steps() const { return static_cast<long>(std::ceil(horizon / dt - 1e-12)); }

  void validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("SdeConfig: dt must be positive");
    if (!(horizon > 0.0) || dt > horizon)
      throw std::invalid_argument("SdeConfig: need 0 < dt <= horizon");
    if (horizon / dt > 1e9) throw std::invalid_argument("SdeConfig: horizon/dt exceeds 1e9");
    if (record_stride < 1) throw std::invalid_argument("SdeConfig: record_stride must be >= 1");
    if (n_paths < 1) throw std::invalid_argument("SdeConfig: n_paths must be >= 1");
  }
};

// Recorded path of the score process; actions are always recomputed through
// the mirror map rather than stored.
struct Trajectory {
  std::vector<double> times;  // continuous time, or step index for discrete runs
  std::vector<Vec> scores;
  std::string game_id, reg_id;
  double noise_sigma = 0.0;
  double step = 0.0;  // dt or gamma
  std::uint64_t seed = 0, stream = 0;

  std::size_t size() const { return times.size(); }

  Vec action(std::size_t k, const RegularizerSet& regs) const {
    return regs.mirror(scores.at(k));
  }
};

// One Euler-Maruyama step of the score dynamics
//   dY = v(Q(Y)) dt + dM.
inline Vec euler_maruyama_step(const Vec& y, const GameSpec& game, const RegularizerSet& regs,
                               const NoiseSpec& noise, double dt, SeededStream& stream) {
  if (!(dt > 0.0)) throw std::domain_error("euler_maruyama_step: dt must be positive");
  const Vec x = regs.mirror(y);
  Vec v = game.gradient_field(x);
  Vec yn(y.size());
  if (noise.model == NoiseSpec::Model::isotropic) {
    const double scale = noise.sigma * std::sqrt(dt);
    for (std::size_t i = 0; i < y.size(); ++i)
      yn[i] = y[i] + v[i] * dt + (scale != 0.0 ? scale * stream.normal() : 0.0);
  } else {
    const Vec w = brownian_increment(noise, x, dt, stream);
    for (std::size_t i = 0; i < y.size(); ++i) yn[i] = y[i] + v[i] * dt + w[i];
  }
  if (!all_finite(yn)) throw std::runtime_error("euler_maruyama_step: non-finite score");
  return yn;
}

namespace detail {

// Drives one path and hands every recorded point (k = 0, stride, 2*stride,
// ..., final step) to the visitor as (step, t, y, x).
template <typename Visitor>
void sde_drive_path(const GameSpec& game, const RegularizerSet& regs, const NoiseSpec& noise,
                    const SdeConfig& cfg, SeededStream& stream, Visitor&& visit) {
  const int d = game.dim();
  Vec y = cfg.y0.empty() ? Vec(static_cast<std::size_t>(d), 0.0) : cfg.y0;
  if (static_cast<int>(y.size()) != d)
    throw std::invalid_argument("simulate_sde: y0 dimension mismatch");
  Vec x(y.size()), v(y.size());
  regs.mirror_into(y, x);
  visit(0L, 0.0, y, x);
  const long steps = cfg.n_steps();
  const bool iso = noise.model == NoiseSpec::Model::isotropic;
  const double scale = noise.sigma * std::sqrt(cfg.dt);
  for (long k = 1; k <= steps; ++k) {
    v = game.gradient_field(x);
    if (iso) {
      if (scale != 0.0)
        for (std::size_t i = 0; i < y.size(); ++i)
          y[i] += v[i] * cfg.dt + scale * stream.normal();
      else
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += v[i] * cfg.dt;
    } else {
      const Vec w = brownian_increment(noise, x, cfg.dt, stream);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += v[i] * cfg.dt + w[i];
    }
    if (!all_finite(y))
      throw std::runtime_error("sde path diverged at step " + std::to_string(k));
    regs.mirror_into(y, x);
    if (k % cfg.record_stride == 0 || k == steps) visit(k, k * cfg.dt, y, x);
  }
}

}  // namespace detail

template <typename Visitor>
void sde_path_visit(const GameSpec& game, const RegularizerSet& regs, const NoiseSpec& noise,
                    const SdeConfig& cfg, std::uint64_t seed, std::uint64_t path,
                    Visitor&& visit) {
  SeededStream stream(seed, path);
  try {
    detail::sde_drive_path(game, regs, noise, cfg, stream, visit);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("path " + std::to_string(path) + " (seed " + std::to_string(seed) +
                             "): " + e.what());
  }
}

// Ensemble of independent paths from the common initial condition. Paths are
// scheduled across threads; stream indices make the result identical for any
// worker count.
inline std::vector<Trajectory> simulate_sde(const GameSpec& game, const RegularizerSet& regs,
                                            const NoiseSpec& noise, const SdeConfig& cfg,
                                            std::uint64_t seed, int threads = 1) {
  cfg.validate();
  return run_paths<Trajectory>(cfg.n_paths, threads, [&](int path) {
    Trajectory traj;
    traj.game_id = game.id;
    traj.reg_id = regs.id();
    traj.noise_sigma = noise.sigma;
    traj.step = cfg.dt;
    traj.seed = seed;
    traj.stream = static_cast<std::uint64_t>(path);
    sde_path_visit(game, regs, noise, cfg, seed, static_cast<std::uint64_t>(path),
                   [&](long, double t, const Vec& y, const Vec&) {
                     traj.times.push_back(t);
                     traj.scores.push_back(y);
                   });
    return traj;
  });
}

// Exact transition of the Ornstein-Uhlenbeck process dX = -X dt + sigma dW:
// per coordinate, mean x e^{-dt} and variance sigma^2 (1 - e^{-2 dt}) / 2.
inline Vec ou_exact_step(const Vec& x, double dt, double sigma, SeededStream& stream) {
  if (!(dt > 0.0)) throw std::domain_error("ou_exact_step: dt must be positive");
  const double decay = std::exp(-dt);
  const double sd = sigma * std::sqrt(0.5 * (1.0 - std::exp(-2.0 * dt)));
  Vec xn(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    xn[i] = x[i] * decay + (sd != 0.0 ? sd * stream.normal() : 0.0);
  return xn;
}

}  // namespace gamedyn

#endif  // GAMEDYN_SDE_HPP
