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

#ifndef GAMEDYN_NOISE_HPP
#define GAMEDYN_NOISE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gamedyn/game.hpp"
#include "gamedyn/linalg.hpp"
#include "gamedyn/rng.hpp"

namespace gamedyn {

// Noise model shared by the stochastic oracle (discrete time) and the
// diffusion term (continuous time): isotropic Gaussian of scale sigma, or a
// constant d x m matrix driving m independent sources.
struct NoiseSpec {
  enum class Model { isotropic, constant_matrix };

  Model model = Model::isotropic;
  double sigma = 0.0;
  Mat matrix;  // d x m

  static NoiseSpec isotropic(double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("NoiseSpec: sigma must be >= 0");
    NoiseSpec n;
    n.model = Model::isotropic;
    n.sigma = sigma;
    return n;
  }

  static NoiseSpec constant_matrix(Mat m) {
    if (m.empty() || m[0].empty()) throw std::invalid_argument("NoiseSpec: empty matrix");
    NoiseSpec n;
    n.model = Model::constant_matrix;
    n.matrix = std::move(m);
    return n;
  }

  int source_dim(int state_dim) const {
    return model == Model::isotropic ? state_dim : static_cast<int>(matrix[0].size());
  }

  // Smallest and largest eigenvalues of the quadratic covariation matrix
  // Sigma Sigma^T; the executable bounds consume exactly these two numbers.
  double sigma_min_sq(int state_dim) const {
    if (model == Model::isotropic) return sigma * sigma;
    return covariation_eigenvalues(state_dim).front();
  }

  double sigma_max_sq(int state_dim) const {
    if (model == Model::isotropic) return sigma * sigma;
    return covariation_eigenvalues(state_dim).back();
  }

  // Upper bound on E||U||_*^2 over the catalog dual norms (the L2 bound
  // dominates the per-player Linf ones); recorded in run metadata and used
  // wherever the discrete-time bounds ask for "sigma^2".
  double sigma_eff_sq(int state_dim) const {
    if (model == Model::isotropic) return state_dim * sigma * sigma;
    double tr = 0.0;
    for (const auto& row : matrix)
      for (double v : row) tr += v * v;
    return tr;
  }

  std::vector<double> covariation_eigenvalues(int state_dim) const {
    if (model == Model::isotropic)
      return std::vector<double>(static_cast<std::size_t>(state_dim), sigma * sigma);
    if (static_cast<int>(matrix.size()) != state_dim)
      throw std::invalid_argument("NoiseSpec: matrix rows must match state dimension");
    return symmetric_eigenvalues(mat_mul(matrix, transpose(matrix)));
  }
};

// Zero-mean gradient noise U at state x (the state only fixes the dimension
// for the models implemented here).
inline Vec sample_gradient_noise(const NoiseSpec& noise, const Vec& x, SeededStream& stream) {
  const std::size_t d = x.size();
  Vec u(d, 0.0);
  if (noise.model == NoiseSpec::Model::isotropic) {
    if (noise.sigma == 0.0) return u;
    for (std::size_t i = 0; i < d; ++i) u[i] = noise.sigma * stream.normal();
    return u;
  }
  const std::size_t m = noise.matrix[0].size();
  Vec xi(m);
  for (std::size_t j = 0; j < m; ++j) xi[j] = stream.normal();
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += noise.matrix[i][j] * xi[j];
    u[i] = s;
  }
  return u;
}

// Stochastic first-order oracle: v(x) plus zero-mean noise.
inline Vec sfo(const GameSpec& game, const NoiseSpec& noise, const Vec& x, SeededStream& stream) {
  Vec v = game.gradient_field(x);
  if (noise.model == NoiseSpec::Model::isotropic) {
    if (noise.sigma != 0.0)
      for (double& vi : v) vi += noise.sigma * stream.normal();
    return v;
  }
  const Vec u = sample_gradient_noise(noise, x, stream);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += u[i];
  return v;
}

// Increment of the martingale part over a step of length dt.
inline Vec brownian_increment(const NoiseSpec& noise, const Vec& x, double dt,
                              SeededStream& stream) {
  if (!(dt > 0.0)) throw std::domain_error("brownian_increment: dt must be positive");
  const double scale = std::sqrt(dt);
  Vec w = sample_gradient_noise(noise, x, stream);
  for (double& wi : w) wi *= scale;
  return w;
}

}  // namespace gamedyn

#endif  // GAMEDYN_NOISE_HPP
