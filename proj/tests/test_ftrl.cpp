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

#include "gamedyn/ftrl.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "gamedyn/game.hpp"
#include "gamedyn/linalg.hpp"
#include "gamedyn/regularizer.hpp"

using namespace gamedyn;

TEST_CASE("ftrl step matches the closed-form update at zero noise") {
  const GameSpec quad = make_quadratic_saddle();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::euclidean, quad);
  const NoiseSpec none = NoiseSpec::isotropic(0.0);
  SeededStream s(1, 0);
  const Vec y = ftrl_step({1.0, 1.0}, quad, regs, none, 0.5, s);
  CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(ftrl_step({1.0, 1.0}, quad, regs, none, 0.0, s), std::domain_error);
}

TEST_CASE("matching pennies stays at the uniform point when undisturbed") {
  const GameSpec pennies = make_matching_pennies();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::entropic_simplex, pennies);
  const NoiseSpec none = NoiseSpec::isotropic(0.0);
  SeededStream s(2, 0);
  Vec y(4, 0.0);
  for (int k = 0; k < 50; ++k) y = ftrl_step(y, pennies, regs, none, 0.1, s);
  const Vec x = regs.mirror(y);
  for (double xi : x) CHECK(xi == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("bilinear scores expand by sqrt(1 + gamma^2) per step") {
  const GameSpec bil = make_bilinear_saddle();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::euclidean, bil);
  const NoiseSpec none = NoiseSpec::isotropic(0.0);
  const double gamma = 0.1;
  SeededStream s(3, 0);

  Vec y = {1.0, 0.0};
  y = ftrl_step(y, bil, regs, none, gamma, s);
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(0.1).epsilon(1e-15));

  // Direct iteration oracle: the norm grows by exactly sqrt(1 + gamma^2).
  double expected = std::sqrt(1.0 + gamma * gamma) * std::sqrt(1.0 + 0.01);
  double prev = norm_l2(y);
  for (int k = 0; k < 100; ++k) {
    y = ftrl_step(y, bil, regs, none, gamma, s);
    const double cur = norm_l2(y);
    CHECK(cur / prev == doctest::Approx(std::sqrt(1.0 + gamma * gamma)).epsilon(1e-12));
    CHECK(cur > prev);
    prev = cur;
  }
  (void)expected;
}

TEST_CASE("deterministic quadratic run contracts geometrically") {
  const GameSpec quad = make_quadratic_saddle();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::euclidean, quad);
  FtrlConfig cfg;
  cfg.step = 0.1;
  cfg.n_steps = 200;
  cfg.n_runs = 1;
  cfg.record_stride = 200;
  cfg.y0 = {1.0, -0.5};
  const auto ens = run_ftrl(quad, regs, NoiseSpec::isotropic(0.0), cfg, 1);
  const Vec x = ens[0].action(ens[0].size() - 1, regs);
  const double expected = std::pow(0.9, 200) * norm_l2(Vec{1.0, -0.5});
  CHECK(norm_l2(x) <= expected * (1.0 + 1e-12) + 1e-300);
}

TEST_CASE("uniform-random-primal initialization lands where it should") {
  const GameSpec game = make_unit_square_minmax();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::binary_entropy, game);
  FtrlConfig cfg;
  cfg.init = FtrlConfig::Init::uniform_random_primal;
  SeededStream s(11, 0);
  double mean0 = 0.0;
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    SeededStream run_stream(11, static_cast<std::uint64_t>(i));
    const Vec y0 = initial_score(cfg, game, regs, run_stream);
    const Vec x0 = regs.mirror(y0);
    CHECK(game.feasible(x0));
    mean0 += x0[0];
  }
  CHECK(mean0 / n == doctest::Approx(0.5).epsilon(0.05));

  const GameSpec bil = make_bilinear_saddle();
  const RegularizerSet ereg = RegularizerSet::uniform(RegularizerKind::euclidean, bil);
  CHECK_THROWS_AS(initial_score(cfg, bil, ereg, s), std::invalid_argument);
}

TEST_CASE("runs are reproducible across worker counts") {
  const GameSpec pennies = make_matching_pennies();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::entropic_simplex, pennies);
  FtrlConfig cfg;
  cfg.step = 0.1;
  cfg.n_steps = 100;
  cfg.n_runs = 8;
  cfg.record_stride = 10;
  cfg.init = FtrlConfig::Init::uniform_random_primal;
  const NoiseSpec noise = NoiseSpec::isotropic(1.0);
  const auto serial = run_ftrl(pennies, regs, noise, cfg, 42, 1);
  const auto parallel = run_ftrl(pennies, regs, noise, cfg, 42, 4);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t r = 0; r < serial.size(); ++r) {
    REQUIRE(serial[r].scores.size() == parallel[r].scores.size());
    for (std::size_t k = 0; k < serial[r].scores.size(); ++k)
      CHECK(serial[r].scores[k] == parallel[r].scores[k]);
  }
}

TEST_CASE("fenchel energy curve: decreasing to zero on contracting runs") {
  const GameSpec quad = make_quadratic_saddle();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::euclidean, quad);
  FtrlConfig cfg;
  cfg.step = 0.1;
  cfg.n_steps = 100;
  cfg.record_stride = 1;
  cfg.y0 = {1.0, 1.0};
  const auto ens = run_ftrl(quad, regs, NoiseSpec::isotropic(0.0), cfg, 1);
  const auto curve = fenchel_energy_curve(ens[0], regs, quad.equilibrium);
  for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k] < curve[k - 1]);
  CHECK(curve.back() <= 1e-8);
  CHECK(curve.front() == doctest::Approx(1.0).epsilon(1e-12));  // F = ||y||^2 / 2

  // F vanishes exactly at a preimage of the base point.
  const Vec y_at_p = regs.dual_preimage(quad.equilibrium);
  CHECK(regs.fenchel(quad.equilibrium, y_at_p) <= 1e-12);
}

TEST_CASE("pathwise one-step energy inequality with w = gamma * sfo") {
  struct Case {
    GameSpec game;
    RegularizerKind kind;
  };
  const std::vector<Case> cases = {
      {make_quadratic_saddle(), RegularizerKind::euclidean},
      {make_matching_pennies(), RegularizerKind::entropic_simplex},
      {make_unit_square_minmax(), RegularizerKind::binary_entropy},
      {make_unit_square_minmax(), RegularizerKind::euclidean_box},
  };
  const double gamma = 0.1;
  for (const auto& c : cases) {
    const RegularizerSet regs = RegularizerSet::uniform(c.kind, c.game);
    const NoiseSpec noise = NoiseSpec::isotropic(1.0);
    const double k = regs.strong_convexity();
    const Vec p = c.game.equilibrium;
    SeededStream s(13, 0);
    Vec y(static_cast<std::size_t>(c.game.dim()), 0.0);
    for (int step = 0; step < 500; ++step) {
      const Vec x = regs.mirror(y);
      const Vec g = sfo(c.game, noise, x, s);
      Vec w = g;
      for (auto& wi : w) wi *= gamma;
      const Vec yn = add(y, w);
      const double lhs = regs.fenchel(p, yn);
      const double rhs =
          regs.fenchel(p, y) + dot(w, sub(x, p)) + regs.dual_norm_sq(w) / (2.0 * k);
      CHECK(lhs <= rhs + 1e-9);
      y = yn;
    }
  }
}

TEST_CASE("null-monotone ensemble energy is non-decreasing beyond noise") {
  const GameSpec pennies = make_matching_pennies();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::entropic_simplex, pennies);
  FtrlConfig cfg;
  cfg.step = 0.1;
  cfg.n_steps = 2000;
  cfg.n_runs = 200;
  cfg.record_stride = 100;
  cfg.init = FtrlConfig::Init::uniform_random_primal;
  const auto ens = run_ftrl(pennies, regs, NoiseSpec::isotropic(1.0), cfg, 7);

  const std::size_t n_rec = ens[0].scores.size();
  std::vector<std::vector<double>> per_step(n_rec);
  for (const auto& traj : ens) {
    const auto curve = fenchel_energy_curve(traj, regs, pennies.equilibrium);
    for (std::size_t k = 0; k < n_rec; ++k) per_step[k].push_back(curve[k]);
  }
  for (std::size_t k = 1; k < n_rec; ++k) {
    const MeanStderr pre = mean_stderr(per_step[k - 1]);
    const MeanStderr cur = mean_stderr(per_step[k]);
    const double se = std::sqrt(pre.stderr_ * pre.stderr_ + cur.stderr_ * cur.stderr_);
    CHECK(cur.mean >= pre.mean - 3.0 * se);
  }
}

TEST_CASE("constant-step quadratic iteration reaches its exact stationary variance") {
  // y_{n+1} = (1 - gamma) y_n + gamma sigma xi has stationary per-coordinate
  // variance gamma sigma^2 / (2 - gamma); a closed form binding the engine,
  // the noise model, and the generator together.
  const GameSpec quad = make_quadratic_saddle();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::euclidean, quad);
  const double gamma = 0.1, sigma = 1.0;
  FtrlConfig cfg;
  cfg.step = gamma;
  cfg.n_steps = 500;
  cfg.n_runs = 2000;
  cfg.record_stride = 500;
  cfg.y0 = {0.0, 0.0};
  const auto ens = run_ftrl(quad, regs, NoiseSpec::isotropic(sigma), cfg, 23);
  double var = 0.0;
  for (const auto& traj : ens) {
    const double y0 = traj.scores.back()[0];
    var += y0 * y0;
  }
  var /= static_cast<double>(cfg.n_runs);
  const double expected = gamma * sigma * sigma / (2.0 - gamma);
  CHECK(var == doctest::Approx(expected).epsilon(0.10));
}

TEST_CASE("iterates stay feasible and config guards fire") {
  const GameSpec pennies = make_matching_pennies();
  const RegularizerSet regs = RegularizerSet::uniform(RegularizerKind::entropic_simplex, pennies);
  FtrlConfig cfg;
  cfg.step = 0.2;
  cfg.n_steps = 500;
  cfg.n_runs = 2;
  cfg.record_stride = 25;
  cfg.init = FtrlConfig::Init::uniform_random_primal;
  const auto ens = run_ftrl(pennies, regs, NoiseSpec::isotropic(2.0), cfg, 3);
  for (const auto& traj : ens)
    for (std::size_t k = 0; k < traj.size(); ++k)
      CHECK(pennies.feasible(traj.action(k, regs), 1e-12));

  FtrlConfig bad;
  bad.step = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.step = 0.1;
  bad.n_steps = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.n_steps = 100000000;
  bad.n_runs = 1000;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
