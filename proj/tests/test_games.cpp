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

#include "gamedyn/game.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "gamedyn/rng.hpp"

using namespace gamedyn;

namespace {

// Interior sample: uniform over the bounded directions, pulled toward a
// center point so finite differences stay inside.
Vec interior_sample(const GameSpec& game, SeededStream& stream) {
  Vec x;
  for (const auto& geo : game.geometry) {
    Vec part;
    if (geo.kind == GeometryKind::full_space) {
      part.resize(static_cast<std::size_t>(geo.dim));
      for (auto& v : part) v = stream.uniform(-2.0, 2.0);
    } else {
      part = geo.sample_uniform(stream);
      if (geo.kind == GeometryKind::box) {
        for (int i = 0; i < geo.dim; ++i)
          part[static_cast<std::size_t>(i)] =
              0.9 * part[static_cast<std::size_t>(i)] +
              0.05 * (geo.lo[static_cast<std::size_t>(i)] + geo.hi[static_cast<std::size_t>(i)]);
      } else {
        const double u = 1.0 / geo.dim;
        for (auto& v : part) v = 0.9 * v + 0.1 * u;
      }
    }
    x.insert(x.end(), part.begin(), part.end());
  }
  return x;
}

// Central finite difference of each player's own payoff, the independent
// oracle for the gradient field.
void check_gradient_field(const GameSpec& game, int n_points, std::uint64_t seed) {
  SeededStream stream(seed, 0);
  const double h = 1e-5;
  for (int trial = 0; trial < n_points; ++trial) {
    const Vec x = interior_sample(game, stream);
    const Vec v = game.gradient_field(x);
    int off = 0;
    for (std::size_t player = 0; player < game.player_dims.size(); ++player) {
      for (int j = 0; j < game.player_dims[player]; ++j) {
        Vec xp = x, xm = x;
        xp[static_cast<std::size_t>(off + j)] += h;
        xm[static_cast<std::size_t>(off + j)] -= h;
        const double fd =
            (game.payoff(static_cast<int>(player), xp) - game.payoff(static_cast<int>(player), xm)) /
            (2.0 * h);
        const double vi = v[static_cast<std::size_t>(off + j)];
        CHECK(std::abs(fd - vi) <= 1e-6 * std::max(1.0, std::abs(vi)));
      }
      off += game.player_dims[player];
    }
  }
}

void check_monotonicity_class(const GameSpec& game, int n_pairs, std::uint64_t seed) {
  SeededStream stream(seed, 1);
  for (int trial = 0; trial < n_pairs; ++trial) {
    const Vec x = interior_sample(game, stream);
    const Vec xp = interior_sample(game, stream);
    const double gap = monotonicity_gap(game, x, xp);
    if (game.monotonicity.kind == MonotonicityClass::null) {
      CHECK(std::abs(gap) <= 1e-12);
    } else if (game.monotonicity.kind == MonotonicityClass::strong) {
      const double d2 = dot(sub(xp, x), sub(xp, x));
      CHECK(gap <= -game.monotonicity.beta * d2 + 1e-9);
    }
  }
}

}  // namespace

TEST_CASE("bilinear saddle: field, equilibrium, null monotonicity") {
  const GameSpec g = make_bilinear_saddle();
  const Vec v = g.gradient_field({1.0, 2.0});
  CHECK(v[0] == doctest::Approx(-2.0));
  CHECK(v[1] == doctest::Approx(1.0));
  const Vec v0 = g.gradient_field({0.0, 0.0});
  CHECK(v0[0] == 0.0);
  CHECK(v0[1] == 0.0);
  CHECK(monotonicity_gap(g, {1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-14));
  check_gradient_field(g, 100, 11);
  check_monotonicity_class(g, 1000, 12);
  CHECK(g.smoothness == doctest::Approx(1.0));
}

TEST_CASE("quadratic saddle: field, strong monotonicity with beta = 1") {
  const GameSpec g = make_quadratic_saddle();
  const Vec v = g.gradient_field({1.0, 2.0});
  CHECK(v[0] == doctest::Approx(-1.0));
  CHECK(v[1] == doctest::Approx(-2.0));
  CHECK(monotonicity_gap(g, {0.0, 0.0}, {1.0, 1.0}) == doctest::Approx(-2.0));
  CHECK(monotonicity_gap(g, {1.0, 0.0}, {0.0, 0.0}) == doctest::Approx(-1.0));
  check_gradient_field(g, 100, 21);
  check_monotonicity_class(g, 1000, 22);
  // Adversarial pair along the weakest eigendirection attains beta.
  const double gap = monotonicity_gap(g, {0.0, 0.0}, {1.0, 0.0});
  CHECK(-gap / 1.0 == doctest::Approx(g.monotonicity.beta).epsilon(0.01));
  CHECK(g.smoothness == doctest::Approx(1.0));
}

TEST_CASE("unit-square min-max game: equilibrium 20/33, 14/33 and beta = 2") {
  const GameSpec g = make_unit_square_minmax();
  CHECK(g.equilibrium[0] == doctest::Approx(20.0 / 33.0).epsilon(1e-15));
  CHECK(g.equilibrium[1] == doctest::Approx(14.0 / 33.0).epsilon(1e-15));

  // Independent 2x2 solve of the stationarity system
  //   -2 x1 + 0.5 x2 = -1,  -0.5 x1 - 4 x2 = -2  (Cramer's rule).
  const double det = (-2.0) * (-4.0) - (0.5) * (-0.5);
  const double x1 = ((-1.0) * (-4.0) - 0.5 * (-2.0)) / det;
  const double x2 = ((-2.0) * (-2.0) - (-1.0) * (-0.5)) / det;
  CHECK(x1 == doctest::Approx(20.0 / 33.0).epsilon(1e-14));
  CHECK(x2 == doctest::Approx(14.0 / 33.0).epsilon(1e-14));

  const Vec v = g.gradient_field(g.equilibrium);
  CHECK(norm_l2(v) <= 1e-12);

  check_gradient_field(g, 100, 31);
  check_monotonicity_class(g, 1000, 32);

  // Symmetrized Jacobian is diag(-2, -4): beta is its smallest magnitude.
  const auto ev = symmetric_eigenvalues({{-2.0, 0.0}, {0.0, -4.0}});
  CHECK(ev[0] == doctest::Approx(-4.0));
  CHECK(ev[1] == doctest::Approx(-2.0));
  CHECK(g.monotonicity.beta == doctest::Approx(2.0));

  // Weakest direction (1, 0) attains the modulus within 1%.
  const Vec a = g.equilibrium;
  const Vec b = {g.equilibrium[0] + 0.1, g.equilibrium[1]};
  const double gap = monotonicity_gap(g, a, b);
  CHECK(-gap / 0.01 == doctest::Approx(2.0).epsilon(0.01));

  // Largest singular value of the constant Jacobian, closed form.
  const double tr = 4.25 + 16.25, det2 = 4.25 * 16.25 - 1.0;
  const double lmax = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det2));
  CHECK(g.smoothness == doctest::Approx(std::sqrt(lmax)).epsilon(1e-12));
}

TEST_CASE("matching pennies: uniform equilibrium, null monotone") {
  const GameSpec g = make_matching_pennies();
  const Vec v = g.gradient_field(g.equilibrium);
  for (double vi : v) CHECK(std::abs(vi) <= 1e-15);
  CHECK(g.feasible(g.equilibrium));
  check_gradient_field(g, 100, 41);
  check_monotonicity_class(g, 1000, 42);
  CHECK(g.smoothness == doctest::Approx(2.0));

  SeededStream stream(43, 0);
  for (int i = 0; i < 2; ++i) {
    const Vec x = g.sample_feasible(stream);
    const Vec xp = g.sample_feasible(stream);
    CHECK(std::abs(monotonicity_gap(g, x, xp)) <= 1e-12);
  }
}

TEST_CASE("cournot: field values, eigenvalues, equilibria") {
  SUBCASE("field at zero supply") {
    const GameSpec g = make_cournot(3, 10.0, 1.0, {1.0, 2.0, 3.0});
    const Vec v = g.gradient_field({0.0, 0.0, 0.0});
    CHECK(v[0] == doctest::Approx(9.0));
    CHECK(v[1] == doctest::Approx(8.0));
    CHECK(v[2] == doctest::Approx(7.0));
    check_gradient_field(g, 100, 51);
    check_monotonicity_class(g, 1000, 52);
  }

  SUBCASE("symmetrized Jacobian eigenvalues -b (N-1 times) and -(N+1) b") {
    for (int n : {2, 3, 5}) {
      const double b = 1.5;
      const GameSpec g = make_cournot(n, 20.0, b, Vec(static_cast<std::size_t>(n), 1.0));
      const auto ev = symmetric_eigenvalues(g.jacobian);
      CHECK(ev.front() == doctest::Approx(-(n + 1) * b).epsilon(1e-9));
      for (std::size_t i = 1; i < ev.size(); ++i)
        CHECK(ev[i] == doctest::Approx(-b).epsilon(1e-9));
      CHECK(g.smoothness == doctest::Approx((n + 1) * b));
      // Weakest direction: any difference vector orthogonal to the diagonal.
      Vec x(static_cast<std::size_t>(n), 1.0), xp(static_cast<std::size_t>(n), 1.0);
      xp[0] += 0.1;
      xp[1] -= 0.1;
      const double gap = monotonicity_gap(g, x, xp);
      CHECK(-gap / 0.02 == doctest::Approx(b).epsilon(0.01));
    }
    // The N=3, b=1 instance quoted directly: eigenvalues {-1 (x2), -4}.
    const GameSpec g = make_cournot(3, 10.0, 1.0, Vec(3, 0.0));
    const auto ev = symmetric_eigenvalues(g.jacobian);
    CHECK(ev[0] == doctest::Approx(-4.0).epsilon(1e-9));
    CHECK(ev[1] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(ev[2] == doctest::Approx(-1.0).epsilon(1e-9));
  }

  SUBCASE("interior equilibrium from the linear solve") {
    const GameSpec g = make_cournot(2, 3.0, 1.0, {1.0, 1.0}, {10.0, 10.0});
    CHECK(g.equilibrium[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(g.equilibrium[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(norm_linf(g.gradient_field(g.equilibrium)) <= 1e-12);
  }

  SUBCASE("binding budgets resolve to the corner") {
    const GameSpec g = make_cournot(2, 100.0, 1.0, {0.0, 0.0}, {1.0, 1.0});
    CHECK(g.equilibrium[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(g.equilibrium[1] == doctest::Approx(1.0).epsilon(1e-10));
    // Variational inequality against random feasible points.
    SeededStream stream(53, 0);
    const Vec v = g.gradient_field(g.equilibrium);
    for (int i = 0; i < 1000; ++i) {
      const Vec x = g.sample_feasible(stream);
      CHECK(dot(v, sub(x, g.equilibrium)) <= 1e-9);
    }
  }

  SUBCASE("symmetric five-player instance") {
    const GameSpec g = make_cournot(5, 6.0, 1.0, Vec(5, 0.0));
    for (double xi : g.equilibrium) CHECK(xi == doctest::Approx(1.0).epsilon(1e-12));
    SeededStream stream(54, 0);
    const Vec v = g.gradient_field(g.equilibrium);
    for (int i = 0; i < 1000; ++i) {
      const Vec x = g.sample_feasible(stream);
      CHECK(dot(v, sub(x, g.equilibrium)) <= 1e-9);
    }
  }

  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(make_cournot(1, 3.0, 1.0, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_cournot(2, 3.0, 0.0, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_cournot(2, 3.0, -1.0, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_cournot(2, 3.0, 1.0, {5.0, 0.0}), std::invalid_argument);
  }
}

TEST_CASE("monotonicity gap edge cases") {
  const GameSpec g = make_unit_square_minmax();
  CHECK(monotonicity_gap(g, {0.25, 0.75}, {0.25, 0.75}) == 0.0);
  CHECK_THROWS_AS(monotonicity_gap(g, {1.5, 0.5}, {0.5, 0.5}), std::domain_error);
  CHECK_THROWS_AS(monotonicity_gap(g, {0.5, 0.5}, {0.5, -0.1}), std::domain_error);
}

TEST_CASE("equilibria are stationary for every catalog game") {
  for (const GameSpec& g :
       {make_bilinear_saddle(), make_quadratic_saddle(), make_unit_square_minmax(),
        make_matching_pennies()}) {
    CHECK(norm_l2(g.gradient_field(g.equilibrium)) <= 1e-12);
  }
}
