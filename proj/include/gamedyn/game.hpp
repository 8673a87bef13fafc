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

#ifndef GAMEDYN_GAME_HPP
#define GAMEDYN_GAME_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gamedyn/geometry.hpp"
#include "gamedyn/linalg.hpp"
#include "gamedyn/rng.hpp"

namespace gamedyn {

enum class MonotonicityClass { null, merely, strong };

struct Monotonicity {
  MonotonicityClass kind = MonotonicityClass::merely;
  double beta = 0.0;  // modulus, meaningful for strong

  static Monotonicity null_monotone() { return {MonotonicityClass::null, 0.0}; }
  static Monotonicity strong(double beta) { return {MonotonicityClass::strong, beta}; }
};

struct CournotParams {
  int n_players = 0;
  double a = 0.0;
  double b = 0.0;
  Vec costs;
  Vec budgets;
};

// A concave game instance: per-player action geometry, payoffs, the joint
// gradient field v(x) = (v_1(x), ..., v_N(x)), a known equilibrium, and the
// certified monotonicity class.
struct GameSpec {
  std::string id;
  std::vector<int> player_dims;
  std::vector<Geometry> geometry;  // one per player
  std::function<double(int, const Vec&)> payoff;
  std::function<Vec(const Vec&)> gradient_field;
  Vec equilibrium;
  Monotonicity monotonicity;
  Mat jacobian;       // constant Jacobian of v (all catalog fields are affine)
  double smoothness = 0.0;  // Lipschitz modulus L of v
  std::optional<CournotParams> cournot;

  int dim() const {
    int d = 0;
    for (int pd : player_dims) d += pd;
    return d;
  }

  int player_offset(int player) const {
    int off = 0;
    for (int i = 0; i < player; ++i) off += player_dims[static_cast<std::size_t>(i)];
    return off;
  }

  bool feasible(const Vec& x, double tol = kFeasTol) const {
    if (static_cast<int>(x.size()) != dim()) return false;
    int off = 0;
    for (const auto& g : geometry) {
      if (!g.contains(x.data() + off, tol)) return false;
      off += g.dim;
    }
    return true;
  }

  bool bounded() const {
    for (const auto& g : geometry)
      if (!g.bounded()) return false;
    return true;
  }

  Vec sample_feasible(SeededStream& stream) const {
    Vec x;
    x.reserve(static_cast<std::size_t>(dim()));
    for (const auto& g : geometry) {
      const Vec part = g.sample_uniform(stream);
      x.insert(x.end(), part.begin(), part.end());
    }
    return x;
  }
};

// Pairwise monotonicity bracket <v(x') - v(x), x' - x>.
inline double monotonicity_gap(const GameSpec& game, const Vec& x, const Vec& xp) {
  if (!game.feasible(x) || !game.feasible(xp))
    throw std::domain_error("monotonicity_gap: infeasible input point");
  const Vec vx = game.gradient_field(x);
  const Vec vxp = game.gradient_field(xp);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (vxp[i] - vx[i]) * (xp[i] - x[i]);
  return s;
}

namespace detail {

inline double largest_singular_value(const Mat& j) {
  const Mat jtj = mat_mul(transpose(j), j);
  const auto ev = symmetric_eigenvalues(jtj);
  return std::sqrt(std::max(0.0, ev.back()));
}

}  // namespace detail

// Two-player min-max game on R^2 with u_1 = -u_2 = -theta * phi.
// Field v(theta, phi) = (-phi, theta); null-monotone, equilibrium at 0.
inline GameSpec make_bilinear_saddle() {
  GameSpec g;
  g.id = "bilinear";
  g.player_dims = {1, 1};
  g.geometry = {Geometry::full_space(1), Geometry::full_space(1)};
  g.payoff = [](int player, const Vec& x) {
    const double f = -x[0] * x[1];
    return player == 0 ? f : -f;
  };
  g.gradient_field = [](const Vec& x) { return Vec{-x[1], x[0]}; };
  g.equilibrium = {0.0, 0.0};
  g.monotonicity = Monotonicity::null_monotone();
  g.jacobian = {{0.0, -1.0}, {1.0, 0.0}};
  g.smoothness = 1.0;
  return g;
}

// Two-player min-max game on R^2 with u_1 = -u_2 = phi^2/2 - theta^2/2.
// Field v(theta, phi) = -(theta, phi); 1-strongly monotone.
inline GameSpec make_quadratic_saddle() {
  GameSpec g;
  g.id = "quadratic";
  g.player_dims = {1, 1};
  g.geometry = {Geometry::full_space(1), Geometry::full_space(1)};
  g.payoff = [](int player, const Vec& x) {
    const double f = 0.5 * x[1] * x[1] - 0.5 * x[0] * x[0];
    return player == 0 ? f : -f;
  };
  g.gradient_field = [](const Vec& x) { return Vec{-x[0], -x[1]}; };
  g.equilibrium = {0.0, 0.0};
  g.monotonicity = Monotonicity::strong(1.0);
  g.jacobian = {{-1.0, 0.0}, {0.0, -1.0}};
  g.smoothness = 1.0;
  return g;
}

// Min-max game on the unit square with
//   f(x1, x2) = -(x1 - 1/2)^2 + x1 x2 / 2 + 2 (x2 - 1/2)^2,
// player 1 maximizing f, player 2 maximizing -f. The unique equilibrium is
// (20/33, 14/33) and the symmetrized Jacobian diag(-2, -4) gives beta = 2.
// The config-facing id "appendixE" is part of the CLI contract.
inline GameSpec make_unit_square_minmax() {
  GameSpec g;
  g.id = "appendixE";
  g.player_dims = {1, 1};
  g.geometry = {Geometry::box(1, 0.0, 1.0), Geometry::box(1, 0.0, 1.0)};
  g.payoff = [](int player, const Vec& x) {
    const double f = -(x[0] - 0.5) * (x[0] - 0.5) + 0.5 * x[0] * x[1] +
                     2.0 * (x[1] - 0.5) * (x[1] - 0.5);
    return player == 0 ? f : -f;
  };
  g.gradient_field = [](const Vec& x) {
    return Vec{-2.0 * (x[0] - 0.5) + 0.5 * x[1], -0.5 * x[0] - 4.0 * (x[1] - 0.5)};
  };
  g.equilibrium = {20.0 / 33.0, 14.0 / 33.0};
  g.monotonicity = Monotonicity::strong(2.0);
  g.jacobian = {{-2.0, 0.5}, {-0.5, -4.0}};
  g.smoothness = detail::largest_singular_value(g.jacobian);
  return g;
}

// Mixed extension of matching pennies on the product of two 2-simplexes,
// payoff matrix A = [[1, -1], [-1, 1]] for the matching player.
inline GameSpec make_matching_pennies() {
  GameSpec g;
  g.id = "matching_pennies";
  g.player_dims = {2, 2};
  g.geometry = {Geometry::simplex(2), Geometry::simplex(2)};
  g.payoff = [](int player, const Vec& x) {
    // u_1 = x1' A x2 with A = [[1,-1],[-1,1]].
    const double u1 = x[0] * (x[2] - x[3]) + x[1] * (x[3] - x[2]);
    return player == 0 ? u1 : -u1;
  };
  g.gradient_field = [](const Vec& x) {
    return Vec{x[2] - x[3], x[3] - x[2], x[1] - x[0], x[0] - x[1]};
  };
  g.equilibrium = {0.5, 0.5, 0.5, 0.5};
  g.monotonicity = Monotonicity::null_monotone();
  g.jacobian = {{0.0, 0.0, 1.0, -1.0},
                {0.0, 0.0, -1.0, 1.0},
                {-1.0, 1.0, 0.0, 0.0},
                {1.0, -1.0, 0.0, 0.0}};
  g.smoothness = 2.0;
  return g;
}

Vec solve_cournot_equilibrium(const GameSpec& game);

// Linear Cournot oligopoly: price P(x) = a - b sum_j x_j, utilities
// u_i = x_i P(x) - c_i x_i on [0, B_i]. b-strongly monotone.
inline GameSpec make_cournot(int n_players, double a, double b, Vec costs, Vec budgets) {
  if (n_players < 2) throw std::invalid_argument("make_cournot: need at least 2 players");
  if (b <= 0.0) throw std::invalid_argument("make_cournot: b must be positive");
  if (static_cast<int>(costs.size()) != n_players ||
      static_cast<int>(budgets.size()) != n_players)
    throw std::invalid_argument("make_cournot: costs/budgets must have one entry per player");
  for (int i = 0; i < n_players; ++i) {
    if (budgets[static_cast<std::size_t>(i)] <= 0.0)
      throw std::invalid_argument("make_cournot: budgets must be positive");
    if (costs[static_cast<std::size_t>(i)] < 0.0 || costs[static_cast<std::size_t>(i)] >= a)
      throw std::invalid_argument("make_cournot: costs must satisfy 0 <= c_i < a");
  }

  GameSpec g;
  g.id = "cournot";
  g.player_dims.assign(static_cast<std::size_t>(n_players), 1);
  for (int i = 0; i < n_players; ++i)
    g.geometry.push_back(Geometry::box(1, 0.0, budgets[static_cast<std::size_t>(i)]));
  CournotParams params{n_players, a, b, costs, budgets};
  g.cournot = params;
  g.payoff = [params](int player, const Vec& x) {
    double total = 0.0;
    for (double xi : x) total += xi;
    const double price = params.a - params.b * total;
    return x[static_cast<std::size_t>(player)] *
           (price - params.costs[static_cast<std::size_t>(player)]);
  };
  g.gradient_field = [params](const Vec& x) {
    double total = 0.0;
    for (double xi : x) total += xi;
    Vec v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      v[i] = params.a - params.b * total - params.costs[i] - params.b * x[i];
    return v;
  };
  g.monotonicity = Monotonicity::strong(b);
  g.jacobian.assign(static_cast<std::size_t>(n_players), Vec(static_cast<std::size_t>(n_players), -b));
  for (int i = 0; i < n_players; ++i)
    g.jacobian[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = -2.0 * b;
  g.smoothness = (n_players + 1) * b;
  g.equilibrium = solve_cournot_equilibrium(g);
  return g;
}

// Defaults budgets to the non-binding 2a/b so the interior closed form applies.
inline GameSpec make_cournot(int n_players, double a, double b, Vec costs) {
  Vec budgets(static_cast<std::size_t>(n_players), 2.0 * a / b);
  return make_cournot(n_players, a, b, std::move(costs), std::move(budgets));
}

// Equilibrium of a Cournot instance: interior closed form when the budgets
// are slack, otherwise a projected fixed-point iteration on the stationarity
// system (contraction step beta / L^2).
inline Vec solve_cournot_equilibrium(const GameSpec& game) {
  if (!game.cournot) throw std::invalid_argument("solve_cournot_equilibrium: not a Cournot game");
  const CournotParams& p = *game.cournot;
  const int n = p.n_players;

  // Interior stationary point: x_i = (a - c_i)/b - S with S determined by
  // summing over players.
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += (p.a - p.costs[static_cast<std::size_t>(i)]) / p.b;
  s /= (n + 1);
  Vec x(static_cast<std::size_t>(n));
  bool interior = true;
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = (p.a - p.costs[static_cast<std::size_t>(i)]) / p.b - s;
    if (x[static_cast<std::size_t>(i)] < 0.0 ||
        x[static_cast<std::size_t>(i)] > p.budgets[static_cast<std::size_t>(i)])
      interior = false;
  }
  if (interior) return x;

  // Projected fixed point x <- clamp(x + eta v(x)).
  const double eta = 1.0 / ((n + 1.0) * (n + 1.0) * p.b);
  for (int i = 0; i < n; ++i)
    x[static_cast<std::size_t>(i)] = std::min(std::max(x[static_cast<std::size_t>(i)], 0.0),
                                              p.budgets[static_cast<std::size_t>(i)]);
  const double tol = 1e-10;
  for (long iter = 0; iter < 100000; ++iter) {
    const Vec v = game.gradient_field(x);
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      const std::size_t k = static_cast<std::size_t>(i);
      double xi = x[k] + eta * v[k];
      xi = std::min(std::max(xi, 0.0), p.budgets[k]);
      delta = std::max(delta, std::abs(xi - x[k]));
      x[k] = xi;
    }
    if (delta < tol) return x;
  }
  throw std::runtime_error(
      "solve_cournot_equilibrium: fixed point did not converge; check parameters");
}

}  // namespace gamedyn

#endif  // GAMEDYN_GAME_HPP
