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

#ifndef GAMEDYN_STATS_HPP
#define GAMEDYN_STATS_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gamedyn/ftrl.hpp"
#include "gamedyn/game.hpp"
#include "gamedyn/linalg.hpp"
#include "gamedyn/regularizer.hpp"
#include "gamedyn/sde.hpp"

namespace gamedyn {

// Outcome of a first-passage search along one path. Censored means the event
// never triggered within the simulated horizon; that is a value, not an
// error, and it is the finite-sample face of an infinite expected time.
struct HitResult {
  double value = 0.0;
  bool censored = true;
  double horizon = 0.0;

  static HitResult hit(double t, double horizon) { return {t, false, horizon}; }
  static HitResult censor(double horizon) { return {0.0, true, horizon}; }
};

struct HittingTimeStats {
  double mean = 0.0;
  double stderr_ = 0.0;
  double censor_fraction = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_uncensored = 0;
  bool reliable = false;  // mean is reported only when censoring < 50%

  static HittingTimeStats from(const std::vector<HitResult>& results) {
    HittingTimeStats s;
    s.n_paths = results.size();
    std::vector<double> values;
    for (const auto& r : results)
      if (!r.censored) values.push_back(r.value);
    s.n_uncensored = values.size();
    s.censor_fraction =
        s.n_paths == 0 ? 0.0
                       : static_cast<double>(s.n_paths - s.n_uncensored) /
                             static_cast<double>(s.n_paths);
    s.reliable = s.n_paths > 0 && s.censor_fraction < 0.5;
    if (!values.empty()) {
      const MeanStderr m = mean_stderr(values);
      s.mean = m.mean;
      s.stderr_ = m.stderr_;
    }
    return s;
  }
};

// Default ball norm: L1 whenever any player lives on a simplex (matching the
// entropic regularizer's norm), L2 otherwise.
inline Norm default_ball_norm(const GameSpec& game) {
  for (const auto& g : game.geometry)
    if (g.kind == GeometryKind::simplex) return Norm::L1;
  return Norm::L2;
}

// First recorded time (or step) at which the action profile enters the ball
// of radius r around the center.
inline HitResult hitting_time(const Trajectory& traj, const RegularizerSet& regs,
                              const Vec& center, double r, Norm ball_norm = Norm::L2) {
  if (!(r > 0.0)) throw std::domain_error("hitting_time: radius must be positive");
  const double horizon = traj.times.empty() ? 0.0 : traj.times.back();
  Vec x(center.size());
  for (std::size_t k = 0; k < traj.scores.size(); ++k) {
    regs.mirror_into(traj.scores[k], x);
    if (dist(x, center, ball_norm) <= r) return HitResult::hit(traj.times[k], horizon);
  }
  return HitResult::censor(horizon);
}

// First recorded times at which the Fenchel energy F(p, y_t) drops below
// F_0 - eps (first) and rises above F_0 + eps (second).
inline std::pair<HitResult, HitResult> fenchel_crossing_times(const Trajectory& traj,
                                                              const RegularizerSet& regs,
                                                              const Vec& p, double eps) {
  if (!(eps > 0.0)) throw std::domain_error("fenchel_crossing_times: eps must be positive");
  if (traj.scores.empty()) throw std::invalid_argument("fenchel_crossing_times: empty trajectory");
  const double horizon = traj.times.back();
  const double f0 = regs.fenchel(p, traj.scores[0]);
  HitResult down = HitResult::censor(horizon);
  HitResult up = HitResult::censor(horizon);
  for (std::size_t k = 0; k < traj.scores.size(); ++k) {
    const double f = regs.fenchel(p, traj.scores[k]);
    if (down.censored && f <= f0 - eps) down = HitResult::hit(traj.times[k], horizon);
    if (up.censored && f >= f0 + eps) up = HitResult::hit(traj.times[k], horizon);
    if (!down.censored && !up.censored) break;
  }
  return {down, up};
}

// Empirical occupation of balls around a center: fraction of recorded time
// spent within each radius, per path, then averaged with a Monte Carlo
// standard error across paths.
struct OccupationStats {
  std::vector<double> radii;
  std::vector<double> fraction;
  std::vector<double> stderr_;
  std::size_t n_paths = 0;
};

inline OccupationStats occupation_measure(const std::vector<Trajectory>& ensemble,
                                          const RegularizerSet& regs, const Vec& center,
                                          const std::vector<double>& radii,
                                          Norm ball_norm = Norm::L2, double from_time = 0.0) {
  if (ensemble.empty()) throw std::invalid_argument("occupation_measure: empty ensemble");
  OccupationStats out;
  out.radii = radii;
  out.n_paths = ensemble.size();
  std::vector<std::vector<double>> per_path(radii.size());
  Vec x(center.size());
  for (const auto& traj : ensemble) {
    std::vector<long> counts(radii.size(), 0);
    long total = 0;
    for (std::size_t k = 0; k < traj.scores.size(); ++k) {
      if (traj.times[k] < from_time) continue;
      regs.mirror_into(traj.scores[k], x);
      const double d = dist(x, center, ball_norm);
      ++total;
      for (std::size_t r = 0; r < radii.size(); ++r)
        if (d <= radii[r]) ++counts[r];
    }
    if (total == 0) throw std::invalid_argument("occupation_measure: window contains no samples");
    for (std::size_t r = 0; r < radii.size(); ++r)
      per_path[r].push_back(static_cast<double>(counts[r]) / static_cast<double>(total));
  }
  for (std::size_t r = 0; r < radii.size(); ++r) {
    const MeanStderr m = mean_stderr(per_path[r]);
    out.fraction.push_back(m.mean);
    out.stderr_.push_back(m.stderr_);
  }
  return out;
}

// Uniform 2-d histogram over [lo0,hi0] x [lo1,hi1]; cell fractions sum to 1.
class GridHistogram {
 public:
  GridHistogram(int bins, double lo0, double hi0, double lo1, double hi1)
      : bins_(bins), lo0_(lo0), hi0_(hi0), lo1_(lo1), hi1_(hi1),
        counts_(static_cast<std::size_t>(bins) * static_cast<std::size_t>(bins), 0) {
    if (bins < 1) throw std::invalid_argument("GridHistogram: need at least one bin");
  }

  void add(double a, double b) {
    const int i = cell_index(a, lo0_, hi0_);
    const int j = cell_index(b, lo1_, hi1_);
    ++counts_[static_cast<std::size_t>(i) * static_cast<std::size_t>(bins_) +
              static_cast<std::size_t>(j)];
    ++total_;
  }

  int bins() const { return bins_; }
  long total() const { return total_; }
  long count(int i, int j) const {
    return counts_[static_cast<std::size_t>(i) * static_cast<std::size_t>(bins_) +
                   static_cast<std::size_t>(j)];
  }
  double fraction(int i, int j) const {
    return total_ == 0 ? 0.0 : static_cast<double>(count(i, j)) / static_cast<double>(total_);
  }
  double cell_center0(int i) const { return lo0_ + (i + 0.5) * (hi0_ - lo0_) / bins_; }
  double cell_center1(int j) const { return lo1_ + (j + 0.5) * (hi1_ - lo1_) / bins_; }

  void merge(const GridHistogram& other) {
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
    total_ += other.total_;
  }

 private:
  int cell_index(double v, double lo, double hi) const {
    const double t = (v - lo) / (hi - lo);
    int i = static_cast<int>(t * bins_);
    if (i < 0) i = 0;
    if (i >= bins_) i = bins_ - 1;
    return i;
  }

  int bins_;
  double lo0_, hi0_, lo1_, hi1_;
  std::vector<long> counts_;
  long total_ = 0;
};

// ---------------------------------------------------------------------------
// Closed-form bound calculators. Each is pure and total on its stated domain
// and throws std::domain_error outside it.
// ---------------------------------------------------------------------------

// Mean hitting time of the noisy quadratic saddle:
//   E[tau_r] <= (||x0||^2 - r^2) / (2 (r^2 - sigma^2)),  sigma < r < ||x0||.
inline double bound_hit_quadratic(double x0_norm, double r, double sigma) {
  if (!(sigma < r)) throw std::domain_error("bound_hit_quadratic: need sigma < r");
  if (!(r < x0_norm)) throw std::domain_error("bound_hit_quadratic: need r < ||x0||");
  return 0.5 * (x0_norm * x0_norm - r * r) / (r * r - sigma * sigma);
}

// Noise radius and hitting bound for strongly monotone continuous dynamics:
//   r_sigma = sigma_max / sqrt(2 K beta),
//   E[tau_r] <= (F0 / beta) / (r^2 - r_sigma^2) for r > r_sigma.
struct StrongContBound {
  double bound = 0.0;
  double r_sigma = 0.0;
};

inline double noise_radius_cont(double beta, double K, double sigma_max) {
  if (!(beta > 0.0) || !(K > 0.0)) throw std::domain_error("noise_radius_cont: need beta, K > 0");
  return sigma_max / std::sqrt(2.0 * K * beta);
}

inline StrongContBound bound_hit_strong_cont(double F0, double beta, double K, double sigma_max,
                                             double r) {
  if (F0 < 0.0) throw std::domain_error("bound_hit_strong_cont: F0 must be >= 0");
  StrongContBound out;
  out.r_sigma = noise_radius_cont(beta, K, sigma_max);
  if (!(r > out.r_sigma))
    throw std::domain_error("bound_hit_strong_cont: bound vacuous below noise radius");
  out.bound = (F0 / beta) / (r * r - out.r_sigma * out.r_sigma);
  return out;
}

// Asymptotic ball occupation lower bound 1 - r_sigma^2 / r^2, r > r_sigma.
inline double bound_occupation_cont(double r, double r_sigma) {
  if (!(r > r_sigma)) throw std::domain_error("bound_occupation_cont: need r > r_sigma");
  return 1.0 - (r_sigma * r_sigma) / (r * r);
}

// Null-monotone upward crossing: E[tau_eps^+] <= 2 eps / (kappa sigma_min^2),
// with kappa the minimum mirror-Jacobian trace over the energy sublevel set
// (equal to the dimension for the unconstrained Euclidean mirror map).
inline double bound_hit_null_cont_plus(double eps, double kappa, double sigma_min) {
  if (!(eps > 0.0) || !(kappa > 0.0) || !(sigma_min > 0.0))
    throw std::domain_error("bound_hit_null_cont_plus: inputs must be positive");
  return 2.0 * eps / (kappa * sigma_min * sigma_min);
}

// Discrete-time analogue: r_sigma = sqrt(gamma (sigma^2 + L^2) / (beta K))
// and E[tau_r] <= {F0 | F0 + beta gamma r^2} / (beta gamma (r^2 - r_sigma^2)),
// the branch depending on whether the run started inside the ball.
struct StrongDiscBound {
  double bound = 0.0;
  double r_sigma = 0.0;
};

inline double noise_radius_disc(double gamma, double sigma_sq, double L, double beta, double K) {
  if (!(gamma > 0.0) || !(beta > 0.0) || !(K > 0.0) || sigma_sq < 0.0 || L < 0.0)
    throw std::domain_error("noise_radius_disc: invalid parameters");
  return std::sqrt(gamma * (sigma_sq + L * L) / (beta * K));
}

inline StrongDiscBound bound_stop_strong_disc(double F0, double beta, double K, double gamma,
                                              double sigma_sq, double L, double r,
                                              bool started_inside) {
  if (F0 < 0.0) throw std::domain_error("bound_stop_strong_disc: F0 must be >= 0");
  StrongDiscBound out;
  out.r_sigma = noise_radius_disc(gamma, sigma_sq, L, beta, K);
  if (!(r > out.r_sigma))
    throw std::domain_error("bound_stop_strong_disc: bound vacuous below noise radius");
  const double numerator = started_inside ? F0 + beta * gamma * r * r : F0;
  out.bound = numerator / (beta * gamma * (r * r - out.r_sigma * out.r_sigma));
  return out;
}

// Long-run mean occupation lower bound for the discrete dynamics.
inline double bound_occupation_disc(double r, double r_sigma) {
  if (!(r > r_sigma)) throw std::domain_error("bound_occupation_disc: need r > r_sigma");
  return 1.0 - (r_sigma * r_sigma) / (r * r);
}

// ---------------------------------------------------------------------------
// Slope estimation
// ---------------------------------------------------------------------------

struct SlopeEstimate {
  double slope = 0.0;
  double stderr_ = 0.0;
};

// Least-squares slope of the ensemble-mean curve against the (shared)
// abscissa. OLS is linear in the ordinates, so the slope of the mean curve
// equals the mean of per-path slopes; the spread of the per-path slopes
// gives the Monte Carlo standard error.
inline SlopeEstimate escape_slope(const std::vector<double>& ts,
                                  const std::vector<std::vector<double>>& per_path_curves) {
  if (per_path_curves.empty()) throw std::invalid_argument("escape_slope: empty ensemble");
  std::vector<double> slopes;
  slopes.reserve(per_path_curves.size());
  for (const auto& curve : per_path_curves) slopes.push_back(ols_fit(ts, curve).slope);
  const MeanStderr m = mean_stderr(slopes);
  return {m.mean, m.stderr_};
}

// Minimum mirror-Jacobian trace observed over the recorded energy sublevel
// set {F(p, y) <= level}; the kappa entering the null-monotone bound.
inline double kappa_estimate(const std::vector<Trajectory>& ensemble, const RegularizerSet& regs,
                             const Vec& p, double level) {
  double kappa = std::numeric_limits<double>::infinity();
  for (const auto& traj : ensemble)
    for (const auto& y : traj.scores)
      if (regs.fenchel(p, y) <= level) kappa = std::min(kappa, regs.jac_trace(y));
  if (!std::isfinite(kappa))
    throw std::runtime_error("kappa_estimate: no recorded point inside the sublevel set");
  return kappa;
}

}  // namespace gamedyn

#endif  // GAMEDYN_STATS_HPP
