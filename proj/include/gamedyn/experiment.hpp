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

#ifndef GAMEDYN_EXPERIMENT_HPP
#define GAMEDYN_EXPERIMENT_HPP

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gamedyn/config.hpp"
#include "gamedyn/ftrl.hpp"
#include "gamedyn/game.hpp"
#include "gamedyn/noise.hpp"
#include "gamedyn/regularizer.hpp"
#include "gamedyn/sde.hpp"
#include "gamedyn/stats.hpp"

namespace gamedyn {

using json = nlohmann::json;

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {
      "simulate",          "occupancy-grid",    "final-distance-grid",
      "hitting-time-grid", "bounds-check",      "corner-concentration"};
  return kinds;
}

inline const std::vector<std::string>& game_ids() {
  static const std::vector<std::string> ids = {"bilinear", "quadratic", "appendixE",
                                               "matching_pennies", "cournot"};
  return ids;
}

inline const std::vector<std::string>& regularizer_ids() {
  static const std::vector<std::string> ids = {"euclidean", "euclidean_box", "entropic",
                                               "binary_entropy"};
  return ids;
}

// Fully parsed experiment description.
struct ExperimentConfig {
  std::string kind;
  std::string engine;  // "sde" or "ftrl"
  GameSpec game;
  RegularizerSet regs;
  NoiseSpec noise;
  SdeConfig sde;
  FtrlConfig ftrl;
  Vec sweep_gamma, sweep_sigma, sweep_r;
  double bounds_r = 0.0;
  double bounds_eps = 0.0;
  double occupation_start = -1.0;  // time (sde) or steps (ftrl); negative = default
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = "out";
  double budget = 1e8;
  int grid_bins = 20;
  double corner_tol = 0.1;
  bool per_path_csv = false;
  KeyValueConfig raw;
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "experiment",  "engine",          "seed",         "threads",      "budget",
      "game.id",     "game.N",          "game.a",       "game.b",       "game.c",
      "game.B",      "reg.id",          "noise.model",  "noise.sigma",  "noise.matrix",
      "noise.rows",  "sde.dt",          "sde.horizon",  "sde.record_stride",
      "sde.n_paths", "sde.y0",          "ftrl.step",    "ftrl.n_steps", "ftrl.n_runs",
      "ftrl.record_stride", "ftrl.init", "sweep.gamma", "sweep.sigma",  "sweep.r",
      "bounds.r",    "bounds.eps",      "bounds.occupation_start",      "out.dir",
      "out.per_path", "grid.bins",      "corner.tol"};
  return keys;
}

inline std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) s += ", ";
    s += items[i];
  }
  return s;
}

inline GameSpec game_from_config(const KeyValueConfig& cfg) {
  const std::string id = cfg.get_string("game.id");
  if (id == "bilinear") return make_bilinear_saddle();
  if (id == "quadratic") return make_quadratic_saddle();
  if (id == "appendixE") return make_unit_square_minmax();
  if (id == "matching_pennies") return make_matching_pennies();
  if (id == "cournot") {
    const int n = static_cast<int>(cfg.get_long("game.N", 2));
    const double a = cfg.get_double("game.a", 3.0);
    const double b = cfg.get_double("game.b", 1.0);
    Vec c = cfg.get_list("game.c", Vec(static_cast<std::size_t>(n), 0.0));
    if (cfg.has("game.B")) return make_cournot(n, a, b, std::move(c), cfg.get_list("game.B"));
    return make_cournot(n, a, b, std::move(c));
  }
  throw std::invalid_argument("game.id: unknown game '" + id + "'; valid ids: " +
                              join(game_ids()));
}

inline RegularizerKind regularizer_kind_from_id(const std::string& id) {
  if (id == "euclidean") return RegularizerKind::euclidean;
  if (id == "euclidean_box") return RegularizerKind::euclidean_box;
  if (id == "entropic") return RegularizerKind::entropic_simplex;
  if (id == "binary_entropy") return RegularizerKind::binary_entropy;
  throw std::invalid_argument("reg.id: unknown regularizer '" + id + "'; valid ids: " +
                              join(regularizer_ids()));
}

inline NoiseSpec noise_from_config(const KeyValueConfig& cfg, int state_dim) {
  const std::string model = cfg.get_string("noise.model", "isotropic");
  if (model == "isotropic") return NoiseSpec::isotropic(cfg.get_double("noise.sigma", 0.0));
  if (model == "matrix") {
    const Vec flat = cfg.get_list("noise.matrix");
    const int rows = static_cast<int>(cfg.get_long("noise.rows", state_dim));
    if (rows <= 0 || flat.empty() || flat.size() % static_cast<std::size_t>(rows) != 0)
      throw std::invalid_argument("noise.matrix: row-major list size must be a multiple of noise.rows");
    const std::size_t cols = flat.size() / static_cast<std::size_t>(rows);
    Mat m(static_cast<std::size_t>(rows), Vec(cols));
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < cols; ++j) m[i][j] = flat[i * cols + j];
    return NoiseSpec::constant_matrix(std::move(m));
  }
  throw std::invalid_argument("noise.model: unknown model '" + model +
                              "'; valid models: isotropic, matrix");
}

// Total simulation steps implied by the config; checked against the budget
// before any computation happens.
inline double estimated_steps(const ExperimentConfig& e) {
  const double cells =
      std::max<std::size_t>(1, e.sweep_gamma.empty() ? 1 : e.sweep_gamma.size()) *
      static_cast<double>(std::max<std::size_t>(1, e.sweep_sigma.empty() ? 1 : e.sweep_sigma.size()));
  if (e.engine == "sde")
    return static_cast<double>(e.sde.n_paths) * (e.sde.horizon / e.sde.dt) * cells;
  return static_cast<double>(e.ftrl.n_runs) * static_cast<double>(e.ftrl.n_steps) * cells;
}

}  // namespace detail

// SEED, THREADS, and OUT_DIR environment variables override the
// corresponding config keys. The raw config text (and hence the embedded
// hash) is untouched; the overrides steer behavior only.
inline void apply_env_overrides(KeyValueConfig& cfg) {
  if (const char* seed = std::getenv("SEED")) cfg.set("seed", seed);
  if (const char* threads = std::getenv("THREADS")) cfg.set("threads", threads);
  if (const char* out = std::getenv("OUT_DIR")) cfg.set("out.dir", out);
}

// Parses and cross-checks a raw config. Diagnostics are values; an empty
// list means the config is runnable.
inline std::vector<std::string> validate_config(const KeyValueConfig& cfg,
                                                ExperimentConfig* out = nullptr) {
  std::vector<std::string> diags;
  ExperimentConfig e;
  e.raw = cfg;

  for (const auto& [key, value] : cfg.values())
    if (!detail::known_keys().count(key)) diags.push_back(key + ": unknown key");

  e.kind = cfg.get_string("experiment");
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), e.kind) ==
      experiment_kinds().end())
    diags.push_back("experiment: unknown kind '" + e.kind + "'; valid kinds: " +
                    detail::join(experiment_kinds()));

  bool have_game = false;
  try {
    e.game = detail::game_from_config(cfg);
    have_game = true;
  } catch (const std::exception& ex) {
    diags.push_back(ex.what());
  }

  if (have_game) {
    try {
      const std::string reg_id = cfg.get_string("reg.id", "euclidean");
      e.regs = RegularizerSet::uniform(detail::regularizer_kind_from_id(reg_id), e.game);
    } catch (const std::exception& ex) {
      diags.push_back(std::string("reg.id: ") + ex.what());
    }
    try {
      e.noise = detail::noise_from_config(cfg, e.game.dim());
    } catch (const std::exception& ex) {
      diags.push_back(ex.what());
    }
  }

  e.engine = cfg.get_string("engine", e.kind == "simulate" || e.kind == "bounds-check"
                                          ? ""
                                          : "ftrl");
  if (e.engine.empty())
    diags.push_back("engine: required for '" + e.kind + "' (sde or ftrl)");
  else if (e.engine != "sde" && e.engine != "ftrl")
    diags.push_back("engine: unknown engine '" + e.engine + "'; valid engines: sde, ftrl");

  try {
    e.seed = cfg.get_u64("seed", 0);
  } catch (const std::exception& ex) {
    diags.push_back(ex.what());
  }
  try {
    e.threads = static_cast<int>(cfg.get_long("threads", 1));
    if (e.threads < 1) diags.push_back("threads: must be >= 1");
  } catch (const std::exception& ex) {
    diags.push_back(ex.what());
  }
  e.out_dir = cfg.get_string("out.dir", "out");

  try {
    e.budget = cfg.get_double("budget", 1e8);
    e.grid_bins = static_cast<int>(cfg.get_long("grid.bins", 20));
    e.corner_tol = cfg.get_double("corner.tol", 0.1);
    e.per_path_csv = cfg.get_bool("out.per_path", false);
    if (e.grid_bins < 2) diags.push_back("grid.bins: need at least 2 bins");
  } catch (const std::exception& ex) {
    diags.push_back(ex.what());
  }

  try {
    e.sde.dt = cfg.get_double("sde.dt", 1e-3);
    e.sde.horizon = cfg.get_double("sde.horizon", 1.0);
    e.sde.record_stride = cfg.get_long("sde.record_stride", 1);
    e.sde.n_paths = static_cast<int>(cfg.get_long("sde.n_paths", 1));
    e.sde.y0 = cfg.get_list("sde.y0", {});
    if (e.engine == "sde") e.sde.validate();
  } catch (const std::exception& ex) {
    diags.push_back(std::string("sde: ") + ex.what());
  }

  try {
    e.ftrl.step = cfg.get_double("ftrl.step", 0.1);
    e.ftrl.n_steps = cfg.get_long("ftrl.n_steps", 100);
    e.ftrl.n_runs = static_cast<int>(cfg.get_long("ftrl.n_runs", 1));
    e.ftrl.record_stride = cfg.get_long("ftrl.record_stride", 1);
    const std::string init = cfg.get_string("ftrl.init", "uniform-random-primal");
    if (init == "uniform-random-primal") {
      e.ftrl.init = FtrlConfig::Init::uniform_random_primal;
      if (have_game && !e.game.bounded() && e.engine == "ftrl")
        diags.push_back("ftrl.init: uniform-random-primal needs a bounded action space; "
                        "pass an explicit dual vector instead");
    } else {
      e.ftrl.init = FtrlConfig::Init::dual_vector;
      e.ftrl.y0 = cfg.get_list("ftrl.init");
    }
    if (e.engine == "ftrl") e.ftrl.validate();
  } catch (const std::exception& ex) {
    diags.push_back(std::string("ftrl: ") + ex.what());
  }

  e.sweep_gamma = cfg.has("sweep.gamma") ? cfg.get_list("sweep.gamma") : Vec{};
  e.sweep_sigma = cfg.has("sweep.sigma") ? cfg.get_list("sweep.sigma") : Vec{};
  e.sweep_r = cfg.has("sweep.r") ? cfg.get_list("sweep.r") : Vec{};
  for (double g : e.sweep_gamma)
    if (!(g > 0.0)) {
      diags.push_back("sweep.gamma: step sizes must be positive");
      break;
    }
  for (double s : e.sweep_sigma)
    if (s < 0.0) {
      diags.push_back("sweep.sigma: noise levels must be >= 0");
      break;
    }
  e.bounds_r = cfg.get_double("bounds.r", 0.0);
  e.bounds_eps = cfg.get_double("bounds.eps", 0.0);
  e.occupation_start = cfg.get_double("bounds.occupation_start", -1.0);

  if (e.kind == "bounds-check" && have_game) {
    if (e.game.monotonicity.kind == MonotonicityClass::strong) {
      const double beta = e.game.monotonicity.beta;
      const double K = e.regs.strong_convexity();
      double r_sigma = 0.0;
      if (e.engine == "sde") {
        r_sigma = noise_radius_cont(beta, K, std::sqrt(e.noise.sigma_max_sq(e.game.dim())));
      } else {
        r_sigma = noise_radius_disc(e.ftrl.step, e.noise.sigma_eff_sq(e.game.dim()),
                                    e.game.smoothness, beta, K);
      }
      if (!(e.bounds_r > r_sigma))
        diags.push_back("bounds.r: bound vacuous below the noise radius r_sigma = " +
                        std::to_string(r_sigma) + " (need r > r_sigma)");
    } else if (e.engine == "sde" && !(e.bounds_eps > 0.0)) {
      diags.push_back("bounds.eps: required and positive for null-monotone bounds checks");
    }
  }

  if ((e.kind == "final-distance-grid" || e.kind == "hitting-time-grid") &&
      (e.sweep_gamma.empty() || e.sweep_sigma.empty()))
    diags.push_back("sweep.gamma / sweep.sigma: grids need both sweep lists");
  if (e.kind == "hitting-time-grid" && e.sweep_r.empty())
    diags.push_back("sweep.r: hitting-time grids need a radius list");
  for (double r : e.sweep_r)
    if (!(r > 0.0)) diags.push_back("sweep.r: radii must be positive");
  if (e.kind == "corner-concentration" && have_game) {
    bool simplex = false;
    for (const auto& g : e.game.geometry) simplex |= g.kind == GeometryKind::simplex;
    if (!simplex)
      diags.push_back("experiment: corner-concentration needs a simplex-geometry game");
  }

  if (diags.empty()) {
    const double steps = detail::estimated_steps(e);
    if (steps > e.budget) {
      std::ostringstream msg;
      msg << "budget: configured sweep needs about " << steps << " steps, over the budget of "
          << e.budget << "; refusing before any computation";
      diags.push_back(msg.str());
    }
  }

  if (out && diags.empty()) *out = e;
  return diags;
}

// ---------------------------------------------------------------------------
// Output writing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

class OutputWriter {
 public:
  OutputWriter(const ExperimentConfig& e)
      : dir_(e.out_dir), hash_(to_hex(fnv1a64(e.raw.raw_text()))), seed_(e.seed) {
    std::filesystem::create_directories(dir_);
  }

  const std::string& hash() const { return hash_; }

  void write_csv(const std::string& name, const std::string& header,
                 const std::vector<std::string>& rows) {
    std::ofstream out(std::filesystem::path(dir_) / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + name);
    out << "# config_hash=" << hash_ << " seed=" << seed_ << "\n";
    out << header << "\n";
    for (const auto& row : rows) out << row << "\n";
    files_.push_back(name);
  }

  void write_summary(json summary) {
    summary["config_hash"] = hash_;
    summary["seed"] = seed_;
    std::sort(files_.begin(), files_.end());
    summary["files"] = files_;
    std::ofstream out(std::filesystem::path(dir_) / "summary.json", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: summary.json");
    out << summary.dump(2) << "\n";
  }

 private:
  std::string dir_;
  std::string hash_;
  std::uint64_t seed_;
  std::vector<std::string> files_;
};

}  // namespace detail

struct ExperimentResult {
  int exit_code = 0;
  json summary;
};

namespace detail {

struct CurveStats {
  std::vector<double> ts;
  std::vector<double> mean, stderr_;
};

inline CurveStats curve_stats(const std::vector<double>& ts,
                              const std::vector<std::vector<double>>& per_path) {
  CurveStats c;
  c.ts = ts;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    std::vector<double> column;
    column.reserve(per_path.size());
    for (const auto& path : per_path) column.push_back(path[k]);
    const MeanStderr m = mean_stderr(column);
    c.mean.push_back(m.mean);
    c.stderr_.push_back(m.stderr_);
  }
  return c;
}

struct PathSummary {
  std::vector<double> distance_curve;
  std::vector<double> energy_curve;
  std::vector<double> times;
  Vec final_action;
  Vec initial_action;
  Vec initial_score;
  HitResult hit{};
  std::vector<HitResult> hits_by_radius;
  double occupation = 0.0;    // fraction of window samples inside radii[0]
  double min_jac_trace = 0.0; // over recorded sublevel points (eps requests)
  HitResult cross_down{}, cross_up{};
  std::vector<std::string> csv_rows;
};

// Runs the configured engine once per path/run with streaming accumulation;
// which statistics are filled depends on the experiment kind.
struct EngineRequest {
  double gamma = 0.0;          // ftrl step override (0 = config value)
  double sigma = -1.0;         // isotropic sigma override (< 0 = config value)
  std::vector<double> radii;   // hitting radii (first one also drives occupation)
  double eps = 0.0;            // fenchel crossing threshold
  bool want_curves = false;
  bool want_rows = false;      // per-path csv rows
  double window_start = 0.0;   // occupation window start (time or steps)
};

inline std::vector<PathSummary> run_engine(const ExperimentConfig& e, const EngineRequest& req) {
  const GameSpec& game = e.game;
  const RegularizerSet& regs = e.regs;
  const Vec center = game.equilibrium;
  const Norm ball_norm = default_ball_norm(game);
  NoiseSpec noise = e.noise;
  if (req.sigma >= 0.0) noise = NoiseSpec::isotropic(req.sigma);
  FtrlConfig fcfg = e.ftrl;
  if (req.gamma > 0.0) fcfg.step = req.gamma;

  const int n = e.engine == "sde" ? e.sde.n_paths : fcfg.n_runs;
  const double f0_eps = req.eps;

  return run_paths<PathSummary>(n, e.threads, [&, noise, fcfg](int path) {
    PathSummary s;
    double f0 = 0.0;
    long inside = 0, window_total = 0;
    s.hits_by_radius.assign(req.radii.size(), HitResult{});
    s.min_jac_trace = std::numeric_limits<double>::infinity();
    bool first = true;
    double horizon = 0.0;

    const auto visit = [&](long step, double t, const Vec& y, const Vec& x) {
      horizon = t;
      const double d = dist(x, center, ball_norm);
      if (first) {
        s.initial_action = x;
        s.initial_score = y;
        if (f0_eps > 0.0) f0 = regs.fenchel(center, y);
        for (std::size_t r = 0; r < req.radii.size(); ++r)
          s.hits_by_radius[r] = HitResult::censor(0.0);
        s.cross_down = HitResult::censor(0.0);
        s.cross_up = HitResult::censor(0.0);
      }
      for (std::size_t r = 0; r < req.radii.size(); ++r)
        if (s.hits_by_radius[r].censored && d <= req.radii[r])
          s.hits_by_radius[r] = HitResult::hit(t, t);
      if (!req.radii.empty() && t >= req.window_start) {
        ++window_total;
        if (d <= req.radii[0]) ++inside;
      }
      if (f0_eps > 0.0) {
        const double f = regs.fenchel(center, y);
        if (!first) {
          if (s.cross_down.censored && f <= f0 - f0_eps) s.cross_down = HitResult::hit(t, t);
          if (s.cross_up.censored && f >= f0 + f0_eps) s.cross_up = HitResult::hit(t, t);
        }
        // Track the mirror-Jacobian trace over the +eps sublevel set; its
        // minimum is the kappa entering the upward-crossing bound.
        if (f <= f0 + f0_eps) s.min_jac_trace = std::min(s.min_jac_trace, regs.jac_trace(y));
      }
      if (req.want_curves) {
        s.times.push_back(t);
        s.distance_curve.push_back(d);
        s.energy_curve.push_back(regs.fenchel(center, y));
      }
      if (req.want_rows) {
        std::string row = std::to_string(path) + "," + fmt(t);
        for (double v : y) row += "," + fmt(v);
        for (double v : x) row += "," + fmt(v);
        s.csv_rows.push_back(std::move(row));
      }
      s.final_action = x;
      first = false;
      (void)step;
    };

    if (e.engine == "sde")
      sde_path_visit(game, regs, noise, e.sde, e.seed, static_cast<std::uint64_t>(path), visit);
    else
      ftrl_run_visit(game, regs, noise, fcfg, e.seed, static_cast<std::uint64_t>(path),
                     [&](long k, const Vec& y, const Vec& x) {
                       visit(k, static_cast<double>(k), y, x);
                     });

    for (auto& h : s.hits_by_radius) h.horizon = horizon;
    s.cross_down.horizon = horizon;
    s.cross_up.horizon = horizon;
    if (!s.hits_by_radius.empty()) s.hit = s.hits_by_radius[0];
    s.occupation = window_total > 0 ? static_cast<double>(inside) / window_total : 0.0;
    return s;
  });
}

inline std::vector<HitResult> collect(const std::vector<PathSummary>& paths, std::size_t radius_idx) {
  std::vector<HitResult> hits;
  hits.reserve(paths.size());
  for (const auto& p : paths) hits.push_back(p.hits_by_radius[radius_idx]);
  return hits;
}

inline json hitting_json(const HittingTimeStats& s) {
  json j;
  j["mean"] = s.mean;
  j["stderr"] = s.stderr_;
  j["censor_fraction"] = s.censor_fraction;
  j["n_uncensored"] = s.n_uncensored;
  j["reliable"] = s.reliable;
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Experiment kinds
// ---------------------------------------------------------------------------

namespace detail {

inline void run_simulate(const ExperimentConfig& e, OutputWriter& writer, json& summary) {
  EngineRequest req;
  req.want_curves = true;
  req.want_rows = e.per_path_csv;
  req.radii = {1.0};  // occupation unused here, radii drive the hit field only
  const auto paths = run_engine(e, req);

  std::vector<std::vector<double>> distance, energy;
  for (const auto& p : paths) {
    distance.push_back(p.distance_curve);
    energy.push_back(p.energy_curve);
  }
  const CurveStats dstat = curve_stats(paths[0].times, distance);
  const CurveStats estat = curve_stats(paths[0].times, energy);

  std::vector<std::string> drows, erows;
  for (std::size_t k = 0; k < dstat.ts.size(); ++k) {
    drows.push_back(fmt(dstat.ts[k]) + "," + fmt(dstat.mean[k]) + "," + fmt(dstat.stderr_[k]));
    erows.push_back(fmt(estat.ts[k]) + "," + fmt(estat.mean[k]) + "," + fmt(estat.stderr_[k]));
  }
  writer.write_csv("curve_distance.csv", "t_or_n,mean,stderr", drows);
  writer.write_csv("curve_energy.csv", "t_or_n,mean,stderr", erows);

  if (e.per_path_csv) {
    std::string header = "path,t";
    for (int i = 0; i < e.game.dim(); ++i) header += ",y" + std::to_string(i);
    for (int i = 0; i < e.game.dim(); ++i) header += ",x" + std::to_string(i);
    std::vector<std::string> rows;
    for (const auto& p : paths) rows.insert(rows.end(), p.csv_rows.begin(), p.csv_rows.end());
    writer.write_csv("paths.csv", header, rows);
  }

  std::vector<double> final_d;
  for (const auto& p : paths)
    final_d.push_back(dist(p.final_action, e.game.equilibrium, default_ball_norm(e.game)));
  const MeanStderr fd = mean_stderr(final_d);
  summary["empirical"]["final_distance_mean"] = fd.mean;
  summary["empirical"]["final_distance_stderr"] = fd.stderr_;
  summary["empirical"]["final_energy_mean"] = estat.mean.back();
}

inline void run_occupancy_grid(const ExperimentConfig& e, OutputWriter& writer, json& summary) {
  const Vec gammas = e.sweep_gamma.empty() ? Vec{e.ftrl.step} : e.sweep_gamma;
  const Vec sigmas = e.sweep_sigma.empty() ? Vec{e.noise.sigma} : e.sweep_sigma;
  // Project on the first coordinate of each of the first two players.
  const int c0 = 0;
  const int c1 = e.game.player_dims[0];
  double lo0 = 0.0, hi0 = 1.0, lo1 = 0.0, hi1 = 1.0;
  if (e.game.geometry[0].kind == GeometryKind::box) {
    lo0 = e.game.geometry[0].lo[0];
    hi0 = e.game.geometry[0].hi[0];
    lo1 = e.game.geometry[1].lo[0];
    hi1 = e.game.geometry[1].hi[0];
  }
  json cells = json::array();
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
      EngineRequest req;
      req.gamma = gammas[gi];
      req.sigma = sigmas[si];
      const auto paths = run_engine(e, req);
      GridHistogram grid(e.grid_bins, lo0, hi0, lo1, hi1);
      for (const auto& p : paths)
        grid.add(p.final_action[static_cast<std::size_t>(c0)],
                 p.final_action[static_cast<std::size_t>(c1)]);
      std::vector<std::string> rows;
      for (int i = 0; i < grid.bins(); ++i)
        for (int j = 0; j < grid.bins(); ++j)
          rows.push_back(fmt(grid.cell_center0(i)) + "," + fmt(grid.cell_center1(j)) + "," +
                         fmt(grid.fraction(i, j)));
      const std::string name = "occupancy_g" + std::to_string(gi) + "_s" + std::to_string(si) +
                               ".csv";
      writer.write_csv(name, "x0,x1,fraction", rows);
      json cell;
      cell["gamma"] = gammas[gi];
      cell["sigma"] = sigmas[si];
      cell["file"] = name;
      cells.push_back(cell);
    }
  }
  summary["empirical"]["cells"] = cells;
}

inline void run_final_distance_grid(const ExperimentConfig& e, OutputWriter& writer,
                                    json& summary) {
  const Vec& gammas = e.sweep_gamma;
  const Vec& sigmas = e.sweep_sigma;
  Mat mean(gammas.size(), Vec(sigmas.size(), 0.0));
  Mat se(gammas.size(), Vec(sigmas.size(), 0.0));
  const Norm ball_norm = default_ball_norm(e.game);
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
      EngineRequest req;
      req.gamma = gammas[gi];
      req.sigma = sigmas[si];
      const auto paths = run_engine(e, req);
      std::vector<double> final_d;
      for (const auto& p : paths)
        final_d.push_back(dist(p.final_action, e.game.equilibrium, ball_norm));
      const MeanStderr m = mean_stderr(final_d);
      mean[gi][si] = m.mean;
      se[gi][si] = m.stderr_;
    }
  }

  std::string header = "gamma";
  for (double s : sigmas) header += ",mean_sigma=" + fmt(s) + ",stderr_sigma=" + fmt(s);
  std::vector<std::string> rows;
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    std::string row = fmt(gammas[gi]);
    for (std::size_t si = 0; si < sigmas.size(); ++si)
      row += "," + fmt(mean[gi][si]) + "," + fmt(se[gi][si]);
    rows.push_back(std::move(row));
  }
  writer.write_csv("final_distance_grid.csv", header, rows);

  // Rank correlation along each axis (averaged over parallel lines).
  double rho_gamma = 0.0;
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    std::vector<double> line;
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) line.push_back(mean[gi][si]);
    rho_gamma += spearman(std::vector<double>(gammas.begin(), gammas.end()), line);
  }
  rho_gamma /= static_cast<double>(sigmas.size());
  double rho_sigma = 0.0;
  for (std::size_t gi = 0; gi < gammas.size(); ++gi)
    rho_sigma += spearman(std::vector<double>(sigmas.begin(), sigmas.end()), mean[gi]);
  rho_sigma /= static_cast<double>(gammas.size());

  summary["empirical"]["mean_grid"] = mean;
  summary["empirical"]["stderr_grid"] = se;
  summary["empirical"]["spearman_along_gamma"] = rho_gamma;
  summary["empirical"]["spearman_along_sigma"] = rho_sigma;
}

inline void run_hitting_time_grid(const ExperimentConfig& e, OutputWriter& writer,
                                  json& summary) {
  const Vec& gammas = e.sweep_gamma;
  const Vec& sigmas = e.sweep_sigma;
  const Vec& radii = e.sweep_r;
  // stats[r][gi][si]
  std::vector<Mat> mean(radii.size(), Mat(gammas.size(), Vec(sigmas.size(), 0.0)));
  std::vector<Mat> censor(radii.size(), Mat(gammas.size(), Vec(sigmas.size(), 0.0)));
  std::vector<std::vector<std::vector<bool>>> reliable(
      radii.size(), std::vector<std::vector<bool>>(gammas.size(),
                                                   std::vector<bool>(sigmas.size(), false)));
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
      EngineRequest req;
      req.gamma = gammas[gi];
      req.sigma = sigmas[si];
      req.radii.assign(radii.begin(), radii.end());
      const auto paths = run_engine(e, req);
      for (std::size_t r = 0; r < radii.size(); ++r) {
        const auto stats = HittingTimeStats::from(collect(paths, r));
        mean[r][gi][si] = stats.reliable ? stats.mean : -1.0;
        censor[r][gi][si] = stats.censor_fraction;
        reliable[r][gi][si] = stats.reliable;
      }
    }
  }

  json per_r = json::array();
  for (std::size_t r = 0; r < radii.size(); ++r) {
    std::string header = "gamma";
    for (double s : sigmas)
      header += ",mean_sigma=" + fmt(s) + ",censor_sigma=" + fmt(s);
    std::vector<std::string> rows;
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
      std::string row = fmt(gammas[gi]);
      for (std::size_t si = 0; si < sigmas.size(); ++si)
        row += "," + fmt(mean[r][gi][si]) + "," + fmt(censor[r][gi][si]);
      rows.push_back(std::move(row));
    }
    writer.write_csv("hitting_time_grid_r" + std::to_string(r) + ".csv", header, rows);

    // Monotone decrease in gamma, judged over reliable cells only.
    double rho_sum = 0.0;
    int rho_lines = 0;
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
      std::vector<double> g, m;
      for (std::size_t gi = 0; gi < gammas.size(); ++gi)
        if (reliable[r][gi][si]) {
          g.push_back(gammas[gi]);
          m.push_back(mean[r][gi][si]);
        }
      if (g.size() >= 3) {
        rho_sum += spearman(g, m);
        ++rho_lines;
      }
    }
    json jr;
    jr["r"] = radii[r];
    jr["spearman_along_gamma"] = rho_lines > 0 ? rho_sum / rho_lines : 0.0;
    jr["lines_assessed"] = rho_lines;
    per_r.push_back(jr);
  }
  summary["empirical"]["radii"] = per_r;
}

inline void run_bounds_check(const ExperimentConfig& e, OutputWriter& writer, json& summary) {
  const double beta = e.game.monotonicity.beta;
  const double K = e.regs.strong_convexity();
  const int d = e.game.dim();
  json& empirical = summary["empirical"];
  json& theoretical = summary["theoretical"];
  json& pass = summary["pass"];
  summary["meta"]["sigma_eff_sq"] = e.noise.sigma_eff_sq(d);
  summary["meta"]["sigma_min_sq"] = e.noise.sigma_min_sq(d);
  summary["meta"]["sigma_max_sq"] = e.noise.sigma_max_sq(d);

  if (e.game.monotonicity.kind == MonotonicityClass::strong) {
    EngineRequest req;
    req.radii = {e.bounds_r};
    if (e.engine == "sde")
      req.window_start = e.occupation_start >= 0.0 ? e.occupation_start : 0.2 * e.sde.horizon;
    else
      req.window_start = e.occupation_start >= 0.0 ? e.occupation_start
                                                   : 0.1 * static_cast<double>(e.ftrl.n_steps);
    const auto paths = run_engine(e, req);

    const auto hit_stats = HittingTimeStats::from(collect(paths, 0));
    std::vector<double> occ;
    for (const auto& p : paths) occ.push_back(p.occupation);
    const MeanStderr occ_stats = mean_stderr(occ);
    empirical["hitting"] = hitting_json(hit_stats);
    empirical["occupation_fraction"] = occ_stats.mean;
    empirical["occupation_stderr"] = occ_stats.stderr_;

    std::vector<std::string> rows;
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const auto& h = paths[p].hits_by_radius[0];
      rows.push_back(std::to_string(p) + "," + (h.censored ? "censored" : fmt(h.value)) + "," +
                     fmt(paths[p].occupation));
    }
    writer.write_csv("hitting_times.csv", "path,hit,occupation", rows);

    if (e.engine == "sde") {
      const Vec y0 = e.sde.y0.empty() ? Vec(static_cast<std::size_t>(d), 0.0) : e.sde.y0;
      const double f0 = e.regs.fenchel(e.game.equilibrium, y0);
      const auto b = bound_hit_strong_cont(f0, beta, K,
                                           std::sqrt(e.noise.sigma_max_sq(d)), e.bounds_r);
      theoretical["f0"] = f0;
      theoretical["hitting_bound"] = b.bound;
      theoretical["r_sigma"] = b.r_sigma;
      theoretical["occupation_bound"] = bound_occupation_cont(e.bounds_r, b.r_sigma);
      pass["hitting_bound"] =
          hit_stats.reliable && hit_stats.mean <= b.bound + 3.0 * hit_stats.stderr_;
      pass["occupation_bound"] = occ_stats.mean >=
                                 bound_occupation_cont(e.bounds_r, b.r_sigma) -
                                     3.0 * occ_stats.stderr_;
    } else {
      // Per-run bound with the branch picked by each run's own start.
      const double sigma_sq = e.noise.sigma_eff_sq(d);
      std::vector<double> run_bounds;
      double r_sigma = 0.0;
      for (const auto& p : paths) {
        const double f0 = e.regs.fenchel(e.game.equilibrium, p.initial_score);
        const bool inside =
            dist(p.initial_action, e.game.equilibrium, default_ball_norm(e.game)) <= e.bounds_r;
        const auto b = bound_stop_strong_disc(f0, beta, K, e.ftrl.step, sigma_sq,
                                              e.game.smoothness, e.bounds_r, inside);
        run_bounds.push_back(b.bound);
        r_sigma = b.r_sigma;
      }
      const MeanStderr bstat = mean_stderr(run_bounds);
      theoretical["hitting_bound_mean"] = bstat.mean;
      theoretical["r_sigma"] = r_sigma;
      theoretical["occupation_bound"] = bound_occupation_disc(e.bounds_r, r_sigma);
      pass["hitting_bound"] =
          hit_stats.reliable && hit_stats.mean <= bstat.mean + 3.0 * hit_stats.stderr_;
      pass["occupation_bound"] = occ_stats.mean >=
                                 bound_occupation_disc(e.bounds_r, r_sigma) -
                                     3.0 * occ_stats.stderr_;
    }
    return;
  }

  // Null-monotone checks.
  if (e.engine == "sde") {
    EngineRequest req;
    req.eps = e.bounds_eps;
    const auto paths = run_engine(e, req);
    std::vector<HitResult> down, up;
    std::vector<std::string> rows;
    double kappa = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < paths.size(); ++p) {
      down.push_back(paths[p].cross_down);
      up.push_back(paths[p].cross_up);
      kappa = std::min(kappa, paths[p].min_jac_trace);
      rows.push_back(std::to_string(p) + "," +
                     (paths[p].cross_down.censored ? "censored" : fmt(paths[p].cross_down.value)) +
                     "," +
                     (paths[p].cross_up.censored ? "censored" : fmt(paths[p].cross_up.value)));
    }
    writer.write_csv("crossing_times.csv", "path,down,up", rows);
    const auto down_stats = HittingTimeStats::from(down);
    const auto up_stats = HittingTimeStats::from(up);
    empirical["crossing_down"] = hitting_json(down_stats);
    empirical["crossing_up"] = hitting_json(up_stats);

    const Vec y0 = e.sde.y0.empty() ? Vec(static_cast<std::size_t>(d), 0.0) : e.sde.y0;
    const double f0 = e.regs.fenchel(e.game.equilibrium, y0);
    summary["meta"]["kappa"] = kappa;
    const double bound =
        bound_hit_null_cont_plus(e.bounds_eps, kappa, std::sqrt(e.noise.sigma_min_sq(d)));
    theoretical["crossing_up_bound"] = bound;
    theoretical["f0"] = f0;
    pass["crossing_up_bound"] =
        up_stats.reliable && up_stats.mean <= bound + 3.0 * up_stats.stderr_;
    return;
  }

  // Discrete null-monotone: the mean Fenchel energy must diverge; test via a
  // positive slope at three standard errors.
  EngineRequest req;
  req.want_curves = true;
  const auto paths = run_engine(e, req);
  std::vector<std::vector<double>> curves;
  for (const auto& p : paths) curves.push_back(p.energy_curve);
  const CurveStats estat = curve_stats(paths[0].times, curves);
  std::vector<std::string> rows;
  for (std::size_t k = 0; k < estat.ts.size(); ++k)
    rows.push_back(fmt(estat.ts[k]) + "," + fmt(estat.mean[k]) + "," + fmt(estat.stderr_[k]));
  writer.write_csv("curve_energy.csv", "t_or_n,mean,stderr", rows);
  const auto slope = escape_slope(paths[0].times, curves);
  empirical["energy_slope"] = slope.slope;
  empirical["energy_slope_stderr"] = slope.stderr_;
  theoretical["energy_diverges"] = true;
  pass["energy_diverges"] = slope.slope > 3.0 * slope.stderr_;
}

inline void run_corner_concentration(const ExperimentConfig& e, OutputWriter& writer,
                                     json& summary) {
  const Vec gammas = e.sweep_gamma.empty() ? Vec{e.ftrl.step} : e.sweep_gamma;
  const Vec sigmas = e.sweep_sigma.empty() ? Vec{e.noise.sigma} : e.sweep_sigma;
  json cells = json::array();
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    for (std::size_t si = 0; si < sigmas.size(); ++si) {
      EngineRequest req;
      req.gamma = gammas[gi];
      req.sigma = sigmas[si];
      const auto paths = run_engine(e, req);

      long corner = 0;
      GridHistogram grid(e.grid_bins, 0.0, 1.0, 0.0, 1.0);
      const int c1 = e.game.player_dims[0];
      for (const auto& p : paths) {
        bool any = false;
        int off = 0;
        for (int player = 0; player < static_cast<int>(e.game.player_dims.size()); ++player) {
          double largest = 0.0;
          for (int j = 0; j < e.game.player_dims[static_cast<std::size_t>(player)]; ++j)
            largest = std::max(largest, p.final_action[static_cast<std::size_t>(off + j)]);
          if (largest >= 1.0 - e.corner_tol) any = true;
          off += e.game.player_dims[static_cast<std::size_t>(player)];
        }
        if (any) ++corner;
        grid.add(p.final_action[0], p.final_action[static_cast<std::size_t>(c1)]);
      }
      std::vector<std::string> rows;
      for (int i = 0; i < grid.bins(); ++i)
        for (int j = 0; j < grid.bins(); ++j)
          rows.push_back(fmt(grid.cell_center0(i)) + "," + fmt(grid.cell_center1(j)) + "," +
                         fmt(grid.fraction(i, j)));
      const std::string name = "corner_grid_g" + std::to_string(gi) + "_s" + std::to_string(si) +
                               ".csv";
      writer.write_csv(name, "x0,x1,fraction", rows);

      json cell;
      cell["gamma"] = gammas[gi];
      cell["sigma"] = sigmas[si];
      cell["corner_fraction"] =
          static_cast<double>(corner) / static_cast<double>(paths.size());
      cell["file"] = name;
      cells.push_back(cell);
    }
  }
  summary["empirical"]["cells"] = cells;
}

}  // namespace detail

// Runs a validated experiment; returns exit code 0 iff every enabled bound
// check passed. Output files land in the config's out directory.
inline ExperimentResult run_experiment(const ExperimentConfig& e) {
  detail::OutputWriter writer(e);
  json summary;
  summary["experiment"] = e.kind;
  summary["config_text"] = e.raw.raw_text();
  summary["empirical"] = json::object();
  summary["theoretical"] = json::object();
  summary["pass"] = json::object();
  summary["meta"]["game"] = e.game.id;
  summary["meta"]["regularizer"] = e.regs.id();
  summary["meta"]["sigma_eff_sq"] = e.noise.sigma_eff_sq(e.game.dim());

  if (e.kind == "simulate")
    detail::run_simulate(e, writer, summary);
  else if (e.kind == "occupancy-grid")
    detail::run_occupancy_grid(e, writer, summary);
  else if (e.kind == "final-distance-grid")
    detail::run_final_distance_grid(e, writer, summary);
  else if (e.kind == "hitting-time-grid")
    detail::run_hitting_time_grid(e, writer, summary);
  else if (e.kind == "bounds-check")
    detail::run_bounds_check(e, writer, summary);
  else if (e.kind == "corner-concentration")
    detail::run_corner_concentration(e, writer, summary);
  else
    throw std::invalid_argument("run_experiment: unknown kind " + e.kind);

  ExperimentResult result;
  for (const auto& [name, ok] : summary["pass"].items())
    if (!ok.get<bool>()) result.exit_code = 1;
  writer.write_summary(summary);
  result.summary = summary;
  return result;
}

inline ExperimentResult run_experiment(const KeyValueConfig& raw) {
  ExperimentConfig e;
  const auto diags = validate_config(raw, &e);
  if (!diags.empty()) {
    std::string msg = "config rejected:";
    for (const auto& d : diags) msg += "\n  " + d;
    throw std::invalid_argument(msg);
  }
  return run_experiment(e);
}

// Re-checks the hashes embedded in every output file of a directory.
struct VerifyReport {
  bool ok = true;
  std::vector<std::string> messages;
};

inline VerifyReport verify_outputs(const std::string& dir) {
  VerifyReport report;
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    report.ok = false;
    report.messages.push_back("not a directory: " + dir);
    return report;
  }
  std::vector<std::string> json_files, csv_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > 5 && name.substr(name.size() - 5) == ".json") json_files.push_back(name);
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") csv_files.push_back(name);
  }
  std::sort(json_files.begin(), json_files.end());
  std::sort(csv_files.begin(), csv_files.end());

  std::string reference_hash;
  for (const auto& name : json_files) {
    std::ifstream in(fs::path(dir) / name);
    json j;
    try {
      in >> j;
    } catch (const std::exception& ex) {
      report.ok = false;
      report.messages.push_back(name + ": unparseable JSON (" + ex.what() + ")");
      continue;
    }
    if (!j.contains("config_hash") || !j.contains("config_text")) {
      report.ok = false;
      report.messages.push_back(name + ": missing config_hash/config_text");
      continue;
    }
    const std::string embedded = j["config_hash"].get<std::string>();
    const std::string recomputed = to_hex(fnv1a64(j["config_text"].get<std::string>()));
    if (embedded != recomputed) {
      report.ok = false;
      report.messages.push_back(name + ": config_hash " + embedded +
                                " does not match recomputed " + recomputed);
    } else {
      report.messages.push_back(name + ": ok (" + embedded + ")");
    }
    if (reference_hash.empty()) reference_hash = embedded;
  }

  for (const auto& name : csv_files) {
    std::ifstream in(fs::path(dir) / name);
    std::string first;
    std::getline(in, first);
    const std::string prefix = "# config_hash=";
    if (first.rfind(prefix, 0) != 0) {
      report.ok = false;
      report.messages.push_back(name + ": missing config hash header");
      continue;
    }
    const std::string hash = first.substr(prefix.size(), 16);
    if (!reference_hash.empty() && hash != reference_hash) {
      report.ok = false;
      report.messages.push_back(name + ": hash " + hash + " disagrees with summary " +
                                reference_hash);
    } else {
      report.messages.push_back(name + ": ok (" + hash + ")");
    }
  }
  if (json_files.empty()) {
    report.ok = false;
    report.messages.push_back("no summary JSON found in " + dir);
  }
  return report;
}

}  // namespace gamedyn

#endif  // GAMEDYN_EXPERIMENT_HPP
