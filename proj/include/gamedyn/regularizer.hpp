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

#ifndef GAMEDYN_REGULARIZER_HPP
#define GAMEDYN_REGULARIZER_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gamedyn/game.hpp"
#include "gamedyn/geometry.hpp"
#include "gamedyn/linalg.hpp"

namespace gamedyn {

enum class RegularizerKind {
  euclidean,        // h(x) = ||x||^2 / 2 on all of R^d
  euclidean_box,    // h(x) = ||x||^2 / 2 on a coordinate box
  entropic_simplex, // h(x) = sum x log x on the probability simplex
  binary_entropy,   // h(x) = sum [x log x + (1-x) log(1-x)] on [0,1]^d
};

inline std::string to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::euclidean: return "euclidean";
    case RegularizerKind::euclidean_box: return "euclidean_box";
    case RegularizerKind::entropic_simplex: return "entropic";
    case RegularizerKind::binary_entropy: return "binary_entropy";
  }
  return "?";
}

namespace detail {

inline double logistic(double y) {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

inline double softplus(double y) {
  if (y > 0.0) return y + std::log1p(std::exp(-y));
  return std::log1p(std::exp(y));
}

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace detail

// One player's regularizer h_i with its mirror map, conjugate, and norms.
struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::euclidean;
  int dim = 1;
  double lo = 0.0, hi = 1.0;  // box bounds (euclidean_box)

  static RegularizerSpec euclidean(int d) { return {RegularizerKind::euclidean, d}; }
  static RegularizerSpec euclidean_box(int d, double lo, double hi) {
    return {RegularizerKind::euclidean_box, d, lo, hi};
  }
  static RegularizerSpec entropic_simplex(int d) {
    return {RegularizerKind::entropic_simplex, d};
  }
  static RegularizerSpec binary_entropy(int d) {
    return {RegularizerKind::binary_entropy, d, 0.0, 1.0};
  }

  // Strong-convexity modulus K in the regularizer's primal norm.
  double strong_convexity() const {
    return kind == RegularizerKind::binary_entropy ? 4.0 : 1.0;
  }

  Norm primal_norm() const {
    return kind == RegularizerKind::entropic_simplex ? Norm::L1 : Norm::L2;
  }
  Norm dual_norm() const { return dual_of(primal_norm()); }

  bool in_domain(const double* p, double tol = kFeasTol) const {
    switch (kind) {
      case RegularizerKind::euclidean:
        return true;
      case RegularizerKind::euclidean_box:
        for (int i = 0; i < dim; ++i)
          if (p[i] < lo - tol || p[i] > hi + tol) return false;
        return true;
      case RegularizerKind::entropic_simplex: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
          if (p[i] < -tol) return false;
          s += p[i];
        }
        return std::abs(s - 1.0) <= tol * dim;
      }
      case RegularizerKind::binary_entropy:
        for (int i = 0; i < dim; ++i)
          if (p[i] < -tol || p[i] > 1.0 + tol) return false;
        return true;
    }
    return false;
  }

  // Q(y) = argmax { <y, x> - h(x) }.
  void mirror_into(const double* y, double* x) const {
    for (int i = 0; i < dim; ++i)
      if (!std::isfinite(y[i])) throw std::runtime_error("mirror: non-finite score input");
    switch (kind) {
      case RegularizerKind::euclidean:
        for (int i = 0; i < dim; ++i) x[i] = y[i];
        return;
      case RegularizerKind::euclidean_box:
        for (int i = 0; i < dim; ++i) x[i] = std::min(std::max(y[i], lo), hi);
        return;
      case RegularizerKind::entropic_simplex: {
        double m = y[0];
        for (int i = 1; i < dim; ++i) m = std::max(m, y[i]);
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
          x[i] = std::exp(y[i] - m);
          s += x[i];
        }
        for (int i = 0; i < dim; ++i) x[i] /= s;
        return;
      }
      case RegularizerKind::binary_entropy:
        for (int i = 0; i < dim; ++i) x[i] = detail::logistic(y[i]);
        return;
    }
  }

  Vec mirror(const Vec& y) const {
    Vec x(y.size());
    mirror_into(y.data(), x.data());
    return x;
  }

  // h*(y) = max { <y, x> - h(x) }, evaluated shift-stably.
  double conjugate(const double* y) const {
    for (int i = 0; i < dim; ++i)
      if (!std::isfinite(y[i])) throw std::runtime_error("conjugate: non-finite score input");
    switch (kind) {
      case RegularizerKind::euclidean: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += y[i] * y[i];
        return 0.5 * s;
      }
      case RegularizerKind::euclidean_box: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double t = std::min(std::max(y[i], lo), hi);
          s += t * y[i] - 0.5 * t * t;
        }
        return s;
      }
      case RegularizerKind::entropic_simplex: {
        double m = y[0];
        for (int i = 1; i < dim; ++i) m = std::max(m, y[i]);
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += std::exp(y[i] - m);
        return m + std::log(s);
      }
      case RegularizerKind::binary_entropy: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += detail::softplus(y[i]);
        return s;
      }
    }
    return 0.0;
  }

  double conjugate(const Vec& y) const { return conjugate(y.data()); }

  // h(x); entropic kinds use the 0 log 0 = 0 convention.
  double reg_value(const double* x) const {
    switch (kind) {
      case RegularizerKind::euclidean:
      case RegularizerKind::euclidean_box: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += x[i] * x[i];
        return 0.5 * s;
      }
      case RegularizerKind::entropic_simplex: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += detail::xlogx(std::max(x[i], 0.0));
        return s;
      }
      case RegularizerKind::binary_entropy: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double t = std::min(std::max(x[i], 0.0), 1.0);
          s += detail::xlogx(t) + detail::xlogx(1.0 - t);
        }
        return s;
      }
    }
    return 0.0;
  }

  double reg_value(const Vec& x) const { return reg_value(x.data()); }

  // Fenchel coupling F(p, y) = h(p) + h*(y) - <y, p> >= 0.
  double fenchel(const double* p, const double* y) const {
    if (!in_domain(p)) throw std::domain_error("fenchel_coupling: base point outside domain of h");
    double ip = 0.0;
    for (int i = 0; i < dim; ++i) ip += y[i] * p[i];
    return reg_value(p) + conjugate(y) - ip;
  }

  double fenchel(const Vec& p, const Vec& y) const { return fenchel(p.data(), y.data()); }

  // Trace of the mirror Jacobian Jac Q(y) = Hess h*(y).
  double jac_trace(const double* y) const {
    switch (kind) {
      case RegularizerKind::euclidean:
        return static_cast<double>(dim);
      case RegularizerKind::euclidean_box: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
          if (y[i] > lo && y[i] < hi) s += 1.0;
        return s;
      }
      case RegularizerKind::entropic_simplex: {
        Vec x(static_cast<std::size_t>(dim));
        mirror_into(y, x.data());
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
        return 1.0 - s;
      }
      case RegularizerKind::binary_entropy: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double t = detail::logistic(y[i]);
          s += t * (1.0 - t);
        }
        return s;
      }
    }
    return 0.0;
  }

  double jac_trace(const Vec& y) const { return jac_trace(y.data()); }

  // Canonical dual preimage of an interior primal point: a score y with
  // Q(y) = x (up to the interior clipping margin for entropic kinds).
  Vec dual_preimage(const Vec& x) const {
    constexpr double kMargin = 1e-6;
    Vec y(x.size());
    switch (kind) {
      case RegularizerKind::euclidean:
      case RegularizerKind::euclidean_box:
        y = x;
        return y;
      case RegularizerKind::entropic_simplex:
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::log(std::max(x[i], kMargin));
        return y;
      case RegularizerKind::binary_entropy:
        for (std::size_t i = 0; i < x.size(); ++i) {
          const double t = std::min(std::max(x[i], kMargin), 1.0 - kMargin);
          y[i] = std::log(t / (1.0 - t));
        }
        return y;
    }
    return y;
  }
};

inline Vec mirror(const RegularizerSpec& reg, const Vec& y) { return reg.mirror(y); }
inline double conjugate(const RegularizerSpec& reg, const Vec& y) { return reg.conjugate(y); }
inline double fenchel_coupling(const RegularizerSpec& reg, const Vec& p, const Vec& y) {
  return reg.fenchel(p, y);
}

// F(p, y) >= K/2 ||Q(y) - p||^2 in the regularizer's primal norm.
inline bool strong_convexity_lower_bound_check(const RegularizerSpec& reg, const Vec& p,
                                               const Vec& y) {
  const Vec q = reg.mirror(y);
  const double d = dist(q, p, reg.primal_norm());
  return reg.fenchel(p, y) + 1e-12 >= 0.5 * reg.strong_convexity() * d * d;
}

// Joint regularizer over all players: block-wise application of per-player
// parts to the concatenated score/action vectors.
class RegularizerSet {
 public:
  RegularizerSet() = default;
  explicit RegularizerSet(std::vector<RegularizerSpec> parts) : parts_(std::move(parts)) {
    int off = 0;
    for (const auto& p : parts_) {
      offsets_.push_back(off);
      off += p.dim;
    }
    dim_ = off;
  }

  // Same regularizer kind for every player, sized from the game's geometry.
  static RegularizerSet uniform(RegularizerKind kind, const GameSpec& game) {
    std::vector<RegularizerSpec> parts;
    for (std::size_t i = 0; i < game.geometry.size(); ++i) {
      const Geometry& geo = game.geometry[i];
      switch (kind) {
        case RegularizerKind::euclidean:
          if (geo.kind != GeometryKind::full_space)
            throw std::invalid_argument("euclidean regularizer needs a full-space geometry");
          parts.push_back(RegularizerSpec::euclidean(geo.dim));
          break;
        case RegularizerKind::euclidean_box:
          if (geo.kind != GeometryKind::box)
            throw std::invalid_argument("euclidean_box regularizer needs a box geometry");
          parts.push_back(RegularizerSpec::euclidean_box(geo.dim, geo.lo[0], geo.hi[0]));
          break;
        case RegularizerKind::entropic_simplex:
          if (geo.kind != GeometryKind::simplex)
            throw std::invalid_argument("entropic regularizer needs a simplex geometry");
          parts.push_back(RegularizerSpec::entropic_simplex(geo.dim));
          break;
        case RegularizerKind::binary_entropy:
          if (geo.kind != GeometryKind::box || geo.lo[0] != 0.0 || geo.hi[0] != 1.0)
            throw std::invalid_argument("binary_entropy regularizer needs a [0,1] box geometry");
          parts.push_back(RegularizerSpec::binary_entropy(geo.dim));
          break;
      }
    }
    RegularizerSet set(std::move(parts));
    set.id_ = to_string(kind);
    return set;
  }

  int dim() const { return dim_; }
  const std::vector<RegularizerSpec>& parts() const { return parts_; }
  const std::string& id() const { return id_; }

  void mirror_into(const Vec& y, Vec& x) const {
    x.resize(y.size());
    for (std::size_t i = 0; i < parts_.size(); ++i)
      parts_[i].mirror_into(y.data() + offsets_[i], x.data() + offsets_[i]);
  }

  Vec mirror(const Vec& y) const {
    Vec x(y.size());
    mirror_into(y, x);
    return x;
  }

  double conjugate(const Vec& y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i) s += parts_[i].conjugate(y.data() + offsets_[i]);
    return s;
  }

  double reg_value(const Vec& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i) s += parts_[i].reg_value(x.data() + offsets_[i]);
    return s;
  }

  double fenchel(const Vec& p, const Vec& y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i)
      s += parts_[i].fenchel(p.data() + offsets_[i], y.data() + offsets_[i]);
    return s;
  }

  double jac_trace(const Vec& y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i) s += parts_[i].jac_trace(y.data() + offsets_[i]);
    return s;
  }

  double strong_convexity() const {
    double k = parts_.empty() ? 1.0 : parts_[0].strong_convexity();
    for (const auto& p : parts_) k = std::min(k, p.strong_convexity());
    return k;
  }

  // Sum over players of squared per-player dual norms; this is the quantity
  // the one-step estimates consume.
  double dual_norm_sq(const Vec& w) const {
    double s = 0.0;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      const RegularizerSpec& p = parts_[i];
      if (p.dual_norm() == Norm::Linf) {
        double m = 0.0;
        for (int j = 0; j < p.dim; ++j)
          m = std::max(m, std::abs(w[static_cast<std::size_t>(offsets_[i] + j)]));
        s += m * m;
      } else {
        double q = 0.0;
        for (int j = 0; j < p.dim; ++j) {
          const double v = w[static_cast<std::size_t>(offsets_[i] + j)];
          q += v * v;
        }
        s += q;
      }
    }
    return s;
  }

  Vec dual_preimage(const Vec& x) const {
    Vec y;
    y.reserve(x.size());
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      Vec part(x.begin() + offsets_[i], x.begin() + offsets_[i] + parts_[i].dim);
      const Vec py = parts_[i].dual_preimage(part);
      y.insert(y.end(), py.begin(), py.end());
    }
    return y;
  }

  bool in_domain(const Vec& p, double tol = kFeasTol) const {
    for (std::size_t i = 0; i < parts_.size(); ++i)
      if (!parts_[i].in_domain(p.data() + offsets_[i], tol)) return false;
    return true;
  }

 private:
  std::vector<RegularizerSpec> parts_;
  std::vector<int> offsets_;
  int dim_ = 0;
  std::string id_;
};

}  // namespace gamedyn

#endif  // GAMEDYN_REGULARIZER_HPP
