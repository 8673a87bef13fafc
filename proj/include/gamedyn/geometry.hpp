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

#ifndef GAMEDYN_GEOMETRY_HPP
#define GAMEDYN_GEOMETRY_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "gamedyn/linalg.hpp"
#include "gamedyn/rng.hpp"

namespace gamedyn {

// Feasibility slack used everywhere a point is checked against its action
// space (infinity norm).
inline constexpr double kFeasTol = 1e-9;

enum class GeometryKind { full_space, box, simplex };

// One player's action space: all of R^d, a coordinate box, or the
// probability simplex over d pure actions.
struct Geometry {
  GeometryKind kind = GeometryKind::full_space;
  int dim = 1;
  Vec lo, hi;  // box bounds, sized dim

  static Geometry full_space(int d) {
    Geometry g;
    g.kind = GeometryKind::full_space;
    g.dim = d;
    return g;
  }

  static Geometry box(int d, double lo, double hi) {
    Geometry g;
    g.kind = GeometryKind::box;
    g.dim = d;
    g.lo.assign(static_cast<std::size_t>(d), lo);
    g.hi.assign(static_cast<std::size_t>(d), hi);
    return g;
  }

  static Geometry box(Vec lo, Vec hi) {
    Geometry g;
    g.kind = GeometryKind::box;
    g.dim = static_cast<int>(lo.size());
    g.lo = std::move(lo);
    g.hi = std::move(hi);
    return g;
  }

  static Geometry simplex(int d) {
    Geometry g;
    g.kind = GeometryKind::simplex;
    g.dim = d;
    return g;
  }

  bool contains(const double* x, double tol = kFeasTol) const {
    switch (kind) {
      case GeometryKind::full_space:
        return true;
      case GeometryKind::box:
        for (int i = 0; i < dim; ++i)
          if (x[i] < lo[static_cast<std::size_t>(i)] - tol ||
              x[i] > hi[static_cast<std::size_t>(i)] + tol)
            return false;
        return true;
      case GeometryKind::simplex: {
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
          if (x[i] < -tol) return false;
          s += x[i];
        }
        return std::abs(s - 1.0) <= tol * dim;
      }
    }
    return false;
  }

  bool contains(const Vec& x, double tol = kFeasTol) const {
    if (static_cast<int>(x.size()) != dim) return false;
    return contains(x.data(), tol);
  }

  // Uniform draw from the action space; requires a bounded geometry.
  Vec sample_uniform(SeededStream& stream) const {
    Vec x(static_cast<std::size_t>(dim));
    switch (kind) {
      case GeometryKind::full_space:
        throw std::domain_error("sample_uniform: full-space geometry is unbounded");
      case GeometryKind::box:
        for (int i = 0; i < dim; ++i)
          x[static_cast<std::size_t>(i)] = stream.uniform(lo[static_cast<std::size_t>(i)],
                                                          hi[static_cast<std::size_t>(i)]);
        return x;
      case GeometryKind::simplex: {
        // Normalized exponentials give the flat Dirichlet.
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
          const double e = -std::log(1.0 - stream.uniform01());
          x[static_cast<std::size_t>(i)] = e;
          s += e;
        }
        for (int i = 0; i < dim; ++i) x[static_cast<std::size_t>(i)] /= s;
        return x;
      }
    }
    return x;
  }

  bool bounded() const { return kind != GeometryKind::full_space; }
};

}  // namespace gamedyn

#endif  // GAMEDYN_GEOMETRY_HPP
