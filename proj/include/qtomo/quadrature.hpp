// Copyright 2026 The qtomo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QTOMO_QUADRATURE_HPP
#define QTOMO_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "qtomo/errors.hpp"

namespace qtomo::quadrature {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_subdivisions = 4000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
};

namespace detail {

// Kronrod 15-point abscissae (positive half, descending) and weights; the odd
// entries 1, 3, 5, 7 are the embedded 7-point Gauss nodes.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
/// `breakpoints` inside (a, b) seed the initial partition; the panel with the
/// largest error estimate is bisected until the summed estimate drops below
/// max(abs_tol, rel_tol * |value|). Panels are summed in position order so the
/// result does not depend on refinement history beyond the partition itself.
template <class F>
Result integrate(F&& f, double a, double b, const std::vector<double>& breakpoints,
                 const Options& opts) {
  std::vector<double> cuts{a};
  for (double p : breakpoints) {
    if (p > a && p < b) cuts.push_back(p);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  long evaluations = 0;
  auto counted = [&](double x) {
    ++evaluations;
    return f(x);
  };

  std::priority_queue<detail::Panel> active;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    detail::Panel p = detail::gauss_kronrod_15(counted, cuts[i], cuts[i + 1]);
    total += p.value;
    total_error += p.error;
    active.push(p);
  }

  int subdivisions = 0;
  while (total_error > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (subdivisions >= opts.max_subdivisions) {
      throw ConvergenceError("quadrature: tolerance not reached within " +
                             std::to_string(opts.max_subdivisions) +
                             " subdivisions (error estimate " + std::to_string(total_error) + ")");
    }
    detail::Panel worst = active.top();
    active.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw ConvergenceError("quadrature: panel width reached machine precision");
    }
    detail::Panel left = detail::gauss_kronrod_15(counted, worst.a, mid);
    detail::Panel right = detail::gauss_kronrod_15(counted, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    active.push(left);
    active.push(right);
    ++subdivisions;
  }

  // Re-sum the final partition in position order for a deterministic value.
  std::vector<detail::Panel> panels;
  panels.reserve(active.size());
  while (!active.empty()) {
    panels.push_back(active.top());
    active.pop();
  }
  std::sort(panels.begin(), panels.end(),
            [](const detail::Panel& l, const detail::Panel& r) { return l.a < r.a; });
  Result out;
  for (const auto& p : panels) {
    out.value += p.value;
    out.error += p.error;
  }
  out.evaluations = evaluations;
  return out;
}

/// One axis of a tensor-product box.
struct Axis {
  double lower = 0.0;
  double upper = 1.0;
  std::vector<double> breakpoints;
};

namespace detail {

inline Result integrate_nested(const std::function<double(const std::vector<double>&)>& f,
                               const std::vector<Axis>& axes, std::size_t level,
                               std::vector<double>& point, double abs_tol, double rel_tol,
                               int max_subdivisions) {
  const Axis& axis = axes[level];
  const double width = axis.upper - axis.lower;
  long evaluations = 0;
  auto slice = [&](double t) -> double {
    point[level] = t;
    if (level + 1 == axes.size()) {
      ++evaluations;
      return f(point);
    }
    // Inner errors are integrated over this axis, so they are budgeted as
    // half of this level's tolerance spread over its width.
    const Result inner = integrate_nested(f, axes, level + 1, point, 0.5 * abs_tol / width,
                                          0.5 * rel_tol, max_subdivisions);
    evaluations += inner.evaluations;
    return inner.value;
  };
  Options opts;
  opts.abs_tol = 0.5 * abs_tol;
  opts.rel_tol = 0.5 * rel_tol;
  opts.max_subdivisions = max_subdivisions;
  Result r = integrate(slice, axis.lower, axis.upper, axis.breakpoints, opts);
  r.evaluations = evaluations;
  return r;
}

}  // namespace detail

/// Iterated adaptive integration over a box with at most a handful of axes.
///
/// A coarse first pass estimates the L1 mass of f; the second pass then runs
/// with an absolute tolerance of rel_tol times that mass, which lets inner
/// integrals far from the peak terminate after a single panel. The returned
/// error is the requested bound, not a rigorous estimate.
inline Result integrate_box(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<Axis>& axes, const Options& opts) {
  if (axes.empty()) {
    Result r;
    r.value = f({});
    r.evaluations = 1;
    return r;
  }
  std::vector<double> point(axes.size(), 0.0);
  auto magnitude = [&f](const std::vector<double>& p) { return std::abs(f(p)); };
  const Result coarse = detail::integrate_nested(magnitude, axes, 0, point, 0.0,
                                                 std::max(opts.rel_tol, 1e-4), opts.max_subdivisions);
  const double mass = coarse.value;
  if (mass == 0.0) {
    Result r;
    r.evaluations = coarse.evaluations;
    return r;
  }
  const double abs_tol = std::max(opts.abs_tol, opts.rel_tol * mass);
  Result fine = detail::integrate_nested(f, axes, 0, point, abs_tol, 0.0, opts.max_subdivisions);
  fine.error = abs_tol;
  fine.evaluations += coarse.evaluations;
  return fine;
}

}  // namespace qtomo::quadrature

#endif  // QTOMO_QUADRATURE_HPP
