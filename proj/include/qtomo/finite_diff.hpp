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

#ifndef QTOMO_FINITE_DIFF_HPP
#define QTOMO_FINITE_DIFF_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace qtomo::fd {

using Function = std::function<double(const Eigen::VectorXd&)>;

/// eps^(1/3), the relative step for first differences.
inline double default_step() { return std::cbrt(std::numeric_limits<double>::epsilon()); }

/// eps^(1/4), the relative step for second differences: roundoff there grows
/// as eps / h^2 rather than eps / h.
inline double hessian_step() { return std::sqrt(std::sqrt(std::numeric_limits<double>::epsilon())); }

inline double step_for(double coordinate, double scale) {
  return scale * std::max(1.0, std::abs(coordinate));
}

inline Eigen::VectorXd gradient(const Function& f, const Eigen::VectorXd& at,
                                double scale = default_step()) {
  const Eigen::Index n = at.size();
  Eigen::VectorXd g(n);
  Eigen::VectorXd p = at;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = step_for(at(i), scale);
    p(i) = at(i) + h;
    const double fp = f(p);
    p(i) = at(i) - h;
    const double fm = f(p);
    p(i) = at(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Central-difference Hessian; the result is exactly symmetric.
inline Eigen::MatrixXd hessian(const Function& f, const Eigen::VectorXd& at,
                               double scale = hessian_step()) {
  const Eigen::Index n = at.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd p = at;
  const double f0 = f(at);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = step_for(at(i), scale);
    p(i) = at(i) + hi;
    const double fp = f(p);
    p(i) = at(i) - hi;
    const double fm = f(p);
    p(i) = at(i);
    h(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double hj = step_for(at(j), scale);
      auto eval = [&](double si, double sj) {
        p(i) = at(i) + si * hi;
        p(j) = at(j) + sj * hj;
        const double v = f(p);
        p(i) = at(i);
        p(j) = at(j);
        return v;
      };
      const double mixed =
          (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * hi * hj);
      h(i, j) = mixed;
      h(j, i) = mixed;
    }
  }
  return h;
}

}  // namespace qtomo::fd

#endif  // QTOMO_FINITE_DIFF_HPP
