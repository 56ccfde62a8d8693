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

/// \file
/// Convergence tables comparing the leading Laplace terms with quadrature on
/// a fixed family of non-Gaussian test functions. The exponent is
///
///   f(x, z) = -a x (1 + z1/4) - 0.3 x^2 - z^T S z / 2 - 0.1 sum z_k^4 + 0.05 z1^3
///
/// on [0,1] x [-1,1]^n (x absent in the interior case), maximized at the
/// origin. Every family has a nonzero 1/N correction, so the relative error
/// of the leading term halves when N doubles.

#ifndef QTOMO_LAPLACE_CHECK_HPP
#define QTOMO_LAPLACE_CHECK_HPP

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/laplace.hpp"

namespace qtomo::laplace {

enum class CheckCase { interior, boundary };
enum class CheckQuantity { leading, second_order, variance };

struct CheckRow {
  double N = 0.0;
  double asymptotic = 0.0;  ///< with exp(N f(0)) stripped (f(0) = 0 here)
  double quadrature = 0.0;
  double ratio = 0.0;       ///< quadrature / asymptotic
  double rel_error = 0.0;   ///< |ratio - 1|
};

struct CheckTable {
  CheckCase kind = CheckCase::interior;
  CheckQuantity quantity = CheckQuantity::leading;
  int m = 0;
  int n = 0;
  std::vector<CheckRow> rows;

  /// rel_error(N_k) / rel_error(N_{k+1}) for consecutive rows.
  std::vector<double> error_ratios() const {
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) out.push_back(rows[k].rel_error / rows[k + 1].rel_error);
    return out;
  }

  std::string csv() const {
    std::ostringstream os;
    os.precision(12);
    os << "N,asymptotic,quadrature,ratio,rel_error\n";
    for (const auto& r : rows) {
      os << r.N << ',' << r.asymptotic << ',' << r.quadrature << ',' << r.ratio << ',' << r.rel_error << '\n';
    }
    return os.str();
  }
};

namespace family {

inline constexpr double kSlope = 1.2;

inline RMatrix quadratic_block(int n) {
  RMatrix s(3, 3);
  s << 1.0, 0.3, 0.1, 0.3, 2.0, -0.2, 0.1, -0.2, 1.5;
  return s.topLeftCorner(n, n);
}

inline RMatrix weight_block(int n) {
  RMatrix g(3, 3);
  g << 1.0, 0.4, 0.0, 0.4, 0.5, 0.1, 0.0, 0.1, 2.0;
  return g.topLeftCorner(n, n);
}

inline void require_n(int n) {
  if (n < 0 || n > 3) throw DimensionError("laplace check: n must lie in [0, 3]");
}

inline ScalarField exponent(int dim_x, int n) {
  require_n(n);
  const RMatrix s = quadratic_block(n);
  ScalarField f;
  f.dim_x = dim_x;
  f.dim_z = n;
  // Written out elementwise: this runs millions of times per table and must
  // not allocate.
  f.eval = [s, n](double x, const RVector& z) {
    const double z1 = n > 0 ? z(0) : 0.0;
    double v = -kSlope * x * (1.0 + 0.25 * z1) - 0.3 * x * x + 0.05 * z1 * z1 * z1;
    for (int i = 0; i < n; ++i) {
      const double zi2 = z(i) * z(i);
      v -= 0.5 * s(i, i) * zi2 + 0.1 * zi2 * zi2;
      for (int j = 0; j < i; ++j) v -= s(i, j) * z(i) * z(j);
    }
    return v;
  };
  f.hess_z = [s, n](double, const RVector& z) {
    RMatrix h = -s;
    for (int k = 0; k < n; ++k) h(k, k) -= 1.2 * z(k) * z(k);
    if (n > 0) h(0, 0) += 0.3 * z(0);
    return h;
  };
  return f;
}

/// Nonvanishing weight for the leading branch.
inline ScalarField leading_weight(int dim_x, int n) {
  require_n(n);
  ScalarField g;
  g.dim_x = dim_x;
  g.dim_z = n;
  g.eval = [n](double x, const RVector& z) {
    double v = 1.3 + 0.4 * x;
    if (n > 0) v += 0.7 * z(0) + 0.2 * z.squaredNorm();
    if (n > 1) v += 0.5 * z(0) * z(1);
    return v;
  };
  g.hess_z = [n](double, const RVector&) {
    RMatrix h = 0.4 * RMatrix::Identity(n, n);
    if (n > 1) h(0, 1) = h(1, 0) = 0.5;
    return h;
  };
  return g;
}

/// Weight vanishing to first order at the origin, for the second branch.
inline ScalarField second_order_weight(int dim_x, int n) {
  require_n(n);
  const RMatrix gq = weight_block(n);
  ScalarField g;
  g.dim_x = dim_x;
  g.dim_z = n;
  g.eval = [gq, n](double x, const RVector& z) {
    double v = 0.8 * x * x;
    if (n > 0) v += 0.6 * x * z(0) + 0.3 * z(0) * z(0) * z(0);
    for (int i = 0; i < n; ++i) {
      v += gq(i, i) * z(i) * z(i);
      for (int j = 0; j < i; ++j) v += 2.0 * gq(i, j) * z(i) * z(j);
    }
    return v;
  };
  g.hess_z = [gq, n](double, const RVector& z) {
    RMatrix h = 2.0 * gq;
    if (n > 0) h(0, 0) += 1.8 * z(0);
    return h;
  };
  return g;
}

/// Observable whose posterior variance is checked.
inline ScalarField observable(int dim_x, int n) {
  if (n < 1) throw DimensionError("laplace check: the variance case needs n >= 1");
  require_n(n);
  ScalarField g;
  g.dim_x = dim_x;
  g.dim_z = n;
  g.eval = [n](double x, const RVector& z) {
    double v = z(0) + 0.3 * z(0) * z(0) + 0.2 * x;
    if (n > 1) v += 0.5 * z(1);
    return v;
  };
  g.grad_z = [n](double, const RVector& z) {
    RVector v = RVector::Zero(n);
    v(0) = 1.0 + 0.6 * z(0);
    if (n > 1) v(1) = 0.5;
    return v;
  };
  return g;
}

}  // namespace family

/// Asymptotic-versus-quadrature table over the N values given. For the
/// leading and second-order quantities the integral of g x^m exp(N f) is
/// compared; for the variance quantity the posterior variance of the test
/// observable is compared with its leading term.
inline CheckTable convergence_table(CheckCase kind, CheckQuantity quantity, int m, int n,
                                    const std::vector<double>& Ns, double rel_tol = 1e-9) {
  const int dim_x = kind == CheckCase::boundary ? 1 : 0;
  if (kind == CheckCase::interior && n < 1) throw DimensionError("laplace check: interior case needs n >= 1");
  if (kind == CheckCase::interior) m = 0;
  if (dim_x + n > 3) throw DimensionError("laplace check: at most 3 integration dimensions");
  CheckTable table{kind, quantity, m, n, {}};
  const ScalarField f = family::exponent(dim_x, n);
  for (double N : Ns) {
    CheckRow row;
    row.N = N;
    if (quantity == CheckQuantity::variance) {
      const ScalarField g = family::observable(dim_x, n);
      row.asymptotic = corollary_mean_variance(f, g, m, N).variance;
      row.quadrature = quadrature_mean_variance(f, g, m, N, rel_tol).variance;
      row.ratio = row.quadrature / row.asymptotic;
    } else {
      const ScalarField g = quantity == CheckQuantity::leading ? family::leading_weight(dim_x, n)
                                                               : family::second_order_weight(dim_x, n);
      const ExpansionInput in = expansion_input_at_origin(f, g, m, N);
      AsymptoticValue asym;
      if (kind == CheckCase::interior) {
        asym = quantity == CheckQuantity::leading ? interior_leading(in) : interior_second_order(in);
      } else {
        asym = quantity == CheckQuantity::leading ? boundary_leading(in) : boundary_second_order(in);
      }
      const AsymptoticValue quad = quadrature_reference(f, g, m, N, rel_tol);
      row.asymptotic = asym.value();
      row.quadrature = quad.value();
      row.ratio = ratio(quad, asym);
    }
    row.rel_error = std::abs(row.ratio - 1.0);
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace qtomo::laplace

#endif  // QTOMO_LAPLACE_CHECK_HPP
