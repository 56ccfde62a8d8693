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
/// Leading terms of Laplace integrals
///
///     I(N) = \int x^m g(x, z) exp(N f(x, z)) dx dz
///
/// over (0,1) x (-1,1)^n (boundary case, the maximizer sits on the face x = 0)
/// or over (-1,1)^n (interior case, no x and no x^m weight). The maximizer of
/// f must be at the origin; callers shift coordinates beforehand.
///
/// Every evaluator returns an AsymptoticValue, which keeps the exp(N f(0))
/// factor as a separate log-scale so values with N f(0) far below the double
/// range remain usable.

#ifndef QTOMO_LAPLACE_HPP
#define QTOMO_LAPLACE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/finite_diff.hpp"
#include "qtomo/quadrature.hpp"

namespace qtomo::laplace {

using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// A smooth real function of (x, z), x the boundary coordinate (dim_x = 1) or
/// absent (dim_x = 0, x is then always passed as 0).
struct ScalarField {
  int dim_x = 0;
  int dim_z = 0;
  std::function<double(double, const RVector&)> eval;
  /// Optional analytic derivatives with respect to z.
  std::function<RVector(double, const RVector&)> grad_z;
  std::function<RMatrix(double, const RVector&)> hess_z;

  double operator()(double x, const RVector& z) const { return eval(x, z); }
};

/// Throws DomainError if the field is not finite on a sample grid of the closed
/// box [0,1]^dim_x x [-1,1]^dim_z. In high dimension the points per axis are
/// reduced (to no fewer than 3) so that the grid stays near 10^4 points.
inline void validate(const ScalarField& field, int per_axis = 5) {
  if (field.dim_x < 0 || field.dim_x > 1 || field.dim_z < 0) {
    throw DimensionError("ScalarField: dim_x must be 0 or 1 and dim_z >= 0");
  }
  if (!field.eval) throw DomainError("ScalarField: no evaluation callable");
  const int dims = field.dim_x + field.dim_z;
  while (per_axis > 3 && std::pow(static_cast<double>(per_axis), dims) > 1e4) --per_axis;
  long total = 1;
  for (int k = 0; k < dims; ++k) total *= per_axis;
  RVector z(field.dim_z);
  for (long idx = 0; idx < total; ++idx) {
    long rest = idx;
    double x = 0.0;
    for (int k = 0; k < dims; ++k) {
      const double t = static_cast<double>(rest % per_axis) / (per_axis - 1);
      rest /= per_axis;
      if (k < field.dim_x) {
        x = t;
      } else {
        z(k - field.dim_x) = -1.0 + 2.0 * t;
      }
    }
    if (!std::isfinite(field.eval(x, z))) {
      throw DomainError("ScalarField: non-finite value on the closed box");
    }
  }
}

/// Local data at the maximizer needed by the leading-term formulas.
struct ExpansionInput {
  double f0 = 0.0;      ///< f at the maximizer
  double grad_x = 0.0;  ///< df/dx at the maximizer (boundary case only, must be < 0)
  RMatrix hess_z;       ///< d2f/dz2 at the maximizer, n x n, negative definite
  double g0 = 0.0;      ///< g at the maximizer
  RMatrix g_hess_z;     ///< d2g/dz2 at the maximizer (second-order branches)
  int m = 0;            ///< monomial weight exponent (boundary case only)
  double N = 1.0;
};

/// value = leading * N^order * exp(log_scale).
struct AsymptoticValue {
  double leading = 0.0;
  double order = 0.0;
  double log_scale = 0.0;
  double N = 1.0;

  /// leading * N^order, i.e. the value with exp(log_scale) stripped.
  double scaled() const { return leading * std::pow(N, order); }
  double value() const { return leading * std::exp(order * std::log(N) + log_scale); }
  double log_abs() const { return std::log(std::abs(leading)) + order * std::log(N) + log_scale; }
};

/// a / b, computed without forming either exp(log_scale).
inline double ratio(const AsymptoticValue& a, const AsymptoticValue& b) {
  return (a.leading / b.leading) *
         std::exp(a.order * std::log(a.N) - b.order * std::log(b.N) + a.log_scale - b.log_scale);
}

/// tr(-G F^{-1}); invariant under simultaneous congruence G -> J^T G J,
/// F -> J^T F J.
inline double trace_pairing(const RMatrix& g_hess, const RMatrix& f_hess) {
  if (f_hess.rows() != f_hess.cols() || g_hess.rows() != f_hess.rows() ||
      g_hess.cols() != f_hess.cols()) {
    throw DimensionError("trace_pairing: Hessians must be square and of equal size");
  }
  if (f_hess.rows() == 0) return 0.0;
  Eigen::FullPivLU<RMatrix> lu(f_hess);
  if (!lu.isInvertible()) throw DomainError("trace_pairing: f Hessian is singular");
  return -lu.solve(g_hess).trace();
}

namespace detail {

/// sqrt|det H| after checking that H is negative definite.
inline double sqrt_abs_det_negative_definite(const RMatrix& hess) {
  if (hess.rows() != hess.cols()) throw DimensionError("Hessian must be square");
  if (hess.rows() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<RMatrix> eig(0.5 * (hess + hess.transpose()),
                                             Eigen::EigenvaluesOnly);
  const RVector& lambda = eig.eigenvalues();
  if (lambda.maxCoeff() >= -1e-12) {
    throw DomainError("Hessian of f is not negative definite (largest eigenvalue " +
                      std::to_string(lambda.maxCoeff()) + ")");
  }
  return std::exp(0.5 * lambda.array().abs().log().sum());
}

inline double two_pi_pow_half(Eigen::Index n) {
  return std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(n));
}

inline void require_boundary(const ExpansionInput& in) {
  if (!(in.grad_x < 0.0)) {
    throw DomainError("boundary expansion requires df/dx < 0 at the maximizer");
  }
  if (in.m < 0) throw DomainError("boundary expansion requires m >= 0");
}

inline void require_second_order(const ExpansionInput& in) {
  if (in.g0 != 0.0) throw DomainError("second-order branch requires g(0) = 0");
  if (in.g_hess_z.rows() != in.hess_z.rows() || in.g_hess_z.cols() != in.hess_z.cols()) {
    throw DimensionError("second-order branch requires g_hess_z of the same size as hess_z");
  }
}

inline void require_positive_n(const ExpansionInput& in) {
  if (!(in.N > 0.0)) throw DomainError("N must be positive");
}

}  // namespace detail

/// g(0) (2 pi)^{n/2} e^{N f(0)} N^{-n/2} / sqrt|det f''|.
inline AsymptoticValue interior_leading(const ExpansionInput& in) {
  detail::require_positive_n(in);
  if (in.g0 == 0.0) throw DomainError("interior_leading requires g(0) != 0");
  const Eigen::Index n = in.hess_z.rows();
  const double root_det = detail::sqrt_abs_det_negative_definite(in.hess_z);
  return {in.g0 * detail::two_pi_pow_half(n) / root_det, -0.5 * static_cast<double>(n),
          in.N * in.f0, in.N};
}

/// tr(-g'' f''^{-1}) (2 pi)^{n/2} e^{N f(0)} N^{-n/2-1} / (2 sqrt|det f''|),
/// for g vanishing to first order at the maximizer.
inline AsymptoticValue interior_second_order(const ExpansionInput& in) {
  detail::require_positive_n(in);
  detail::require_second_order(in);
  const Eigen::Index n = in.hess_z.rows();
  const double root_det = detail::sqrt_abs_det_negative_definite(in.hess_z);
  const double pairing = trace_pairing(in.g_hess_z, in.hess_z);
  return {pairing * detail::two_pi_pow_half(n) / (2.0 * root_det),
          -0.5 * static_cast<double>(n) - 1.0, in.N * in.f0, in.N};
}

/// g(0,0) m! (2 pi)^{n/2} e^{N f(0,0)} N^{-m-n/2-1}
///   / (sqrt|det f''_z| (-df/dx)^{m+1}).
/// n = 0 is admitted with an empty determinant equal to 1.
inline AsymptoticValue boundary_leading(const ExpansionInput& in) {
  detail::require_positive_n(in);
  detail::require_boundary(in);
  if (in.g0 == 0.0) throw DomainError("boundary_leading requires g(0,0) != 0");
  const Eigen::Index n = in.hess_z.rows();
  const double root_det = detail::sqrt_abs_det_negative_definite(in.hess_z);
  const double m_fact = std::tgamma(in.m + 1.0);
  const double slope = std::pow(-in.grad_x, in.m + 1.0);
  return {in.g0 * m_fact * detail::two_pi_pow_half(n) / (root_det * slope),
          -static_cast<double>(in.m) - 0.5 * static_cast<double>(n) - 1.0, in.N * in.f0, in.N};
}

/// tr(-g''_z f''_z^{-1}) m! (2 pi)^{n/2} e^{N f(0,0)} N^{-m-n/2-2}
///   / (2 sqrt|det f''_z| (-df/dx)^{m+1}).
inline AsymptoticValue boundary_second_order(const ExpansionInput& in) {
  detail::require_positive_n(in);
  detail::require_boundary(in);
  detail::require_second_order(in);
  const Eigen::Index n = in.hess_z.rows();
  const double root_det = detail::sqrt_abs_det_negative_definite(in.hess_z);
  const double pairing = trace_pairing(in.g_hess_z, in.hess_z);
  const double m_fact = std::tgamma(in.m + 1.0);
  const double slope = std::pow(-in.grad_x, in.m + 1.0);
  return {pairing * m_fact * detail::two_pi_pow_half(n) / (2.0 * root_det * slope),
          -static_cast<double>(in.m) - 0.5 * static_cast<double>(n) - 2.0, in.N * in.f0, in.N};
}

namespace detail {

inline RMatrix z_hessian(const ScalarField& field) {
  const RVector origin = RVector::Zero(field.dim_z);
  if (field.hess_z) return field.hess_z(0.0, origin);
  return fd::hessian([&field](const RVector& z) { return field.eval(0.0, z); }, origin);
}

/// Second-order one-sided difference for df/dx at the origin.
inline double x_derivative(const ScalarField& field) {
  const RVector origin = RVector::Zero(field.dim_z);
  const double h = fd::default_step();
  return (-3.0 * field.eval(0.0, origin) + 4.0 * field.eval(h, origin) -
          field.eval(2.0 * h, origin)) /
         (2.0 * h);
}

}  // namespace detail

/// Build the formula inputs from f and g, using analytic z-derivatives when the
/// fields provide them and central finite differences otherwise.
inline ExpansionInput expansion_input_at_origin(const ScalarField& f, const ScalarField& g, int m,
                                                double N) {
  if (f.dim_x != g.dim_x || f.dim_z != g.dim_z) {
    throw DimensionError("f and g must share (dim_x, dim_z)");
  }
  ExpansionInput in;
  const RVector origin = RVector::Zero(f.dim_z);
  in.f0 = f(0.0, origin);
  in.grad_x = f.dim_x == 1 ? detail::x_derivative(f) : 0.0;
  in.hess_z = detail::z_hessian(f);
  in.g0 = g(0.0, origin);
  in.g_hess_z = detail::z_hessian(g);
  in.m = m;
  in.N = N;
  return in;
}

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

/// Leading Bayesian mean g(0,0) and variance tr(-h'' f''^{-1}) / (2N) with
/// h = (g - g(0,0))^2. The x^m weight does not enter the leading variance; m
/// is only checked for the boundary hypotheses.
inline MeanVariance corollary_mean_variance(const ScalarField& f, const ScalarField& g, int m,
                                            double N) {
  if (f.dim_x != g.dim_x || f.dim_z != g.dim_z) {
    throw DimensionError("f and g must share (dim_x, dim_z)");
  }
  if (!(N > 0.0)) throw DomainError("N must be positive");
  if (m < 0) throw DomainError("m must be nonnegative");
  validate(f);
  validate(g);
  const RMatrix f_hess = detail::z_hessian(f);
  detail::sqrt_abs_det_negative_definite(f_hess);
  if (f.dim_x == 1 && !(detail::x_derivative(f) < 0.0)) {
    throw DomainError("corollary_mean_variance: df/dx at the boundary maximizer must be < 0");
  }
  const RVector origin = RVector::Zero(f.dim_z);
  const double g0 = g(0.0, origin);
  RMatrix h_hess;
  if (g.grad_z) {
    // h = (g - g0)^2 has h'' = 2 grad(g) grad(g)^T at a point where g = g0.
    const RVector dg = g.grad_z(0.0, origin);
    h_hess = 2.0 * dg * dg.transpose();
  } else {
    h_hess = fd::hessian(
        [&g, g0](const RVector& z) {
          const double dev = g.eval(0.0, z) - g0;
          return dev * dev;
        },
        origin);
  }
  return {g0, trace_pairing(h_hess, f_hess) / (2.0 * N)};
}

namespace detail {

/// Axes for the integration box with breakpoints graded toward the peak, whose
/// width is about 1/N along x and 1/sqrt(N) along z.
inline std::vector<quadrature::Axis> peak_graded_axes(int dim_x, int dim_z, double N) {
  std::vector<quadrature::Axis> axes;
  if (dim_x == 1) {
    quadrature::Axis ax{0.0, 1.0, {}};
    for (double c = 1.0; c / N < 1.0; c *= 4.0) ax.breakpoints.push_back(c / N);
    axes.push_back(ax);
  }
  const double w = 1.0 / std::sqrt(N);
  for (int k = 0; k < dim_z; ++k) {
    quadrature::Axis az{-1.0, 1.0, {0.0}};
    for (double c = 1.0; c * w < 1.0; c *= 3.0) {
      az.breakpoints.push_back(c * w);
      az.breakpoints.push_back(-c * w);
    }
    axes.push_back(az);
  }
  return axes;
}

inline double log_peak(const ScalarField& f, double N) {
  // f(0) is the maximum by hypothesis; the grid guard keeps exp() from
  // overflowing when a caller violates that.
  const RVector origin = RVector::Zero(f.dim_z);
  double peak = f(0.0, origin);
  const int dims = f.dim_x + f.dim_z;
  const int per_axis = 9;
  long total = 1;
  for (int k = 0; k < dims; ++k) total *= per_axis;
  RVector z(f.dim_z);
  for (long idx = 0; idx < total; ++idx) {
    long rest = idx;
    double x = 0.0;
    for (int k = 0; k < dims; ++k) {
      const double t = static_cast<double>(rest % per_axis) / (per_axis - 1);
      rest /= per_axis;
      if (k < f.dim_x) {
        x = t;
      } else {
        z(k - f.dim_x) = -1.0 + 2.0 * t;
      }
    }
    peak = std::max(peak, f(x, z));
  }
  return N * peak;
}

inline double weighted_integral(const ScalarField& f, const std::function<double(double, const RVector&)>& weight,
                                int m, double N, double log_scale, double rel_tol) {
  const auto axes = peak_graded_axes(f.dim_x, f.dim_z, N);
  const int dim_x = f.dim_x;
  const int dim_z = f.dim_z;
  RVector z(dim_z);
  auto integrand = [&](const std::vector<double>& p) {
    const double x = dim_x == 1 ? p[0] : 0.0;
    for (int k = 0; k < dim_z; ++k) z(k) = p[dim_x + k];
    const double e = std::exp(N * f(x, z) - log_scale);
    if (e == 0.0) return 0.0;
    const double xm = (dim_x == 1 && m > 0) ? std::pow(x, m) : 1.0;
    return xm * weight(x, z) * e;
  };
  quadrature::Options opts;
  opts.rel_tol = rel_tol;
  return quadrature::integrate_box(integrand, axes, opts).value;
}

}  // namespace detail

/// Reference value of the Laplace integral by iterated adaptive Gauss-Kronrod
/// quadrature (dim_x + dim_z <= 3). The exp(N f_max) factor is returned as
/// log_scale with order 0. Throws ConvergenceError when the subdivision budget
/// runs out.
inline AsymptoticValue quadrature_reference(const ScalarField& f, const ScalarField& g, int m,
                                            double N, double rel_tol = 1e-10) {
  if (f.dim_x != g.dim_x || f.dim_z != g.dim_z) {
    throw DimensionError("f and g must share (dim_x, dim_z)");
  }
  if (f.dim_x + f.dim_z > 3) throw DimensionError("quadrature_reference supports at most 3 dimensions");
  if (!(N > 0.0)) throw DomainError("N must be positive");
  validate(f);
  validate(g);
  const double log_scale = detail::log_peak(f, N);
  const double value = detail::weighted_integral(f, g.eval, m, N, log_scale, rel_tol);
  return {value, 0.0, log_scale, N};
}

/// Bayesian mean and variance of g under the weight x^m exp(N f), by
/// quadrature (the oracle for corollary_mean_variance).
inline MeanVariance quadrature_mean_variance(const ScalarField& f, const ScalarField& g, int m,
                                             double N, double rel_tol = 1e-10) {
  if (f.dim_x != g.dim_x || f.dim_z != g.dim_z) {
    throw DimensionError("f and g must share (dim_x, dim_z)");
  }
  if (f.dim_x + f.dim_z > 3) throw DimensionError("quadrature supports at most 3 dimensions");
  validate(f);
  validate(g);
  const double log_scale = detail::log_peak(f, N);
  auto one = [](double, const RVector&) { return 1.0; };
  const double z0 = detail::weighted_integral(f, one, m, N, log_scale, rel_tol);
  const double z1 = detail::weighted_integral(f, g.eval, m, N, log_scale, rel_tol);
  const double mean = z1 / z0;
  auto centered = [&g, mean](double x, const RVector& z) {
    const double dev = g.eval(x, z) - mean;
    return dev * dev;
  };
  const double z2 = detail::weighted_integral(f, centered, m, N, log_scale, rel_tol);
  return {mean, z2 / z0};
}

}  // namespace qtomo::laplace

#endif  // QTOMO_LAPLACE_HPP
