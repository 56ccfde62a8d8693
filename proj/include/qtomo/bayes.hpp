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
/// Asymptotic Bayesian mean and variance of an observable A at a certified
/// maximum-likelihood state rho of rank r:
///
///     mean     = tr(A rho) + O(1/N)
///     variance = tr(A_par F^{-1}(A_par)) / N + O(1/N^2)
///
/// where A_par is the orthogonal projection of A on the tangent space of the
/// unit-trace rank-r manifold at rho and F is the Fisher super-operator
///
///     F(X) = sum_mu w_mu tr(X Y_par) Y_par / tr(rho Y)^2
///            + (lambda I - grad f) X rho^+ + rho^+ X (lambda I - grad f).
///
/// F is the Hessian of -f along the manifold; it is assembled in an
/// orthonormal tangent basis and inverted there.

#ifndef QTOMO_BAYES_HPP
#define QTOMO_BAYES_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/hermitian.hpp"
#include "qtomo/likelihood.hpp"
#include "qtomo/maxlike.hpp"

namespace qtomo {

/// Exponent of the boundary weight x^m: (d-r+1)(d-r-1). Equals -1 at full
/// rank, where there is no boundary coordinate.
inline int boundary_exponent(int d, int r) {
  if (d < 1 || r < 1 || r > d) throw DomainError("boundary_exponent: need 1 <= r <= d");
  return (d - r + 1) * (d - r - 1);
}

/// Dimension of the tangent space to the unit-trace rank-r manifold.
inline int tangent_dimension(int d, int r) {
  if (d < 1 || r < 1 || r > d) throw DomainError("tangent_dimension: need 1 <= r <= d");
  return 2 * r * (d - r) + (r + 1) * (r - 1);
}

/// A - tr(A P)/tr(P) P - (I - P) A (I - P).
inline HermitianMatrix tangent_project(const HermitianMatrix& a, const HermitianMatrix& projector) {
  require_same_dim(a, projector, "tangent_project");
  const double rank = projector.trace();
  if (!(rank > 0.5)) throw DomainError("tangent_project: projector has zero trace");
  const int d = a.dim();
  const CMatrix q = CMatrix::Identity(d, d) - projector.matrix();
  const double coeff = frobenius_inner(a, projector) / rank;
  return HermitianMatrix(a.matrix() - coeff * projector.matrix() - q * a.matrix() * q);
}

struct TangentBasis {
  int rank = 0;
  std::vector<HermitianMatrix> basis;  ///< Frobenius-orthonormal

  std::size_t size() const { return basis.size(); }

  /// Coordinates tr(E_i X) of X in the basis.
  RVector coordinates(const HermitianMatrix& x) const {
    RVector c(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) c(static_cast<Eigen::Index>(i)) = frobenius_inner(basis[i], x);
    return c;
  }

  HermitianMatrix combine(const RVector& c) const {
    if (c.size() != static_cast<Eigen::Index>(basis.size()) || basis.empty()) {
      throw DimensionError("TangentBasis::combine: coefficient count does not match the basis");
    }
    CMatrix m = CMatrix::Zero(basis.front().dim(), basis.front().dim());
    for (std::size_t i = 0; i < basis.size(); ++i) m += c(static_cast<Eigen::Index>(i)) * basis[i].matrix();
    return HermitianMatrix(m);
  }
};

namespace detail {

inline void check_rank(const DensityMatrix& rho, int r, const char* where) {
  if (r < 1 || r > rho.dim()) {
    throw DomainError(std::string(where) + ": rank must lie in [1, d], got " + std::to_string(r));
  }
}

/// rho^+ inverting exactly the r largest eigenvalues. With ascending
/// eigenvalues the range of rho is spanned by the last r eigenvectors.
inline HermitianMatrix range_pseudo_inverse(const DensityMatrix& rho, int r) {
  const SpectralDecomposition& s = rho.spectrum();
  const int d = rho.dim();
  RVector inv = RVector::Zero(d);
  for (int k = d - r; k < d; ++k) inv(k) = 1.0 / s.eigenvalues(k);
  return HermitianMatrix(s.unitary * inv.cast<Complex>().asDiagonal() * s.unitary.adjoint());
}

}  // namespace detail

/// Orthonormal tangent basis built in the eigenbasis of rho: symmetric and
/// antisymmetric couplings of each kernel vector with each range vector, then
/// a traceless Hermitian basis of the range block. The rank is tr(projector).
inline TangentBasis build_tangent_basis(const DensityMatrix& rho, const HermitianMatrix& projector) {
  require_same_dim(rho.hermitian(), projector, "build_tangent_basis");
  const int d = rho.dim();
  const int r = static_cast<int>(std::lround(projector.trace()));
  if (r < 1) throw DomainError("build_tangent_basis: rank is zero");
  detail::check_rank(rho, r, "build_tangent_basis");
  const CMatrix& u = rho.spectrum().unitary;
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i_unit(0.0, 1.0);

  TangentBasis tb;
  tb.rank = r;
  auto add = [&](const CMatrix& local) { tb.basis.emplace_back(u * local * u.adjoint()); };
  auto unit = [d](int a, int b) {
    CMatrix e = CMatrix::Zero(d, d);
    e(a, b) = 1.0;
    return e;
  };

  const int first_range = d - r;
  for (int k = 0; k < first_range; ++k) {
    for (int j = first_range; j < d; ++j) {
      add(s * (unit(k, j) + unit(j, k)));
      add(s * i_unit * (unit(k, j) - unit(j, k)));
    }
  }
  for (int a = first_range; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      add(s * (unit(a, b) + unit(b, a)));
      add(s * i_unit * (unit(a, b) - unit(b, a)));
    }
  }
  // Traceless diagonal directions: (sum_{l<k} e_l - k e_k) / sqrt(k(k+1)).
  for (int k = 1; k < r; ++k) {
    CMatrix diag = CMatrix::Zero(d, d);
    const double norm = 1.0 / std::sqrt(static_cast<double>(k) * (k + 1));
    for (int l = 0; l < k; ++l) diag(first_range + l, first_range + l) = norm;
    diag(first_range + k, first_range + k) = -k * norm;
    add(diag);
  }
  return tb;
}

/// The Fisher super-operator at a certified maximizer together with its
/// matrix in a tangent basis.
class FisherOperator {
 public:
  FisherOperator(const MeasurementDataset& ds, const DensityMatrix& rho, const OptimalityCertificate& cert)
      : rank_(cert.rank), lambda_bar_(cert.lambda_bar) {
    if (!cert.passes()) throw CertificateError("FisherOperator: optimality certificate does not pass");
    detail::check_rank(rho, cert.rank, "FisherOperator");
    const int d = rho.dim();
    projector_ = cert.projector;
    pinv_ = detail::range_pseudo_inverse(rho, rank_);
    slack_ = HermitianMatrix::identity(d) * lambda_bar_ - gradient(ds, rho);
    const std::vector<double> p = probabilities(ds, rho.hermitian());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double w = ds.weights()[i];
      if (w <= 0.0) continue;
      effects_par_.push_back(tangent_project(ds.effects()[i].matrix(), projector_));
      coefficients_.push_back(w / (p[i] * p[i]));
    }
    basis_ = build_tangent_basis(rho, projector_);

    const Eigen::Index n = static_cast<Eigen::Index>(basis_.size());
    matrix_ = RMatrix::Zero(n, n);
    std::vector<HermitianMatrix> images;
    images.reserve(basis_.size());
    for (const auto& e : basis_.basis) images.push_back(apply(e));
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        matrix_(i, j) = frobenius_inner(basis_.basis[static_cast<std::size_t>(i)], images[static_cast<std::size_t>(j)]);
      }
    }
    matrix_ = (0.5 * (matrix_ + matrix_.transpose())).eval();
    if (n > 0) {
      Eigen::SelfAdjointEigenSolver<RMatrix> eig(matrix_, Eigen::EigenvaluesOnly);
      min_eigenvalue_ = eig.eigenvalues().minCoeff();
      max_eigenvalue_ = eig.eigenvalues().maxCoeff();
      llt_.compute(matrix_);
    }
  }

  /// F(X) for any Hermitian X (not only tangent ones).
  HermitianMatrix apply(const HermitianMatrix& x) const {
    const CMatrix boundary = slack_.matrix() * x.matrix() * pinv_.matrix();
    CMatrix out = boundary + boundary.adjoint();
    for (std::size_t i = 0; i < effects_par_.size(); ++i) {
      out += coefficients_[i] * frobenius_inner(x, effects_par_[i]) * effects_par_[i].matrix();
    }
    return HermitianMatrix(out);
  }

  /// True for an empty basis (d = 1), where F has nothing to invert.
  bool positive_definite() const {
    return basis_.size() == 0 || (min_eigenvalue_ > 0.0 && llt_.info() == Eigen::Success);
  }

  /// Ratio of extreme eigenvalues of the assembled matrix (+inf if not PD).
  double condition_number() const {
    if (basis_.size() == 0) return 1.0;
    return positive_definite() ? max_eigenvalue_ / min_eigenvalue_ : std::numeric_limits<double>::infinity();
  }

  /// Tangent X with F(X) - a_par orthogonal to the tangent space.
  HermitianMatrix solve(const HermitianMatrix& a_par) const {
    if (!positive_definite()) {
      throw CertificateError("fisher_solve: assembled Fisher matrix is not positive definite");
    }
    if (basis_.size() == 0) return HermitianMatrix::zero(projector_.dim());
    return basis_.combine(llt_.solve(basis_.coordinates(a_par)));
  }

  const TangentBasis& basis() const { return basis_; }
  const RMatrix& matrix() const { return matrix_; }
  const HermitianMatrix& projector() const { return projector_; }
  int rank() const { return rank_; }
  double lambda_bar() const { return lambda_bar_; }

 private:
  int rank_ = 0;
  double lambda_bar_ = 0.0;
  HermitianMatrix projector_;
  HermitianMatrix pinv_;
  HermitianMatrix slack_;
  std::vector<HermitianMatrix> effects_par_;
  std::vector<double> coefficients_;
  TangentBasis basis_;
  RMatrix matrix_;
  Eigen::LLT<RMatrix> llt_;
  double min_eigenvalue_ = 0.0;
  double max_eigenvalue_ = 0.0;
};

inline HermitianMatrix fisher_apply(const MeasurementDataset& ds, const DensityMatrix& rho,
                                    const OptimalityCertificate& cert, const HermitianMatrix& x) {
  return FisherOperator(ds, rho, cert).apply(x);
}

inline HermitianMatrix fisher_solve(const MeasurementDataset& ds, const DensityMatrix& rho,
                                    const OptimalityCertificate& cert, const HermitianMatrix& a_par) {
  return FisherOperator(ds, rho, cert).solve(a_par);
}

struct ReportOptions {
  double gap_tol = 1e-6;
  double condition_cap = 1e12;
};

struct AsymptoticReport {
  DensityMatrix rho_ml;
  OptimalityCertificate certificate;
  int dim = 0;
  int rank = 0;
  int m = 0;
  int n = 0;
  long total_shots = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< NaN when refused (degenerate gap or singular F)
  double lambda_bar = 0.0;
  double gap = 0.0;
  double fisher_condition = 0.0;
  bool valid = false;
  std::vector<std::string> flags;
};

/// Mean and variance of A at a certified maximizer. Throws CertificateError
/// when the certificate fails. A degenerate spectral gap or a singular Fisher
/// matrix yields variance = NaN; those and an ill-conditioned rho or F are
/// reported through `flags` with valid = false.
inline AsymptoticReport bayes_report(const MeasurementDataset& ds, const HermitianMatrix& a,
                                     const DensityMatrix& rho, const OptimalityCertificate& cert,
                                     const ReportOptions& opts = {}) {
  require_dim(ds, a, "bayes_report");
  if (!cert.passes()) throw CertificateError("bayes_report: optimality certificate does not pass");
  const int d = rho.dim();

  AsymptoticReport rep;
  rep.rho_ml = rho;
  rep.certificate = cert;
  rep.dim = d;
  rep.rank = cert.rank;
  rep.m = boundary_exponent(d, cert.rank);
  rep.n = tangent_dimension(d, cert.rank);
  rep.total_shots = ds.total_shots();
  rep.mean = frobenius_inner(a, rho.hermitian());
  rep.lambda_bar = cert.lambda_bar;
  rep.gap = spectral_gap(cert, gradient(ds, rho));
  rep.variance = std::numeric_limits<double>::quiet_NaN();

  if (!(rep.gap > opts.gap_tol)) rep.flags.emplace_back("degenerate_gap");
  const RVector& eig = rho.spectrum().eigenvalues;
  if (eig(d - 1) / eig(d - cert.rank) > opts.condition_cap) rep.flags.emplace_back("ill_conditioned_state");

  const FisherOperator fisher(ds, rho, cert);
  rep.fisher_condition = fisher.condition_number();
  if (!fisher.positive_definite()) {
    rep.flags.emplace_back("fisher_not_positive_definite");
  } else if (rep.fisher_condition > opts.condition_cap) {
    rep.flags.emplace_back("ill_conditioned_fisher");
  }

  const bool refused = !(rep.gap > opts.gap_tol) || !fisher.positive_definite();
  if (!refused) {
    const HermitianMatrix a_par = tangent_project(a, cert.projector);
    const double v = frobenius_inner(a_par, fisher.solve(a_par)) / static_cast<double>(ds.total_shots());
    rep.variance = std::max(v, 0.0);
  }
  rep.valid = rep.flags.empty();
  return rep;
}

}  // namespace qtomo

#endif  // QTOMO_BAYES_HPP
