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

#ifndef QTOMO_HERMITIAN_HPP
#define QTOMO_HERMITIAN_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "qtomo/errors.hpp"

namespace qtomo {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Absolute eigenvalue threshold used to decide the numerical rank of a
/// unit-trace matrix.
inline constexpr double kDefaultRankTol = 1e-7;

/// Complex d x d Hermitian matrix. The constructor replaces its input by the
/// Hermitian part (H + H^dagger) / 2, so small asymmetries coming from finite
/// differences are absorbed rather than rejected.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const CMatrix& m) : m_(m) {
    if (m.rows() != m.cols()) {
      throw DimensionError("HermitianMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", expected square");
    }
    m_ = (m + m.adjoint()) * 0.5;
  }

  static HermitianMatrix zero(int dim) { return HermitianMatrix(CMatrix::Zero(dim, dim)); }
  static HermitianMatrix identity(int dim) {
    return HermitianMatrix(CMatrix::Identity(dim, dim));
  }
  static HermitianMatrix diagonal(const RVector& diag) {
    return HermitianMatrix(CMatrix(diag.cast<Complex>().asDiagonal()));
  }
  /// |v><v| (v is not normalized).
  static HermitianMatrix outer(const CVector& v) { return HermitianMatrix(v * v.adjoint()); }

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace().real(); }

  HermitianMatrix& operator+=(const HermitianMatrix& o) {
    check_same_dim(o);
    m_ += o.m_;
    return *this;
  }
  HermitianMatrix& operator-=(const HermitianMatrix& o) {
    check_same_dim(o);
    m_ -= o.m_;
    return *this;
  }
  HermitianMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }

  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(HermitianMatrix a, double s) { return a *= s; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
  friend HermitianMatrix operator-(HermitianMatrix a) { return a *= -1.0; }

 private:
  void check_same_dim(const HermitianMatrix& o) const {
    if (o.dim() != dim()) {
      throw DimensionError("HermitianMatrix: dimension mismatch (" + std::to_string(dim()) +
                           " vs " + std::to_string(o.dim()) + ")");
    }
  }

  CMatrix m_;
};

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// as the columns of `unitary`.
struct SpectralDecomposition {
  RVector eigenvalues;
  CMatrix unitary;

  HermitianMatrix reconstruct() const {
    return HermitianMatrix(unitary * eigenvalues.cast<Complex>().asDiagonal() *
                           unitary.adjoint());
  }
};

inline void require_same_dim(const HermitianMatrix& a, const HermitianMatrix& b,
                             const char* where) {
  if (a.dim() != b.dim()) {
    throw DimensionError(std::string(where) + ": dimension mismatch (" +
                         std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

/// tr(AB), real for Hermitian A and B.
inline double frobenius_inner(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b, "frobenius_inner");
  // tr(AB) = sum_ij A_ij B_ji = sum_ij A_ij conj(B_ij)
  return (a.matrix().array() * b.matrix().conjugate().array()).sum().real();
}

inline double frobenius_norm(const HermitianMatrix& a) { return a.matrix().norm(); }

inline SpectralDecomposition spectral_decompose(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) {
    throw ConvergenceError("spectral_decompose: eigen-solver did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// U H U^dagger.
inline HermitianMatrix conjugate_by(const HermitianMatrix& h, const CMatrix& u) {
  return HermitianMatrix(u * h.matrix() * u.adjoint());
}

/// AB - BA; anti-Hermitian for Hermitian arguments, so it is returned as a
/// plain complex matrix.
inline CMatrix commutator(const HermitianMatrix& a, const HermitianMatrix& b) {
  require_same_dim(a, b, "commutator");
  return a.matrix() * b.matrix() - b.matrix() * a.matrix();
}

/// Apply a real function to the spectrum: U diag(fn(lambda)) U^dagger.
inline HermitianMatrix spectral_map(const SpectralDecomposition& s,
                                    const std::function<double(double)>& fn) {
  RVector mapped = s.eigenvalues.unaryExpr(fn);
  return HermitianMatrix(s.unitary * mapped.cast<Complex>().asDiagonal() * s.unitary.adjoint());
}

/// Euclidean projection of a real vector onto the probability simplex.
inline RVector project_to_simplex(const RVector& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumulative += u[j];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

/// Hermitian, positive semidefinite, unit-trace matrix with its spectral
/// decomposition computed once at construction.
class DensityMatrix {
 public:
  static constexpr double kEigenTol = 1e-10;
  static constexpr double kTraceTol = 1e-10;

  DensityMatrix() = default;

  /// Throws DomainError unless every eigenvalue is >= -1e-10 and the trace is 1
  /// within 1e-10.
  explicit DensityMatrix(HermitianMatrix h) : h_(std::move(h)), spectrum_(spectral_decompose(h_)) {
    if (h_.dim() < 1) throw DomainError("DensityMatrix: empty matrix");
    if (std::abs(h_.trace() - 1.0) > kTraceTol) {
      throw DomainError("DensityMatrix: trace is " + std::to_string(h_.trace()) + ", expected 1");
    }
    if (spectrum_.eigenvalues.minCoeff() < -kEigenTol) {
      throw DomainError("DensityMatrix: negative eigenvalue " +
                        std::to_string(spectrum_.eigenvalues.minCoeff()));
    }
  }

  static DensityMatrix maximally_mixed(int dim) {
    return DensityMatrix(HermitianMatrix::identity(dim) * (1.0 / dim));
  }
  static DensityMatrix pure(const CVector& psi) {
    return DensityMatrix(HermitianMatrix::outer(psi / psi.norm()));
  }

  int dim() const { return h_.dim(); }
  const HermitianMatrix& hermitian() const { return h_; }
  const CMatrix& matrix() const { return h_.matrix(); }
  const SpectralDecomposition& spectrum() const { return spectrum_; }

 private:
  HermitianMatrix h_;
  SpectralDecomposition spectrum_;
};

/// Moore-Penrose pseudo-inverse in the eigenbasis of rho: eigenvalues at or
/// below rank_tol map to zero, the rest to their reciprocal.
inline HermitianMatrix pseudo_inverse(const DensityMatrix& rho, double rank_tol = kDefaultRankTol) {
  if (!(rank_tol > 0.0)) throw DomainError("pseudo_inverse: rank_tol must be positive");
  return spectral_map(rho.spectrum(), [rank_tol](double l) { return l > rank_tol ? 1.0 / l : 0.0; });
}

/// Nearest density matrix in Frobenius norm.
inline DensityMatrix project_to_density(const HermitianMatrix& h) {
  const SpectralDecomposition s = spectral_decompose(h);
  const RVector p = project_to_simplex(s.eigenvalues);
  return DensityMatrix(
      HermitianMatrix(s.unitary * p.cast<Complex>().asDiagonal() * s.unitary.adjoint()));
}

struct RankInfo {
  int rank = 0;
  HermitianMatrix projector;     ///< orthogonal projector on the retained eigenvectors
  double min_retained = 0.0;     ///< smallest eigenvalue above rank_tol (0 when rank = 0)
  double max_discarded = 0.0;    ///< largest eigenvalue at or below rank_tol (0 when none)
};

inline RankInfo numerical_rank(const DensityMatrix& rho, double rank_tol = kDefaultRankTol) {
  if (!(rank_tol > 0.0)) throw DomainError("numerical_rank: rank_tol must be positive");
  const SpectralDecomposition& s = rho.spectrum();
  const int d = rho.dim();
  RankInfo info;
  CMatrix p = CMatrix::Zero(d, d);
  double min_kept = std::numeric_limits<double>::infinity();
  double max_dropped = 0.0;
  for (int k = 0; k < d; ++k) {
    const double lambda = s.eigenvalues(k);
    if (lambda > rank_tol) {
      ++info.rank;
      p += s.unitary.col(k) * s.unitary.col(k).adjoint();
      min_kept = std::min(min_kept, lambda);
    } else {
      max_dropped = std::max(max_dropped, lambda);
    }
  }
  info.projector = HermitianMatrix(p);
  info.min_retained = info.rank > 0 ? min_kept : 0.0;
  info.max_discarded = max_dropped;
  return info;
}

inline HermitianMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return HermitianMatrix(m);
}
inline HermitianMatrix pauli_y() {
  CMatrix m(2, 2);
  m << 0, Complex(0, -1), Complex(0, 1), 0;
  return HermitianMatrix(m);
}
inline HermitianMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return HermitianMatrix(m);
}

}  // namespace qtomo

#endif  // QTOMO_HERMITIAN_HPP
