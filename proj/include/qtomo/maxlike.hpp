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
/// Maximum-likelihood state estimation over the density-matrix set and
/// certification of optimality.
///
/// A state rho is a maximizer of the concave log-likelihood f iff
///   - every positively weighted outcome has tr(rho Y) > 0,
///   - rho commutes with grad f,
///   - lambda P = P grad f and grad f <= lambda I for some lambda > 0, with P
///     the projector on the range of rho.
/// With normalized weights lambda = tr(rho grad f) = 1 identically. The
/// conditions are sufficient (and the maximizer unique) when the effects span
/// the Hermitian matrices.

#ifndef QTOMO_MAXLIKE_HPP
#define QTOMO_MAXLIKE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/hermitian.hpp"
#include "qtomo/likelihood.hpp"
#include "qtomo/random.hpp"

namespace qtomo {

struct SolverOptions {
  int max_iters = 5000;
  double grad_tol = 1e-9;  ///< tolerance on the certificate residuals
  double step_init = 1.0;
  double rank_tol = kDefaultRankTol;
  std::uint64_t seed = 0;
  bool random_start = false;  ///< start from a seeded random full-rank state instead of I/d
};

struct OptimalityCertificate {
  double lambda_bar = 0.0;
  HermitianMatrix projector;
  double commutator_residual = 0.0;      ///< ||[rho, grad f]||_F
  double eigen_equation_residual = 0.0;  ///< ||lambda P - P grad f||_F
  double psd_slack = 0.0;                ///< smallest eigenvalue of lambda I - grad f
  double min_probability = 0.0;          ///< min over weighted outcomes of tr(rho Y)
  int rank = 0;
  double min_retained_eigenvalue = 0.0;  ///< audit value for the rank call
  bool spanning = false;                 ///< effects span the Hermitian matrices (uniqueness)
  double tol = 0.0;

  bool passes() const {
    return commutator_residual <= tol && eigen_equation_residual <= tol && psd_slack >= -tol &&
           min_probability > 0.0;
  }
};

struct IterationRecord {
  int iter = 0;
  double f = 0.0;
  double step = 0.0;
  double grad_residual = 0.0;  ///< ||Proj(rho + grad f) - rho||_F
};

struct SolveResult {
  DensityMatrix rho;
  OptimalityCertificate certificate;
  std::vector<IterationRecord> trace;
  bool converged = false;  ///< certificate passed before the iteration cap
};

namespace detail {

inline OptimalityCertificate certify_with_gradient(const MeasurementDataset& ds, const DensityMatrix& rho,
                                                   const HermitianMatrix& grad, double rank_tol,
                                                   double tol, bool spanning) {
  const int d = rho.dim();
  OptimalityCertificate cert;
  cert.tol = tol;
  cert.spanning = spanning;
  const std::vector<double> p = probabilities(ds, rho.hermitian());
  double min_p = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (ds.weights()[i] > 0.0) min_p = std::min(min_p, p[i]);
  }
  cert.min_probability = min_p;
  cert.lambda_bar = frobenius_inner(rho.hermitian(), grad) / rho.hermitian().trace();
  const RankInfo rank = numerical_rank(rho, rank_tol);
  cert.rank = rank.rank;
  cert.projector = rank.projector;
  cert.min_retained_eigenvalue = rank.min_retained;
  cert.commutator_residual = commutator(rho.hermitian(), grad).norm();
  cert.eigen_equation_residual =
      (cert.lambda_bar * rank.projector.matrix() - rank.projector.matrix() * grad.matrix()).norm();
  const HermitianMatrix slack = HermitianMatrix::identity(d) * cert.lambda_bar - grad;
  cert.psd_slack = spectral_decompose(slack).eigenvalues.minCoeff();
  return cert;
}

/// Projection of rho + t grad onto the density matrices, together with the
/// step delta from rho. delta is assembled as t grad + V diag(s - lambda) V^H
/// from the eigenpairs (lambda, V) of rho + t grad and the projected spectrum
/// s, so it carries no cancellation error even when it is far smaller than
/// rho. Line searches near the maximizer depend on that.
struct ProjectedStep {
  DensityMatrix candidate;
  HermitianMatrix delta;
};

inline ProjectedStep projected_step(const DensityMatrix& rho, const HermitianMatrix& grad, double t) {
  const SpectralDecomposition s = spectral_decompose(rho.hermitian() + grad * t);
  const RVector projected = project_to_simplex(s.eigenvalues);
  const RVector shift = projected - s.eigenvalues;
  const CMatrix& v = s.unitary;
  CMatrix delta = grad.matrix() * t + v * shift.cast<Complex>().asDiagonal() * v.adjoint();
  // Remove the residual trace so that tr(delta) = 0 to working precision.
  const int d = rho.dim();
  delta -= CMatrix::Identity(d, d) * (delta.trace() / static_cast<double>(d));
  return {DensityMatrix(HermitianMatrix(v * projected.cast<Complex>().asDiagonal() * v.adjoint())),
          HermitianMatrix(delta)};
}

inline double projected_gradient_residual(const DensityMatrix& rho, const HermitianMatrix& grad) {
  return (project_to_density(rho.hermitian() + grad).matrix() - rho.matrix()).norm();
}

}  // namespace detail

/// Optimality certificate at rho. Throws DomainError when f(rho) = -inf.
inline OptimalityCertificate certify(const MeasurementDataset& ds, const DensityMatrix& rho,
                                     double rank_tol = kDefaultRankTol, double tol = 1e-9) {
  if (!std::isfinite(log_likelihood(ds, rho))) {
    throw DomainError("certify: log-likelihood is -inf at the given state");
  }
  return detail::certify_with_gradient(ds, rho, gradient(ds, rho), rank_tol, tol,
                                       spans_hermitian_space(ds));
}

/// lambda minus the largest eigenvalue of grad f compressed to the kernel of
/// rho. Positive values validate the kernel hypothesis of the variance
/// expansion; +inf when rho has full rank.
inline double spectral_gap(const OptimalityCertificate& cert, const HermitianMatrix& grad) {
  const int d = grad.dim();
  if (cert.rank >= d) return std::numeric_limits<double>::infinity();
  const HermitianMatrix complement = HermitianMatrix::identity(d) - cert.projector;
  const SpectralDecomposition s = spectral_decompose(complement);
  std::vector<Eigen::Index> kernel;
  for (Eigen::Index k = 0; k < s.eigenvalues.size(); ++k) {
    if (s.eigenvalues(k) > 0.5) kernel.push_back(k);
  }
  CMatrix basis(d, static_cast<Eigen::Index>(kernel.size()));
  for (std::size_t c = 0; c < kernel.size(); ++c) basis.col(static_cast<Eigen::Index>(c)) = s.unitary.col(kernel[c]);
  const HermitianMatrix compressed(basis.adjoint() * grad.matrix() * basis);
  return cert.lambda_bar - spectral_decompose(compressed).eigenvalues.maxCoeff();
}

/// Projected gradient ascent with Barzilai-Borwein steps and Armijo
/// backtracking; the loop stops as soon as the certificate passes. Near a
/// rank-deficient maximizer the gain of a step drops below the rounding error
/// of f long before the residuals reach tolerance, so the sufficient-increase
/// test is relaxed by that rounding error: a step is rejected only if f
/// measurably falls short. The last iterations are then driven by the
/// gradient alone and f may move by rounding-level amounts. On hitting the
/// iteration cap, or when no step is acceptable, the last iterate is returned
/// with its (failing) certificate and converged = false.
inline SolveResult solve(const MeasurementDataset& ds, const SolverOptions& opts = {}) {
  if (ds.size() == 0) throw DomainError("solve: empty dataset");
  if (!(opts.grad_tol > 0.0) || !(opts.rank_tol > 0.0) || !(opts.step_init > 0.0)) {
    throw DomainError("solve: tolerances and initial step must be positive");
  }
  const int d = ds.dim();
  const bool spanning = spans_hermitian_space(ds);

  DensityMatrix rho = DensityMatrix::maximally_mixed(d);
  if (opts.random_start) {
    Rng rng = stream_rng(opts.seed, 0);
    const DensityMatrix sample = sample_density_hs(std::max(d, 2), rng);
    rho = DensityMatrix(sample.hermitian() * 0.5 + DensityMatrix::maximally_mixed(d).hermitian() * 0.5);
  }
  double f = log_likelihood(ds, rho);
  if (!std::isfinite(f)) throw DomainError("solve: log-likelihood is -inf at the starting state");
  HermitianMatrix grad = gradient(ds, rho);

  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-14;
  constexpr double kMaxStep = 1e12;
  // Resolution of a computed change in f, relative to ||grad||.
  constexpr double kRoundingFloor = 2.0 * std::numeric_limits<double>::epsilon();

  SolveResult result;
  double step = opts.step_init;
  double residual = detail::projected_gradient_residual(rho, grad);
  for (int iter = 0;; ++iter) {
    OptimalityCertificate cert =
        detail::certify_with_gradient(ds, rho, grad, opts.rank_tol, opts.grad_tol, spanning);
    if (cert.passes() || iter >= opts.max_iters) {
      result.converged = cert.passes();
      result.certificate = std::move(cert);
      break;
    }

    const double noise_floor = kRoundingFloor * frobenius_norm(grad);
    DensityMatrix candidate;
    HermitianMatrix delta;
    HermitianMatrix next_grad;
    double next_residual = 0.0;
    double change = 0.0;
    auto backtrack = [&](double trial) {
      for (; trial >= kMinStep; trial *= 0.5) {
        auto proposal = detail::projected_step(rho, grad, trial);
        change = log_likelihood_change(ds, rho.hermitian(), proposal.delta);
        const double predicted = frobenius_inner(grad, proposal.delta);
        if (!std::isfinite(change) || change < kArmijo * predicted - noise_floor) continue;
        next_grad = gradient(ds, proposal.candidate);
        next_residual = detail::projected_gradient_residual(proposal.candidate, next_grad);
        candidate = std::move(proposal.candidate);
        delta = std::move(proposal.delta);
        step = trial;
        return true;
      }
      return false;
    };
    // A stale Barzilai-Borwein estimate can be far too small; retry once from
    // the initial step before giving up.
    const bool accepted = backtrack(step) || (step < opts.step_init && backtrack(opts.step_init));
    if (!accepted) {
      // No ascent step left at double precision; report the current iterate.
      result.converged = false;
      result.certificate = std::move(cert);
      break;
    }

    const double used_step = step;
    const double sy = frobenius_inner(delta, next_grad - grad);
    const double ss = frobenius_inner(delta, delta);
    step = sy < 0.0 ? ss / -sy : 4.0 * step;
    step = std::clamp(step, kMinStep, kMaxStep);

    rho = std::move(candidate);
    f += change;
    grad = next_grad;
    residual = next_residual;
    result.trace.push_back({iter + 1, f, used_step, residual});
  }
  result.rho = rho;
  return result;
}

}  // namespace qtomo

#endif  // QTOMO_MAXLIKE_HPP
