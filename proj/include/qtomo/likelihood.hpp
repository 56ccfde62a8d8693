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
/// Per-shot log-likelihood of a tomography record,
///
///     f(rho) = sum_mu w_mu log tr(rho Y_mu),   w_mu = count_mu / N,
///
/// so that the likelihood of the full record is exp(N f(rho)). Outcomes with
/// zero weight never enter f, its gradient or its Hessian.

#ifndef QTOMO_LIKELIHOOD_HPP
#define QTOMO_LIKELIHOOD_HPP

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/hermitian.hpp"

namespace qtomo {

/// Probabilities at or below this are treated as zero.
inline constexpr double kMinProbability = 1e-300;

/// Positive semidefinite measurement effect; trace one is not required.
class PovmEffect {
 public:
  static constexpr double kPsdTol = 1e-10;

  explicit PovmEffect(HermitianMatrix m) : m_(std::move(m)) {
    const double lowest = spectral_decompose(m_).eigenvalues.minCoeff();
    if (lowest < -kPsdTol) {
      throw DomainError("PovmEffect: effect is not positive semidefinite (eigenvalue " +
                        std::to_string(lowest) + ")");
    }
  }

  const HermitianMatrix& matrix() const { return m_; }
  int dim() const { return m_.dim(); }

 private:
  HermitianMatrix m_;
};

/// Effects with nonnegative counts; weights are count / total_shots and sum to
/// one within 1e-12.
class MeasurementDataset {
 public:
  static constexpr double kWeightSumTol = 1e-12;

  MeasurementDataset() = default;

  /// counts may be non-integral (aggregated frequencies); they must sum to
  /// total_shots.
  MeasurementDataset(int dim, std::vector<PovmEffect> effects, std::vector<double> counts,
                     long total_shots)
      : dim_(dim), effects_(std::move(effects)), counts_(std::move(counts)), total_shots_(total_shots) {
    if (dim_ < 1) throw DimensionError("MeasurementDataset: dim must be positive");
    if (effects_.empty()) throw DomainError("MeasurementDataset: no outcomes");
    if (effects_.size() != counts_.size()) {
      throw DimensionError("MeasurementDataset: effects and counts differ in length");
    }
    if (total_shots_ <= 0) throw DomainError("MeasurementDataset: total_shots must be positive");
    weights_.reserve(counts_.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < effects_.size(); ++i) {
      if (effects_[i].dim() != dim_) {
        throw DimensionError("MeasurementDataset: effect " + std::to_string(i) + " has dimension " +
                             std::to_string(effects_[i].dim()) + ", expected " + std::to_string(dim_));
      }
      if (!(counts_[i] >= 0.0) || !std::isfinite(counts_[i])) {
        throw DomainError("MeasurementDataset: counts must be finite and nonnegative");
      }
      weights_.push_back(counts_[i] / static_cast<double>(total_shots_));
      sum += weights_.back();
    }
    if (std::abs(sum - 1.0) > kWeightSumTol) {
      throw DomainError("MeasurementDataset: counts sum to " + std::to_string(sum * total_shots_) +
                        " but total_shots is " + std::to_string(total_shots_));
    }
  }

  /// Dataset with prescribed weights (summing to one) and record size N.
  static MeasurementDataset from_weights(int dim, std::vector<PovmEffect> effects,
                                         const std::vector<double>& weights, long total_shots) {
    std::vector<double> counts;
    counts.reserve(weights.size());
    for (double w : weights) counts.push_back(w * static_cast<double>(total_shots));
    return MeasurementDataset(dim, std::move(effects), std::move(counts), total_shots);
  }

  /// Same outcomes and weights, different record size.
  MeasurementDataset with_total_shots(long total_shots) const {
    return from_weights(dim_, effects_, weights_, total_shots);
  }

  int dim() const { return dim_; }
  std::size_t size() const { return effects_.size(); }
  const std::vector<PovmEffect>& effects() const { return effects_; }
  const std::vector<double>& counts() const { return counts_; }
  const std::vector<double>& weights() const { return weights_; }
  long total_shots() const { return total_shots_; }

 private:
  int dim_ = 0;
  std::vector<PovmEffect> effects_;
  std::vector<double> counts_;
  std::vector<double> weights_;
  long total_shots_ = 0;
};

/// Real-vectorized rank test: do the positively weighted effects span the
/// d^2-dimensional space of Hermitian matrices?
inline bool spans_hermitian_space(const MeasurementDataset& ds) {
  const int d = ds.dim();
  std::vector<RVector> vecs;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds.weights()[i] <= 0.0) continue;
    const CMatrix& y = ds.effects()[i].matrix().matrix();
    RVector v(2 * d * d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        v(2 * (r * d + c)) = y(r, c).real();
        v(2 * (r * d + c) + 1) = y(r, c).imag();
      }
    }
    vecs.push_back(v);
  }
  if (static_cast<int>(vecs.size()) < d * d) return false;
  RMatrix m(static_cast<Eigen::Index>(vecs.size()), 2 * d * d);
  for (std::size_t i = 0; i < vecs.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = vecs[i].transpose();
  Eigen::ColPivHouseholderQR<RMatrix> qr(m);
  qr.setThreshold(1e-10);
  return qr.rank() == d * d;
}

inline void require_dim(const MeasurementDataset& ds, const HermitianMatrix& rho, const char* where) {
  if (rho.dim() != ds.dim()) {
    throw DimensionError(std::string(where) + ": state has dimension " + std::to_string(rho.dim()) +
                         ", dataset has " + std::to_string(ds.dim()));
  }
}

/// tr(rho Y_mu) for every outcome.
inline std::vector<double> probabilities(const MeasurementDataset& ds, const HermitianMatrix& rho) {
  require_dim(ds, rho, "probabilities");
  std::vector<double> p;
  p.reserve(ds.size());
  for (const auto& e : ds.effects()) p.push_back(frobenius_inner(rho, e.matrix()));
  return p;
}

/// f evaluated on any Hermitian matrix of the right size (finite-difference
/// oracles step slightly off the density-matrix set). Returns -inf when a
/// positively weighted outcome has probability <= 1e-300.
inline double log_likelihood(const MeasurementDataset& ds, const HermitianMatrix& rho) {
  require_dim(ds, rho, "log_likelihood");
  double f = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double w = ds.weights()[i];
    if (w <= 0.0) continue;
    const double p = frobenius_inner(rho, ds.effects()[i].matrix());
    if (!(p > kMinProbability)) return -std::numeric_limits<double>::infinity();
    f += w * std::log(p);
  }
  return f;
}

inline double log_likelihood(const MeasurementDataset& ds, const DensityMatrix& rho) {
  return log_likelihood(ds, rho.hermitian());
}

/// f(rho + delta) - f(rho) as sum_mu w_mu log1p(tr(delta Y_mu) / tr(rho Y_mu)),
/// accurate even when the change is far below the resolution of f itself.
inline double log_likelihood_change(const MeasurementDataset& ds, const HermitianMatrix& rho,
                                    const HermitianMatrix& delta) {
  require_dim(ds, rho, "log_likelihood_change");
  double change = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double w = ds.weights()[i];
    if (w <= 0.0) continue;
    const HermitianMatrix& y = ds.effects()[i].matrix();
    const double p = frobenius_inner(rho, y);
    const double dp = frobenius_inner(delta, y);
    if (!(p > kMinProbability) || !(p + dp > kMinProbability)) {
      return -std::numeric_limits<double>::infinity();
    }
    change += w * std::log1p(dp / p);
  }
  return change;
}

namespace detail {

inline std::vector<double> positive_probabilities(const MeasurementDataset& ds,
                                                  const HermitianMatrix& rho, const char* where) {
  std::vector<double> p = probabilities(ds, rho);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (ds.weights()[i] > 0.0 && !(p[i] > kMinProbability)) {
      throw DomainError(std::string(where) + ": outcome " + std::to_string(i) +
                        " has zero probability at this state");
    }
  }
  return p;
}

}  // namespace detail

/// grad f = sum_mu w_mu Y_mu / tr(rho Y_mu) (Frobenius gradient).
inline HermitianMatrix gradient(const MeasurementDataset& ds, const HermitianMatrix& rho) {
  const std::vector<double> p = detail::positive_probabilities(ds, rho, "gradient");
  CMatrix g = CMatrix::Zero(ds.dim(), ds.dim());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double w = ds.weights()[i];
    if (w <= 0.0) continue;
    g += (w / p[i]) * ds.effects()[i].matrix().matrix();
  }
  return HermitianMatrix(g);
}

inline HermitianMatrix gradient(const MeasurementDataset& ds, const DensityMatrix& rho) {
  return gradient(ds, rho.hermitian());
}

/// Hessian bilinear form of f at a fixed state:
/// (X, Z) -> -sum_mu w_mu tr(X Y_mu) tr(Z Y_mu) / tr(rho Y_mu)^2.
class HessianForm {
 public:
  HessianForm(const MeasurementDataset& ds, const HermitianMatrix& rho) {
    const std::vector<double> p = detail::positive_probabilities(ds, rho, "hessian_form");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const double w = ds.weights()[i];
      if (w <= 0.0) continue;
      effects_.push_back(ds.effects()[i].matrix());
      coefficients_.push_back(w / (p[i] * p[i]));
    }
  }

  double operator()(const HermitianMatrix& x, const HermitianMatrix& z) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < effects_.size(); ++i) {
      sum += coefficients_[i] * frobenius_inner(x, effects_[i]) * frobenius_inner(z, effects_[i]);
    }
    return -sum;
  }

 private:
  std::vector<HermitianMatrix> effects_;
  std::vector<double> coefficients_;
};

inline HessianForm hessian_form(const MeasurementDataset& ds, const DensityMatrix& rho) {
  return HessianForm(ds, rho.hermitian());
}

}  // namespace qtomo

#endif  // QTOMO_LIKELIHOOD_HPP
