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
/// Monte-Carlo reference for the posterior mean and variance of tr(A rho)
/// under a flat (Hilbert-Schmidt) prior and likelihood exp(N f(rho)).
/// Self-normalized importance sampling from the prior; sample i draws from
/// its own generator stream, so results do not depend on thread scheduling.

#ifndef QTOMO_ORACLE_MC_HPP
#define QTOMO_ORACLE_MC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/hermitian.hpp"
#include "qtomo/likelihood.hpp"
#include "qtomo/random.hpp"

namespace qtomo {

struct McOptions {
  long samples = 200000;
  std::uint64_t seed = 1;
  int batches = 20;
  int threads = 0;  ///< 0 picks std::thread::hardware_concurrency()
};

struct McEstimate {
  double mean = 0.0;
  double variance = 0.0;
  double std_error_mean = 0.0;
  double std_error_variance = 0.0;
  double effective_sample_size = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
};

inline constexpr long kMinMcSamples = 1000;
inline constexpr double kMinEffectiveSampleSize = 50.0;

namespace detail {

struct WeightedMoments {
  double mean = 0.0;
  double variance = 0.0;
  double weight_sum = 0.0;
};

inline WeightedMoments moments(const std::vector<double>& log_w, const std::vector<double>& values,
                               std::size_t begin, std::size_t end, double shift) {
  WeightedMoments m;
  double sum_wa = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double w = std::exp(log_w[i] - shift);
    m.weight_sum += w;
    sum_wa += w * values[i];
  }
  if (!(m.weight_sum > 0.0)) return m;
  m.mean = sum_wa / m.weight_sum;
  double sum_dev = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double dev = values[i] - m.mean;
    sum_dev += std::exp(log_w[i] - shift) * dev * dev;
  }
  m.variance = sum_dev / m.weight_sum;
  return m;
}

inline double batch_standard_error(const std::vector<double>& estimates) {
  const double k = static_cast<double>(estimates.size());
  if (estimates.size() < 2) return std::numeric_limits<double>::infinity();
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= k;
  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  return std::sqrt(ss / (k - 1.0) / k);
}

}  // namespace detail

/// Self-normalized weighted mean and variance of `values` with log-weights
/// `log_w`, plus batch-means standard errors over `batches` contiguous
/// batches. Batches carrying no weight at double precision are skipped.
inline McEstimate weighted_moments(const std::vector<double>& log_w, const std::vector<double>& values,
                                   int batches = 20) {
  if (log_w.size() != values.size()) throw DimensionError("weighted_moments: length mismatch");
  if (log_w.empty()) throw DomainError("weighted_moments: no samples");
  if (batches < 2) throw DomainError("weighted_moments: need at least two batches");
  const double shift = *std::max_element(log_w.begin(), log_w.end());
  if (!std::isfinite(shift)) throw SamplingError("weighted_moments: every sample has zero likelihood");

  const std::size_t s = log_w.size();
  McEstimate est;
  const detail::WeightedMoments all = detail::moments(log_w, values, 0, s, shift);
  est.mean = all.mean;
  est.variance = all.variance;
  double sum_w2 = 0.0;
  for (double l : log_w) {
    const double w = std::exp(l - shift);
    sum_w2 += w * w;
  }
  est.effective_sample_size = all.weight_sum * all.weight_sum / sum_w2;
  est.samples = static_cast<long>(s);

  std::vector<double> batch_means;
  std::vector<double> batch_vars;
  const std::size_t b = static_cast<std::size_t>(batches);
  for (std::size_t k = 0; k < b; ++k) {
    const std::size_t begin = k * s / b;
    const std::size_t end = (k + 1) * s / b;
    const detail::WeightedMoments m = detail::moments(log_w, values, begin, end, shift);
    if (!(m.weight_sum > 0.0)) continue;
    batch_means.push_back(m.mean);
    batch_vars.push_back(m.variance);
  }
  est.std_error_mean = detail::batch_standard_error(batch_means);
  est.std_error_variance = detail::batch_standard_error(batch_vars);
  return est;
}

/// Posterior mean and variance of tr(A rho). Requires 2 <= d <= 4 and
/// S >= 1000; throws SamplingError when the effective sample size is below 50.
inline McEstimate mc_bayes(const MeasurementDataset& ds, const HermitianMatrix& a, const McOptions& opts = {}) {
  require_dim(ds, a, "mc_bayes");
  const int d = ds.dim();
  if (d < 2 || d > 4) throw DimensionError("mc_bayes: dimension must lie in [2, 4]");
  if (opts.samples < kMinMcSamples) throw DomainError("mc_bayes: at least 1000 samples are required");

  const std::size_t s = static_cast<std::size_t>(opts.samples);
  const double n = static_cast<double>(ds.total_shots());
  std::vector<double> log_w(s);
  std::vector<double> values(s);

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng = stream_rng(opts.seed, i);
      const DensityMatrix rho = sample_density_hs(d, rng);
      log_w[i] = n * log_likelihood(ds, rho);
      values[i] = frobenius_inner(a, rho.hermitian());
    }
  };

  unsigned threads = opts.threads > 0 ? static_cast<unsigned>(opts.threads) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(s / 256 + 1)));
  if (threads == 1) {
    work(0, s);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t * s / threads, (t + 1) * s / threads);
    for (auto& th : pool) th.join();
  }

  McEstimate est = weighted_moments(log_w, values, opts.batches);
  est.seed = opts.seed;
  if (est.effective_sample_size < kMinEffectiveSampleSize) {
    throw SamplingError("mc_bayes: effective sample size " + std::to_string(est.effective_sample_size) +
                        " is below 50; raise the sample count or lower N");
  }
  return est;
}

}  // namespace qtomo

#endif  // QTOMO_ORACLE_MC_HPP
