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

#ifndef QTOMO_RANDOM_HPP
#define QTOMO_RANDOM_HPP

#include <cstdint>
#include <random>

#include "qtomo/errors.hpp"
#include "qtomo/hermitian.hpp"

namespace qtomo {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Generator for stream `index` of a run seeded with `seed`; streams are
/// independent of evaluation order.
inline Rng stream_rng(std::uint64_t seed, std::uint64_t index) {
  return Rng(splitmix64(seed ^ splitmix64(index)));
}

/// d x d matrix of iid standard complex normal entries.
inline CMatrix ginibre(int d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      const double re = normal(rng);
      const double im = normal(rng);
      g(i, j) = Complex(re, im);
    }
  }
  return g;
}

/// Density matrix drawn from the Hilbert-Schmidt measure (the flat Lebesgue
/// measure on the set of density matrices): G G^dagger / tr(G G^dagger) with G
/// a square Ginibre matrix.
inline DensityMatrix sample_density_hs(int d, Rng& rng) {
  if (d < 2) throw DimensionError("sample_density_hs: d must be at least 2");
  const CMatrix g = ginibre(d, rng);
  const CMatrix w = g * g.adjoint();
  return DensityMatrix(HermitianMatrix(w / w.trace().real()));
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fix).
inline CMatrix random_unitary(int d, Rng& rng) {
  const CMatrix g = ginibre(d, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int k = 0; k < d; ++k) {
    const Complex diag = r(k, k);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(k) *= diag / mag;
  }
  return q;
}

/// Hermitian matrix with iid Gaussian entries (GUE-like, unnormalized).
inline HermitianMatrix random_hermitian(int d, Rng& rng) { return HermitianMatrix(ginibre(d, rng)); }

}  // namespace qtomo

#endif  // QTOMO_RANDOM_HPP
