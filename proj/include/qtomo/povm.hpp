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
/// Measurement settings and simulated tomography records.

#ifndef QTOMO_POVM_HPP
#define QTOMO_POVM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/hermitian.hpp"
#include "qtomo/likelihood.hpp"
#include "qtomo/random.hpp"

namespace qtomo {

/// One measurement setting: effects that sum to the identity.
struct MeasurementSetting {
  std::vector<HermitianMatrix> effects;
};

/// A list of settings; shots are divided evenly among them.
struct Povm {
  int dim = 0;
  std::vector<MeasurementSetting> settings;

  static constexpr double kCompletenessTol = 1e-10;

  void validate() const {
    if (dim < 1) throw DimensionError("Povm: dimension must be positive");
    if (settings.empty()) throw DomainError("Povm: no settings");
    for (std::size_t s = 0; s < settings.size(); ++s) {
      if (settings[s].effects.empty()) throw DomainError("Povm: empty setting");
      CMatrix sum = CMatrix::Zero(dim, dim);
      for (const auto& e : settings[s].effects) {
        if (e.dim() != dim) throw DimensionError("Povm: effect dimension differs from the POVM");
        PovmEffect check(e);
        sum += e.matrix();
      }
      if ((sum - CMatrix::Identity(dim, dim)).norm() > kCompletenessTol) {
        throw DomainError("Povm: effects of setting " + std::to_string(s) + " do not sum to the identity");
      }
    }
  }

  std::vector<PovmEffect> flat_effects() const {
    std::vector<PovmEffect> out;
    for (const auto& s : settings) {
      for (const auto& e : s.effects) out.emplace_back(e);
    }
    return out;
  }
};

namespace detail {

inline MeasurementSetting basis_setting(const CMatrix& columns) {
  MeasurementSetting s;
  for (Eigen::Index k = 0; k < columns.cols(); ++k) s.effects.push_back(HermitianMatrix::outer(columns.col(k)));
  return s;
}

inline bool is_prime(int n) {
  if (n < 2) return false;
  for (int k = 2; k * k <= n; ++k) {
    if (n % k == 0) return false;
  }
  return true;
}

/// Eigenbases of sigma_z, sigma_x, sigma_y as columns.
inline std::vector<CMatrix> qubit_bases() {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  CMatrix z = CMatrix::Identity(2, 2);
  CMatrix x(2, 2);
  x << s, s, s, -s;
  CMatrix y(2, 2);
  y << s, s, s * i, -s * i;
  return {z, x, y};
}

}  // namespace detail

/// Projective measurement in the computational basis.
inline Povm computational_povm(int d) {
  if (d < 1) throw DimensionError("computational_povm: d must be positive");
  return {d, {detail::basis_setting(CMatrix::Identity(d, d))}};
}

/// Product Pauli bases on k qubits: 3^k settings of 2^k outcomes each.
inline Povm pauli_povm(int qubits) {
  if (qubits < 1 || qubits > 5) throw DimensionError("pauli_povm: qubit count must lie in [1, 5]");
  const auto single = detail::qubit_bases();
  std::vector<CMatrix> bases = single;
  for (int q = 1; q < qubits; ++q) {
    std::vector<CMatrix> next;
    for (const auto& b : bases) {
      for (const auto& s : single) {
        CMatrix k(b.rows() * 2, b.cols() * 2);
        for (Eigen::Index r = 0; r < b.rows(); ++r) {
          for (Eigen::Index c = 0; c < b.cols(); ++c) k.block(r * 2, c * 2, 2, 2) = b(r, c) * s;
        }
        next.push_back(k);
      }
    }
    bases = std::move(next);
  }
  Povm p;
  p.dim = 1 << qubits;
  for (const auto& b : bases) p.settings.push_back(detail::basis_setting(b));
  return p;
}

/// Complete set of d + 1 mutually unbiased bases for prime d: the
/// computational basis and, for odd d, the bases
/// (1/sqrt d) sum_j omega^{a j^2 + b j} |j>, a = 0..d-1, indexed by b.
/// d = 2 gives the three Pauli bases.
inline Povm mub_povm(int d) {
  if (!detail::is_prime(d)) throw DomainError("mub_povm: dimension must be prime");
  if (d == 2) return pauli_povm(1);
  Povm p = computational_povm(d);
  const double norm = 1.0 / std::sqrt(static_cast<double>(d));
  for (int a = 0; a < d; ++a) {
    CMatrix cols(d, d);
    for (int b = 0; b < d; ++b) {
      for (int j = 0; j < d; ++j) {
        const int phase = (a * j * j + b * j) % d;
        cols(j, b) = norm * std::polar(1.0, 2.0 * std::numbers::pi * phase / d);
      }
    }
    p.settings.push_back(detail::basis_setting(cols));
  }
  return p;
}

/// Named presets: "computational", "pauli" (d a power of two), "mub" (d prime).
inline Povm povm_preset(const std::string& name, int d) {
  if (name == "computational") return computational_povm(d);
  if (name == "mub") return mub_povm(d);
  if (name == "pauli") {
    int qubits = 0;
    while ((1 << qubits) < d) ++qubits;
    if ((1 << qubits) != d) throw DomainError("pauli preset requires d to be a power of two");
    return pauli_povm(qubits);
  }
  throw DomainError("unknown POVM preset '" + name + "'");
}

struct SimulationSpec {
  DensityMatrix true_state;
  Povm povm;
  long shots = 0;
  std::uint64_t seed = 0;
};

/// Multinomial counts per setting with probabilities tr(rho Y). The shots
/// are split evenly, the first N mod S settings taking one extra. Throws
/// DomainError if a setting's probabilities do not sum to one within 1e-9.
inline MeasurementDataset simulate(const SimulationSpec& spec) {
  spec.povm.validate();
  const int d = spec.povm.dim;
  if (spec.true_state.dim() != d) throw DimensionError("simulate: state and POVM dimensions differ");
  const long n_settings = static_cast<long>(spec.povm.settings.size());
  if (spec.shots < n_settings) throw DomainError("simulate: need at least one shot per setting");

  std::vector<double> counts;
  for (long s = 0; s < n_settings; ++s) {
    const auto& effects = spec.povm.settings[static_cast<std::size_t>(s)].effects;
    std::vector<double> p;
    double total = 0.0;
    for (const auto& e : effects) {
      p.push_back(std::max(0.0, frobenius_inner(spec.true_state.hermitian(), e)));
      total += p.back();
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw DomainError("simulate: outcome probabilities of setting " + std::to_string(s) + " sum to " +
                        std::to_string(total));
    }
    Rng rng = stream_rng(spec.seed, static_cast<std::uint64_t>(s));
    long remaining = spec.shots / n_settings + (s < spec.shots % n_settings ? 1 : 0);
    double mass = 1.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      long c = remaining;
      if (k + 1 < p.size()) {
        const double q = mass > 0.0 ? std::clamp(p[k] / mass, 0.0, 1.0) : 0.0;
        c = remaining > 0 ? std::binomial_distribution<long>(remaining, q)(rng) : 0;
        mass -= p[k];
      }
      counts.push_back(static_cast<double>(c));
      remaining -= c;
    }
  }
  return MeasurementDataset(d, spec.povm.flat_effects(), std::move(counts), spec.shots);
}

}  // namespace qtomo

#endif  // QTOMO_POVM_HPP
