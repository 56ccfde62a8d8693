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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qtomo/likelihood.hpp"
#include "qtomo/povm.hpp"
#include "qtomo/random.hpp"
#include "support/oracles.hpp"

namespace {

using namespace qtomo;

MeasurementDataset symmetric_qubit() {
  return MeasurementDataset::from_weights(2, pauli_povm(1).flat_effects(), std::vector<double>(6, 1.0 / 6.0), 600);
}

MeasurementDataset random_dataset(int d, Rng& rng, long shots) {
  const Povm povm = d == 2 ? pauli_povm(1) : mub_povm(d);
  SimulationSpec spec{sample_density_hs(d, rng), povm, shots, rng()};
  return simulate(spec);
}

TEST(PovmEffect, RejectsIndefinite) {
  EXPECT_THROW(PovmEffect{pauli_z()}, DomainError);
  EXPECT_NO_THROW(PovmEffect(HermitianMatrix::identity(2) * 0.5));
}

TEST(MeasurementDataset, Validation) {
  std::vector<PovmEffect> e{PovmEffect(HermitianMatrix::identity(2))};
  EXPECT_THROW(MeasurementDataset(2, e, {3.0}, 4), DomainError);
  EXPECT_THROW(MeasurementDataset(2, e, {-1.0}, 1), DomainError);
  EXPECT_THROW(MeasurementDataset(3, e, {1.0}, 1), DimensionError);
  EXPECT_THROW(MeasurementDataset(2, e, {1.0, 2.0}, 3), DimensionError);
  EXPECT_THROW(MeasurementDataset(2, {}, {}, 1), DomainError);
  const MeasurementDataset ok(2, e, {5.0}, 5);
  EXPECT_DOUBLE_EQ(ok.weights()[0], 1.0);
  EXPECT_EQ(ok.with_total_shots(50).total_shots(), 50);
}

TEST(LogLikelihood, SymmetricDatasetAtMaximallyMixed) {
  const auto ds = symmetric_qubit();
  EXPECT_NEAR(log_likelihood(ds, DensityMatrix::maximally_mixed(2)), std::log(0.5), 1e-15);
}

TEST(LogLikelihood, ZeroProbabilityIsMinusInfinity) {
  const auto z = pauli_povm(1).settings[0].effects;
  const MeasurementDataset ds(2, {PovmEffect(z[0]), PovmEffect(z[1])}, {3.0, 1.0}, 4);
  CVector up(2);
  up << 1.0, 0.0;
  EXPECT_EQ(log_likelihood(ds, DensityMatrix::pure(up)), -std::numeric_limits<double>::infinity());
  EXPECT_THROW(gradient(ds, DensityMatrix::pure(up)), DomainError);
}

TEST(LogLikelihood, ZeroWeightOutcomesIgnored) {
  const auto z = pauli_povm(1).settings[0].effects;
  const MeasurementDataset ds(2, {PovmEffect(z[0]), PovmEffect(z[1])}, {4.0, 0.0}, 4);
  CVector up(2);
  up << 1.0, 0.0;
  EXPECT_DOUBLE_EQ(log_likelihood(ds, DensityMatrix::pure(up)), 0.0);
}

TEST(LogLikelihood, MatchesLongDoubleResummation) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = trial % 2 == 0 ? 2 : 3;
    const auto ds = random_dataset(d, rng, 999);
    const DensityMatrix rho = sample_density_hs(d, rng);
    const double f = log_likelihood(ds, rho);
    EXPECT_NEAR(f, static_cast<double>(oracle::log_likelihood_ld(ds, rho.matrix())), 1e-12 * std::abs(f));
  }
}

TEST(LogLikelihood, DimensionMismatch) {
  EXPECT_THROW(log_likelihood(symmetric_qubit(), DensityMatrix::maximally_mixed(3)), DimensionError);
}

TEST(LogLikelihoodChange, AgreesWithDifference) {
  Rng rng(22);
  const auto ds = random_dataset(3, rng, 5000);
  const DensityMatrix a = sample_density_hs(3, rng);
  const DensityMatrix b = sample_density_hs(3, rng);
  const HermitianMatrix delta = (b.hermitian() - a.hermitian()) * 0.3;
  const double direct = log_likelihood(ds, a.hermitian() + delta) - log_likelihood(ds, a);
  EXPECT_NEAR(log_likelihood_change(ds, a.hermitian(), delta), direct, 1e-12);
}

TEST(Gradient, SymmetricDatasetIsIdentity) {
  const auto g = gradient(symmetric_qubit(), DensityMatrix::maximally_mixed(2));
  EXPECT_LE((g.matrix() - CMatrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(Gradient, TraceIdentityAndPositivity) {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 2;
    const auto ds = random_dataset(d, rng, 500);
    const DensityMatrix rho = sample_density_hs(d, rng);
    const HermitianMatrix g = gradient(ds, rho);
    EXPECT_NEAR(frobenius_inner(rho.hermitian(), g), 1.0, 1e-12);
    EXPECT_GE(spectral_decompose(g).eigenvalues.minCoeff(), -1e-10);
  }
}

TEST(Gradient, MatchesDirectionalFiniteDifference) {
  Rng rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ds = random_dataset(3, rng, 800);
    const DensityMatrix rho = sample_density_hs(3, rng);
    const HermitianMatrix x = random_hermitian(3, rng);
    const double h = 1e-6;
    const double fd = (log_likelihood(ds, rho.hermitian() + x * h) - log_likelihood(ds, rho.hermitian() - x * h)) / (2 * h);
    EXPECT_NEAR(frobenius_inner(gradient(ds, rho), x), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(HessianForm, SymmetricNegativeAndMatchesFiniteDifference) {
  Rng rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ds = random_dataset(2 + trial % 2, rng, 700);
    const int d = ds.dim();
    const DensityMatrix rho = sample_density_hs(d, rng);
    const HessianForm form = hessian_form(ds, rho);
    const HermitianMatrix x = random_hermitian(d, rng);
    const HermitianMatrix z = random_hermitian(d, rng);
    EXPECT_NEAR(form(x, z), form(z, x), 1e-10);
    EXPECT_LE(form(x, x), 0.0);
    const double h = 1e-4;
    auto f = [&](double s, double t) { return log_likelihood(ds, rho.hermitian() + x * s + z * t); };
    const double mixed = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
    EXPECT_NEAR(form(x, z), mixed, 1e-5 * std::max(1.0, std::abs(mixed)));
  }
}

TEST(HessianForm, VanishesOnUnseenDirections) {
  // Only the z basis is measured; sigma_x is invisible to every effect.
  const auto z = pauli_povm(1).settings[0].effects;
  const MeasurementDataset ds(2, {PovmEffect(z[0]), PovmEffect(z[1])}, {3.0, 1.0}, 4);
  const HessianForm form = hessian_form(ds, DensityMatrix::maximally_mixed(2));
  EXPECT_DOUBLE_EQ(form(pauli_x(), pauli_x()), 0.0);
}

TEST(LogLikelihood, ConcaveAlongSegments) {
  Rng rng(26);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 2;
    const auto ds = random_dataset(d, rng, 300);
    const DensityMatrix a = sample_density_hs(d, rng);
    const DensityMatrix b = sample_density_hs(d, rng);
    const double t = unif(rng);
    const double mid = log_likelihood(ds, a.hermitian() * t + b.hermitian() * (1 - t));
    EXPECT_GE(mid, t * log_likelihood(ds, a) + (1 - t) * log_likelihood(ds, b) - 1e-10);
  }
}

TEST(LogLikelihood, UnitaryCovariance) {
  Rng rng(27);
  const auto ds = random_dataset(3, rng, 900);
  const DensityMatrix rho = sample_density_hs(3, rng);
  const CMatrix u = random_unitary(3, rng);
  std::vector<PovmEffect> moved;
  for (const auto& e : ds.effects()) moved.emplace_back(conjugate_by(e.matrix(), u));
  const MeasurementDataset rotated(3, moved, ds.counts(), ds.total_shots());
  EXPECT_NEAR(log_likelihood(rotated, DensityMatrix(conjugate_by(rho.hermitian(), u))), log_likelihood(ds, rho), 1e-12);
}

TEST(SpansHermitianSpace, DetectsInformationalCompleteness) {
  EXPECT_TRUE(spans_hermitian_space(symmetric_qubit()));
  const auto z = pauli_povm(1).settings[0].effects;
  EXPECT_FALSE(spans_hermitian_space(MeasurementDataset(2, {PovmEffect(z[0]), PovmEffect(z[1])}, {1.0, 1.0}, 2)));
}

}  // namespace
