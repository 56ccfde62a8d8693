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

#include <algorithm>
#include <cmath>

#include "qtomo/bayes.hpp"
#include "qtomo/maxlike.hpp"
#include "qtomo/povm.hpp"
#include "qtomo/random.hpp"
#include "support/tangent_chart.hpp"

namespace {

using namespace qtomo;

std::vector<PovmEffect> pauli_effects() { return pauli_povm(1).flat_effects(); }

MeasurementDataset symmetric_qubit(long n = 300) {
  return MeasurementDataset::from_weights(2, pauli_effects(), std::vector<double>(6, 1.0 / 6.0), n);
}

MeasurementDataset pure_z_qubit(long n = 300) {
  return MeasurementDataset::from_weights(2, pauli_effects(), {1.0 / 3, 0.0, 1.0 / 6, 1.0 / 6, 1.0 / 6, 1.0 / 6}, n);
}

// Qutrit record whose maximizer is rank one with a positive gap: weights are
// tr(tau Y) / 4 over the four mutually unbiased bases, tau a slightly
// non-positive perturbation of a pure state.
MeasurementDataset rank_one_qutrit(long n = 500) {
  CVector psi(3);
  psi << 1.0, std::polar(0.8, 0.3), std::polar(0.6, -1.1);
  psi.normalize();
  const HermitianMatrix p = HermitianMatrix::outer(psi);
  const double eps = 0.1;
  const HermitianMatrix tau = p * (1 + eps) - (HermitianMatrix::identity(3) - p) * (eps / 2);
  const auto effects = mub_povm(3).flat_effects();
  std::vector<double> w;
  for (const auto& e : effects) w.push_back(frobenius_inner(tau, e.matrix()) / 4.0);
  return MeasurementDataset::from_weights(3, effects, w, n);
}

struct Fitted {
  MeasurementDataset ds;
  SolveResult fit;
};

Fitted fitted(const MeasurementDataset& ds) {
  Fitted f{ds, solve(ds)};
  EXPECT_TRUE(f.fit.converged);
  return f;
}

TEST(Dimensions, ClosedForms) {
  EXPECT_EQ(tangent_dimension(2, 1), 2);
  EXPECT_EQ(tangent_dimension(2, 2), 3);
  EXPECT_EQ(tangent_dimension(3, 1), 4);
  EXPECT_EQ(boundary_exponent(2, 1), 0);
  EXPECT_EQ(boundary_exponent(3, 1), 3);
  EXPECT_EQ(boundary_exponent(4, 4), -1);
  for (int d = 1; d <= 4; ++d) {
    for (int r = 1; r <= d; ++r) {
      EXPECT_EQ(tangent_dimension(d, r) + boundary_exponent(d, r) + 1, d * d - 1) << d << "," << r;
    }
  }
  EXPECT_THROW(tangent_dimension(2, 3), DomainError);
  EXPECT_THROW(boundary_exponent(2, 0), DomainError);
}

TEST(TangentProject, FullRankRemovesTrace) {
  Rng rng(41);
  const HermitianMatrix a = random_hermitian(3, rng);
  const HermitianMatrix expected = a - HermitianMatrix::identity(3) * (a.trace() / 3.0);
  EXPECT_LE((tangent_project(a, HermitianMatrix::identity(3)).matrix() - expected.matrix()).norm(), 1e-14);
}

TEST(TangentProject, ProjectorAndKernelBlockVanish) {
  Rng rng(42);
  const CMatrix u = random_unitary(4, rng);
  RVector diag(4);
  diag << 0, 0, 1, 1;
  const HermitianMatrix p = conjugate_by(HermitianMatrix::diagonal(diag), u);
  EXPECT_LE(tangent_project(p, p).matrix().norm(), 1e-13);
  const CMatrix q = CMatrix::Identity(4, 4) - p.matrix();
  const HermitianMatrix kernel_only(q * random_hermitian(4, rng).matrix() * q);
  EXPECT_LE(tangent_project(kernel_only, p).matrix().norm(), 1e-13);
  EXPECT_THROW(tangent_project(p, HermitianMatrix::zero(4)), DomainError);
}

TEST(TangentProject, IdempotentAndSelfAdjoint) {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 3;
    const int r = 1 + trial % d;
    RVector diag = RVector::Zero(d);
    for (int k = 0; k < r; ++k) diag(k) = 1.0;
    const HermitianMatrix p = conjugate_by(HermitianMatrix::diagonal(diag), random_unitary(d, rng));
    const HermitianMatrix a = random_hermitian(d, rng);
    const HermitianMatrix b = random_hermitian(d, rng);
    const HermitianMatrix ap = tangent_project(a, p);
    EXPECT_LE((tangent_project(ap, p).matrix() - ap.matrix()).norm(), 1e-10);
    EXPECT_NEAR(frobenius_inner(b, ap), frobenius_inner(tangent_project(b, p), a), 1e-10);
    EXPECT_NEAR(frobenius_inner(ap, p), 0.0, 1e-10);
    const CMatrix q = CMatrix::Identity(d, d) - p.matrix();
    EXPECT_LE((q * ap.matrix() * q).norm(), 1e-10);
  }
}

TEST(TangentBasis, OrthonormalTangentAndCorrectSize) {
  Rng rng(44);
  for (int d = 1; d <= 4; ++d) {
    for (int r = 1; r <= d; ++r) {
      const CMatrix u = random_unitary(d, rng);
      RVector p = RVector::Zero(d);
      for (int k = d - r; k < d; ++k) p(k) = 1.0 + k;
      p /= p.sum();
      const DensityMatrix rho(conjugate_by(HermitianMatrix::diagonal(p), u));
      const auto info = numerical_rank(rho);
      ASSERT_EQ(info.rank, r);
      const TangentBasis tb = build_tangent_basis(rho, info.projector);
      ASSERT_EQ(static_cast<int>(tb.size()), tangent_dimension(d, r));
      for (std::size_t i = 0; i < tb.size(); ++i) {
        EXPECT_LE((tangent_project(tb.basis[i], info.projector).matrix() - tb.basis[i].matrix()).norm(), 1e-10);
        for (std::size_t j = 0; j < tb.size(); ++j) {
          EXPECT_NEAR(frobenius_inner(tb.basis[i], tb.basis[j]), i == j ? 1.0 : 0.0, 1e-10);
        }
      }
    }
  }
}

TEST(TangentBasis, RejectsZeroRank) {
  EXPECT_THROW(build_tangent_basis(DensityMatrix::maximally_mixed(2), HermitianMatrix::zero(2)), DomainError);
}

TEST(FisherApply, InteriorHasNoBoundaryTerms) {
  Rng rng(45);
  const auto ds = simulate({sample_density_hs(2, rng), pauli_povm(1), 5000, 3});
  const auto f = fitted(ds);
  ASSERT_EQ(f.fit.certificate.rank, 2);
  const HermitianMatrix x = tangent_project(random_hermitian(2, rng), f.fit.certificate.projector);
  const auto p = probabilities(ds, f.fit.rho.hermitian());
  CMatrix expected = CMatrix::Zero(2, 2);
  for (std::size_t mu = 0; mu < ds.size(); ++mu) {
    const HermitianMatrix yp = tangent_project(ds.effects()[mu].matrix(), f.fit.certificate.projector);
    expected += ds.weights()[mu] * frobenius_inner(x, yp) / (p[mu] * p[mu]) * yp.matrix();
  }
  EXPECT_LE((fisher_apply(ds, f.fit.rho, f.fit.certificate, x).matrix() - expected).norm(), 1e-7);
}

TEST(FisherOperator, SymmetricPositiveAndMatchesChartHessian) {
  for (const auto& ds : {symmetric_qubit(), pure_z_qubit(), rank_one_qutrit()}) {
    const auto f = fitted(ds);
    const FisherOperator op(ds, f.fit.rho, f.fit.certificate);
    const RMatrix& m = op.matrix();
    EXPECT_TRUE(op.positive_definite());
    const auto c = chart::make_chart(f.fit.rho, f.fit.certificate.rank, op.basis().basis);
    const Eigen::MatrixXd h = chart::negative_hessian(ds, c);
    const double scale = m.cwiseAbs().maxCoeff();
    EXPECT_LE((h - m).cwiseAbs().maxCoeff(), 1e-4 * scale);
  }
}

TEST(FisherOperator, AssembledMatrixIsSymmetricBeforeSymmetrization) {
  const auto ds = rank_one_qutrit();
  const auto f = fitted(ds);
  const FisherOperator op(ds, f.fit.rho, f.fit.certificate);
  const auto& b = op.basis().basis;
  for (std::size_t i = 0; i < b.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      EXPECT_NEAR(frobenius_inner(b[i], op.apply(b[j])), frobenius_inner(b[j], op.apply(b[i])), 1e-9);
    }
  }
}

TEST(FisherOperator, QuadraticFormNonNegative) {
  Rng rng(46);
  const auto ds = rank_one_qutrit();
  const auto f = fitted(ds);
  const FisherOperator op(ds, f.fit.rho, f.fit.certificate);
  for (int k = 0; k < 50; ++k) {
    const HermitianMatrix x = tangent_project(random_hermitian(3, rng), f.fit.certificate.projector);
    EXPECT_GE(frobenius_inner(x, op.apply(x)), 0.0);
  }
}

TEST(FisherSolve, IdentityMatrixCase) {
  // For the rank-one qubit record the assembled matrix is the identity.
  const auto ds = pure_z_qubit();
  const auto f = fitted(ds);
  const FisherOperator op(ds, f.fit.rho, f.fit.certificate);
  EXPECT_LE((op.matrix() - RMatrix::Identity(2, 2)).norm(), 1e-8);
  const HermitianMatrix a = tangent_project(pauli_x(), f.fit.certificate.projector);
  EXPECT_LE((op.solve(a).matrix() - a.matrix()).norm(), 1e-8);
}

TEST(FisherSolve, RoundTripAndTangency) {
  Rng rng(47);
  for (const auto& ds : {symmetric_qubit(), pure_z_qubit(), rank_one_qutrit()}) {
    const auto f = fitted(ds);
    const auto& p = f.fit.certificate.projector;
    const HermitianMatrix a = tangent_project(random_hermitian(ds.dim(), rng), p);
    const HermitianMatrix x = fisher_solve(ds, f.fit.rho, f.fit.certificate, a);
    EXPECT_LE((tangent_project(x, p).matrix() - x.matrix()).norm(), 1e-10);
    const HermitianMatrix back = tangent_project(fisher_apply(ds, f.fit.rho, f.fit.certificate, x), p);
    EXPECT_LE((back.matrix() - a.matrix()).norm(), 1e-8);
  }
}

TEST(FisherOperator, RejectsFailingCertificate) {
  const auto ds = symmetric_qubit();
  CVector v(2);
  v << 1.0, 0.5;
  const DensityMatrix off = DensityMatrix::pure(v);
  const DensityMatrix rho(off.hermitian() * 0.5 + DensityMatrix::maximally_mixed(2).hermitian() * 0.5);
  const auto cert = certify(ds, rho);
  ASSERT_FALSE(cert.passes());
  EXPECT_THROW(FisherOperator(ds, rho, cert), CertificateError);
  EXPECT_THROW(bayes_report(ds, pauli_z(), rho, cert), CertificateError);
}

TEST(BayesReport, IdentityObservableHasZeroVariance) {
  const auto f = fitted(symmetric_qubit());
  const auto rep = bayes_report(f.ds, HermitianMatrix::identity(2), f.fit.rho, f.fit.certificate);
  EXPECT_NEAR(rep.mean, 1.0, 1e-12);
  EXPECT_NEAR(rep.variance, 0.0, 1e-15);
}

TEST(BayesReport, SymmetricQubitClosedForm) {
  // F(sigma_z) = (2/3) sigma_z, so the variance is 3 / N.
  const auto f = fitted(symmetric_qubit(300));
  const auto rep = bayes_report(f.ds, pauli_z(), f.fit.rho, f.fit.certificate);
  EXPECT_TRUE(rep.valid);
  EXPECT_NEAR(rep.mean, 0.0, 1e-9);
  EXPECT_NEAR(rep.variance, 3.0 / 300.0, 1e-10);
  EXPECT_EQ(rep.rank, 2);
  EXPECT_EQ(rep.m, -1);
  EXPECT_EQ(rep.n, 3);
  EXPECT_TRUE(std::isinf(rep.gap));
}

TEST(BayesReport, RankOneFields) {
  const auto f = fitted(pure_z_qubit());
  const auto rep = bayes_report(f.ds, pauli_x(), f.fit.rho, f.fit.certificate);
  EXPECT_TRUE(rep.valid);
  EXPECT_EQ(rep.rank, 1);
  EXPECT_EQ(rep.m, 0);
  EXPECT_EQ(rep.n, 2);
  // tr(A_par F^{-1} A_par) with F = I and sigma_x fully tangent: 2 / N.
  EXPECT_NEAR(rep.variance, 2.0 / 300.0, 1e-9);
  EXPECT_NEAR(rep.gap, 1.0 / 3.0, 1e-8);
}

TEST(BayesReport, VarianceDependsOnlyOnTangentPart) {
  Rng rng(48);
  const auto f = fitted(rank_one_qutrit());
  const auto& p = f.fit.certificate.projector;
  const HermitianMatrix a = random_hermitian(3, rng);
  const double base = bayes_report(f.ds, a, f.fit.rho, f.fit.certificate).variance;
  const HermitianMatrix shifted = a + HermitianMatrix::identity(3) * 2.5 + p * 0.7;
  const CMatrix q = CMatrix::Identity(3, 3) - p.matrix();
  const HermitianMatrix kernel_part(q * random_hermitian(3, rng).matrix() * q);
  EXPECT_NEAR(bayes_report(f.ds, shifted + kernel_part, f.fit.rho, f.fit.certificate).variance, base, 1e-12 * base);
  EXPECT_NEAR(bayes_report(f.ds, tangent_project(a, p), f.fit.rho, f.fit.certificate).variance, base, 1e-12 * base);
}

TEST(BayesReport, VarianceScalesAsOneOverN) {
  const auto ds = rank_one_qutrit(500);
  const auto f = fitted(ds);
  const auto big = ds.with_total_shots(5000);
  const HermitianMatrix a = HermitianMatrix::outer(CVector::Unit(3, 0));
  const double v1 = bayes_report(ds, a, f.fit.rho, f.fit.certificate).variance;
  const double v2 = bayes_report(big, a, f.fit.rho, certify(big, f.fit.rho)).variance;
  EXPECT_NEAR(v1 / v2, 10.0, 1e-9);
}

TEST(BayesReport, DegenerateGapIsFlaggedAndRefused) {
  const std::vector<double> w{0.0, 0.0, 0.25, 0.25, 0.25, 0.25};
  const auto ds = MeasurementDataset::from_weights(2, pauli_effects(), w, 1000);
  CVector up(2);
  up << 1.0, 0.0;
  const DensityMatrix rho = DensityMatrix::pure(up);
  const auto cert = certify(ds, rho);
  ASSERT_TRUE(cert.passes());
  const auto rep = bayes_report(ds, pauli_x(), rho, cert);
  EXPECT_FALSE(rep.valid);
  EXPECT_TRUE(std::isnan(rep.variance));
  EXPECT_NE(std::find(rep.flags.begin(), rep.flags.end(), "degenerate_gap"), rep.flags.end());
}

}  // namespace
