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
#include <numeric>

#include "qtomo/io.hpp"
#include "qtomo/povm.hpp"
#include "qtomo/random.hpp"

namespace {

using namespace qtomo;

void expect_complete(const Povm& p) {
  EXPECT_NO_THROW(p.validate());
  for (const auto& s : p.settings) {
    CMatrix sum = CMatrix::Zero(p.dim, p.dim);
    for (const auto& e : s.effects) sum += e.matrix();
    EXPECT_LE((sum - CMatrix::Identity(p.dim, p.dim)).norm(), 1e-12);
  }
}

TEST(Povm, PresetsAreComplete) {
  for (int d : {1, 2, 3, 4, 5}) expect_complete(computational_povm(d));
  for (int q : {1, 2, 3}) expect_complete(pauli_povm(q));
  for (int d : {2, 3, 5, 7}) expect_complete(mub_povm(d));
  EXPECT_EQ(pauli_povm(2).settings.size(), 9u);
  EXPECT_EQ(mub_povm(3).settings.size(), 4u);
}

TEST(Povm, MubBasesAreUnbiased) {
  for (int d : {3, 5}) {
    const Povm p = mub_povm(d);
    for (std::size_t s = 0; s < p.settings.size(); ++s) {
      for (std::size_t t = s + 1; t < p.settings.size(); ++t) {
        for (const auto& a : p.settings[s].effects) {
          for (const auto& b : p.settings[t].effects) {
            EXPECT_NEAR(frobenius_inner(a, b), 1.0 / d, 1e-12);
          }
        }
      }
    }
  }
}

TEST(Povm, PresetsSpanHermitianSpace) {
  for (int d : {2, 3}) {
    const auto ds = MeasurementDataset::from_weights(d, mub_povm(d).flat_effects(),
                                                     std::vector<double>(d * (d + 1), 1.0 / (d * (d + 1))), 10);
    EXPECT_TRUE(spans_hermitian_space(ds));
  }
  const auto p4 = pauli_povm(2);
  const auto ds4 = MeasurementDataset::from_weights(4, p4.flat_effects(), std::vector<double>(36, 1.0 / 36), 10);
  EXPECT_TRUE(spans_hermitian_space(ds4));
}

TEST(Povm, PresetErrors) {
  EXPECT_THROW(povm_preset("mub", 4), DomainError);
  EXPECT_THROW(povm_preset("pauli", 3), DomainError);
  EXPECT_THROW(povm_preset("bogus", 2), DomainError);
  EXPECT_THROW(pauli_povm(6), DimensionError);
  Povm broken = computational_povm(2);
  broken.settings[0].effects.pop_back();
  EXPECT_THROW(broken.validate(), DomainError);
}

TEST(Simulate, MaximallyMixedPauliCounts) {
  const auto ds = simulate({DensityMatrix::maximally_mixed(2), pauli_povm(1), 60000, 7});
  ASSERT_EQ(ds.size(), 6u);
  EXPECT_EQ(ds.total_shots(), 60000);
  for (double c : ds.counts()) {
    // Binomial(20000, 1/2): standard deviation about 71.
    EXPECT_NEAR(c, 10000.0, 400.0);
  }
  for (std::size_t s = 0; s < 3; ++s) EXPECT_DOUBLE_EQ(ds.counts()[2 * s] + ds.counts()[2 * s + 1], 20000.0);
}

TEST(Simulate, ImpossibleOutcomesNeverOccur) {
  const DensityMatrix zero(HermitianMatrix::diagonal(RVector::Unit(2, 0)));
  const auto ds = simulate({zero, pauli_povm(1), 3000, 11});
  EXPECT_EQ(ds.counts()[0], 1000.0);
  EXPECT_EQ(ds.counts()[1], 0.0);
}

TEST(Simulate, UnevenSplitAndDeterminism) {
  const auto spec = SimulationSpec{DensityMatrix::maximally_mixed(3), mub_povm(3), 1001, 5};
  const auto a = simulate(spec);
  const auto b = simulate(spec);
  EXPECT_EQ(a.counts(), b.counts());
  EXPECT_DOUBLE_EQ(std::accumulate(a.counts().begin(), a.counts().end(), 0.0), 1001.0);
  double first = 0.0;
  for (int k = 0; k < 3; ++k) first += a.counts()[k];
  EXPECT_DOUBLE_EQ(first, 251.0);
  auto other = spec;
  other.seed = 6;
  EXPECT_NE(simulate(other).counts(), a.counts());
}

TEST(Simulate, Errors) {
  EXPECT_THROW(simulate({DensityMatrix::maximally_mixed(3), pauli_povm(1), 100, 1}), DimensionError);
  EXPECT_THROW(simulate({DensityMatrix::maximally_mixed(2), pauli_povm(1), 2, 1}), DomainError);
}

TEST(Json, MatrixRoundTripIsExact) {
  Rng rng(21);
  const HermitianMatrix h = random_hermitian(3, rng);
  const auto text = io::to_json(h).dump();
  const HermitianMatrix back = io::hermitian_from_json(io::parse_json(text));
  EXPECT_EQ((back.matrix() - h.matrix()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Json, DatasetRoundTripIsExact) {
  Rng rng(22);
  const auto ds = simulate({sample_density_hs(3, rng), mub_povm(3), 1200, 3});
  const auto back = io::dataset_from_json(io::parse_json(io::to_json(ds).dump()));
  EXPECT_EQ(back.dim(), ds.dim());
  EXPECT_EQ(back.total_shots(), ds.total_shots());
  EXPECT_EQ(back.counts(), ds.counts());
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ((back.effects()[i].matrix().matrix() - ds.effects()[i].matrix().matrix()).cwiseAbs().maxCoeff(), 0.0);
  }
  const auto fractional = MeasurementDataset::from_weights(2, pauli_povm(1).flat_effects(),
                                                           {0.3, 0.7 / 5, 0.7 / 5, 0.7 / 5, 0.7 / 5, 0.7 / 5}, 7);
  const auto back2 = io::dataset_from_json(io::parse_json(io::to_json(fractional).dump()));
  EXPECT_EQ(back2.counts(), fractional.counts());
}

TEST(Json, MalformedInputsRaiseParseError) {
  EXPECT_THROW(io::parse_json("{\"dim\": 2,"), ParseError);
  EXPECT_THROW(io::dataset_from_json(io::parse_json("[1, 2]")), ParseError);
  EXPECT_THROW(io::dataset_from_json(io::parse_json("{\"dim\": 2, \"outcomes\": []}")), ParseError);
  EXPECT_THROW(io::dataset_from_json(io::parse_json("{\"dim\": \"two\", \"total_shots\": 1, \"outcomes\": []}")),
               ParseError);
  EXPECT_THROW(io::dataset_from_json(io::parse_json(
                   "{\"dim\": 1, \"total_shots\": 1, \"outcomes\": [{\"effect\": [[1]]}]}")),
               ParseError);
  EXPECT_THROW(io::matrix_from_json(io::parse_json("[[1, 2], [3]]")), ParseError);
  EXPECT_THROW(io::matrix_from_json(io::parse_json("[[\"x\"]]")), ParseError);
  EXPECT_THROW(io::hermitian_from_json(io::parse_json("[[0, 1], [0, 0]]")), ParseError);
}

TEST(Json, NonFiniteNumbersBecomeNull) {
  EXPECT_TRUE(io::number(std::nan("")).is_null());
  EXPECT_TRUE(io::number(INFINITY).is_null());
  EXPECT_EQ(io::number(1.5).get<double>(), 1.5);
}

}  // namespace
