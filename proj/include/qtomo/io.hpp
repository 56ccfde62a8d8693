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
/// JSON encodings. Matrices are row-major nested arrays of [re, im] pairs.
/// A dataset is {"dim", "total_shots", "outcomes": [{"effect", "count"}]}.

#ifndef QTOMO_IO_HPP
#define QTOMO_IO_HPP

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtomo/bayes.hpp"
#include "qtomo/errors.hpp"
#include "qtomo/hermitian.hpp"
#include "qtomo/likelihood.hpp"
#include "qtomo/maxlike.hpp"
#include "qtomo/oracle_mc.hpp"

namespace qtomo::io {

using Json = nlohmann::json;

/// NaN and infinities have no JSON number form; they are written as null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(row);
  }
  return rows;
}

inline Json to_json(const HermitianMatrix& h) { return to_json(h.matrix()); }

/// Square complex matrix from nested [re, im] arrays. A bare number is
/// accepted as a real entry.
inline CMatrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("matrix: expected a non-empty array of rows");
  const auto d = static_cast<Eigen::Index>(j.size());
  CMatrix m(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) {
      throw ParseError("matrix: row " + std::to_string(r) + " does not have " + std::to_string(d) + " entries");
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      const Json& e = row[static_cast<std::size_t>(c)];
      if (e.is_number()) {
        m(r, c) = Complex(e.get<double>(), 0.0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
        m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
      } else {
        throw ParseError("matrix: entry (" + std::to_string(r) + ", " + std::to_string(c) +
                         ") is not a number or an [re, im] pair");
      }
    }
  }
  return m;
}

/// Hermitian matrix; rejects inputs whose anti-Hermitian part exceeds 1e-9.
inline HermitianMatrix hermitian_from_json(const Json& j) {
  const CMatrix m = matrix_from_json(j);
  if ((m - m.adjoint()).norm() > 1e-9 * std::max(1.0, m.norm())) {
    throw ParseError("matrix: not Hermitian");
  }
  return HermitianMatrix(m);
}

inline Json to_json(const MeasurementDataset& ds) {
  Json outcomes = Json::array();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double c = ds.counts()[i];
    Json count = (c == std::floor(c) && c < 9e15) ? Json(static_cast<long long>(c)) : Json(c);
    outcomes.push_back({{"effect", to_json(ds.effects()[i].matrix())}, {"count", count}});
  }
  return {{"dim", ds.dim()}, {"total_shots", ds.total_shots()}, {"outcomes", outcomes}};
}

inline MeasurementDataset dataset_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ParseError("dataset: expected an object");
    for (const char* key : {"dim", "total_shots", "outcomes"}) {
      if (!j.contains(key)) throw ParseError(std::string("dataset: missing field '") + key + "'");
    }
    const int dim = j.at("dim").get<int>();
    const long shots = j.at("total_shots").get<long>();
    const Json& outs = j.at("outcomes");
    if (!outs.is_array()) throw ParseError("dataset: 'outcomes' must be an array");
    std::vector<PovmEffect> effects;
    std::vector<double> counts;
    for (const Json& o : outs) {
      if (!o.contains("effect") || !o.contains("count")) {
        throw ParseError("dataset: every outcome needs 'effect' and 'count'");
      }
      effects.emplace_back(hermitian_from_json(o.at("effect")));
      counts.push_back(o.at("count").get<double>());
    }
    return MeasurementDataset(dim, std::move(effects), std::move(counts), shots);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
}

inline Json to_json(const OptimalityCertificate& c) {
  return {{"lambda_bar", c.lambda_bar},
          {"commutator_residual", c.commutator_residual},
          {"eigen_equation_residual", c.eigen_equation_residual},
          {"psd_slack", c.psd_slack},
          {"min_probability", number(c.min_probability)},
          {"rank", c.rank},
          {"min_retained_eigenvalue", c.min_retained_eigenvalue},
          {"spanning", c.spanning},
          {"tol", c.tol},
          {"passes", c.passes()},
          {"projector", to_json(c.projector)}};
}

inline Json to_json(const IterationRecord& r) {
  return {{"iter", r.iter}, {"f", r.f}, {"step", r.step}, {"grad_residual", r.grad_residual}};
}

inline Json to_json(const AsymptoticReport& r) {
  return {{"rho_ml", to_json(r.rho_ml.hermitian())},
          {"dim", r.dim},
          {"rank", r.rank},
          {"m", r.m},
          {"n", r.n},
          {"total_shots", r.total_shots},
          {"mean", r.mean},
          {"variance", number(r.variance)},
          {"std_dev", number(std::sqrt(r.variance))},
          {"lambda_bar", r.lambda_bar},
          {"gap", number(r.gap)},
          {"fisher_condition", number(r.fisher_condition)},
          {"valid", r.valid},
          {"flags", r.flags},
          {"certificate", to_json(r.certificate)}};
}

inline Json to_json(const McEstimate& e) {
  return {{"mean", e.mean},
          {"variance", e.variance},
          {"se_mean", number(e.std_error_mean)},
          {"se_var", number(e.std_error_variance)},
          {"ess", e.effective_sample_size},
          {"samples", e.samples},
          {"seed", e.seed}};
}

inline Json parse_json(const std::string& text, const std::string& what = "input") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path);
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace qtomo::io

#endif  // QTOMO_IO_HPP
