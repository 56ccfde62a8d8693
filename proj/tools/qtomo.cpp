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


// qtomo command-line front end.
//
// Exit codes: 0 success, 1 other error, 2 parse error (command line or
// JSON), 3 certificate failure, 4 report flagged as not valid. --force turns
// 3 and 4 into 0 and still writes whatever output is available.

#include <cmath>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtomo/qtomo.hpp"

namespace {

using namespace qtomo;
using io::Json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitParse = 2;
constexpr int kExitCertificate = 3;
constexpr int kExitFlagged = 4;

struct Common {
  std::string output;
  std::string plot;
  std::string log;
  std::uint64_t seed = 1;
  double rank_tol = kDefaultRankTol;
  double tol = 1e-9;
  bool force = false;
};

void emit(const Json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    io::write_text_file(path, text);
  }
}

DensityMatrix read_state(const std::string& spec, int dim_hint) {
  if (spec == "mixed") {
    if (dim_hint < 1) throw DomainError("--state mixed needs --dim");
    return DensityMatrix::maximally_mixed(dim_hint);
  }
  return DensityMatrix(io::hermitian_from_json(io::read_json_file(spec)));
}

SolverOptions solver_options(const Common& c, int max_iters) {
  SolverOptions o;
  o.rank_tol = c.rank_tol;
  o.grad_tol = c.tol;
  o.seed = c.seed;
  o.max_iters = max_iters;
  return o;
}

void write_trace(const std::string& path, const std::vector<IterationRecord>& trace) {
  if (path.empty()) return;
  std::ostringstream os;
  for (const auto& r : trace) os << io::to_json(r).dump() << '\n';
  io::write_text_file(path, os.str());
}

int run_simulate(const Common& c, const std::string& state, int dim, const std::string& povm_name, long shots) {
  const DensityMatrix rho = read_state(state, dim);
  const Povm povm = povm_preset(povm_name, rho.dim());
  const MeasurementDataset ds = simulate({rho, povm, shots, c.seed});
  emit(io::to_json(ds), c.output);
  return kExitOk;
}

int run_estimate(const Common& c, const std::string& data, const std::string& observable, int max_iters) {
  const MeasurementDataset ds = io::dataset_from_json(io::read_json_file(data));
  const HermitianMatrix a = io::hermitian_from_json(io::read_json_file(observable));
  const SolveResult fit = solve(ds, solver_options(c, max_iters));
  write_trace(c.log, fit.trace);
  if (!fit.certificate.passes()) {
    std::cerr << "qtomo: the maximum-likelihood certificate failed\n";
    if (!c.force) return kExitCertificate;
    Json out{{"rho_ml", io::to_json(fit.rho.hermitian())},
             {"certificate", io::to_json(fit.certificate)},
             {"valid", false},
             {"flags", {"certificate_failed"}},
             {"iterations", fit.trace.size()}};
    emit(out, c.output);
    return kExitOk;
  }
  const AsymptoticReport rep = bayes_report(ds, a, fit.rho, fit.certificate);
  Json out = io::to_json(rep);
  out["iterations"] = fit.trace.size();
  emit(out, c.output);
  if (!c.plot.empty()) {
    // Credible-interval endpoints mean +- k sigma for k = 1, 2, 3.
    std::ostringstream os;
    os.precision(17);
    os << "k,lower,upper\n";
    const double sd = std::sqrt(rep.variance);
    for (int k = 1; k <= 3; ++k) os << k << ',' << rep.mean - k * sd << ',' << rep.mean + k * sd << '\n';
    io::write_text_file(c.plot, os.str());
  }
  if (!rep.valid) {
    std::cerr << "qtomo: report flagged:";
    for (const auto& f : rep.flags) std::cerr << ' ' << f;
    std::cerr << '\n';
    if (!c.force) return kExitFlagged;
  }
  return kExitOk;
}

int run_certify(const Common& c, const std::string& data, const std::string& state) {
  const MeasurementDataset ds = io::dataset_from_json(io::read_json_file(data));
  const DensityMatrix rho = read_state(state, ds.dim());
  const OptimalityCertificate cert = certify(ds, rho, c.rank_tol, c.tol);
  Json out = io::to_json(cert);
  out["gap"] = io::number(spectral_gap(cert, gradient(ds, rho)));
  emit(out, c.output);
  if (!cert.passes() && !c.force) return kExitCertificate;
  return kExitOk;
}

int run_oracle(const Common& c, const std::string& data, const std::string& observable, long samples, int threads,
               int max_iters) {
  const MeasurementDataset ds = io::dataset_from_json(io::read_json_file(data));
  const HermitianMatrix a = io::hermitian_from_json(io::read_json_file(observable));
  McOptions mo;
  mo.samples = samples;
  mo.seed = c.seed;
  mo.threads = threads;
  const McEstimate mc = mc_bayes(ds, a, mo);
  Json out{{"mc", io::to_json(mc)}};
  const SolveResult fit = solve(ds, solver_options(c, max_iters));
  if (fit.certificate.passes()) {
    const AsymptoticReport rep = bayes_report(ds, a, fit.rho, fit.certificate);
    out["asymptotic"] = {{"mean", rep.mean},
                         {"variance", io::number(rep.variance)},
                         {"valid", rep.valid},
                         {"flags", rep.flags}};
    out["difference"] = {{"mean", rep.mean - mc.mean},
                         {"variance", io::number(rep.variance - mc.variance)},
                         {"mean_in_se", io::number((rep.mean - mc.mean) / mc.std_error_mean)},
                         {"variance_in_se", io::number((rep.variance - mc.variance) / mc.std_error_variance)}};
  } else {
    out["asymptotic"] = nullptr;
  }
  emit(out, c.output);
  return kExitOk;
}

int run_laplace_check(const Common& c, const std::string& kind, const std::string& quantity, int m, int n,
                      const std::vector<double>& Ns, double quad_tol) {
  const laplace::CheckCase cc = kind == "interior" ? laplace::CheckCase::interior : laplace::CheckCase::boundary;
  laplace::CheckQuantity q = laplace::CheckQuantity::leading;
  if (quantity == "second") q = laplace::CheckQuantity::second_order;
  if (quantity == "variance") q = laplace::CheckQuantity::variance;
  const laplace::CheckTable t = laplace::convergence_table(cc, q, m, n, Ns, quad_tol);
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"N", r.N},
                    {"asymptotic", io::number(r.asymptotic)},
                    {"quadrature", io::number(r.quadrature)},
                    {"ratio", io::number(r.ratio)},
                    {"rel_error", io::number(r.rel_error)}});
  }
  Json ratios = Json::array();
  for (double x : t.error_ratios()) ratios.push_back(io::number(x));
  emit({{"case", kind}, {"quantity", quantity}, {"m", t.m}, {"n", t.n}, {"rows", rows}, {"error_ratios", ratios}},
       c.output);
  if (!c.plot.empty()) io::write_text_file(c.plot, t.csv());
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c, bool solver_flags) {
  sub->add_option("--output,-o", c.output, "Write JSON here instead of stdout");
  sub->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  sub->add_flag("--force", c.force, "Exit 0 even if the certificate fails or the report is flagged");
  if (solver_flags) {
    sub->add_option("--rank-tol", c.rank_tol, "Relative eigenvalue cutoff for the numerical rank")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--tol", c.tol, "Certificate residual tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian quantum state tomography: asymptotic estimates and oracles"};
  app.require_subcommand(1);
  Common common;

  std::string state;
  std::string povm_name = "pauli";
  int dim = 0;
  long shots = 0;
  auto* sim = app.add_subcommand("simulate", "Simulate measurement counts for a known state");
  add_common(sim, common, false);
  sim->add_option("--state", state, "Density matrix JSON file, or 'mixed'")->required();
  sim->add_option("--dim", dim, "Dimension, needed for --state mixed");
  sim->add_option("--povm", povm_name, "computational, pauli or mub")->capture_default_str();
  sim->add_option("--shots", shots, "Total number of shots")->required();

  std::string data;
  std::string observable;
  int max_iters = 5000;
  auto* est = app.add_subcommand("estimate", "Maximum likelihood, certificate and asymptotic posterior moments");
  add_common(est, common, true);
  est->add_option("--data", data, "Dataset JSON file")->required();
  est->add_option("--observable", observable, "Observable JSON file")->required();
  est->add_option("--max-iters", max_iters, "Solver iteration cap")->capture_default_str();
  est->add_option("--plot", common.plot, "Write interval endpoints as CSV");
  est->add_option("--log", common.log, "Write the solver trace as JSON lines");

  auto* cert = app.add_subcommand("certify", "Check the optimality certificate of a given state");
  add_common(cert, common, true);
  cert->add_option("--data", data, "Dataset JSON file")->required();
  cert->add_option("--state", state, "Density matrix JSON file, or 'mixed'")->required();

  long samples = 200000;
  int threads = 0;
  auto* orc = app.add_subcommand("oracle", "Monte Carlo posterior moments under the flat prior");
  add_common(orc, common, true);
  orc->add_option("--data", data, "Dataset JSON file")->required();
  orc->add_option("--observable", observable, "Observable JSON file")->required();
  orc->add_option("--samples", samples, "Prior samples")->capture_default_str();
  orc->add_option("--threads", threads, "Worker threads, 0 for all cores")->capture_default_str();
  orc->add_option("--max-iters", max_iters, "Solver iteration cap")->capture_default_str();

  std::string kind = "boundary";
  std::string quantity = "leading";
  int m = 0;
  int n = 0;
  std::vector<double> Ns{100, 200, 400, 800};
  double quad_tol = 1e-9;
  auto* lap = app.add_subcommand("laplace-check", "Compare Laplace asymptotics with quadrature");
  lap->add_option("--output,-o", common.output, "Write JSON here instead of stdout");
  lap->add_option("--case", kind, "interior or boundary")
      ->capture_default_str()
      ->check(CLI::IsMember({"interior", "boundary"}));
  lap->add_option("--quantity", quantity, "leading, second or variance")
      ->capture_default_str()
      ->check(CLI::IsMember({"leading", "second", "variance"}));
  lap->add_option("--m", m, "Power of the boundary coordinate")->capture_default_str()->check(CLI::NonNegativeNumber);
  lap->add_option("--n", n, "Number of interior coordinates")->capture_default_str()->check(CLI::Range(0, 3));
  lap->add_option("--N", Ns, "Sweep of N values")->capture_default_str();
  lap->add_option("--quad-tol", quad_tol, "Relative quadrature tolerance")->capture_default_str();
  lap->add_option("--plot", common.plot, "Write the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (*sim) return run_simulate(common, state, dim, povm_name, shots);
    if (*est) return run_estimate(common, data, observable, max_iters);
    if (*cert) return run_certify(common, data, state);
    if (*orc) return run_oracle(common, data, observable, samples, threads, max_iters);
    if (*lap) return run_laplace_check(common, kind, quantity, m, n, Ns, quad_tol);
  } catch (const ParseError& e) {
    std::cerr << "qtomo: parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const CertificateError& e) {
    std::cerr << "qtomo: " << e.what() << '\n';
    return common.force ? kExitOk : kExitCertificate;
  } catch (const std::exception& e) {
    std::cerr << "qtomo: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
