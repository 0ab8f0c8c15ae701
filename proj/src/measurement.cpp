// Copyright 2026 The envuni Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "envuni/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace envuni {

namespace {

std::set<std::string> label_set(const SystemSpec& s) {
  return {s.conditions().begin(), s.conditions().end()};
}

void require_same_labels(const SystemSpec& a, const SystemSpec& b) {
  if (label_set(a) != label_set(b))
    throw Error(ErrorCode::invalid_argument,
                "condition labels of '" + a.name() + "' and '" + b.name() + "' do not coincide");
}

}  // namespace

MeasurementScenario make_pointer_scenario(const std::vector<std::string>& conditions,
                                          const std::vector<Complex>& amplitudes, bool with_apparatus) {
  if (conditions.size() != amplitudes.size())
    throw Error(ErrorCode::invalid_argument, "one amplitude per condition required");
  if (conditions.empty()) throw Error(ErrorCode::invalid_argument, "scenario needs at least one condition");
  const std::size_t d = conditions.size();
  std::vector<std::pair<std::string, Complex>> amps;
  for (std::size_t k = 0; k < d; ++k) amps.emplace_back(conditions[k], amplitudes[k]);
  std::optional<SystemSpec> apparatus;
  if (with_apparatus) apparatus = SystemSpec::pointer("A", {"a", d}, conditions);
  return MeasurementScenario{SystemSpec::pointer("S", {"s", d}, conditions), std::move(apparatus),
                             SystemSpec::pointer("E", {"e", d}, conditions), std::move(amps)};
}

CompositeSpace universe_space(const MeasurementScenario& scenario) {
  std::vector<FactorSpace> factors = scenario.environment.local_space().factors();
  if (scenario.apparatus) {
    const auto& fa = scenario.apparatus->local_space().factors();
    factors.insert(factors.end(), fa.begin(), fa.end());
  }
  const auto& fs = scenario.system.local_space().factors();
  factors.insert(factors.end(), fs.begin(), fs.end());
  return CompositeSpace(std::move(factors));
}

StateVector pointer_state(const SystemSpec& sys, std::string_view alpha, const Tolerances& tol) {
  const auto basis = range_basis(sys.projector(alpha).matrix(), tol.op);
  if (basis.empty())
    throw Error(ErrorCode::rank_mismatch,
                "condition '" + std::string(alpha) + "' of '" + sys.name() + "' has an empty subspace");
  return {sys.local_space(), basis.front()};
}

StateVector build_measurement_state(const MeasurementScenario& sc, const Tolerances& tol) {
  require_valid(sc.system, tol);
  require_valid(sc.environment, tol);
  require_same_labels(sc.system, sc.environment);
  if (sc.apparatus) {
    require_valid(*sc.apparatus, tol);
    require_same_labels(sc.system, *sc.apparatus);
  }

  std::set<std::string> seen;
  double total = 0.0;
  for (const auto& [label, amp] : sc.amplitudes) {
    sc.system.index_of(label);
    if (!seen.insert(label).second) throw Error(ErrorCode::label_collision, "amplitude for '" + label + "' given twice");
    total += std::norm(amp);
  }
  if (std::abs(total - 1.0) > tol.norm)
    throw Error(ErrorCode::not_normalized, "scenario amplitudes have squared norm " + std::to_string(total));

  StateVector psi = StateVector::zero(universe_space(sc));
  for (const auto& [label, amp] : sc.amplitudes) {
    if (std::abs(amp) < tol.branch) continue;
    StateVector branch = pointer_state(sc.environment, label, tol);
    if (sc.apparatus) branch = tensor(branch, pointer_state(*sc.apparatus, label, tol));
    branch = tensor(branch, pointer_state(sc.system, label, tol));
    psi = psi + branch.scaled(amp);
  }
  return psi;
}

CorrelationReport verify_correlation(const StateVector& psi, const SystemSpec& a, const SystemSpec& b,
                                     const Tolerances& tol) {
  CorrelationReport report;
  report.first = a.name();
  report.second = b.name();
  report.tolerance = tol.op;
  for (const auto& beta : b.conditions()) {
    const StateVector pb = project(psi, b, beta);
    for (const auto& alpha : a.conditions()) {
      StateVector lhs = project(pb, a, alpha);
      if (alpha == beta) lhs = lhs - pb;
      report.pairs.push_back({alpha, beta, lhs.norm()});
    }
  }
  // Scan α-major so ties resolve to the smallest α first.
  for (const auto& alpha : a.conditions())
    for (const auto& p : report.pairs)
      if (p.alpha == alpha && p.residual > report.max_residual) {
        report.max_residual = p.residual;
        report.argmax_alpha = p.alpha;
        report.argmax_beta = p.beta;
      }
  return report;
}

BranchDecomposition decompose_branches(const StateVector& psi, const SystemSpec& env, const SystemSpec& sys,
                                       const Tolerances& tol) {
  require_valid(env, tol);
  require_valid(sys, tol);
  BranchDecomposition out;
  out.correlation = verify_correlation(psi, env, sys, tol);
  if (!out.correlation.pass())
    throw Error(ErrorCode::correlation_violated,
                "correlation violated between '" + env.name() + "' and '" + sys.name() + "': residual " +
                    std::to_string(out.correlation.max_residual) + " at (" + out.correlation.argmax_alpha + "," +
                    out.correlation.argmax_beta + ")");

  for (const auto& alpha : sys.conditions()) {
    if (!env.find(alpha)) continue;  // weight here would have failed the correlation check
    const StateVector v = project(project(psi, sys, alpha), env, alpha);
    const double mag = v.norm();
    if (alpha == kNonexistence) out.nonexistence_weight = mag * mag;
    if (mag < tol.branch) {
      out.dropped.push_back(alpha);
      continue;
    }
    Vector unit = canonical_phase(v.amplitudes() / mag, tol.branch);
    StateVector state(psi.space(), std::move(unit));
    const Complex amp = inner(state, psi);
    out.branches.push_back({alpha, amp, std::move(state)});
  }
  return out;
}

BranchDecomposition decompose_branches(const StateVector& psi, const SystemSpec& env, const SystemSpec& apparatus,
                                       const SystemSpec& sys, const Tolerances& tol) {
  require_valid(apparatus, tol);
  for (const auto& report : {verify_correlation(psi, env, apparatus, tol), verify_correlation(psi, apparatus, sys, tol)})
    if (!report.pass())
      throw Error(ErrorCode::correlation_violated,
                  "correlation violated between '" + report.first + "' and '" + report.second + "': residual " +
                      std::to_string(report.max_residual));
  return decompose_branches(psi, env, sys, tol);
}

StateVector reconstruct(const BranchDecomposition& decomposition) {
  if (decomposition.branches.empty()) throw Error(ErrorCode::invalid_argument, "cannot reconstruct from no branches");
  const auto& first = decomposition.branches.front().state;
  StateVector out = StateVector::zero(first.space());
  for (const auto& b : decomposition.branches) {
    if (b.state.space() != first.space()) throw Error(ErrorCode::space_mismatch, "branches live on different spaces");
    out = out + b.state.scaled(b.amplitude);
  }
  return out;
}

}  // namespace envuni
