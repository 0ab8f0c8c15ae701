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

#include "envuni/envariance.hpp"

#include <cmath>
#include <numbers>

namespace envuni {

namespace {

PhaseMap negated(const PhaseMap& sigma) {
  PhaseMap out;
  for (const auto& [label, s] : sigma) out.emplace(label, -s);
  return out;
}

std::string describe_phases(const PhaseMap& sigma) {
  std::string out;
  for (const auto& [label, s] : sigma) {
    if (!out.empty()) out += ",";
    out += label + ":" + std::to_string(s);
  }
  return "{" + out + "}";
}

const Branch* find_branch(const BranchDecomposition& d, std::string_view label) {
  for (const auto& b : d.branches)
    if (b.condition == label) return &b;
  return nullptr;
}

EnvarianceCertificate swap_certificate(const BranchDecomposition& dec, const StateVector& psi, const SystemSpec& sys,
                                       std::span<const SystemSpec> counterparts, std::string_view beta,
                                       std::string_view gamma, const Tolerances& tol);

}  // namespace

LinearOperator phase_unitary(const SystemSpec& sys, const PhaseMap& phases, const Tolerances& tol) {
  require_valid(sys, tol);
  for (const auto& [label, s] : phases) sys.index_of(label);
  LinearOperator u = LinearOperator::zero(sys.local_space());
  for (std::size_t a = 0; a < sys.conditions().size(); ++a) {
    const auto it = phases.find(sys.conditions()[a]);
    const double s = it == phases.end() ? 0.0 : it->second;
    u = u + sys.projectors()[a].scaled(std::polar(1.0, s));
  }
  return u;
}

namespace {

// swap_unitary without the family validation, for callers that validated already.
LinearOperator build_swap(const SystemSpec& sys, std::string_view beta, std::string_view gamma, const Tolerances& tol) {
  if (beta == gamma)
    throw Error(ErrorCode::invalid_argument, "swap needs two distinct conditions, got '" + std::string(beta) + "' twice");
  const Matrix& pb = sys.projector(beta).matrix();
  const Matrix& pg = sys.projector(gamma).matrix();
  const auto bb = range_basis(pb, tol.op);
  const auto bg = range_basis(pg, tol.op);
  if (bb.size() != bg.size())
    throw Error(ErrorCode::rank_mismatch, "conditions '" + std::string(beta) + "' and '" + std::string(gamma) +
                                              "' have subspaces of different dimension");
  const auto d = static_cast<Eigen::Index>(sys.local_space().total_dimension());
  Matrix u = Matrix::Identity(d, d) - pb - pg;
  for (std::size_t k = 0; k < bb.size(); ++k) u += bg[k] * bb[k].adjoint() + bb[k] * bg[k].adjoint();
  return {sys.local_space(), std::move(u)};
}

}  // namespace

LinearOperator swap_unitary(const SystemSpec& sys, std::string_view beta, std::string_view gamma,
                            const Tolerances& tol) {
  require_valid(sys, tol);
  return build_swap(sys, beta, gamma, tol);
}

EnvarianceCertificate phase_envariance_residual(const StateVector& psi, const SystemSpec& sys, const SystemSpec& env,
                                                const PhaseMap& sigma, const Tolerances& tol) {
  const LinearOperator us = phase_unitary(sys, sigma, tol);
  const PhaseMap inverse = negated(sigma);
  const LinearOperator ue = phase_unitary(env, inverse, tol);
  const StateVector restored = apply_local(ue, apply_local(us, psi));
  EnvarianceCertificate cert;
  cert.residual = (restored - psi).norm();
  cert.tolerance = tol.env;
  cert.envariant = cert.residual <= cert.tolerance;
  cert.counter_op = "phase U_" + env.name() + "(-sigma) with -sigma=" + describe_phases(inverse);
  return cert;
}

EnvarianceCertificate check_phase_envariance(const StateVector& psi, const SystemSpec& sys, const SystemSpec& env,
                                             const PhaseMap& sigma, const Tolerances& tol) {
  decompose_branches(psi, env, sys, tol);
  return phase_envariance_residual(psi, sys, env, sigma, tol);
}

EnvarianceCertificate check_swap_envariance(const StateVector& psi, const SystemSpec& sys, const SystemSpec& env,
                                            std::string_view beta, std::string_view gamma, const Tolerances& tol) {
  return check_swap_envariance(psi, sys, std::span<const SystemSpec>(&env, 1), beta, gamma, tol);
}

EnvarianceCertificate check_swap_envariance(const StateVector& psi, const SystemSpec& sys,
                                            std::span<const SystemSpec> counterparts, std::string_view beta,
                                            std::string_view gamma, const Tolerances& tol) {
  if (counterparts.empty()) throw Error(ErrorCode::invalid_argument, "swap envariance needs an environment system");
  for (const auto& c : counterparts.subspan(1)) require_valid(c, tol);
  return swap_certificate(decompose_branches(psi, counterparts.front(), sys, tol), psi, sys, counterparts, beta, gamma,
                          tol);
}

std::vector<EnvarianceCertificate> check_swap_pairs(const StateVector& psi, const SystemSpec& sys,
                                                    std::span<const SystemSpec> counterparts,
                                                    std::span<const std::pair<std::string, std::string>> pairs,
                                                    const Tolerances& tol) {
  if (counterparts.empty()) throw Error(ErrorCode::invalid_argument, "swap envariance needs an environment system");
  for (const auto& c : counterparts.subspan(1)) require_valid(c, tol);
  const BranchDecomposition dec = decompose_branches(psi, counterparts.front(), sys, tol);
  std::vector<EnvarianceCertificate> out;
  out.reserve(pairs.size());
  for (const auto& [beta, gamma] : pairs) out.push_back(swap_certificate(dec, psi, sys, counterparts, beta, gamma, tol));
  return out;
}

namespace {

EnvarianceCertificate swap_certificate(const BranchDecomposition& dec, const StateVector& psi, const SystemSpec& sys,
                                       std::span<const SystemSpec> counterparts, std::string_view beta,
                                       std::string_view gamma, const Tolerances& tol) {
  const SystemSpec& env = counterparts.front();
  const LinearOperator us = build_swap(sys, beta, gamma, tol);

  const Branch* bb = find_branch(dec, beta);
  const Branch* bg = find_branch(dec, gamma);
  const Complex amp_b = bb ? bb->amplitude : Complex{};
  const Complex amp_g = bg ? bg->amplitude : Complex{};

  // After both swaps the β branch carries ψᵞ and the γ branch carries ψᵝ.
  // A phase on the environment record realigns them; magnitudes cannot be fixed.
  PhaseMap compensation;
  if (std::abs(amp_b) >= tol.branch && std::abs(amp_g) >= tol.branch) {
    const double shift = std::arg(amp_b) - std::arg(amp_g);
    if (std::abs(std::remainder(shift, 2.0 * std::numbers::pi)) > 0.0) {
      compensation.emplace(std::string(beta), shift);
      compensation.emplace(std::string(gamma), -shift);
    }
  }

  StateVector out = apply_local(us, psi);
  std::string description;
  for (const auto& counterpart : counterparts) {
    out = apply_local(build_swap(counterpart, beta, gamma, tol), out);
    if (!description.empty()) description += " * ";
    description += "swap U_" + counterpart.name() + "(" + std::string(beta) + "<->" + std::string(gamma) + ")";
  }
  if (!compensation.empty()) {
    out = apply_local(phase_unitary(env, compensation, tol), out);
    description = "phase U_" + env.name() + describe_phases(compensation) + " * " + description;
  }

  EnvarianceCertificate cert;
  cert.residual = (out - psi).norm();
  cert.tolerance = std::numbers::sqrt2 * tol.env;
  cert.envariant = cert.residual <= cert.tolerance;
  cert.counter_op = description;
  cert.magnitude_gap = std::abs(std::abs(amp_b) - std::abs(amp_g));
  return cert;
}

}  // namespace

}  // namespace envuni
