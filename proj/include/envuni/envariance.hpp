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

/**
 * @file   envariance.hpp
 * @brief  Phase and swap unitaries on a system, and envariance certificates.
 *
 * An operation on the system is envariant on ψ when a named operation on the
 * environment alone restores ψ. Only the two constructive counter-operations
 * are decided here: U_E(−σ) undoes U_S(σ), and an environment swap (with a
 * compensating phase) undoes a system swap when |ψᵝ| = |ψᵞ|.
 *
 * All unitaries are returned on the system's own space; use lift() or
 * apply_local() to act on a universe state.
 */

#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "envuni/hilbert.hpp"
#include "envuni/measurement.hpp"
#include "envuni/universe.hpp"

namespace envuni {

/// Condition label → phase σ (radians). Missing labels get σ = 0.
using PhaseMap = std::map<std::string, double, std::less<>>;

/// U = Σ exp(iσᵅ) Pᵅ.
LinearOperator phase_unitary(const SystemSpec& sys, const PhaseMap& phases, const Tolerances& tol = {});

/// Exchanges the β and γ subspaces by pairing their range_basis vectors in
/// order; identity on every other condition. Self-inverse.
LinearOperator swap_unitary(const SystemSpec& sys, std::string_view beta, std::string_view gamma,
                            const Tolerances& tol = {});

struct EnvarianceCertificate {
  bool envariant = false;
  double residual = 0.0;  ///< ‖U_E U_S ψ − ψ‖
  double tolerance = 0.0; ///< envariant ⇔ residual ≤ tolerance
  std::string counter_op;
  /// ||ψᵝ| − |ψᵞ|| for swap certificates; zero for phase certificates.
  double magnitude_gap = 0.0;
};

/// Requires ψ in branch form against (env, sys); throws correlation_violated otherwise.
EnvarianceCertificate check_phase_envariance(const StateVector& psi, const SystemSpec& sys, const SystemSpec& env,
                                             const PhaseMap& sigma, const Tolerances& tol = {});

/// Same residual as check_phase_envariance with no branch-form precondition.
EnvarianceCertificate phase_envariance_residual(const StateVector& psi, const SystemSpec& sys, const SystemSpec& env,
                                                const PhaseMap& sigma, const Tolerances& tol = {});

/// Swap certificate. The tolerance is √2·env_tol: exchanging two branches whose
/// magnitudes differ by Δ leaves a difference state of norm √2·Δ, so the
/// certificate flips exactly where ||ψᵝ| − |ψᵞ|| crosses env_tol.
EnvarianceCertificate check_swap_envariance(const StateVector& psi, const SystemSpec& sys, const SystemSpec& env,
                                            std::string_view beta, std::string_view gamma, const Tolerances& tol = {});

/// Variant where the environment side spans several systems (e.g. E and an
/// apparatus A that also records the outcome). counterparts.front() is the
/// record used for the branch decomposition; each counterpart is swapped.
EnvarianceCertificate check_swap_envariance(const StateVector& psi, const SystemSpec& sys,
                                            std::span<const SystemSpec> counterparts, std::string_view beta,
                                            std::string_view gamma, const Tolerances& tol = {});

/// One certificate per (β, γ) pair, sharing a single branch decomposition.
std::vector<EnvarianceCertificate> check_swap_pairs(const StateVector& psi, const SystemSpec& sys,
                                                    std::span<const SystemSpec> counterparts,
                                                    std::span<const std::pair<std::string, std::string>> pairs,
                                                    const Tolerances& tol = {});

}  // namespace envuni
