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
 * @file   measurement.hpp
 * @brief  Recorded-measurement universe states and their branch decomposition.
 *
 * A recorded measurement correlates system S, optionally an apparatus A, and
 * the environment E so that Pₐᵅ Pₛᵝ ψ = δᵅᵝ Pₛᵝ ψ (and likewise E against A).
 * Such a state splits into orthogonal branches ψᵅ |eᵅ sᵅ⟩, one per condition.
 *
 * The universe space of a scenario is E ⊗ A ⊗ S in that factor order.
 */

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "envuni/hilbert.hpp"
#include "envuni/universe.hpp"

namespace envuni {

struct MeasurementScenario {
  SystemSpec system;
  std::optional<SystemSpec> apparatus;
  SystemSpec environment;
  /// ψₛᵅ per condition label; labels not listed have amplitude zero.
  std::vector<std::pair<std::string, Complex>> amplitudes;
};

/// Minimal faithful scenario: every correlation factor has one basis state per
/// listed condition ("s", "a", "e" factors for systems "S", "A", "E").
MeasurementScenario make_pointer_scenario(const std::vector<std::string>& conditions,
                                          const std::vector<Complex>& amplitudes, bool with_apparatus = true);

CompositeSpace universe_space(const MeasurementScenario& scenario);

/// Canonical unit state of a condition subspace on the system's own space:
/// the first vector of range_basis(Pᵅ). Throws rank_mismatch for a zero projector.
StateVector pointer_state(const SystemSpec& sys, std::string_view alpha, const Tolerances& tol = {});

StateVector build_measurement_state(const MeasurementScenario& scenario, const Tolerances& tol = {});

struct PairResidual {
  std::string alpha;
  std::string beta;
  double residual = 0.0;
};

struct CorrelationReport {
  std::string first;   ///< system whose projector is applied second (Pₐᵅ)
  std::string second;  ///< system whose projector is applied first (Pₛᵝ)
  double max_residual = 0.0;
  std::string argmax_alpha;
  std::string argmax_beta;
  std::vector<PairResidual> pairs;
  double tolerance = 0.0;

  bool pass() const noexcept { return max_residual <= tolerance; }
};

/// max over (α, β) of ‖Pₐᵅ Pᵦᵝ ψ − δᵅᵝ Pᵦᵝ ψ‖, with δ comparing condition labels.
CorrelationReport verify_correlation(const StateVector& psi, const SystemSpec& a, const SystemSpec& b,
                                     const Tolerances& tol = {});

struct Branch {
  std::string condition;
  Complex amplitude;
  StateVector state;  ///< unit, canonical phase
};

struct BranchDecomposition {
  std::vector<Branch> branches;
  /// Conditions whose |ψᵅ| fell below the branch tolerance.
  std::vector<std::string> dropped;
  /// |ψ⁰|², the weight carried by the non-existence condition.
  double nonexistence_weight = 0.0;
  CorrelationReport correlation;
};

/// Throws correlation_violated when ψ is not of recorded-measurement form.
BranchDecomposition decompose_branches(const StateVector& psi, const SystemSpec& env, const SystemSpec& sys,
                                       const Tolerances& tol = {});

/// Verifies E–A and A–S first, then decomposes against E and S with A traced through.
BranchDecomposition decompose_branches(const StateVector& psi, const SystemSpec& env, const SystemSpec& apparatus,
                                       const SystemSpec& sys, const Tolerances& tol = {});

/// Σ ψᵅ |branchᵅ⟩. Throws on empty input or branches on different spaces.
StateVector reconstruct(const BranchDecomposition& decomposition);

}  // namespace envuni
