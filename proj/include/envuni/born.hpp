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
 * @file   born.hpp
 * @brief  Born probabilities by fine-graining branches into equal-weight pieces.
 *
 * With rational branch weights |ψᵅ|² = mᵅ/M, each branch is split into mᵅ
 * sub-branches so that all M sub-branches carry the coefficient 1/√M. Any two
 * sub-branches are then related by an envariant swap, so each is equally
 * likely, and counting gives Prob(α) = mᵅ/M.
 *
 * Fine-grained universe layout, factors in order:
 *   "s"  system pointer, one basis state per condition
 *   "e"  environment, one record e^{αβ} per sub-branch (dimension M)
 *   "c"  ancilla, one state c^{αβ} per sub-branch (dimension M)
 * Sub-branch (α, β) is |sᵅ, e^{αβ}, c^{αβ}⟩. The coarse environment projector
 * Pₑᵅ spans the mᵅ records of α. For swaps between sub-branches the system side
 * is S⊗C and the environment side is E, both resolved into M rank-one
 * conditions labeled "α.β" (β counts from 1).
 *
 * Irrational weights are handled by rational_approximation(), a minimax-optimal
 * choice of counts over every common denominator up to a bound.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "envuni/hilbert.hpp"
#include "envuni/measurement.hpp"
#include "envuni/universe.hpp"

namespace envuni {

using Rational = boost::rational<std::int64_t>;

class RationalWeights {
 public:
  /// Counts must be ≥ 1; labels unique.
  RationalWeights(std::vector<std::string> labels, std::vector<std::int64_t> counts);

  /// "m1:m2:...:mk", labeled "1".."k".
  static RationalWeights parse(std::string_view text);

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }
  std::int64_t total() const noexcept { return total_; }
  std::size_t size() const noexcept { return counts_.size(); }

 private:
  std::vector<std::string> labels_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// mᵅ/M in exact arithmetic, aligned with weights.labels().
std::vector<Rational> born_probabilities(const RationalWeights& weights);

struct FineBranch {
  std::string label;      ///< "α.β"
  std::string condition;  ///< α
  Complex coefficient;
};

struct FineGrainedState {
  RationalWeights weights;
  StateVector state;
  SystemSpec system;            ///< S, coarse conditions
  SystemSpec environment;       ///< E, coarse records of rank mᵅ
  SystemSpec ancilla;           ///< C, doubly-indexed conditions
  SystemSpec fine_system;       ///< S⊗C, doubly-indexed
  SystemSpec fine_environment;  ///< E, doubly-indexed
  BranchDecomposition base;     ///< coarse decomposition against (E, S)
  std::vector<FineBranch> fine_branches;
};

/// Scenario amplitudes must satisfy ||ψᵅ|² − mᵅ/M| ≤ approx_tol; the phase of
/// each ψᵅ is carried onto its sub-branches.
FineGrainedState fine_grain(const RationalWeights& weights, const MeasurementScenario& scenario,
                            const Tolerances& tol = {});

/// Overload that fine-grains the real positive amplitudes √(mᵅ/M).
FineGrainedState fine_grain(const RationalWeights& weights, const Tolerances& tol = {});

/// max over sub-branches of ||cᵢ| − 1/√M|.
double equal_coefficient_residual(const FineGrainedState& fine);

/// Assigns 1/(number of sub-branches) to every nonzero basis component of the
/// fine-grained state and sums per coarse condition. Throws
/// unequal_coefficients when the nonzero components differ in magnitude.
std::vector<Rational> counting_oracle(const FineGrainedState& fine, const Tolerances& tol = {});

struct Approximation {
  RationalWeights weights;
  std::vector<std::string> labels;   ///< every input condition, in order
  std::vector<double> targets;       ///< |ψᵅ|² after normalization
  std::vector<std::string> dropped;  ///< conditions that received mᵅ = 0
  double max_error = 0.0;            ///< max over all conditions of |mᵅ/M − |ψᵅ|²|
  std::int64_t max_denominator = 0;
};

/// Best counts over every M ≤ max_denominator, minimizing the max error.
/// Ties resolve to the smallest M. Amplitudes must be normalized to within
/// 1e-6; they are renormalized before squaring. Labels default to "1".."k".
Approximation rational_approximation(std::span<const double> amplitudes, std::int64_t max_denominator,
                                     std::vector<std::string> labels = {});

}  // namespace envuni
