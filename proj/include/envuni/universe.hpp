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
 * @file   universe.hpp
 * @brief  Systems as labeled projector families on the universe space.
 *
 * A system is characterized by a discrete set of conditions, each a projector
 * on the system's own factors. Condition "0" is always present and means the
 * system does not exist; for systems that always exist its projector is the
 * zero operator.
 */

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "envuni/hilbert.hpp"

namespace envuni {

/// Label of the mandatory non-existence condition.
inline constexpr std::string_view kNonexistence = "0";

class SystemSpec {
 public:
  /// `local` is the system's own space (usually a single factor). Projectors
  /// are given on `local`, one per condition, in condition order.
  SystemSpec(std::string name, CompositeSpace local, std::vector<std::string> conditions,
             std::vector<LinearOperator> projectors);

  /// Diagonal partition of a single factor: `cells[c]` lists the basis
  /// indices owned by condition c. Condition "0" is appended with an empty
  /// cell if it is not among `conditions`.
  static SystemSpec partition(std::string name, FactorSpace factor, std::vector<std::string> conditions,
                              std::vector<std::vector<std::size_t>> cells);

  /// One basis state per condition, in order: condition k owns basis index k.
  /// Condition "0" gets the zero projector unless listed.
  static SystemSpec pointer(std::string name, FactorSpace factor, std::vector<std::string> conditions);

  const std::string& name() const noexcept { return name_; }
  const CompositeSpace& local_space() const noexcept { return local_; }
  const std::vector<std::string>& conditions() const noexcept { return conditions_; }
  const std::vector<LinearOperator>& projectors() const noexcept { return projectors_; }
  std::vector<std::string> factor_labels() const { return local_.labels(); }

  std::optional<std::size_t> find(std::string_view condition) const;
  /// Index of a condition label; throws unknown_label.
  std::size_t index_of(std::string_view condition) const;
  const LinearOperator& projector(std::string_view condition) const { return projectors_[index_of(condition)]; }
  std::size_t rank(std::string_view condition) const;

 private:
  std::string name_;
  CompositeSpace local_;
  std::vector<std::string> conditions_;
  std::vector<LinearOperator> projectors_;
};

struct ValidationIssue {
  enum class Kind { not_projector, orthogonality, completeness, missing_nonexistence };
  Kind kind;
  std::string alpha;  ///< offending condition (first of the pair)
  std::string beta;   ///< second condition of an orthogonality pair, else empty
  double residual = 0.0;
};

std::string_view to_string(ValidationIssue::Kind kind);

struct ValidationReport {
  std::string system;
  std::vector<ValidationIssue> issues;
  double tolerance = 0.0;

  bool valid() const noexcept { return issues.empty(); }
};

/// Checks idempotence/Hermiticity, pairwise orthogonality ‖PᵅPᵝ − δPᵅ‖ and
/// completeness ‖ΣPᵅ − I‖ with the max-abs-entry norm. Never throws.
ValidationReport validate_family(const SystemSpec& sys, const Tolerances& tol = {});

/// Throws invalid_family with the first issue when the family is not valid.
void require_valid(const SystemSpec& sys, const Tolerances& tol = {});

struct ConditionAmplitude {
  std::string condition;
  double magnitude = 0.0;
  /// Pᵅψ / magnitude with canonical phase; empty when magnitude < branch tol.
  std::optional<StateVector> eigenstate;
};

ConditionAmplitude condition_amplitude(const StateVector& psi, const SystemSpec& sys, std::string_view alpha,
                                       const Tolerances& tol = {});

/// Pᵅψ with the system's projector applied in place on its factors.
StateVector project(const StateVector& psi, const SystemSpec& sys, std::string_view alpha);

}  // namespace envuni
