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
 * @file   histories.hpp
 * @brief  Joint record histories, coarse-graining by known records, and record updates.
 *
 * A history assigns one condition to every configured system; its weight is
 * ‖(Πᵢ Pᵢ^{αᵢ}) Ψ‖². Knowing a subset K of the records selects the coarse
 * state Ψ_K = (Π_{i∈K} Pᵢ^{κᵢ}) Ψ / norm. Learning one more record is a
 * projection plus renormalization of Ψ_K; the reduced state of the recorded
 * system becomes an eigenstate of the recorded condition.
 *
 * Systems must sit on disjoint factors, so all record projectors commute and
 * the order in which records are learned does not matter.
 */

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "envuni/hilbert.hpp"
#include "envuni/universe.hpp"

namespace envuni {

inline constexpr std::size_t kHistoryCap = 100'000;

class UniverseModel {
 public:
  /// Validates every family, requires disjoint factors present in the state
  /// space, and a normalized state.
  UniverseModel(std::vector<SystemSpec> systems, StateVector state, Tolerances tol = {});

  const std::vector<SystemSpec>& systems() const noexcept { return systems_; }
  const StateVector& state() const noexcept { return state_; }
  const Tolerances& tolerances() const noexcept { return tol_; }
  std::size_t size() const noexcept { return systems_.size(); }

  /// Throws unknown_label on an out-of-range index.
  const SystemSpec& system(std::size_t i) const;
  /// Index of a system by name; throws unknown_label.
  std::size_t index_of(std::string_view name) const;

 private:
  std::vector<SystemSpec> systems_;
  StateVector state_;
  Tolerances tol_;
};

/// System index → recorded condition.
using RecordSet = std::map<std::size_t, std::string>;

struct History {
  std::vector<std::string> labels;  ///< one condition per system, in system order
  double weight = 0.0;
};

/// Every history with weight ≥ min_weight, depth-first in system and
/// condition order. Partial histories below min_weight are pruned, which is
/// sound because adding a projector never raises the weight. Throws
/// cap_exceeded when more than `cap` histories would be produced.
std::vector<History> enumerate_histories(const UniverseModel& model, double min_weight,
                                         std::size_t cap = kHistoryCap);

class CoarseState {
 public:
  CoarseState(std::shared_ptr<const UniverseModel> model, RecordSet records, StateVector state, double weight)
      : model_(std::move(model)), records_(std::move(records)), state_(std::move(state)), weight_(weight) {}

  const UniverseModel& model() const noexcept { return *model_; }
  const std::shared_ptr<const UniverseModel>& model_ptr() const noexcept { return model_; }
  const RecordSet& records() const noexcept { return records_; }
  /// Ψ_K, normalized.
  const StateVector& state() const noexcept { return state_; }
  /// ‖(Π_{i∈K} Pᵢ^{κᵢ}) Ψ‖², the weight of the known record set.
  double weight() const noexcept { return weight_; }

 private:
  std::shared_ptr<const UniverseModel> model_;
  RecordSet records_;
  StateVector state_;
  double weight_;
};

/// Throws unknown_label for unknown systems or conditions, zero_probability
/// when the joint projection vanishes.
CoarseState coarse_grain(std::shared_ptr<const UniverseModel> model, RecordSet records);

/// Reduced state of one system: partial trace over every other factor.
DensityMatrix reduce(const CoarseState& coarse, std::size_t target);

struct RecordUpdate {
  CoarseState next;
  double probability = 0.0;   ///< ‖P^κ Ψ_K‖²
  double trace_before = 0.0;  ///< Tr(ρ P^κ) on the pre-update reduced state
  double trace_after = 0.0;   ///< Tr(ρ' P^κ) on the post-update reduced state
};

/// Throws already_recorded when i ∈ K, zero_probability when P^κ Ψ_K vanishes.
RecordUpdate record_update(const CoarseState& coarse, std::size_t i, std::string_view kappa);

}  // namespace envuni
