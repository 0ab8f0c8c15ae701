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

#include "envuni/histories.hpp"

#include <set>

namespace envuni {

UniverseModel::UniverseModel(std::vector<SystemSpec> systems, StateVector state, Tolerances tol)
    : systems_(std::move(systems)), state_(std::move(state)), tol_(tol) {
  if (systems_.empty()) throw Error(ErrorCode::invalid_argument, "model needs at least one system");
  std::set<std::string> names;
  std::set<std::string> factors;
  for (const auto& sys : systems_) {
    require_valid(sys, tol_);
    if (!names.insert(sys.name()).second)
      throw Error(ErrorCode::label_collision, "duplicate system name '" + sys.name() + "'");
    for (const auto& f : sys.local_space().factors()) {
      if (!factors.insert(f.label).second)
        throw Error(ErrorCode::label_collision, "factor '" + f.label + "' is shared by two systems");
      const auto pos = state_.space().find(f.label);
      if (!pos) throw Error(ErrorCode::space_mismatch, "factor '" + f.label + "' is not in the state space");
      if (state_.space().factors()[*pos].dimension != f.dimension)
        throw Error(ErrorCode::space_mismatch, "factor '" + f.label + "' has a different dimension in the state");
    }
  }
  if (!state_.is_normalized(tol_.norm))
    throw Error(ErrorCode::not_normalized, "model state has norm " + std::to_string(state_.norm()));
}

const SystemSpec& UniverseModel::system(std::size_t i) const {
  if (i >= systems_.size()) throw Error(ErrorCode::unknown_label, "unknown system index " + std::to_string(i));
  return systems_[i];
}

std::size_t UniverseModel::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < systems_.size(); ++i)
    if (systems_[i].name() == name) return i;
  throw Error(ErrorCode::unknown_label, "unknown system '" + std::string(name) + "'");
}

namespace {

struct HistoryWalk {
  const UniverseModel& model;
  double min_weight;
  std::size_t cap;
  std::vector<std::string> labels;
  std::vector<History> out;

  void visit(std::size_t depth, const StateVector& psi) {
    const double weight = psi.norm() * psi.norm();
    if (weight < min_weight) return;
    if (depth == model.size()) {
      if (out.size() == cap)
        throw Error(ErrorCode::cap_exceeded,
                    "more than " + std::to_string(cap) + " histories; raise min_weight to prune");
      out.push_back({labels, weight});
      return;
    }
    const SystemSpec& sys = model.system(depth);
    for (const auto& c : sys.conditions()) {
      labels.push_back(c);
      visit(depth + 1, project(psi, sys, c));
      labels.pop_back();
    }
  }
};

}  // namespace

std::vector<History> enumerate_histories(const UniverseModel& model, double min_weight, std::size_t cap) {
  if (min_weight < 0.0) throw Error(ErrorCode::invalid_argument, "min_weight must be non-negative");
  HistoryWalk walk{model, min_weight, cap, {}, {}};
  walk.visit(0, model.state());
  return std::move(walk.out);
}

CoarseState coarse_grain(std::shared_ptr<const UniverseModel> model, RecordSet records) {
  if (!model) throw Error(ErrorCode::invalid_argument, "null model");
  StateVector psi = model->state();
  for (const auto& [i, kappa] : records) psi = project(psi, model->system(i), kappa);
  const double norm = psi.norm();
  if (norm < model->tolerances().branch)
    throw Error(ErrorCode::zero_probability, "record set has zero probability");
  const double weight = norm * norm;
  return CoarseState(std::move(model), std::move(records), psi.scaled(1.0 / norm), weight);
}

DensityMatrix reduce(const CoarseState& coarse, std::size_t target) {
  const auto labels = coarse.model().system(target).factor_labels();
  return reduced_density(coarse.state(), labels);
}

namespace {

double condition_trace(const DensityMatrix& rho, const SystemSpec& sys, std::string_view kappa) {
  return rho.expectation(sys.projector(kappa)).real();
}

}  // namespace

RecordUpdate record_update(const CoarseState& coarse, std::size_t i, std::string_view kappa) {
  const SystemSpec& sys = coarse.model().system(i);
  if (coarse.records().contains(i))
    throw Error(ErrorCode::already_recorded, "system '" + sys.name() + "' is already recorded");
  sys.index_of(kappa);

  const StateVector projected = project(coarse.state(), sys, kappa);
  const double norm = projected.norm();
  if (norm < coarse.model().tolerances().branch)
    throw Error(ErrorCode::zero_probability,
                "record '" + std::string(kappa) + "' of '" + sys.name() + "' has zero probability");
  const double probability = norm * norm;

  RecordSet records = coarse.records();
  records.emplace(i, std::string(kappa));
  CoarseState next(coarse.model_ptr(), std::move(records), projected.scaled(1.0 / norm),
                   coarse.weight() * probability);

  const double before = condition_trace(reduce(coarse, i), sys, kappa);
  const double after = condition_trace(reduce(next, i), sys, kappa);
  return RecordUpdate{std::move(next), probability, before, after};
}

}  // namespace envuni
