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

#include "envuni/universe.hpp"

#include <algorithm>
#include <iterator>
#include <cmath>
#include <set>

namespace envuni {

SystemSpec::SystemSpec(std::string name, CompositeSpace local, std::vector<std::string> conditions,
                       std::vector<LinearOperator> projectors)
    : name_(std::move(name)),
      local_(std::move(local)),
      conditions_(std::move(conditions)),
      projectors_(std::move(projectors)) {
  if (name_.empty()) throw Error(ErrorCode::invalid_argument, "system name must be nonempty");
  if (conditions_.empty()) throw Error(ErrorCode::invalid_argument, "system '" + name_ + "' has no conditions");
  if (conditions_.size() != projectors_.size())
    throw Error(ErrorCode::invalid_argument, "system '" + name_ + "': one projector per condition required");
  std::set<std::string_view> seen;
  for (const auto& c : conditions_) {
    if (c.empty()) throw Error(ErrorCode::invalid_argument, "system '" + name_ + "': empty condition label");
    if (!seen.insert(c).second)
      throw Error(ErrorCode::label_collision, "system '" + name_ + "': duplicate condition '" + c + "'");
  }
  for (const auto& p : projectors_)
    if (p.space() != local_)
      throw Error(ErrorCode::space_mismatch, "system '" + name_ + "': projector is not on the system's space");
}

SystemSpec SystemSpec::partition(std::string name, FactorSpace factor, std::vector<std::string> conditions,
                                 std::vector<std::vector<std::size_t>> cells) {
  if (conditions.size() != cells.size())
    throw Error(ErrorCode::invalid_argument, "partition needs one cell per condition");
  if (std::find(conditions.begin(), conditions.end(), kNonexistence) == conditions.end()) {
    conditions.insert(conditions.begin(), std::string(kNonexistence));
    cells.insert(cells.begin(), std::vector<std::size_t>{});
  }
  CompositeSpace local({std::move(factor)});
  const auto d = static_cast<Eigen::Index>(local.total_dimension());
  std::vector<LinearOperator> projectors;
  projectors.reserve(cells.size());
  for (const auto& cell : cells) {
    Matrix p = Matrix::Zero(d, d);
    for (auto idx : cell) {
      if (idx >= local.total_dimension())
        throw Error(ErrorCode::invalid_argument, "partition index " + std::to_string(idx) + " out of range");
      p(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx)) = 1.0;
    }
    projectors.emplace_back(local, std::move(p));
  }
  return SystemSpec(std::move(name), std::move(local), std::move(conditions), std::move(projectors));
}

SystemSpec SystemSpec::pointer(std::string name, FactorSpace factor, std::vector<std::string> conditions) {
  std::vector<std::vector<std::size_t>> cells;
  cells.reserve(conditions.size());
  for (std::size_t k = 0; k < conditions.size(); ++k) cells.push_back({k});
  return partition(std::move(name), std::move(factor), std::move(conditions), std::move(cells));
}

std::optional<std::size_t> SystemSpec::find(std::string_view condition) const {
  for (std::size_t i = 0; i < conditions_.size(); ++i)
    if (conditions_[i] == condition) return i;
  return std::nullopt;
}

std::size_t SystemSpec::index_of(std::string_view condition) const {
  if (auto i = find(condition)) return *i;
  throw Error(ErrorCode::unknown_label,
              "system '" + name_ + "' has no condition '" + std::string(condition) + "'");
}

std::size_t SystemSpec::rank(std::string_view condition) const {
  // Projector rank equals its trace.
  return static_cast<std::size_t>(std::llround(projector(condition).matrix().trace().real()));
}

std::string_view to_string(ValidationIssue::Kind kind) {
  switch (kind) {
    case ValidationIssue::Kind::not_projector: return "not_projector";
    case ValidationIssue::Kind::orthogonality: return "orthogonality";
    case ValidationIssue::Kind::completeness: return "completeness";
    case ValidationIssue::Kind::missing_nonexistence: return "missing_nonexistence";
  }
  return "unknown";
}

namespace {

// Indices touched by a matrix (nonzero row or column) and the block on them.
// A matrix is the embedding of its block, so products and idempotence can be
// evaluated on blocks; families of sparse projectors stay cheap.
struct Support {
  std::vector<Eigen::Index> idx;
  Matrix block;
};

Support support_of(const Matrix& p) {
  Support s;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    if ((p.row(i).array() != Complex{}).any() || (p.col(i).array() != Complex{}).any()) s.idx.push_back(i);
  s.block = p(s.idx, s.idx);
  return s;
}

// max_abs(Pa Pb) from the two supports.
double product_residual(const Matrix& pa, const Support& a, const Matrix& pb, const Support& b) {
  std::vector<Eigen::Index> common;
  std::set_intersection(a.idx.begin(), a.idx.end(), b.idx.begin(), b.idx.end(), std::back_inserter(common));
  if (common.empty()) return 0.0;
  const Matrix left = pa(a.idx, common);
  const Matrix right = pb(common, b.idx);
  return max_abs(left * right);
}

}  // namespace

ValidationReport validate_family(const SystemSpec& sys, const Tolerances& tol) {
  ValidationReport report{sys.name(), {}, tol.op};
  using Kind = ValidationIssue::Kind;
  if (!sys.find(kNonexistence)) report.issues.push_back({Kind::missing_nonexistence, std::string(kNonexistence), {}, 1.0});

  const auto& ps = sys.projectors();
  const auto& cs = sys.conditions();
  std::vector<Support> supports;
  supports.reserve(ps.size());
  for (std::size_t a = 0; a < ps.size(); ++a) {
    supports.push_back(support_of(ps[a].matrix()));
    const Matrix& q = supports.back().block;
    const double idem = q.size() == 0 ? 0.0 : max_abs(q * q - q);
    const double herm = max_abs(ps[a].matrix().adjoint() - ps[a].matrix());
    if (std::max(idem, herm) > tol.op) report.issues.push_back({Kind::not_projector, cs[a], {}, std::max(idem, herm)});
  }
  for (std::size_t a = 0; a < ps.size(); ++a)
    for (std::size_t b = a + 1; b < ps.size(); ++b) {
      const double r = product_residual(ps[a].matrix(), supports[a], ps[b].matrix(), supports[b]);
      if (r > tol.op) report.issues.push_back({Kind::orthogonality, cs[a], cs[b], r});
    }
  const auto d = static_cast<Eigen::Index>(sys.local_space().total_dimension());
  Matrix sum = -Matrix::Identity(d, d);
  for (const auto& p : ps) sum += p.matrix();
  if (const double r = max_abs(sum); r > tol.op) report.issues.push_back({Kind::completeness, {}, {}, r});
  return report;
}

void require_valid(const SystemSpec& sys, const Tolerances& tol) {
  const auto report = validate_family(sys, tol);
  if (report.valid()) return;
  const auto& first = report.issues.front();
  std::string msg = "system '" + sys.name() + "' fails " + std::string(to_string(first.kind));
  if (!first.alpha.empty()) msg += " at " + first.alpha + (first.beta.empty() ? "" : "," + first.beta);
  msg += " (residual " + std::to_string(first.residual) + ")";
  throw Error(ErrorCode::invalid_family, msg);
}

StateVector project(const StateVector& psi, const SystemSpec& sys, std::string_view alpha) {
  return apply_local(sys.projector(alpha), psi);
}

ConditionAmplitude condition_amplitude(const StateVector& psi, const SystemSpec& sys, std::string_view alpha,
                                       const Tolerances& tol) {
  require_valid(sys, tol);
  const StateVector projected = project(psi, sys, alpha);
  ConditionAmplitude out{std::string(alpha), projected.norm(), std::nullopt};
  if (out.magnitude >= tol.branch)
    out.eigenstate = StateVector(psi.space(), canonical_phase(projected.amplitudes() / out.magnitude, tol.branch));
  return out;
}

}  // namespace envuni
