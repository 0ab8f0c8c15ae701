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

#include "envuni/born.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

namespace envuni {

RationalWeights::RationalWeights(std::vector<std::string> labels, std::vector<std::int64_t> counts)
    : labels_(std::move(labels)), counts_(std::move(counts)) {
  if (counts_.empty()) throw Error(ErrorCode::invalid_argument, "weights need at least one condition");
  if (labels_.size() != counts_.size()) throw Error(ErrorCode::invalid_argument, "one label per count required");
  std::set<std::string_view> seen;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] < 1) throw Error(ErrorCode::invalid_argument, "count for '" + labels_[i] + "' must be at least 1");
    if (!seen.insert(labels_[i]).second) throw Error(ErrorCode::label_collision, "duplicate weight label '" + labels_[i] + "'");
    total_ += counts_[i];
  }
}

RationalWeights RationalWeights::parse(std::string_view text) {
  std::vector<std::string> labels;
  std::vector<std::int64_t> counts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(':', start), text.size());
    const std::string_view token = text.substr(start, end - start);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size())
      throw Error(ErrorCode::invalid_argument, "bad weight '" + std::string(token) + "' in '" + std::string(text) + "'");
    counts.push_back(value);
    labels.push_back(std::to_string(counts.size()));
    start = end + 1;
  }
  return {std::move(labels), std::move(counts)};
}

std::vector<Rational> born_probabilities(const RationalWeights& weights) {
  std::vector<Rational> out;
  out.reserve(weights.size());
  for (auto m : weights.counts()) out.emplace_back(m, weights.total());
  return out;
}

namespace {

std::string fine_label(const std::string& alpha, std::int64_t beta) { return alpha + "." + std::to_string(beta); }

}  // namespace

FineGrainedState fine_grain(const RationalWeights& weights, const MeasurementScenario& scenario, const Tolerances& tol) {
  const auto k = weights.size();
  const auto total = weights.total();
  const auto m_total = static_cast<std::size_t>(total);

  // Match scenario amplitudes against the weights.
  std::vector<Complex> phases(k, Complex{1.0, 0.0});
  std::set<std::string> matched;
  for (std::size_t a = 0; a < k; ++a) {
    const auto& label = weights.labels()[a];
    Complex amp{};
    for (const auto& [l, v] : scenario.amplitudes)
      if (l == label) amp = v;
    const double expected = static_cast<double>(weights.counts()[a]) / static_cast<double>(total);
    if (std::abs(std::norm(amp) - expected) > tol.approx)
      throw Error(ErrorCode::weight_mismatch, "|psi|^2 of '" + label + "' is " + std::to_string(std::norm(amp)) +
                                                  ", weights give " + std::to_string(expected));
    if (std::abs(amp) > 0.0) phases[a] = amp / std::abs(amp);
    matched.insert(label);
  }
  for (const auto& [l, v] : scenario.amplitudes)
    if (std::abs(v) >= tol.branch && !matched.contains(l))
      throw Error(ErrorCode::weight_mismatch, "scenario condition '" + l + "' has no weight");

  const FactorSpace fs{"s", k};
  const FactorSpace fe{"e", m_total};
  const FactorSpace fc{"c", m_total};
  const CompositeSpace space({fs, fe, fc});

  std::vector<std::vector<std::size_t>> coarse_cells(k);
  std::vector<std::string> fine_labels;
  std::vector<std::size_t> owner;  // sub-branch index -> coarse condition index
  for (std::size_t a = 0; a < k; ++a)
    for (std::int64_t b = 1; b <= weights.counts()[a]; ++b) {
      coarse_cells[a].push_back(fine_labels.size());
      fine_labels.push_back(fine_label(weights.labels()[a], b));
      owner.push_back(a);
    }

  const std::string sys_name = scenario.system.name();
  const std::string env_name = scenario.environment.name();
  SystemSpec system = SystemSpec::pointer(sys_name, fs, weights.labels());
  SystemSpec environment = SystemSpec::partition(env_name, fe, weights.labels(), coarse_cells);
  SystemSpec ancilla = SystemSpec::pointer("C", fc, fine_labels);
  SystemSpec fine_environment = SystemSpec::pointer(env_name, fe, fine_labels);

  // S⊗C: |sᵅ c^{αβ}⟩ for each sub-branch, remainder to condition "0".
  const CompositeSpace sc({fs, fc});
  const auto dsc = static_cast<Eigen::Index>(sc.total_dimension());
  std::vector<std::string> sc_conditions{std::string(kNonexistence)};
  std::vector<LinearOperator> sc_projectors;
  Matrix remainder = Matrix::Identity(dsc, dsc);
  for (std::size_t j = 0; j < m_total; ++j) {
    const std::size_t digits[] = {owner[j], j};
    const auto idx = static_cast<Eigen::Index>(sc.index(digits));
    Matrix p = Matrix::Zero(dsc, dsc);
    p(idx, idx) = 1.0;
    remainder(idx, idx) = 0.0;
    sc_conditions.push_back(fine_labels[j]);
    sc_projectors.emplace_back(sc, std::move(p));
  }
  sc_projectors.insert(sc_projectors.begin(), LinearOperator(sc, std::move(remainder)));
  SystemSpec fine_system(sys_name + "C", sc, std::move(sc_conditions), std::move(sc_projectors));

  const double coefficient = 1.0 / std::sqrt(static_cast<double>(total));
  Vector amplitudes = Vector::Zero(static_cast<Eigen::Index>(space.total_dimension()));
  std::vector<FineBranch> branches;
  for (std::size_t j = 0; j < m_total; ++j) {
    const std::size_t digits[] = {owner[j], j, j};
    const Complex c = coefficient * phases[owner[j]];
    amplitudes(static_cast<Eigen::Index>(space.index(digits))) = c;
    branches.push_back({fine_labels[j], weights.labels()[owner[j]], c});
  }
  StateVector state(space, std::move(amplitudes));
  BranchDecomposition base = decompose_branches(state, environment, system, tol);

  return FineGrainedState{weights,
                          std::move(state),
                          std::move(system),
                          std::move(environment),
                          std::move(ancilla),
                          std::move(fine_system),
                          std::move(fine_environment),
                          std::move(base),
                          std::move(branches)};
}

FineGrainedState fine_grain(const RationalWeights& weights, const Tolerances& tol) {
  std::vector<Complex> amps;
  for (auto m : weights.counts())
    amps.emplace_back(std::sqrt(static_cast<double>(m) / static_cast<double>(weights.total())), 0.0);
  const auto scenario = make_pointer_scenario(weights.labels(), amps, false);
  return fine_grain(weights, scenario, tol);
}

double equal_coefficient_residual(const FineGrainedState& fine) {
  const double expected = 1.0 / std::sqrt(static_cast<double>(fine.weights.total()));
  double worst = 0.0;
  for (const auto& b : fine.fine_branches) worst = std::max(worst, std::abs(std::abs(b.coefficient) - expected));
  return worst;
}

std::vector<Rational> counting_oracle(const FineGrainedState& fine, const Tolerances& tol) {
  const Vector& amps = fine.state.amplitudes();
  std::int64_t count = 0;
  double reference = -1.0;
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    const double mag = std::abs(amps(i));
    if (mag < tol.branch) continue;
    if (reference < 0.0) reference = mag;
    if (std::abs(mag - reference) > tol.op)
      throw Error(ErrorCode::unequal_coefficients, "fine-grained coefficients differ in magnitude");
    ++count;
  }
  if (count == 0) throw Error(ErrorCode::unequal_coefficients, "fine-grained state has no branches");

  // Each sub-branch is equally likely; a coarse condition owns the sub-branches
  // its projector keeps.
  std::vector<Rational> out;
  for (const auto& label : fine.weights.labels()) {
    const Vector kept = project(fine.state, fine.system, label).amplitudes();
    std::int64_t owned = 0;
    for (Eigen::Index i = 0; i < kept.size(); ++i)
      if (std::abs(kept(i)) >= tol.branch) ++owned;
    out.emplace_back(owned, count);
  }
  return out;
}

Approximation rational_approximation(std::span<const double> amplitudes, std::int64_t max_denominator,
                                     std::vector<std::string> labels) {
  if (max_denominator < 1) throw Error(ErrorCode::invalid_argument, "max denominator must be at least 1");
  if (amplitudes.empty()) throw Error(ErrorCode::invalid_argument, "no amplitudes given");
  const std::size_t k = amplitudes.size();
  if (labels.empty())
    for (std::size_t a = 0; a < k; ++a) labels.push_back(std::to_string(a + 1));
  if (labels.size() != k) throw Error(ErrorCode::invalid_argument, "one label per amplitude required");

  double norm2 = 0.0;
  for (double a : amplitudes) norm2 += a * a;
  if (norm2 == 0.0) throw Error(ErrorCode::invalid_argument, "degenerate input: all amplitudes are zero");
  if (std::abs(norm2 - 1.0) > 1e-6)
    throw Error(ErrorCode::not_normalized, "amplitudes have squared norm " + std::to_string(norm2));
  std::vector<double> target(k);
  for (std::size_t a = 0; a < k; ++a) target[a] = amplitudes[a] * amplitudes[a] / norm2;

  std::vector<std::int64_t> best(k, 0);
  double best_error = 2.0;
  std::vector<std::int64_t> m(k);
  std::vector<double> frac(k);
  std::vector<std::size_t> order(k);
  for (std::int64_t denom = 1; denom <= max_denominator; ++denom) {
    // Largest-remainder apportionment is minimax-optimal for a fixed denominator.
    std::int64_t assigned = 0;
    for (std::size_t a = 0; a < k; ++a) {
      const double x = target[a] * static_cast<double>(denom);
      m[a] = static_cast<std::int64_t>(std::floor(x));
      frac[a] = x - static_cast<double>(m[a]);
      assigned += m[a];
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return frac[x] > frac[y]; });
    for (std::int64_t r = 0; r < denom - assigned && r < static_cast<std::int64_t>(k); ++r) ++m[order[r]];

    double error = 0.0;
    for (std::size_t a = 0; a < k; ++a)
      error = std::max(error, std::abs(static_cast<double>(m[a]) / static_cast<double>(denom) - target[a]));
    if (error < best_error - 1e-15) {
      best_error = error;
      best = m;
    }
  }

  std::int64_t g = 0;
  for (auto v : best) g = std::gcd(g, v);
  std::vector<std::string> kept_labels;
  std::vector<std::int64_t> kept_counts;
  std::vector<std::string> dropped;
  for (std::size_t a = 0; a < k; ++a) {
    if (best[a] == 0) {
      dropped.push_back(labels[a]);
      continue;
    }
    kept_labels.push_back(labels[a]);
    kept_counts.push_back(best[a] / g);
  }
  return Approximation{RationalWeights(std::move(kept_labels), std::move(kept_counts)),
                       std::move(labels),
                       std::move(target),
                       std::move(dropped),
                       best_error,
                       max_denominator};
}

}  // namespace envuni
