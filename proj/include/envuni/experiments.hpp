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
 * @file   experiments.hpp
 * @brief  Statistics of n independent repetitions of one experiment.
 *
 * The n-run universe state is Σ ψ(m₁)···ψ(mₙ) |m₁…mₙ⟩. Everything except
 * explicit_product_state() works in the product probability measure instead
 * of materializing that tensor.
 *
 * Sampling uses std::mt19937_64 (its algorithm is fixed by the C++ standard).
 * Runs are cut into chunks of kSampleChunk; chunk c draws from a generator
 * seeded with splitmix64(seed + c), and a uniform double is (x >> 11)·2⁻⁵³.
 * The sequence for a seed is therefore the same however many workers run.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "envuni/hilbert.hpp"
#include "envuni/universe.hpp"

namespace envuni {

inline constexpr std::int64_t kSampleChunk = 65536;
inline constexpr std::int64_t kDistributionCap = 1'000'000;
/// Above this n binomial coefficients are evaluated in log space.
inline constexpr std::int64_t kExactBinomialMax = 60;

struct ExperimentDesign {
  std::vector<std::string> outcomes;
  std::vector<Complex> amplitudes;  ///< ψ(m) per outcome
  std::int64_t runs = 1;
  std::uint64_t seed = 0;
};

/// Throws on n < 1, label/amplitude mismatch, duplicate labels, or Σ|ψ|² ≠ 1.
void validate(const ExperimentDesign& design, const Tolerances& tol = {});

std::size_t outcome_index(const ExperimentDesign& design, std::string_view ell);

struct OutcomeSequence {
  std::vector<std::string> outcomes;  ///< label alphabet
  std::vector<std::uint32_t> results; ///< index into outcomes, one per run
  std::uint64_t seed = 0;
};

double relative_frequency(const OutcomeSequence& seq, std::string_view ell);

/// ⟨F_ℓ⟩ = |ψ(ℓ)|², independent of n.
double frequency_expectation(const ExperimentDesign& design, std::string_view ell);

struct DistributionPoint {
  std::int64_t count = 0;  ///< n·f
  double f = 0.0;
  double p = 0.0;
};

/// Binomial law of the relative frequency of ℓ: p(f) = C(n, nf) qⁿᶠ (1−q)ⁿ⁽¹⁻ᶠ⁾.
std::vector<DistributionPoint> frequency_distribution(const ExperimentDesign& design, std::string_view ell);

struct ConcentrationReport {
  std::int64_t n = 0;
  double q = 0.0;
  double std_dev = 0.0;      ///< √(q(1−q)/n)
  double band_low = 0.0;     ///< q − 3σ
  double band_high = 0.0;    ///< q + 3σ
  double mass_within = 0.0;  ///< distribution mass inside the band
  double maverick_mass = 0.0;
  bool regime = false;       ///< n ≥ 100, where the 99% requirement applies
  bool pass = true;
};

ConcentrationReport concentration_check(const ExperimentDesign& design, std::string_view ell);

std::uint64_t splitmix64(std::uint64_t x);

OutcomeSequence sample_runs(const ExperimentDesign& design);

/// Per-outcome counts of sample_runs(design), computed on `workers` threads.
std::vector<std::int64_t> sample_counts(const ExperimentDesign& design, unsigned workers = 1);

/// Π |ψ(mᵢ)|² for one outcome sequence.
double sequence_probability(const ExperimentDesign& design, std::span<const std::uint32_t> sequence);

/// Product-measure probabilities of every sequence, in the basis order of
/// explicit_product_state(). Limited by the dimension cap.
std::vector<double> product_measure(const ExperimentDesign& design);

/// Explicit n-run tensor state over factors "run1".."runN". Throws
/// dimension_cap when outcomes^n exceeds the cap.
StateVector explicit_product_state(const ExperimentDesign& design);

/// Pointer system per run factor, conditions = outcome labels.
std::vector<SystemSpec> run_systems(const ExperimentDesign& design);

struct FrequencyReport {
  std::string target;
  std::int64_t runs = 0;
  std::uint64_t seed = 0;
  double observed_f = 0.0;
  double expected_f = 0.0;
  double z_score = 0.0;
  std::vector<DistributionPoint> distribution;
  ConcentrationReport concentration;
};

/// Samples the runs and sets the observed frequency against the analytic law.
FrequencyReport frequency_report(const ExperimentDesign& design, std::string_view ell, unsigned workers = 1);

}  // namespace envuni
