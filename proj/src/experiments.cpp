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

#include "envuni/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <thread>

namespace envuni {

void validate(const ExperimentDesign& design, const Tolerances& tol) {
  if (design.runs < 1) throw Error(ErrorCode::invalid_argument, "runs must be at least 1");
  if (design.outcomes.empty()) throw Error(ErrorCode::invalid_argument, "design needs at least one outcome");
  if (design.outcomes.size() != design.amplitudes.size())
    throw Error(ErrorCode::invalid_argument, "one amplitude per outcome required");
  std::set<std::string_view> seen;
  double total = 0.0;
  for (std::size_t i = 0; i < design.outcomes.size(); ++i) {
    if (!seen.insert(design.outcomes[i]).second)
      throw Error(ErrorCode::label_collision, "duplicate outcome '" + design.outcomes[i] + "'");
    total += std::norm(design.amplitudes[i]);
  }
  if (std::abs(total - 1.0) > tol.norm)
    throw Error(ErrorCode::not_normalized, "outcome amplitudes have squared norm " + std::to_string(total));
}

std::size_t outcome_index(const ExperimentDesign& design, std::string_view ell) {
  for (std::size_t i = 0; i < design.outcomes.size(); ++i)
    if (design.outcomes[i] == ell) return i;
  throw Error(ErrorCode::unknown_label, "unknown outcome '" + std::string(ell) + "'");
}

double relative_frequency(const OutcomeSequence& seq, std::string_view ell) {
  if (seq.results.empty()) throw Error(ErrorCode::invalid_argument, "relative frequency of an empty sequence");
  const auto it = std::find(seq.outcomes.begin(), seq.outcomes.end(), ell);
  if (it == seq.outcomes.end()) throw Error(ErrorCode::unknown_label, "unknown outcome '" + std::string(ell) + "'");
  const auto target = static_cast<std::uint32_t>(it - seq.outcomes.begin());
  const auto hits = std::count(seq.results.begin(), seq.results.end(), target);
  return static_cast<double>(hits) / static_cast<double>(seq.results.size());
}

double frequency_expectation(const ExperimentDesign& design, std::string_view ell) {
  validate(design);
  return std::norm(design.amplitudes[outcome_index(design, ell)]);
}

std::vector<DistributionPoint> frequency_distribution(const ExperimentDesign& design, std::string_view ell) {
  validate(design);
  const std::int64_t n = design.runs;
  if (n > kDistributionCap)
    throw Error(ErrorCode::cap_exceeded, "runs " + std::to_string(n) + " exceed the distribution cap " +
                                             std::to_string(kDistributionCap));
  const double q = std::clamp(std::norm(design.amplitudes[outcome_index(design, ell)]), 0.0, 1.0);
  const double dn = static_cast<double>(n);

  std::vector<DistributionPoint> out(static_cast<std::size_t>(n) + 1);
  if (n <= kExactBinomialMax) {
    std::uint64_t binom = 1;  // C(n, k), exact for n ≤ 60
    for (std::int64_t k = 0; k <= n; ++k) {
      // C(n,k−1)·(n−k+1) stays below 2⁶³ for n ≤ 60.
      if (k > 0) binom = binom * static_cast<std::uint64_t>(n - k + 1) / static_cast<std::uint64_t>(k);
      const double p = static_cast<double>(binom) * std::pow(q, static_cast<double>(k)) *
                       std::pow(1.0 - q, static_cast<double>(n - k));
      out[static_cast<std::size_t>(k)] = {k, static_cast<double>(k) / dn, p};
    }
    return out;
  }
  const double log_q = std::log(q);
  const double log_r = std::log1p(-q);
  const double log_n_fact = std::lgamma(dn + 1.0);
  for (std::int64_t k = 0; k <= n; ++k) {
    const double dk = static_cast<double>(k);
    double p = 0.0;
    if (q == 0.0) {
      p = k == 0 ? 1.0 : 0.0;
    } else if (q == 1.0) {
      p = k == n ? 1.0 : 0.0;
    } else {
      p = std::exp(log_n_fact - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0) + dk * log_q + (dn - dk) * log_r);
    }
    out[static_cast<std::size_t>(k)] = {k, dk / dn, p};
  }
  return out;
}

ConcentrationReport concentration_check(const ExperimentDesign& design, std::string_view ell) {
  if (design.runs < 2) throw Error(ErrorCode::invalid_argument, "concentration needs at least 2 runs");
  const auto dist = frequency_distribution(design, ell);
  ConcentrationReport r;
  r.n = design.runs;
  r.q = std::clamp(std::norm(design.amplitudes[outcome_index(design, ell)]), 0.0, 1.0);
  r.std_dev = std::sqrt(r.q * (1.0 - r.q) / static_cast<double>(r.n));
  r.band_low = r.q - 3.0 * r.std_dev;
  r.band_high = r.q + 3.0 * r.std_dev;
  // Slack for f = k/n landing on the band edge after rounding.
  constexpr double kEdge = 1e-12;
  for (const auto& pt : dist)
    if (pt.f >= r.band_low - kEdge && pt.f <= r.band_high + kEdge) r.mass_within += pt.p;
  r.mass_within = std::min(r.mass_within, 1.0);
  r.maverick_mass = std::max(0.0, 1.0 - r.mass_within);
  r.regime = r.n >= 100;
  r.pass = !r.regime || r.mass_within >= 0.99;
  return r;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

// Cumulative distribution with the last positive-probability outcome pinned
// to 1 so rounding can never select a zero-probability outcome.
std::vector<double> cumulative(const ExperimentDesign& design) {
  std::vector<double> cdf(design.amplitudes.size());
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    const double p = std::norm(design.amplitudes[i]);
    if (p > 0.0) last_positive = i;
    acc += p;
    cdf[i] = acc;
  }
  for (std::size_t i = last_positive; i < cdf.size(); ++i) cdf[i] = 1.0;
  return cdf;
}

template <typename Sink>
void draw_chunk(const std::vector<double>& cdf, std::uint64_t seed, std::int64_t chunk, std::int64_t count,
                Sink&& sink) {
  std::mt19937_64 gen(splitmix64(seed + static_cast<std::uint64_t>(chunk)));
  for (std::int64_t i = 0; i < count; ++i) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    const auto idx = static_cast<std::uint32_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    sink(idx);
  }
}

}  // namespace

OutcomeSequence sample_runs(const ExperimentDesign& design) {
  validate(design);
  const auto cdf = cumulative(design);
  OutcomeSequence seq{design.outcomes, {}, design.seed};
  seq.results.reserve(static_cast<std::size_t>(design.runs));
  for (std::int64_t start = 0, chunk = 0; start < design.runs; start += kSampleChunk, ++chunk)
    draw_chunk(cdf, design.seed, chunk, std::min(kSampleChunk, design.runs - start),
               [&](std::uint32_t idx) { seq.results.push_back(idx); });
  return seq;
}

std::vector<std::int64_t> sample_counts(const ExperimentDesign& design, unsigned workers) {
  validate(design);
  const auto cdf = cumulative(design);
  const std::int64_t chunks = (design.runs + kSampleChunk - 1) / kSampleChunk;
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(chunks)));
  std::vector<std::vector<std::int64_t>> partial(workers, std::vector<std::int64_t>(cdf.size(), 0));
  auto work = [&](unsigned w) {
    for (std::int64_t chunk = w; chunk < chunks; chunk += workers) {
      const std::int64_t start = chunk * kSampleChunk;
      draw_chunk(cdf, design.seed, chunk, std::min(kSampleChunk, design.runs - start),
                 [&](std::uint32_t idx) { ++partial[w][idx]; });
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work, w);
    work(0);
  }
  std::vector<std::int64_t> counts(cdf.size(), 0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += p[i];
  return counts;
}

double sequence_probability(const ExperimentDesign& design, std::span<const std::uint32_t> sequence) {
  double p = 1.0;
  for (auto m : sequence) {
    if (m >= design.amplitudes.size()) throw Error(ErrorCode::invalid_argument, "outcome index out of range");
    p *= std::norm(design.amplitudes[m]);
  }
  return p;
}

namespace {

std::size_t checked_power(std::size_t base, std::int64_t exponent) {
  const std::size_t cap = dimension_cap();
  std::size_t total = 1;
  for (std::int64_t i = 0; i < exponent; ++i) {
    if (total > cap / base)
      throw Error(ErrorCode::dimension_cap, std::to_string(base) + "^" + std::to_string(exponent) +
                                                " branches exceed the dimension cap " + std::to_string(cap));
    total *= base;
  }
  return total;
}

}  // namespace

std::vector<double> product_measure(const ExperimentDesign& design) {
  validate(design);
  const std::size_t k = design.outcomes.size();
  const std::size_t total = checked_power(k, design.runs);
  std::vector<double> out(total);
  std::vector<std::uint32_t> seq(static_cast<std::size_t>(design.runs), 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (std::size_t i = seq.size(); i-- > 0;) {
      seq[i] = static_cast<std::uint32_t>(rest % k);
      rest /= k;
    }
    out[idx] = sequence_probability(design, seq);
  }
  return out;
}

StateVector explicit_product_state(const ExperimentDesign& design) {
  validate(design);
  const std::size_t k = design.outcomes.size();
  checked_power(k, design.runs);
  const CompositeSpace single = CompositeSpace::single("run1", k);
  Vector one(static_cast<Eigen::Index>(k));
  for (std::size_t m = 0; m < k; ++m) one(static_cast<Eigen::Index>(m)) = design.amplitudes[m];
  StateVector state(single, one);
  for (std::int64_t i = 2; i <= design.runs; ++i)
    state = tensor(state, StateVector(CompositeSpace::single("run" + std::to_string(i), k), one));
  return state;
}

std::vector<SystemSpec> run_systems(const ExperimentDesign& design) {
  validate(design);
  std::vector<SystemSpec> out;
  for (std::int64_t i = 1; i <= design.runs; ++i)
    out.push_back(SystemSpec::pointer("S" + std::to_string(i), {"run" + std::to_string(i), design.outcomes.size()},
                                      design.outcomes));
  return out;
}

FrequencyReport frequency_report(const ExperimentDesign& design, std::string_view ell, unsigned workers) {
  FrequencyReport r;
  r.target = std::string(ell);
  r.runs = design.runs;
  r.seed = design.seed;
  r.expected_f = frequency_expectation(design, ell);
  const auto counts = sample_counts(design, workers);
  r.observed_f = static_cast<double>(counts[outcome_index(design, ell)]) / static_cast<double>(design.runs);
  r.distribution = frequency_distribution(design, ell);
  if (design.runs >= 2) {
    r.concentration = concentration_check(design, ell);
  } else {
    r.concentration.n = design.runs;
    r.concentration.q = r.expected_f;
    r.concentration.std_dev = std::sqrt(r.expected_f * (1.0 - r.expected_f));
  }
  const double sd = r.concentration.std_dev;
  const double diff = r.observed_f - r.expected_f;
  r.z_score = sd > 0.0 ? diff / sd : (diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff));
  return r;
}

}  // namespace envuni
