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

// Random inputs and independent reference computations for the tests.
// Oracles work on plain std::vector data with explicit index loops and do
// not call into the library code they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <doctest.h>

#include "envuni/hilbert.hpp"
#include "envuni/measurement.hpp"
#include "envuni/universe.hpp"

namespace envuni::testing {

using Rng = std::mt19937_64;
using CVec = std::vector<std::complex<double>>;

inline Complex gaussian_complex(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {n(rng), n(rng)};
}

inline Vector random_vector(Rng& rng, std::size_t d) {
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gaussian_complex(rng);
  return v / v.norm();
}

inline StateVector random_state(Rng& rng, const CompositeSpace& space) {
  return {space, random_vector(rng, space.total_dimension())};
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the phases
/// of R's diagonal divided out.
inline Matrix random_unitary(Rng& rng, std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = gaussian_complex(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex rjj = r(j, j);
    if (std::abs(rjj) > 0.0) q.col(j) *= rjj / std::abs(rjj);
  }
  return q;
}

/// Random amplitudes over k conditions, normalized, all magnitudes ≥ floor.
inline std::vector<Complex> random_amplitudes(Rng& rng, std::size_t k, double floor = 0.05) {
  std::vector<Complex> a(k);
  for (;;) {
    double n2 = 0.0;
    for (auto& x : a) {
      x = gaussian_complex(rng);
      n2 += std::norm(x);
    }
    bool ok = true;
    for (auto& x : a) {
      x /= std::sqrt(n2);
      ok = ok && std::abs(x) >= floor;
    }
    if (ok) return a;
  }
}

/// Labels "1".."k".
inline std::vector<std::string> labels(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= k; ++i) out.push_back(std::to_string(i));
  return out;
}

/// Family on one factor of dimension ≥ k: a random partition of the basis into
/// the k listed conditions (each nonempty) plus condition "0" (possibly
/// empty), rotated by a Haar unitary so projectors are not diagonal.
inline SystemSpec random_family(Rng& rng, const std::string& name, const std::string& factor, std::size_t k,
                                std::size_t dim) {
  std::vector<std::size_t> owner(dim);
  for (std::size_t i = 0; i < dim; ++i) owner[i] = i < k ? i + 1 : 0;  // 0 → condition "0"
  std::uniform_int_distribution<std::size_t> pick(0, k);
  for (std::size_t i = k; i < dim; ++i) owner[i] = pick(rng);
  std::shuffle(owner.begin(), owner.end(), rng);

  const Matrix u = random_unitary(rng, dim);
  const CompositeSpace local = CompositeSpace::single(factor, dim);
  std::vector<std::string> conditions{"0"};
  for (const auto& l : labels(k)) conditions.push_back(l);
  std::vector<LinearOperator> projectors;
  for (std::size_t c = 0; c <= k; ++c) {
    Matrix p = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i)
      if (owner[i] == c) p += u.col(static_cast<Eigen::Index>(i)) * u.col(static_cast<Eigen::Index>(i)).adjoint();
    projectors.emplace_back(local, std::move(p));
  }
  return SystemSpec(name, local, std::move(conditions), std::move(projectors));
}

/// Random three-party (or two-party) measurement scenario with rotated
/// families and random complex amplitudes.
inline MeasurementScenario random_scenario(Rng& rng, std::size_t k, bool with_apparatus) {
  std::uniform_int_distribution<std::size_t> extra(0, 2);
  MeasurementScenario sc{random_family(rng, "S", "s", k, k + extra(rng)), std::nullopt,
                         random_family(rng, "E", "e", k, k + extra(rng)), {}};
  if (with_apparatus) sc.apparatus = random_family(rng, "A", "a", k, k + extra(rng));
  const auto amps = random_amplitudes(rng, k);
  const auto ls = labels(k);
  for (std::size_t i = 0; i < k; ++i) sc.amplitudes.emplace_back(ls[i], amps[i]);
  return sc;
}

/// Runs fn and checks that it throws Error with the given code.
inline void check_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(to_string(e.code()) == to_string(code));
  }
}

// ------------------------------------------------------------------ oracles

/// Kronecker product by definition: (a⊗b)[i·|b| + j] = a[i]·b[j].
inline CVec kron(const CVec& a, const CVec& b) {
  CVec out;
  for (const auto& x : a)
    for (const auto& y : b) out.push_back(x * y);
  return out;
}

inline CVec to_cvec(const Vector& v) { return CVec(v.data(), v.data() + v.size()); }

/// Partial trace by decoding every pair of full indices into digits.
inline std::vector<CVec> naive_partial_trace(const std::vector<CVec>& rho, const std::vector<std::size_t>& dims,
                                             const std::vector<std::size_t>& keep) {
  const std::size_t n = rho.size();
  auto decode = [&](std::size_t idx) {
    std::vector<std::size_t> d(dims.size());
    for (std::size_t f = dims.size(); f-- > 0;) {
      d[f] = idx % dims[f];
      idx /= dims[f];
    }
    return d;
  };
  std::size_t sub = 1;
  for (auto k : keep) sub *= dims[k];
  std::vector<CVec> out(sub, CVec(sub, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto di = decode(i);
      const auto dj = decode(j);
      bool same_rest = true;
      for (std::size_t f = 0; f < dims.size(); ++f)
        if (std::find(keep.begin(), keep.end(), f) == keep.end() && di[f] != dj[f]) same_rest = false;
      if (!same_rest) continue;
      std::size_t si = 0, sj = 0;
      for (auto k : keep) {
        si = si * dims[k] + di[k];
        sj = sj * dims[k] + dj[k];
      }
      out[si][sj] += rho[i][j];
    }
  return out;
}

/// Binomial probabilities by the recursion p_n(k) = q·p_{n−1}(k−1) + (1−q)·p_{n−1}(k).
inline std::vector<double> pascal_binomial(std::size_t n, double q) {
  std::vector<double> row{1.0};
  for (std::size_t m = 1; m <= n; ++m) {
    std::vector<double> next(m + 1, 0.0);
    for (std::size_t k = 0; k <= m; ++k) {
      if (k > 0) next[k] += q * row[k - 1];
      if (k < m) next[k] += (1.0 - q) * row[k];
    }
    row = std::move(next);
  }
  return row;
}

/// Σ over all kⁿ outcome sequences of Π|ψ(mᵢ)|² · (count of target)/n.
inline double enumerated_frequency_expectation(const std::vector<double>& probs, std::size_t n, std::size_t target) {
  const std::size_t k = probs.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= k;
  double sum = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx, hits = 0;
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t m = rest % k;
      rest /= k;
      p *= probs[m];
      if (m == target) ++hits;
    }
    sum += p * static_cast<double>(hits) / static_cast<double>(n);
  }
  return sum;
}

/// Minimax error of the best counts over every composition of every M ≤ max_m.
inline double brute_force_best_error(const std::vector<double>& targets, std::int64_t max_m) {
  double best = 2.0;
  std::vector<std::int64_t> m(targets.size());
  for (std::int64_t total = 1; total <= max_m; ++total) {
    // Enumerate compositions of `total` into targets.size() nonnegative parts.
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t left) {
      if (i + 1 == targets.size()) {
        m[i] = left;
        double err = 0.0;
        for (std::size_t a = 0; a < targets.size(); ++a)
          err = std::max(err, std::abs(static_cast<double>(m[a]) / static_cast<double>(total) - targets[a]));
        best = std::min(best, err);
        return;
      }
      for (std::int64_t v = 0; v <= left; ++v) {
        m[i] = v;
        rec(i + 1, left - v);
      }
    };
    rec(0, total);
  }
  return best;
}

}  // namespace envuni::testing
