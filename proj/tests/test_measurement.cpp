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

#include <doctest.h>

#include "envuni/measurement.hpp"
#include "support.hpp"

using namespace envuni;
using namespace envuni::testing;

namespace {

const double kHalf = 1.0 / std::sqrt(2.0);

std::size_t idx(const CompositeSpace& space, std::initializer_list<std::size_t> digits) {
  const std::vector<std::size_t> d(digits);
  return space.index(d);
}

}  // namespace

TEST_CASE("equal two-condition scenario builds the GHZ-type state") {
  const auto sc = make_pointer_scenario({"1", "2"}, {kHalf, kHalf});
  const auto psi = build_measurement_state(sc);
  const auto& space = psi.space();
  CHECK(space.labels() == std::vector<std::string>{"e", "a", "s"});
  Vector expected = Vector::Zero(8);
  expected(static_cast<Eigen::Index>(idx(space, {0, 0, 0}))) = kHalf;
  expected(static_cast<Eigen::Index>(idx(space, {1, 1, 1}))) = kHalf;
  CHECK((psi.amplitudes() - expected).norm() < 1e-15);
}

TEST_CASE("single condition gives a product state") {
  const auto sc = make_pointer_scenario({"1"}, {1.0});
  const auto psi = build_measurement_state(sc);
  CHECK(psi.dimension() == 1);
  CHECK(std::abs(psi[0] - Complex(1.0)) < 1e-15);
}

TEST_CASE("one-third/two-thirds scenario passes every correlation check") {
  const auto sc = make_pointer_scenario({"1", "2"}, {std::sqrt(1.0 / 3.0), std::sqrt(2.0 / 3.0)});
  const auto psi = build_measurement_state(sc);
  CHECK(verify_correlation(psi, sc.environment, *sc.apparatus).max_residual < 1e-12);
  CHECK(verify_correlation(psi, *sc.apparatus, sc.system).max_residual < 1e-12);
  CHECK(verify_correlation(psi, sc.environment, sc.system).max_residual < 1e-12);
}

TEST_CASE("anti-correlated product state has residual one at (1,2)") {
  const auto sc = make_pointer_scenario({"1", "2"}, {kHalf, kHalf}, false);
  const CompositeSpace space = universe_space(sc);
  const auto psi = StateVector::basis(space, idx(space, {0, 1}));  // |e1>|s2>
  const auto r = verify_correlation(psi, sc.environment, sc.system);
  CHECK(std::abs(r.max_residual - 1.0) < 1e-15);
  CHECK(r.argmax_alpha == "1");
  CHECK(r.argmax_beta == "2");
  CHECK_FALSE(r.pass());
}

TEST_CASE("decomposition of the equal two-branch state") {
  const auto sc = make_pointer_scenario({"1", "2"}, {kHalf, kHalf}, false);
  const auto psi = build_measurement_state(sc);
  const auto dec = decompose_branches(psi, sc.environment, sc.system);
  REQUIRE(dec.branches.size() == 2);
  for (const auto& b : dec.branches) CHECK(std::abs(b.amplitude - Complex(kHalf)) < 1e-15);
  CHECK(dec.branches[0].condition == "1");
  CHECK(dec.branches[1].condition == "2");
  CHECK(dec.dropped == std::vector<std::string>{"0"});
  CHECK(dec.nonexistence_weight == 0.0);
}

TEST_CASE("decomposition recovers constructed amplitudes") {
  const double a = std::sqrt(1.0 / 3.0), b = std::sqrt(2.0 / 3.0);
  const auto sc = make_pointer_scenario({"1", "2"}, {a, b});
  const auto psi = build_measurement_state(sc);
  const auto dec = decompose_branches(psi, sc.environment, *sc.apparatus, sc.system);
  REQUIRE(dec.branches.size() == 2);
  CHECK(std::abs(dec.branches[0].amplitude - Complex(a)) < 1e-15);
  CHECK(std::abs(dec.branches[1].amplitude - Complex(b)) < 1e-15);
  double n2 = 0.0;
  for (const auto& br : dec.branches) n2 += std::norm(br.amplitude);
  CHECK(std::abs(n2 - 1.0) < 1e-14);
}

TEST_CASE("uncorrelated state is rejected") {
  const auto sc = make_pointer_scenario({"1", "2"}, {kHalf, kHalf}, false);
  const CompositeSpace space = universe_space(sc);
  Vector v = Vector::Constant(4, 0.5);  // |+>|+>
  const StateVector psi(space, v);
  check_code(ErrorCode::correlation_violated, [&] { decompose_branches(psi, sc.environment, sc.system); });
}

TEST_CASE("apparatus correlation is checked by the three-party decomposition") {
  const auto sc = make_pointer_scenario({"1", "2"}, {kHalf, kHalf});
  const CompositeSpace space = universe_space(sc);
  // E and S agree, A is flipped.
  Vector v = Vector::Zero(8);
  v(static_cast<Eigen::Index>(idx(space, {0, 1, 0}))) = kHalf;
  v(static_cast<Eigen::Index>(idx(space, {1, 0, 1}))) = kHalf;
  const StateVector psi(space, v);
  CHECK_NOTHROW(decompose_branches(psi, sc.environment, sc.system));
  check_code(ErrorCode::correlation_violated,
             [&] { decompose_branches(psi, sc.environment, *sc.apparatus, sc.system); });
}

TEST_CASE("reconstruct a single branch") {
  const auto sc = make_pointer_scenario({"1"}, {Complex(0.0, 1.0)}, false);
  const auto psi = build_measurement_state(sc);
  const auto dec = decompose_branches(psi, sc.environment, sc.system);
  REQUIRE(dec.branches.size() == 1);
  CHECK((reconstruct(dec) - dec.branches[0].state.scaled(dec.branches[0].amplitude)).norm() < 1e-15);
  CHECK((reconstruct(dec) - psi).norm() < 1e-15);
}

TEST_CASE("round trip on random correlated states with rotated families") {
  Rng rng(211);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sc = random_scenario(rng, 2 + trial % 3, trial % 2 == 0);
    const auto psi = build_measurement_state(sc);
    const auto dec = sc.apparatus ? decompose_branches(psi, sc.environment, *sc.apparatus, sc.system)
                                  : decompose_branches(psi, sc.environment, sc.system);
    CHECK((reconstruct(dec) - psi).norm() < 1e-9);
    // Branch states are orthonormal.
    for (std::size_t i = 0; i < dec.branches.size(); ++i)
      for (std::size_t j = 0; j < dec.branches.size(); ++j)
        CHECK(std::abs(inner(dec.branches[i].state, dec.branches[j].state) - Complex(i == j ? 1.0 : 0.0)) < 1e-12);
  }
}

TEST_CASE("a global phase moves into the amplitudes only") {
  const auto sc = make_pointer_scenario({"1", "2"}, {std::sqrt(0.3), std::sqrt(0.7)}, false);
  const auto psi = build_measurement_state(sc);
  const Complex phase = std::polar(1.0, 0.9);
  const auto d1 = decompose_branches(psi, sc.environment, sc.system);
  const auto d2 = decompose_branches(psi.scaled(phase), sc.environment, sc.system);
  for (std::size_t i = 0; i < d1.branches.size(); ++i) {
    CHECK((d1.branches[i].state - d2.branches[i].state).norm() < 1e-14);
    CHECK(std::abs(d2.branches[i].amplitude - phase * d1.branches[i].amplitude) < 1e-14);
  }
}

TEST_CASE("non-existence weight is reported") {
  const auto sc = make_pointer_scenario({"0", "1"}, {std::sqrt(0.25), std::sqrt(0.75)}, false);
  const auto psi = build_measurement_state(sc);
  const auto dec = decompose_branches(psi, sc.environment, sc.system);
  CHECK(std::abs(dec.nonexistence_weight - 0.25) < 1e-14);
}

TEST_CASE("scenario preconditions") {
  check_code(ErrorCode::not_normalized,
             [] { build_measurement_state(make_pointer_scenario({"1", "2"}, {0.5, 0.5})); });
  auto sc = make_pointer_scenario({"1", "2"}, {kHalf, kHalf});
  sc.amplitudes.emplace_back("1", 0.0);
  check_code(ErrorCode::label_collision, [&] { build_measurement_state(sc); });
  sc = make_pointer_scenario({"1", "2"}, {kHalf, kHalf});
  sc.amplitudes[1].first = "9";
  check_code(ErrorCode::unknown_label, [&] { build_measurement_state(sc); });
  // Families with different condition labels cannot be correlated.
  sc = make_pointer_scenario({"1", "2"}, {kHalf, kHalf}, false);
  sc.environment = SystemSpec::pointer("E", {"e", 2}, {"1", "3"});
  CHECK_THROWS_AS(build_measurement_state(sc), Error);
}

TEST_CASE("pointer state of an empty condition is a rank error") {
  const auto sys = SystemSpec::pointer("S", {"s", 2}, {"1", "2"});
  check_code(ErrorCode::rank_mismatch, [&] { pointer_state(sys, "0"); });
  CHECK(std::abs(pointer_state(sys, "2")[1] - Complex(1.0)) < 1e-15);
}
