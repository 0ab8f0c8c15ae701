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
 * @file   io.hpp
 * @brief  JSON scenario files and report fragments.
 *
 * Scenario file: {"version": 1, "kind": K, "payload": {...}} with K one of
 * measurement, envariance, born, experiment, histories.
 *
 * Complex numbers are either a bare number or [re, im].
 *
 * System:
 *   {"name": "S", "factor": {"label": "s", "dimension": 3},
 *    "conditions": ["0", "1", "2"],
 *    "cells": [[], [0], [1, 2]]}            diagonal partition
 * Without "cells", the k-th listed condition owns basis state k. Instead of
 * "factor"/"cells", a system may give "factors": [...] and "projectors": one
 * dense matrix per condition as rows of complex entries.
 *
 * State:
 *   {"factors": [{"label": "s", "dimension": 2}, ...],
 *    "amplitudes": [c0, c1, ...]}          dense, basis order
 * or "terms": [{"digits": [1, 0], "amplitude": c}, ...] for sparse input.
 *
 * Measurement / envariance payload: either "system", "environment",
 * optional "apparatus", plus "amplitudes": [{"condition": "1", "amplitude": c}]
 * or an explicit "state"; or the shorthand
 *   "pointer": {"conditions": [...], "amplitudes": [...], "apparatus": true}.
 * Envariance payloads may add "phases": {"1": σ, ...} and "swap": ["1", "2"].
 *
 * Histories payload: "systems": [...], "state": {...}, optional
 * "records": [{"system": "S1", "condition": "1"}, ...].
 */

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "envuni/born.hpp"
#include "envuni/envariance.hpp"
#include "envuni/experiments.hpp"
#include "envuni/histories.hpp"
#include "envuni/measurement.hpp"

namespace envuni::io {

using Json = nlohmann::ordered_json;

inline constexpr int kScenarioVersion = 1;

/// Malformed input: wrong shape, missing field, wrong version.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioFile {
  int version = kScenarioVersion;
  std::string kind;
  Json payload;
};

ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::string& path);
std::string read_file(const std::string& path);

Complex parse_complex(const Json& j);
Json to_json(Complex c);

SystemSpec parse_system(const Json& j);
StateVector parse_state(const Json& j);
Json to_json(const StateVector& s);

/// Scenario plus, when the payload gives one, an explicit state.
struct MeasurementInput {
  MeasurementScenario scenario;
  std::optional<StateVector> state;
};
MeasurementInput parse_measurement(const Json& payload);

PhaseMap parse_phases(const Json& j);

struct RecordEntry {
  std::string system;
  std::string condition;
};
std::vector<RecordEntry> parse_records(const Json& j);

struct HistoriesInput {
  std::vector<SystemSpec> systems;
  StateVector state;
  std::vector<RecordEntry> records;
};
HistoriesInput parse_histories(const Json& payload);

ExperimentDesign parse_experiment(const Json& payload);

Json to_json(const Tolerances& tol);
Json to_json(const ValidationReport& r);
Json to_json(const CorrelationReport& r);
Json to_json(const EnvarianceCertificate& c);
Json to_json(const ConcentrationReport& r);

/// "p/q" string of an exact rational.
std::string to_string(const Rational& r);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

}  // namespace envuni::io
