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

#include "envuni/io.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace envuni::io {

namespace {

const Json& field(const Json& j, const char* key, const char* where) {
  if (!j.is_object()) throw SchemaError(std::string(where) + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string(where) + ": missing field '" + key + "'");
  return *it;
}

std::string as_string(const Json& j, const char* where) {
  if (!j.is_string()) throw SchemaError(std::string(where) + ": expected a string");
  return j.get<std::string>();
}

std::size_t as_size(const Json& j, const char* where) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0)
    throw SchemaError(std::string(where) + ": expected a non-negative integer");
  return j.get<std::size_t>();
}

std::vector<std::string> as_strings(const Json& j, const char* where) {
  if (!j.is_array()) throw SchemaError(std::string(where) + ": expected an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(as_string(e, where));
  return out;
}

std::vector<FactorSpace> parse_factors(const Json& j) {
  if (!j.is_array() || j.empty()) throw SchemaError("factors: expected a nonempty array");
  std::vector<FactorSpace> out;
  for (const auto& f : j)
    out.push_back({as_string(field(f, "label", "factor"), "factor.label"),
                   as_size(field(f, "dimension", "factor"), "factor.dimension")});
  return out;
}

Matrix parse_matrix(const Json& j, std::size_t dim) {
  if (!j.is_array() || j.size() != dim) throw SchemaError("projector: expected " + std::to_string(dim) + " rows");
  Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < dim; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != dim)
      throw SchemaError("projector: expected " + std::to_string(dim) + " entries per row");
    for (std::size_t c = 0; c < dim; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = parse_complex(row[c]);
  }
  return m;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioFile parse_scenario(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  const auto& version = field(j, "version", "scenario");
  if (!version.is_number_integer() || version.get<int>() != kScenarioVersion)
    throw SchemaError("scenario: unsupported version (expected " + std::to_string(kScenarioVersion) + ")");
  ScenarioFile out;
  out.kind = as_string(field(j, "kind", "scenario"), "scenario.kind");
  static const std::set<std::string> kinds{"measurement", "envariance", "born", "experiment", "histories"};
  if (!kinds.contains(out.kind)) throw SchemaError("scenario: unknown kind '" + out.kind + "'");
  out.payload = field(j, "payload", "scenario");
  if (!out.payload.is_object()) throw SchemaError("scenario.payload: expected an object");
  return out;
}

ScenarioFile load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

Complex parse_complex(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw SchemaError("expected a number or [re, im], got " + j.dump());
}

Json to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

SystemSpec parse_system(const Json& j) {
  const std::string name = as_string(field(j, "name", "system"), "system.name");
  const auto conditions = as_strings(field(j, "conditions", "system"), "system.conditions");
  if (j.contains("projectors")) {
    const CompositeSpace local(parse_factors(field(j, "factors", "system")));
    const auto& ps = j["projectors"];
    if (!ps.is_array() || ps.size() != conditions.size())
      throw SchemaError("system.projectors: one matrix per condition required");
    std::vector<LinearOperator> projectors;
    for (const auto& p : ps) projectors.emplace_back(local, parse_matrix(p, local.total_dimension()));
    return SystemSpec(name, local, conditions, std::move(projectors));
  }
  const auto& f = field(j, "factor", "system");
  const FactorSpace factor{as_string(field(f, "label", "system.factor"), "system.factor.label"),
                           as_size(field(f, "dimension", "system.factor"), "system.factor.dimension")};
  if (!j.contains("cells")) return SystemSpec::pointer(name, factor, conditions);
  const auto& cells_json = j["cells"];
  if (!cells_json.is_array()) throw SchemaError("system.cells: expected an array of index arrays");
  std::vector<std::vector<std::size_t>> cells;
  for (const auto& cell : cells_json) {
    if (!cell.is_array()) throw SchemaError("system.cells: expected an array of index arrays");
    std::vector<std::size_t> idx;
    for (const auto& i : cell) idx.push_back(as_size(i, "system.cells"));
    cells.push_back(std::move(idx));
  }
  return SystemSpec::partition(name, factor, conditions, std::move(cells));
}

StateVector parse_state(const Json& j) {
  const CompositeSpace space(parse_factors(field(j, "factors", "state")));
  const auto dim = space.total_dimension();
  if (j.contains("amplitudes")) {
    const auto& a = j["amplitudes"];
    if (!a.is_array() || a.size() != dim)
      throw SchemaError("state.amplitudes: expected " + std::to_string(dim) + " entries");
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) v(static_cast<Eigen::Index>(i)) = parse_complex(a[i]);
    return {space, std::move(v)};
  }
  const auto& terms = field(j, "terms", "state");
  if (!terms.is_array()) throw SchemaError("state.terms: expected an array");
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  for (const auto& t : terms) {
    const auto& d = field(t, "digits", "state.terms");
    if (!d.is_array() || d.size() != space.factor_count())
      throw SchemaError("state.terms.digits: expected one digit per factor");
    std::vector<std::size_t> digits;
    for (const auto& x : d) digits.push_back(as_size(x, "state.terms.digits"));
    v(static_cast<Eigen::Index>(space.index(digits))) += parse_complex(field(t, "amplitude", "state.terms"));
  }
  return {space, std::move(v)};
}

Json to_json(const StateVector& s) {
  Json factors = Json::array();
  for (const auto& f : s.space().factors()) factors.push_back({{"label", f.label}, {"dimension", f.dimension}});
  Json amps = Json::array();
  for (Eigen::Index i = 0; i < s.amplitudes().size(); ++i) amps.push_back(to_json(s.amplitudes()(i)));
  return {{"factors", std::move(factors)}, {"amplitudes", std::move(amps)}};
}

MeasurementInput parse_measurement(const Json& payload) {
  if (payload.contains("pointer")) {
    const auto& p = payload["pointer"];
    const auto conditions = as_strings(field(p, "conditions", "pointer"), "pointer.conditions");
    const auto& a = field(p, "amplitudes", "pointer");
    if (!a.is_array()) throw SchemaError("pointer.amplitudes: expected an array");
    std::vector<Complex> amps;
    for (const auto& x : a) amps.push_back(parse_complex(x));
    bool with_apparatus = true;
    if (p.contains("apparatus")) {
      if (!p["apparatus"].is_boolean()) throw SchemaError("pointer.apparatus: expected a boolean");
      with_apparatus = p["apparatus"].get<bool>();
    }
    return {make_pointer_scenario(conditions, amps, with_apparatus), std::nullopt};
  }
  MeasurementInput in{MeasurementScenario{parse_system(field(payload, "system", "payload")), std::nullopt,
                                          parse_system(field(payload, "environment", "payload")), {}},
                      std::nullopt};
  if (payload.contains("apparatus")) in.scenario.apparatus = parse_system(payload["apparatus"]);
  if (payload.contains("state")) in.state = parse_state(payload["state"]);
  if (payload.contains("amplitudes")) {
    const auto& a = payload["amplitudes"];
    if (!a.is_array()) throw SchemaError("payload.amplitudes: expected an array");
    for (const auto& e : a)
      in.scenario.amplitudes.emplace_back(as_string(field(e, "condition", "amplitudes"), "amplitudes.condition"),
                                          parse_complex(field(e, "amplitude", "amplitudes")));
  }
  if (!in.state && in.scenario.amplitudes.empty())
    throw SchemaError("payload: give either 'amplitudes' or 'state'");
  return in;
}

PhaseMap parse_phases(const Json& j) {
  if (!j.is_object()) throw SchemaError("phases: expected an object of label: radians");
  PhaseMap out;
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw SchemaError("phases: expected a number for '" + k + "'");
    out[k] = v.get<double>();
  }
  return out;
}

std::vector<RecordEntry> parse_records(const Json& j) {
  if (!j.is_array()) throw SchemaError("records: expected an array");
  std::vector<RecordEntry> out;
  for (const auto& r : j)
    out.push_back({as_string(field(r, "system", "record"), "record.system"),
                   as_string(field(r, "condition", "record"), "record.condition")});
  return out;
}

HistoriesInput parse_histories(const Json& payload) {
  const auto& s = field(payload, "systems", "payload");
  if (!s.is_array() || s.empty()) throw SchemaError("payload.systems: expected a nonempty array");
  HistoriesInput in{{}, parse_state(field(payload, "state", "payload")), {}};
  for (const auto& sys : s) in.systems.push_back(parse_system(sys));
  if (payload.contains("records")) in.records = parse_records(payload["records"]);
  return in;
}

ExperimentDesign parse_experiment(const Json& payload) {
  ExperimentDesign d;
  const auto& a = field(payload, "amplitudes", "payload");
  if (!a.is_array()) throw SchemaError("payload.amplitudes: expected an array");
  for (const auto& x : a) d.amplitudes.push_back(parse_complex(x));
  if (payload.contains("outcomes")) {
    d.outcomes = as_strings(payload["outcomes"], "payload.outcomes");
  } else {
    for (std::size_t i = 1; i <= d.amplitudes.size(); ++i) d.outcomes.push_back(std::to_string(i));
  }
  if (payload.contains("runs")) {
    if (!payload["runs"].is_number_integer()) throw SchemaError("payload.runs: expected an integer");
    d.runs = payload["runs"].get<std::int64_t>();
  }
  if (payload.contains("seed")) {
    if (!payload["seed"].is_number_unsigned()) throw SchemaError("payload.seed: expected a non-negative integer");
    d.seed = payload["seed"].get<std::uint64_t>();
  }
  return d;
}

Json to_json(const Tolerances& tol) {
  return {{"norm", tol.norm}, {"op", tol.op}, {"branch", tol.branch}, {"env", tol.env}, {"approx", tol.approx}};
}

Json to_json(const ValidationReport& r) {
  Json issues = Json::array();
  for (const auto& i : r.issues)
    issues.push_back({{"kind", std::string(to_string(i.kind))},
                      {"alpha", i.alpha},
                      {"beta", i.beta},
                      {"residual", i.residual}});
  return {{"system", r.system}, {"valid", r.valid()}, {"tolerance", r.tolerance}, {"issues", std::move(issues)}};
}

Json to_json(const CorrelationReport& r) {
  return {{"first", r.first},
          {"second", r.second},
          {"max_residual", r.max_residual},
          {"argmax", {r.argmax_alpha, r.argmax_beta}},
          {"tolerance", r.tolerance},
          {"pass", r.pass()}};
}

Json to_json(const EnvarianceCertificate& c) {
  return {{"envariant", c.envariant},
          {"residual", c.residual},
          {"tolerance", c.tolerance},
          {"magnitude_gap", c.magnitude_gap},
          {"counter_op", c.counter_op}};
}

Json to_json(const ConcentrationReport& r) {
  return {{"n", r.n},
          {"q", r.q},
          {"std_dev", r.std_dev},
          {"band", {r.band_low, r.band_high}},
          {"mass_within", r.mass_within},
          {"maverick_mass", r.maverick_mass},
          {"regime", r.regime},
          {"pass", r.pass}};
}

std::string to_string(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

}  // namespace envuni::io
