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

#include "envuni/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "envuni/io.hpp"

namespace envuni::cli {

namespace {

using io::Json;
using io::SchemaError;

struct Options {
  std::string config;
  std::string json_path;
  std::string csv_path;
  std::optional<double> tolerance;

  std::string phase;
  std::string swap;

  std::string weights;
  std::string amplitudes;
  std::int64_t max_denominator = 64;

  std::string outcomes;
  std::optional<std::int64_t> runs;
  std::optional<std::uint64_t> seed;
  std::string target;
  double z_band = 3.0;
  unsigned workers = 1;

  std::string records;
  bool histories = false;
  double min_weight = 0.0;
};

std::string num(double x) {
  std::ostringstream ss;
  ss << std::setprecision(12) << x;
  return ss.str();
}

std::string num(Complex c) {
  if (c.imag() == 0.0) return num(c.real());
  std::ostringstream ss;
  ss << std::setprecision(12) << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i";
  return ss.str();
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!text.empty() && text.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw SchemaError(std::string(what) + ": '" + s + "' is not a number");
}

class Report {
 public:
  Report(std::string command, const Tolerances& tol) : command_(std::move(command)), tol_(tol) {}

  Json results = Json::object();

  void digest(const std::string& data) { digest_input_ += data + '\x1f'; }
  void seed(std::uint64_t s) { seed_ = s; }

  bool check(std::ostream& out, const std::string& name, double value, double tolerance, bool pass) {
    checks_.push_back({{"name", name}, {"value", value}, {"tolerance", tolerance}, {"pass", pass}});
    out << "check " << name << ": " << num(value) << " (tol " << num(tolerance) << ") "
        << (pass ? "PASS" : "FAIL") << '\n';
    pass_ = pass_ && pass;
    return pass;
  }

  bool pass() const noexcept { return pass_; }

  Json to_json() const {
    Json j;
    j["command"] = command_;
    j["inputs_digest"] = io::fnv1a_hex(digest_input_);
    if (seed_) j["seed"] = *seed_;
    j["tolerances"] = io::to_json(tol_);
    j["results"] = results;
    j["checks"] = checks_;
    j["pass"] = pass_;
    return j;
  }

 private:
  std::string command_;
  Tolerances tol_;
  std::string digest_input_;
  std::optional<std::uint64_t> seed_;
  Json checks_ = Json::array();
  bool pass_ = true;
};

int finish(const Report& report, const Options& opt, std::ostream& out) {
  out << "result: " << (report.pass() ? "PASS" : "FAIL") << '\n';
  if (!opt.json_path.empty()) {
    const std::string text = report.to_json().dump(2) + "\n";
    if (opt.json_path == "-") {
      out << text;
    } else {
      std::ofstream f(opt.json_path, std::ios::binary);
      if (!f) throw SchemaError("cannot write '" + opt.json_path + "'");
      f << text;
    }
  }
  return report.pass() ? kExitPass : kExitFail;
}

io::ScenarioFile require_config(const Options& opt, Report& report) {
  if (opt.config.empty()) throw SchemaError("--config is required");
  const std::string text = io::read_file(opt.config);
  report.digest(text);
  return io::parse_scenario(text);
}

std::vector<const SystemSpec*> scenario_systems(const MeasurementScenario& s) {
  std::vector<const SystemSpec*> out{&s.system};
  if (s.apparatus) out.push_back(&*s.apparatus);
  out.push_back(&s.environment);
  return out;
}

StateVector scenario_state(const io::MeasurementInput& in, const Tolerances& tol) {
  return in.state ? *in.state : build_measurement_state(in.scenario, tol);
}

// ---------------------------------------------------------------- validate

int cmd_validate(const Options& opt, const Tolerances& tol, std::ostream& out) {
  Report report("validate", tol);
  const auto file = require_config(opt, report);
  report.results["kind"] = file.kind;

  std::vector<SystemSpec> owned;
  if (file.kind == "measurement" || file.kind == "envariance") {
    const auto in = io::parse_measurement(file.payload);
    for (const auto* s : scenario_systems(in.scenario)) owned.push_back(*s);
  } else if (file.kind == "histories") {
    owned = io::parse_histories(file.payload).systems;
  }

  Json families = Json::array();
  for (const auto& sys : owned) {
    const auto r = validate_family(sys, tol);
    families.push_back(io::to_json(r));
    double worst = 0.0;
    for (const auto& i : r.issues) worst = std::max(worst, i.residual);
    out << "system " << sys.name() << ": " << sys.conditions().size() << " conditions, "
        << (r.valid() ? "valid" : "INVALID") << '\n';
    for (const auto& i : r.issues)
      out << "  " << to_string(i.kind) << " " << i.alpha << (i.beta.empty() ? "" : "," + i.beta)
          << " residual " << num(i.residual) << '\n';
    report.check(out, "family " + sys.name(), worst, r.tolerance, r.valid());
  }
  report.results["families"] = std::move(families);

  if (file.kind == "histories") {
    const auto in = io::parse_histories(file.payload);
    bool all_valid = true;
    for (const auto& sys : in.systems) all_valid = all_valid && validate_family(sys, tol).valid();
    if (all_valid) {
      UniverseModel model(in.systems, in.state, tol);
      report.results["model_systems"] = model.size();
    }
  } else if (file.kind == "born") {
    const auto& w = file.payload.contains("weights") ? file.payload["weights"] : Json();
    if (w.is_string()) report.results["weights"] = RationalWeights::parse(w.get<std::string>()).total();
  } else if (file.kind == "experiment") {
    validate(io::parse_experiment(file.payload), tol);
    report.results["design"] = "valid";
  }
  return finish(report, opt, out);
}

// ---------------------------------------------------------------- measure

int cmd_measure(const Options& opt, const Tolerances& tol, std::ostream& out) {
  Report report("measure", tol);
  const auto file = require_config(opt, report);
  const auto in = io::parse_measurement(file.payload);
  const auto& sc = in.scenario;
  for (const auto* s : scenario_systems(sc)) require_valid(*s, tol);
  const StateVector psi = scenario_state(in, tol);
  report.check(out, "normalization", std::abs(psi.norm() - 1.0), tol.norm, psi.is_normalized(tol.norm));

  std::vector<std::pair<const SystemSpec*, const SystemSpec*>> pairs;
  if (sc.apparatus) {
    pairs = {{&sc.environment, &*sc.apparatus}, {&*sc.apparatus, &sc.system}, {&sc.environment, &sc.system}};
  } else {
    pairs = {{&sc.environment, &sc.system}};
  }
  Json corr = Json::array();
  bool correlated = true;
  for (const auto& [a, b] : pairs) {
    const auto r = verify_correlation(psi, *a, *b, tol);
    corr.push_back(io::to_json(r));
    correlated = report.check(out, "correlation " + a->name() + "-" + b->name(), r.max_residual, r.tolerance,
                              r.pass()) && correlated;
  }
  report.results["correlations"] = std::move(corr);
  if (!correlated) {
    out << "state is not of recorded-measurement form; no branch decomposition\n";
    return finish(report, opt, out);
  }

  const auto dec = sc.apparatus ? decompose_branches(psi, sc.environment, *sc.apparatus, sc.system, tol)
                                : decompose_branches(psi, sc.environment, sc.system, tol);
  out << std::left << std::setw(12) << "condition" << std::setw(26) << "amplitude" << "weight\n";
  Json branches = Json::array();
  for (const auto& b : dec.branches) {
    out << std::left << std::setw(12) << b.condition << std::setw(26) << num(b.amplitude) << num(std::norm(b.amplitude))
        << '\n';
    branches.push_back({{"condition", b.condition}, {"amplitude", io::to_json(b.amplitude)},
                        {"weight", std::norm(b.amplitude)}});
  }
  out << "nonexistence weight: " << num(dec.nonexistence_weight) << '\n';
  report.results["branches"] = std::move(branches);
  report.results["dropped"] = dec.dropped;
  report.results["nonexistence_weight"] = dec.nonexistence_weight;

  const double round_trip = (reconstruct(dec) - psi).norm();
  report.check(out, "reconstruction", round_trip, tol.norm, round_trip <= tol.norm);
  return finish(report, opt, out);
}

// ---------------------------------------------------------------- envariance

PhaseMap parse_phase_flag(const std::string& text) {
  PhaseMap out;
  for (const auto& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw SchemaError("--phase expects label=radians pairs, got '" + item + "'");
    out[item.substr(0, eq)] = parse_double(item.substr(eq + 1), "--phase");
  }
  return out;
}

int cmd_envariance(const Options& opt, const Tolerances& tol, std::ostream& out) {
  Report report("envariance", tol);
  const auto file = require_config(opt, report);
  const auto in = io::parse_measurement(file.payload);
  const auto& sc = in.scenario;
  for (const auto* s : scenario_systems(sc)) require_valid(*s, tol);
  const StateVector psi = scenario_state(in, tol);

  std::optional<PhaseMap> phases;
  if (!opt.phase.empty()) {
    phases = parse_phase_flag(opt.phase);
    report.digest("phase=" + opt.phase);
  } else if (file.payload.contains("phases")) {
    phases = io::parse_phases(file.payload["phases"]);
  }
  std::optional<std::pair<std::string, std::string>> swap;
  if (!opt.swap.empty()) {
    const auto parts = split(opt.swap, ',');
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty())
      throw SchemaError("--swap expects two condition labels 'b,g'");
    swap = {parts[0], parts[1]};
    report.digest("swap=" + opt.swap);
  } else if (file.payload.contains("swap")) {
    const auto& s = file.payload["swap"];
    if (!s.is_array() || s.size() != 2 || !s[0].is_string() || !s[1].is_string())
      throw SchemaError("payload.swap: expected two condition labels");
    swap = {s[0].get<std::string>(), s[1].get<std::string>()};
  }
  if (!phases && !swap) throw SchemaError("envariance needs --phase, --swap, or payload phases/swap");

  const auto dec = decompose_branches(psi, sc.environment, sc.system, tol);
  out << "branches:";
  for (const auto& b : dec.branches) out << ' ' << b.condition << '=' << num(b.amplitude);
  out << '\n';

  if (phases) {
    const auto cert = check_phase_envariance(psi, sc.system, sc.environment, *phases, tol);
    out << "phase: counter-operation " << cert.counter_op << '\n';
    report.results["phase"] = io::to_json(cert);
    report.check(out, "phase envariance residual", cert.residual, cert.tolerance, cert.envariant);
  }
  if (swap) {
    std::vector<SystemSpec> counterparts{sc.environment};
    if (sc.apparatus) counterparts.push_back(*sc.apparatus);
    const auto cert = check_swap_envariance(psi, sc.system, counterparts, swap->first, swap->second, tol);
    out << "swap " << swap->first << "<->" << swap->second << ": |magnitude gap| " << num(cert.magnitude_gap)
        << ", counter-operation " << cert.counter_op << '\n';
    report.results["swap"] = io::to_json(cert);
    report.results["swap"]["conditions"] = {swap->first, swap->second};
    report.check(out, "swap envariance residual", cert.residual, cert.tolerance, cert.envariant);
  }
  return finish(report, opt, out);
}

// ---------------------------------------------------------------- born

std::vector<double> parse_real_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_double(s, what));
  if (out.empty()) throw SchemaError(std::string(what) + ": empty list");
  return out;
}

int cmd_born(const Options& opt, const Tolerances& tol, std::ostream& out) {
  Report report("born", tol);
  std::optional<RationalWeights> weights;
  std::vector<double> amplitudes;
  std::int64_t max_den = opt.max_denominator;
  if (!opt.config.empty()) {
    const auto file = require_config(opt, report);
    if (file.kind != "born") throw SchemaError("born expects a scenario of kind 'born'");
    const auto& p = file.payload;
    if (p.contains("weights")) {
      const auto& w = p["weights"];
      if (w.is_string()) {
        weights = RationalWeights::parse(w.get<std::string>());
      } else if (w.is_object() && w.contains("labels") && w.contains("counts")) {
        weights = RationalWeights(w["labels"].get<std::vector<std::string>>(),
                                  w["counts"].get<std::vector<std::int64_t>>());
      } else {
        throw SchemaError("payload.weights: expected \"m1:m2:...\" or {labels, counts}");
      }
    } else if (p.contains("amplitudes")) {
      for (const auto& a : p["amplitudes"]) {
        if (!a.is_number()) throw SchemaError("payload.amplitudes: expected real numbers");
        amplitudes.push_back(a.get<double>());
      }
      if (p.contains("max_denominator")) {
        max_den = p["max_denominator"].get<std::int64_t>();
        if (max_den < 1 || max_den > 4096) throw SchemaError("payload.max_denominator: expected 1..4096");
      }
    } else {
      throw SchemaError("born payload needs 'weights' or 'amplitudes'");
    }
  }
  if (!opt.weights.empty()) {
    weights = RationalWeights::parse(opt.weights);
    report.digest("weights=" + opt.weights);
  } else if (!opt.amplitudes.empty()) {
    amplitudes = parse_real_list(opt.amplitudes, "--amplitudes");
    report.digest("amplitudes=" + opt.amplitudes);
  }
  if (!weights && amplitudes.empty()) throw SchemaError("born needs --weights, --amplitudes, or --config");

  if (!weights) {
    report.digest("max_denominator=" + std::to_string(max_den));
    const auto approx = rational_approximation(amplitudes, max_den);
    out << "rational approximation (M <= " << max_den << "):\n";
    Json rows = Json::array();
    for (std::size_t a = 0; a < approx.labels.size(); ++a) {
      const auto& w = approx.weights;
      const auto it = std::find(w.labels().begin(), w.labels().end(), approx.labels[a]);
      const std::int64_t m = it == w.labels().end() ? 0 : w.counts()[static_cast<std::size_t>(it - w.labels().begin())];
      out << "  " << approx.labels[a] << ": |psi|^2 = " << num(approx.targets[a]) << " ~ " << m << "/" << w.total()
          << '\n';
      rows.push_back({{"label", approx.labels[a]}, {"target", approx.targets[a]}, {"count", m}});
    }
    out << "  max error " << num(approx.max_error) << '\n';
    if (!approx.dropped.empty()) {
      out << "  dropped (count 0):";
      for (const auto& d : approx.dropped) out << ' ' << d;
      out << '\n';
    }
    report.results["approximation"] = {{"max_denominator", max_den},
                                       {"denominator", approx.weights.total()},
                                       {"max_error", approx.max_error},
                                       {"dropped", approx.dropped},
                                       {"rows", std::move(rows)}};
    weights = approx.weights;
  }

  const auto fine = fine_grain(*weights, tol);
  const auto born = born_probabilities(*weights);
  const auto counted = counting_oracle(fine, tol);

  out << std::left << std::setw(10) << "condition" << std::setw(8) << "count" << std::setw(12) << "born"
      << std::setw(12) << "counted" << "value\n";
  Json table = Json::array();
  bool exact = born.size() == counted.size();
  for (std::size_t a = 0; a < weights->size(); ++a) {
    const bool same = a < counted.size() && born[a] == counted[a];
    exact = exact && same;
    const double value = boost::rational_cast<double>(born[a]);
    out << std::left << std::setw(10) << weights->labels()[a] << std::setw(8) << weights->counts()[a]
        << std::setw(12) << io::to_string(born[a]) << std::setw(12)
        << (a < counted.size() ? io::to_string(counted[a]) : "-") << num(value) << '\n';
    table.push_back({{"condition", weights->labels()[a]},
                     {"count", weights->counts()[a]},
                     {"probability", io::to_string(born[a])},
                     {"counted", a < counted.size() ? io::to_string(counted[a]) : ""},
                     {"value", value}});
  }
  report.results["total"] = weights->total();
  report.results["probabilities"] = std::move(table);
  report.check(out, "counting equals born", exact ? 0.0 : 1.0, 0.0, exact);

  const double coeff = equal_coefficient_residual(fine);
  report.check(out, "equal coefficients", coeff, tol.op, coeff <= tol.op);

  // Transpositions (1 j) generate every permutation of the sub-branches.
  double worst = 0.0;
  bool all = true;
  const auto& fb = fine.fine_branches;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t j = 1; j < fb.size(); ++j) pairs.emplace_back(fb[0].label, fb[j].label);
  for (const auto& cert : check_swap_pairs(fine.state, fine.fine_system, std::span(&fine.fine_environment, 1), pairs, tol)) {
    worst = std::max(worst, cert.residual);
    all = all && cert.envariant;
  }
  report.results["sub_branches"] = fb.size();
  report.check(out, "sub-branch swaps", worst, tol.env * std::sqrt(2.0), all);
  return finish(report, opt, out);
}

// ---------------------------------------------------------------- experiment

int cmd_experiment(const Options& opt, const Tolerances& tol, std::ostream& out) {
  Report report("experiment", tol);
  ExperimentDesign design;
  if (!opt.config.empty()) {
    const auto file = require_config(opt, report);
    if (file.kind != "experiment") throw SchemaError("experiment expects a scenario of kind 'experiment'");
    design = io::parse_experiment(file.payload);
  }
  if (!opt.amplitudes.empty()) {
    design.amplitudes.clear();
    for (double a : parse_real_list(opt.amplitudes, "--amplitudes")) design.amplitudes.emplace_back(a, 0.0);
    design.outcomes.clear();
    report.digest("amplitudes=" + opt.amplitudes);
  }
  if (!opt.outcomes.empty()) {
    design.outcomes = split(opt.outcomes, ',');
    report.digest("outcomes=" + opt.outcomes);
  } else if (design.outcomes.empty()) {
    for (std::size_t i = 1; i <= design.amplitudes.size(); ++i) design.outcomes.push_back(std::to_string(i));
  }
  if (design.amplitudes.empty()) throw SchemaError("experiment needs --amplitudes or --config");
  if (opt.runs) design.runs = *opt.runs;
  if (opt.seed) design.seed = *opt.seed;
  if (design.runs < 1) throw SchemaError("--runs must be at least 1");
  validate(design, tol);
  report.digest("runs=" + std::to_string(design.runs));
  report.seed(design.seed);
  const std::string target = opt.target.empty() ? design.outcomes.front() : opt.target;
  outcome_index(design, target);
  report.digest("target=" + target + " z=" + num(opt.z_band));

  const double q = frequency_expectation(design, target);
  const auto counts = sample_counts(design, opt.workers);
  const double observed = static_cast<double>(counts[outcome_index(design, target)]) / static_cast<double>(design.runs);
  const double sd = std::sqrt(q * (1.0 - q) / static_cast<double>(design.runs));
  const double diff = observed - q;
  const double z = sd > 0.0 ? diff / sd : (diff == 0.0 ? 0.0 : std::copysign(HUGE_VAL, diff));

  out << "runs " << design.runs << ", seed " << design.seed << ", target " << target << '\n';
  out << std::left << std::setw(10) << "outcome" << std::setw(16) << "|psi|^2" << "count\n";
  Json rows = Json::array();
  for (std::size_t i = 0; i < design.outcomes.size(); ++i) {
    const double p = std::norm(design.amplitudes[i]);
    out << std::left << std::setw(10) << design.outcomes[i] << std::setw(16) << num(p) << counts[i] << '\n';
    rows.push_back({{"outcome", design.outcomes[i]}, {"probability", p}, {"count", counts[i]}});
  }
  out << "expected frequency " << num(q) << ", observed " << num(observed) << ", std " << num(sd) << ", z "
      << num(z) << '\n';
  report.results["outcomes"] = std::move(rows);
  report.results["target"] = target;
  report.results["runs"] = design.runs;
  report.results["expected_frequency"] = q;
  report.results["observed_frequency"] = observed;
  report.results["std_dev"] = sd;
  report.results["z_score"] = std::isfinite(z) ? Json(z) : Json(nullptr);
  report.check(out, "sample within z-band", std::abs(z), opt.z_band, std::abs(z) <= opt.z_band);

  if (design.runs <= kDistributionCap) {
    const auto dist = frequency_distribution(design, target);
    double total = 0.0;
    for (const auto& pt : dist) total += pt.p;
    report.check(out, "distribution normalized", std::abs(total - 1.0), 1e-9, std::abs(total - 1.0) <= 1e-9);
    if (design.runs >= 2) {
      const auto conc = concentration_check(design, target);
      out << "mass within q +/- 3 std: " << num(conc.mass_within) << " (maverick " << num(conc.maverick_mass)
          << ")\n";
      report.results["concentration"] = io::to_json(conc);
      if (conc.regime) report.check(out, "concentration", conc.mass_within, 0.99, conc.pass);
    }
    if (!opt.csv_path.empty()) {
      std::ofstream f(opt.csv_path, std::ios::binary);
      if (!f) throw SchemaError("cannot write '" + opt.csv_path + "'");
      f << "count,f,p\n" << std::setprecision(17);
      for (const auto& pt : dist) f << pt.count << ',' << pt.f << ',' << pt.p << '\n';
    }
  } else {
    out << "distribution skipped: runs exceed " << kDistributionCap << '\n';
    if (!opt.csv_path.empty()) throw Error(ErrorCode::cap_exceeded, "distribution too large for --csv");
  }
  return finish(report, opt, out);
}

// ---------------------------------------------------------------- collapse

int cmd_collapse(const Options& opt, const Tolerances& tol, std::ostream& out) {
  Report report("collapse", tol);
  const auto file = require_config(opt, report);
  if (file.kind != "histories") throw SchemaError("collapse expects a scenario of kind 'histories'");
  auto in = io::parse_histories(file.payload);
  if (!opt.records.empty()) {
    const std::string text = io::read_file(opt.records);
    report.digest(text);
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("invalid record log: ") + e.what());
    }
    in.records = io::parse_records(j);
  }
  const auto model = std::make_shared<const UniverseModel>(in.systems, in.state, tol);

  if (opt.histories) {
    report.digest("histories min_weight=" + num(opt.min_weight));
    const auto hs = enumerate_histories(*model, opt.min_weight);
    Json list = Json::array();
    double total = 0.0;
    out << "histories (weight >= " << num(opt.min_weight) << "):\n";
    for (const auto& h : hs) {
      std::string joined;
      for (const auto& l : h.labels) joined += (joined.empty() ? "" : ",") + l;
      out << "  (" << joined << ") " << num(h.weight) << '\n';
      list.push_back({{"labels", h.labels}, {"weight", h.weight}});
      total += h.weight;
    }
    report.results["histories"] = std::move(list);
    if (opt.min_weight == 0.0)
      report.check(out, "history weights sum", std::abs(total - 1.0), 1e-9, std::abs(total - 1.0) <= 1e-9);
  }

  CoarseState coarse = coarse_grain(model, {});
  RecordSet all;
  double product = 1.0;
  Json steps = Json::array();
  out << std::left << std::setw(6) << "step" << std::setw(10) << "system" << std::setw(11) << "condition"
      << std::setw(18) << "probability" << std::setw(18) << "Tr(rho P)" << std::setw(18) << "Tr(rho' P)"
      << "history weight\n";
  std::size_t step = 0;
  for (const auto& rec : in.records) {
    const std::size_t i = model->index_of(rec.system);
    auto upd = record_update(coarse, i, rec.condition);
    product *= upd.probability;
    all.emplace(i, rec.condition);
    ++step;
    out << std::left << std::setw(6) << step << std::setw(10) << rec.system << std::setw(11) << rec.condition
        << std::setw(18) << num(upd.probability) << std::setw(18) << num(upd.trace_before) << std::setw(18)
        << num(upd.trace_after) << num(upd.next.weight()) << '\n';
    steps.push_back({{"system", rec.system},
                     {"condition", rec.condition},
                     {"probability", upd.probability},
                     {"trace_before", upd.trace_before},
                     {"trace_after", upd.trace_after},
                     {"history_weight", upd.next.weight()}});
    const std::string tag = " step " + std::to_string(step);
    report.check(out, "probability = Tr(rho P)" + tag, std::abs(upd.probability - upd.trace_before), 1e-9,
                 std::abs(upd.probability - upd.trace_before) <= 1e-9);
    report.check(out, "Tr(rho' P) = 1" + tag, std::abs(upd.trace_after - 1.0), 1e-9,
                 std::abs(upd.trace_after - 1.0) <= 1e-9);
    coarse = std::move(upd.next);
  }
  report.results["steps"] = std::move(steps);
  const double direct = coarse_grain(model, all).weight();
  out << "product of step probabilities " << num(product) << ", history weight " << num(direct) << '\n';
  report.results["history_weight"] = direct;
  report.check(out, "product = history weight", std::abs(product - direct), 1e-9, std::abs(product - direct) <= 1e-9);

  Json purities = Json::array();
  for (std::size_t i = 0; i < model->size(); ++i) {
    const double purity = reduce(coarse, i).purity();
    purities.push_back({{"system", model->system(i).name()}, {"purity", purity}});
  }
  report.results["reduced_purity"] = std::move(purities);
  return finish(report, opt, out);
}

bool usage_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::label_collision:
    case ErrorCode::unknown_label:
    case ErrorCode::space_mismatch:
      return true;
    default:
      return false;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"envuni: measurement, envariance and Born-rule checks on finite universes", "envuni"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--json", opt.json_path, "Write the JSON report to PATH ('-' for stdout)");
  app.add_option("--tolerance", opt.tolerance, "Override the norm and operator tolerances")
      ->check(CLI::PositiveNumber);

  auto* validate_cmd = app.add_subcommand("validate", "Validate projector families in a scenario file");
  auto* measure = app.add_subcommand("measure", "Build, verify and decompose a measurement state");
  auto* envar = app.add_subcommand("envariance", "Phase and swap envariance certificates");
  auto* born = app.add_subcommand("born", "Fine-grained Born probabilities");
  auto* experiment = app.add_subcommand("experiment", "Repeated-experiment frequency statistics");
  auto* collapse = app.add_subcommand("collapse", "Coarse-graining and sequential record updates");

  for (auto* sub : {validate_cmd, measure, envar, collapse})
    sub->add_option("--config", opt.config, "Scenario file")->required();
  for (auto* sub : {born, experiment}) sub->add_option("--config", opt.config, "Scenario file");

  envar->add_option("--phase", opt.phase, "Phases as label=radians,...");
  envar->add_option("--swap", opt.swap, "Conditions to swap, 'b,g'");

  born->add_option("--weights", opt.weights, "Integer weights m1:m2:...");
  born->add_option("--amplitudes", opt.amplitudes, "Real amplitudes a1,a2,... to approximate");
  born->add_option("--max-denominator", opt.max_denominator, "Largest common denominator M")
      ->check(CLI::Range(std::int64_t{1}, std::int64_t{4096}));

  experiment->add_option("--amplitudes", opt.amplitudes, "Real outcome amplitudes a1,a2,...");
  experiment->add_option("--outcomes", opt.outcomes, "Outcome labels, default 1..k");
  experiment->add_option("--runs", opt.runs, "Number of repetitions n")->check(CLI::PositiveNumber);
  experiment->add_option("--seed", opt.seed, "RNG seed");
  experiment->add_option("--target", opt.target, "Outcome whose frequency is tracked");
  experiment->add_option("--z-band", opt.z_band, "Accepted |z| of the sampled frequency")->check(CLI::PositiveNumber);
  experiment->add_option("--workers", opt.workers, "Sampling threads")->check(CLI::Range(1u, 256u));
  experiment->add_option("--csv", opt.csv_path, "Write the frequency distribution as CSV");

  collapse->add_option("--records", opt.records, "Record log, JSON array of {system, condition}");
  collapse->add_flag("--histories", opt.histories, "Also enumerate joint histories");
  collapse->add_option("--min-weight", opt.min_weight, "Prune histories below this weight")
      ->check(CLI::NonNegativeNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  Tolerances tol;
  if (opt.tolerance) tol.norm = tol.op = *opt.tolerance;

  try {
    if (*validate_cmd) return cmd_validate(opt, tol, out);
    if (*measure) return cmd_measure(opt, tol, out);
    if (*envar) return cmd_envariance(opt, tol, out);
    if (*born) return cmd_born(opt, tol, out);
    if (*experiment) return cmd_experiment(opt, tol, out);
    return cmd_collapse(opt, tol, out);
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << to_string(e.code()) << ": " << e.what() << '\n';
    return usage_error(e.code()) ? kExitUsage : kExitFail;
  }
}

}  // namespace envuni::cli
