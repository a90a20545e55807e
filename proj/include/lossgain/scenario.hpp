#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lossgain/analysis.hpp"
#include "lossgain/core/errors.hpp"
#include "lossgain/integrators.hpp"
#include "lossgain/io/ini.hpp"
#include "lossgain/io/serialize.hpp"
#include "lossgain/models.hpp"
#include "lossgain/registry.hpp"

namespace lossgain {

enum ExitCode : int { kExitOk = 0, kExitParse = 2, kExitNumerical = 3, kExitVerification = 4 };

/// Options of the [analysis] section; each subcommand reads the ones it needs.
struct AnalysisOptions {
  std::vector<std::string> invariants;
  std::size_t component = 0;
  // lyapunov and bifurcation
  double lyapunov_time = 2e4;
  double renorm_dt = 0.5;
  double lyapunov_step = 0.01;
  double transient_fraction = 0.1;
  std::string scan_parameter;
  double scan_min = 0.0;
  double scan_max = 1.0;
  std::size_t scan_points = 11;
  double onset_threshold = 0.01;
  // stability map (scaled Duffing)
  double gamma_min = -0.7, gamma_max = 0.7;
  double beta_min = 0.0, beta_max = 1.4;
  std::size_t grid_points = 30;
  // equilibria
  double seed_extent = 3.0;
  std::size_t seed_points = 9;
  // poincare
  double section_level = 0.0;
  CrossingDirection section_direction = CrossingDirection::positive;
  // spectra
  std::size_t max_lag = 0;
  // pt-scan
  std::size_t pt_samples = 100;
};

struct Scenario {
  std::string model;
  ParameterMap params;
  RealVector initial_state;
  IntegratorConfig integrator;
  AnalysisOptions analysis;
  std::string output_directory = ".";
  std::string output_prefix = "run";
  std::string format = "csv";
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::uint64_t config_hash = 0;
};

/// FNV-1a over the raw config text; identifies the inputs in output headers.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

namespace detail {

inline CrossingDirection parse_direction(const io::IniEntry& e) {
  if (e.value == "positive") return CrossingDirection::positive;
  if (e.value == "negative") return CrossingDirection::negative;
  if (e.value == "both") return CrossingDirection::both;
  throw ParseError("expected positive, negative or both", e.line, e.key);
}

inline std::size_t parse_size(const io::IniEntry& e, long long min) {
  const long long v = io::parse_integer(e);
  if (v < min) throw ParseError("must be >= " + std::to_string(min), e.line, e.key);
  return static_cast<std::size_t>(v);
}

inline std::vector<std::string> parse_names(const io::IniEntry& e) {
  std::vector<std::string> out;
  std::string token;
  for (char c : e.value + ",") {
    if (c == ',' || c == ' ') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

/**
 * @brief Parses and validates a scenario document.
 *
 * Every key is checked against the section's known keys, model parameters
 * against the registry, and the initial state against the model dimension.
 */
inline Scenario parse_config_text(const std::string& text) {
  const io::IniDocument doc = io::IniDocument::parse_string(text);
  doc.require_sections({"model", "initial_state", "integrator", "analysis", "output"});
  Scenario sc;
  sc.config_hash = fnv1a(text);

  if (!doc.has_section("model")) throw ParseError("missing section [model]");
  const io::IniEntry* name = doc.find("model", "name");
  if (!name) throw ParseError("missing required key", doc.section_line("model"), "name");
  sc.model = name->value;
  const ModelDescriptor* desc = nullptr;
  try {
    desc = &find_model(sc.model);
  } catch (const ContractViolation& e) {
    throw ParseError(e.what(), name->line, "name");
  }
  std::set<std::string> param_names;
  for (const auto& p : desc->parameters) param_names.insert(p.name);
  for (const auto& e : doc.entries("model")) {
    if (e.key == "name") continue;
    if (!param_names.count(e.key)) throw ParseError("unknown parameter for model " + sc.model, e.line, e.key);
    sc.params[e.key] = io::parse_double(e);
  }
  ModelInstance model;
  try {
    model = make_model(sc.model, sc.params);
  } catch (const Error& e) {
    throw ParseError(std::string("invalid model parameters: ") + e.what(), doc.section_line("model"));
  }

  sc.initial_state = model.default_state;
  for (const auto& e : doc.entries("initial_state")) {
    if (e.key != "values") throw ParseError("unknown key in [initial_state]", e.line, e.key);
    sc.initial_state = io::parse_list(e);
    if (sc.initial_state.size() != model.state_dim)
      throw ParseError("state has " + std::to_string(sc.initial_state.size()) + " entries but model " + sc.model +
                           " needs " + std::to_string(model.state_dim),
                       e.line, e.key);
  }

  for (const auto& e : doc.entries("integrator")) {
    auto& ic = sc.integrator;
    if (e.key == "scheme") {
      try {
        ic.scheme = parse_scheme(e.value);
      } catch (const ContractViolation& err) {
        throw ParseError(err.what(), e.line, e.key);
      }
    } else if (e.key == "step") ic.step = io::parse_double(e);
    else if (e.key == "abs_tol") ic.abs_tol = io::parse_double(e);
    else if (e.key == "rel_tol") ic.rel_tol = io::parse_double(e);
    else if (e.key == "t0") ic.t0 = io::parse_double(e);
    else if (e.key == "t1") ic.t1 = io::parse_double(e);
    else if (e.key == "record_stride") ic.record_stride = detail::parse_size(e, 1);
    else if (e.key == "output_interval") ic.output_interval = io::parse_double(e);
    else if (e.key == "blowup_threshold") ic.blowup_threshold = io::parse_double(e);
    else if (e.key == "max_steps") ic.max_steps = detail::parse_size(e, 1);
    else throw ParseError("unknown key in [integrator]", e.line, e.key);
  }
  try {
    sc.integrator.validate();
  } catch (const ContractViolation& e) {
    throw ParseError(e.what(), doc.section_line("integrator"));
  }

  for (const auto& e : doc.entries("analysis")) {
    auto& a = sc.analysis;
    if (e.key == "invariants") a.invariants = detail::parse_names(e);
    else if (e.key == "component") a.component = detail::parse_size(e, 0);
    else if (e.key == "lyapunov_time") a.lyapunov_time = io::parse_double(e);
    else if (e.key == "renorm_dt") a.renorm_dt = io::parse_double(e);
    else if (e.key == "lyapunov_step") a.lyapunov_step = io::parse_double(e);
    else if (e.key == "transient_fraction") a.transient_fraction = io::parse_double(e);
    else if (e.key == "scan_parameter") a.scan_parameter = e.value;
    else if (e.key == "scan_min") a.scan_min = io::parse_double(e);
    else if (e.key == "scan_max") a.scan_max = io::parse_double(e);
    else if (e.key == "scan_points") a.scan_points = detail::parse_size(e, 2);
    else if (e.key == "onset_threshold") a.onset_threshold = io::parse_double(e);
    else if (e.key == "gamma_min") a.gamma_min = io::parse_double(e);
    else if (e.key == "gamma_max") a.gamma_max = io::parse_double(e);
    else if (e.key == "beta_min") a.beta_min = io::parse_double(e);
    else if (e.key == "beta_max") a.beta_max = io::parse_double(e);
    else if (e.key == "grid_points") a.grid_points = detail::parse_size(e, 1);
    else if (e.key == "seed_extent") a.seed_extent = io::parse_double(e);
    else if (e.key == "seed_points") a.seed_points = detail::parse_size(e, 2);
    else if (e.key == "section_level") a.section_level = io::parse_double(e);
    else if (e.key == "section_direction") a.section_direction = detail::parse_direction(e);
    else if (e.key == "max_lag") a.max_lag = detail::parse_size(e, 0);
    else if (e.key == "pt_samples") a.pt_samples = detail::parse_size(e, 1);
    else if (e.key == "seed") sc.seed = static_cast<std::uint64_t>(detail::parse_size(e, 0));
    else if (e.key == "workers") sc.workers = static_cast<unsigned>(detail::parse_size(e, 1));
    else throw ParseError("unknown key in [analysis]", e.line, e.key);
  }
  if (sc.analysis.component >= model.state_dim)
    throw ParseError("component outside the state", doc.find("analysis", "component")->line, "component");
  for (const auto& inv : sc.analysis.invariants)
    if (!model.invariants.count(inv))
      throw ParseError("model " + sc.model + " has no invariant '" + inv + "'", doc.find("analysis", "invariants")->line,
                       "invariants");
  if (!sc.analysis.scan_parameter.empty() && !param_names.count(sc.analysis.scan_parameter))
    throw ParseError("scan parameter is not a parameter of " + sc.model, doc.find("analysis", "scan_parameter")->line,
                     "scan_parameter");

  for (const auto& e : doc.entries("output")) {
    if (e.key == "directory") sc.output_directory = e.value;
    else if (e.key == "prefix") sc.output_prefix = e.value;
    else if (e.key == "format") {
      if (e.value != "csv" && e.value != "json") throw ParseError("format must be csv or json", e.line, e.key);
      sc.format = e.value;
    } else throw ParseError("unknown key in [output]", e.line, e.key);
  }
  return sc;
}

inline Scenario parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Running scenarios

/// Rows of named numeric columns written as CSV with '#' metadata or as JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::vector<std::string> metadata(const Scenario& sc, const std::string& command) {
  std::ostringstream params;
  params << std::setprecision(17);
  const ModelInstance m = make_model(sc.model, sc.params);
  bool first = true;
  for (const auto& [k, v] : m.params) {
    params << (first ? "" : " ") << k << "=" << v;
    first = false;
  }
  return {"command: " + command, "model: " + sc.model, "params: " + params.str(), "config_hash: " + hex(sc.config_hash)};
}

inline void write_table(const Table& t, const std::vector<std::string>& meta, const std::string& format,
                        std::ostream& os) {
  if (format == "json") {
    nlohmann::json j;
    j["metadata"] = meta;
    j["columns"] = t.columns;
    j["rows"] = t.rows;
    os << j.dump(1) << "\n";
    return;
  }
  for (const auto& m : meta) os << "# " << m << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n" << std::setprecision(17);
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
}

inline Table trajectory_table(const Trajectory& traj) {
  Table t;
  t.columns.push_back("t");
  const std::size_t n = traj.dimension() / 2;
  for (std::size_t i = 0; i < n; ++i) t.columns.push_back("x" + std::to_string(i + 1));
  for (std::size_t i = 0; i < n; ++i) t.columns.push_back("v" + std::to_string(i + 1));
  for (std::size_t r = 0; r < traj.size(); ++r) {
    std::vector<double> row{traj.times[r]};
    row.insert(row.end(), traj.states[r].begin(), traj.states[r].end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline nlohmann::json complex_list(const ComplexVector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& z : v) out.push_back({z.real(), z.imag()});
  return out;
}

inline ModelInstance with_parameter(const Scenario& sc, double value) {
  ParameterMap p = sc.params;
  p[sc.analysis.scan_parameter] = value;
  return make_model(sc.model, p);
}

}  // namespace detail

struct RunResult {
  int exit_code = kExitOk;
  nlohmann::json report;
  std::vector<std::string> files;
};

/**
 * @brief Executes one subcommand for a scenario and writes its outputs.
 *
 * Outputs are `<prefix>_<command>.csv|json` and `<prefix>_<command>_report.json`
 * under the output directory. Nothing time-dependent is written, so repeated
 * runs are byte-identical.
 */
inline RunResult run(const Scenario& sc, const std::string& command) {
  const ModelInstance model = make_model(sc.model, sc.params);
  const auto meta = detail::metadata(sc, command);
  const AnalysisOptions& a = sc.analysis;
  RunResult result;
  nlohmann::json& rep = result.report;
  rep["command"] = command;
  rep["model"] = sc.model;
  rep["params"] = model.params;
  rep["config_hash"] = hex(sc.config_hash);
  Table table;

  if (command == "simulate" || command == "poincare" || command == "spectra") {
    IntegratorConfig cfg = sc.integrator;
    if (command == "spectra" && cfg.scheme == Scheme::adaptive && cfg.output_interval == 0.0)
      throw ContractViolation("spectra needs uniform samples: set output_interval for the adaptive scheme");
    const Trajectory traj = integrate(model.field, StateVector(sc.initial_state, cfg.t0), cfg);
    rep["diverged"] = traj.diverged;
    if (traj.diverged) rep["escape_time"] = traj.escape_time;
    rep["samples"] = traj.size();
    if (command == "simulate") {
      nlohmann::json periods = nlohmann::json::object();
      for (std::size_t c = 0; c < traj.dimension(); ++c) {
        const auto p = period_estimate(traj, c);
        periods[std::to_string(c)] = p ? nlohmann::json(*p) : nlohmann::json(nullptr);
      }
      rep["period_estimates"] = periods;
      for (const auto& inv : a.invariants) rep["drift"][inv] = conserved_drift(traj, model, inv);
      table = detail::trajectory_table(traj);
    } else if (command == "poincare") {
      const auto pts = poincare_section(traj, {a.component, a.section_level, a.section_direction});
      rep["crossings"] = pts.size();
      table.columns = {"t"};
      for (std::size_t i = 0; i < model.state_dim; ++i) table.columns.push_back("s" + std::to_string(i + 1));
      for (const auto& p : pts) {
        std::vector<double> row{p.t};
        row.insert(row.end(), p.xi.begin(), p.xi.end());
        table.rows.push_back(std::move(row));
      }
    } else {
      const SpectralResult s = spectral_diagnostics(traj, a.component, a.max_lag);
      rep["dt"] = s.dt;
      table.columns = {"index", "lag", "autocorrelation", "frequency", "power"};
      const std::size_t rows = std::max(s.autocorrelation.size(), s.power.size());
      const double nan = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t i = 0; i < rows; ++i) {
        const bool has_ac = i < s.autocorrelation.size();
        const bool has_p = i < s.power.size();
        table.rows.push_back({static_cast<double>(i), has_ac ? static_cast<double>(i) * s.dt : nan,
                              has_ac ? s.autocorrelation[i] : nan, has_p ? s.frequencies[i] : nan,
                              has_p ? s.power[i] : nan});
      }
    }
  } else if (command == "equilibria") {
    const std::size_t n = model.state_dim / 2;
    const auto seeds = position_seed_grid(n, a.seed_extent, a.seed_points);
    const EquilibriumSearch found = find_equilibria(model.field, seeds);
    rep["discarded_seeds"] = found.discarded_seeds.size();
    nlohmann::json list = nlohmann::json::array();
    table.columns = {"index", "classification", "degenerate", "residual"};
    for (std::size_t i = 0; i < model.state_dim; ++i) table.columns.push_back("s" + std::to_string(i + 1));
    for (std::size_t i = 0; i < found.equilibria.size(); ++i) {
      const auto& e = found.equilibria[i];
      list.push_back({{"point", e.point.xi},
                      {"classification", to_string(e.classification)},
                      {"degenerate", e.degenerate},
                      {"residual", e.residual},
                      {"eigenvalues", detail::complex_list(e.jacobian_eigenvalues)}});
      std::vector<double> row{static_cast<double>(i), static_cast<double>(e.classification),
                              e.degenerate ? 1.0 : 0.0, e.residual};
      row.insert(row.end(), e.point.xi.begin(), e.point.xi.end());
      table.rows.push_back(std::move(row));
    }
    rep["equilibria"] = list;
    rep["classification_codes"] = {{"0", "stable"}, {"1", "unstable"}, {"2", "marginal"}};
  } else if (command == "lyapunov") {
    LyapunovConfig lc;
    lc.total_time = a.lyapunov_time;
    lc.renorm_dt = a.renorm_dt;
    lc.step = a.lyapunov_step;
    lc.transient_fraction = a.transient_fraction;
    const LyapunovResult lr = lyapunov_spectrum(model.field, sc.initial_state, lc);
    rep["exponents"] = lr.exponents;
    rep["sum"] = lr.sum;
    rep["converged"] = lr.converged;
    rep["diverged"] = lr.diverged;
    rep["measured_time"] = lr.measured_time;
    table.columns = {"time"};
    for (std::size_t i = 0; i < model.state_dim; ++i) table.columns.push_back("running_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < lr.history.size(); ++i) {
      std::vector<double> row{static_cast<double>(i + 1) * lc.renorm_dt};
      row.insert(row.end(), lr.history[i].begin(), lr.history[i].end());
      table.rows.push_back(std::move(row));
    }
  } else if (command == "bifurcation") {
    if (a.scan_parameter.empty()) throw ContractViolation("bifurcation needs analysis.scan_parameter");
    ScanConfig cfg;
    cfg.initial_state = sc.initial_state;
    cfg.lyapunov.total_time = a.lyapunov_time;
    cfg.lyapunov.renorm_dt = a.renorm_dt;
    cfg.lyapunov.step = a.lyapunov_step;
    cfg.lyapunov.transient_fraction = a.transient_fraction;
    cfg.sample_component = a.component;
    cfg.onset_threshold = a.onset_threshold;
    const RealVector grid = linspace(a.scan_min, a.scan_max, a.scan_points);
    const auto family = [&sc](double v) { return detail::with_parameter(sc, v).field; };
    const ScanResult sr = bifurcation_scan(family, a.scan_parameter, grid, cfg, sc.workers);
    rep["onset"] = sr.onset ? nlohmann::json(*sr.onset) : nlohmann::json(nullptr);
    rep["onset_threshold"] = a.onset_threshold;
    table.columns = {a.scan_parameter, "largest_exponent", "bounded", "sample"};
    for (const auto& p : sr.points) {
      if (p.samples.empty()) table.rows.push_back({p.value, p.largest_exponent, p.bounded ? 1.0 : 0.0,
                                                   std::numeric_limits<double>::quiet_NaN()});
      for (double s : p.samples) table.rows.push_back({p.value, p.largest_exponent, p.bounded ? 1.0 : 0.0, s});
    }
  } else if (command == "stability-map") {
    if (sc.model != "duffing") throw ContractViolation("stability-map applies to the scaled duffing model");
    const RealVector gs = linspace(a.gamma_min, a.gamma_max, a.grid_points);
    const RealVector bs = linspace(a.beta_min, a.beta_max, a.grid_points);
    const auto map = duffing_stability_map(gs, bs, model.params.at("alpha"));
    std::size_t agree = 0;
    table.columns = {"Gamma",        "beta",       "p0_predicate", "p0_numeric", "p1_predicate",
                     "p1_exists",    "p1_numeric", "boundary_distance"};
    for (const auto& p : map) {
      agree += p.p0_agrees() && p.p1_agrees();
      table.rows.push_back({p.gamma, p.beta, p.predicate.p0_stable ? 1.0 : 0.0, static_cast<double>(p.p0),
                            p.predicate.p1_stable ? 1.0 : 0.0, p.p1_exists ? 1.0 : 0.0, static_cast<double>(p.p1),
                            p.boundary_distance});
    }
    rep["points"] = map.size();
    rep["agreeing_points"] = agree;
  } else if (command == "pt-scan") {
    if (model.state_dim != 4) throw ContractViolation("pt-scan applies to two-dimensional systems");
    PtScanConfig cfg;
    cfg.samples = a.pt_samples;
    cfg.seed = sc.seed;
    const RealVector thetas = pt_scan(model.field, cfg);
    rep["theta"] = thetas;
    table.columns = {"theta"};
    for (double t : thetas) table.rows.push_back({t});
  } else if (command == "oligomer-exact") {
    if (sc.model != "oligomer") throw ContractViolation("oligomer-exact applies to the oligomer model");
    const OligomerParams op = detail::oligomer_params(model.params);
    const OligomerSolution sol = make_oligomer(op, from_interleaved(sc.initial_state));
    IntegratorConfig cfg = sc.integrator;
    const Trajectory traj = integrate(model.field, StateVector(sc.initial_state, cfg.t0), cfg);
    double worst = 0.0;
    table.columns = {"t", "re_psi1", "im_psi1", "re_psi2", "im_psi2", "exact_re_psi1", "exact_im_psi1",
                     "exact_re_psi2", "exact_im_psi2"};
    for (std::size_t r = 0; r < traj.size(); ++r) {
      const RealVector ex = to_interleaved(sol.evaluate(traj.times[r] - cfg.t0));
      std::vector<double> row{traj.times[r]};
      row.insert(row.end(), traj.states[r].begin(), traj.states[r].end());
      row.insert(row.end(), ex.begin(), ex.end());
      for (std::size_t k = 0; k < 4; ++k) worst = std::max(worst, std::abs(ex[k] - traj.states[r][k]));
      table.rows.push_back(std::move(row));
    }
    rep["theta_squared"] = sol.theta_sq;
    rep["c"] = sol.c;
    rep["positive_definite_metric"] = sol.positive_definite_metric;
    rep["max_abs_difference"] = worst;
  } else {
    throw ContractViolation("unknown command '" + command + "'");
  }

  namespace fs = std::filesystem;
  fs::create_directories(sc.output_directory);
  const std::string stem = sc.output_prefix + "_" + command;
  const fs::path data = fs::path(sc.output_directory) / (stem + (sc.format == "json" ? ".json" : ".csv"));
  const fs::path report = fs::path(sc.output_directory) / (stem + "_report.json");
  {
    std::ofstream os(data);
    if (!os) throw ContractViolation("cannot write " + data.string());
    detail::write_table(table, meta, sc.format, os);
  }
  {
    std::ofstream os(report);
    if (!os) throw ContractViolation("cannot write " + report.string());
    os << rep.dump(2) << "\n";
  }
  result.files = {data.string(), report.string()};
  return result;
}

}  // namespace lossgain
