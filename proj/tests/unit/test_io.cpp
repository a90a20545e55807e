#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "lossgain/io/serialize.hpp"
#include "lossgain/scenario.hpp"
#include "support.hpp"

using namespace lossgain;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(LOSSGAIN_SOURCE_DIR) + "/configs/";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Runs the parser and returns the error it raised, failing the test if none was.
ParseError parse_failure(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("config was accepted: " << text);
  return ParseError("unreachable");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lossgain_test_io_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("INI syntax errors carry the line number") {
  CHECK(parse_failure("[model]\nname = bateman\n[integrator\n").line() == 3);
  CHECK(parse_failure("[model]\nname = bateman\njust text\n").line() == 3);
  CHECK(parse_failure("gamma = 1\n").key() == "gamma");
  const ParseError dup = parse_failure("[model]\nname = bateman\nname = duffing\n");
  CHECK(dup.line() == 3);
  CHECK(dup.key() == "name");
  CHECK(parse_failure("[model]\nname = bateman\n[model]\n").line() == 3);
  CHECK(parse_failure("[model]\nname = bateman\n[plots]\n").line() == 3);
}

TEST_CASE("semantic config errors name the offending key") {
  const ParseError unknown_param = parse_failure("[model]\nname = bateman\nomega = 1\nzeta = 2\n");
  CHECK(unknown_param.line() == 4);
  CHECK(unknown_param.key() == "zeta");

  const ParseError not_number = parse_failure("[model]\nname = bateman\ngamma = fast\n");
  CHECK(not_number.key() == "gamma");
  CHECK(std::string(not_number.what()).find("line 3") != std::string::npos);

  const ParseError unknown_key = parse_failure("[model]\nname = bateman\n[integrator]\nstepsize = 0.1\n");
  CHECK(unknown_key.line() == 4);
  CHECK(unknown_key.key() == "stepsize");

  CHECK(parse_failure("[model]\nname = lorenz\n").key() == "name");
  CHECK(parse_failure("[model]\ngamma = 1\n").key() == "name");
  CHECK(parse_failure("[model]\nname = bateman\n[analysis]\ninvariants = H, Q\n").key() == "invariants");
  CHECK(parse_failure("[model]\nname = bateman\n[analysis]\ncomponent = 4\n").key() == "component");
  CHECK(parse_failure("[model]\nname = bateman\n[analysis]\nscan_parameter = beta\n").key() == "scan_parameter");
  CHECK(parse_failure("[model]\nname = bateman\n[output]\nformat = xml\n").key() == "format");
  CHECK(parse_failure("[model]\nname = bateman\n[integrator]\nscheme = euler\n").key() == "scheme");
  CHECK(parse_failure("[model]\nname = bateman\n[integrator]\nrecord_stride = 0\n").key() == "record_stride");
  // Invalid numeric combinations are reported against the section header.
  CHECK(parse_failure("[model]\nname = bateman\n[integrator]\nt0 = 5\nt1 = 1\n").line() == 3);
}

TEST_CASE("initial state dimension is checked against the model") {
  const ParseError e = parse_failure("[model]\nname = duffing\n[initial_state]\nvalues = 0.1, 0.2, 0.3\n");
  CHECK(e.line() == 4);
  CHECK(e.key() == "values");
  CHECK(std::string(e.what()).find("needs 4") != std::string::npos);
  CHECK_THROWS_AS(parse_config(kConfigs + "does_not_exist.ini"), ParseError);
}

TEST_CASE("minimal Bateman config takes every default") {
  const Scenario sc = parse_config(kConfigs + "bateman.ini");
  const ModelInstance m = make_model("bateman");
  CHECK(sc.model == "bateman");
  CHECK(sc.params.empty());
  CHECK(sc.initial_state == m.default_state);
  const IntegratorConfig defaults;
  CHECK(sc.integrator.scheme == defaults.scheme);
  CHECK(sc.integrator.step == defaults.step);
  CHECK(sc.integrator.t1 == defaults.t1);
  CHECK(sc.analysis.invariants.empty());
  CHECK(sc.output_prefix == "bateman");
  CHECK(sc.format == "csv");
}

TEST_CASE("coupled Duffing sample config") {
  const Scenario sc = parse_config(kConfigs + "duffing_p0.ini");
  CHECK(sc.model == "duffing");
  CHECK(sc.params.at("Gamma") == 0.2);
  CHECK(sc.params.at("beta") == 0.5);
  CHECK(sc.params.at("alpha") == 1.0);
  CHECK(sc.initial_state == RealVector{0.1, 0.2, 0.03, 0.04});
  CHECK(sc.integrator.scheme == Scheme::rk4);
  CHECK(sc.integrator.step == 0.01);
  CHECK(sc.integrator.t1 == 100.0);
  CHECK(sc.integrator.record_stride == 10);
  CHECK(sc.analysis.invariants == std::vector<std::string>{"H"});
}

TEST_CASE("every sample config parses") {
  for (const auto& entry : fs::directory_iterator(kConfigs)) {
    if (entry.path().extension() != ".ini") continue;
    INFO(entry.path().filename().string());
    CHECK_NOTHROW(parse_config(entry.path().string()));
  }
}

TEST_CASE("system specs round-trip through JSON") {
  std::mt19937_64 rng(21);
  for (const auto& d : model_registry()) {
    const ModelInstance m = make_model(d.name);
    if (!m.spec) continue;
    INFO(d.name);
    const nlohmann::json j = io::spec_to_json(*m.spec);
    const SystemSpec back = io::spec_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.n() == m.spec->n());
    CHECK(max_abs(back.mass_matrix() - m.spec->mass_matrix()) == 0.0);
    CHECK(max_abs(back.gauge_matrix() - m.spec->gauge_matrix()) == 0.0);
    for (int k = 0; k < 10; ++k) {
      const StateVector s(test_support::random_vector(2 * back.n(), rng));
      CHECK(test_support::max_diff(eom_rhs(back, s), eom_rhs(*m.spec, s)) < 1e-12);
      CHECK(hamiltonian_value(back, s) == Catch::Approx(hamiltonian_value(*m.spec, s)).margin(1e-12));
    }
  }
  nlohmann::json broken = io::spec_to_json(make_bateman({}));
  broken.erase("gauge_matrix");
  CHECK_THROWS_AS(io::spec_from_json(broken), ParseError);
}

TEST_CASE("scenario runs are byte-identical and name their outputs") {
  Scenario sc = parse_config(kConfigs + "duffing_p0.ini");
  sc.integrator.t1 = 10.0;
  const fs::path a = scratch("a");
  const fs::path b = scratch("b");
  sc.output_directory = a.string();
  const RunResult ra = run(sc, "simulate");
  sc.output_directory = b.string();
  const RunResult rb = run(sc, "simulate");
  CHECK(ra.exit_code == kExitOk);
  REQUIRE(ra.files.size() == 2);
  CHECK(fs::path(ra.files[0]).filename() == "duffing_p0_simulate.csv");
  CHECK(fs::path(ra.files[1]).filename() == "duffing_p0_simulate_report.json");
  for (std::size_t i = 0; i < ra.files.size(); ++i) CHECK(slurp(ra.files[i]) == slurp(rb.files[i]));
  CHECK(ra.report.at("drift").at("H").get<double>() < 1e-6);
  CHECK(slurp(ra.files[0]).rfind("#", 0) == 0);

  sc.format = "json";
  const RunResult rj = run(sc, "simulate");
  CHECK(fs::path(rj.files[0]).extension() == ".json");
  nlohmann::json table;
  CHECK_NOTHROW(table = nlohmann::json::parse(slurp(rj.files[0])));
  CHECK_THROWS_AS(run(sc, "teleport"), ContractViolation);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("registry entries are fully documented") {
  std::set<std::string> names;
  for (const auto& d : model_registry()) {
    INFO(d.name);
    CHECK(names.insert(d.name).second);
    CHECK_FALSE(d.description.empty());
    CHECK_FALSE(d.equations.empty());
    for (const auto& p : d.parameters) CHECK_FALSE(p.description.empty());
    CHECK(&find_model(d.name) == &d);
  }
  CHECK(names.size() == 12);
}
