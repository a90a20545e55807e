// Batch front end: each subcommand runs one analysis of a config-described scenario.
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "lossgain/acceptance.hpp"
#include "lossgain/registry.hpp"
#include "lossgain/scenario.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  unsigned workers = 0;
  long long seed = -1;
  std::string format;
};

int list_models(const std::string& format) {
  const auto& reg = lossgain::model_registry();
  if (format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& d : reg) {
      nlohmann::json params = nlohmann::json::array();
      for (const auto& p : d.parameters)
        params.push_back({{"name", p.name}, {"default", p.default_value}, {"description", p.description}});
      j.push_back({{"name", d.name}, {"description", d.description}, {"equations", d.equations}, {"parameters", params}});
    }
    std::cout << j.dump(2) << "\n";
    return lossgain::kExitOk;
  }
  for (const auto& d : reg) {
    std::cout << d.name << ": " << d.description << "\n  equations: " << d.equations << "\n  parameters:";
    for (const auto& p : d.parameters) std::cout << " " << p.name << "=" << p.default_value;
    std::cout << "\n";
  }
  return lossgain::kExitOk;
}

int verify(unsigned workers) {
  int failed = 0;
  const auto results = lossgain::acceptance::run_all(workers, [&](const lossgain::acceptance::CriterionResult& r) {
    std::printf("%-4s | %2d | %-48s | %s\n", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    failed += r.passed ? 0 : 1;
  });
  std::printf("summary: %zu criteria, %d failed\n", results.size(), failed);
  return failed == 0 ? lossgain::kExitOk : lossgain::kExitVerification;
}

int run_scenario(const std::string& command, const Flags& flags) {
  if (flags.config.empty()) {
    std::cerr << "error: " << command << " needs --config\n";
    return lossgain::kExitParse;
  }
  lossgain::Scenario sc = lossgain::parse_config(flags.config);
  if (!flags.out.empty()) sc.output_directory = flags.out;
  if (flags.workers > 0) sc.workers = flags.workers;
  if (flags.seed >= 0) sc.seed = static_cast<std::uint64_t>(flags.seed);
  if (!flags.format.empty()) sc.format = flags.format;
  const lossgain::RunResult r = lossgain::run(sc, command);
  std::cout << r.report.dump(2) << "\n";
  for (const auto& f : r.files) std::cerr << "wrote " << f << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced loss-gain systems: simulation and analysis"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "scenario config file");
  app.add_option("--out", flags.out, "output directory (overrides [output] directory)");
  app.add_option("--workers", flags.workers, "worker threads for scans")->check(CLI::PositiveNumber);
  app.add_option("--seed", flags.seed, "seed for randomised sampling")->check(CLI::NonNegativeNumber);
  app.add_option("--format", flags.format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));

  const std::vector<std::pair<std::string, std::string>> scenario_commands{
      {"simulate", "integrate the scenario and report periods and invariant drifts"},
      {"equilibria", "Newton search for equilibria from a seed grid"},
      {"lyapunov", "Lyapunov spectrum"},
      {"bifurcation", "scan a parameter: largest exponent and attractor samples"},
      {"stability-map", "numerical vs closed-form stability of the Duffing equilibria"},
      {"poincare", "Poincare section of the trajectory"},
      {"pt-scan", "angles of PT invariance"},
      {"spectra", "autocorrelation and periodogram"},
      {"oligomer-exact", "exact oligomer solution against integration"}};
  for (const auto& [name, help] : scenario_commands) app.add_subcommand(name, help)->fallthrough();
  app.add_subcommand("list-models", "list registered models")->fallthrough();
  app.add_subcommand("verify", "run the acceptance suite")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lossgain::kExitParse;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "list-models") return list_models(flags.format);
    if (command == "verify") return verify(flags.workers > 0 ? flags.workers : std::max(1u, std::thread::hardware_concurrency()));
    return run_scenario(command, flags);
  } catch (const lossgain::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return lossgain::kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lossgain::kExitNumerical;
  }
}
