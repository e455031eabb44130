#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "halcyon/rules.hpp"
#include "halcyon/scenario.hpp"
#include "halcyon/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // validation / parse failure
constexpr int kExitUsage = 2;

int cmd_run(const std::string& path, const std::string& trace_out, int recheck_delay,
            bool quiet) {
  halcyon::ScenarioLoad load = halcyon::load_scenario_file(path);
  if (!load.ok()) {
    std::cerr << path << ": " << load.error->to_string() << "\n";
    return kExitFailure;
  }
  halcyon::Scenario scenario = std::move(*load.scenario);
  if (recheck_delay > 0) scenario.recheck_delay = static_cast<halcyon::Tick>(recheck_delay);

  halcyon::RunResult result = halcyon::run(scenario);
  const std::string text = result.trace_text();

  if (quiet)
    std::cout << result.summary.to_text();
  else
    std::cout << text;

  if (!trace_out.empty()) {
    std::ofstream out(trace_out, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write trace file '" << trace_out << "'\n";
      return kExitFailure;
    }
    out << text;
  }
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  halcyon::ScenarioLoad load = halcyon::load_scenario_file(path);
  if (!load.ok()) {
    std::cerr << path << ": " << load.error->to_string() << "\n";
    return kExitFailure;
  }
  const halcyon::Scenario& s = *load.scenario;
  std::cout << "ok: scenario '" << s.name << "', " << s.principals.size() << " principals, "
            << s.sends.size() << " sends, tick-limit " << s.tick_limit << "\n";
  return kExitOk;
}

int cmd_rules_check(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open '" << path << "'\n";
    return kExitFailure;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  halcyon::ParseResult parsed = halcyon::parse_rules(buf.str());
  if (!parsed.ok()) {
    std::cerr << path << ":" << parsed.error->line << ":" << parsed.error->column
              << ": expected " << parsed.error->expected << "\n";
    return kExitFailure;
  }
  std::cout << "ok: " << parsed.ruleset->rules.size() << " rules\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"halcyon - receiver-centric message mediation simulator"};
  app.require_subcommand(1);

  std::string scenario_path, trace_out, rules_path, validate_path;
  int recheck_delay = 0;
  bool quiet = false;

  CLI::App* run_cmd = app.add_subcommand("run", "run a scenario and emit its trace");
  run_cmd->add_option("scenario", scenario_path, "scenario file")->required();
  run_cmd->add_option("--trace", trace_out, "also write the trace to this file");
  run_cmd->add_option("--recheck-delay", recheck_delay, "override the scenario's recheck delay")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--quiet", quiet, "print only the summary block");

  CLI::App* validate_cmd = app.add_subcommand("validate", "check that a scenario file loads");
  validate_cmd->add_option("scenario", validate_path, "scenario file")->required();

  CLI::App* rules_cmd = app.add_subcommand("rules-check", "check that a rule file parses");
  rules_cmd->add_option("rules", rules_path, "rule file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (run_cmd->parsed()) return cmd_run(scenario_path, trace_out, recheck_delay, quiet);
  if (validate_cmd->parsed()) return cmd_validate(validate_path);
  return cmd_rules_check(rules_path);
}
