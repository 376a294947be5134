// Command-line front end: analyze, optimize, simulate, sweep, reproduce.
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mcache/experiment.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mcache::ConfigError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The verb decides the mode; a config may omit it or must agree with it.
mcache::ExperimentSpec load_spec(const std::string& verb, const std::string& path,
                                 const std::string& target) {
  std::string raw = path.empty() ? std::string("{}") : slurp(path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    return mcache::validate_config(raw);  // reports line and column
  }
  if (doc.is_object()) {
    if (doc.contains("mode") && doc["mode"] != verb) {
      throw mcache::SpecError({"config.mode: '" + doc["mode"].dump() + "' conflicts with verb " + verb});
    }
    doc["mode"] = verb;
    if (!target.empty()) doc["target"] = target;
  }
  return mcache::validate_config(doc.dump());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random caching and multicast: analysis, optimization and simulation"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::uint64_t realizations = 0;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  bool paper_fidelity = false;
  bool analytic_only = false;
  std::string target;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config, "JSON experiment document");
    if (config_required) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Monte Carlo seed (overrides the config)");
    sub->add_option("--out", out_dir, "output directory (default: config output or ./out)");
    sub->add_flag("--paper-fidelity", paper_fidelity, "4e6 realizations on a 260 x 260 window");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--realizations", realizations, "Monte Carlo realizations (overrides the config)");
  };
  for (const char* verb : {"analyze", "optimize", "simulate", "sweep"}) {
    common(app.add_subcommand(verb, std::string(verb) + " a configured experiment"), true);
  }
  auto* rep = app.add_subcommand("reproduce", "regenerate a figure or table as CSV");
  rep->add_option("target", target, "fig2|fig3|fig4|fig5|fig6|table1")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6", "table1"}));
  rep->add_flag("--analytic-only", analytic_only, "skip Monte Carlo columns");
  common(rep, false);

  CLI11_PARSE(app, argc, argv);
  const std::string verb = app.get_subcommands().front()->get_name();

  mcache::ExperimentSpec spec;
  try {
    spec = load_spec(verb, config, target);
  } catch (const mcache::SpecError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  mcache::apply_profile(spec, paper_fidelity);
  if (seed != 0) spec.sim.seed = seed;
  if (realizations != 0) spec.sim.realizations = realizations;
  if (analytic_only) spec.simulate = false;
  if (!out_dir.empty()) spec.output_dir = out_dir;
  spec.jobs = jobs;
  return mcache::run(spec, std::cerr);
}
