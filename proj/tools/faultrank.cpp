// faultrank: mine a repository history, label fault-inducing commits and rank
// static-analysis rules by how fault-prone they are.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "faultrank/common.hpp"
#include "faultrank/log.hpp"
#include "faultrank/pipeline.hpp"

namespace fp = faultrank::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Rank static-analysis rules by fault-proneness"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string seed;
  bool resume = false;
  std::vector<std::string> settings;
  app.add_option("--config", config_path, "key=value configuration file")->required();
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--seed", seed, "random seed (overrides config)");
  app.add_flag("--resume", resume, "skip stages already completed in the output directory");
  app.add_option("--set", settings, "extra KEY=VALUE setting, applied after the config file");

  std::vector<std::pair<CLI::App*, std::string>> commands;
  for (auto stage : fp::kAllStages) {
    std::string name(fp::to_string(stage));
    commands.emplace_back(app.add_subcommand(name, "run the " + name + " stage"), name);
  }
  commands.emplace_back(app.add_subcommand("all", "run every stage in order"), "all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  faultrank::init_logging();
  try {
    fp::PipelineConfig cfg = fp::load_config(config_path);
    for (const auto& s : settings) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw faultrank::InputError("--set expects KEY=VALUE, got '" + s + "'");
      fp::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1), ".");
    }
    if (!out_dir.empty()) fp::apply_setting(cfg, "out", out_dir, ".");
    if (!seed.empty()) fp::apply_setting(cfg, "seed", seed, ".");

    fp::Pipeline pipeline(std::move(cfg), resume);
    for (const auto& [cmd, name] : commands) {
      if (!cmd->parsed()) continue;
      if (name == "all") {
        pipeline.run_all();
      } else {
        pipeline.run(*fp::parse_stage(name));
      }
    }
  } catch (const faultrank::InputError& e) {
    std::cerr << "faultrank: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "faultrank: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
