#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "stec/commands.hpp"
#include "stec/config.hpp"
#include "stec/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Operator-network STEC pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;

  const std::map<std::string, std::function<void(const stec::RunConfig&)>> commands = {
      {"simulate", stec::cmd_simulate},   {"build-dataset", stec::cmd_build_dataset},
      {"train", stec::cmd_train},         {"predict", stec::cmd_predict},
      {"evaluate", stec::cmd_evaluate},   {"plotdata", stec::cmd_plotdata},
  };
  const std::map<std::string, std::string> help = {
      {"simulate", "Generate synthetic rays and a station catalog"},
      {"build-dataset", "Filter and downsample a ray dataset"},
      {"train", "Train a model and write its checkpoint"},
      {"predict", "Predict STEC for a partition of rays"},
      {"evaluate", "Score predictions against truth"},
      {"plotdata", "Emit plot-ready CSV"},
  };
  for (const auto& [name, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--out", out_dir, "Override the output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    stec::ConfigOverrides overrides;
    overrides.seed = seed;
    if (out_dir) overrides.output_dir = *out_dir;
    const stec::RunConfig config = stec::load_run_config(config_path, overrides);
    const std::string name = app.get_subcommands().front()->get_name();
    commands.at(name)(config);
  } catch (const stec::ValidationError& e) {
    std::fprintf(stderr, "stec: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "stec: %s\n", e.what());
    return 3;
  }
  return 0;
}
