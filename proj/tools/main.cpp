// Experiment runner: one subcommand per experiment kind, configured through
// a key/section text file (see docs/config.md).

#include "hardball/errors.hpp"
#include "hardball/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App app{"hardball: event-driven hard-ball billiards on the torus"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  std::optional<std::uint64_t> seed_override;
  bool quiet = false;

  const hardball::ExperimentKind kinds[] = {
      hardball::ExperimentKind::Simulate,
      hardball::ExperimentKind::VerifyQ,
      hardball::ExperimentKind::VerifyProp35,
      hardball::ExperimentKind::VerifyLemma310,
      hardball::ExperimentKind::VerifyCor312,
      hardball::ExperimentKind::Certificate,
      hardball::ExperimentKind::Estimates,
  };
  for (hardball::ExperimentKind k : kinds) {
    CLI::App* sub = app.add_subcommand(hardball::kind_name(k));
    sub->add_option("--config", config_path, "experiment configuration file")
        ->required();
    sub->add_option("--output", output_override, "output directory override");
    std::uint64_t seed_value = 0;
    sub->add_option("--seed", seed_value, "seed override")
        ->each([&seed_override](const std::string& v) {
          seed_override = std::stoull(v);
        });
    sub->add_flag("--quiet", quiet, "suppress stdout report");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    hardball::ExperimentConfig cfg =
        hardball::parse_config_file(config_path);
    const std::string requested = app.get_subcommands().front()->get_name();
    if (requested != hardball::kind_name(cfg.kind))
      throw hardball::ConfigError("config kind '" +
                                  std::string(hardball::kind_name(cfg.kind)) +
                                  "' does not match subcommand '" + requested +
                                  "'");
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (seed_override) cfg.seed = *seed_override;
    cfg.quiet = quiet;
    return hardball::run_experiment(cfg);
  } catch (const hardball::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 4;
  } catch (const hardball::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
