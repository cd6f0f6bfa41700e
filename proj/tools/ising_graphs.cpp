// ising-graphs <graph|kappa|c2|sweep|betac> --config FILE [--seed N] [--jobs N] [--out DIR]
//
// Exit codes: 0 ok, 2 config error, 3 saturation/cap error, 4 advisory failure.

#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "isingg/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace isingg;
  CLI::App app{"Ising model experiments on finite balls of transitive graphs", cli::kToolName};
  app.set_version_flag("--version", cli::kToolVersion);

  std::string command, config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
  app.add_option("command", command, "graph | kappa | c2 | sweep | betac")
      ->required()
      ->check(CLI::IsMember({"graph", "kappa", "c2", "sweep", "betac"}));
  app.add_option("--config", config_path, "experiment config (JSON) or a manifest.json from an earlier run")
      ->required();
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--jobs", jobs, "worker threads (overrides the config)")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory (overrides the config and $" + std::string(cli::kOutDirEnv) + ")");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto config = cli::load_config(config_path);
    if (seed) config.seed = *seed;
    if (jobs) config.jobs = *jobs;
    if (out) config.out = *out;
    const auto manifest = cli::run_command(command, config);
    std::printf("%s: wrote %zu files to %s (%.3f s)\n", command.c_str(), manifest["outputs"].size() + 1,
                config.out.c_str(), manifest["timing_seconds"].get<double>());
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const SaturationError& e) {
    std::fprintf(stderr, "saturation error: %s\n", e.what());
    return 3;
  } catch (const CapError& e) {
    std::fprintf(stderr, "cap error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const AdvisoryFailure& e) {
    std::fprintf(stderr, "advisory failure: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
