// ste: classical and soft tournament solutions from pairwise comparisons.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "ste/runner.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kDataExit = 3;
constexpr int kNumericalExit = 4;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> threads;
  bool reproducible = false;
  std::string matrix;
  std::string comparisons;
};

int report_error(const char* kind, const std::exception& e, int code) {
  std::cerr << "ste: " << kind << ": " << e.what() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft tournament equilibrium: Top Cycle and Uncovered Set, hard and soft"};
  app.set_version_flag("--version", ste::version());
  app.require_subcommand(1);

  Overrides o;
  app.add_option("--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Random seed (overrides [run] seed)");
  app.add_option("--out", o.out_dir, "Output directory (default ste-out)");
  app.add_option("--threads", o.threads, "Worker threads (overrides [run] threads)");
  app.add_flag("--reproducible", o.reproducible, "Omit the timestamp from the report");

  const auto input_options = [&](CLI::App* sub, bool matrix) {
    if (matrix) sub->add_option("--matrix", o.matrix, "Probability matrix CSV");
    sub->add_option("--comparisons", o.comparisons, "Comparison records CSV");
    sub->fallthrough();
  };
  input_options(app.add_subcommand("solve", "Exact Top Cycle, Uncovered Set and Condorcet winner"), true);
  input_options(app.add_subcommand("soft", "Soft membership scores t and u"), true);
  input_options(app.add_subcommand("fit", "Fit BTL strengths with STE regularizers"), false);
  app.add_subcommand("synth", "Generate a synthetic instance with known cores")->fallthrough();
  app.add_subcommand("experiment", "Core recovery over a synthetic grid")->fallthrough();
  input_options(app.add_subcommand("bootstrap", "Bootstrap inclusion rates and stability"), false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    ste::ExperimentConfig config;
    if (!o.config_path.empty()) config = ste::load_config(o.config_path);
    config.mode = ste::mode_from_string(app.get_subcommands().front()->get_name());
    if (o.seed) config.seed = *o.seed;
    if (o.threads) config.threads = *o.threads;
    if (o.reproducible) config.reproducible = true;
    if (!o.out_dir.empty()) config.out_dir = o.out_dir;
    if (!o.matrix.empty()) {
      config.matrix_path = o.matrix;
      config.comparisons_path.clear();
    }
    if (!o.comparisons.empty()) {
      config.comparisons_path = o.comparisons;
      if (o.matrix.empty()) config.matrix_path.clear();
    }
    const ste::RunOutcome outcome = ste::run(config);
    for (const auto& f : outcome.files) std::cout << f << '\n';
    return 0;
  } catch (const ste::ConfigError& e) {
    return report_error("config error", e, kConfigExit);
  } catch (const ste::DataError& e) {
    return report_error("data error", e, kDataExit);
  } catch (const ste::NumericalError& e) {
    return report_error("numerical failure", e, kNumericalExit);
  } catch (const std::invalid_argument& e) {
    return report_error("config error", e, kConfigExit);
  } catch (const std::exception& e) {
    return report_error("error", e, 1);
  }
}
