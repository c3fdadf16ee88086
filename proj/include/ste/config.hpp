#pragma once

// Run configuration: an INI file with fixed sections and typed keys.
// Unknown sections or keys are rejected.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ste/estimation.hpp"
#include "ste/evaluation.hpp"
#include "ste/synthetic.hpp"

namespace ste {

enum class Mode { solve, soft, fit, synth, experiment, bootstrap };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct ExperimentGrid {
  std::vector<Index> n{10, 20};
  std::vector<double> rho{0.0, 0.4, 0.8};
  std::vector<double> mu{0.0};
  std::vector<double> eta{0.0};
  std::vector<int> m{200};
  Index cycle_size = 0;
  double cycle_win_prob = 0.9;
  int seeds = 10;
  /// Scoring temperature for both STE rows; overrides soft.tau and train.anneal.tau_min.
  double ste_tau = 0.001;
};

enum class BootstrapEstimator { empirical, btl };

struct BootstrapSettings {
  int replicates = 200;
  ResampleLevel level = ResampleLevel::record;
  ScoreTarget score = ScoreTarget::uncovered;
  BootstrapEstimator estimator = BootstrapEstimator::empirical;
};

struct ExperimentConfig {
  Mode mode = Mode::solve;
  std::string comparisons_path;
  std::string matrix_path;
  std::string out_dir = "ste-out";
  std::uint64_t seed = 0;
  int threads = 1;
  bool reproducible = false;

  SoftConfig soft;
  CoreThreshold t_rule = CoreThreshold::absolute();
  CoreThreshold u_rule = CoreThreshold::absolute();
  TrainConfig train;
  SynthConfig synth;
  ExperimentGrid grid;
  BootstrapSettings boot;

  /// Checks every block the mode needs. Throws ConfigError.
  void validate() const;
  std::vector<SynthConfig> grid_cells() const;
  RecoveryOptions recovery_options() const;
};

/// Parses INI text over the defaults. Throws ConfigError with the offending key.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Every field with defaults expanded, as INI text that parse_config reads back
/// to the same configuration. Paths and mode are included; --out is not.
std::string render_config(const ExperimentConfig& config);

/// 64-bit FNV-1a of text, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// "absolute:0.5" or "relative:0.5".
CoreThreshold threshold_from_string(const std::string& s);
std::string to_string(const CoreThreshold& rule);

}  // namespace ste
