#pragma once

// Mode dispatch and report emission for the command-line tool.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ste/config.hpp"

namespace ste {

/// Plain-text report: key = value metadata, the embedded resolved config,
/// key = value results and CSV tables, each under a marker line.
class Report {
 public:
  void meta(const std::string& key, const std::string& value);
  void result(const std::string& key, const std::string& value);
  void table(const std::string& name, std::string csv);
  void config(std::string text) { config_ = std::move(text); }

  std::string render() const;

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::pair<std::string, std::string>> results_;
  std::vector<std::pair<std::string, std::string>> tables_;
  std::string config_;
};

/// Text between the config markers of a rendered report.
std::string embedded_config(const std::string& report_text);

struct RunOutcome {
  std::vector<std::string> files;  ///< written paths, report first
};

/// Validates, runs the mode and writes report.txt plus CSVs into out_dir.
/// On any error the files written so far are removed and the error rethrown.
RunOutcome run(const ExperimentConfig& config);

const char* version();

}  // namespace ste
