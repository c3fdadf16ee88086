#pragma once

// CSV formats for comparison records and probability matrices.
//
// Comparisons: header `agent_a,agent_b,outcome`, one match per row, outcome 1
// when agent_a won. Matrices: first row and first column hold agent names,
// cell (i, j) is P(i beats j). Numbers are written in shortest round-trip
// form, so save followed by load reproduces every value bit for bit.

#include <iosfwd>
#include <string>
#include <vector>

#include "ste/estimation.hpp"
#include "ste/tournament.hpp"

namespace ste {

/// Tolerance of the complementarity check when reading matrices.
inline constexpr double kMatrixFileTolerance = 1e-9;

struct LabeledTournament {
  AgentRegistry agents;
  ProbTournament p;
};

/// Shortest decimal that parses back to exactly x.
std::string format_double(double x);

/// `source` names the input in error messages. Throws DataError with the line number.
ComparisonDataset read_comparisons(std::istream& in, const std::string& source = "<input>");
ComparisonDataset load_comparisons(const std::string& path);
void write_comparisons(std::ostream& out, const ComparisonDataset& data);
void save_comparisons(const std::string& path, const ComparisonDataset& data);

/// Throws DataError naming the offending agents.
LabeledTournament read_matrix(std::istream& in, const std::string& source = "<input>");
LabeledTournament load_matrix(const std::string& path);
void write_matrix(std::ostream& out, const ProbTournament& p, const AgentRegistry& agents);
void save_matrix(const std::string& path, const ProbTournament& p, const AgentRegistry& agents);

/// Splits one CSV line on commas and trims surrounding whitespace. No quoting.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace ste
