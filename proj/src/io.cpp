#include "ste/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace ste {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ':' << line << ": " << what;
  throw DataError(msg.str());
}

double parse_double(const std::string& s, const std::string& source, std::size_t line) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    fail(source, line, "not a number: '" + s + "'");
  }
  return v;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

void check_name(const std::string& name) {
  if (name.empty() || name.find_first_of(",\n\r") != std::string::npos ||
      trim(name) != name) {
    throw DataError("agent name '" + name + "' cannot be written to CSV");
  }
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

ComparisonDataset read_comparisons(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  ComparisonDataset data;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (!header) {
      if (cells != std::vector<std::string>{"agent_a", "agent_b", "outcome"}) {
        fail(source, lineno, "expected header 'agent_a,agent_b,outcome'");
      }
      header = true;
      continue;
    }
    if (cells.size() != 3) fail(source, lineno, "expected 3 fields");
    if (cells[0].empty() || cells[1].empty()) fail(source, lineno, "empty agent name");
    if (cells[0] == cells[1]) fail(source, lineno, "agent '" + cells[0] + "' compared with itself");
    if (cells[2] != "0" && cells[2] != "1") {
      fail(source, lineno, "outcome must be 0 or 1, got '" + cells[2] + "'");
    }
    data.add(cells[0], cells[1], cells[2] == "1" ? 1 : 0);
  }
  if (!header) fail(source, lineno, "missing header 'agent_a,agent_b,outcome'");
  return data;
}

ComparisonDataset load_comparisons(const std::string& path) {
  auto in = open_in(path);
  return read_comparisons(in, path);
}

void write_comparisons(std::ostream& out, const ComparisonDataset& data) {
  for (const auto& name : data.agents().names()) check_name(name);
  out << "agent_a,agent_b,outcome\n";
  for (const Comparison& c : data.records()) {
    out << data.agents().name(c.a) << ',' << data.agents().name(c.b) << ',' << c.outcome << '\n';
  }
}

void save_comparisons(const std::string& path, const ComparisonDataset& data) {
  auto out = open_out(path);
  write_comparisons(out, data);
}

LabeledTournament read_matrix(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (!header) {
      names.assign(cells.begin() + 1, cells.end());
      header = true;
      continue;
    }
    const std::size_t r = rows.size();
    if (r >= names.size()) fail(source, lineno, "more rows than header columns (matrix is not square)");
    if (cells.size() != names.size() + 1) {
      fail(source, lineno, "expected " + std::to_string(names.size() + 1) + " fields");
    }
    if (cells[0] != names[r]) {
      fail(source, lineno, "row label '" + cells[0] + "' does not match column '" + names[r] + "'");
    }
    std::vector<double> row;
    for (std::size_t j = 1; j < cells.size(); ++j) row.push_back(parse_double(cells[j], source, lineno));
    rows.push_back(std::move(row));
  }
  if (!header) fail(source, lineno, "empty matrix file");
  if (rows.size() != names.size()) {
    fail(source, lineno, "matrix is not square: " + std::to_string(rows.size()) + " rows, " +
                             std::to_string(names.size()) + " columns");
  }
  AgentRegistry agents(names);
  const Index n = agents.size();
  Matrix p(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) p(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (auto bad = find_prob_violation(p, kMatrixFileTolerance)) {
    throw DataError(source + ": " + bad->reason + " at (" + agents.name(bad->row) + ", " +
                    agents.name(bad->col) + ")");
  }
  return {std::move(agents), ProbTournament(std::move(p), kMatrixFileTolerance)};
}

LabeledTournament load_matrix(const std::string& path) {
  auto in = open_in(path);
  return read_matrix(in, path);
}

void write_matrix(std::ostream& out, const ProbTournament& p, const AgentRegistry& agents) {
  if (agents.size() != p.size()) throw DataError("write_matrix: registry size mismatch");
  for (const auto& name : agents.names()) check_name(name);
  out << "agent";
  for (const auto& name : agents.names()) out << ',' << name;
  out << '\n';
  for (Index i = 0; i < p.size(); ++i) {
    out << agents.name(i);
    for (Index j = 0; j < p.size(); ++j) out << ',' << format_double(p(i, j));
    out << '\n';
  }
}

void save_matrix(const std::string& path, const ProbTournament& p, const AgentRegistry& agents) {
  auto out = open_out(path);
  write_matrix(out, p, agents);
}

}  // namespace ste
