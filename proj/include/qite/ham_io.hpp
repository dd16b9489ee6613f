#pragma once

#include "qite/pauli.hpp"
#include "qite/spectra.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace qite {

/// Malformed table input, located by 1-based line and column (cell index).
class ParseError : public ValueError {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : ValueError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct TableRow {
  double r = 0.0;
  std::vector<double> coefficients;
  std::string r_text;  // cells as written, for canonical serialization
  std::vector<std::string> coefficient_text;
};

/// Pauli coefficients (Hartree) tabulated against bond distance R (Angstrom).
struct MoleculeTable {
  std::string molecule_name;
  std::size_t n_qubits = 0;
  std::vector<std::string> pauli_labels;
  std::vector<TableRow> rows;
  std::vector<std::string> comments;  // without the leading '#'

  std::size_t size() const noexcept { return rows.size(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_cells(std::string_view line, char delimiter) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(delimiter, start);
    cells.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

inline bool parse_number(const std::string& cell, double& value) {
  if (cell.empty()) return false;
  errno = 0;
  char* end = nullptr;
  value = std::strtod(cell.c_str(), &end);
  return errno == 0 && end == cell.c_str() + cell.size() && std::isfinite(value);
}

}  // namespace detail

/// Reads a comma- or tab-delimited table. Lines starting with '#' are
/// comments; "# molecule: NAME" sets the molecule name. The first data line is
/// the header: "R" followed by Pauli labels.
inline MoleculeTable parse_table(std::istream& in, std::string default_name = "") {
  MoleculeTable table;
  table.molecule_name = std::move(default_name);
  char delimiter = ',';
  bool have_header = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = detail::trim(line.substr(1));
      table.comments.emplace_back(body);
      constexpr std::string_view kDirective = "molecule:";
      if (body.starts_with(kDirective)) table.molecule_name = std::string(detail::trim(body.substr(kDirective.size())));
      continue;
    }
    if (!have_header) {
      delimiter = (line.find('\t') != std::string_view::npos && line.find(',') == std::string_view::npos) ? '\t' : ',';
      auto cells = detail::split_cells(line, delimiter);
      if (cells.front() != "R") throw ParseError(line_no, 1, "first header must be 'R', got '" + cells.front() + "'");
      if (cells.size() < 2) throw ParseError(line_no, 2, "header has no Pauli labels");
      for (std::size_t c = 1; c < cells.size(); ++c) {
        const std::string& label = cells[c];
        const bool letters_ok = !label.empty() && label.find_first_not_of("IXYZ") == std::string::npos;
        if (!letters_ok) throw ParseError(line_no, c + 1, "invalid Pauli label '" + label + "'");
        if (c == 1) table.n_qubits = label.size();
        if (label.size() != table.n_qubits) {
          throw ParseError(line_no, c + 1, "label '" + label + "' has length " + std::to_string(label.size()) +
                                               ", expected " + std::to_string(table.n_qubits));
        }
        for (std::size_t p = 1; p < c; ++p) {
          if (cells[p] == label) throw ParseError(line_no, c + 1, "duplicate label '" + label + "'");
        }
      }
      table.pauli_labels.assign(cells.begin() + 1, cells.end());
      have_header = true;
      continue;
    }
    auto cells = detail::split_cells(line, delimiter);
    if (cells.size() != table.pauli_labels.size() + 1) {
      throw ParseError(line_no, std::min(cells.size(), table.pauli_labels.size() + 1) + 1,
                       "row has " + std::to_string(cells.size()) + " cells, header has " +
                           std::to_string(table.pauli_labels.size() + 1));
    }
    TableRow row;
    if (!detail::parse_number(cells[0], row.r)) throw ParseError(line_no, 1, "non-numeric R '" + cells[0] + "'");
    if (!table.rows.empty()) {
      if (row.r == table.rows.back().r) throw ParseError(line_no, 1, "duplicate R " + cells[0]);
      if (row.r < table.rows.back().r) throw ParseError(line_no, 1, "R values must strictly increase");
    }
    row.r_text = cells[0];
    for (std::size_t c = 1; c < cells.size(); ++c) {
      double v = 0.0;
      if (!detail::parse_number(cells[c], v)) {
        throw ParseError(line_no, c + 1, "non-numeric coefficient '" + cells[c] + "'");
      }
      row.coefficients.push_back(v);
      row.coefficient_text.push_back(cells[c]);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError(line_no, 1, "missing header line");
  return table;
}

inline MoleculeTable parse_table(std::string_view text, std::string default_name = "") {
  std::istringstream in{std::string(text)};
  return parse_table(in, std::move(default_name));
}

inline MoleculeTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open table '" + path.string() + "'");
  try {
    return parse_table(in, path.stem().string());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path.string() + ": " + std::string(e.what()));
  }
}

/// Canonical text: comments, then header and rows joined by commas with the
/// cells as originally written.
inline std::string serialize_table(const MoleculeTable& table) {
  std::string out;
  for (const auto& c : table.comments) out += "# " + c + "\n";
  out += "R";
  for (const auto& l : table.pauli_labels) out += "," + l;
  out += "\n";
  for (const auto& row : table.rows) {
    out += row.r_text;
    for (const auto& c : row.coefficient_text) out += "," + c;
    out += "\n";
  }
  return out;
}

inline PauliHamiltonian row_hamiltonian(const MoleculeTable& table, std::size_t index) {
  const auto& row = table.rows.at(index);
  std::vector<PauliTerm> terms;
  for (std::size_t c = 0; c < table.pauli_labels.size(); ++c) {
    terms.push_back({row.coefficients[c], PauliString(table.pauli_labels[c])});
  }
  return PauliHamiltonian(table.n_qubits, terms);
}

enum class Interpolation { Nearest, Exact };

inline constexpr double kRTolerance = 1e-9;

/// Index of the row selected for R. Nearest ties go to the smaller R.
inline std::size_t row_index(const MoleculeTable& table, double r, Interpolation mode = Interpolation::Exact) {
  if (table.rows.empty()) throw ValueError("table has no rows");
  if (r < table.rows.front().r - kRTolerance || r > table.rows.back().r + kRTolerance) {
    throw ValueError("R = " + std::to_string(r) + " outside table range [" + table.rows.front().r_text + ", " +
                     table.rows.back().r_text + "]");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (std::abs(table.rows[i].r - r) < std::abs(table.rows[best].r - r)) best = i;
  }
  if (mode == Interpolation::Exact && std::abs(table.rows[best].r - r) > kRTolerance) {
    throw ValueError("R = " + std::to_string(r) + " not found in table");
  }
  return best;
}

inline PauliHamiltonian hamiltonian_at(const MoleculeTable& table, double r, Interpolation mode = Interpolation::Exact) {
  return row_hamiltonian(table, row_index(table, r, mode));
}

inline constexpr double kDiscontinuityJump = 0.05;

/// Rows lying past a break in the exact ground-energy curve. A break is a step
/// larger than 0.05 Ha that reverses the direction of the preceding step; rows
/// from a break up to the next break (or the table end) are flagged.
inline std::vector<bool> discontinuity_rows(const MoleculeTable& table) {
  const std::size_t n = table.rows.size();
  std::vector<double> energy(n);
  for (std::size_t i = 0; i < n; ++i) energy[i] = exact_spectrum(row_hamiltonian(table, i)).ground_energy();
  std::vector<bool> flagged(n, false);
  bool inside = false;
  for (std::size_t i = 1; i < n; ++i) {
    const double step = energy[i] - energy[i - 1];
    if (i >= 2) {
      const double before = energy[i - 1] - energy[i - 2];
      if (std::abs(step) > kDiscontinuityJump && std::signbit(step) != std::signbit(before)) inside = !inside;
    }
    flagged[i] = inside;
  }
  return flagged;
}

}  // namespace qite
