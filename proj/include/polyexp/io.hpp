#pragma once

// CSV ingestion and emission on uniform grids, JSON export of bases, run
// manifests. Every file is written to a temporary sibling and renamed into place.

#include <Eigen/Core>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "json.hpp"
#include "polyexp/basis.hpp"
#include "polyexp/errors.hpp"
#include "polyexp/grid.hpp"

namespace polyexp {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kManifestSchemaVersion = 1;

// ---------------------------------------------------------------- writing

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out.flush()) throw InputError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot move output into '" + path.string() + "': " + ec.message());
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Column1D = std::pair<std::string, Eigen::VectorXd>;
using Column2D = std::pair<std::string, Eigen::MatrixXd>;

inline std::string csv_1d(const Grid1D& grid, const std::vector<Column1D>& cols) {
  std::string s = "x";
  for (const auto& c : cols) {
    if (static_cast<std::size_t>(c.second.size()) != grid.size()) throw ArgumentError("column length mismatch");
    s += "," + c.first;
  }
  s += "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    s += format_double(grid.node(i));
    for (const auto& c : cols) s += "," + format_double(c.second[static_cast<Eigen::Index>(i)]);
    s += "\n";
  }
  return s;
}

/// Rows in row-major node order: x outer, y inner.
inline std::string csv_2d(const Grid2D& grid, const std::vector<Column2D>& cols) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::string s = "x,y";
  for (const auto& c : cols) {
    if (c.second.rows() != n || c.second.cols() != n) throw ArgumentError("column shape mismatch");
    s += "," + c.first;
  }
  s += "\n";
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      s += format_double(grid.axis().node(static_cast<std::size_t>(i)));
      s += "," + format_double(grid.axis().node(static_cast<std::size_t>(j)));
      for (const auto& c : cols) s += "," + format_double(c.second(i, j));
      s += "\n";
    }
  return s;
}

inline void write_csv_1d(const std::filesystem::path& path, const Grid1D& grid, const std::vector<Column1D>& cols) {
  write_text_atomic(path, csv_1d(grid, cols));
}

inline void write_csv_2d(const std::filesystem::path& path, const Grid2D& grid, const std::vector<Column2D>& cols) {
  write_text_atomic(path, csv_2d(grid, cols));
}

// ---------------------------------------------------------------- reading

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_number(std::string_view tok, std::size_t line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw InputError("malformed number '" + std::string(tok) + "'", line);
  if (!std::isfinite(v)) throw InputError("non-finite value", line);
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv_table(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (t.header.empty()) {
      for (auto f : fields) t.header.emplace_back(f);
      continue;
    }
    if (fields.size() != t.header.size())
      throw InputError("expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()),
                       lineno);
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_number(f, lineno));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw InputError("empty file: a header line is required");
  return t;
}

inline std::size_t column_index(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw InputError("missing column '" + name + "'", 1);
}

// Checks that `nodes` is the uniform grid on (-R, R) and returns it. Data rows
// start on line 2, so row k sits on line k + 2 (blank lines aside).
inline Grid1D infer_grid(const std::vector<double>& nodes, const std::string& what) {
  const std::size_t n = nodes.size();
  if (n < 2) throw InputError(what + ": at least two grid nodes are required");
  const double R = nodes.back();
  if (!(R > 0.0)) throw InputError(what + ": grid must span a symmetric interval (-R, R)");
  const Grid1D grid(R, n);
  const double tol = 1e-9 * grid.h();
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(nodes[i] - grid.node(i)) > tol)
      throw InputError(what + ": node " + std::to_string(i) + " is off the uniform grid on (-R, R)", i + 2);
  return grid;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

}  // namespace detail

inline SampledFunction1D parse_csv_1d(std::istream& in, const std::string& value_column = "f") {
  const auto t = detail::read_csv_table(in);
  const std::size_t xi = detail::column_index(t, "x");
  const std::size_t fi = detail::column_index(t, value_column);
  std::vector<double> xs;
  Eigen::VectorXd v(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    xs.push_back(t.rows[k][xi]);
    v[static_cast<Eigen::Index>(k)] = t.rows[k][fi];
  }
  return SampledFunction1D(detail::infer_grid(xs, "x"), std::move(v));
}

inline SampledField2D parse_csv_2d(std::istream& in, const std::string& value_column = "f") {
  const auto t = detail::read_csv_table(in);
  const std::size_t xi = detail::column_index(t, "x");
  const std::size_t yi = detail::column_index(t, "y");
  const std::size_t fi = detail::column_index(t, value_column);
  const std::size_t total = t.rows.size();
  const auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(total))));
  if (n * n != total || n < 2) throw InputError("2D input must hold n x n rows, found " + std::to_string(total));
  std::vector<double> axis;
  for (std::size_t j = 0; j < n; ++j) axis.push_back(t.rows[j][yi]);
  const Grid1D grid = detail::infer_grid(axis, "y");
  const double tol = 1e-9 * grid.h();
  Eigen::MatrixXd v(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t i = k / n, j = k % n;
    if (std::abs(t.rows[k][xi] - grid.node(i)) > tol || std::abs(t.rows[k][yi] - grid.node(j)) > tol)
      throw InputError("node off the uniform row-major grid", k + 2);
    v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.rows[k][fi];
  }
  return SampledField2D(Grid2D(grid), std::move(v));
}

inline SampledFunction1D read_csv_1d(const std::filesystem::path& path, const std::string& value_column = "f") {
  auto in = detail::open_input(path);
  return parse_csv_1d(in, value_column);
}

inline SampledField2D read_csv_2d(const std::filesystem::path& path, const std::string& value_column = "f") {
  auto in = detail::open_input(path);
  return parse_csv_2d(in, value_column);
}

// ---------------------------------------------------------------- JSON

inline nlohmann::json basis_to_json(const BasisSpec& spec) {
  nlohmann::json C = nlohmann::json::array();
  for (Eigen::Index r = 0; r < spec.coefficients().rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < spec.coefficients().cols(); ++c) row.push_back(spec.coefficients()(r, c));
    C.push_back(std::move(row));
  }
  return {
      {"R", spec.R()},
      {"N_max", spec.n_max()},
      {"C", std::move(C)},
      {"orthonormality_defect", spec.orthonormality_defect()},
      {"orthonormality_tol", spec.orthonormality_tol()},
      {"construction_digits", spec.construction_digits()},
      {"recurrence",
       {{"leading", spec.leading()},
        {"alpha", std::vector<double>(spec.alpha().begin(), spec.alpha().end())},
        {"beta", std::vector<double>(spec.beta().begin(), spec.beta().end())}}},
  };
}

// ---------------------------------------------------------------- manifests

class RunManifest {
public:
  explicit RunManifest(std::string command) : command_(std::move(command)) {}

  nlohmann::json& parameters() { return parameters_; }
  nlohmann::json& results() { return results_; }

  void add_input(const std::filesystem::path& p) { inputs_.push_back(p.string()); }
  void add_output(const std::filesystem::path& p) { outputs_.push_back(p.string()); }
  void add_timing(const std::string& stage, double seconds) { timings_[stage] += seconds; }

  nlohmann::json to_json() const {
    return {
        {"schema_version", kManifestSchemaVersion},
        {"tool", "polyexp"},
        {"tool_version", kToolVersion},
        {"command", command_},
        {"parameters", parameters_.is_null() ? nlohmann::json::object() : parameters_},
        {"inputs", inputs_},
        {"outputs", outputs_},
        {"timings_seconds", timings_},
        {"results", results_.is_null() ? nlohmann::json::object() : results_},
    };
  }

  void write(const std::filesystem::path& path) const { write_text_atomic(path, to_json().dump(2) + "\n"); }

private:
  std::string command_;
  nlohmann::json parameters_;
  nlohmann::json results_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::map<std::string, double> timings_;
};

/// Wall-clock seconds of a callable.
template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace polyexp
