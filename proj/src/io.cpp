#include "mflab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mflab::io {

std::string format_g17(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

CsvWriter::CsvWriter(std::vector<std::string> columns)
    : n_columns_(columns.size()) {
  if (columns.empty())
    throw std::invalid_argument("CsvWriter: need at least one column");
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) body_ += ',';
    body_ += columns[i];
  }
  body_ += '\n';
}

void CsvWriter::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_g17(v));
  add_row_text(cells);
}

void CsvWriter::add_row_text(const std::vector<std::string>& cells) {
  if (cells.size() != n_columns_)
    throw std::invalid_argument("CsvWriter: row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
  ++n_rows_;
}

std::string CsvWriter::str() const { return body_; }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= std::uint64_t(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

namespace {

void dump_json_rec(const nlohmann::json& value, int depth, std::string* out) {
  const std::string pad(std::size_t(depth) * 2, ' ');
  const std::string pad_in(std::size_t(depth + 1) * 2, ' ');
  switch (value.type()) {
    case nlohmann::json::value_t::number_float: {
      const double v = value.get<double>();
      // JSON has no representation for non-finite numbers; follow the
      // convention of serializing them as null.
      *out += std::isfinite(v) ? format_g17(v) : "null";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (value.empty()) {
        *out += "[]";
        return;
      }
      *out += "[\n";
      for (std::size_t i = 0; i < value.size(); ++i) {
        *out += pad_in;
        dump_json_rec(value[i], depth + 1, out);
        if (i + 1 < value.size()) *out += ',';
        *out += '\n';
      }
      *out += pad + "]";
      return;
    }
    case nlohmann::json::value_t::object: {
      if (value.empty()) {
        *out += "{}";
        return;
      }
      *out += "{\n";
      std::size_t i = 0;
      for (auto it = value.begin(); it != value.end(); ++it, ++i) {
        *out += pad_in;
        *out += nlohmann::json(it.key()).dump();  // quoted + escaped
        *out += ": ";
        dump_json_rec(it.value(), depth + 1, out);
        if (i + 1 < value.size()) *out += ',';
        *out += '\n';
      }
      *out += pad + "}";
      return;
    }
    default:
      // null, booleans, integers, strings: nlohmann's own rendering is
      // already canonical.
      *out += value.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& value) {
  std::string out;
  dump_json_rec(value, 0, &out);
  out += '\n';
  return out;
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream stream(path, std::ios::binary);
  if (!stream)
    throw std::runtime_error("write_file: cannot open " + path.string());
  stream.write(bytes.data(), std::streamsize(bytes.size()));
  if (!stream)
    throw std::runtime_error("write_file: short write to " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream stream(path, std::ios::binary);
  if (!stream)
    throw std::runtime_error("read_file: cannot open " + path.string());
  std::ostringstream buffer;
  buffer << stream.rdbuf();
  return buffer.str();
}

std::string gnuplot_script(const std::string& csv_file,
                           const std::string& title,
                           const std::string& xlabel,
                           const std::string& ylabel,
                           const std::vector<PlotSeries>& series,
                           bool loglog) {
  std::string out;
  out += "set datafile separator ','\n";
  out += "set title '" + title + "'\n";
  out += "set xlabel '" + xlabel + "'\n";
  out += "set ylabel '" + ylabel + "'\n";
  if (loglog) out += "set logscale xy\n";
  out += "set key top right\n";
  out += "plot ";
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (i > 0) out += ", \\\n     ";
    out += "'" + csv_file + "' using " + std::to_string(series[i].x_column) +
           ":" + std::to_string(series[i].y_column) +
           " skip 1 with linespoints title '" + series[i].label + "'";
  }
  out += "\n";
  return out;
}

}  // namespace mflab::io
