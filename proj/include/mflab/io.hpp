// Reproducible text artifacts.  Every numeric cell is printed with 17
// significant digits (enough to round-trip a double exactly), CSV and
// JSON bytes are deterministic functions of the data, and a 64-bit
// FNV-1a hash fingerprints configurations inside run manifests.
#ifndef MFLAB_IO_HPP
#define MFLAB_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace mflab::io {

/// "%.17g" — full-precision decimal text for a double.
std::string format_g17(double value);

/// Comma-separated table with deterministic bytes: header line plus one
/// line per row, '\n' terminated, numbers formatted with format_g17.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  /// Appends a row of numbers (must match the column count).
  void add_row(const std::vector<double>& values);

  /// Appends a row of preformatted cells (must match the column count).
  void add_row_text(const std::vector<std::string>& cells);

  std::string str() const;
  std::size_t rows() const { return n_rows_; }

 private:
  std::size_t n_columns_ = 0;
  std::size_t n_rows_ = 0;
  std::string body_;
};

/// 64-bit FNV-1a over the bytes.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

/// Serializes a JSON document with sorted keys, two-space indentation,
/// and every floating-point number rendered through format_g17, so the
/// bytes depend only on the values.
std::string dump_json(const nlohmann::json& value);

/// Writes bytes to path, creating parent directories.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Reads a whole file; throws std::runtime_error if unreadable.
std::string read_file(const std::filesystem::path& path);

/// One curve of a plot script: 1-based CSV column indices and a legend
/// label.
struct PlotSeries {
  int x_column = 1;
  int y_column = 2;
  std::string label;
};

/// A gnuplot command file rendering columns of a CSV; log-log axes for
/// the slope experiments, linear otherwise.
std::string gnuplot_script(const std::string& csv_file,
                           const std::string& title,
                           const std::string& xlabel,
                           const std::string& ylabel,
                           const std::vector<PlotSeries>& series,
                           bool loglog);

}  // namespace mflab::io

#endif  // MFLAB_IO_HPP
