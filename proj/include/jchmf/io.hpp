#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jchmf/sweep.hpp"

namespace jchmf {

/// 17 significant digits, locale independent ("%.17g" without the locale).
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Minimal CSV builder: LF line endings, header always written, no quoting
/// (callers only emit numbers and plain identifiers).
class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> columns) : columns_(columns.size()) {
    row_begin();
    for (const auto& c : columns) cell(c);
    row_end();
  }

  CsvWriter& cell(std::string_view s) {
    if (fields_in_row_++) text_ += ',';
    text_ += s;
    return *this;
  }
  CsvWriter& cell(double v) { return cell(format_double(v)); }
  CsvWriter& cell(int v) { return cell(std::to_string(v)); }
  CsvWriter& cell(std::size_t v) { return cell(std::to_string(v)); }

  void row_end() {
    if (fields_in_row_ != columns_)
      throw std::logic_error("CsvWriter: row has " + std::to_string(fields_in_row_) + " fields, expected " +
                             std::to_string(columns_));
    text_ += '\n';
    row_begin();
  }

  const std::string& text() const { return text_; }

private:
  void row_begin() { fields_in_row_ = 0; }

  std::size_t columns_;
  std::size_t fields_in_row_ = 0;
  std::string text_;
};

/// Plain (P2) 8-bit graymap of psi*: rows are mu from mu_max (top) down to
/// mu_min, columns are k ascending; gray = round(255 psi / max psi).
inline std::string phase_pgm(const SweepResult& r) {
  const SweepSpec& s = r.spec;
  double top = 0.0;
  for (const auto& c : r.grid) top = std::max(top, c.psi_star);
  std::string out = "P2\n";
  out += "# max psi_star = " + format_double(top) + " (gray 255)\n";
  out += "# rows: mu " + format_double(s.mu_max) + " (top) to " + format_double(s.mu_min) +
         "; columns: k " + format_double(s.k_min) + " to " + format_double(s.k_max) + "\n";
  out += std::to_string(s.k_points) + " " + std::to_string(s.mu_points) + "\n255\n";
  for (std::size_t row = 0; row < s.mu_points; ++row) {
    const std::size_t i = s.mu_points - 1 - row;
    for (std::size_t j = 0; j < s.k_points; ++j) {
      const double psi = r.at(i, j).psi_star;
      const long gray = top > 0.0 ? std::lround(255.0 * psi / top) : 0;
      if (j) out += ' ';
      out += std::to_string(gray);
    }
    out += '\n';
  }
  return out;
}

/// Writes text verbatim (binary mode, so LF stays LF), creating parent directories.
inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace jchmf
