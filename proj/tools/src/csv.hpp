#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace immsim::cli {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// In-memory CSV table; rows are written in one go by the single writer.
class CsvTable {
 public:
  explicit CsvTable(std::string header) : text_(std::move(header) + "\n") {}

  CsvTable& cell(double v) { return raw(format_number(v)); }
  CsvTable& cell(std::size_t v) { return raw(std::to_string(v)); }
  CsvTable& cell(bool v) { return raw(v ? "1" : "0"); }

  void end_row() {
    text_ += '\n';
    fresh_ = true;
  }

  const std::string& text() const noexcept { return text_; }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    out << text_;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }

 private:
  CsvTable& raw(const std::string& s) {
    if (!fresh_) text_ += ',';
    text_ += s;
    fresh_ = false;
    return *this;
  }

  std::string text_;
  bool fresh_ = true;
};

}  // namespace immsim::cli
