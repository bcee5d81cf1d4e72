#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "octoarm/core.hpp"

namespace octoarm {

// Minimal CSV writer.  Numbers are printed with %.17g so a rerun with the
// same seed produces byte-identical files.
class CsvWriter {
 public:
  CsvWriter() = default;

  void open(const std::string& path, const std::vector<std::string>& header) {
    out_.open(path);
    if (!out_) throw ConfigError("cannot open output file: " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      std::snprintf(buf, sizeof buf, "%.17g", values[i]);
      out_ << buf;
    }
    out_ << '\n';
  }

  bool is_open() const { return out_.is_open(); }
  void close() { if (out_.is_open()) out_.close(); }

 private:
  std::ofstream out_;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

}  // namespace octoarm
