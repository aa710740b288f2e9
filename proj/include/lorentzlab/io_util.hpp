#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace lorentzlab::io {

// Shortest %.12g rendering; identical across platforms for identical doubles.
std::string format_value(double v);
std::string format_value(std::uint64_t v);
std::string format_value(std::int64_t v);

// FNV-1a 64-bit over the raw bytes, rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(const std::string& bytes);

void ensure_directory(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// CSV with a mandatory header row.  Separator ',', line ending '\n', values
// rendered via format_value so identical data produces identical bytes.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::size_t width_;
  std::string path_;
};

}  // namespace lorentzlab::io
