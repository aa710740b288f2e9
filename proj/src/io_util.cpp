#include "lorentzlab/io_util.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "lorentzlab/errors.hpp"

namespace lorentzlab::io {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_value(std::uint64_t v) { return std::to_string(v); }

std::string format_value(std::int64_t v) { return std::to_string(v); }

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) {
    throw ConfigError("cannot create directory '" + path + "': " + ec.message());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw ConfigError("read failed for '" + path + "'");
  return ss.str();
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc), width_(header.size()), path_(path) {
  if (!out_) throw ConfigError("cannot open '" + path + "' for writing");
  if (header.empty()) throw ConfigError("csv header must not be empty");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) {
    throw ConfigError("csv row width mismatch in '" + path_ + "'");
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void CsvWriter::close() {
  if (!out_.is_open()) return;
  out_.close();
  if (!out_) throw ConfigError("write failed for '" + path_ + "'");
}

}  // namespace lorentzlab::io
