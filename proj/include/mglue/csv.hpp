#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace mglue {

/// Shortest round-trip-safe representation (%.17g), locale independent.
std::string fmt(double v);
std::string fmt(long double v);
inline std::string fmt(const std::string& s) { return s; }
inline std::string fmt(const char* s) { return s; }
std::string fmt(std::uint64_t v);
std::string fmt(std::int64_t v);
inline std::string fmt(unsigned v) { return fmt(static_cast<std::uint64_t>(v)); }
inline std::string fmt(int v) { return fmt(static_cast<std::int64_t>(v)); }
inline std::string fmt(unsigned long long v) { return fmt(static_cast<std::uint64_t>(v)); }
inline std::string fmt(long long v) { return fmt(static_cast<std::int64_t>(v)); }
inline std::string fmt(bool v) { return v ? "1" : "0"; }

/// Quote a field if it contains a separator, quote or newline.
std::string csv_escape(const std::string& field);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  template <typename... Ts>
  void row(const Ts&... fields) {
    std::vector<std::string> cells{fmt(fields)...};
    write_cells(cells);
  }
  void write_cells(const std::vector<std::string>& cells);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace mglue
