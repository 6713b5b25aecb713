#ifndef SCATTER_RECORDS_HPP
#define SCATTER_RECORDS_HPP

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace scatter {

inline constexpr const char* kProjectVersion = "0.1.0";

using Cell = std::variant<std::int64_t, double, bool, std::string>;

// Fixed shortest round-trip formatting so reruns are byte identical.
std::string format_double(double value);
std::string cell_to_string(const Cell& cell);

// Streams records as CSV (with a config-hash comment and a header row) or as
// JSON lines. Row order is the caller's responsibility.
class RecordWriter {
 public:
  enum class Format { Csv, Jsonl };

  RecordWriter(const std::string& path, Format format,
               const std::string& config_hash,
               std::vector<std::string> columns);

  void row(const std::vector<Cell>& cells);
  void close();

 private:
  std::ofstream out_;
  Format format_;
  std::vector<std::string> columns_;
};

}  // namespace scatter

#endif
