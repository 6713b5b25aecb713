#include "scatter/records.hpp"

#include <cstdio>

#include "scatter/common.hpp"

namespace scatter {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string cell_to_string(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  if (const auto* b = std::get_if<bool>(&cell)) return *b ? "1" : "0";
  return std::get<std::string>(cell);
}

RecordWriter::RecordWriter(const std::string& path, Format format,
                           const std::string& config_hash,
                           std::vector<std::string> columns)
    : out_(path), format_(format), columns_(std::move(columns)) {
  if (!out_) throw ConfigError("cannot open output file " + path);
  if (format_ == Format::Csv) {
    out_ << "# config_hash=" << config_hash << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      out_ << (i ? "," : "") << columns_[i];
    }
    out_ << "\n";
  }
}

void RecordWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_.size()) {
    throw ConfigError("record writer: cell count does not match header");
  }
  if (format_ == Format::Csv) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      out_ << (i ? "," : "") << cell_to_string(cells[i]);
    }
    out_ << "\n";
    return;
  }
  out_ << "{";
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out_ << (i ? "," : "") << "\"" << columns_[i] << "\":";
    if (const auto* s = std::get_if<std::string>(&cells[i])) {
      out_ << "\"" << *s << "\"";
    } else if (const auto* b = std::get_if<bool>(&cells[i])) {
      out_ << (*b ? "true" : "false");
    } else {
      out_ << cell_to_string(cells[i]);
    }
  }
  out_ << "}\n";
}

void RecordWriter::close() { out_.close(); }

}  // namespace scatter
