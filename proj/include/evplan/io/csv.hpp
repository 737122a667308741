#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "evplan/errors.hpp"

namespace evplan::io {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Header-addressed CSV table; cells are kept as text with their source line.
class CsvTable {
 public:
  struct Row {
    int line = 0;
    std::vector<std::string> cells;
  };

  static CsvTable parse(std::istream& in, const std::string& name) {
    CsvTable t;
    t.name_ = name;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      line = trim(line);
      if (line.empty() || line.front() == '#') continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
      if (line.back() == ',') cells.emplace_back();
      if (t.header_.empty()) {
        t.header_ = cells;
        continue;
      }
      if (cells.size() != t.header_.size())
        throw ParseError(name + ":" + std::to_string(n) + ": expected " + std::to_string(t.header_.size()) +
                         " fields, found " + std::to_string(cells.size()));
      t.rows_.push_back({n, std::move(cells)});
    }
    if (t.header_.empty()) throw ParseError(name + ": missing header row");
    return t;
  }

  static CsvTable read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return parse(in, path);
  }

  const std::vector<Row>& rows() const { return rows_; }
  const std::string& name() const { return name_; }

  std::size_t column(const std::string& field) const {
    const auto it = std::find(header_.begin(), header_.end(), field);
    if (it == header_.end()) throw ParseError(name_ + ": missing column '" + field + "'");
    return static_cast<std::size_t>(it - header_.begin());
  }

  bool has_column(const std::string& field) const {
    return std::find(header_.begin(), header_.end(), field) != header_.end();
  }

  double number(const Row& r, const std::string& field) const {
    const std::string& s = r.cells[column(field)];
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
      throw ParseError(name_ + ":" + std::to_string(r.line) + ": field '" + field + "' is not a number: '" + s + "'");
    return v;
  }

  int integer(const Row& r, const std::string& field) const {
    const std::string& s = r.cells[column(field)];
    int v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
      throw ParseError(name_ + ":" + std::to_string(r.line) + ": field '" + field + "' is not an integer: '" + s +
                       "'");
    return v;
  }

  const std::string& text(const Row& r, const std::string& field) const { return r.cells[column(field)]; }

 private:
  std::string name_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

// Fixed six-significant-digit rendering for CSV output.
inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvWriter& row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) throw ValidationError("CSV row width differs from its header");
    rows_.push_back(cells);
    return *this;
  }

  std::string str() const {
    std::string out;
    auto emit = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) out += ',';
        out += cells[k];
      }
      out += '\n';
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace evplan::io
