#pragma once

// Comma-separated text I/O: '#' comment lines, '.' decimals, LF endings.
// Numbers are written in the shortest form that parses back bit-identically.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "obf/error.hpp"

namespace obf::io {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string quote_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

inline CsvTable parse_csv(std::istream& in, std::string_view source = "input") {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      t.comments.push_back(line.substr(1));
      continue;
    }
    auto fields = split_csv_line(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != t.header.size())
      throw Error(ErrorKind::Parse, std::string(source) + " line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw Error(ErrorKind::Parse, std::string(source) + ": no header row");
  return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  return parse_csv(in, path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes to "<path>.tmp" and renames over the target on commit().
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path) : path_(std::move(path)), tmp_(path_) {
    tmp_ += ".tmp";
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw std::runtime_error("cannot write " + tmp_.string());
  }
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

  std::ostream& stream() { return out_; }

  void commit() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed for " + tmp_.string());
    out_.close();
    std::filesystem::rename(tmp_, path_);
    committed_ = true;
  }

 private:
  std::filesystem::path path_;
  std::filesystem::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << quote_field(fields[i]);
  }
  os << '\n';
}

// Samples x features numeric matrix with binary labels, stored column-major.
struct Dataset {
  std::vector<std::string> features;
  std::size_t n_samples = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> labels;

  std::span<const double> column(std::size_t f) const { return {values.data() + f * n_samples, n_samples}; }
};

namespace detail {

inline std::uint8_t parse_label(std::string_view cell, const std::string& where) {
  const auto v = parse_double(cell);
  if (!v || (*v != 0.0 && *v != 1.0)) throw Error(ErrorKind::Parse, where + ": label must be 0 or 1, got '" + std::string(cell) + "'");
  return static_cast<std::uint8_t>(*v);
}

inline double parse_cell(std::string_view cell, const std::string& where) {
  const auto v = parse_double(cell);
  if (!v || !std::isfinite(*v)) throw Error(ErrorKind::Parse, where + ": not a finite number: '" + std::string(cell) + "'");
  return *v;
}

inline void check_classes(const Dataset& d) {
  std::size_t c1 = 0;
  for (auto l : d.labels) c1 += l;
  const std::size_t c0 = d.labels.size() - c1;
  if (c0 < 2 || c1 < 2)
    throw Error(ErrorKind::Parse, "dataset needs at least 2 samples per class (found " + std::to_string(c0) + " and " +
                                      std::to_string(c1) + ")");
}

}  // namespace detail

// Samples in rows with a label column, or with transpose=true features in
// rows: first column the feature name, one row named like the label column.
inline Dataset dataset_from_csv(const CsvTable& t, std::string_view label_column = "label", bool transpose = false,
                                std::string_view source = "dataset") {
  Dataset d;
  const std::string src(source);
  if (!transpose) {
    const auto lc = t.column(label_column);
    if (!lc) throw Error(ErrorKind::Parse, src + ": no '" + std::string(label_column) + "' column in header");
    for (std::size_t c = 0; c < t.header.size(); ++c)
      if (c != *lc) d.features.push_back(t.header[c]);
    d.n_samples = t.rows.size();
    d.values.resize(d.features.size() * d.n_samples);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string line = src + " line " + std::to_string(t.line_numbers[r]);
      std::size_t f = 0;
      for (std::size_t c = 0; c < t.header.size(); ++c) {
        if (c == *lc) {
          d.labels.push_back(detail::parse_label(t.rows[r][c], line + " column '" + t.header[c] + "'"));
        } else {
          d.values[f * d.n_samples + r] = detail::parse_cell(t.rows[r][c], line + " column '" + t.header[c] + "'");
          ++f;
        }
      }
    }
  } else {
    if (t.header.size() < 2) throw Error(ErrorKind::Parse, src + ": transposed layout needs a name column and samples");
    d.n_samples = t.header.size() - 1;
    bool have_labels = false;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string line = src + " line " + std::to_string(t.line_numbers[r]);
      const auto& row = t.rows[r];
      if (row[0] == label_column) {
        for (std::size_t c = 1; c < row.size(); ++c)
          d.labels.push_back(detail::parse_label(row[c], line + " column " + std::to_string(c + 1)));
        have_labels = true;
        continue;
      }
      d.features.push_back(row[0]);
      for (std::size_t c = 1; c < row.size(); ++c)
        d.values.push_back(detail::parse_cell(row[c], line + " column " + std::to_string(c + 1)));
    }
    if (!have_labels) throw Error(ErrorKind::Parse, src + ": no row named '" + std::string(label_column) + "'");
  }
  if (d.features.empty()) throw Error(ErrorKind::Parse, src + ": no feature columns");
  detail::check_classes(d);
  return d;
}

inline Dataset read_dataset(const std::filesystem::path& path, std::string_view label_column = "label",
                            bool transpose = false) {
  return dataset_from_csv(read_csv(path), label_column, transpose, path.string());
}

}  // namespace obf::io
