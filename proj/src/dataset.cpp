//
// Copyright 2026 The dprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "dprep/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "dprep/error.hpp"

namespace dprep {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

// Splits one record. Double-quoted fields may contain the delimiter; a doubled
// quote inside quotes is a literal quote.
std::vector<std::string> SplitRecord(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.emplace_back(Trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.emplace_back(Trim(current));
  return fields;
}

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

bool IsMissing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null";
}

}  // namespace

Schema Schema::Parse(std::string_view text) {
  Schema schema;
  int line_no = 0;
  for (std::string_view raw : Lines(text)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = SplitRecord(line, ',');
    if (fields.size() != 2) {
      throw DataError("schema line " + std::to_string(line_no) +
                      ": expected `column,kind`");
    }
    ColumnKind kind;
    if (fields[1] == "numeric") {
      kind = ColumnKind::kNumeric;
    } else if (fields[1] == "categorical") {
      kind = ColumnKind::kCategorical;
    } else {
      throw DataError("schema line " + std::to_string(line_no) + ": unknown kind '" +
                      fields[1] + "' (numeric | categorical)");
    }
    schema.kinds[fields[0]] = kind;
  }
  return schema;
}

Schema Schema::Load(const std::string& path) { return Parse(ReadFile(path)); }

ColumnKind Schema::KindOf(const std::string& column) const {
  auto it = kinds.find(column);
  return it == kinds.end() ? ColumnKind::kNumeric : it->second;
}

Dataset::Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
                 std::map<std::string, std::vector<std::string>> categorical_groups)
    : names_(std::move(names)), columns_(std::move(columns)), groups_(std::move(categorical_groups)) {
  if (names_.size() != columns_.size()) {
    throw InvalidArgument("dataset: names and columns differ in count");
  }
  if (names_.empty()) throw InvalidArgument("dataset: no columns");
  rows_ = columns_.front().size();
  if (rows_ == 0) throw DataError("dataset: no rows");
  for (std::size_t j = 0; j < names_.size(); ++j) {
    if (columns_[j].size() != rows_) {
      throw DataError("dataset: column '" + names_[j] + "' has " +
                      std::to_string(columns_[j].size()) + " rows, expected " +
                      std::to_string(rows_));
    }
    if (!index_.emplace(names_[j], j).second) {
      throw DataError("dataset: duplicate column '" + names_[j] + "'");
    }
  }
}

bool Dataset::HasColumn(const std::string& name) const { return index_.count(name) > 0; }

const std::vector<double>& Dataset::Column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown column '" + name + "'");
  return columns_[it->second];
}

Dataset Dataset::SelectRows(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> cols(columns_.size());
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    cols[j].reserve(rows.size());
    for (std::size_t r : rows) cols[j].push_back(columns_[j].at(r));
  }
  return Dataset(names_, std::move(cols), groups_);
}

Dataset Dataset::WithValue(std::size_t row, const std::string& column, double value) const {
  Dataset copy = *this;
  auto it = copy.index_.find(column);
  if (it == copy.index_.end()) throw InvalidArgument("unknown column '" + column + "'");
  copy.columns_[it->second].at(row) = value;
  return copy;
}

Dataset EncodeCategoricals(std::string_view table_text, const Schema& schema, char delimiter) {
  auto lines = Lines(table_text);
  while (!lines.empty() && Trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw DataError("table: missing header row");

  const std::vector<std::string> header = SplitRecord(lines[0], delimiter);
  for (const auto& [name, kind] : schema.kinds) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw DataError("schema names column '" + name + "' which is not in the table");
    }
  }

  std::vector<std::vector<std::string>> cells(header.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) {
      throw DataError("table: blank line at row " + std::to_string(i));
    }
    auto fields = SplitRecord(lines[i], delimiter);
    if (fields.size() != header.size()) {
      throw DataError("table row " + std::to_string(i) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (IsMissing(fields[j])) {
        throw DataError("table row " + std::to_string(i) + ", column '" + header[j] +
                        "': missing value");
      }
      cells[j].push_back(std::move(fields[j]));
    }
  }
  if (cells.empty() || cells[0].empty()) throw DataError("table: no data rows");

  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
  std::map<std::string, std::vector<std::string>> groups;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string& name = header[j];
    if (schema.KindOf(name) == ColumnKind::kNumeric) {
      std::vector<double> values;
      values.reserve(cells[j].size());
      for (std::size_t i = 0; i < cells[j].size(); ++i) {
        const std::string& cell = cells[j][i];
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) {
          throw DataError("table row " + std::to_string(i + 1) + ", column '" + name +
                          "': not a number: '" + cell + "'");
        }
        values.push_back(v);
      }
      names.push_back(name);
      columns.push_back(std::move(values));
      continue;
    }
    std::set<std::string> levels(cells[j].begin(), cells[j].end());
    if (levels.size() < 2) {
      throw DataError("categorical column '" + name + "' is constant");
    }
    auto level = levels.begin();
    ++level;  // reference level
    for (; level != levels.end(); ++level) {
      std::vector<double> indicator;
      indicator.reserve(cells[j].size());
      for (const auto& cell : cells[j]) indicator.push_back(cell == *level ? 1.0 : 0.0);
      const std::string indicator_name = name + "_" + *level;
      names.push_back(indicator_name);
      groups[name].push_back(indicator_name);
      columns.push_back(std::move(indicator));
    }
  }
  return Dataset(std::move(names), std::move(columns), std::move(groups));
}

Dataset ReadTable(const std::string& path, const Schema& schema, char delimiter) {
  return EncodeCategoricals(ReadFile(path), schema, delimiter);
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace dprep
