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

#ifndef DPREP_DATASET_HPP_
#define DPREP_DATASET_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dprep {

enum class ColumnKind { kNumeric, kCategorical };

// Declares the kind of each input column. Columns not listed are numeric.
//
// Text form, one declaration per line, `#` starts a comment:
//   sex,categorical
//   income,numeric
struct Schema {
  std::map<std::string, ColumnKind> kinds;

  static Schema Parse(std::string_view text);
  static Schema Load(const std::string& path);
  ColumnKind KindOf(const std::string& column) const;
};

// Column-major numeric table. Categorical inputs have already been expanded
// into 0/1 indicator columns; `categorical_groups()` maps each original
// categorical column to its indicator columns in level order.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
          std::map<std::string, std::vector<std::string>> categorical_groups = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  bool HasColumn(const std::string& name) const;
  const std::vector<double>& Column(const std::string& name) const;
  const std::vector<double>& Column(std::size_t index) const { return columns_.at(index); }
  const std::map<std::string, std::vector<std::string>>& categorical_groups() const {
    return groups_;
  }

  // Rows in the given order; categorical groups are carried over.
  Dataset SelectRows(std::span<const std::size_t> rows) const;
  // Copy with one cell replaced.
  Dataset WithValue(std::size_t row, const std::string& column, double value) const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::string>> groups_;
  std::size_t rows_ = 0;
};

// Parses a delimited table (header row first) and one-hot encodes the
// categorical columns. Each categorical column with levels sorted as
// l0 < l1 < ... gets indicators `<col>_<l1>`, `<col>_<l2>`, ...; l0 is the
// reference level. Empty or NA cells are rejected with the row and column.
Dataset EncodeCategoricals(std::string_view table_text, const Schema& schema,
                           char delimiter = ',');

Dataset ReadTable(const std::string& path, const Schema& schema, char delimiter = ',');

std::string ReadFile(const std::string& path);

}  // namespace dprep

#endif  // DPREP_DATASET_HPP_
