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

#ifndef DPREP_PARTITION_HPP_
#define DPREP_PARTITION_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dprep/dataset.hpp"

namespace dprep {

// Random, even, disjoint split of N rows into M subsets. Subset sizes differ
// by at most one; the first N mod M subsets hold the extra rows. The
// assignment is a pure function of (N, M, seed).
class PartitionPlan {
 public:
  std::size_t rows() const { return assignment_.size(); }
  std::size_t subsets() const { return subsets_; }
  uint64_t seed() const { return seed_; }
  const std::vector<uint32_t>& assignment() const { return assignment_; }

  std::size_t SubsetSize(std::size_t l) const;
  // Row indices of subset l in ascending (original) order.
  std::vector<std::size_t> SubsetRows(std::size_t l) const;

  // `seed=<u64> M=<m> N=<n>`; the assignment is recomputed on parse.
  std::string ToRecord() const;
  static PartitionPlan FromRecord(std::string_view record);

 private:
  friend PartitionPlan MakePartition(std::size_t, std::size_t, uint64_t);
  std::size_t subsets_ = 0;
  uint64_t seed_ = 0;
  std::vector<uint32_t> assignment_;
};

PartitionPlan MakePartition(std::size_t n_rows, std::size_t n_subsets, uint64_t seed);

Dataset SubsetView(const Dataset& d, const PartitionPlan& plan, std::size_t l);

}  // namespace dprep

#endif  // DPREP_PARTITION_HPP_
