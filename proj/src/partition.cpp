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

#include "dprep/partition.hpp"

#include <numeric>
#include <sstream>

#include "dprep/error.hpp"
#include "dprep/rng.hpp"

namespace dprep {
namespace {

// Unbiased integer in [0, bound) (Lemire's multiply-and-reject).
uint64_t UniformBelow(RngStream& rng, uint64_t bound) {
  const uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const unsigned __int128 m = static_cast<unsigned __int128>(rng.NextU64()) * bound;
    if (static_cast<uint64_t>(m) >= threshold) return static_cast<uint64_t>(m >> 64);
  }
}

}  // namespace

PartitionPlan MakePartition(std::size_t n_rows, std::size_t n_subsets, uint64_t seed) {
  if (n_subsets < 1) throw InvalidArgument("partition: M must be at least 1");
  if (n_subsets > n_rows) {
    throw InvalidArgument("partition: M = " + std::to_string(n_subsets) +
                          " exceeds the number of rows N = " + std::to_string(n_rows) +
                          " (need 1 <= M <= N)");
  }
  std::vector<std::size_t> perm(n_rows);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RngStream rng = RngStream(seed).Child("partition");
  for (std::size_t i = n_rows; i > 1; --i) {
    const auto j = static_cast<std::size_t>(UniformBelow(rng, i));
    std::swap(perm[i - 1], perm[j]);
  }

  PartitionPlan plan;
  plan.subsets_ = n_subsets;
  plan.seed_ = seed;
  plan.assignment_.assign(n_rows, 0);
  const std::size_t base = n_rows / n_subsets;
  const std::size_t extra = n_rows % n_subsets;
  std::size_t pos = 0;
  for (std::size_t l = 0; l < n_subsets; ++l) {
    const std::size_t size = base + (l < extra ? 1 : 0);
    for (std::size_t k = 0; k < size; ++k) {
      plan.assignment_[perm[pos++]] = static_cast<uint32_t>(l);
    }
  }
  return plan;
}

std::size_t PartitionPlan::SubsetSize(std::size_t l) const {
  if (l >= subsets_) throw InvalidArgument("partition: subset index out of range");
  return rows() / subsets_ + (l < rows() % subsets_ ? 1 : 0);
}

std::vector<std::size_t> PartitionPlan::SubsetRows(std::size_t l) const {
  if (l >= subsets_) throw InvalidArgument("partition: subset index out of range");
  std::vector<std::size_t> out;
  out.reserve(SubsetSize(l));
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] == l) out.push_back(i);
  }
  return out;
}

std::string PartitionPlan::ToRecord() const {
  std::ostringstream out;
  out << "seed=" << seed_ << " M=" << subsets_ << " N=" << rows();
  return out.str();
}

PartitionPlan PartitionPlan::FromRecord(std::string_view record) {
  std::istringstream in{std::string(record)};
  std::string token;
  uint64_t seed = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  int seen = 0;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw InvalidArgument("partition record: bad token " + token);
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    try {
      if (key == "seed") {
        seed = std::stoull(value);
        seen |= 1;
      } else if (key == "M") {
        m = std::stoull(value);
        seen |= 2;
      } else if (key == "N") {
        n = std::stoull(value);
        seen |= 4;
      } else {
        throw InvalidArgument("partition record: unknown key " + key);
      }
    } catch (const std::logic_error&) {
      throw InvalidArgument("partition record: bad value in " + token);
    }
  }
  if (seen != 7) throw InvalidArgument("partition record: need seed, M and N");
  return MakePartition(n, m, seed);
}

Dataset SubsetView(const Dataset& d, const PartitionPlan& plan, std::size_t l) {
  if (d.rows() != plan.rows()) {
    throw InvalidArgument("partition: plan covers " + std::to_string(plan.rows()) +
                          " rows but the dataset has " + std::to_string(d.rows()));
  }
  const auto rows = plan.SubsetRows(l);
  return d.SelectRows(rows);
}

}  // namespace dprep
