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

#ifndef DPREP_RNG_HPP_
#define DPREP_RNG_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dprep {

// Philox4x32 with 10 rounds. Stateless: maps (counter, key) to 128 random bits.
std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key);

// A reproducible random stream addressed by a root seed and a path of
// (purpose, index) labels. Two streams with the same seed and path produce
// the same sequence; streams with different paths are keyed independently, so
// work split over paths can run on any number of threads and still give
// bit-identical results.
//
// Not thread-safe; derive one stream per thread instead of sharing.
class RngStream {
 public:
  struct PathElement {
    std::string purpose;
    uint64_t index;
  };

  explicit RngStream(uint64_t root_seed);

  // Returns the stream at path() + (purpose, index). `this` is not advanced.
  RngStream Child(std::string_view purpose, uint64_t index = 0) const;

  uint64_t root_seed() const { return root_seed_; }
  const std::vector<PathElement>& path() const { return path_; }
  std::string PathString() const;

  uint64_t NextU64();
  // Uniform on the open interval (0, 1), 52-bit resolution.
  double Uniform();
  double Normal();
  double Gamma(double shape);
  double Beta(double a, double b);

 private:
  RngStream(uint64_t root_seed, std::vector<PathElement> path);
  void Rekey();

  uint64_t root_seed_;
  std::vector<PathElement> path_;
  std::array<uint32_t, 2> key_{};
  uint64_t stream_id_ = 0;
  uint64_t block_ = 0;
  std::array<uint32_t, 4> buffer_{};
  int buffered_ = 0;
};

}  // namespace dprep

#endif  // DPREP_RNG_HPP_
