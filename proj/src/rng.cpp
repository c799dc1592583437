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

#include "dprep/rng.hpp"

#include <cmath>

namespace dprep {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> ctr,
                                   std::array<uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * ctr[0];
    const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * ctr[2];
    const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
    const uint32_t lo0 = static_cast<uint32_t>(p0);
    const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
    const uint32_t lo1 = static_cast<uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(uint64_t root_seed) : root_seed_(root_seed) { Rekey(); }

RngStream::RngStream(uint64_t root_seed, std::vector<PathElement> path)
    : root_seed_(root_seed), path_(std::move(path)) {
  Rekey();
}

RngStream RngStream::Child(std::string_view purpose, uint64_t index) const {
  std::vector<PathElement> path = path_;
  path.push_back({std::string(purpose), index});
  return RngStream(root_seed_, std::move(path));
}

std::string RngStream::PathString() const {
  std::string out = std::to_string(root_seed_);
  for (const auto& e : path_) {
    out += "/" + e.purpose + ":" + std::to_string(e.index);
  }
  return out;
}

// Two independent 64-bit digests of (seed, path): one becomes the Philox
// key, the other the high half of the counter.
void RngStream::Rekey() {
  uint64_t a = SplitMix64(root_seed_ ^ 0x6A09E667F3BCC908ull);
  uint64_t b = SplitMix64(root_seed_ ^ 0xBB67AE8584CAA73Bull);
  for (const auto& e : path_) {
    const uint64_t label = Fnv1a(e.purpose);
    a = SplitMix64(a ^ label);
    a = SplitMix64(a ^ e.index);
    b = SplitMix64(b + label * 0x9E3779B97F4A7C15ull);
    b = SplitMix64(b + e.index);
  }
  key_ = {static_cast<uint32_t>(a), static_cast<uint32_t>(a >> 32)};
  stream_id_ = b;
  block_ = 0;
  buffered_ = 0;
}

uint64_t RngStream::NextU64() {
  if (buffered_ < 2) {
    buffer_ = Philox4x32({static_cast<uint32_t>(block_),
                          static_cast<uint32_t>(block_ >> 32),
                          static_cast<uint32_t>(stream_id_),
                          static_cast<uint32_t>(stream_id_ >> 32)},
                         key_);
    ++block_;
    buffered_ = 4;
  }
  const int i = 4 - buffered_;
  buffered_ -= 2;
  return (static_cast<uint64_t>(buffer_[i + 1]) << 32) | buffer_[i];
}

// (k + 1/2) / 2^52 is exact in a double, so the result is never 0 or 1 and
// the lattice is symmetric about 1/2.
double RngStream::Uniform() {
  return (static_cast<double>(NextU64() >> 12) + 0.5) * 0x1p-52;
}

// Box-Muller; always consumes exactly two uniforms.
double RngStream::Normal() {
  const double u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Marsaglia & Tsang (2000), with the u^(1/shape) boost for shape < 1.
double RngStream::Gamma(double shape) {
  if (shape < 1.0) {
    const double g = Gamma(shape + 1.0);
    return g * std::pow(Uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = Normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = Uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::Beta(double a, double b) {
  const double x = Gamma(a);
  const double y = Gamma(b);
  if (x + y == 0.0) return Uniform() < a / (a + b) ? 1.0 : 0.0;  // both underflowed
  return x / (x + y);
}

}  // namespace dprep
