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

#include <gtest/gtest.h>

#include "sensitivity_probe.hpp"

namespace dprep::testing {
namespace {

TEST(Sensitivity, SingleRowReplacementMovesCountByAtMostOne) {
  const ProbeResult r = RunSensitivityProbe();
  EXPECT_EQ(r.neighbors, 12 * 125);
  EXPECT_LE(r.max_delta_s, 1);
  // The probe must actually move things, otherwise the bound is vacuous.
  EXPECT_GT(r.s_changes, 0);
}

TEST(Sensitivity, SingleRowReplacementMovesMeanOverlapByAtMostOneOverM) {
  const ProbeResult r = RunSensitivityProbe();
  EXPECT_LE(r.max_delta_nu, 1.0 / 3.0 + 1e-12);
  EXPECT_GT(r.nu_changes, 0);
  EXPECT_GT(r.max_delta_nu, 0.05);
}

TEST(Sensitivity, HoldsForOtherDatasets) {
  for (uint64_t seed : {1u, 7u, 99u}) {
    const ProbeResult r = RunSensitivityProbe(seed);
    EXPECT_LE(r.max_delta_s, 1) << seed;
    EXPECT_LE(r.max_delta_nu, 1.0 / 3.0 + 1e-12) << seed;
  }
}

}  // namespace
}  // namespace dprep::testing
