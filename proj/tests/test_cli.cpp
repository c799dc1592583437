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

// Contract tests that drive the built command-line tool as a subprocess.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::json;

const std::vector<std::string> kCustodianKeys = {"S", "W", "nu_per_subset", "coefficients",
                                                 "nu_bar", "subset_intervals", "seed"};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dprep_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    WriteData(Path("data.csv"), 400);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  static void WriteData(const std::string& path, std::size_t n) {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::ofstream out(path);
    out.precision(17);
    out << "y,x1,x2,x3\n";
    for (std::size_t i = 0; i < n; ++i) {
      const double x1 = u(gen), x2 = 5.0 + z(gen), x3 = i % 2;
      out << 2 * x1 + 0.9 * x2 + 3 * x3 + 3 * z(gen) << ',' << x1 << ',' << x2 << ',' << x3 << '\n';
    }
  }

  // Runs the tool with stderr captured; returns the exit status.
  int Run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + " '" DPREP_CLI_PATH "' " + args + " 2> '" + Path("stderr.txt") + "'";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  }

  std::string Stderr() const { return Slurp(Path("stderr.txt")); }

  static std::string Slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static int Lines(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) n += line.empty() ? 0 : 1;
    return n;
  }

  std::string AdArgs(const std::string& out, double eps = 0.6) const {
    std::ostringstream a;
    a << "ad-verify --input '" << Path("data.csv") << "' --model 'y ~ x1 + x2 + x3' --coef x2"
      << " --region 0.5:1.5 --M 10 --epsilon " << eps << " --mcmc simulation --seed 9"
      << " --out '" << Path(out) << "'";
    return a.str();
  }

  std::string AmArgs(const std::string& out) const {
    return "am-verify --input '" + Path("data.csv") +
           "' --model 'y ~ x1 + x2 + x3' --model-alt 'y ~ x1 + x2' --coef x2 --M 10"
           " --epsilon 0.5 --grid-points 2001 --invert-null 0.3,400 --seed 9 --out '" +
           Path(out) + "'";
  }

  fs::path dir_;
};

bool ContainsKeyAnywhere(const Json& j, const std::string& key) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == key || ContainsKeyAnywhere(it.value(), key)) return true;
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (ContainsKeyAnywhere(v, key)) return true;
    }
  }
  return false;
}

Json StripTimestamps(Json j) {
  j["provenance"].erase("timestamp");
  j["released"].erase("ledger_timestamp");
  return j;
}

TEST_F(Cli, SubsetCountAboveRowCountIsAConfigError) {
  const std::string args = "ad-verify --input '" + Path("data.csv") +
                           "' --model 'y ~ x1' --coef x1 --region 0:1 --M 401 --epsilon 1"
                           " --seed 1 --ledger '" + Path("ledger.jsonl") + "' --budget-cap 1 --out '" +
                           Path("r.json") + "'";
  EXPECT_EQ(Run(args), 2);
  EXPECT_NE(Stderr().find("M <= N"), std::string::npos) << Stderr();
  EXPECT_FALSE(fs::exists(Path("r.json")));
  EXPECT_EQ(Lines(Path("ledger.jsonl")), 0);
}

TEST_F(Cli, SecondReleaseOverCapIsRefused) {
  const std::string ledger = " --ledger '" + Path("ledger.jsonl") + "' --budget-cap 1";
  ASSERT_EQ(Run(AdArgs("a.json") + ledger), 0) << Stderr();
  EXPECT_EQ(Run(AdArgs("b.json") + ledger), 3);
  EXPECT_NE(Stderr().find("budget"), std::string::npos) << Stderr();
  EXPECT_FALSE(fs::exists(Path("b.json")));
  EXPECT_EQ(Lines(Path("ledger.jsonl")), 1);

  ASSERT_EQ(Run("budget-status --ledger '" + Path("ledger.jsonl") + "' --budget-cap 1 --out '" +
                Path("status.json") + "'"),
            0)
      << Stderr();
  const Json status = Json::parse(Slurp(Path("status.json")));
  EXPECT_DOUBLE_EQ(status["epsilon_spent"].get<double>(), 0.6);
  EXPECT_EQ(status["releases"], 1);
}

TEST_F(Cli, LedgerEntryPrecedesReport) {
  // The report destination is unwritable; the spend is still recorded.
  const std::string ledger = " --ledger '" + Path("ledger.jsonl") + "' --budget-cap 5";
  EXPECT_NE(Run(AdArgs("missing_dir/r.json") + ledger), 0);
  EXPECT_EQ(Lines(Path("ledger.jsonl")), 1);
}

TEST_F(Cli, SameSeedSameReportModuloTimestamps) {
  ASSERT_EQ(Run(AdArgs("a.json")), 0) << Stderr();
  ASSERT_EQ(Run(AdArgs("b.json")), 0) << Stderr();
  const Json a = Json::parse(Slurp(Path("a.json")));
  const Json b = Json::parse(Slurp(Path("b.json")));
  EXPECT_EQ(StripTimestamps(a), StripTimestamps(b));
  EXPECT_EQ(a["provenance"]["seed_source"], "explicit");
  // Without a ledger the release is flagged as unrecorded.
  EXPECT_NE(Stderr().find("not recorded"), std::string::npos) << Stderr();
}

TEST_F(Cli, SeedFallsBackToEnvironment) {
  std::string args = AdArgs("a.json");
  args.replace(args.find(" --seed 9"), 9, "");
  ASSERT_EQ(Run(args, "DPREP_SEED=9"), 0) << Stderr();
  ASSERT_EQ(Run(AdArgs("b.json")), 0) << Stderr();
  const Json a = Json::parse(Slurp(Path("a.json")));
  const Json b = Json::parse(Slurp(Path("b.json")));
  EXPECT_EQ(a["provenance"]["seed_source"], "env");
  EXPECT_EQ(a["posterior"], b["posterior"]);
}

TEST_F(Cli, ReportsNeverCarryCustodianFields) {
  ASSERT_EQ(Run(AdArgs("ad.json") + " --unsafe-debug --debug-out '" + Path("ad_debug.json") + "'"), 0)
      << Stderr();
  ASSERT_EQ(Run(AmArgs("am.json") + " --unsafe-debug --debug-out '" + Path("am_debug.json") + "'"), 0)
      << Stderr();
  for (const char* name : {"ad.json", "am.json"}) {
    const std::string text = Slurp(Path(name));
    const Json j = Json::parse(text);
    for (const auto& key : kCustodianKeys) {
      EXPECT_FALSE(ContainsKeyAnywhere(j, key)) << name << " " << key;
      EXPECT_EQ(text.find("\"" + key + "\""), std::string::npos) << name << " " << key;
    }
  }
  const Json ad_debug = Json::parse(Slurp(Path("ad_debug.json")));
  EXPECT_TRUE(ad_debug.contains("S"));
  EXPECT_TRUE(ad_debug.contains("W"));
  const Json am_debug = Json::parse(Slurp(Path("am_debug.json")));
  EXPECT_TRUE(am_debug.contains("nu_per_subset"));

  ASSERT_EQ(Run("fit --input '" + Path("data.csv") + "' --model 'y ~ x1 + x2' --out '" +
                Path("fit.json") + "'"),
            0)
      << Stderr();
  EXPECT_TRUE(Json::parse(Slurp(Path("fit.json"))).contains("coefficients"));
}

TEST_F(Cli, UnsafeDebugNeedsSeparateDestination) {
  EXPECT_EQ(Run(AdArgs("a.json") + " --unsafe-debug"), 2);
  EXPECT_EQ(Run(AdArgs("a.json") + " --unsafe-debug --debug-out '" + Path("a.json") + "'"), 2);
}

TEST_F(Cli, SummarizeReproducesStoredSummaries) {
  ASSERT_EQ(Run(AdArgs("ad.json")), 0) << Stderr();
  ASSERT_EQ(Run(AmArgs("am.json")), 0) << Stderr();
  for (const char* name : {"ad.json", "am.json"}) {
    ASSERT_EQ(Run("summarize --report '" + Path(name) + "' --out '" + Path("s.json") + "'"), 0)
        << Stderr();
    const Json s = Json::parse(Slurp(Path("s.json")));
    const Json report = Json::parse(Slurp(Path(name)));
    EXPECT_EQ(s["matches_report"], true) << name;
    EXPECT_EQ(s["summary"], report["summary"]) << name;
  }
  Json tampered = Json::parse(Slurp(Path("ad.json")));
  tampered["posterior"]["r_samples"][0] = 0.001;
  std::ofstream(Path("bad.json")) << tampered.dump();
  EXPECT_EQ(Run("summarize --report '" + Path("bad.json") + "' --out '" + Path("s.json") + "'"), 2);
}

TEST_F(Cli, SingularFitExitsWithItsOwnCode) {
  std::ofstream(Path("collinear.csv")) << "y,x1,x2\n1,1,2\n2,2,4\n4,3,6\n3,4,8\n5,5,10\n";
  EXPECT_EQ(Run("fit --input '" + Path("collinear.csv") + "' --model 'y ~ x1 + x2' --out '" +
                Path("f.json") + "'"),
            4);
}

TEST_F(Cli, InvertMatchesClosedForm) {
  ASSERT_EQ(Run("invert --nu-ci 0.878,0.998 --sigma-o 177 --n0 160364 --N 160364 --M 25 --out '" +
                Path("inv.json") + "'"),
            0)
      << Stderr();
  const Json j = Json::parse(Slurp(Path("inv.json")));
  EXPECT_NEAR(j["abs_difference_interval"][0].get<double>(), 6.9, 2.0);
  EXPECT_NEAR(j["abs_difference_interval"][1].get<double>(), 423.2, 2.0);
}

TEST_F(Cli, GridCommandsWriteCsv) {
  ASSERT_EQ(Run("am-contour --gamma 5 --sigma-gamma 0.5 --diff-grid 0:0.4:3 --ratio-grid 1,2"
                " --K 100 --seed 1 --out '" + Path("c.csv") + "'"),
            0)
      << Stderr();
  EXPECT_EQ(Slurp(Path("c.csv")).rfind("diff/ratio,", 0), 0u);
  EXPECT_EQ(Lines(Path("c.csv")), 4);
}

}  // namespace
