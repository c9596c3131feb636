// Copyright 2026 The blg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "blg/cli.hpp"

namespace blg::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    spdlog::set_level(spdlog::level::warn);
    std::random_device rd;
    dir_ = fs::temp_directory_path() / ("blg_cli_" + std::to_string(rd()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  RunConfig config(const std::string& name, const std::string& out) const {
    auto c = load_config(std::string(BLG_CONFIGS) + "/" + name);
    c.out_dir = (dir_ / out).string();
    validate(c);
    return c;
  }
  int run(const std::string& args) const {
    const std::string cmd = std::string(BLG_EXE) + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  fs::path dir_;
};

TEST_F(Cli, MissingStackingIsAConfigError) {
  const auto p = write("bad.ini", "[path]\nintervals = 10\n");
  try {
    load_config(p.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_config);
    EXPECT_NE(std::string(e.what()).find("system.stacking"), std::string::npos);
  }
  EXPECT_EQ(run("bands --config " + p.string()), kConfigError);
  EXPECT_NE(slurp(dir_ / "stdout.txt").find("system.stacking"), std::string::npos);
}

TEST_F(Cli, BadValuesAreConfigErrors) {
  EXPECT_THROW(load_config(write("a.ini", "[system]\nstacking = ABC\n").string()), Error);
  EXPECT_THROW(load_config(write("b.ini", "[system]\nstacking = AA\n[backend]\nkind = fast\n").string()), Error);
  auto c = load_config(write("c.ini", "[system]\nstacking = AA\n[path]\nintervals = 0\n").string());
  EXPECT_THROW(validate(c), Error);
  EXPECT_EQ(run("bands --config " + write("d.ini", "[system]\nstacking = AA\n[path]\nanchors = Γ, Q\n").string()), kConfigError);
}

TEST_F(Cli, SamplingWithoutSeedIsRefused) {
  const auto p = write("s.ini", "[system]\nstacking = AA\n");
  EXPECT_EQ(run("charcheck --config " + p.string() + " --out " + (dir_ / "o").string()), kConfigError);
  EXPECT_EQ(run("charcheck --config " + p.string() + " --seed 1 --shots 1000 --out " + (dir_ / "o").string()), kOk);
}

TEST_F(Cli, BandsWritesOneRowPerKPoint) {
  const auto c = config("aa_bands.ini", "bands");
  ASSERT_EQ(cmd_bands(c), kOk);
  const std::string csv = slurp(fs::path(c.out_dir) / "bands.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 152);
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "eigvecs.json"));
  EXPECT_TRUE(fs::exists(fs::path(c.out_dir) / "plot_bands.py"));
}

TEST_F(Cli, SalcVerifyPassesOnShippedTables) {
  std::ostringstream os;
  EXPECT_EQ(cmd_salc_verify(config("aa_bands.ini", "s"), os), kOk);
  EXPECT_EQ(os.str().find("FAIL"), std::string::npos) << os.str();
}

TEST_F(Cli, SalcVerifyNamesMixedRows) {
  // Rotate the first two AA Gamma rows into each other; the set stays orthonormal.
  std::string t = slurp(fs::path(BLG_CONFIGS).parent_path() / "data/tables.jsonl");
  const std::string a1 = R"("irrep":"A1g","amplitudes":["1","1","1","1"],"scale":"1/2")";
  const std::string b2 = R"("irrep":"B2g","amplitudes":["1","-1","-1","1"],"scale":"1/2")";
  ASSERT_NE(t.find(a1), std::string::npos);
  ASSERT_NE(t.find(b2), std::string::npos);
  t.replace(t.find(a1), a1.size(), R"("irrep":"A1g","amplitudes":["1","0","0","1"],"scale":"1/sqrt2")");
  t.replace(t.find(b2), b2.size(), R"("irrep":"B2g","amplitudes":["0","1","1","0"],"scale":"1/sqrt2")");
  auto c = config("aa_bands.ini", "s");
  c.tables_path = write("mixed.jsonl", t).string();
  std::ostringstream os;
  EXPECT_EQ(cmd_salc_verify(c, os), kFailure);
  EXPECT_NE(os.str().find("FAIL AA Γ"), std::string::npos) << os.str();
  EXPECT_NE(os.str().find("row 1 (A1g)"), std::string::npos) << os.str();

  c.tables_path = write("broken.jsonl", "{\"record\":\"meta\",\"version\":1}\nnot json\n").string();
  std::ostringstream os2;
  EXPECT_EQ(cmd_salc_verify(c, os2), kFailure);
  EXPECT_EQ(os2.str().rfind("FAIL tables", 0), 0u);
}

TEST_F(Cli, CharcheckSameStateIsSameIR) {
  auto c = config("aa_charcheck.ini", "cc");
  c.check_states = {1, 1};
  c.shots = 5000;
  std::ostringstream os;
  ASSERT_EQ(cmd_charcheck(c, os), kOk);
  EXPECT_NE(os.str().find("verdict: SameIR"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(fs::path(c.out_dir) / "outcomes.json"));
  EXPECT_EQ(j["decision"], "SameIR");
  EXPECT_EQ(j["group"], "D6h");
  EXPECT_EQ(j["ops"].size(), 4u);
}

TEST_F(Cli, CharcheckRefusesDegenerateStates) {
  auto c = config("aa_charcheck.ini", "cc");
  c.check_k = "K";
  std::ostringstream os;
  EXPECT_EQ(cmd_charcheck(c, os), kFailure);
  EXPECT_NE(os.str().find("degenerate"), std::string::npos);
  EXPECT_FALSE(fs::exists(fs::path(c.out_dir) / "outcomes.json"));
}

TEST_F(Cli, CharcheckRerunIsByteIdentical) {
  auto a = config("aa_charcheck.ini", "r1"), b = config("aa_charcheck.ini", "r2");
  a.backend = b.backend = "noisy";
  a.noise = b.noise = NoiseModel::from_p2(0.005);
  std::ostringstream oa, ob;
  ASSERT_EQ(cmd_charcheck(a, oa), kOk);
  ASSERT_EQ(cmd_charcheck(b, ob), kOk);
  EXPECT_EQ(oa.str(), ob.str());
  EXPECT_EQ(slurp(fs::path(a.out_dir) / "outcomes.json"), slurp(fs::path(b.out_dir) / "outcomes.json"));
}

TEST_F(Cli, ClassifyRerunIsByteIdentical) {
  const auto a = config("aa_classify.ini", "r1"), b = config("aa_classify.ini", "r2");
  std::ostringstream oa, ob;
  ASSERT_EQ(cmd_classify(a, oa), kOk);
  ASSERT_EQ(cmd_classify(b, ob), kOk);
  EXPECT_EQ(oa.str(), ob.str());
  for (const char* f : {"verdicts.json", "noisy_bands.csv", "corrected_bands.csv"})
    EXPECT_EQ(slurp(fs::path(a.out_dir) / f), slurp(fs::path(b.out_dir) / f)) << f;
}

TEST_F(Cli, SweepStartsAtCertainty) {
  auto c = config("aa_sweep.ini", "sw");
  c.shots = 2000;
  const auto rows = noise_sweep(c, *c.seed);
  ASSERT_EQ(rows.size(), 4u * 11u);
  for (const auto& r : rows) {
    if (r.p2 != 0.0) continue;
    EXPECT_NEAR(r.correct_exact(), 1.0, 1e-12) << r.op;
  }
  // Monotone loss of certainty along the grid for every op.
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].op != rows[i - 1].op) continue;
    EXPECT_LE(rows[i].correct_exact(), rows[i - 1].correct_exact() + 1e-12);
  }
}

TEST_F(Cli, ReportCollectsEarlierOutputs) {
  auto c = config("aa_charcheck.ini", "rep");
  c.shots = 2000;
  std::ostringstream os;
  EXPECT_EQ(cmd_report(c, os), kFailure);
  ASSERT_EQ(cmd_charcheck(c, os), kOk);
  ASSERT_EQ(cmd_bands(c), kOk);
  std::ostringstream rep;
  EXPECT_EQ(cmd_report(c, rep), kOk);
  const std::string md = slurp(fs::path(c.out_dir) / "report.md");
  EXPECT_NE(md.find("bands.csv: 151 k-points"), std::string::npos) << md;
  EXPECT_NE(md.find("character check at Γ (D6h)"), std::string::npos) << md;
}

}  // namespace
}  // namespace blg::cli
