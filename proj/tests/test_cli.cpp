// Runs the ghom executable.

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int status = -1;
    std::string output;
};

CliResult run(const std::string &args) {
    CliResult r;
    const std::string cmd = std::string(GHOM_CLI) + " " + args + " 2>&1";
    FILE *p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string &s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("ghom_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string &name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, GenIsDeterministic) {
    ASSERT_EQ(run("gen --seed 5 --n 4 --out " + path("a.jsonl")).status, 0);
    ASSERT_EQ(run("gen --seed 5 --n 4 --out " + path("b.jsonl")).status, 0);
    ASSERT_EQ(run("gen --seed 6 --n 4 --out " + path("c.jsonl")).status, 0);
    const std::string a = slurp(path("a.jsonl"));
    EXPECT_EQ(count_lines(a), 4u);
    EXPECT_EQ(a, slurp(path("b.jsonl")));
    EXPECT_NE(a, slurp(path("c.jsonl")));
}

TEST_F(Cli, GenInstance) {
    const CliResult r = run("gen --what instance --solver f1hf2 --planar 10 --nonplanar 2 --seed 3");
    ASSERT_EQ(r.status, 0);
    EXPECT_NE(r.output.find("\"pixels\""), std::string::npos);
}

TEST_F(Cli, UnknownSolverFails) {
    const CliResult r = run("stability --solver 9pt --n 5");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find("9pt"), std::string::npos);
}

TEST_F(Cli, MissingSubcommandFails) { EXPECT_NE(run("").status, 0); }

TEST_F(Cli, StabilityRowCount) {
    const CliResult r = run("stability --solver hf --n 25 --seed 2 --out " + path("s.csv"));
    ASSERT_EQ(r.status, 0) << r.output;
    const std::string csv = slurp(path("s.csv"));
    EXPECT_EQ(csv.rfind("# ghom-csv v1", 0), 0u);
    // Version line, header, homography and focal rows.
    EXPECT_EQ(count_lines(csv), 2u + 50u);
}

TEST_F(Cli, NoiseGrid) {
    const CliResult r = run("noise --solver fhf --n 10 --sigma-grid 0,1 --out " + path("n.csv"));
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(count_lines(slurp(path("n.csv"))), 2u + 20u);
    EXPECT_NE(run("noise --sigma-grid 0,-1 --n 2").status, 0);
}

TEST_F(Cli, SpeedAndRansacBench) {
    ASSERT_EQ(run("speed --all --n 300 --out " + path("t.csv")).status, 0);
    EXPECT_EQ(count_lines(slurp(path("t.csv"))), 2u + 4u);
    const CliResult r = run("ransac-bench --n 3 --iters 50 --threshold 3 --out " + path("r.csv"));
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(count_lines(slurp(path("r.csv"))), 2u + 6u);
}

TEST_F(Cli, TrajectoryFromFile) {
    ASSERT_EQ(run("gen --seed 2 --n 6 --out " + path("seq.jsonl")).status, 0);
    const CliResult r = run("trajectory --input " + path("seq.jsonl") + " --out " + path("traj.json"));
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(fs::exists(path("traj_errors.csv")));
    EXPECT_EQ(count_lines(slurp(path("traj_errors.csv"))), 2u + 6u);
    EXPECT_NE(slurp(path("traj.json")).find("\"frames\""), std::string::npos);
}

TEST_F(Cli, TrajectoryBadInput) {
    std::ofstream(path("bad.jsonl")) << "{\"id\": 1, \"attitude\": [1,0,0,0,1,0,0,0,1], \"keypoints\": []}\nnot json\n";
    const CliResult r = run("trajectory --input " + path("bad.jsonl"));
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find("line 2"), std::string::npos) << r.output;
    EXPECT_NE(run("trajectory --input " + path("missing.jsonl")).status, 0);
}
