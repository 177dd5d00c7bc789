#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <regex>

#include "support.hpp"

namespace fs = std::filesystem;
using lidar_deskew::fixtures::TempDir;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" LIDAR_DESKEW_CLI "' " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

double number_after(const std::string& text, const std::string& label) {
  const std::regex re(label + " ([-0-9.eE+]+)");
  std::smatch m;
  if (!std::regex_search(text, m, re)) return -1.0;
  return std::stod(m[1]);
}

// A quick scenario: few columns and beams, linear motion.
void write_small_config(const fs::path& dir, const std::string& trajectory) {
  std::ofstream(dir / "scene.json") << R"({
    "posts": [{"x": 8.05, "y": 3.05, "radius": 0.15}, {"x": 12.05, "y": -4.05, "radius": 0.15}],
    "fences": [{"from": [-15.05, 6.05], "to": [25.05, 6.05]}, {"from": [-15.05, -6.05], "to": [25.05, -6.05]}],
    "boxes": [{"min": [16.05, -2.05, 0], "max": [17.55, 2.05, 2]}]
  })";
  std::ofstream(dir / "run.json") << R"({
    "schema": 1,
    "scene": "scene.json",
    "trajectory": )" << trajectory << R"(,
    "lidar": {"columns": 512, "beams": 12, "inclination_min_deg": -20, "inclination_max_deg": 2},
    "noise": {"range_sigma": 0.005},
    "num_scans": 3,
    "cell_sizes": [0.1],
    "output_dir": "from_config",
    "seed": 3
  })";
}

}  // namespace

TEST(Cli, NoArgumentsPrintsUsage) {
  const auto r = run("");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.output.find("Usage"), std::string::npos) << r.output;
}

TEST(Cli, UnknownFlagAndMissingInput) {
  EXPECT_EQ(run("simulate --bogus").code, 2);
  EXPECT_EQ(run("simulate").code, 2);
  EXPECT_EQ(run("octree").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("deskew --scans /nonexistent --odom /nonexistent").code, 2);
}

TEST(Cli, HelpExitsZero) {
  const auto r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"simulate", "deskew", "icp", "octree", "gt-error", "report", "pipeline"}) {
    EXPECT_NE(r.output.find(sub), std::string::npos) << sub;
  }
}

TEST(Cli, RuntimeErrorsExitOne) {
  TempDir dir("cli_err");
  std::ofstream(dir / "bad.json") << "{\"schema\": 1}";
  const auto r = run("simulate --config " + q(dir / "bad.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("error"), std::string::npos) << r.output;
}

TEST(Cli, SimulateDeskewGtErrorEndToEnd) {
  TempDir dir("cli_e2e");
  write_small_config(dir.path(), R"({"kind": "linear", "speed": 10, "duration": 0.5})");
  const fs::path sim = dir / "sim";
  const fs::path out = dir / "deskewed";

  auto r = run("simulate --config " + q(dir / "run.json") + " --out " + q(sim));
  ASSERT_EQ(r.code, 0) << r.output;
  ASSERT_TRUE(fs::exists(sim / "scans" / "scan_0002.txt"));

  r = run("deskew --scans " + q(sim) + " --odom " + q(sim / "can.log") + " --poses " + q(sim / "poses.csv") +
          " --out " + q(out) + " --format xyz");
  ASSERT_EQ(r.code, 0) << r.output;
  ASSERT_TRUE(fs::exists(out / "corrected" / "scan_0000.xyz"));

  r = run("gt-error --scene " + q(sim / "scene.json") + " " + q(out / "raw" / "scan_0000.xyz") + " " +
          q(out / "corrected" / "scan_0000.xyz"));
  ASSERT_EQ(r.code, 0) << r.output;
  const auto corrected_line = r.output.substr(r.output.find('\n') + 1);
  const double raw_rms = number_after(r.output, "rms");
  const double corrected_rms = number_after(corrected_line, "rms");
  // Ground returns dominate and are unaffected by motion along x, so the raw rms is modest.
  EXPECT_GT(raw_rms, 0.02) << r.output;
  EXPECT_LT(corrected_rms, 0.2 * raw_rms) << r.output;
  EXPECT_LT(corrected_rms, 0.01) << r.output;

  // Without poses the deskewer dead-reckons the odometry; the correction is the same.
  r = run("deskew --scans " + q(sim / "scans") + " --odom " + q(sim / "can.log") + " --out " + q(dir / "dr"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "dr" / "corrected_map.ply"));

  r = run("report --run " + q(out) + " --scene " + q(sim / "scene.json") + " --cell 0.1 --cell 0.2");
  ASSERT_EQ(r.code, 0) << r.output;
  for (const char* f : {"icp.csv", "occupancy.csv", "gt_error.csv", "summary.csv", "map_topdown.svg"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }

  r = run("icp " + q(out / "corrected" / "scan_0000.xyz") + " " + q(out / "corrected" / "scan_0001.xyz") +
          " " + q(out / "corrected" / "scan_0002.xyz") + " --out " + q(dir / "icp.csv"));
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(fs::exists(dir / "icp.csv"));
  EXPECT_EQ(run("icp " + q(out / "corrected" / "scan_0000.xyz")).code, 2);
}

TEST(Cli, OctreeOnRotationFixture) {
  TempDir dir("cli_oct");
  write_small_config(dir.path(), R"({"kind": "arc", "speed": 3, "yaw_rate_deg": -25, "duration": 0.5})");
  ASSERT_EQ(run("pipeline --config " + q(dir / "run.json") + " --out " + q(dir / "run")).code, 0);
  const auto r = run("octree --cell 0.1 " + q(dir / "run" / "raw_map.ply") + " " +
                     q(dir / "run" / "corrected_map.ply"));
  ASSERT_EQ(r.code, 0) << r.output;
  const std::regex re("occupied ([0-9]+)");
  std::vector<long> counts;
  for (std::sregex_iterator it(r.output.begin(), r.output.end(), re), end; it != end; ++it) {
    counts.push_back(std::stol((*it)[1]));
  }
  ASSERT_EQ(counts.size(), 2u) << r.output;
  EXPECT_LE(counts[1], counts[0]) << r.output;
}

TEST(Cli, OutputDirectoryPrecedence) {
  TempDir dir("cli_out");
  write_small_config(dir.path(), R"({"kind": "linear", "speed": 5, "duration": 0.5})");
  ASSERT_EQ(run("simulate --config " + q(dir / "run.json")).code, 0);
  EXPECT_TRUE(fs::exists(dir / "from_config" / "can.log"));
  ASSERT_EQ(run("simulate --config " + q(dir / "run.json"), "LIDAR_DESKEW_OUT=" + q(dir / "from_env")).code, 0);
  EXPECT_TRUE(fs::exists(dir / "from_env" / "can.log"));
  ASSERT_EQ(run("simulate --config " + q(dir / "run.json") + " --out " + q(dir / "from_flag"),
                "LIDAR_DESKEW_OUT=" + q(dir / "from_env2"))
                .code,
            0);
  EXPECT_TRUE(fs::exists(dir / "from_flag" / "can.log"));
  EXPECT_FALSE(fs::exists(dir / "from_env2"));
}

TEST(Cli, SeedFlagMakesRunsReproducible) {
  TempDir dir("cli_seed");
  write_small_config(dir.path(), R"({"kind": "linear", "speed": 5, "duration": 0.5})");
  for (const char* name : {"a", "b"}) {
    ASSERT_EQ(run("simulate --config " + q(dir / "run.json") + " --seed 11 --out " + q(dir / name)).code, 0);
  }
  ASSERT_EQ(run("simulate --config " + q(dir / "run.json") + " --seed 12 --out " + q(dir / "c")).code, 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir / "a" / "scans" / "scan_0001.txt"), slurp(dir / "b" / "scans" / "scan_0001.txt"));
  EXPECT_NE(slurp(dir / "a" / "scans" / "scan_0001.txt"), slurp(dir / "c" / "scans" / "scan_0001.txt"));
}
