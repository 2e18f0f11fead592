#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "srcloc/io.hpp"

namespace fs = std::filesystem;
using namespace srcloc;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "srcloc_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run cli(const std::string& args) {
  const auto out = work_dir() / "stdout.txt";
  const auto err = work_dir() / "stderr.txt";
  const std::string cmd =
      std::string("\"") + SRCLOC_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text_file(out), read_text_file(err)};
}

std::string path(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST(Cli, SimulateThenLocalizeRecoversSource) {
  const auto scenario = work_dir() / "iso.json";
  const auto csv = work_dir() / "iso.csv";
  auto r = cli("simulate --medium iso --source 0.3,0.6 --t0 0.2 --c 1.5 --unknown-speed --anchors 40 --sigma 0 "
               "--seed 4 --out " + path(scenario) + " --csv " + path(csv));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const std::string solver : {"mtdoa", "tdoa"}) {
    const auto est_path = work_dir() / ("est_" + solver + ".json");
    const std::string extra = solver == "tdoa" ? " --c 1.5" : "";
    r = cli("localize --anchors " + path(scenario) + " --solver " + solver + extra + " --out " + path(est_path));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto est = estimate_from_json(json::parse(read_text_file(est_path)));
    EXPECT_NEAR(est.source.x, 0.3, 1e-6) << solver;
    EXPECT_NEAR(est.source.y, 0.6, 1e-6) << solver;
  }
  r = cli("localize --anchors " + path(csv) + " --solver mtdoa --out " + path(work_dir() / "est_csv.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("MTDOA"), std::string::npos);
}

TEST(Cli, AnisotropicScenarioThroughNtdoa) {
  const auto model = work_dir() / "model.json";
  write_text_file(model, R"({"taylor": [1.0], "fourier": [[1.0, 0.2, 0.0]]})");
  const auto scenario = work_dir() / "aniso.json";
  auto r = cli("simulate --medium aniso --speed-model " + path(model) +
               " --source 0.45,0.55 --t0 0 --anchors 40 --sigma 0 --seed 2 --out " + path(scenario));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto est_path = work_dir() / "est_nt.json";
  r = cli("localize --anchors " + path(scenario) + " --solver ntdoa --order 0,1 --max-iterations 5000 --out " +
          path(est_path));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto est = estimate_from_json(json::parse(read_text_file(est_path)));
  EXPECT_EQ(est.solver, SolverKind::NTDOA);
  EXPECT_EQ(est.speed.fourier.size(), 1u);
}

TEST(Cli, TooFewAnchorsForNtdoaExitsTwo) {
  const auto scenario = work_dir() / "eight.json";
  auto r = cli("simulate --medium iso --source 0.5,0.5 --t0 0 --c 1 --anchors 8 --sigma 0 --seed 1 --out " +
               path(scenario));
  ASSERT_EQ(r.code, 0) << r.err;
  r = cli("localize --anchors " + path(scenario) + " --solver ntdoa --out " + path(work_dir() / "x.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("InsufficientAnchors"), std::string::npos) << r.err;
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("localize --bogus").code, 1);
  EXPECT_EQ(cli("localize --anchors /nonexistent/anchors.csv --solver mtdoa --out x.json").code, 1);
  EXPECT_EQ(cli("simulate --medium iso --source 1 --t0 0 --c 1 --anchors 5 --sigma 0 --seed 1 --out " +
                path(work_dir() / "y.json"))
                .code,
            1);
  const auto csv = work_dir() / "bad.csv";
  write_text_file(csv, "x,y,t\n1,2\n");
  const auto r = cli("localize --anchors " + path(csv) + " --solver mtdoa --out " + path(work_dir() / "z.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ParseError"), std::string::npos);
}

TEST(Cli, IngestWritesAnchorCsv) {
  const auto dir = work_dir() / "frames";
  fs::create_directories(dir);
  json frames = json::array();
  for (int k = 0; k < 4; ++k) {
    std::string pgm = "P2\n10 10\n1\n";
    for (int row = 0; row < 10; ++row) {
      for (int col = 0; col < 10; ++col) {
        const int d = std::max(std::abs(col - 4), std::abs(row - 5));
        pgm += (d <= k ? "1" : "0");
        pgm += col == 9 ? "\n" : " ";
      }
    }
    const auto name = "f" + std::to_string(k) + ".pgm";
    write_text_file(dir / name, pgm);
    frames.push_back({{"path", "frames/" + name}, {"timestamp", 0.5 * k}});
  }
  const auto manifest = work_dir() / "manifest.json";
  write_text_file(manifest, json{{"pixel_size", 1.0}, {"threshold", 0.5}, {"frames", frames}}.dump());
  const auto out = work_dir() / "ingested.csv";
  const auto r = cli("ingest --manifest " + path(manifest) + " --samples 100 --seed 3 --out " + path(out));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto anchors = load_anchor_csv(out);
  EXPECT_EQ(anchors.size(), 8u + 16u + 24u);
}

TEST(Cli, FhnAndBenchPresets) {
  const fs::path presets = SRCLOC_PRESETS_DIR;
  const auto act = work_dir() / "act";
  const auto anchors = work_dir() / "fhn_anchors.csv";
  auto r = cli("fhn --config " + path(presets / "fhn_target_small.json") + " --out " + path(act) +
               " --anchors 20 --anchor-out " + path(anchors));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(act / "activation.json"));
  EXPECT_TRUE(fs::exists(act / "pulse_0.p2f"));
  EXPECT_EQ(load_anchor_csv(anchors).size(), 20u);

  const auto out = work_dir() / "bench";
  r = cli("bench --config " + path(presets / "bench_fhn_small.json") + " --out-dir " + path(out) + " --threads 2");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"cdf.csv", "mae.csv", "speeds.csv", "manifest.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_NE(read_text_file(out / "mae.csv").find("mtdoa"), std::string::npos);
}
