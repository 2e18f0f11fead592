#include <gtest/gtest.h>

#include <filesystem>

#include "srcloc/bench.hpp"

using namespace srcloc;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no srcloc::Error thrown";
  return ErrorCode::InvalidArgument;
}

BenchResult single_cell(std::vector<TrialRecord> trials) {
  BenchResult r;
  r.cells.push_back({"mtdoa", 10, std::move(trials)});
  return r;
}

TrialRecord hit(double error, double speed = 1.0) { return {error, speed, true, ""}; }

BenchConfig iso_config() {
  BenchConfig c;
  c.trials = 40;
  c.anchor_counts = {10};
  c.solvers = {BenchSolver{SolverKind::MTDOA}};
  c.master_seed = 5;
  return c;
}

}  // namespace

TEST(Cdf, HalfOfFourErrorsWithinRadius) {
  const auto r = single_cell({hit(1), hit(2), hit(3), hit(4)});
  const std::vector<double> radii{2.5};
  const auto rows = cdf_table(r, radii);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_DOUBLE_EQ(rows[0].percentage, 50.0);
}

TEST(Cdf, ZeroErrorsAreAllWithinZeroRadius) {
  const auto r = single_cell({hit(0), hit(0), hit(0)});
  const std::vector<double> radii{0.0};
  EXPECT_DOUBLE_EQ(cdf_table(r, radii)[0].percentage, 100.0);
}

TEST(Cdf, FailuresCountAsMisses) {
  auto r = single_cell({hit(0), hit(0), hit(0), TrialRecord{0.0, 0.0, false, "NotConverged"}});
  const std::vector<double> radii{1e9};
  EXPECT_DOUBLE_EQ(cdf_table(r, radii)[0].percentage, 75.0);
  EXPECT_DOUBLE_EQ(r.cells[0].failure_rate(), 0.25);
  EXPECT_DOUBLE_EQ(r.cells[0].mae(), 0.0);
}

TEST(Cdf, MonotoneInRadius) {
  auto c = iso_config();
  c.noise_sigma = 0.01;
  const auto r = run_bench(c);
  const auto radii = default_radii(r);
  const auto rows = cdf_table(r, radii);
  ASSERT_EQ(rows.size(), 21u);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_GE(rows[k].percentage, rows[k - 1].percentage);
  EXPECT_DOUBLE_EQ(rows.back().percentage, 100.0);
}

TEST(Bench, NoiselessMtdoaIsExact) {
  auto c = iso_config();
  c.trials = 100;
  const auto r = run_bench(c);
  const auto& cell = r.cell("mtdoa", 10);
  EXPECT_EQ(cell.failures(), 0u);
  EXPECT_LT(cell.mae(), 1e-4);
}

TEST(Bench, SpeedTable) {
  auto c = iso_config();
  c.trials = 1;
  c.speed = 2.0;
  c.solvers = {BenchSolver{SolverKind::MTDOA}, BenchSolver{SolverKind::TDOA, 0.7}};
  const auto rows = speed_table(run_bench(c));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].solver, "mtdoa");
  EXPECT_NEAR(rows[0].mean_speed, 2.0, 1e-6);
  EXPECT_EQ(rows[1].solver, "tdoa");
  EXPECT_EQ(rows[1].mean_speed, 0.7);
}

TEST(Bench, TruthMeanSpeedForTdoa) {
  auto c = iso_config();
  c.source = BenchSource::SyntheticAnisotropic;
  c.speed_model = SpeedModel{{1.0}, {{1.0, 0.2, 0.0}}};
  BenchSolver tdoa{SolverKind::TDOA};
  tdoa.c_from_truth = true;
  c.solvers = {tdoa};
  c.trials = 3;
  const auto r = run_bench(c);
  for (const auto& t : r.cells[0].trials) {
    ASSERT_TRUE(t.ok);
    EXPECT_GT(t.speed, 0.8);
    EXPECT_LT(t.speed, 1.2);
  }
}

TEST(Bench, ThreadCountDoesNotChangeOutputs) {
  auto c = iso_config();
  c.noise_sigma = 0.005;
  c.anchor_counts = {10, 20};
  c.solvers = {BenchSolver{SolverKind::MTDOA}, BenchSolver{SolverKind::TDOA, 1.0}};
  c.threads = 1;
  const auto a = run_bench(c);
  c.threads = 4;
  const auto b = run_bench(c);
  const auto radii = default_radii(a);
  EXPECT_EQ(cdf_csv(cdf_table(a, radii)), cdf_csv(cdf_table(b, radii)));
  EXPECT_EQ(mae_csv(mae_table(a)), mae_csv(mae_table(b)));
  EXPECT_EQ(speeds_csv(speed_table(a)), speeds_csv(speed_table(b)));
  EXPECT_EQ(bench_manifest(c, a).dump(), bench_manifest(c, b).dump());
}

TEST(Bench, SolversSeeTheSameTrials) {
  auto c = iso_config();
  c.noise_sigma = 0.01;
  const auto alone = run_bench(c);
  c.solvers.insert(c.solvers.begin(), BenchSolver{SolverKind::TDOA, 1.0});
  const auto paired = run_bench(c);
  EXPECT_EQ(alone.trial_seeds, paired.trial_seeds);
  for (std::size_t t = 0; t < c.trials; ++t) {
    EXPECT_EQ(alone.cell("mtdoa", 10).trials[t].error, paired.cell("mtdoa", 10).trials[t].error);
  }
}

TEST(Bench, IngestedCsvSource) {
  const auto dir = std::filesystem::temp_directory_path() / "srcloc_bench_csv";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const Point2 truth{0.4, 0.6};
  const auto anchors = place_anchors({{{0, 0}, {1, 1}}, 60, 0.0, 3}, truth);
  save_anchor_csv(dir / "rows.csv", simulate_isotropic(truth, 0.1, 1.5, anchors, 0.0, 0));
  BenchConfig c = iso_config();
  c.source = BenchSource::IngestedCsv;
  c.csv_path = dir / "rows.csv";
  c.csv_truth = truth;
  c.anchor_counts = {12, 80};
  const auto r = run_bench(c);
  EXPECT_LT(r.cell("mtdoa", 12).mae(), 1e-4);
  const auto& starved = r.cell("mtdoa", 80);
  EXPECT_EQ(starved.failures(), c.trials);
  EXPECT_EQ(starved.trials[0].failure, "InsufficientAnchors");
}

TEST(Bench, FhnSourceWithSuppliedMap) {
  auto map = std::make_shared<ActivationMap>();
  map->grid_n = 80;
  map->cell_size = 0.25;
  map->rotor_core = {9.1, 10.7};
  map->pulses.assign(2, std::vector<double>(80 * 80));
  for (std::size_t j = 0; j < 80; ++j) {
    for (std::size_t i = 0; i < 80; ++i) {
      const double t = 50.0 + distance(map->cell_center(i, j), map->rotor_core) / 0.4;
      map->pulses[0][j * 80 + i] = t;
      map->pulses[1][j * 80 + i] = t + 30.0;
    }
  }
  map->labeled_cells = 80 * 80;
  BenchConfig c = iso_config();
  c.source = BenchSource::Fhn;
  c.region = {{0, 0}, {20, 20}};
  c.exclusion_radius = 3.0;
  c.fhn_pulse = 1;
  c.trials = 20;
  const auto r = run_bench(c, map);
  EXPECT_EQ(r.fhn_pulse, std::optional<std::size_t>{1});
  EXPECT_EQ(r.rotor_core, map->rotor_core);
  EXPECT_EQ(r.cell("mtdoa", 10).failures(), 0u);
  EXPECT_LT(r.cell("mtdoa", 10).mae(), 0.05);
  EXPECT_NEAR(speed_table(r)[0].mean_speed, 0.4, 0.01);
}

TEST(BenchConfig, Validation) {
  auto c = iso_config();
  c.solvers = {BenchSolver{SolverKind::NTDOA}};
  c.anchor_counts = {8};
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
  c = iso_config();
  c.solvers.clear();
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
  c = iso_config();
  c.source = BenchSource::Fhn;
  BenchSolver truth{SolverKind::TDOA};
  truth.c_from_truth = true;
  c.solvers = {truth};
  EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidArgument);
  c = iso_config();
  c.source = BenchSource::Fhn;
  EXPECT_EQ(code_of([&] { run_bench(c); }), ErrorCode::InvalidArgument);
}

TEST(BenchConfig, JsonRoundTrip) {
  BenchConfig c = iso_config();
  c.source = BenchSource::SyntheticAnisotropic;
  c.speed_model = SpeedModel{{0.5, 0.01}, {{1.0, 0.1, 0.0}}};
  BenchSolver nt{SolverKind::NTDOA};
  nt.order = {1, 1};
  nt.residual = NtdoaResidual::Time;
  BenchSolver td{SolverKind::TDOA};
  td.c_from_truth = true;
  c.solvers = {nt, td, BenchSolver{SolverKind::MTDOA}};
  c.radii = {1, 2, 3};
  c.simplex.max_iterations = 777;
  const auto j = bench_config_to_json(c);
  EXPECT_EQ(bench_config_to_json(bench_config_from_json(j)), j);
  EXPECT_EQ(code_of([] { bench_config_from_json(json::parse(R"({"source": "radar"})")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { bench_config_from_json(json::parse(R"({"source": "fhn"})")); }), ErrorCode::ParseError);
}

TEST(BenchOutputs, FilesAndHeaders) {
  auto c = iso_config();
  c.trials = 5;
  c.radii = {0.001, 0.01};
  const auto r = run_bench(c);
  const auto dir = std::filesystem::temp_directory_path() / "srcloc_bench_out";
  std::filesystem::remove_all(dir);
  write_bench_outputs(dir, c, r);
  EXPECT_EQ(read_text_file(dir / "cdf.csv").substr(0, 36), "radius,solver,anchor_count,percentag");
  EXPECT_EQ(read_text_file(dir / "mae.csv").substr(0, 34), "anchor_count,solver,mae,failure_ra");
  EXPECT_EQ(read_text_file(dir / "speeds.csv").substr(0, 17), "solver,mean_speed");
  const auto m = json::parse(read_text_file(dir / "manifest.json"));
  EXPECT_EQ(m.at("trial_seeds").at("10").size(), 5u);
  EXPECT_EQ(m.at("trial_seeds").at("10").at(2).get<std::uint64_t>(), trial_seed(5, 10, 2));
}
