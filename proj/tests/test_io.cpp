#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "srcloc/io.hpp"
#include "srcloc/pgm.hpp"

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

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("srcloc_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(FormatDouble, RoundTripsExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(AnchorCsv, RoundTrip) {
  const std::vector<AnchorObservation> a{{{0.1, 0.2}, 0.3}, {{-1e-7, 12345.678}, 1.0 / 3.0}};
  const auto text = anchors_to_csv(a);
  EXPECT_EQ(text.substr(0, 6), "x,y,t\n");
  EXPECT_EQ(anchors_from_csv(text), a);
}

TEST(AnchorCsv, ToleratesBlankLinesAndCrlf) {
  const auto a = anchors_from_csv("x,y,t\r\n1,2,3\r\n\r\n4,5,6\n");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[1], (AnchorObservation{{4, 5}, 6}));
}

TEST(AnchorCsv, Malformed) {
  EXPECT_EQ(code_of([] { anchors_from_csv("a,b,c\n1,2,3\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { anchors_from_csv("x,y,t\n1,2\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { anchors_from_csv("x,y,t\n1,zz,3\n"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { anchors_from_csv("x,y,t\n1,2,3,4\n"); }), ErrorCode::ParseError);
}

TEST(AnchorCsv, FileRoundTripAndMissingFile) {
  const auto dir = scratch_dir("csv");
  const std::vector<AnchorObservation> a{{{1, 2}, 3}};
  save_anchor_csv(dir / "a.csv", a);
  EXPECT_EQ(load_anchor_csv(dir / "a.csv"), a);
  EXPECT_EQ(code_of([&] { load_anchor_csv(dir / "missing.csv"); }), ErrorCode::IoError);
}

TEST(SpeedModelJson, RoundTripAndObjectTerms) {
  const SpeedModel m{{0.5, -0.01}, {{1.0, 0.2, -0.1}, {2.0, 0.0, 0.05}}};
  EXPECT_EQ(speed_model_from_json(speed_model_to_json(m)), m);
  const auto j = json::parse(R"({"taylor": [1.0], "fourier": [{"omega": 1, "b": 0.3, "d": 0}]})");
  EXPECT_EQ(speed_model_from_json(j), (SpeedModel{{1.0}, {{1.0, 0.3, 0.0}}}));
  EXPECT_EQ(code_of([] { speed_model_from_json(json::parse(R"({"taylor": []})")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { speed_model_from_json(json::parse(R"({"taylor": [1], "fourier": [[1, 2]]})")); }),
            ErrorCode::ParseError);
}

TEST(ScenarioJson, RoundTripEachMedium) {
  const std::vector<Medium> media{IsotropicKnown{2.0}, IsotropicUnknown{0.7},
                                  Anisotropic{SpeedModel{{1.0, 0.1}, {{1.0, 0.2, 0.0}}}}};
  for (const auto& medium : media) {
    Scenario s{{0.25, 0.75}, 0.1, medium, {{{0.1, 0.2}, 0.5}, {{0.9, 0.3}, 0.8}}, 0.01, "mm"};
    const auto back = scenario_from_json(scenario_to_json(s));
    EXPECT_EQ(back.source, s.source);
    EXPECT_EQ(back.start_time, s.start_time);
    EXPECT_EQ(back.medium, s.medium);
    EXPECT_EQ(back.anchors, s.anchors);
    EXPECT_EQ(back.noise_sigma, s.noise_sigma);
    EXPECT_EQ(back.unit_label, s.unit_label);
  }
}

TEST(ScenarioJson, Malformed) {
  EXPECT_EQ(code_of([] { parse_json("{", "x"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { scenario_from_json(json::parse(R"({"source": [1]})")); }), ErrorCode::ParseError);
  const auto bad_medium = json::parse(
      R"({"source": [0, 0], "start_time": 0, "medium": {"type": "water", "params": {}}, "anchors": []})");
  EXPECT_EQ(code_of([&] { scenario_from_json(bad_medium); }), ErrorCode::ParseError);
}

TEST(EstimateJson, RoundTrip) {
  Estimate e{{1.5, -2.0}, 0.25, SpeedModel{{0.4}, {}}, 1e-9, SolverKind::MTDOA, true, 42};
  const auto j = estimate_to_json(e);
  EXPECT_EQ(j.at("solver"), "MTDOA");
  const auto back = estimate_from_json(j);
  EXPECT_EQ(back.source, e.source);
  EXPECT_EQ(back.start_time, e.start_time);
  EXPECT_EQ(back.speed, e.speed);
  EXPECT_EQ(back.objective_value, e.objective_value);
  EXPECT_EQ(back.solver, e.solver);
  EXPECT_EQ(back.converged, e.converged);
  EXPECT_EQ(back.iterations, e.iterations);
}

TEST(Pgm, RoundTripWithComments) {
  const auto img = decode_pgm("P2\n# comment\n3 2\n255\n0 128 255\n10 20 30\n");
  ASSERT_EQ(img.width, 3u);
  ASSERT_EQ(img.height, 2u);
  EXPECT_DOUBLE_EQ(img.values[2], 1.0);
  EXPECT_DOUBLE_EQ(img.values[1], 128.0 / 255.0);
  const auto again = decode_pgm(encode_pgm(img));
  for (std::size_t k = 0; k < img.values.size(); ++k) EXPECT_NEAR(again.values[k], img.values[k], 0.5 / 255);
}

TEST(Pgm, Malformed) {
  EXPECT_EQ(code_of([] { decode_pgm("P5\n1 1\n255\n0\n"); }), ErrorCode::FrameDecodeError);
  EXPECT_EQ(code_of([] { decode_pgm("P2\n2 2\n255\n0 1 2\n"); }), ErrorCode::FrameDecodeError);
  EXPECT_EQ(code_of([] { decode_pgm("P2\n1 1\n255\n300\n"); }), ErrorCode::FrameDecodeError);
  EXPECT_EQ(code_of([] { read_pgm("/nonexistent/frame.pgm"); }), ErrorCode::FrameDecodeError);
}

TEST(FloatGrid, RoundTripWithInfinity) {
  const std::vector<double> v{0.1, std::numeric_limits<double>::infinity(), -3.25, 1.0 / 7.0};
  const auto g = decode_float_grid(encode_float_grid(2, 2, v), "g");
  EXPECT_EQ(g.width, 2u);
  EXPECT_EQ(g.values, v);
  EXPECT_EQ(code_of([] { decode_float_grid("P2F\n2 2\n1 2 3\n", "g"); }), ErrorCode::ParseError);
}
