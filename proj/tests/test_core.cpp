#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "srcloc/core.hpp"

using namespace srcloc;
constexpr double kPi = std::numbers::pi;

TEST(PolarRelative, AxisAlignedUnit) {
  const auto p = polar_relative({1, 0}, {0, 0});
  EXPECT_DOUBLE_EQ(p.radius, 1.0);
  EXPECT_DOUBLE_EQ(p.theta, 0.0);
}

TEST(PolarRelative, PositiveYAxis) {
  const auto p = polar_relative({0, 2}, {0, 0});
  EXPECT_DOUBLE_EQ(p.radius, 2.0);
  EXPECT_DOUBLE_EQ(p.theta, kPi / 2);
}

TEST(PolarRelative, Diagonal) {
  const auto p = polar_relative({1, 1}, {0, 0});
  EXPECT_DOUBLE_EQ(p.radius, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(p.theta, kPi / 4);
}

TEST(PolarRelative, NegativeXAxisMapsToPlusPi) {
  EXPECT_DOUBLE_EQ(polar_relative({-1, 0}, {0, 0}).theta, kPi);
  EXPECT_DOUBLE_EQ(polar_relative({-1, -0.0}, {0, 0}).theta, kPi);
}

TEST(PolarRelative, CoincidentPointsThrow) {
  try {
    polar_relative({2, 3}, {2, 3});
    FAIL() << "expected DegenerateGeometry";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateGeometry);
  }
}

TEST(PolarRelative, LeftInverseOfPolarToCartesian) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ur(1e-3, 100.0), ut(-kPi, kPi), uo(-50, 50);
  for (int i = 0; i < 2000; ++i) {
    const Point2 origin{uo(rng), uo(rng)};
    double theta = ut(rng);
    if (theta == -kPi) theta = kPi;
    const double r = ur(rng);
    const Point2 p{origin.x + r * std::cos(theta), origin.y + r * std::sin(theta)};
    const auto polar = polar_relative(p, origin);
    EXPECT_GT(polar.radius, 0.0);
    EXPECT_GT(polar.theta, -kPi);
    EXPECT_LE(polar.theta, kPi);
    EXPECT_NEAR(polar.radius, r, 1e-9 * (1 + r + std::abs(origin.x) + std::abs(origin.y)));
    EXPECT_NEAR(origin.x + polar.radius * std::cos(polar.theta), p.x, 1e-9 * (1 + r));
    EXPECT_NEAR(origin.y + polar.radius * std::sin(polar.theta), p.y, 1e-9 * (1 + r));
  }
}

TEST(SpeedAt, ConstantModel) {
  const auto m = SpeedModel::constant(3.5);
  EXPECT_DOUBLE_EQ(speed_at(m, 0.0, 0.0), 3.5);
  EXPECT_DOUBLE_EQ(speed_at(m, 12.0, -2.0), 3.5);
}

TEST(SpeedAt, LinearTaylor) { EXPECT_DOUBLE_EQ(speed_at(SpeedModel{{1.0, 0.5}, {}}, 2.0, 0.3), 2.0); }

TEST(SpeedAt, SingleCosineTerm) {
  EXPECT_DOUBLE_EQ(speed_at(SpeedModel{{1.0}, {{1.0, 0.2, 0.0}}}, 5.0, 0.0), 1.2);
}

TEST(SpeedAt, MatchesDirectSeriesEvaluation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1), ur(0, 10), ut(-kPi, kPi);
  for (int i = 0; i < 500; ++i) {
    SpeedModel m;
    m.taylor = {u(rng), u(rng), u(rng), u(rng)};
    m.fourier = {{1 + u(rng), u(rng), u(rng)}, {2 + u(rng), u(rng), u(rng)}};
    const double r = ur(rng), t = ut(rng);
    double f = 0.0;
    for (std::size_t k = 0; k < m.taylor.size(); ++k) f += m.taylor[k] * std::pow(r, static_cast<double>(k));
    double g = 1.0;
    for (const auto& term : m.fourier) g += term.b * std::cos(term.omega * t) + term.d * std::sin(term.omega * t);
    EXPECT_NEAR(speed_at(m, r, t), f * g, 1e-10 * (1 + std::abs(f * g)));
  }
}

TEST(SpeedAt, EmptyFourierIsTaylorAlone) {
  const SpeedModel m{{0.4, -0.1, 0.02}, {}};
  for (double r : {0.0, 0.5, 3.0}) {
    for (double t : {-3.0, 0.0, 1.0}) EXPECT_DOUBLE_EQ(speed_at(m, r, t), 0.4 - 0.1 * r + 0.02 * r * r);
  }
}

TEST(SpeedModel, OrderAccessors) {
  const SpeedModel m{{1, 2, 3}, {{1, 0, 0}}};
  EXPECT_EQ(m.taylor_order(), 2u);
  EXPECT_EQ(m.fourier_terms(), 1u);
  EXPECT_FALSE(m.is_constant());
  EXPECT_TRUE(SpeedModel::constant(2).is_constant());
}

TEST(Medium, SpeedModelOfEachVariant) {
  EXPECT_EQ(medium_speed_model(IsotropicKnown{2.0}), SpeedModel::constant(2.0));
  EXPECT_EQ(medium_speed_model(IsotropicUnknown{3.0}), SpeedModel::constant(3.0));
  const SpeedModel m{{1, 0.1}, {{1, 0.2, 0.0}}};
  EXPECT_EQ(medium_speed_model(Anisotropic{m}), m);
}

TEST(SolverKind, NamesRoundTrip) {
  for (auto k : {SolverKind::TDOA, SolverKind::MTDOA, SolverKind::NTDOA}) {
    EXPECT_EQ(parse_solver_kind(solver_name(k)), k);
  }
  EXPECT_THROW(parse_solver_kind("foo"), Error);
}

TEST(MeanSpeedOver, AveragesFieldAtAnchors) {
  const SpeedModel m{{1.0, 1.0}, {}};
  const std::vector<AnchorObservation> a{{{1, 0}, 0}, {{0, 3}, 0}};
  EXPECT_DOUBLE_EQ(mean_speed_over(m, {0, 0}, a), (2.0 + 4.0) / 2);
}

TEST(Error, MessageCarriesName) {
  const Error e(ErrorCode::InsufficientAnchors, "need 9");
  EXPECT_EQ(e.name(), "InsufficientAnchors");
  EXPECT_STREQ(e.what(), "InsufficientAnchors: need 9");
}
