#pragma once

// Forward models: anchor placement and synthetic arrival times for the
// isotropic and the separable-anisotropic media.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "srcloc/core.hpp"
#include "srcloc/rng.hpp"

namespace srcloc {

struct Region {
  Point2 min;
  Point2 max;

  bool contains(Point2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
};

struct PlacementSpec {
  Region region{{0.0, 0.0}, {1.0, 1.0}};
  std::size_t count{1};
  double exclusion_radius{0.0};  // no anchor closer than this to the source
  std::uint64_t seed{0};
};

/// `count` points i.i.d. uniform over the region, rejection-sampled outside
/// the exclusion disk around `source`.
inline std::vector<Point2> place_anchors(const PlacementSpec& spec, Point2 source) {
  if (spec.count < 1) throw Error(ErrorCode::InvalidArgument, "anchor count must be >= 1");
  if (!(spec.exclusion_radius >= 0.0)) throw Error(ErrorCode::InvalidArgument, "exclusion radius must be >= 0");
  if (!(spec.region.min.x < spec.region.max.x && spec.region.min.y < spec.region.max.y)) {
    throw Error(ErrorCode::InvalidArgument, "placement region is degenerate");
  }

  Rng rng(spec.seed);
  std::uniform_real_distribution<double> ux(spec.region.min.x, spec.region.max.x);
  std::uniform_real_distribution<double> uy(spec.region.min.y, spec.region.max.y);
  const double excl2 = spec.exclusion_radius * spec.exclusion_radius;
  const std::size_t max_draws = 10'000 * spec.count;

  std::vector<Point2> points;
  points.reserve(spec.count);
  std::size_t draws = 0;
  while (points.size() < spec.count) {
    if (draws++ >= max_draws) {
      throw Error(ErrorCode::PlacementInfeasible, "rejection sampling exhausted its draw budget");
    }
    const double x = ux(rng);
    const double y = uy(rng);
    const Point2 p{x, y};
    if (spec.exclusion_radius > 0.0 && squared_norm(p - source) < excl2) continue;
    points.push_back(p);
  }
  return points;
}

namespace detail {

inline void add_gaussian_noise(std::vector<AnchorObservation>& obs, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
  if (sigma == 0.0) return;
  Rng rng(derive_seed({seed, hash_label("arrival-noise")}));
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& o : obs) o.arrival_time += noise(rng);
}

}  // namespace detail

/// t_l = t0 + |r_l - r0| / c + noise.
inline std::vector<AnchorObservation> simulate_isotropic(Point2 source, double t0, double c,
                                                         std::span<const Point2> anchors, double sigma,
                                                         std::uint64_t seed) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "speed must be positive");
  std::vector<AnchorObservation> obs;
  obs.reserve(anchors.size());
  for (const auto& p : anchors) {
    const double d = distance(p, source);
    if (!(d > 0.0)) throw Error(ErrorCode::DegenerateGeometry, "anchor coincides with source");
    obs.push_back({p, t0 + d / c});
  }
  detail::add_gaussian_noise(obs, sigma, seed);
  return obs;
}

/// Effective-speed straight-ray model: t_l = t0 + R_l / (f(R_l) g(theta_l)) + noise.
/// This is the generative model under which the NTDOA residuals vanish at the truth.
inline std::vector<AnchorObservation> simulate_anisotropic(Point2 source, double t0, const SpeedModel& model,
                                                           std::span<const Point2> anchors, double sigma,
                                                           std::uint64_t seed) {
  std::vector<AnchorObservation> obs;
  obs.reserve(anchors.size());
  for (const auto& p : anchors) {
    const auto polar = polar_relative(p, source);
    const double speed = speed_at(model, polar.radius, polar.theta);
    if (!(speed > 0.0) || !std::isfinite(speed)) {
      throw Error(ErrorCode::InvalidSpeedField, "non-positive speed at an anchor");
    }
    obs.push_back({p, t0 + polar.radius / speed});
  }
  detail::add_gaussian_noise(obs, sigma, seed);
  return obs;
}

/// Runs the forward model matching `medium`.
inline std::vector<AnchorObservation> simulate(Point2 source, double t0, const Medium& medium,
                                               std::span<const Point2> anchors, double sigma, std::uint64_t seed) {
  if (const auto* aniso = std::get_if<Anisotropic>(&medium)) {
    return simulate_anisotropic(source, t0, aniso->model, anchors, sigma, seed);
  }
  return simulate_isotropic(source, t0, medium_speed_model(medium).taylor.front(), anchors, sigma, seed);
}

}  // namespace srcloc
