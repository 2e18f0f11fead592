#pragma once

// Shared domain types and the polar/speed-field primitives every estimator
// builds on. Units are whatever the scenario uses (mm, km, pixel); nothing in
// the library converts them.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "srcloc/error.hpp"

namespace srcloc {

struct Point2 {
  double x{};
  double y{};

  bool is_finite() const { return std::isfinite(x) && std::isfinite(y); }
  friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double squared_norm(Point2 p) { return p.x * p.x + p.y * p.y; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct AnchorObservation {
  Point2 position;
  double arrival_time{};

  friend bool operator==(const AnchorObservation&, const AnchorObservation&) = default;
};

/// One angular harmonic of g(theta): b*cos(omega*theta) + d*sin(omega*theta).
struct FourierTerm {
  double omega{};
  double b{};
  double d{};

  friend bool operator==(const FourierTerm&, const FourierTerm&) = default;
};

/// Separable speed field c(R, theta) = f(R) g(theta) with
/// f(R) = sum_k a_k R^k and g(theta) = 1 + sum_l (b_l cos(w_l theta) + d_l sin(w_l theta)).
struct SpeedModel {
  std::vector<double> taylor{1.0};
  std::vector<FourierTerm> fourier;

  static SpeedModel constant(double c) { return SpeedModel{{c}, {}}; }

  std::size_t taylor_order() const { return taylor.empty() ? 0 : taylor.size() - 1; }
  std::size_t fourier_terms() const { return fourier.size(); }
  bool is_constant() const { return taylor.size() == 1 && fourier.empty(); }

  friend bool operator==(const SpeedModel&, const SpeedModel&) = default;
};

struct PolarCoordinates {
  double radius{};
  double theta{};  // in (-pi, pi]
};

/// Polar coordinates of `p` seen from `origin`. Throws DegenerateGeometry when
/// the points coincide.
inline PolarCoordinates polar_relative(Point2 p, Point2 origin) {
  const Point2 d = p - origin;
  const double r = norm(d);
  if (!(r > 0.0)) {
    throw Error(ErrorCode::DegenerateGeometry, "point coincides with polar origin");
  }
  double theta = std::atan2(d.y, d.x);
  // atan2 returns -pi for (negative x, -0.0 y); fold onto the closed end.
  if (theta <= -std::numbers::pi) theta = std::numbers::pi;
  return {r, theta};
}

inline double radial_factor(std::span<const double> taylor, double radius) {
  // Horner
  double f = 0.0;
  for (auto it = taylor.rbegin(); it != taylor.rend(); ++it) f = f * radius + *it;
  return f;
}

inline double angular_factor(std::span<const FourierTerm> fourier, double theta) {
  double g = 1.0;
  for (const auto& term : fourier) {
    g += term.b * std::cos(term.omega * theta) + term.d * std::sin(term.omega * theta);
  }
  return g;
}

/// Pure evaluation of f(R) g(theta); may be non-positive for pathological
/// coefficients, callers validate.
inline double speed_at(const SpeedModel& model, double radius, double theta) {
  return radial_factor(model.taylor, radius) * angular_factor(model.fourier, theta);
}

struct IsotropicKnown {
  double c{};
  friend bool operator==(const IsotropicKnown&, const IsotropicKnown&) = default;
};
struct IsotropicUnknown {
  double c{};
  friend bool operator==(const IsotropicUnknown&, const IsotropicUnknown&) = default;
};
struct Anisotropic {
  SpeedModel model;
  friend bool operator==(const Anisotropic&, const Anisotropic&) = default;
};

using Medium = std::variant<IsotropicKnown, IsotropicUnknown, Anisotropic>;

/// Speed model equivalent to a medium (constant model for the isotropic ones).
inline SpeedModel medium_speed_model(const Medium& medium) {
  return std::visit(
      [](const auto& m) -> SpeedModel {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Anisotropic>) {
          return m.model;
        } else {
          return SpeedModel::constant(m.c);
        }
      },
      medium);
}

/// Ground truth record against which estimates are scored.
struct Scenario {
  Point2 source;
  double start_time{};
  Medium medium{IsotropicKnown{1.0}};
  std::vector<AnchorObservation> anchors;
  double noise_sigma{};
  std::string unit_label{"unit"};
};

enum class SolverKind { TDOA, MTDOA, NTDOA };

constexpr std::string_view solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::TDOA: return "TDOA";
    case SolverKind::MTDOA: return "MTDOA";
    case SolverKind::NTDOA: return "NTDOA";
  }
  return "?";
}

inline SolverKind parse_solver_kind(std::string_view text) {
  if (text == "TDOA" || text == "tdoa") return SolverKind::TDOA;
  if (text == "MTDOA" || text == "mtdoa" || text == "mTDOA") return SolverKind::MTDOA;
  if (text == "NTDOA" || text == "ntdoa") return SolverKind::NTDOA;
  throw Error(ErrorCode::InvalidArgument, "unknown solver '" + std::string(text) + "'");
}

struct Estimate {
  Point2 source;
  double start_time{};
  SpeedModel speed;  // single coefficient for TDOA / MTDOA
  double objective_value{};
  SolverKind solver{SolverKind::TDOA};
  bool converged{};
  std::size_t iterations{};
};

/// Mean of the speed field over the anchor positions, seen from `source`.
/// Anchors coincident with the source are skipped.
inline double mean_speed_over(const SpeedModel& model, Point2 source,
                              std::span<const AnchorObservation> anchors) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& a : anchors) {
    const double r = distance(a.position, source);
    if (!(r > 0.0)) continue;
    const auto polar = polar_relative(a.position, source);
    sum += speed_at(model, polar.radius, polar.theta);
    ++count;
  }
  return count == 0 ? model.taylor.front() : sum / static_cast<double>(count);
}

}  // namespace srcloc
