#pragma once

// TDOA (known constant speed), mTDOA (unknown constant speed) and NTDOA
// (separable range/angle speed field) source estimators.
//
// All three work internally in a normalized frame: positions are centered on
// the anchor centroid and divided by their RMS spread, times are centered on
// their mean and divided by a time scale. Objective values and simplex
// tolerances are therefore dimensionless; estimates are mapped back to
// scenario units before they are returned.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srcloc/core.hpp"
#include "srcloc/nelder_mead.hpp"

namespace srcloc {

/// Taylor order K and number of Fourier terms L of the NTDOA speed field.
struct NtdoaOrder {
  std::size_t taylor_order{1};
  std::size_t fourier_terms{1};

  std::size_t unknowns() const { return taylor_order + 3 * fourier_terms + 4; }
  std::size_t min_anchors() const { return unknowns() + 1; }
};

/// Range: the squared-range residual c^2 (t - t0)^2 - R^2, the NTDOA
/// objective proper. Time: t - t0 - R / c, which has no zero-residual valley as
/// t0 -> -inf with c ~ R / |t0|, the direction Range drifts into on data the
/// separable model cannot fit exactly.
enum class NtdoaResidual { Range, Time };

inline std::string_view residual_name(NtdoaResidual r) { return r == NtdoaResidual::Range ? "range" : "time"; }

inline NtdoaResidual parse_residual(std::string_view text) {
  if (text == "range") return NtdoaResidual::Range;
  if (text == "time") return NtdoaResidual::Time;
  throw Error(ErrorCode::InvalidArgument, "unknown NTDOA residual '" + std::string(text) + "' (range|time)");
}

inline constexpr std::size_t kTdoaMinAnchors = 4;
inline constexpr std::size_t kMtdoaMinAnchors = 5;
inline constexpr double kPenaltyWeight = 1e6;

// ---------------------------------------------------------------------------
// Objectives. These take observations in whatever frame the caller uses.

/// sum_l [c^2 (t_l - t0)^2 - |r_l - r0|^2]^2; the TDOA and mTDOA objective.
inline double isotropic_objective(std::span<const AnchorObservation> obs, Point2 source, double t0, double c) {
  const double c2 = c * c;
  double sum = 0.0;
  for (const auto& o : obs) {
    const double dt = o.arrival_time - t0;
    const double r = c2 * dt * dt - squared_norm(o.position - source);
    sum += r * r;
  }
  return sum;
}

/// sum_i [(f(R_i) g(theta_i))^2 (t_i - t0)^2 - R_i^2]^2 with (R_i, theta_i)
/// taken relative to `source`.
inline double ntdoa_objective(std::span<const AnchorObservation> obs, Point2 source, double t0,
                              const SpeedModel& model) {
  double sum = 0.0;
  for (const auto& o : obs) {
    const Point2 d = o.position - source;
    const double r2 = squared_norm(d);
    const double theta = std::atan2(d.y, d.x);
    const double speed = speed_at(model, std::sqrt(r2), theta);
    const double dt = o.arrival_time - t0;
    const double r = speed * speed * dt * dt - r2;
    sum += r * r;
  }
  return sum;
}

namespace detail {

struct Frame {
  Point2 origin;
  double length_scale{1.0};
  double time_origin{0.0};
  double time_scale{1.0};

  Point2 to_local(Point2 p) const { return (1.0 / length_scale) * (p - origin); }
  Point2 to_world(Point2 p) const { return origin + length_scale * p; }
  double time_to_local(double t) const { return (t - time_origin) / time_scale; }
  double time_to_world(double t) const { return time_origin + time_scale * t; }
  double speed_to_local(double c) const { return c * time_scale / length_scale; }
  double speed_to_world(double c) const { return c * length_scale / time_scale; }
};

inline void require_finite(std::span<const AnchorObservation> obs) {
  for (const auto& o : obs) {
    if (!o.position.is_finite() || !std::isfinite(o.arrival_time)) {
      throw Error(ErrorCode::InvalidArgument, "observation contains a non-finite value");
    }
  }
}

/// Centroid / RMS-spread length normalization. The time scale is left to the
/// caller because it depends on whether the speed is known.
inline Frame spatial_frame(std::span<const AnchorObservation> obs) {
  Frame f;
  const double n = static_cast<double>(obs.size());
  Point2 c{};
  double tmean = 0.0;
  for (const auto& o : obs) {
    c = c + o.position;
    tmean += o.arrival_time;
  }
  f.origin = (1.0 / n) * c;
  f.time_origin = tmean / n;
  double spread = 0.0;
  for (const auto& o : obs) spread += squared_norm(o.position - f.origin);
  f.length_scale = std::sqrt(spread / n);
  if (!(f.length_scale > 0.0)) throw Error(ErrorCode::SingularGeometry, "all anchors coincide");
  return f;
}

inline double time_spread(std::span<const AnchorObservation> obs, double mean) {
  double s = 0.0;
  for (const auto& o : obs) s += (o.arrival_time - mean) * (o.arrival_time - mean);
  return std::sqrt(s / static_cast<double>(obs.size()));
}

inline std::vector<AnchorObservation> to_local(std::span<const AnchorObservation> obs, const Frame& f) {
  std::vector<AnchorObservation> out;
  out.reserve(obs.size());
  for (const auto& o : obs) out.push_back({f.to_local(o.position), f.time_to_local(o.arrival_time)});
  return out;
}

/// Least-squares solution of H x = b through the SVD pseudo-inverse, after
/// scaling every column to unit norm. Rank deficiency raises SingularGeometry.
inline Eigen::VectorXd pseudo_inverse_solve(const Eigen::MatrixXd& h, const Eigen::VectorXd& b) {
  constexpr double kRankTolerance = 1e-10;
  Eigen::VectorXd scale = h.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale(j) > 0.0)) throw Error(ErrorCode::SingularGeometry, "linearized system has an all-zero column");
  }
  const Eigen::MatrixXd hs = h * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(hs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() < h.cols() || !(sv(sv.size() - 1) > kRankTolerance * sv(0))) {
    throw Error(ErrorCode::SingularGeometry, "linearized system is rank deficient");
  }
  const Eigen::VectorXd y = svd.solve(b);
  return y.cwiseQuotient(scale);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct IsotropicState {
  Point2 source;
  double t0{};
  double c{};
};

/// Fallback seed used when the linear lift yields a non-positive c^2: anchor
/// centroid, earliest arrival, and a median-distance / median-delay speed.
inline IsotropicState heuristic_seed(std::span<const AnchorObservation> local) {
  Point2 centroid{};
  double tmin = std::numeric_limits<double>::infinity();
  for (const auto& o : local) {
    centroid = centroid + o.position;
    tmin = std::min(tmin, o.arrival_time);
  }
  centroid = (1.0 / static_cast<double>(local.size())) * centroid;
  std::vector<double> dists, delays;
  for (const auto& o : local) {
    dists.push_back(distance(o.position, centroid));
    delays.push_back(o.arrival_time - tmin);
  }
  const double md = median(dists);
  const double mt = median(delays);
  const double c = (md > 0.0 && mt > 0.0) ? md / mt : 1.0;
  return {centroid, tmin, c};
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Closed-form TDOA with known speed: the squared-range equations are lifted
/// to rows [2x_l, 2y_l, -2t_l, 1] against [x0, y0, c^2 t0, c^2 t0^2 - |r0|^2]
/// with right-hand side |r_l|^2 - c^2 t_l^2 and solved through the
/// pseudo-inverse.
inline Estimate tdoa_linear(std::span<const AnchorObservation> obs, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "speed must be positive");
  if (obs.size() < kTdoaMinAnchors) {
    throw Error(ErrorCode::InsufficientAnchors, "TDOA needs at least 4 anchors");
  }
  detail::require_finite(obs);

  detail::Frame frame = detail::spatial_frame(obs);
  frame.time_scale = frame.length_scale / c;  // unit speed in the local frame
  const auto local = detail::to_local(obs, frame);

  const auto n = static_cast<Eigen::Index>(local.size());
  // Equal arrival times make the time column a multiple of the constant one:
  // the source is then the point equidistant from all anchors and t0 follows
  // from the mean range.
  const bool equal_times = detail::time_spread(local, 0.0) <= 1e-12;
  Eigen::MatrixXd h(n, equal_times ? 3 : 4);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = local[static_cast<std::size_t>(i)];
    if (equal_times) {
      h.row(i) << 2.0 * o.position.x, 2.0 * o.position.y, 1.0;
    } else {
      h.row(i) << 2.0 * o.position.x, 2.0 * o.position.y, -2.0 * o.arrival_time, 1.0;
    }
    b(i) = squared_norm(o.position) - o.arrival_time * o.arrival_time;
  }
  const Eigen::VectorXd x = detail::pseudo_inverse_solve(h, b);
  const Point2 source{x(0), x(1)};
  double t0 = 0.0;
  if (equal_times) {
    for (const auto& o : local) t0 += o.arrival_time - distance(o.position, source);
    t0 /= static_cast<double>(local.size());
  } else {
    t0 = x(2);
  }

  Estimate est;
  est.solver = SolverKind::TDOA;
  est.source = frame.to_world(source);
  est.start_time = frame.time_to_world(t0);
  est.speed = SpeedModel::constant(c);
  est.objective_value = isotropic_objective(local, source, t0, 1.0);
  est.converged = true;
  est.iterations = 0;
  return est;
}

/// Joint location / start time / constant speed. Stage one solves the lifted
/// system [2x_l, 2y_l, t_l^2, -2t_l, 1] . [x0, y0, c^2, c^2 t0, c^2 t0^2 - |r0|^2] = |r_l|^2;
/// stage two refines (x0, y0, t0, c) on the squared-range objective with the
/// simplex.
inline Estimate mtdoa(std::span<const AnchorObservation> obs, const SimplexConfig& config = {}) {
  if (obs.size() < kMtdoaMinAnchors) {
    throw Error(ErrorCode::InsufficientAnchors, "mTDOA needs at least 5 anchors");
  }
  detail::require_finite(obs);
  config.validate();

  detail::Frame frame = detail::spatial_frame(obs);
  frame.time_scale = detail::time_spread(obs, frame.time_origin);
  if (!(frame.time_scale > 0.0)) {
    throw Error(ErrorCode::SingularGeometry, "all arrival times are identical");
  }
  const auto local = detail::to_local(obs, frame);

  const auto n = static_cast<Eigen::Index>(local.size());
  Eigen::MatrixXd h(n, 5);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& o = local[static_cast<std::size_t>(i)];
    const double t = o.arrival_time;
    h.row(i) << 2.0 * o.position.x, 2.0 * o.position.y, t * t, -2.0 * t, 1.0;
    b(i) = squared_norm(o.position);
  }
  const Eigen::VectorXd lifted = detail::pseudo_inverse_solve(h, b);

  detail::IsotropicState seed;
  if (lifted(2) > 0.0) {
    seed.source = {lifted(0), lifted(1)};
    seed.c = std::sqrt(lifted(2));
    seed.t0 = lifted(3) / lifted(2);
  } else {
    seed = detail::heuristic_seed(local);
  }

  const std::vector<double> x0{seed.source.x, seed.source.y, seed.t0, seed.c};
  auto objective = [&](std::span<const double> p) {
    return isotropic_objective(local, {p[0], p[1]}, p[2], p[3]);
  };
  const SimplexResult res = nelder_mead(objective, x0, config);

  Estimate est;
  est.solver = SolverKind::MTDOA;
  est.source = frame.to_world({res.x[0], res.x[1]});
  est.start_time = frame.time_to_world(res.x[2]);
  est.speed = SpeedModel::constant(frame.speed_to_world(std::abs(res.x[3])));
  est.objective_value = res.f;
  est.converged = res.converged;
  est.iterations = res.iterations;
  return est;
}

namespace detail {

struct NtdoaLayout {
  NtdoaOrder order;

  std::size_t size() const { return order.unknowns(); }
  static constexpr std::size_t t0 = 0, x0 = 1, y0 = 2, taylor = 3;
  std::size_t fourier(std::size_t l) const { return taylor + order.taylor_order + 1 + 3 * l; }

  SpeedModel model(std::span<const double> p) const {
    SpeedModel m;
    m.taylor.assign(p.begin() + taylor, p.begin() + taylor + order.taylor_order + 1);
    m.fourier.resize(order.fourier_terms);
    for (std::size_t l = 0; l < order.fourier_terms; ++l) {
      const std::size_t k = fourier(l);
      m.fourier[l] = {p[k], p[k + 1], p[k + 2]};
    }
    return m;
  }
};

/// Residual sum plus the soft feasibility penalty (non-positive
/// speed at an anchor, or a start time after the earliest arrival).
inline double penalized_ntdoa_objective(std::span<const AnchorObservation> obs, double earliest,
                                        Point2 source, double t0, const SpeedModel& model,
                                        NtdoaResidual residual = NtdoaResidual::Range) {
  double sum = 0.0;
  double violation = 0.0;
  for (const auto& o : obs) {
    const Point2 d = o.position - source;
    const double r2 = squared_norm(d);
    const double speed = speed_at(model, std::sqrt(r2), std::atan2(d.y, d.x));
    const double dt = o.arrival_time - t0;
    double r = 0.0;
    if (residual == NtdoaResidual::Range) {
      r = speed * speed * dt * dt - r2;
    } else if (speed > 0.0) {
      r = dt - std::sqrt(r2) / speed;
    }
    sum += r * r;
    if (speed <= 0.0) violation += speed * speed;
  }
  if (t0 > earliest) violation += (t0 - earliest) * (t0 - earliest);
  return sum + kPenaltyWeight * violation;
}

}  // namespace detail

namespace detail {

// Simplex fit of the NTDOA unknowns from x0: omega_l held fixed first, then
// everything free, sharing `budget` iterations.
inline SimplexResult staged_ntdoa_fit(std::span<const AnchorObservation> local, const NtdoaLayout& layout,
                                      const std::vector<double>& x0, const SimplexConfig& config,
                                      NtdoaResidual residual, std::size_t budget) {
  const NtdoaOrder order = layout.order;
  double earliest = std::numeric_limits<double>::infinity();
  for (const auto& o : local) earliest = std::min(earliest, o.arrival_time);

  auto objective = [&](std::span<const double> p) {
    return penalized_ntdoa_objective(local, earliest, {p[layout.x0], p[layout.y0]}, p[layout.t0],
                                             layout.model(p), residual);
  };

  // Stage one holds every omega_l at its warm-start value; stage two frees them.
  std::vector<std::size_t> free_index;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    bool is_omega = false;
    for (std::size_t l = 0; l < order.fourier_terms; ++l) is_omega = is_omega || i == layout.fourier(l);
    if (!is_omega) free_index.push_back(i);
  }
  std::vector<double> full = x0;
  auto reduced_objective = [&](std::span<const double> q) {
    for (std::size_t i = 0; i < free_index.size(); ++i) full[free_index[i]] = q[i];
    return objective(full);
  };
  std::vector<double> q0(free_index.size());
  for (std::size_t i = 0; i < free_index.size(); ++i) q0[i] = x0[free_index[i]];
  SimplexConfig first = config;
  first.max_iterations = budget;
  const SimplexResult stage = nelder_mead(reduced_objective, q0, first);
  std::vector<double> x1 = x0;
  for (std::size_t i = 0; i < free_index.size(); ++i) x1[free_index[i]] = stage.x[i];

  SimplexResult res{x1, objective(x1), false, 0, 0};
  if (budget > stage.iterations) {
    SimplexConfig second = config;
    second.max_iterations = budget - stage.iterations;
    res = nelder_mead(objective, x1, second);
  }
  res.iterations += stage.iterations;

  return res;
}

}  // namespace detail

/// Nonlinear TDOA over (t0, x0, y0, a_0..a_K, {omega_l, b_l, d_l}), warm
/// started from the mTDOA estimate with a_0 = c_mtdoa, higher Taylor terms and
/// all Fourier amplitudes zero, omega_l = l. Polar coordinates of every
/// anchor are recomputed from the current source iterate.
inline Estimate ntdoa(std::span<const AnchorObservation> obs, NtdoaOrder order = {},
                      const SimplexConfig& config = {}, NtdoaResidual residual = NtdoaResidual::Range) {
  if (obs.size() < order.min_anchors()) {
    throw Error(ErrorCode::InsufficientAnchors, "NTDOA with K=" + std::to_string(order.taylor_order) +
                                                    ", L=" + std::to_string(order.fourier_terms) + " needs at least " +
                                                    std::to_string(order.min_anchors()) + " anchors");
  }
  detail::require_finite(obs);
  config.validate();

  detail::Frame frame = detail::spatial_frame(obs);
  frame.time_scale = detail::time_spread(obs, frame.time_origin);
  if (!(frame.time_scale > 0.0)) frame.time_scale = 1.0;
  const auto local = detail::to_local(obs, frame);

  detail::IsotropicState seed;
  try {
    const Estimate warm = mtdoa(local, config);
    seed = {warm.source, warm.start_time, warm.speed.taylor.front()};
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularGeometry) throw;
    seed = detail::heuristic_seed(local);
  }

  const detail::NtdoaLayout layout{order};
  std::vector<double> x0(layout.size(), 0.0);
  x0[layout.t0] = seed.t0;
  x0[layout.x0] = seed.source.x;
  x0[layout.y0] = seed.source.y;
  x0[layout.taylor] = seed.c;
  for (std::size_t l = 0; l < order.fourier_terms; ++l) x0[layout.fourier(l)] = static_cast<double>(l + 1);

  const std::size_t budget = config.iteration_budget(layout.size());
  SimplexResult res;
  if (residual == NtdoaResidual::Range) {
    // The range objective has a zero-residual valley at t0 -> -inf; seed it from the time fit.
    const SimplexResult pre = detail::staged_ntdoa_fit(local, layout, x0, config, NtdoaResidual::Time, budget);
    if (pre.iterations < budget) {
      res = detail::staged_ntdoa_fit(local, layout, pre.x, config, NtdoaResidual::Range, budget - pre.iterations);
      res.iterations += pre.iterations;
    } else {
      res = pre;
      res.converged = false;
      double earliest = std::numeric_limits<double>::infinity();
      for (const auto& o : local) earliest = std::min(earliest, o.arrival_time);
      res.f = detail::penalized_ntdoa_objective(local, earliest, {res.x[layout.x0], res.x[layout.y0]},
                                                res.x[layout.t0], layout.model(res.x), NtdoaResidual::Range);
    }
  } else {
    res = detail::staged_ntdoa_fit(local, layout, x0, config, residual, budget);
  }

  const SpeedModel local_model = layout.model(res.x);
  Estimate est;
  est.solver = SolverKind::NTDOA;
  est.source = frame.to_world({res.x[layout.x0], res.x[layout.y0]});
  est.start_time = frame.time_to_world(res.x[layout.t0]);
  est.speed.fourier = local_model.fourier;
  est.speed.taylor.resize(local_model.taylor.size());
  for (std::size_t k = 0; k < local_model.taylor.size(); ++k) {
    // a_k R^k is a speed: a_k(world) = a_k(local) * L^(1-k) / T
    est.speed.taylor[k] = local_model.taylor[k] * std::pow(frame.length_scale, 1.0 - static_cast<double>(k)) /
                          frame.time_scale;
  }
  est.objective_value = res.f;
  est.converged = res.converged;
  est.iterations = res.iterations;
  return est;
}

}  // namespace srcloc
