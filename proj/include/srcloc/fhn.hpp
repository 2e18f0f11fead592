#pragma once

// Modified FitzHugh-Nagumo medium on a square grid:
//   du/dt = D lap(u) + k [u (1 - u)(u - a) - v]
//   dv/dt = k eps (beta u - gamma v - delta)
// k (kinetic_rate) rescales time for the reaction only, which sets the front
// speed independently of the spiral wavelength. Explicit Euler, five-point
// Laplacian on cell centers; no-flux walls copy the edge cell into the ghost.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srcloc/core.hpp"
#include "srcloc/forward.hpp"
#include "srcloc/io.hpp"
#include "srcloc/pgm.hpp"

namespace srcloc {

enum class StimulusProtocol { CrossField, Point };

struct FhnConfig {
  double domain_size = 80.0;  // mm
  std::size_t grid_n = 700;
  double dt = 0.05 / 3.6;
  std::size_t steps = 30000;
  double diffusion = 0.034 * 3.6;
  double kinetic_rate = 3.6;
  double a = 0.02;
  double epsilon = 0.02;
  double beta = 0.5;
  double gamma = 1.0;
  double delta = 0.0;
  double u_threshold = 0.5;
  double v_tip = 0.1;
  double hysteresis = 0.1;

  StimulusProtocol protocol = StimulusProtocol::CrossField;
  double s1_width = 0.6;                                 // mm, left-edge strip
  Region s2_region{{0.0, 0.0}, {40.0, 40.0}};            // fired when the S1 back passes mid-domain
  Point2 point_center{40.0, 40.0};                       // Point protocol only
  double point_radius = 1.0;

  double record_start = 160.0;     // crossings before this time are not kept
  std::size_t tip_interval = 50;   // steps between tip detections
  double core_exclusion = 2.0;     // mm around the core left unlabeled
  std::uint64_t seed = 0;          // default seed for anchor sampling downstream

  double dx() const { return domain_size / static_cast<double>(grid_n); }

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidArgument, m); };
    if (!(domain_size > 0.0)) bad("domain_size must be > 0");
    if (grid_n < 4) bad("grid_n must be >= 4");
    if (!(dt > 0.0) || steps < 1) bad("dt and steps must be positive");
    if (!(diffusion > 0.0)) bad("diffusion must be > 0");
    if (!(kinetic_rate >= 0.0)) bad("kinetic_rate must be >= 0");
    if (!(u_threshold > 0.0 && u_threshold < 1.0)) bad("u_threshold must lie in (0, 1)");
    if (!(hysteresis > 0.0 && hysteresis < u_threshold)) bad("hysteresis must lie in (0, u_threshold)");
    if (tip_interval < 1) bad("tip_interval must be >= 1");
    const double limit = dx() * dx() / (4.0 * diffusion);
    if (dt > limit) {
      bad("dt = " + format_double(dt) + " exceeds the explicit stability limit dx^2/(4D) = " + format_double(limit));
    }
  }
};

struct TipSample {
  double time;
  Point2 position;
};

/// Per-pulse first-crossing times on cell centers; +inf where a pulse was
/// not recorded. Cell (i, j) sits at ((i + 0.5) dx, (j + 0.5) dx).
struct ActivationMap {
  std::size_t grid_n = 0;
  double cell_size = 0.0;
  std::vector<std::vector<double>> pulses;  // pulses[p][j * grid_n + i]
  Point2 rotor_core;
  double period = std::numeric_limits<double>::infinity();
  std::size_t labeled_cells = 0;
  std::vector<TipSample> tips;

  std::size_t pulse_count() const { return pulses.size(); }

  double time_at(std::size_t pulse, std::size_t i, std::size_t j) const { return pulses.at(pulse)[j * grid_n + i]; }

  Point2 cell_center(std::size_t i, std::size_t j) const {
    return {(static_cast<double>(i) + 0.5) * cell_size, (static_cast<double>(j) + 0.5) * cell_size};
  }

  std::size_t finite_cells(std::size_t pulse) const {
    return static_cast<std::size_t>(
        std::count_if(pulses.at(pulse).begin(), pulses.at(pulse).end(), [](double t) { return std::isfinite(t); }));
  }

  /// A pulse is complete when every labeled cell has a crossing for it.
  bool complete(std::size_t pulse) const { return finite_cells(pulse) == labeled_cells; }

  std::vector<std::size_t> complete_pulses() const {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p < pulses.size(); ++p) {
      if (complete(p)) out.push_back(p);
    }
    return out;
  }
};

namespace detail {

struct FhnState {
  std::size_t n;
  std::vector<double> u, v, un, vn;

  explicit FhnState(std::size_t grid_n)
      : n(grid_n), u(grid_n * grid_n, 0.0), v(grid_n * grid_n, 0.0), un(grid_n * grid_n), vn(grid_n * grid_n) {}
};

/// One explicit step; returns false if |u| exceeded 10 anywhere.
inline bool fhn_step(const FhnConfig& c, FhnState& s) {
  const std::size_t n = s.n;
  const double r = c.diffusion * c.dt / (c.dx() * c.dx());
  const double kdt = c.kinetic_rate * c.dt;
  const double* u = s.u.data();
  const double* v = s.v.data();
  double* un = s.un.data();
  double* vn = s.vn.data();
  bool ok = true;
  for (std::size_t j = 0; j < n; ++j) {
    const double* row = u + j * n;
    const double* below = u + (j > 0 ? j - 1 : 0) * n;
    const double* above = u + (j + 1 < n ? j + 1 : n - 1) * n;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t il = i > 0 ? i - 1 : 0;
      const std::size_t ir = i + 1 < n ? i + 1 : n - 1;
      const std::size_t k = j * n + i;
      const double uc = row[i];
      const double vc = v[k];
      const double lap = row[il] + row[ir] + below[i] + above[i] - 4.0 * uc;
      const double unew = uc + r * lap + kdt * (uc * (1.0 - uc) * (uc - c.a) - vc);
      un[k] = unew;
      vn[k] = vc + kdt * c.epsilon * (c.beta * uc - c.gamma * vc - c.delta);
      ok &= std::fabs(unew) <= 10.0;
    }
  }
  std::swap(s.u, s.un);
  std::swap(s.v, s.vn);
  return ok;
}

inline void excite_region(const FhnConfig& c, FhnState& s, auto&& inside) {
  const std::size_t n = s.n;
  const double dx = c.dx();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 p{(static_cast<double>(i) + 0.5) * dx, (static_cast<double>(j) + 0.5) * dx};
      if (inside(p)) s.u[j * n + i] = 1.0;
    }
  }
}

/// Centroid of 2x2 squares where both u - u_th and v - v_tip change sign.
inline std::optional<Point2> find_tip(const FhnConfig& c, const FhnState& s) {
  const std::size_t n = s.n;
  const double dx = c.dx();
  auto straddles = [](double a0, double a1, double a2, double a3) {
    const bool all_pos = a0 > 0 && a1 > 0 && a2 > 0 && a3 > 0;
    const bool all_neg = a0 < 0 && a1 < 0 && a2 < 0 && a3 < 0;
    return !all_pos && !all_neg;
  };
  double sx = 0.0, sy = 0.0;
  std::size_t m = 0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t k0 = j * n + i, k1 = k0 + 1, k2 = k0 + n, k3 = k2 + 1;
      if (!straddles(s.u[k0] - c.u_threshold, s.u[k1] - c.u_threshold, s.u[k2] - c.u_threshold,
                     s.u[k3] - c.u_threshold)) {
        continue;
      }
      if (!straddles(s.v[k0] - c.v_tip, s.v[k1] - c.v_tip, s.v[k2] - c.v_tip, s.v[k3] - c.v_tip)) continue;
      sx += (static_cast<double>(i) + 1.0) * dx;
      sy += (static_cast<double>(j) + 1.0) * dx;
      ++m;
    }
  }
  if (m == 0) return std::nullopt;
  return Point2{sx / static_cast<double>(m), sy / static_cast<double>(m)};
}

struct Crossing {
  std::uint32_t cell;
  double time;
};

// Groups time-ordered crossings per cell (CSR layout).
struct CrossingTable {
  std::vector<std::size_t> offset;
  std::vector<double> times;

  std::size_t count(std::size_t cell) const { return offset[cell + 1] - offset[cell]; }
  double at(std::size_t cell, std::size_t k) const { return times[offset[cell] + k]; }
};

inline CrossingTable group_crossings(std::size_t cells, const std::vector<Crossing>& events) {
  CrossingTable t;
  t.offset.assign(cells + 1, 0);
  for (const auto& e : events) ++t.offset[e.cell + 1];
  for (std::size_t k = 0; k < cells; ++k) t.offset[k + 1] += t.offset[k];
  t.times.resize(events.size());
  std::vector<std::size_t> fill(t.offset.begin(), t.offset.end() - 1);
  for (const auto& e : events) t.times[fill[e.cell]++] = e.time;
  return t;
}

// Pulse p at a cell is its crossing number p + shift[cell]. Shifts are
// propagated breadth-first from a seed cell by matching the nearest crossing
// of each neighbor, never stepping across the ray from the core toward +x,
// so a pulse is one continuous sheet that jumps by a period only at the ray.
inline ActivationMap unwrap_pulses(const FhnConfig& c, const CrossingTable& table, Point2 core) {
  const std::size_t n = c.grid_n;
  const double dx = c.dx();
  const double inf = std::numeric_limits<double>::infinity();
  auto center = [&](std::size_t idx) {
    return Point2{(static_cast<double>(idx % n) + 0.5) * dx, (static_cast<double>(idx / n) + 0.5) * dx};
  };
  auto usable = [&](std::size_t idx) {
    return table.count(idx) > 0 && distance(center(idx), core) >= c.core_exclusion;
  };

  // Seed: a usable cell opposite the cut, a few core radii away.
  const double seed_r = std::max(4.0 * c.core_exclusion, 10.0 * dx);
  Point2 seed_pt{std::clamp(core.x - seed_r, 0.5 * dx, c.domain_size - 0.5 * dx), core.y};
  std::size_t seed = static_cast<std::size_t>(std::clamp(std::floor(seed_pt.y / dx), 0.0, double(n - 1))) * n +
                     static_cast<std::size_t>(std::clamp(std::floor(seed_pt.x / dx), 0.0, double(n - 1)));
  if (!usable(seed)) {
    std::size_t best = table.offset.size();
    double best_d = inf;
    for (std::size_t k = 0; k < n * n; ++k) {
      if (!usable(k)) continue;
      const double d = distance(center(k), seed_pt);
      if (d < best_d) best_d = d, best = k;
    }
    if (best == table.offset.size()) throw Error(ErrorCode::NoSpiral, "no recorded crossings outside the core");
    seed = best;
  }

  constexpr long kUnset = std::numeric_limits<long>::min();
  std::vector<long> shift(n * n, kUnset);
  shift[seed] = 0;
  std::deque<std::size_t> queue{seed};
  auto crosses_cut = [&](std::size_t lower, std::size_t upper) {
    const Point2 a = center(lower), b = center(upper);
    return a.x > core.x && a.y < core.y && b.y >= core.y;
  };
  while (!queue.empty()) {
    const std::size_t m = queue.front();
    queue.pop_front();
    const std::size_t i = m % n, j = m / n;
    const std::size_t km = table.count(m) / 2;
    const double tm = table.at(m, km);
    const long pulse = static_cast<long>(km) - shift[m];
    auto visit = [&](std::size_t nb) {
      if (shift[nb] != kUnset || !usable(nb)) return;
      std::size_t best = 0;
      for (std::size_t k = 1; k < table.count(nb); ++k) {
        if (std::fabs(table.at(nb, k) - tm) < std::fabs(table.at(nb, best) - tm)) best = k;
      }
      shift[nb] = static_cast<long>(best) - pulse;
      queue.push_back(nb);
    };
    if (i > 0) visit(m - 1);
    if (i + 1 < n) visit(m + 1);
    if (j > 0 && !crosses_cut(m - n, m)) visit(m - n);
    if (j + 1 < n && !crosses_cut(m, m + n)) visit(m + n);
  }

  ActivationMap map;
  map.grid_n = n;
  map.cell_size = dx;
  map.rotor_core = core;
  const std::size_t count = table.count(seed);
  map.pulses.assign(count, std::vector<double>(n * n, inf));
  for (std::size_t k = 0; k < n * n; ++k) {
    if (shift[k] == kUnset) continue;
    ++map.labeled_cells;
    for (std::size_t p = 0; p < count; ++p) {
      const long idx = static_cast<long>(p) + shift[k];
      if (idx >= 0 && idx < static_cast<long>(table.count(k))) map.pulses[p][k] = table.at(k, static_cast<std::size_t>(idx));
    }
  }
  if (count >= 2) {
    std::vector<double> gaps;
    for (std::size_t p = 1; p < count; ++p) gaps.push_back(table.at(seed, p) - table.at(seed, p - 1));
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    map.period = gaps[gaps.size() / 2];
  }
  return map;
}

// Without a rotor there is nothing to unwrap: pulse p is crossing p.
inline ActivationMap raw_pulses(const FhnConfig& c, const CrossingTable& table, Point2 origin) {
  const std::size_t n = c.grid_n;
  ActivationMap map;
  map.grid_n = n;
  map.cell_size = c.dx();
  map.rotor_core = origin;
  std::size_t count = 0;
  for (std::size_t k = 0; k < n * n; ++k) count = std::max(count, table.count(k));
  map.pulses.assign(count, std::vector<double>(n * n, std::numeric_limits<double>::infinity()));
  for (std::size_t k = 0; k < n * n; ++k) {
    if (table.count(k) > 0) ++map.labeled_cells;
    for (std::size_t p = 0; p < table.count(k); ++p) map.pulses[p][k] = table.at(k, p);
  }
  return map;
}

}  // namespace detail

/// Integrates the medium and returns per-pulse activation times.
/// CrossField: S1 strip at the left edge at t = 0, S2 over `s2_region` once
/// the S1 wave back passes the domain center; the rotor core is the mean tip
/// position over the second half of the run. Point: a single disk stimulus
/// at t = 0; the core is the stimulus center and no tip tracking is done.
inline ActivationMap run_fhn(const FhnConfig& config) {
  config.validate();
  const std::size_t n = config.grid_n;
  detail::FhnState state(n);
  const bool cross = config.protocol == StimulusProtocol::CrossField;

  if (cross) {
    detail::excite_region(config, state, [&](Point2 p) { return p.x < config.s1_width; });
  } else {
    detail::excite_region(config, state,
                          [&](Point2 p) { return distance(p, config.point_center) <= config.point_radius; });
  }

  const std::size_t center = (n / 2) * n + n / 2;
  std::vector<std::uint8_t> armed(n * n, 1);
  std::vector<std::uint32_t> crossings_seen(n * n, 0);
  std::vector<detail::Crossing> events;
  std::vector<double> previous(state.u);
  bool s2_done = !cross;
  std::vector<TipSample> tips;
  const double end_time = static_cast<double>(config.steps) * config.dt;
  const double rearm = config.u_threshold - config.hysteresis;

  for (std::size_t step = 1; step <= config.steps; ++step) {
    std::copy(state.u.begin(), state.u.end(), previous.begin());
    if (!detail::fhn_step(config, state)) {
      throw Error(ErrorCode::UnstableIntegration,
                  "|u| exceeded 10 at t = " + format_double(static_cast<double>(step) * config.dt));
    }
    const double t = static_cast<double>(step) * config.dt;
    for (std::size_t k = 0; k < n * n; ++k) {
      const double uk = state.u[k];
      if (armed[k]) {
        if (uk >= config.u_threshold) {
          armed[k] = 0;
          ++crossings_seen[k];
          const double u0 = previous[k];
          const double frac = uk > u0 ? std::clamp((config.u_threshold - u0) / (uk - u0), 0.0, 1.0) : 1.0;
          const double tc = t - config.dt + frac * config.dt;
          if (tc >= config.record_start) events.push_back({static_cast<std::uint32_t>(k), tc});
        }
      } else if (uk < rearm) {
        armed[k] = 1;
      }
    }
    if (!s2_done && crossings_seen[center] > 0 && state.u[center] < rearm) {
      detail::excite_region(config, state, [&](Point2 p) {
        return p.x >= config.s2_region.min.x && p.x < config.s2_region.max.x && p.y >= config.s2_region.min.y &&
               p.y < config.s2_region.max.y;
      });
      s2_done = true;
    }
    if (cross && s2_done && step % config.tip_interval == 0) {
      if (auto tip = detail::find_tip(config, state)) tips.push_back({t, *tip});
    }
  }

  const auto table = detail::group_crossings(n * n, events);
  if (!cross) return detail::raw_pulses(config, table, config.point_center);

  double sx = 0.0, sy = 0.0;
  std::size_t m = 0;
  for (const auto& tip : tips) {
    if (tip.time < 0.5 * end_time) continue;
    sx += tip.position.x;
    sy += tip.position.y;
    ++m;
  }
  if (m == 0) throw Error(ErrorCode::NoSpiral, "tip tracker found no tip in the second half of the run");
  const Point2 core{sx / static_cast<double>(m), sy / static_cast<double>(m)};
  ActivationMap map = detail::unwrap_pulses(config, table, core);
  map.tips = std::move(tips);
  return map;
}

/// Bilinear interpolation of a pulse's crossing times between cell centers.
/// Where the four surrounding cells straddle the cut (spread above half a
/// period) the nearest cell is used instead, so no anchor mixes two pulses.
inline std::vector<AnchorObservation> sample_fhn_anchors(const ActivationMap& map, std::span<const Point2> anchors,
                                                         std::size_t pulse_index) {
  if (pulse_index >= map.pulse_count()) {
    throw Error(ErrorCode::InvalidArgument, "pulse " + std::to_string(pulse_index) + " not recorded (have " +
                                                std::to_string(map.pulse_count()) + ")");
  }
  const auto& grid = map.pulses[pulse_index];
  const std::size_t n = map.grid_n;
  const double size = map.cell_size * static_cast<double>(n);
  std::vector<AnchorObservation> out;
  out.reserve(anchors.size());
  for (const auto& p : anchors) {
    if (!(p.x >= 0.0 && p.x <= size && p.y >= 0.0 && p.y <= size)) {
      throw Error(ErrorCode::InvalidArgument, "anchor outside the simulated domain");
    }
    const double gx = std::clamp(p.x / map.cell_size - 0.5, 0.0, static_cast<double>(n - 1));
    const double gy = std::clamp(p.y / map.cell_size - 0.5, 0.0, static_cast<double>(n - 1));
    const std::size_t i0 = std::min(static_cast<std::size_t>(gx), n - 2);
    const std::size_t j0 = std::min(static_cast<std::size_t>(gy), n - 2);
    const double fx = gx - static_cast<double>(i0);
    const double fy = gy - static_cast<double>(j0);
    const double t00 = grid[j0 * n + i0], t10 = grid[j0 * n + i0 + 1];
    const double t01 = grid[(j0 + 1) * n + i0], t11 = grid[(j0 + 1) * n + i0 + 1];
    const double weights[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const double values[4] = {t00, t10, t01, t11};

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    bool missing = false;
    for (int q = 0; q < 4; ++q) {
      if (weights[q] == 0.0) continue;
      if (!std::isfinite(values[q])) missing = true;
      lo = std::min(lo, values[q]);
      hi = std::max(hi, values[q]);
    }
    if (missing) {
      throw Error(ErrorCode::NotActivated, "anchor (" + format_double(p.x) + ", " + format_double(p.y) +
                                               ") not activated in pulse " + std::to_string(pulse_index));
    }
    double t = 0.0;
    if (std::isfinite(map.period) && hi - lo > 0.5 * map.period) {
      const int nearest = (fx >= 0.5 ? 1 : 0) + (fy >= 0.5 ? 2 : 0);
      t = values[nearest];
    } else {
      for (int q = 0; q < 4; ++q) {
        if (weights[q] != 0.0) t += weights[q] * values[q];
      }
    }
    out.push_back({p, t});
  }
  return out;
}

/// Mean front speed 1/|grad t| over labeled cells at least `min_radius` from
/// the core, by central differences that stay on one side of the cut.
inline double mean_front_speed(const ActivationMap& map, std::size_t pulse, double min_radius) {
  const auto& g = map.pulses.at(pulse);
  const std::size_t n = map.grid_n;
  const double h = map.cell_size;
  const double jump = std::isfinite(map.period) ? 0.5 * map.period : std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (distance(map.cell_center(i, j), map.rotor_core) < min_radius) continue;
      const double l = g[j * n + i - 1], r = g[j * n + i + 1], b = g[(j - 1) * n + i], a = g[(j + 1) * n + i];
      if (!(std::isfinite(l) && std::isfinite(r) && std::isfinite(b) && std::isfinite(a))) continue;
      if (std::fabs(r - l) > jump || std::fabs(a - b) > jump) continue;
      const double gx = (r - l) / (2 * h), gy = (a - b) / (2 * h);
      const double grad = std::hypot(gx, gy);
      if (grad > 0.0) {
        sum += 1.0 / grad;
        ++count;
      }
    }
  }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

// -- persistence ---------------------------------------------------------------

inline json fhn_config_to_json(const FhnConfig& c) {
  return {{"domain_size", c.domain_size},
          {"grid_n", c.grid_n},
          {"dt", c.dt},
          {"steps", c.steps},
          {"diffusion", c.diffusion},
          {"kinetic_rate", c.kinetic_rate},
          {"a", c.a},
          {"epsilon", c.epsilon},
          {"beta", c.beta},
          {"gamma", c.gamma},
          {"delta", c.delta},
          {"u_threshold", c.u_threshold},
          {"v_tip", c.v_tip},
          {"hysteresis", c.hysteresis},
          {"protocol", c.protocol == StimulusProtocol::CrossField ? "cross_field" : "point"},
          {"s1_width", c.s1_width},
          {"s2_region", {c.s2_region.min.x, c.s2_region.min.y, c.s2_region.max.x, c.s2_region.max.y}},
          {"point_center", {c.point_center.x, c.point_center.y}},
          {"point_radius", c.point_radius},
          {"record_start", c.record_start},
          {"tip_interval", c.tip_interval},
          {"core_exclusion", c.core_exclusion},
          {"seed", c.seed}};
}

/// Missing keys keep their defaults.
inline FhnConfig fhn_config_from_json(const json& j) {
  FhnConfig c;
  try {
    c.domain_size = j.value("domain_size", c.domain_size);
    c.grid_n = j.value("grid_n", c.grid_n);
    c.dt = j.value("dt", c.dt);
    c.steps = j.value("steps", c.steps);
    c.diffusion = j.value("diffusion", c.diffusion);
    c.kinetic_rate = j.value("kinetic_rate", c.kinetic_rate);
    c.a = j.value("a", c.a);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.beta = j.value("beta", c.beta);
    c.gamma = j.value("gamma", c.gamma);
    c.delta = j.value("delta", c.delta);
    c.u_threshold = j.value("u_threshold", c.u_threshold);
    c.v_tip = j.value("v_tip", c.v_tip);
    c.hysteresis = j.value("hysteresis", c.hysteresis);
    const auto protocol = j.value("protocol", std::string("cross_field"));
    if (protocol == "cross_field") {
      c.protocol = StimulusProtocol::CrossField;
    } else if (protocol == "point") {
      c.protocol = StimulusProtocol::Point;
    } else {
      throw Error(ErrorCode::ParseError, "unknown stimulus protocol '" + protocol + "'");
    }
    c.s1_width = j.value("s1_width", c.s1_width);
    if (j.contains("s2_region")) {
      const auto r = j.at("s2_region").get<std::vector<double>>();
      if (r.size() != 4) throw Error(ErrorCode::ParseError, "s2_region must be [xmin, ymin, xmax, ymax]");
      c.s2_region = {{r[0], r[1]}, {r[2], r[3]}};
    } else {
      c.s2_region = {{0.0, 0.0}, {0.5 * c.domain_size, 0.5 * c.domain_size}};
    }
    if (j.contains("point_center")) {
      const auto p = j.at("point_center").get<std::vector<double>>();
      if (p.size() != 2) throw Error(ErrorCode::ParseError, "point_center must be [x, y]");
      c.point_center = {p[0], p[1]};
    } else {
      c.point_center = {0.5 * c.domain_size, 0.5 * c.domain_size};
    }
    c.point_radius = j.value("point_radius", c.point_radius);
    c.record_start = j.value("record_start", c.record_start);
    c.tip_interval = j.value("tip_interval", c.tip_interval);
    c.core_exclusion = j.value("core_exclusion", c.core_exclusion);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("fhn config: ") + e.what());
  }
  return c;
}

/// Writes pulse_<p>.p2f grids plus activation.json into `dir`.
inline void write_activation_map(const std::filesystem::path& dir, const ActivationMap& map, const FhnConfig& config) {
  std::filesystem::create_directories(dir);
  json files = json::array();
  for (std::size_t p = 0; p < map.pulse_count(); ++p) {
    const std::string name = "pulse_" + std::to_string(p) + ".p2f";
    write_text_file(dir / name, encode_float_grid(map.grid_n, map.grid_n, map.pulses[p]));
    files.push_back(name);
  }
  json tips = json::array();
  for (const auto& t : map.tips) tips.push_back({t.time, t.position.x, t.position.y});
  const json sidecar = {{"rotor_core", {map.rotor_core.x, map.rotor_core.y}},
                        {"cell_size", map.cell_size},
                        {"grid_n", map.grid_n},
                        {"period", std::isfinite(map.period) ? json(map.period) : json(nullptr)},
                        {"labeled_cells", map.labeled_cells},
                        {"pulses", files},
                        {"complete_pulses", map.complete_pulses()},
                        {"tips", tips},
                        {"config", fhn_config_to_json(config)}};
  write_text_file(dir / "activation.json", sidecar.dump(2) + "\n");
}

inline ActivationMap read_activation_map(const std::filesystem::path& dir) {
  const json side = parse_json(read_text_file(dir / "activation.json"), (dir / "activation.json").string());
  ActivationMap map;
  try {
    const auto core = side.at("rotor_core").get<std::vector<double>>();
    map.rotor_core = {core.at(0), core.at(1)};
    map.cell_size = side.at("cell_size").get<double>();
    map.grid_n = side.at("grid_n").get<std::size_t>();
    map.period = side.at("period").is_null() ? std::numeric_limits<double>::infinity() : side.at("period").get<double>();
    map.labeled_cells = side.at("labeled_cells").get<std::size_t>();
    for (const auto& t : side.value("tips", json::array())) {
      map.tips.push_back({t.at(0).get<double>(), {t.at(1).get<double>(), t.at(2).get<double>()}});
    }
    for (const auto& name : side.at("pulses")) {
      const auto path = dir / name.get<std::string>();
      auto grid = decode_float_grid(read_text_file(path), path.string());
      if (grid.width != map.grid_n || grid.height != map.grid_n) {
        throw Error(ErrorCode::ParseError, path.string() + ": grid size does not match activation.json");
      }
      map.pulses.push_back(std::move(grid.values));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("activation.json: ") + e.what());
  }
  return map;
}

}  // namespace srcloc
