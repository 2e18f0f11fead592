#pragma once

// Derivative-free Nelder-Mead simplex minimizer shared by the iterative
// estimators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "srcloc/error.hpp"

namespace srcloc {

struct SimplexConfig {
  double x_tolerance{1e-8};   // max vertex distance (inf-norm) from the best vertex
  double f_tolerance{1e-10};  // max objective spread across the simplex
  std::size_t max_iterations{0};  // 0 selects 200 * dimension; a total budget across restarts
  double reflection{1.0};
  double expansion{2.0};
  double contraction{0.5};
  double shrink{0.5};
  double initial_step{0.05};         // relative perturbation of coordinates
  double zero_step{0.00025};         // absolute floor for the perturbation
  std::size_t restarts{3};           // fresh simplices built around the best point after convergence

  void validate() const {
    if (!(x_tolerance > 0.0 && f_tolerance > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "simplex tolerances must be positive");
    }
    if (!(reflection > 0.0 && expansion > 1.0 && contraction > 0.0 && contraction < 1.0 && shrink > 0.0 &&
          shrink < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "simplex coefficients out of range");
    }
    if (!(initial_step > 0.0 && zero_step > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "initial simplex steps must be positive");
    }
  }

  std::size_t iteration_budget(std::size_t dimension) const {
    return max_iterations == 0 ? 200 * std::max<std::size_t>(dimension, 1) : max_iterations;
  }
};

struct SimplexResult {
  std::vector<double> x;
  double f{};
  bool converged{};
  std::size_t iterations{};
  std::size_t evaluations{};
};

namespace detail {

struct NoObserver {
  void operator()(std::size_t, double) const noexcept {}
};

}  // namespace detail

/// Minimizes `objective` from `x0`. `observer(iteration, best_f)` is called
/// after every iteration.
///
/// Converged means both the simplex diameter and the objective spread fell
/// below their tolerances before the iteration budget ran out. With
/// `restarts > 0`, a converged simplex is rebuilt around its best vertex and
/// the search continues; the loop ends when a restart stops improving the best
/// value by more than f_tolerance.
template <class Objective, class Observer = detail::NoObserver>
SimplexResult nelder_mead(Objective&& objective, std::span<const double> x0, const SimplexConfig& config,
                          Observer&& observer = {}) {
  config.validate();
  const std::size_t n = x0.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty start vector");
  const std::size_t budget = config.iteration_budget(n);

  struct Vertex {
    std::vector<double> x;
    double f;
    std::size_t order;  // insertion index, tie-breaker
  };

  std::size_t evaluations = 0;
  std::size_t next_order = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evaluations;
    const double f = static_cast<double>(objective(std::span<const double>(x)));
    return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
  };
  auto make_vertex = [&](std::vector<double> x) {
    const double f = eval(x);
    return Vertex{std::move(x), f, next_order++};
  };
  auto by_value = [](const Vertex& a, const Vertex& b) {
    if (a.f != b.f) return a.f < b.f;
    return a.order < b.order;
  };

  auto build_simplex = [&](const std::vector<double>& base, bool check_finite) {
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back(make_vertex(base));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x = base;
      // Coordinates at round-off scale get the absolute step, not a vanishing relative one.
      const double rel = x[i] * config.initial_step;
      x[i] += std::abs(rel) >= config.zero_step ? rel : config.zero_step;
      simplex.push_back(make_vertex(std::move(x)));
    }
    if (check_finite) {
      for (const auto& v : simplex) {
        if (!std::isfinite(v.f)) throw Error(ErrorCode::InvalidStart, "objective not finite on the initial simplex");
      }
    }
    return simplex;
  };

  auto converged_now = [&](const std::vector<Vertex>& s) {
    double fspread = 0.0;
    double xspread = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      fspread = std::max(fspread, std::abs(s[i].f - s[0].f));
      for (std::size_t j = 0; j < n; ++j) xspread = std::max(xspread, std::abs(s[i].x[j] - s[0].x[j]));
    }
    return fspread <= config.f_tolerance && xspread <= config.x_tolerance;
  };

  std::vector<Vertex> simplex = build_simplex(std::vector<double>(x0.begin(), x0.end()), true);
  std::stable_sort(simplex.begin(), simplex.end(), by_value);

  std::size_t iterations = 0;
  std::size_t restarts_left = config.restarts;
  bool converged = false;
  double last_restart_best = std::numeric_limits<double>::infinity();

  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto affine = [&](std::vector<double>& out, double coeff, const std::vector<double>& from) {
    // out = centroid + coeff * (centroid - from)
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coeff * (centroid[j] - from[j]);
  };

  while (true) {
    if (converged_now(simplex)) {
      const double best = simplex.front().f;
      const bool improved = last_restart_best - best > config.f_tolerance;
      if (restarts_left == 0 || !improved || iterations >= budget) {
        converged = true;
        break;
      }
      --restarts_left;
      last_restart_best = best;
      auto fresh = build_simplex(simplex.front().x, false);
      // keep the incumbent (same point, same value) as the first vertex
      fresh.front() = simplex.front();
      simplex = std::move(fresh);
      std::stable_sort(simplex.begin(), simplex.end(), by_value);
      continue;
    }
    if (iterations >= budget) break;
    ++iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i].x[j];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    Vertex& worst = simplex[n];
    affine(xr, config.reflection, worst.x);
    const double fr = eval(xr);

    bool do_shrink = false;
    if (fr < simplex[0].f) {
      affine(xe, config.reflection * config.expansion, worst.x);
      const double fe = eval(xe);
      if (fe < fr) {
        worst = Vertex{xe, fe, next_order++};
      } else {
        worst = Vertex{xr, fr, next_order++};
      }
    } else if (fr < simplex[n - 1].f) {
      worst = Vertex{xr, fr, next_order++};
    } else if (fr < worst.f) {
      // outside contraction
      affine(xc, config.reflection * config.contraction, worst.x);
      const double fc = eval(xc);
      if (fc <= fr) {
        worst = Vertex{xc, fc, next_order++};
      } else {
        do_shrink = true;
      }
    } else {
      // inside contraction
      affine(xc, -config.contraction, worst.x);
      const double fc = eval(xc);
      if (fc < worst.f) {
        worst = Vertex{xc, fc, next_order++};
      } else {
        do_shrink = true;
      }
    }

    if (do_shrink) {
      const auto& best = simplex[0].x;
      for (std::size_t i = 1; i <= n; ++i) {
        std::vector<double> x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = best[j] + config.shrink * (simplex[i].x[j] - best[j]);
        simplex[i] = make_vertex(std::move(x));
      }
    }
    std::stable_sort(simplex.begin(), simplex.end(), by_value);
    observer(iterations, simplex.front().f);
  }

  return SimplexResult{simplex.front().x, simplex.front().f, converged, iterations, evaluations};
}

template <class Objective>
SimplexResult nelder_mead(Objective&& objective, std::initializer_list<double> x0, const SimplexConfig& config = {}) {
  const std::vector<double> start(x0);
  return nelder_mead(std::forward<Objective>(objective), std::span<const double>(start), config);
}

}  // namespace srcloc
