#pragma once

// Monte-Carlo harness: per (solver, anchor count) error and speed records,
// the error CDF, the MAE table and the mean-speed table.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "srcloc/core.hpp"
#include "srcloc/fhn.hpp"
#include "srcloc/forward.hpp"
#include "srcloc/io.hpp"
#include "srcloc/rng.hpp"
#include "srcloc/solvers.hpp"

namespace srcloc {

enum class BenchSource { SyntheticIsotropic, SyntheticAnisotropic, Fhn, IngestedCsv };

inline std::string_view bench_source_name(BenchSource s) {
  switch (s) {
    case BenchSource::SyntheticIsotropic: return "synthetic_isotropic";
    case BenchSource::SyntheticAnisotropic: return "synthetic_anisotropic";
    case BenchSource::Fhn: return "fhn";
    case BenchSource::IngestedCsv: return "ingested_csv";
  }
  return "?";
}

inline BenchSource parse_bench_source(std::string_view s) {
  for (auto v : {BenchSource::SyntheticIsotropic, BenchSource::SyntheticAnisotropic, BenchSource::Fhn,
                 BenchSource::IngestedCsv}) {
    if (bench_source_name(v) == s) return v;
  }
  throw Error(ErrorCode::ParseError, "unknown bench source '" + std::string(s) + "'");
}

struct BenchSolver {
  SolverKind kind = SolverKind::MTDOA;
  double c_assumed = 1.0;           // TDOA only
  bool c_from_truth = false;        // TDOA: use the true field's mean speed over the trial's anchors
  NtdoaOrder order;                 // NTDOA only
  NtdoaResidual residual = NtdoaResidual::Range;
  std::string label;                // empty: derived from kind/residual

  std::string name() const {
    if (!label.empty()) return label;
    switch (kind) {
      case SolverKind::TDOA: return "tdoa";
      case SolverKind::MTDOA: return "mtdoa";
      case SolverKind::NTDOA: return residual == NtdoaResidual::Range ? "ntdoa" : "ntdoa_time";
    }
    return "?";
  }

  std::size_t min_anchors() const {
    switch (kind) {
      case SolverKind::TDOA: return kTdoaMinAnchors;
      case SolverKind::MTDOA: return kMtdoaMinAnchors;
      case SolverKind::NTDOA: return order.min_anchors();
    }
    return 0;
  }
};

struct BenchConfig {
  BenchSource source = BenchSource::SyntheticIsotropic;
  std::size_t trials = 1000;
  std::vector<std::size_t> anchor_counts{50};
  double noise_sigma = 0.0;
  std::vector<BenchSolver> solvers;
  std::uint64_t master_seed = 0;
  SimplexConfig simplex;
  std::vector<double> radii;  // CDF radii; empty: 0..max error in 20 steps
  std::size_t threads = 0;    // 0: hardware concurrency

  Region region{{0.0, 0.0}, {1.0, 1.0}};  // anchor placement
  double exclusion_radius = 0.0;

  // Synthetic sources: per-trial source uniform in source_region.
  Region source_region{{0.3, 0.3}, {0.7, 0.7}};
  double start_time = 0.0;
  double speed = 1.0;      // isotropic truth
  SpeedModel speed_model;  // anisotropic truth

  // FHN source: stored map directory, or a config run in-process.
  std::optional<FhnConfig> fhn;
  std::filesystem::path activation_dir;
  std::optional<std::size_t> fhn_pulse;  // default: first complete pulse

  // Ingested CSV source: each trial draws anchor_count rows without replacement.
  std::filesystem::path csv_path;
  Point2 csv_truth;

  void validate() const {
    if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    if (anchor_counts.empty()) throw Error(ErrorCode::InvalidArgument, "anchor_counts must not be empty");
    if (solvers.empty()) throw Error(ErrorCode::InvalidArgument, "at least one solver required");
    if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "noise_sigma must be >= 0");
    for (const auto& s : solvers) {
      for (std::size_t n : anchor_counts) {
        if (n < s.min_anchors()) {
          throw Error(ErrorCode::InvalidArgument, "anchor count " + std::to_string(n) + " below the minimum " +
                                                      std::to_string(s.min_anchors()) + " for " + s.name());
        }
      }
      if (s.kind == SolverKind::TDOA && !s.c_from_truth && !(s.c_assumed > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "TDOA assumed speed must be > 0");
      }
      if (s.c_from_truth && source == BenchSource::Fhn) {
        throw Error(ErrorCode::InvalidArgument, "truth speed is unknown for the FHN source");
      }
    }
    simplex.validate();
  }
};

struct TrialRecord {
  double error = 0.0;  // source distance; meaningless when !ok
  double speed = 0.0;
  bool ok = false;
  std::string failure;  // error name, or "NotConverged"
};

struct BenchCell {
  std::string solver;
  std::size_t anchor_count = 0;
  std::vector<TrialRecord> trials;

  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(trials.begin(), trials.end(), [](const auto& t) { return !t.ok; }));
  }
  double failure_rate() const { return static_cast<double>(failures()) / static_cast<double>(trials.size()); }

  /// Errors of successful trials, in trial order.
  std::vector<double> errors() const {
    std::vector<double> out;
    for (const auto& t : trials) {
      if (t.ok) out.push_back(t.error);
    }
    return out;
  }

  /// Mean error over successful trials; NaN if none succeeded.
  double mae() const {
    const auto e = errors();
    if (e.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double v : e) s += v;
    return s / static_cast<double>(e.size());
  }
};

struct BenchResult {
  std::vector<BenchCell> cells;  // anchor-count major, then solver order of the config
  std::vector<std::vector<std::uint64_t>> trial_seeds;  // [anchor-count index][trial]
  std::optional<Point2> rotor_core;
  std::optional<std::size_t> fhn_pulse;

  const BenchCell& cell(const std::string& solver, std::size_t anchor_count) const {
    for (const auto& c : cells) {
      if (c.solver == solver && c.anchor_count == anchor_count) return c;
    }
    throw Error(ErrorCode::InvalidArgument, "no bench cell for " + solver + " at N=" + std::to_string(anchor_count));
  }
};

/// Trial seeds depend on master seed, anchor count and trial index only, so
/// every solver sees the same observations in a given trial.
inline std::uint64_t trial_seed(std::uint64_t master, std::size_t anchor_count, std::size_t trial) {
  return derive_seed({master, static_cast<std::uint64_t>(anchor_count), static_cast<std::uint64_t>(trial)});
}

namespace detail {

struct TrialData {
  Point2 truth;
  std::vector<AnchorObservation> obs;
  std::optional<SpeedModel> true_field;
};

struct BenchContext {
  const BenchConfig& config;
  std::shared_ptr<const ActivationMap> map;
  std::size_t pulse = 0;
  std::vector<AnchorObservation> csv_rows;
};

inline TrialData make_trial(const BenchContext& ctx, std::size_t anchor_count, std::uint64_t seed) {
  const BenchConfig& c = ctx.config;
  TrialData d;
  const std::uint64_t noise_seed = derive_seed({seed, hash_label("noise")});
  switch (c.source) {
    case BenchSource::SyntheticIsotropic:
    case BenchSource::SyntheticAnisotropic: {
      Rng rng(derive_seed({seed, hash_label("source")}));
      std::uniform_real_distribution<double> ux(c.source_region.min.x, c.source_region.max.x);
      std::uniform_real_distribution<double> uy(c.source_region.min.y, c.source_region.max.y);
      const double sx = ux(rng);
      d.truth = {sx, uy(rng)};
      const PlacementSpec spec{c.region, anchor_count, c.exclusion_radius, derive_seed({seed, hash_label("anchors")})};
      const auto anchors = place_anchors(spec, d.truth);
      if (c.source == BenchSource::SyntheticIsotropic) {
        d.true_field = SpeedModel::constant(c.speed);
        d.obs = simulate_isotropic(d.truth, c.start_time, c.speed, anchors, c.noise_sigma, noise_seed);
      } else {
        d.true_field = c.speed_model;
        d.obs = simulate_anisotropic(d.truth, c.start_time, c.speed_model, anchors, c.noise_sigma, noise_seed);
      }
      break;
    }
    case BenchSource::Fhn: {
      d.truth = ctx.map->rotor_core;
      const PlacementSpec spec{c.region, anchor_count, c.exclusion_radius, derive_seed({seed, hash_label("anchors")})};
      d.obs = sample_fhn_anchors(*ctx.map, place_anchors(spec, d.truth), ctx.pulse);
      add_gaussian_noise(d.obs, c.noise_sigma, noise_seed);
      break;
    }
    case BenchSource::IngestedCsv: {
      if (ctx.csv_rows.size() < anchor_count) {
        throw Error(ErrorCode::InsufficientAnchors, "CSV has " + std::to_string(ctx.csv_rows.size()) +
                                                        " anchors, trial needs " + std::to_string(anchor_count));
      }
      d.truth = c.csv_truth;
      Rng rng(derive_seed({seed, hash_label("anchors")}));
      std::sample(ctx.csv_rows.begin(), ctx.csv_rows.end(), std::back_inserter(d.obs), anchor_count, rng);
      add_gaussian_noise(d.obs, c.noise_sigma, noise_seed);
      break;
    }
  }
  return d;
}

inline TrialRecord run_solver(const BenchSolver& s, const SimplexConfig& simplex, const TrialData& d) {
  TrialRecord rec;
  try {
    Estimate est;
    double speed = 0.0;
    switch (s.kind) {
      case SolverKind::TDOA: {
        const double c = s.c_from_truth ? mean_speed_over(*d.true_field, d.truth, d.obs) : s.c_assumed;
        est = tdoa_linear(d.obs, c);
        speed = c;
        break;
      }
      case SolverKind::MTDOA:
        est = mtdoa(d.obs, simplex);
        speed = est.speed.taylor.front();
        break;
      case SolverKind::NTDOA:
        est = ntdoa(d.obs, s.order, simplex, s.residual);
        speed = mean_speed_over(est.speed, est.source, d.obs);
        break;
    }
    rec.error = distance(est.source, d.truth);
    rec.speed = speed;
    rec.ok = est.converged && std::isfinite(rec.error);
    if (!rec.ok) rec.failure = "NotConverged";
  } catch (const Error& e) {
    rec.failure = std::string(e.name());
  }
  return rec;
}

// Runs fn(i) for i in [0, count) on `threads` workers; each index is
// processed exactly once and results land in caller-owned slots.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Runs every configured trial. `map` supplies a precomputed FHN activation
/// map; without it the FHN source loads `activation_dir` or runs `fhn`.
inline BenchResult run_bench(const BenchConfig& config, std::shared_ptr<const ActivationMap> map = nullptr) {
  config.validate();
  detail::BenchContext ctx{config, std::move(map)};
  BenchResult result;

  if (config.source == BenchSource::Fhn) {
    if (!ctx.map) {
      if (!config.activation_dir.empty()) {
        ctx.map = std::make_shared<const ActivationMap>(read_activation_map(config.activation_dir));
      } else if (config.fhn) {
        ctx.map = std::make_shared<const ActivationMap>(run_fhn(*config.fhn));
      } else {
        throw Error(ErrorCode::InvalidArgument, "FHN source needs an activation map, activation_dir or fhn config");
      }
    }
    if (config.fhn_pulse) {
      ctx.pulse = *config.fhn_pulse;
    } else {
      const auto complete = ctx.map->complete_pulses();
      if (complete.empty()) throw Error(ErrorCode::NotActivated, "activation map has no complete pulse");
      ctx.pulse = complete.front();
    }
    result.rotor_core = ctx.map->rotor_core;
    result.fhn_pulse = ctx.pulse;
  } else if (config.source == BenchSource::IngestedCsv) {
    ctx.csv_rows = load_anchor_csv(config.csv_path);
  }

  const std::size_t n_counts = config.anchor_counts.size();
  const std::size_t n_solvers = config.solvers.size();
  for (std::size_t a = 0; a < n_counts; ++a) {
    for (const auto& s : config.solvers) {
      result.cells.push_back({s.name(), config.anchor_counts[a], std::vector<TrialRecord>(config.trials)});
    }
    std::vector<std::uint64_t> seeds(config.trials);
    for (std::size_t t = 0; t < config.trials; ++t) seeds[t] = trial_seed(config.master_seed, config.anchor_counts[a], t);
    result.trial_seeds.push_back(std::move(seeds));
  }

  detail::parallel_for(n_counts * config.trials, config.threads, [&](std::size_t job) {
    const std::size_t a = job / config.trials;
    const std::size_t t = job % config.trials;
    detail::TrialData data;
    std::string setup_failure;
    try {
      data = detail::make_trial(ctx, config.anchor_counts[a], result.trial_seeds[a][t]);
    } catch (const Error& e) {
      setup_failure = std::string(e.name());
    }
    for (std::size_t s = 0; s < n_solvers; ++s) {
      TrialRecord& slot = result.cells[a * n_solvers + s].trials[t];
      if (!setup_failure.empty()) {
        slot.failure = setup_failure;
      } else {
        slot = detail::run_solver(config.solvers[s], config.simplex, data);
      }
    }
  });
  return result;
}

struct CdfRow {
  double radius;
  std::string solver;
  std::size_t anchor_count;
  double percentage;
};

/// Percentage of all trials (failures count as misses) with error <= radius.
inline std::vector<CdfRow> cdf_table(const BenchResult& result, std::span<const double> radii) {
  std::vector<CdfRow> rows;
  std::vector<double> sorted_radii(radii.begin(), radii.end());
  std::sort(sorted_radii.begin(), sorted_radii.end());
  for (const auto& cell : result.cells) {
    auto errors = cell.errors();
    std::sort(errors.begin(), errors.end());
    for (double r : sorted_radii) {
      const auto within = std::upper_bound(errors.begin(), errors.end(), r) - errors.begin();
      rows.push_back({r, cell.solver, cell.anchor_count,
                      100.0 * static_cast<double>(within) / static_cast<double>(cell.trials.size())});
    }
  }
  return rows;
}

/// 21 radii from 0 to the largest successful error.
inline std::vector<double> default_radii(const BenchResult& result) {
  double top = 0.0;
  for (const auto& c : result.cells) {
    for (double e : c.errors()) top = std::max(top, e);
  }
  std::vector<double> radii;
  for (int k = 0; k <= 20; ++k) radii.push_back(top * k / 20.0);
  return radii;
}

struct MaeRow {
  std::size_t anchor_count;
  std::string solver;
  double mae;
  double failure_rate;
};

inline std::vector<MaeRow> mae_table(const BenchResult& result) {
  std::vector<MaeRow> rows;
  for (const auto& c : result.cells) rows.push_back({c.anchor_count, c.solver, c.mae(), c.failure_rate()});
  return rows;
}

struct SpeedRow {
  std::string solver;
  double mean_speed;
  std::size_t samples;
};

/// Mean estimated speed per solver over all successful trials (all anchor
/// counts pooled), solvers in first-appearance order.
inline std::vector<SpeedRow> speed_table(const BenchResult& result) {
  std::vector<SpeedRow> rows;
  for (const auto& c : result.cells) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SpeedRow& r) { return r.solver == c.solver; });
    if (it == rows.end()) {
      rows.push_back({c.solver, 0.0, 0});
      it = rows.end() - 1;
    }
    for (const auto& t : c.trials) {
      if (!t.ok) continue;
      it->mean_speed += t.speed;
      ++it->samples;
    }
  }
  for (auto& r : rows) {
    r.mean_speed = r.samples ? r.mean_speed / static_cast<double>(r.samples) : std::numeric_limits<double>::quiet_NaN();
  }
  return rows;
}

// -- config and output files --------------------------------------------------------

inline json simplex_to_json(const SimplexConfig& s) {
  return {{"x_tolerance", s.x_tolerance}, {"f_tolerance", s.f_tolerance}, {"max_iterations", s.max_iterations},
          {"reflection", s.reflection},   {"expansion", s.expansion},     {"contraction", s.contraction},
          {"shrink", s.shrink},           {"initial_step", s.initial_step}, {"zero_step", s.zero_step},
          {"restarts", s.restarts}};
}

inline SimplexConfig simplex_from_json(const json& j) {
  SimplexConfig s;
  s.x_tolerance = j.value("x_tolerance", s.x_tolerance);
  s.f_tolerance = j.value("f_tolerance", s.f_tolerance);
  s.max_iterations = j.value("max_iterations", s.max_iterations);
  s.reflection = j.value("reflection", s.reflection);
  s.expansion = j.value("expansion", s.expansion);
  s.contraction = j.value("contraction", s.contraction);
  s.shrink = j.value("shrink", s.shrink);
  s.initial_step = j.value("initial_step", s.initial_step);
  s.zero_step = j.value("zero_step", s.zero_step);
  s.restarts = j.value("restarts", s.restarts);
  return s;
}

namespace detail {

inline json region_to_json(const Region& r) { return {r.min.x, r.min.y, r.max.x, r.max.y}; }

inline Region region_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) throw Error(ErrorCode::ParseError, "region must be [xmin, ymin, xmax, ymax]");
  return {{v[0], v[1]}, {v[2], v[3]}};
}

inline json solver_to_json(const BenchSolver& s) {
  json j = {{"kind", std::string(solver_name(s.kind))}, {"label", s.name()}};
  if (s.kind == SolverKind::TDOA) j["c"] = s.c_from_truth ? json("truth_mean") : json(s.c_assumed);
  if (s.kind == SolverKind::NTDOA) {
    j["order"] = {s.order.taylor_order, s.order.fourier_terms};
    j["residual"] = std::string(residual_name(s.residual));
  }
  return j;
}

inline BenchSolver solver_from_json(const json& j) {
  BenchSolver s;
  std::string kind = j.at("kind").get<std::string>();
  std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char ch) { return std::toupper(ch); });
  s.kind = parse_solver_kind(kind);
  if (j.contains("c")) {
    if (j.at("c").is_string()) {
      if (j.at("c").get<std::string>() != "truth_mean") throw Error(ErrorCode::ParseError, "c must be a number or \"truth_mean\"");
      s.c_from_truth = true;
    } else {
      s.c_assumed = j.at("c").get<double>();
    }
  }
  if (j.contains("order")) {
    const auto o = j.at("order").get<std::vector<std::size_t>>();
    if (o.size() != 2) throw Error(ErrorCode::ParseError, "order must be [K, L]");
    s.order = {o[0], o[1]};
  }
  if (j.contains("residual")) s.residual = parse_residual(j.at("residual").get<std::string>());
  s.label = j.value("label", std::string());
  return s;
}

}  // namespace detail

inline json bench_config_to_json(const BenchConfig& c) {
  json solvers = json::array();
  for (const auto& s : c.solvers) solvers.push_back(detail::solver_to_json(s));
  json j = {{"source", std::string(bench_source_name(c.source))},
            {"trials", c.trials},
            {"anchor_counts", c.anchor_counts},
            {"noise_sigma", c.noise_sigma},
            {"master_seed", c.master_seed},
            {"solvers", solvers},
            {"simplex", simplex_to_json(c.simplex)},
            {"radii", c.radii},
            {"region", detail::region_to_json(c.region)},
            {"exclusion_radius", c.exclusion_radius}};
  switch (c.source) {
    case BenchSource::SyntheticIsotropic:
    case BenchSource::SyntheticAnisotropic:
      j["truth"] = {{"source_region", detail::region_to_json(c.source_region)},
                    {"start_time", c.start_time},
                    {"c", c.speed},
                    {"speed_model", speed_model_to_json(c.speed_model)}};
      break;
    case BenchSource::Fhn: {
      json f = json::object();
      if (!c.activation_dir.empty()) f["activation_dir"] = c.activation_dir.generic_string();
      if (c.fhn) f["config"] = fhn_config_to_json(*c.fhn);
      if (c.fhn_pulse) f["pulse"] = *c.fhn_pulse;
      j["fhn"] = f;
      break;
    }
    case BenchSource::IngestedCsv:
      j["csv"] = {{"path", c.csv_path.generic_string()}, {"source", {c.csv_truth.x, c.csv_truth.y}}};
      break;
  }
  return j;
}

/// `base` resolves relative paths inside the config (its own directory).
inline BenchConfig bench_config_from_json(const json& j, const std::filesystem::path& base = {}) {
  BenchConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path = p;
    return path.is_relative() && !base.empty() ? base / path : path;
  };
  try {
    c.source = parse_bench_source(j.at("source").get<std::string>());
    c.trials = j.value("trials", c.trials);
    c.anchor_counts = j.value("anchor_counts", c.anchor_counts);
    c.noise_sigma = j.at("noise_sigma").get<double>();
    c.master_seed = j.value("master_seed", c.master_seed);
    c.solvers.clear();
    for (const auto& s : j.at("solvers")) c.solvers.push_back(detail::solver_from_json(s));
    if (j.contains("simplex")) c.simplex = simplex_from_json(j.at("simplex"));
    c.radii = j.value("radii", c.radii);
    c.threads = j.value("threads", c.threads);
    if (j.contains("region")) c.region = detail::region_from_json(j.at("region"));
    c.exclusion_radius = j.value("exclusion_radius", c.exclusion_radius);
    if (j.contains("truth")) {
      const auto& t = j.at("truth");
      if (t.contains("source_region")) c.source_region = detail::region_from_json(t.at("source_region"));
      c.start_time = t.value("start_time", c.start_time);
      c.speed = t.value("c", c.speed);
      if (t.contains("speed_model")) c.speed_model = speed_model_from_json(t.at("speed_model"));
    }
    if (j.contains("fhn")) {
      const auto& f = j.at("fhn");
      if (f.contains("activation_dir")) c.activation_dir = resolve(f.at("activation_dir").get<std::string>());
      if (f.contains("config")) c.fhn = fhn_config_from_json(f.at("config"));
      if (f.contains("config_path")) {
        const auto p = resolve(f.at("config_path").get<std::string>());
        c.fhn = fhn_config_from_json(parse_json(read_text_file(p), p.string()));
      }
      if (f.contains("pulse")) c.fhn_pulse = f.at("pulse").get<std::size_t>();
      if (!j.contains("region") && c.fhn) c.region = {{0.0, 0.0}, {c.fhn->domain_size, c.fhn->domain_size}};
    }
    if (j.contains("csv")) {
      const auto& f = j.at("csv");
      c.csv_path = resolve(f.at("path").get<std::string>());
      const auto s = f.at("source").get<std::vector<double>>();
      if (s.size() != 2) throw Error(ErrorCode::ParseError, "csv.source must be [x, y]");
      c.csv_truth = {s[0], s[1]};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("bench config: ") + e.what());
  }
  return c;
}

inline std::string cdf_csv(std::span<const CdfRow> rows) {
  std::string out = "radius,solver,anchor_count,percentage\n";
  for (const auto& r : rows) {
    out += format_double(r.radius) + "," + r.solver + "," + std::to_string(r.anchor_count) + "," +
           format_double(r.percentage) + "\n";
  }
  return out;
}

inline std::string mae_csv(std::span<const MaeRow> rows) {
  std::string out = "anchor_count,solver,mae,failure_rate\n";
  for (const auto& r : rows) {
    out += std::to_string(r.anchor_count) + "," + r.solver + "," + format_double(r.mae) + "," +
           format_double(r.failure_rate) + "\n";
  }
  return out;
}

inline std::string speeds_csv(std::span<const SpeedRow> rows) {
  std::string out = "solver,mean_speed\n";
  for (const auto& r : rows) out += r.solver + "," + format_double(r.mean_speed) + "\n";
  return out;
}

inline json bench_manifest(const BenchConfig& config, const BenchResult& result) {
  json seeds = json::object();
  for (std::size_t a = 0; a < config.anchor_counts.size(); ++a) {
    seeds[std::to_string(config.anchor_counts[a])] = result.trial_seeds[a];
  }
  json failures = json::array();
  for (const auto& c : result.cells) {
    json by_name = json::object();
    for (const auto& t : c.trials) {
      if (!t.ok) by_name[t.failure] = by_name.value(t.failure, 0) + 1;
    }
    failures.push_back({{"solver", c.solver}, {"anchor_count", c.anchor_count}, {"failures", by_name}});
  }
  json m = {{"config", bench_config_to_json(config)},
            {"seed_derivation", "mix(master_seed, anchor_count, trial)"},
            {"trial_seeds", seeds},
            {"failures", failures}};
  if (result.rotor_core) m["rotor_core"] = {result.rotor_core->x, result.rotor_core->y};
  if (result.fhn_pulse) m["fhn_pulse"] = *result.fhn_pulse;
  return m;
}

/// Writes cdf.csv, mae.csv, speeds.csv and manifest.json into `dir`.
inline void write_bench_outputs(const std::filesystem::path& dir, const BenchConfig& config,
                                const BenchResult& result) {
  std::filesystem::create_directories(dir);
  const auto radii = config.radii.empty() ? default_radii(result) : config.radii;
  write_text_file(dir / "cdf.csv", cdf_csv(cdf_table(result, radii)));
  write_text_file(dir / "mae.csv", mae_csv(mae_table(result)));
  write_text_file(dir / "speeds.csv", speeds_csv(speed_table(result)));
  write_text_file(dir / "manifest.json", bench_manifest(config, result).dump(2) + "\n");
}

}  // namespace srcloc
