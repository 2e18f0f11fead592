// srcloc: simulate, fhn, ingest, localize and bench subcommands.
// Exit codes: 0 success, 1 usage error, 2 runtime or solver error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "srcloc/bench.hpp"
#include "srcloc/core.hpp"
#include "srcloc/fhn.hpp"
#include "srcloc/forward.hpp"
#include "srcloc/ingest.hpp"
#include "srcloc/io.hpp"
#include "srcloc/solvers.hpp"

namespace fs = std::filesystem;
using namespace srcloc;

namespace {

std::vector<double> parse_list(const std::string& text, std::size_t expected, const std::string& flag) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string field = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size()) {
      throw CLI::ValidationError(flag, "expected " + std::to_string(expected) + " comma-separated numbers");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.size() != expected) {
    throw CLI::ValidationError(flag, "expected " + std::to_string(expected) + " comma-separated numbers");
  }
  return out;
}

struct SimulateArgs {
  std::string medium = "iso";
  std::string source;
  double t0 = 0.0;
  double c = 0.0;
  std::string speed_model;
  bool unknown_speed = false;
  std::size_t anchors = 0;
  std::string region = "0,0,1,1";
  double exclusion = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string unit = "unit";
  std::string out;
  std::string csv;
};

int run_simulate(const SimulateArgs& a) {
  const auto src = parse_list(a.source, 2, "--source");
  const auto reg = parse_list(a.region, 4, "--region");
  Scenario s;
  s.source = {src[0], src[1]};
  s.start_time = a.t0;
  s.noise_sigma = a.sigma;
  s.unit_label = a.unit;
  if (a.medium == "iso") {
    if (!(a.c > 0.0)) throw CLI::ValidationError("--c", "iso medium needs --c > 0");
    if (a.unknown_speed) {
      s.medium = IsotropicUnknown{a.c};
    } else {
      s.medium = IsotropicKnown{a.c};
    }
  } else {
    if (a.speed_model.empty()) throw CLI::ValidationError("--speed-model", "aniso medium needs --speed-model");
    s.medium = Anisotropic{speed_model_from_json(parse_json(read_text_file(a.speed_model), a.speed_model))};
  }
  const PlacementSpec spec{{{reg[0], reg[1]}, {reg[2], reg[3]}}, a.anchors, a.exclusion,
                           derive_seed({a.seed, hash_label("anchors")})};
  const auto points = place_anchors(spec, s.source);
  s.anchors = simulate(s.source, s.start_time, s.medium, points, a.sigma, derive_seed({a.seed, hash_label("noise")}));
  save_scenario(a.out, s);
  if (!a.csv.empty()) save_anchor_csv(a.csv, s.anchors);
  std::printf("simulated %zu anchors, %s medium, source (%s, %s), t0 %s, sigma %s -> %s\n", s.anchors.size(),
              a.medium.c_str(), format_double(s.source.x).c_str(), format_double(s.source.y).c_str(),
              format_double(s.start_time).c_str(), format_double(a.sigma).c_str(), a.out.c_str());
  return 0;
}

struct FhnArgs {
  std::string config;
  std::string out;
  std::size_t anchors = 0;
  std::optional<std::uint64_t> seed;
  std::string anchor_out;
  std::optional<std::size_t> pulse;
  double exclusion = 3.0;
};

int run_fhn_command(const FhnArgs& a) {
  const FhnConfig config = fhn_config_from_json(parse_json(read_text_file(a.config), a.config));
  const ActivationMap map = run_fhn(config);
  write_activation_map(a.out, map, config);
  const auto complete = map.complete_pulses();
  std::printf("rotor core (%.3f, %.3f), period %s, %zu pulses (%zu complete) -> %s\n", map.rotor_core.x,
              map.rotor_core.y, format_double(map.period).c_str(), map.pulse_count(), complete.size(), a.out.c_str());
  if (a.anchors > 0) {
    if (a.anchor_out.empty()) throw CLI::ValidationError("--anchor-out", "required with --anchors");
    std::size_t pulse = 0;
    if (a.pulse) {
      pulse = *a.pulse;
    } else if (!complete.empty()) {
      pulse = complete.front();
    } else {
      throw Error(ErrorCode::NotActivated, "no complete pulse to sample; pass --pulse");
    }
    const double size = config.domain_size;
    const PlacementSpec spec{{{0.0, 0.0}, {size, size}}, a.anchors, a.exclusion, a.seed.value_or(config.seed)};
    const auto obs = sample_fhn_anchors(map, place_anchors(spec, map.rotor_core), pulse);
    save_anchor_csv(a.anchor_out, obs);
    std::printf("sampled %zu anchors from pulse %zu -> %s\n", obs.size(), pulse, a.anchor_out.c_str());
  }
  return 0;
}

struct IngestArgs {
  std::string manifest;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_ingest(const IngestArgs& a) {
  const FrameManifest manifest = load_manifest(a.manifest);
  const IngestResult r = extract_anchors(manifest, a.samples, a.seed);
  for (std::size_t f : r.empty_frames) {
    std::fprintf(stderr, "warning: EmptyGrowth: frame %zu adds no activated pixels, skipped\n", f);
  }
  save_anchor_csv(a.out, r.anchors);
  std::printf("extracted %zu anchors from %zu frames (unit pixel*%s) -> %s\n", r.anchors.size(),
              manifest.entries.size(), format_double(manifest.pixel_size).c_str(), a.out.c_str());
  return 0;
}

struct LocalizeArgs {
  std::string anchors;
  std::string solver;
  std::optional<double> c;
  std::string order = "1,1";
  std::string residual = "range";
  std::size_t max_iterations = 0;
  std::string out;
};

int run_localize(const LocalizeArgs& a) {
  std::vector<AnchorObservation> obs;
  std::optional<Scenario> scenario;
  const std::string text = read_text_file(a.anchors);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    scenario = scenario_from_json(parse_json(text, a.anchors));
    obs = scenario->anchors;
  } else {
    obs = anchors_from_csv(text);
  }

  SimplexConfig simplex;
  simplex.max_iterations = a.max_iterations;
  Estimate est;
  switch (parse_solver_kind(a.solver)) {
    case SolverKind::TDOA: {
      double c = 0.0;
      if (a.c) {
        c = *a.c;
      } else if (scenario && std::holds_alternative<IsotropicKnown>(scenario->medium)) {
        c = std::get<IsotropicKnown>(scenario->medium).c;
      } else {
        throw CLI::ValidationError("--c", "tdoa needs --c (or a scenario with a known speed)");
      }
      est = tdoa_linear(obs, c);
      break;
    }
    case SolverKind::MTDOA: est = mtdoa(obs, simplex); break;
    case SolverKind::NTDOA: {
      const auto o = parse_list(a.order, 2, "--order");
      if (o[0] < 0 || o[1] < 0 || o[0] != std::floor(o[0]) || o[1] != std::floor(o[1])) {
        throw CLI::ValidationError("--order", "K and L must be non-negative integers");
      }
      est = ntdoa(obs, {static_cast<std::size_t>(o[0]), static_cast<std::size_t>(o[1])}, simplex,
                  parse_residual(a.residual));
      break;
    }
  }
  write_text_file(a.out, estimate_to_json(est).dump(2) + "\n");
  std::printf("%s: source (%s, %s), t0 %s, speed %s, objective %s, converged %s, %zu iterations\n",
              std::string(solver_name(est.solver)).c_str(), format_double(est.source.x).c_str(),
              format_double(est.source.y).c_str(), format_double(est.start_time).c_str(),
              format_double(mean_speed_over(est.speed, est.source, obs)).c_str(),
              format_double(est.objective_value).c_str(), est.converged ? "yes" : "no", est.iterations);
  if (scenario) {
    std::printf("distance to scenario source: %s %s\n", format_double(distance(est.source, scenario->source)).c_str(),
                scenario->unit_label.c_str());
  }
  return 0;
}

struct BenchArgs {
  std::string config;
  std::string out_dir;
  std::optional<std::size_t> threads;
};

int run_bench_command(const BenchArgs& a) {
  const fs::path path = a.config;
  BenchConfig config = bench_config_from_json(parse_json(read_text_file(path), a.config), path.parent_path());
  if (a.threads) config.threads = *a.threads;
  const BenchResult result = run_bench(config);
  write_bench_outputs(a.out_dir, config, result);
  std::printf("%-12s %8s %12s %10s\n", "solver", "anchors", "mae", "failures");
  for (const auto& row : mae_table(result)) {
    std::printf("%-12s %8zu %12.6g %9.1f%%\n", row.solver.c_str(), row.anchor_count, row.mae, 100.0 * row.failure_rate);
  }
  for (const auto& row : speed_table(result)) {
    std::printf("mean speed %-12s %.6g\n", row.solver.c_str(), row.mean_speed);
  }
  std::printf("wrote cdf.csv, mae.csv, speeds.csv, manifest.json -> %s\n", a.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Source localization from arrival times: simulation, ingestion, TDOA/mTDOA/NTDOA, benchmarks"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Forward-simulate a scenario to JSON");
  s->add_option("--medium", sim.medium, "iso or aniso")->check(CLI::IsMember({"iso", "aniso"}))->required();
  s->add_option("--source", sim.source, "source x,y")->required();
  s->add_option("--t0", sim.t0, "start time")->required();
  s->add_option("--c", sim.c, "constant speed (iso)");
  s->add_option("--speed-model", sim.speed_model, "speed model JSON {taylor, fourier} (aniso)")
      ->check(CLI::ExistingFile);
  s->add_flag("--unknown-speed", sim.unknown_speed, "mark the iso speed as unknown to the estimator");
  s->add_option("--anchors", sim.anchors, "anchor count")->required();
  s->add_option("--region", sim.region, "placement rectangle xmin,ymin,xmax,ymax")->capture_default_str();
  s->add_option("--exclusion", sim.exclusion, "no anchors within this distance of the source");
  s->add_option("--sigma", sim.sigma, "arrival-time noise sigma")->required();
  s->add_option("--seed", sim.seed, "random seed")->required();
  s->add_option("--unit", sim.unit, "unit label recorded in the scenario");
  s->add_option("--out", sim.out, "scenario JSON path")->required();
  s->add_option("--csv", sim.csv, "also write the anchors as CSV");

  FhnArgs fa;
  auto* f = app.add_subcommand("fhn", "Run the FitzHugh-Nagumo spiral simulation");
  f->add_option("--config", fa.config, "FHN config JSON")->required()->check(CLI::ExistingFile);
  f->add_option("--out", fa.out, "activation map directory")->required();
  f->add_option("--anchors", fa.anchors, "sample this many random anchors");
  f->add_option("--seed", fa.seed, "anchor placement seed (default: config seed)");
  f->add_option("--anchor-out", fa.anchor_out, "anchor CSV path");
  f->add_option("--pulse", fa.pulse, "pulse index to sample (default: first complete)");
  f->add_option("--exclusion", fa.exclusion, "no anchors within this distance of the core")->capture_default_str();

  IngestArgs ia;
  auto* g = app.add_subcommand("ingest", "Extract anchors from a timestamped PGM frame sequence");
  g->add_option("--manifest", ia.manifest, "manifest JSON")->required()->check(CLI::ExistingFile);
  g->add_option("--samples", ia.samples, "boundary samples per frame")->required();
  g->add_option("--seed", ia.seed, "sampling seed")->required();
  g->add_option("--out", ia.out, "anchor CSV path")->required();

  LocalizeArgs la;
  auto* l = app.add_subcommand("localize", "Estimate the source from anchor observations");
  l->add_option("--anchors", la.anchors, "anchor CSV or scenario JSON")->required()->check(CLI::ExistingFile);
  l->add_option("--solver", la.solver, "tdoa, mtdoa or ntdoa")
      ->required()
      ->check(CLI::IsMember({"tdoa", "mtdoa", "ntdoa"}));
  l->add_option("--c", la.c, "known speed (tdoa)");
  l->add_option("--order", la.order, "NTDOA order K,L")->capture_default_str();
  l->add_option("--residual", la.residual, "NTDOA residual: range or time")
      ->check(CLI::IsMember({"range", "time"}))
      ->capture_default_str();
  l->add_option("--max-iterations", la.max_iterations, "simplex iteration budget (0: 200 per unknown)");
  l->add_option("--out", la.out, "estimate JSON path")->required();

  BenchArgs ba;
  auto* b = app.add_subcommand("bench", "Run a Monte-Carlo benchmark");
  b->add_option("--config", ba.config, "bench config JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--out-dir", ba.out_dir, "output directory")->required();
  b->add_option("--threads", ba.threads, "worker threads (0: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*s) return run_simulate(sim);
    if (*f) return run_fhn_command(fa);
    if (*g) return run_ingest(ia);
    if (*l) return run_localize(la);
    if (*b) return run_bench_command(ba);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  } catch (const srcloc::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
