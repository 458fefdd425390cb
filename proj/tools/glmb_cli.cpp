// glmb: scenario generation, tracking, benchmark grid and metrics.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "glmb/bench.hpp"
#include "glmb/scenario.hpp"
#include "glmb/types.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  glmb::BenchmarkSpec spec;
  std::optional<double> clutter_kappa;
  std::optional<double> sigma;
  std::optional<std::string> scenario_path;
  std::string out;
  bool trace = false;
  std::vector<std::string> trace_files;
};

void add_tracker_flags(CLI::App& app, Options& o) {
  glmb::TrackerConfig& c = o.spec.tracker;
  app.add_option("--p-survival", c.p_survival, "Survival probability")->capture_default_str();
  app.add_option("--p-detect", c.p_detect, "Detection probability")->capture_default_str();
  app.add_option("--clutter", o.clutter_kappa, "Clutter density kappa (default: max(lambda / area, 1e-4))");
  app.add_option("--gate", c.gate_chi2, "Squared Mahalanobis gate")->capture_default_str();
  app.add_option("--particles", c.particles_per_track, "Particles per track")->capture_default_str();
  app.add_option("--hup", c.h_up, "Association samples per parent hypothesis")->capture_default_str();
  app.add_option("--tau", c.prune_tau, "Pruning weight threshold")->capture_default_str();
  app.add_option("--detection-rate", c.detection_rate, "Expected detections per object (0 disables the count prior)")
      ->capture_default_str();
  const std::map<std::string, glmb::CountModel> count_models{{"poisson", glmb::CountModel::poisson},
                                                             {"binomial", glmb::CountModel::binomial}};
  app.add_option("--count-model", c.count_model, "Detections-per-object distribution: binomial or poisson")
      ->transform(CLI::CheckedTransformer(count_models, CLI::ignore_case))
      ->default_str("binomial");
  app.add_option("--detections-max", c.detections_max, "Binomial count model: maximum detections per object")
      ->capture_default_str();
  app.add_option("--count-outlier", c.count_outlier_weight, "Binomial count model: weight of the Poisson tail")
      ->capture_default_str();
  app.add_option("--sigma", o.sigma, "Measurement noise std (m), used by scenario and tracker (default 0.25)");
  app.add_option("--birth-sigma", c.birth_pos_sigma, "Birth position spread (m)")->capture_default_str();
  app.add_option("--v-max", c.v_max, "Maximum speed (m/s)")->capture_default_str();
  app.add_option("--omega-sigma", c.omega_sigma, "Birth turn-rate std (rad/s)")->capture_default_str();
  app.add_option("--birth-max", c.birth_max_per_step, "Births per step cap")->capture_default_str();
  app.add_option("--birth-threshold", c.birth_seed_threshold, "Detection evidence below which a measurement seeds a birth")
      ->capture_default_str();
  app.add_option("--r-birth", c.r_birth, "Birth existence probability")->capture_default_str();
  app.add_option("--sigma-v", c.sigma_v, "Speed process noise std")->capture_default_str();
  app.add_option("--sigma-omega", c.sigma_omega, "Turn-rate process noise std")->capture_default_str();
  app.add_option("--sigma-pos", c.sigma_pos, "Position process noise std")->capture_default_str();
  app.add_option("--dt", c.dt, "Time step (s)")->capture_default_str();
}

void add_scenario_flags(CLI::App& app, Options& o) {
  glmb::ConvoyParams& p = o.spec.scenario;
  app.add_option("--detections", p.detections_per_object, "Detections per object per step (D)")->capture_default_str();
  app.add_option("--lambda", p.lambda_clutter, "Expected clutter detections per step")->capture_default_str();
  app.add_option("--delta", p.delta, "Convoy entry offset in steps")->capture_default_str();
  app.add_option("--duration", o.spec.duration, "Synthetic track duration (s)")->capture_default_str();
  app.add_option("--track-file", o.spec.track_file, "Ground track CSV (step,x,y)")->check(CLI::ExistingFile);
}

void add_run_flags(CLI::App& app, Options& o) {
  app.add_option("--objects", o.spec.objects, "Object counts")->delimiter(',');
  app.add_option("--hmax", o.spec.hmax, "H_max values")->delimiter(',');
  app.add_option("--reps", o.spec.reps, "Repetitions per cell")->capture_default_str();
  app.add_option("--seed", o.spec.seed, "Base seed")->capture_default_str();
  app.add_option("--threads", o.spec.threads, "OpenMP threads (0: all cores)")->capture_default_str();
  app.add_option("--metrics-from", o.spec.metrics_from_step, "First step counted in accuracy metrics")
      ->capture_default_str();
}

void finalize(Options& o) {
  if (o.sigma) {
    o.spec.scenario.sigma = *o.sigma;
    o.spec.tracker.meas_sigma = *o.sigma;
  }
  if (o.clutter_kappa) {
    o.spec.kappa_from_clutter = false;
    o.spec.tracker.clutter_kappa = *o.clutter_kappa;
  }
  if (o.spec.threads > 0) omp_set_num_threads(o.spec.threads);
  o.spec.validate();
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  file.open(path);
  if (!file) throw glmb::ConfigError("cannot write '" + path + "'");
  return file;
}

int cmd_simulate(Options& o) {
  finalize(o);
  const glmb::GroundTrack track = glmb::benchmark_ground_track(o.spec);
  glmb::ConvoyParams params = o.spec.scenario;
  params.n_objects = o.spec.objects.front();
  const glmb::Scenario s = glmb::generate_scenario(track, params, o.spec.region, o.spec.seed);
  std::ofstream file;
  glmb::write_scenario(open_out(o.out, file), s);
  return 0;
}

int cmd_track(Options& o) {
  finalize(o);
  if (!o.scenario_path) throw glmb::ConfigError("track needs --scenario");
  const glmb::Scenario s = glmb::load_scenario(*o.scenario_path);
  glmb::TrackerConfig config = o.spec.tracker;
  config.h_max = o.spec.hmax.front();
  config.seed = o.spec.seed;
  if (o.spec.kappa_from_clutter) {
    config.clutter_kappa = glmb::clutter_density(s.truth.params.lambda_clutter, s.truth.region.area());
  }
  if (s.truth.dt != config.dt) throw glmb::ConfigError("scenario dt differs from --dt");
  glmb::RunResult run = glmb::track_scenario(s, config, o.spec.metrics_from_step);
  run.record.h_max = config.h_max;
  std::ofstream file;
  glmb::write_trace(open_out(o.out, file), run);
  glmb::write_results_header(std::cerr);
  glmb::write_result_row(std::cerr, run);
  return 0;
}

int cmd_bench(Options& o) {
  finalize(o);
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  fs::create_directories(dir);
  std::ofstream results(dir / "results.csv");
  if (!results) throw glmb::ConfigError("cannot write " + (dir / "results.csv").string());
  glmb::write_results_header(results);
  results.flush();
  glmb::run_benchmark(o.spec, [&](const glmb::RunResult& run) {
    glmb::write_result_row(results, run);
    results.flush();
    glmb::write_result_row(std::cout, run);
    std::cout.flush();
    if (o.trace) {
      std::ofstream t(dir / glmb::trace_file_name(run.record.n_objects, run.record.h_max, run.record.rep));
      glmb::write_trace(t, run);
    }
  });
  return 0;
}

int cmd_metrics(Options& o) {
  std::vector<fs::path> files;
  for (const std::string& f : o.trace_files) files.emplace_back(f);
  if (files.empty()) {
    const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string name = e.path().filename().string();
      if (name.starts_with("trace_") && name.ends_with(".jsonl")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  }
  if (files.empty()) throw glmb::ConfigError("no trace files found");
  std::vector<glmb::RunResult> runs;
  for (const fs::path& f : files) {
    std::ifstream in(f);
    if (!in) throw glmb::ConfigError("cannot open " + f.string());
    try {
      runs.push_back(glmb::read_trace(in, o.spec.metrics_from_step));
    } catch (const glmb::ParseError& e) {
      throw glmb::ConfigError(f.string() + ": " + e.what());
    }
  }
  std::sort(runs.begin(), runs.end(), [](const glmb::RunResult& a, const glmb::RunResult& b) {
    return std::tie(a.record.n_objects, a.record.h_max, a.record.rep) <
           std::tie(b.record.n_objects, b.record.h_max, b.record.rep);
  });
  glmb::write_results_header(std::cout);
  for (const auto& r : runs) glmb::write_result_row(std::cout, r);

  std::vector<glmb::RunRecord> records;
  for (const auto& r : runs) records.push_back(r.record);
  std::cerr << "n_objects,h_max,runs,update_s,update_s_sem,rel_card_err,rel_card_err_sem,track_err_m,track_err_m_sem\n";
  for (const glmb::ConfigSummary& c : glmb::aggregate(records)) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%zu,%.6g,%.3g,%.6g,%.3g,%.6g,%.3g\n", c.n_objects, c.h_max,
                  c.update_s.n, c.update_s.mean, c.update_s.sem, c.rel_card_err.mean, c.rel_card_err.sem,
                  c.track_err_m.mean, c.track_err_m.sem);
    std::cerr << buf;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch-sampled GLMB multi-object tracker"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value file mirroring the flags; flags take precedence");

  Options o;

  auto* sim = app.add_subcommand("simulate", "Generate a convoy scenario file");
  add_run_flags(*sim, o);
  add_scenario_flags(*sim, o);
  add_tracker_flags(*sim, o);
  sim->add_option("--out", o.out, "Output path (default stdout)");

  auto* track = app.add_subcommand("track", "Run the filter on a scenario file and emit a per-step trace");
  add_run_flags(*track, o);
  add_tracker_flags(*track, o);
  track->add_option("--scenario", o.scenario_path, "Scenario file")->required()->check(CLI::ExistingFile);
  track->add_option("--out", o.out, "Trace output path (default stdout)");

  auto* bench = app.add_subcommand("bench", "Run the (objects x hmax x reps) grid");
  add_run_flags(*bench, o);
  add_scenario_flags(*bench, o);
  add_tracker_flags(*bench, o);
  bench->add_option("--out", o.out, "Output directory for results.csv and traces");
  bench->add_flag("--trace", o.trace, "Write per-step trace files");

  auto* metrics = app.add_subcommand("metrics", "Recompute results rows from trace files");
  metrics->add_option("--out", o.out, "Directory holding trace_*.jsonl");
  metrics->add_option("traces", o.trace_files, "Trace files (overrides --out)");
  metrics->add_option("--metrics-from", o.spec.metrics_from_step, "First step counted in accuracy metrics");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(o);
    if (track->parsed()) return cmd_track(o);
    if (bench->parsed()) return cmd_bench(o);
    if (metrics->parsed()) return cmd_metrics(o);
  } catch (const glmb::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const glmb::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
