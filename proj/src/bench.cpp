#include "glmb/bench.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include <omp.h>

#include <json.hpp>

#include "glmb/rng.hpp"

namespace glmb {

using nlohmann::json;

void BenchmarkSpec::validate() const {
  if (objects.empty()) throw ConfigError("objects grid is empty");
  if (hmax.empty()) throw ConfigError("hmax grid is empty");
  for (std::size_t n : objects) {
    if (n < 1) throw ConfigError("object counts must be >= 1");
  }
  for (std::size_t h : hmax) {
    if (h < 1) throw ConfigError("hmax values must be >= 1");
  }
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (threads < 0) throw ConfigError("threads must be >= 0");
  if (scenario.detections_per_object < 1) throw ConfigError("detections per object must be >= 1");
  if (!(scenario.sigma > 0.0)) throw ConfigError("sigma must be positive");
  if (scenario.lambda_clutter < 0.0) throw ConfigError("lambda must be >= 0");
  if (!(region.width() > 0.0 && region.height() > 0.0)) throw ConfigError("region is degenerate");
  if (!(duration > 0.0)) throw ConfigError("duration must be positive");
  tracker.validate();
}

std::uint64_t run_seed(std::uint64_t base, std::size_t n_objects, std::size_t h_max, std::size_t rep) {
  std::uint64_t h = mix64(base);
  h = hash_combine(h, n_objects);
  h = hash_combine(h, h_max);
  h = hash_combine(h, rep);
  return h;
}

RunResult track_scenario(const Scenario& scenario, const TrackerConfig& config, std::int64_t metrics_from_step,
                         bool check_invariants) {
  RunResult run;
  run.seed = config.seed;
  run.record.h_max = config.h_max;
  run.record.n_objects = scenario.truth.params.n_objects;
  Tracker tracker(config);
  run.trace.reserve(scenario.measurements.size());
  for (std::size_t k = 0; k < scenario.measurements.size(); ++k) {
    const StepResult& r = tracker.step(scenario.measurements[k]);
    if (check_invariants && run.invariant_violation.empty()) {
      const std::string v = check_posterior(r.posterior, config.h_max);
      if (!v.empty()) run.invariant_violation = "step " + std::to_string(k) + ": " + v;
    }
    StepRecord rec;
    rec.k = static_cast<std::int64_t>(k);
    rec.update_s = r.timing.update_seconds;
    rec.n_hypotheses = r.posterior.hypotheses.size();
    rec.est_cardinality = r.estimate.cardinality();
    const auto truth = scenario.truth.positions_at(k);
    rec.true_cardinality = truth.size();
    std::vector<Point2> est;
    for (const TrackEstimate& t : r.estimate.tracks) est.push_back(t.position);
    rec.track_err_m = tracking_error(truth, est);
    run.trace.push_back(rec);
  }
  run.record.summary = summarize_run(run.trace, metrics_from_step);
  return run;
}

GroundTrack benchmark_ground_track(const BenchmarkSpec& spec) {
  if (spec.track_file) {
    std::ifstream in(*spec.track_file);
    if (!in) throw ConfigError("cannot open track file '" + *spec.track_file + "'");
    GroundTrack t = read_ground_track(in, spec.tracker.dt);
    validate_ground_track(t, spec.tracker.v_max);
    return t;
  }
  return synth_ground_track(spec.duration, spec.tracker.dt, spec.region);
}

RunResult run_cell(const BenchmarkSpec& spec, const GroundTrack& track, std::size_t n_objects, std::size_t h_max,
                   std::size_t rep) {
  const std::uint64_t seed = run_seed(spec.seed, n_objects, h_max, rep);
  ConvoyParams params = spec.scenario;
  params.n_objects = n_objects;
  const Scenario scenario = generate_scenario(track, params, spec.region, seed);

  TrackerConfig config = spec.tracker;
  config.h_max = h_max;
  config.seed = seed;
  if (spec.kappa_from_clutter) config.clutter_kappa = clutter_density(params.lambda_clutter, spec.region.area());

  RunResult run = track_scenario(scenario, config, spec.metrics_from_step, spec.check_invariants);
  run.record.n_objects = n_objects;
  run.record.h_max = h_max;
  run.record.rep = rep;
  run.seed = seed;
  return run;
}

std::vector<RunResult> run_benchmark(const BenchmarkSpec& spec, const std::function<void(const RunResult&)>& on_result) {
  spec.validate();
  if (spec.threads > 0) omp_set_num_threads(spec.threads);
  const GroundTrack track = benchmark_ground_track(spec);
  std::vector<RunResult> results;
  results.reserve(spec.objects.size() * spec.hmax.size() * spec.reps);
  for (std::size_t n : spec.objects) {
    for (std::size_t h : spec.hmax) {
      for (std::size_t rep = 0; rep < spec.reps; ++rep) {
        results.push_back(run_cell(spec, track, n, h, rep));
        if (on_result) on_result(results.back());
      }
    }
  }
  return results;
}

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void write_results_header(std::ostream& out) { out << kResultsHeader << '\n'; }

void write_result_row(std::ostream& out, const RunResult& run) {
  const RunSummary& s = run.record.summary;
  out << run.record.n_objects << ',' << run.record.h_max << ',' << run.record.rep << ',' << run.seed << ','
      << fmt_double(s.mean_update_s) << ',' << fmt_double(s.p95_update_s) << ',' << fmt_double(s.rel_card_err) << ','
      << fmt_double(s.track_err_m) << ',' << fmt_double(s.mean_hypotheses) << '\n';
}

void write_trace(std::ostream& out, const RunResult& run) {
  json header;
  header["run"] = {{"n_objects", run.record.n_objects},
                   {"h_max", run.record.h_max},
                   {"rep", run.record.rep},
                   {"seed", run.seed}};
  out << header.dump() << '\n';
  for (const StepRecord& r : run.trace) {
    json rec;
    rec["k"] = r.k;
    rec["update_s"] = r.update_s;
    rec["n_hypotheses"] = r.n_hypotheses;
    rec["est_cardinality"] = r.est_cardinality;
    rec["true_cardinality"] = r.true_cardinality;
    rec["track_err_m"] = r.track_err_m ? json(*r.track_err_m) : json(nullptr);
    out << rec.dump() << '\n';
  }
}

RunResult read_trace(std::istream& in, std::int64_t metrics_from_step) {
  RunResult run;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed trace record: ") + e.what());
    }
    try {
      if (rec.contains("run")) {
        const json& h = rec["run"];
        run.record.n_objects = h.at("n_objects").get<std::size_t>();
        run.record.h_max = h.at("h_max").get<std::size_t>();
        run.record.rep = h.at("rep").get<std::size_t>();
        run.seed = h.at("seed").get<std::uint64_t>();
        continue;
      }
      StepRecord r;
      r.k = rec.at("k").get<std::int64_t>();
      r.update_s = rec.at("update_s").get<double>();
      r.n_hypotheses = rec.at("n_hypotheses").get<std::size_t>();
      r.est_cardinality = rec.at("est_cardinality").get<std::size_t>();
      r.true_cardinality = rec.at("true_cardinality").get<std::size_t>();
      const json& e = rec.at("track_err_m");
      if (!e.is_null()) r.track_err_m = e.get<double>();
      run.trace.push_back(r);
    } catch (const json::exception& e) {
      throw ParseError(lineno, std::string("bad trace record: ") + e.what());
    }
  }
  run.record.summary = summarize_run(run.trace, metrics_from_step);
  return run;
}

std::string trace_file_name(std::size_t n_objects, std::size_t h_max, std::size_t rep) {
  return "trace_n" + std::to_string(n_objects) + "_h" + std::to_string(h_max) + "_r" + std::to_string(rep) + ".jsonl";
}

}  // namespace glmb
