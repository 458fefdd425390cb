#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "glmb/metrics.hpp"
#include "glmb/scenario.hpp"
#include "glmb/types.hpp"
#include "glmb/update.hpp"

namespace glmb {

/// Experiment grid and fixed parameters. Defaults reproduce the convoy
/// protocol: D = 5, lambda = 0, sigma = 0.25, delta = 2, H_up = 100,
/// tau = 1e-5, 548 steps of 0.1 s, 10 repetitions.
struct BenchmarkSpec {
  std::vector<std::size_t> objects{1, 2, 5, 10, 20};
  std::vector<std::size_t> hmax{5, 10, 25, 50, 100};
  std::size_t reps = 10;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: OpenMP default

  TrackerConfig tracker;  // h_max is replaced per cell
  bool kappa_from_clutter = true;  // derive clutter_kappa from lambda / area
  ConvoyParams scenario;  // n_objects is replaced per cell
  Region region;
  double duration = 54.8;
  std::optional<std::string> track_file;

  /// Accuracy metrics ignore steps before this one.
  std::int64_t metrics_from_step = 0;
  /// Run check_posterior after every step and record the first violation.
  bool check_invariants = false;

  void validate() const;
};

/// Per-run seed: mixes base seed, object count, H_max and repetition so any
/// cell can be rerun in isolation.
std::uint64_t run_seed(std::uint64_t base, std::size_t n_objects, std::size_t h_max, std::size_t rep);

struct RunResult {
  RunRecord record;
  std::uint64_t seed = 0;
  std::vector<StepRecord> trace;
  std::string invariant_violation;  // empty when all checks passed (or were off)
};

/// Tracks a whole scenario with a fresh filter and collects per-step records.
RunResult track_scenario(const Scenario& scenario, const TrackerConfig& config, std::int64_t metrics_from_step,
                         bool check_invariants = false);

/// Ground track for a spec: loaded from track_file or synthesized.
GroundTrack benchmark_ground_track(const BenchmarkSpec& spec);

/// Runs one (N, H_max, rep) cell.
RunResult run_cell(const BenchmarkSpec& spec, const GroundTrack& track, std::size_t n_objects, std::size_t h_max,
                   std::size_t rep);

/// Full grid, cells in (N, H_max, rep) order. on_result fires after each
/// cell so callers can stream rows to disk.
std::vector<RunResult> run_benchmark(const BenchmarkSpec& spec,
                                     const std::function<void(const RunResult&)>& on_result = {});

// ---------------------------------------------------------------------------
// Output formats
// ---------------------------------------------------------------------------

inline constexpr const char* kResultsHeader =
    "n_objects,h_max,rep,seed,mean_update_s,p95_update_s,rel_card_err,track_err_m,mean_hypotheses";

void write_results_header(std::ostream& out);
void write_result_row(std::ostream& out, const RunResult& run);

/// Trace file: a {"run": {...}} header line, then one JSON record per step
/// with k, update_s, n_hypotheses, est_cardinality, true_cardinality,
/// track_err_m (null when undefined).
void write_trace(std::ostream& out, const RunResult& run);
RunResult read_trace(std::istream& in, std::int64_t metrics_from_step = 0);

std::string trace_file_name(std::size_t n_objects, std::size_t h_max, std::size_t rep);

}  // namespace glmb
