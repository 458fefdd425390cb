#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "glmb/types.hpp"

namespace glmb {

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), sorted by row
  double cost = 0.0;
};

/// Minimum-cost one-to-one assignment on a rows x cols matrix (row-major)
/// covering min(rows, cols) pairs. O(n^2 m) shortest augmenting paths.
Assignment hungarian(std::span<const double> cost, std::size_t rows, std::size_t cols);

/// Mean Euclidean distance over the optimal matching of truth to estimates.
/// nullopt when either side is empty. Unmatched points add nothing.
std::optional<double> tracking_error(std::span<const Point2> truth, std::span<const Point2> estimates);

struct CardinalityError {
  std::size_t absolute = 0;
  std::optional<double> relative;  // undefined when the true count is 0
};

CardinalityError cardinality_error(std::size_t true_count, std::size_t estimated_count);

/// One filter step of one run.
struct StepRecord {
  std::int64_t k = 0;
  double update_s = 0.0;
  std::size_t n_hypotheses = 0;
  std::size_t est_cardinality = 0;
  std::size_t true_cardinality = 0;
  std::optional<double> track_err_m;

  bool operator==(const StepRecord&) const = default;
};

/// Time averages of one run. Steps with k < first_step are skipped for the
/// accuracy metrics; timing and hypothesis counts use every step.
struct RunSummary {
  double mean_update_s = 0.0;
  double p95_update_s = 0.0;
  double rel_card_err = 0.0;
  double track_err_m = 0.0;  // NaN if no step had a defined tracking error
  double mean_hypotheses = 0.0;
};

RunSummary summarize_run(std::span<const StepRecord> steps, std::int64_t first_step = 0);

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;  // sample standard deviation / sqrt(n); 0 for n = 1
  std::size_t n = 0;
};

MeanSem mean_sem(std::span<const double> values);

struct ConfigSummary {
  std::size_t n_objects = 0;
  std::size_t h_max = 0;
  MeanSem update_s;
  MeanSem rel_card_err;
  MeanSem track_err_m;
  MeanSem hypotheses;
};

struct RunRecord {
  std::size_t n_objects = 0;
  std::size_t h_max = 0;
  std::size_t rep = 0;
  RunSummary summary;
};

/// Across-run mean and SEM per (n_objects, h_max), in order of first appearance.
std::vector<ConfigSummary> aggregate(std::span<const RunRecord> runs);

}  // namespace glmb
