#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glmb/likelihood.hpp"
#include "glmb/rng.hpp"
#include "glmb/types.hpp"

namespace glmb {

// Two-stage successor sampling.
//
// Stage one draws a Bernoulli death for every track of a parent hypothesis.
// Stage two draws, independently for every measurement, a categorical target
// from the compatibility row with the dead columns zeroed. Nothing couples
// the rows, so every (parent, sample, measurement) draw is independent and
// addressed by its own counter in a keyed stream.
//
// Column conventions below refer to a hypothesis-local matrix: column 0 is
// clutter and column j >= 1 is the parent's j-th track.

/// Stage one. Track j (0-based, aligned with death_probs) survives iff
/// stream.uniform_at(j) >= death_probs[j].
std::vector<std::uint8_t> sample_survival(std::span<const double> death_probs, const RngStream& stream);

/// Copy of `compat` with the columns of dead tracks set to zero.
CompatibilityMatrix zero_dead_columns(const CompatibilityMatrix& compat, std::span<const std::uint8_t> survival);

/// Stage two. Returns one column per measurement (0 = clutter), drawn with
/// probability C'[i, j] / sum_j C'[i, j] using stream.uniform_at(i).
/// Throws ContractViolation if a row has no positive entry.
std::vector<std::uint32_t> sample_associations(const CompatibilityMatrix& compat_pruned, const RngStream& stream);

/// Unnormalized log target measure of a successor:
///   log w_parent + sum_j log(Ps_j^s_j (1 - Ps_j)^(1 - s_j))
///                + sum_i log C[i, theta(i)] + sum_{j alive, unassigned} log(1 - Pd).
/// With config.detection_rate > 0 each surviving track also carries the
/// measurement-count prior log p(n_j) (count_pmf) when it holds n_j >= 1
/// measurements, and the missed term becomes log(1 - Pd + Pd p(0)).
/// The proposal ignores this prior; only the weights see it.
/// `compat` is the un-zeroed hypothesis-local matrix. Throws
/// ContractViolation if a measurement targets a dead track.
/// Probability that a detected object yields n detections under the
/// configured count model. Requires config.detection_rate > 0.
double count_pmf(std::size_t n, const TrackerConfig& config);

double log_hypothesis_weight(double parent_log_weight, std::span<const std::uint8_t> survival,
                             std::span<const std::uint32_t> assoc, const CompatibilityMatrix& compat,
                             std::span<const double> survival_priors, const TrackerConfig& config);

/// Linear-domain convenience wrapper of log_hypothesis_weight.
double hypothesis_weight(double parent_weight, std::span<const std::uint8_t> survival,
                         std::span<const std::uint32_t> assoc, const CompatibilityMatrix& compat,
                         std::span<const double> survival_priors, const TrackerConfig& config);

/// Columns [columns...] of `compat` as a new matrix (clutter column kept).
CompatibilityMatrix restrict_columns(const CompatibilityMatrix& compat, std::span<const std::uint32_t> columns);

/// Stream keys used by the sampler.
RngStream survival_stream(std::uint64_t seed, std::int64_t step, std::uint64_t hypothesis_id, std::uint64_t sample);
RngStream association_stream(std::uint64_t seed, std::int64_t step, std::uint64_t hypothesis_id,
                             std::uint64_t sample);

/// Inputs shared by every parent hypothesis of one step.
struct GenerationContext {
  const GlmbPosterior* predicted = nullptr;  // hypotheses index pool slots
  const CompatibilityMatrix* compat = nullptr;
  /// Per compat column j >= 1, stored at index j - 1.
  std::span<const double> death_probs;
  std::span<const double> survival_priors;
  /// Compat columns appended to every parent (newborn tracks).
  std::span<const std::uint32_t> birth_columns;
  std::size_t h_up = 100;
  const TrackerConfig* config = nullptr;
};

/// Track columns a parent hypothesis considers: its own tracks then births.
struct ParentView {
  std::vector<std::uint32_t> columns;  // global compat columns (>= 1)
};

/// A unique successor of one parent. Local column k >= 1 of `assoc` and
/// index k - 1 of `survival` refer to views[parent].columns[k - 1].
struct Candidate {
  std::uint32_t parent = 0;
  std::vector<std::uint8_t> survival;
  std::vector<std::uint32_t> assoc;
  double log_weight = 0.0;

  bool operator==(const Candidate&) const = default;
};

struct GenerationResult {
  std::vector<ParentView> views;
  std::vector<Candidate> candidates;  // grouped by parent, first-occurrence order
  std::size_t samples_drawn = 0;
};

/// Draws h_up (survival, association) samples per parent, keeps the first
/// occurrence of each distinct sample and weights it once by its target
/// measure. Parallel over parents; output is independent of the schedule.
GenerationResult generate_hypotheses(const GenerationContext& ctx);

/// Builds the view for one parent (exposed for the serial reference).
ParentView make_parent_view(const Hypothesis& parent, const CompatibilityMatrix& compat,
                            std::span<const std::uint32_t> birth_columns);

}  // namespace glmb
