#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "glmb/likelihood.hpp"
#include "glmb/rng.hpp"
#include "glmb/types.hpp"

namespace glmb {

/// Systematic resampling: one uniform u0 in [0, 1) places P evenly spaced
/// pointers (u0 + p) / P on the weight CDF. Offspring of particle p number
/// floor(P w_p) or ceil(P w_p). Output weights are uniform.
std::vector<Particle> resample_systematic(std::span<const Particle> particles, double u0);
/// Same, drawing `count` offspring (0 means particles.size()).
std::vector<Particle> resample_systematic(std::span<const Particle> particles, double u0, std::size_t count);
std::vector<Particle> resample_systematic(std::span<const Particle> particles, const RngStream& stream);

/// Multiplies each particle weight by prod_z N(z; position, sigma^2 I),
/// renormalizes and resamples when ESS < P/2. The result carries `signature`.
/// If every weight collapses the cloud falls back to uniform weights and is
/// flagged (weight_fallback) instead of failing.
LabeledTrack update_particles(const LabeledTrack& track, std::span<const Point2> assigned, Signature signature,
                              const TrackerConfig& config, const RngStream& resample_stream);

/// Drops hypotheses with weight < tau (the heaviest is exempt), keeps the
/// h_max heaviest (ties broken by smaller id) and renormalizes. Output is
/// sorted by decreasing weight.
std::vector<Hypothesis> prune(std::vector<Hypothesis> hypotheses, double tau, std::size_t h_max);

struct TrackEstimate {
  Label label;
  Point2 position;
  KinematicState state;
};

struct Estimate {
  std::vector<TrackEstimate> tracks;
  std::size_t cardinality() const noexcept { return tracks.size(); }
};

/// Weighted mean state of a cloud; heading is averaged on the circle.
KinematicState mean_state(const LabeledTrack& track);

/// Per-track mean states of the maximum-weight hypothesis (ties: smaller id).
Estimate extract_estimate(const GlmbPosterior& posterior);

// ---------------------------------------------------------------------------
// Filter recursion
// ---------------------------------------------------------------------------

enum class Backend {
  parallel,   // OpenMP kernels
  reference,  // serial reference kernels (src/reference.cpp)
};

struct StepTiming {
  double update_seconds = 0.0;
};

/// Intermediate quantities of one step, kept for diagnostics and tests.
struct StepDiagnostics {
  CompatibilityMatrix compat;          // predicted pool + births
  std::vector<double> death_probs;     // per compat column j at index j - 1
  std::vector<double> survival_priors;
  std::size_t births = 0;
  std::size_t candidates = 0;          // unique successors before pruning
  std::size_t samples = 0;
  std::size_t weight_fallbacks = 0;
};

struct StepResult {
  GlmbPosterior posterior;
  Estimate estimate;
  StepTiming timing;
  StepDiagnostics diagnostics;
};

/// One full recursion: predict, births, compatibility, death probabilities,
/// two-stage sampling, weighting, pruning, batched particle updates for each
/// unique (predicted cloud, signature) pair and estimate extraction.
/// Requires measurements.step == posterior.step + 1.
StepResult filter_step(const GlmbPosterior& posterior, const MeasurementSet& measurements,
                       const TrackerConfig& config, Backend backend = Backend::parallel);

/// Stateful wrapper around filter_step.
class Tracker {
 public:
  explicit Tracker(TrackerConfig config, Backend backend = Backend::parallel);

  const StepResult& step(const MeasurementSet& measurements);
  const GlmbPosterior& posterior() const noexcept { return posterior_; }
  const TrackerConfig& config() const noexcept { return config_; }
  const StepResult& last() const noexcept { return last_; }

 private:
  TrackerConfig config_;
  Backend backend_;
  GlmbPosterior posterior_;
  StepResult last_;
};

/// Checks the posterior invariants (weights sum to one, unique sorted labels,
/// count <= h_max, valid pool references, no measurement mapped to a label
/// outside the hypothesis). Returns an empty string when all hold.
std::string check_posterior(const GlmbPosterior& posterior, std::size_t h_max);

}  // namespace glmb
