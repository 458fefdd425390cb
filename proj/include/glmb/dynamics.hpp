#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "glmb/likelihood.hpp"
#include "glmb/rng.hpp"
#include "glmb/types.hpp"

namespace glmb {

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Additive perturbation applied after the deterministic CTRV step. Heading is
/// never perturbed directly; it picks up noise through omega.
struct ProcessNoise {
  double px = 0.0;
  double py = 0.0;
  double v = 0.0;
  double omega = 0.0;
};

/// |omega| at or below which the straight-line limit is used.
inline constexpr double kStraightLineOmega = 1e-6;

/// Constant turn rate and velocity transition over dt seconds.
KinematicState ctrv_step(const KinematicState& state, double dt, const std::optional<ProcessNoise>& noise = std::nullopt);

namespace detail {
KinematicState ctrv_turning(const KinematicState& s, double dt);
KinematicState ctrv_straight(const KinematicState& s, double dt);
}  // namespace detail

/// Noise for particle `particle` of pool slot `slot` at `step`, drawn from the
/// stream (step, predict, slot, particle).
ProcessNoise draw_process_noise(const TrackerConfig& config, std::int64_t step, std::uint64_t slot,
                                std::uint64_t particle);

/// Propagates one cloud. Signature is cleared and the newborn flag dropped.
LabeledTrack predict_track(const LabeledTrack& track, const TrackerConfig& config, std::int64_t step,
                           std::uint64_t slot);

/// Advances every pooled particle cloud to `posterior.step + 1`. Hypothesis
/// structure, labels and weights are unchanged. Parallel over (track, particle).
GlmbPosterior predict(const GlmbPosterior& posterior, const TrackerConfig& config);

struct BirthCandidate {
  Point2 seed_point;
  Label label;
  double r_birth = 0.0;
  std::uint32_t measurement = 0;
};

struct Birth {
  BirthCandidate candidate;
  LabeledTrack track;
};

/// Measurement-driven birth. Measurements whose best track-origin probability
/// max_j C/(C + kappa) is below birth_seed_threshold (all of them when the
/// matrix has no track columns) seed a new track, lowest evidence first, at
/// most birth_max_per_step per call. Labels come from `labels` at
/// `measurements.step`.
std::vector<Birth> spawn_births(const MeasurementSet& measurements, const CompatibilityMatrix& compat,
                                const TrackerConfig& config, LabelIssuer& labels);

}  // namespace glmb
