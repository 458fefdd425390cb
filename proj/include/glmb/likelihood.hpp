#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "glmb/types.hpp"

namespace glmb {

/// M x (T+1) matrix of gated, detection-scaled likelihoods. Column 0 is the
/// clutter column (always kappa); column j >= 1 belongs to track_slots[j-1].
struct CompatibilityMatrix {
  std::size_t m = 0;
  std::size_t t = 0;
  double kappa = 0.0;
  std::vector<double> entries;          // row-major, m * (t + 1)
  std::vector<std::uint8_t> gate_mask;  // row-major, m * t
  std::vector<std::uint32_t> track_slots;
  std::vector<Label> track_labels;

  std::size_t cols() const noexcept { return t + 1; }
  double at(std::size_t i, std::size_t j) const { return entries[i * (t + 1) + j]; }
  double& at(std::size_t i, std::size_t j) { return entries[i * (t + 1) + j]; }
  /// Gate outcome of measurement i against track column j (j >= 1).
  bool gated(std::size_t i, std::size_t j) const { return gate_mask[i * t + (j - 1)] != 0; }
};

/// Weighted mean and covariance of a cloud's positions.
struct PositionMoments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double cxx = 0.0;
  double cxy = 0.0;
  double cyy = 0.0;
};

PositionMoments position_moments(const LabeledTrack& track);

/// Squared Mahalanobis distance of z under S = cloud covariance + sigma^2 I.
/// A (near-)singular S is regularized with 1e-9 I.
double gate_distance2(const Point2& z, const PositionMoments& moments, double meas_sigma);

/// Particle-mixture likelihood sum_p w_p N(z; (px_p, py_p), sigma^2 I), in m^-2.
double measurement_likelihood(const Point2& z, const LabeledTrack& track, const TrackerConfig& config);

/// True iff gate_distance2(z, cloud) <= gate_chi2.
bool gate(const Point2& z, const LabeledTrack& track, const TrackerConfig& config);

/// Builds the compatibility matrix of `measurements` against `tracks`, in
/// the given order (column j <-> tracks[j-1], slot first_slot + j - 1).
/// Parallel over tracks and matrix cells.
CompatibilityMatrix build_compatibility(const MeasurementSet& measurements, std::span<const LabeledTrack> tracks,
                                        const TrackerConfig& config, std::uint32_t first_slot = 0);

/// Appends columns for `tracks` (slots first_slot, first_slot + 1, ...).
void append_columns(CompatibilityMatrix& compat, const MeasurementSet& measurements,
                    std::span<const LabeledTrack> tracks, const TrackerConfig& config, std::uint32_t first_slot);

/// e_j = max_i C[i,j] / (C[i,j] + kappa) over gated measurements, 0 if none.
double detection_evidence(std::size_t column, const CompatibilityMatrix& compat);

/// Posterior probability that the track in `column` (>= 1) died:
///   (1 - Ps) / ((1 - Ps) + Ps ((1 - Pd) + Pd e_j)),  Ps = survival_prior.
double death_probability(std::size_t column, const CompatibilityMatrix& compat, double survival_prior,
                         const TrackerConfig& config);

/// Closed form used by death_probability, exposed for property tests.
double death_probability_from_evidence(double evidence, double survival_prior, double p_detect);

}  // namespace glmb
