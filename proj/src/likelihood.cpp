#include "glmb/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace glmb {

PositionMoments position_moments(const LabeledTrack& track) {
  PositionMoments m;
  double wsum = 0.0;
  for (const Particle& p : track.particles) {
    const double w = std::exp(p.log_weight);
    wsum += w;
    m.mean_x += w * p.px;
    m.mean_y += w * p.py;
  }
  if (!(wsum > 0.0)) return m;
  m.mean_x /= wsum;
  m.mean_y /= wsum;
  for (const Particle& p : track.particles) {
    const double w = std::exp(p.log_weight) / wsum;
    const double dx = p.px - m.mean_x;
    const double dy = p.py - m.mean_y;
    m.cxx += w * dx * dx;
    m.cxy += w * dx * dy;
    m.cyy += w * dy * dy;
  }
  return m;
}

double gate_distance2(const Point2& z, const PositionMoments& moments, double meas_sigma) {
  const double r = meas_sigma * meas_sigma;
  double sxx = moments.cxx + r;
  double syy = moments.cyy + r;
  const double sxy = moments.cxy;
  double det = sxx * syy - sxy * sxy;
  if (!(det > 1e-18)) {
    sxx += 1e-9;
    syy += 1e-9;
    det = sxx * syy - sxy * sxy;
  }
  const double dx = z.x - moments.mean_x;
  const double dy = z.y - moments.mean_y;
  return (syy * dx * dx - 2.0 * sxy * dx * dy + sxx * dy * dy) / det;
}

double measurement_likelihood(const Point2& z, const LabeledTrack& track, const TrackerConfig& config) {
  const double var = config.meas_sigma * config.meas_sigma;
  const double inv2var = 0.5 / var;
  double acc = 0.0;
  for (const Particle& p : track.particles) {
    const double dx = z.x - p.px;
    const double dy = z.y - p.py;
    acc += std::exp(p.log_weight - (dx * dx + dy * dy) * inv2var);
  }
  return acc / (2.0 * std::numbers::pi * var);
}

bool gate(const Point2& z, const LabeledTrack& track, const TrackerConfig& config) {
  return gate_distance2(z, position_moments(track), config.meas_sigma) <= config.gate_chi2;
}

namespace {

// Fills columns [col_begin, col_begin + tracks.size()) of an already sized
// matrix. Each cell is written by exactly one iteration.
void fill_columns(CompatibilityMatrix& compat, const MeasurementSet& measurements,
                  std::span<const LabeledTrack> tracks, const TrackerConfig& config, std::size_t col_begin) {
  const auto nt = static_cast<std::int64_t>(tracks.size());
  std::vector<PositionMoments> moments(tracks.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t j = 0; j < nt; ++j) moments[j] = position_moments(tracks[j]);

  const auto nm = static_cast<std::int64_t>(compat.m);
  const std::size_t cols = compat.cols();
#pragma omp parallel for collapse(2) schedule(dynamic, 16)
  for (std::int64_t i = 0; i < nm; ++i) {
    for (std::int64_t j = 0; j < nt; ++j) {
      const Point2& z = measurements.detections[i];
      const std::size_t col = col_begin + static_cast<std::size_t>(j);
      const bool inside = gate_distance2(z, moments[j], config.meas_sigma) <= config.gate_chi2;
      compat.gate_mask[i * compat.t + (col - 1)] = inside ? 1 : 0;
      compat.entries[i * cols + col] =
          inside ? config.p_detect * measurement_likelihood(z, tracks[j], config) : 0.0;
    }
  }
}

}  // namespace

CompatibilityMatrix build_compatibility(const MeasurementSet& measurements, std::span<const LabeledTrack> tracks,
                                        const TrackerConfig& config, std::uint32_t first_slot) {
  CompatibilityMatrix compat;
  compat.m = measurements.size();
  compat.t = tracks.size();
  compat.kappa = config.clutter_kappa;
  compat.entries.assign(compat.m * compat.cols(), 0.0);
  compat.gate_mask.assign(compat.m * compat.t, 0);
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    compat.track_slots.push_back(first_slot + static_cast<std::uint32_t>(j));
    compat.track_labels.push_back(tracks[j].label);
  }
  for (std::size_t i = 0; i < compat.m; ++i) compat.entries[i * compat.cols()] = compat.kappa;
  fill_columns(compat, measurements, tracks, config, 1);
  return compat;
}

void append_columns(CompatibilityMatrix& compat, const MeasurementSet& measurements,
                    std::span<const LabeledTrack> tracks, const TrackerConfig& config, std::uint32_t first_slot) {
  if (tracks.empty()) return;
  const std::size_t old_t = compat.t;
  const std::size_t new_t = old_t + tracks.size();
  std::vector<double> entries(compat.m * (new_t + 1), 0.0);
  std::vector<std::uint8_t> mask(compat.m * new_t, 0);
  for (std::size_t i = 0; i < compat.m; ++i) {
    std::copy_n(compat.entries.begin() + i * (old_t + 1), old_t + 1, entries.begin() + i * (new_t + 1));
    if (old_t > 0) std::copy_n(compat.gate_mask.begin() + i * old_t, old_t, mask.begin() + i * new_t);
  }
  compat.entries = std::move(entries);
  compat.gate_mask = std::move(mask);
  compat.t = new_t;
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    compat.track_slots.push_back(first_slot + static_cast<std::uint32_t>(j));
    compat.track_labels.push_back(tracks[j].label);
  }
  fill_columns(compat, measurements, tracks, config, old_t + 1);
}

double detection_evidence(std::size_t column, const CompatibilityMatrix& compat) {
  if (column < 1 || column > compat.t) throw ContractViolation("track column out of range");
  double e = 0.0;
  for (std::size_t i = 0; i < compat.m; ++i) {
    if (!compat.gated(i, column)) continue;
    const double c = compat.at(i, column);
    e = std::max(e, c / (c + compat.kappa));
  }
  return e;
}

double death_probability_from_evidence(double evidence, double survival_prior, double p_detect) {
  const double dead = 1.0 - survival_prior;
  const double alive = survival_prior * ((1.0 - p_detect) + p_detect * evidence);
  if (dead + alive <= 0.0) return 1.0;
  return dead / (dead + alive);
}

double death_probability(std::size_t column, const CompatibilityMatrix& compat, double survival_prior,
                         const TrackerConfig& config) {
  return death_probability_from_evidence(detection_evidence(column, compat), survival_prior, config.p_detect);
}

}  // namespace glmb
