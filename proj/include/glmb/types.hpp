#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace glmb {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// All-zero, empty or non-finite weight vectors handed to a normalizer.
class DegenerateWeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed configuration values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number (0 when unknown).
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Labels and particles
// ---------------------------------------------------------------------------

/// Persistent track identity. Ordered by (birth_step, birth_index), so a
/// label issued later always compares greater.
struct Label {
  std::int32_t birth_step = 0;
  std::int32_t birth_index = 0;

  auto operator<=>(const Label&) const = default;
};

std::string to_string(const Label& label);

struct LabelHash {
  std::size_t operator()(const Label& l) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(static_cast<std::uint32_t>(l.birth_step)) << 32) |
                                      static_cast<std::uint32_t>(l.birth_index));
  }
};

/// Hands out (step, ordinal) labels. Indices restart at zero for every new
/// step and a step can never be revisited.
class LabelIssuer {
 public:
  Label issue(std::int32_t step);
  std::int32_t last_step() const noexcept { return step_; }

 private:
  std::int32_t step_ = -1;
  std::int32_t next_index_ = 0;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

/// CTRV kinematics: position (m), speed (m/s), heading (rad), turn rate (rad/s).
struct KinematicState {
  double px = 0.0;
  double py = 0.0;
  double v = 0.0;
  double phi = 0.0;
  double omega = 0.0;

  bool operator==(const KinematicState&) const = default;
};

struct Particle {
  double px = 0.0;
  double py = 0.0;
  double v = 0.0;
  double phi = 0.0;
  double omega = 0.0;
  double log_weight = 0.0;

  KinematicState state() const { return {px, py, v, phi, omega}; }
  void set_state(const KinematicState& s) {
    px = s.px;
    py = s.py;
    v = s.v;
    phi = s.phi;
    omega = s.omega;
  }
  bool operator==(const Particle&) const = default;
};

/// Sorted, strictly increasing measurement indices associated with a track at
/// the current step. Empty for predicted tracks and missed detections.
using Signature = std::vector<std::uint32_t>;

/// Canonical text form, e.g. "{0;3;7}".
std::string encode_signature(const Signature& sig);

struct LabeledTrack {
  Label label;
  std::vector<Particle> particles;
  Signature signature;
  /// Set for tracks spawned at the current step. Their survival prior at the
  /// first update is r_birth instead of p_survival.
  bool newborn = false;
  /// Set when an update collapsed all particle weights and the cloud fell
  /// back to uniform weights.
  bool weight_fallback = false;

  bool operator==(const LabeledTrack&) const = default;
};

// ---------------------------------------------------------------------------
// Hypotheses and posterior
// ---------------------------------------------------------------------------

/// One global association hypothesis.
///
/// `labels` is sorted ascending and `tracks[i]` is the pool slot holding the
/// particle cloud of `labels[i]`. `assoc_map[i]` is the label measurement i
/// was assigned to at this step, or nullopt for clutter.
struct Hypothesis {
  std::uint64_t id = 0;
  std::uint64_t parent_id = 0;
  std::vector<Label> labels;
  std::vector<std::uint32_t> tracks;
  std::vector<std::optional<Label>> assoc_map;
  double weight = 0.0;

  bool operator==(const Hypothesis&) const = default;
};

/// Weighted mixture of hypotheses sharing a pool of particle clouds.
///
/// After an update every pool entry is referenced by at least one hypothesis
/// and (parent cloud, signature) pairs are pooled exactly once.
struct GlmbPosterior {
  std::int32_t step = -1;
  std::vector<Hypothesis> hypotheses;
  std::vector<LabeledTrack> track_pool;
  LabelIssuer labels;
  std::uint64_t next_hypothesis_id = 1;

  /// Posterior before the first measurement: one empty hypothesis.
  static GlmbPosterior initial();
};

struct MeasurementSet {
  std::int32_t step = 0;
  std::vector<Point2> detections;

  std::size_t size() const noexcept { return detections.size(); }
  bool operator==(const MeasurementSet&) const = default;
};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class CountModel { poisson, binomial };

struct TrackerConfig {
  double p_survival = 0.99;
  double p_detect = 0.999;
  /// Clutter density (m^-2). See clutter_density() for the default rule.
  double clutter_kappa = 1e-4;
  /// Squared Mahalanobis gate; 9.21 is the chi-square 2-dof 0.99 quantile.
  double gate_chi2 = 9.21;
  std::size_t particles_per_track = 512;
  std::size_t h_max = 25;
  std::size_t h_up = 100;
  double prune_tau = 1e-5;
  double meas_sigma = 0.25;
  /// Expected detections per object per step. Enables the
  /// measurement-count prior in the hypothesis weight; 0 disables it.
  double detection_rate = 4.75;
  /// Distribution of the number of detections a detected object yields.
  /// binomial: (1 - eta) Binomial(n; detections_max, rate / detections_max)
  /// + eta Poisson(n; rate), with eta = count_outlier_weight.
  CountModel count_model = CountModel::binomial;
  std::size_t detections_max = 5;
  double count_outlier_weight = 0.01;

  // Measurement-driven birth.
  double birth_pos_sigma = 0.5;
  double v_max = 15.0;
  double omega_sigma = 0.5;
  std::size_t birth_max_per_step = 10;
  double birth_seed_threshold = 0.9999;
  double r_birth = 0.03;

  // Process noise per step.
  double sigma_v = 0.5;
  double sigma_omega = 0.15;
  double sigma_pos = 0.1;

  double dt = 0.1;
  std::uint64_t seed = 0x5eed;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// max(expected_clutter_count / area, 1e-4): keeps the clutter column positive
/// when no clutter is expected.
double clutter_density(double expected_clutter_count, double region_area);

}  // namespace glmb
