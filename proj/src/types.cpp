#include "glmb/types.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace glmb {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

std::string to_string(const Label& label) {
  return std::to_string(label.birth_step) + ":" + std::to_string(label.birth_index);
}

Label LabelIssuer::issue(std::int32_t step) {
  if (step < 0) throw ContractViolation("labels can only be issued for steps >= 0");
  if (step < step_) throw ContractViolation("label issuer cannot move back in time");
  if (step != step_) {
    step_ = step;
    next_index_ = 0;
  }
  if (next_index_ == std::numeric_limits<std::int32_t>::max()) {
    throw std::runtime_error("label counter exhausted at step " + std::to_string(step));
  }
  return Label{step, next_index_++};
}

std::string encode_signature(const Signature& sig) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < sig.size(); ++i) {
    if (i) os << ';';
    os << sig[i];
  }
  os << '}';
  return os.str();
}

GlmbPosterior GlmbPosterior::initial() {
  GlmbPosterior post;
  Hypothesis empty;
  empty.id = 0;
  empty.parent_id = 0;
  empty.weight = 1.0;
  post.hypotheses.push_back(std::move(empty));
  return post;
}

namespace {

void require_probability(double p, const char* name) {
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in (0, 1]");
}
void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError(std::string(name) + " must be positive and finite");
}
void require_nonnegative(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(std::string(name) + " must be >= 0 and finite");
}
void require_count(std::size_t n, const char* name) {
  if (n < 1) throw ConfigError(std::string(name) + " must be >= 1");
}

}  // namespace

void TrackerConfig::validate() const {
  require_probability(p_survival, "p_survival");
  require_probability(p_detect, "p_detect");
  require_probability(prune_tau, "prune_tau");
  require_probability(birth_seed_threshold, "birth_seed_threshold");
  require_probability(r_birth, "r_birth");
  if (r_birth >= 1.0) throw ConfigError("r_birth must lie in (0, 1)");
  require_positive(clutter_kappa, "clutter_kappa");
  require_positive(gate_chi2, "gate_chi2");
  require_positive(meas_sigma, "meas_sigma");
  require_positive(birth_pos_sigma, "birth_pos_sigma");
  require_positive(v_max, "v_max");
  require_nonnegative(omega_sigma, "omega_sigma");
  require_nonnegative(sigma_v, "sigma_v");
  require_nonnegative(sigma_omega, "sigma_omega");
  require_nonnegative(sigma_pos, "sigma_pos");
  require_positive(dt, "dt");
  require_nonnegative(detection_rate, "detection_rate");
  if (count_model == CountModel::binomial) {
    require_count(detections_max, "detections_max");
    require_probability(count_outlier_weight, "count_outlier_weight");
    if (detection_rate > static_cast<double>(detections_max)) {
      throw ConfigError("detection_rate must not exceed detections_max under the binomial count model");
    }
  }
  require_count(particles_per_track, "particles_per_track");
  require_count(h_max, "h_max");
  require_count(h_up, "h_up");
  require_count(birth_max_per_step, "birth_max_per_step");
}

double clutter_density(double expected_clutter_count, double region_area) {
  if (!(region_area > 0.0)) throw ConfigError("region area must be positive");
  if (expected_clutter_count < 0.0) throw ConfigError("expected clutter count must be >= 0");
  return std::max(expected_clutter_count / region_area, 1e-4);
}

}  // namespace glmb
