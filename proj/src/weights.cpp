#include "glmb/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "glmb/types.hpp"

namespace glmb {

double log_sum_exp(std::span<const double> log_values) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : log_values) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : log_values) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

void normalize_log_weights_inplace(std::span<double> log_weights) {
  if (log_weights.empty()) throw DegenerateWeightsError("cannot normalize an empty weight vector");
  for (double x : log_weights) {
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
      throw DegenerateWeightsError("weights must be finite");
    }
  }
  const double total = log_sum_exp(log_weights);
  if (!std::isfinite(total)) throw DegenerateWeightsError("all weights are zero");
  for (double& x : log_weights) x -= total;
}

std::vector<double> normalize_log_weights(std::span<const double> log_weights) {
  std::vector<double> out(log_weights.begin(), log_weights.end());
  normalize_log_weights_inplace(out);
  for (double& x : out) x = std::exp(x);
  return out;
}

std::vector<double> normalize_weights(std::span<const double> weights) {
  if (weights.empty()) throw DegenerateWeightsError("cannot normalize an empty weight vector");
  double hi = 0.0;
  for (double w : weights) {
    if (w < 0.0 || std::isnan(w)) throw DegenerateWeightsError("weights must be nonnegative");
    if (std::isinf(w)) throw DegenerateWeightsError("weights must be finite");
    hi = std::max(hi, w);
  }
  if (hi == 0.0) throw DegenerateWeightsError("all weights are zero");
  // Dividing by the largest weight first keeps tiny and huge scales exact.
  std::vector<double> out(weights.begin(), weights.end());
  double total = 0.0;
  for (double& w : out) total += (w /= hi);
  for (double& w : out) w /= total;
  return out;
}

double effective_sample_size(std::span<const double> weights) {
  double sum = 0.0;
  double sq = 0.0;
  for (double w : weights) {
    sum += w;
    sq += w * w;
  }
  if (weights.empty() || std::abs(sum - 1.0) > 1e-9) {
    throw ContractViolation("effective_sample_size requires normalized weights");
  }
  return 1.0 / sq;
}

}  // namespace glmb
