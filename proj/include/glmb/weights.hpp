#pragma once

#include <span>
#include <vector>

namespace glmb {

/// log(sum(exp(x))). Returns -inf for an empty span or all -inf input.
double log_sum_exp(std::span<const double> log_values);

/// Normalizes nonnegative linear weights to probabilities. Works in the log
/// domain so that tiny (1e-300) or huge weights normalize without underflow.
/// Throws DegenerateWeightsError when no weight is strictly positive.
std::vector<double> normalize_weights(std::span<const double> weights);

/// Normalizes log-weights and returns linear probabilities.
/// Throws DegenerateWeightsError when every entry is -inf (or non-finite).
std::vector<double> normalize_log_weights(std::span<const double> log_weights);

/// In-place variant: shifts `log_weights` so that exp(.) sums to one.
void normalize_log_weights_inplace(std::span<double> log_weights);

/// 1 / sum(w^2). Requires normalized weights (|sum - 1| <= 1e-9), otherwise
/// throws ContractViolation.
double effective_sample_size(std::span<const double> weights);

}  // namespace glmb
