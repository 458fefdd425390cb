#pragma once

// Serial reference kernels.
//
// Straightforward single-threaded versions of the data-parallel kernels,
// written against the public per-element operations (ctrv_step, gate,
// measurement_likelihood, sample_survival, sample_associations,
// hypothesis_weight, update_particles). They consume the same keyed random
// streams, so for a fixed seed they must agree with the OpenMP kernels bit
// for bit at any thread count. Tests and the kernel benchmark rely on that.

#include <span>
#include <vector>

#include "glmb/likelihood.hpp"
#include "glmb/sampler.hpp"
#include "glmb/types.hpp"

namespace glmb::reference {

GlmbPosterior predict(const GlmbPosterior& posterior, const TrackerConfig& config);

CompatibilityMatrix build_compatibility(const MeasurementSet& measurements, std::span<const LabeledTrack> tracks,
                                        const TrackerConfig& config);

GenerationResult generate_hypotheses(const GenerationContext& ctx);

}  // namespace glmb::reference

namespace glmb {

/// One batched particle update: cloud `source` of the predicted pool updated
/// with the measurements in `signature`.
struct UpdateJob {
  std::uint32_t source = 0;
  Signature signature;
};

/// Runs all jobs; job n draws its resampling uniform from
/// (step, resample, n). Parallel over jobs.
std::vector<LabeledTrack> run_update_jobs(std::span<const UpdateJob> jobs, std::span<const LabeledTrack> pool,
                                          const MeasurementSet& measurements, const TrackerConfig& config);

namespace reference {
std::vector<LabeledTrack> run_update_jobs(std::span<const UpdateJob> jobs, std::span<const LabeledTrack> pool,
                                          const MeasurementSet& measurements, const TrackerConfig& config);
}  // namespace reference

}  // namespace glmb
