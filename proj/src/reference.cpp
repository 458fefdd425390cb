#include "glmb/reference.hpp"

#include <cmath>
#include <map>
#include <utility>

#include "glmb/dynamics.hpp"
#include "glmb/update.hpp"

namespace glmb::reference {

GlmbPosterior predict(const GlmbPosterior& posterior, const TrackerConfig& config) {
  GlmbPosterior out = posterior;
  out.step = posterior.step + 1;
  for (std::size_t slot = 0; slot < out.track_pool.size(); ++slot) {
    out.track_pool[slot] = predict_track(posterior.track_pool[slot], config, out.step, slot);
  }
  return out;
}

CompatibilityMatrix build_compatibility(const MeasurementSet& measurements, std::span<const LabeledTrack> tracks,
                                        const TrackerConfig& config) {
  CompatibilityMatrix c;
  c.m = measurements.size();
  c.t = tracks.size();
  c.kappa = config.clutter_kappa;
  c.entries.assign(c.m * c.cols(), 0.0);
  c.gate_mask.assign(c.m * c.t, 0);
  for (std::size_t j = 0; j < tracks.size(); ++j) {
    c.track_slots.push_back(static_cast<std::uint32_t>(j));
    c.track_labels.push_back(tracks[j].label);
  }
  for (std::size_t i = 0; i < c.m; ++i) {
    const Point2& z = measurements.detections[i];
    c.at(i, 0) = c.kappa;
    for (std::size_t j = 1; j <= c.t; ++j) {
      const bool inside = gate(z, tracks[j - 1], config);
      c.gate_mask[i * c.t + (j - 1)] = inside ? 1 : 0;
      c.at(i, j) = inside ? config.p_detect * measurement_likelihood(z, tracks[j - 1], config) : 0.0;
    }
  }
  return c;
}

GenerationResult generate_hypotheses(const GenerationContext& ctx) {
  GenerationResult result;
  const auto& parents = ctx.predicted->hypotheses;
  for (std::size_t h = 0; h < parents.size(); ++h) {
    const Hypothesis& parent = parents[h];
    ParentView view = make_parent_view(parent, *ctx.compat, ctx.birth_columns);
    const CompatibilityMatrix local = restrict_columns(*ctx.compat, view.columns);
    std::vector<double> death, priors;
    for (std::uint32_t col : view.columns) {
      death.push_back(ctx.death_probs[col - 1]);
      priors.push_back(ctx.survival_priors[col - 1]);
    }

    using Key = std::pair<std::vector<std::uint8_t>, std::vector<std::uint32_t>>;
    std::map<Key, bool> seen;
    for (std::size_t s = 0; s < ctx.h_up; ++s) {
      std::vector<std::uint8_t> alive =
          sample_survival(death, survival_stream(ctx.config->seed, ctx.predicted->step, parent.id, s));
      const CompatibilityMatrix pruned = zero_dead_columns(local, alive);
      std::vector<std::uint32_t> assoc =
          sample_associations(pruned, association_stream(ctx.config->seed, ctx.predicted->step, parent.id, s));
      Key key{alive, assoc};
      if (!seen.emplace(key, true).second) continue;
      Candidate c;
      c.parent = static_cast<std::uint32_t>(h);
      c.survival = std::move(key.first);
      c.assoc = std::move(key.second);
      c.log_weight = log_hypothesis_weight(std::log(parent.weight), c.survival, c.assoc, local, priors, *ctx.config);
      result.candidates.push_back(std::move(c));
    }
    result.views.push_back(std::move(view));
  }
  result.samples_drawn = parents.size() * ctx.h_up;
  return result;
}

std::vector<LabeledTrack> run_update_jobs(std::span<const UpdateJob> jobs, std::span<const LabeledTrack> pool,
                                          const MeasurementSet& measurements, const TrackerConfig& config) {
  std::vector<LabeledTrack> out;
  out.reserve(jobs.size());
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    std::vector<Point2> assigned;
    for (std::uint32_t i : jobs[k].signature) assigned.push_back(measurements.detections[i]);
    const RngStream stream(config.seed, {measurements.step, Domain::resample, k, 0});
    out.push_back(update_particles(pool[jobs[k].source], assigned, jobs[k].signature, config, stream));
  }
  return out;
}

}  // namespace glmb::reference
