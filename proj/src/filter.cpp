#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "glmb/dynamics.hpp"
#include "glmb/reference.hpp"
#include "glmb/sampler.hpp"
#include "glmb/update.hpp"
#include "glmb/weights.hpp"

namespace glmb {

std::vector<LabeledTrack> run_update_jobs(std::span<const UpdateJob> jobs, std::span<const LabeledTrack> pool,
                                          const MeasurementSet& measurements, const TrackerConfig& config) {
  std::vector<LabeledTrack> out(jobs.size());
  const auto n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < n; ++k) {
    const UpdateJob& job = jobs[k];
    std::vector<Point2> assigned;
    assigned.reserve(job.signature.size());
    for (std::uint32_t i : job.signature) assigned.push_back(measurements.detections[i]);
    const RngStream stream(config.seed, {measurements.step, Domain::resample, static_cast<std::uint64_t>(k), 0});
    out[k] = update_particles(pool[job.source], assigned, job.signature, config, stream);
  }
  return out;
}

namespace {

struct PoolKey {
  std::uint32_t source;
  Signature signature;
  bool operator<(const PoolKey& o) const {
    if (source != o.source) return source < o.source;
    return signature < o.signature;
  }
};

}  // namespace

StepResult filter_step(const GlmbPosterior& posterior, const MeasurementSet& measurements,
                       const TrackerConfig& config, Backend backend) {
  if (measurements.step != posterior.step + 1) {
    throw ContractViolation("measurement step " + std::to_string(measurements.step) +
                            " does not follow posterior step " + std::to_string(posterior.step));
  }
  const auto t0 = std::chrono::steady_clock::now();
  const bool ref = backend == Backend::reference;

  StepResult result;
  StepDiagnostics& diag = result.diagnostics;

  GlmbPosterior predicted = ref ? reference::predict(posterior, config) : predict(posterior, config);
  if (predicted.hypotheses.empty()) {
    Hypothesis empty;
    empty.id = predicted.next_hypothesis_id++;
    empty.weight = 1.0;
    predicted.hypotheses.push_back(std::move(empty));
  }

  // Compatibility over the union of predicted clouds, then births.
  CompatibilityMatrix compat = ref ? reference::build_compatibility(measurements, predicted.track_pool, config)
                                   : build_compatibility(measurements, predicted.track_pool, config, 0);
  std::vector<Birth> births = spawn_births(measurements, compat, config, predicted.labels);
  const auto n_predicted = static_cast<std::uint32_t>(predicted.track_pool.size());
  std::vector<std::uint32_t> birth_columns;
  {
    std::vector<LabeledTrack> born;
    born.reserve(births.size());
    for (Birth& b : births) born.push_back(std::move(b.track));
    if (ref) {
      std::vector<LabeledTrack> all = predicted.track_pool;
      all.insert(all.end(), born.begin(), born.end());
      compat = reference::build_compatibility(measurements, all, config);
    } else {
      append_columns(compat, measurements, born, config, n_predicted);
    }
    for (std::size_t b = 0; b < born.size(); ++b) {
      birth_columns.push_back(n_predicted + static_cast<std::uint32_t>(b) + 1);
      predicted.track_pool.push_back(std::move(born[b]));
    }
  }
  diag.births = births.size();

  diag.survival_priors.resize(compat.t);
  diag.death_probs.resize(compat.t);
  for (std::size_t j = 1; j <= compat.t; ++j) {
    const LabeledTrack& track = predicted.track_pool[compat.track_slots[j - 1]];
    const double prior = track.newborn ? config.r_birth : config.p_survival;
    diag.survival_priors[j - 1] = prior;
    diag.death_probs[j - 1] = death_probability(j, compat, prior, config);
  }

  GenerationContext ctx;
  ctx.predicted = &predicted;
  ctx.compat = &compat;
  ctx.death_probs = diag.death_probs;
  ctx.survival_priors = diag.survival_priors;
  ctx.birth_columns = birth_columns;
  ctx.h_up = config.h_up;
  ctx.config = &config;
  GenerationResult gen = ref ? reference::generate_hypotheses(ctx) : generate_hypotheses(ctx);
  diag.candidates = gen.candidates.size();
  diag.samples = gen.samples_drawn;

  // Normalize the target measure over all successors of all parents.
  std::vector<double> logw(gen.candidates.size());
  for (std::size_t c = 0; c < gen.candidates.size(); ++c) logw[c] = gen.candidates[c].log_weight;
  const std::vector<double> weights = normalize_log_weights(logw);

  const std::uint64_t first_id = predicted.next_hypothesis_id;
  std::vector<Hypothesis> successors(gen.candidates.size());
  for (std::size_t c = 0; c < gen.candidates.size(); ++c) {
    successors[c].id = first_id + c;
    successors[c].parent_id = predicted.hypotheses[gen.candidates[c].parent].id;
    successors[c].weight = weights[c];
  }
  successors = prune(std::move(successors), config.prune_tau, config.h_max);

  // Materialize the survivors and collect unique (cloud, signature) updates.
  std::map<PoolKey, std::uint32_t> pool_index;
  std::vector<UpdateJob> jobs;
  for (Hypothesis& h : successors) {
    const Candidate& cand = gen.candidates[h.id - first_id];
    const ParentView& view = gen.views[cand.parent];
    std::vector<Signature> sigs(view.columns.size());
    for (std::size_t i = 0; i < cand.assoc.size(); ++i) {
      if (cand.assoc[i] > 0) sigs[cand.assoc[i] - 1].push_back(static_cast<std::uint32_t>(i));
    }
    h.assoc_map.resize(cand.assoc.size());
    for (std::size_t i = 0; i < cand.assoc.size(); ++i) {
      if (cand.assoc[i] > 0) h.assoc_map[i] = compat.track_labels[view.columns[cand.assoc[i] - 1] - 1];
    }
    for (std::size_t k = 0; k < view.columns.size(); ++k) {
      if (!cand.survival[k]) continue;
      const std::uint32_t column = view.columns[k];
      PoolKey key{compat.track_slots[column - 1], std::move(sigs[k])};
      auto [it, inserted] = pool_index.try_emplace(key, static_cast<std::uint32_t>(jobs.size()));
      if (inserted) jobs.push_back({key.source, key.signature});
      h.labels.push_back(compat.track_labels[column - 1]);
      h.tracks.push_back(it->second);
    }
  }

  GlmbPosterior next;
  next.step = predicted.step;
  next.labels = predicted.labels;
  next.next_hypothesis_id = first_id + gen.candidates.size();
  next.track_pool = ref ? reference::run_update_jobs(jobs, predicted.track_pool, measurements, config)
                        : run_update_jobs(jobs, predicted.track_pool, measurements, config);
  for (const LabeledTrack& t : next.track_pool) diag.weight_fallbacks += t.weight_fallback ? 1 : 0;
  next.hypotheses = std::move(successors);

  result.estimate = extract_estimate(next);
  result.posterior = std::move(next);
  diag.compat = std::move(compat);
  result.timing.update_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

Tracker::Tracker(TrackerConfig config, Backend backend)
    : config_(config), backend_(backend), posterior_(GlmbPosterior::initial()) {
  config_.validate();
}

const StepResult& Tracker::step(const MeasurementSet& measurements) {
  last_ = filter_step(posterior_, measurements, config_, backend_);
  posterior_ = last_.posterior;
  return last_;
}

std::string check_posterior(const GlmbPosterior& posterior, std::size_t h_max) {
  std::ostringstream err;
  double total = 0.0;
  for (const Hypothesis& h : posterior.hypotheses) total += h.weight;
  if (!posterior.hypotheses.empty() && std::abs(total - 1.0) > 1e-9) err << "weights sum to " << total << "; ";
  if (posterior.hypotheses.size() > h_max) err << posterior.hypotheses.size() << " hypotheses > h_max; ";
  for (const Hypothesis& h : posterior.hypotheses) {
    if (h.tracks.size() != h.labels.size()) err << "hypothesis " << h.id << " track/label mismatch; ";
    for (std::size_t k = 1; k < h.labels.size(); ++k) {
      if (!(h.labels[k - 1] < h.labels[k])) err << "hypothesis " << h.id << " labels not unique; ";
    }
    for (std::size_t k = 0; k < h.tracks.size() && k < h.labels.size(); ++k) {
      if (h.tracks[k] >= posterior.track_pool.size()) {
        err << "hypothesis " << h.id << " references missing pool slot; ";
        continue;
      }
      const LabeledTrack& t = posterior.track_pool[h.tracks[k]];
      if (t.label != h.labels[k]) err << "hypothesis " << h.id << " pool label mismatch; ";
      Signature expected;
      for (std::size_t i = 0; i < h.assoc_map.size(); ++i) {
        if (h.assoc_map[i] && *h.assoc_map[i] == h.labels[k]) expected.push_back(static_cast<std::uint32_t>(i));
      }
      if (t.signature != expected) err << "hypothesis " << h.id << " signature mismatch; ";
    }
    for (const auto& target : h.assoc_map) {
      if (target && !std::binary_search(h.labels.begin(), h.labels.end(), *target)) {
        err << "hypothesis " << h.id << " assigns a measurement to dead track " << to_string(*target) << "; ";
      }
    }
  }
  return err.str();
}

}  // namespace glmb
