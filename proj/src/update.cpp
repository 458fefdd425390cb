#include "glmb/update.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "glmb/weights.hpp"

namespace glmb {

std::vector<Particle> resample_systematic(std::span<const Particle> particles, double u0, std::size_t count) {
  if (particles.empty()) return {};
  if (count == 0) count = particles.size();
  std::vector<double> logw(particles.size());
  for (std::size_t p = 0; p < particles.size(); ++p) logw[p] = particles[p].log_weight;
  const std::vector<double> w = normalize_log_weights(logw);

  std::vector<double> scaled_cdf(w.size());
  double acc = 0.0;
  for (std::size_t p = 0; p < w.size(); ++p) {
    acc += w[p];
    scaled_cdf[p] = acc * static_cast<double>(count);
  }

  std::vector<Particle> out;
  out.reserve(count);
  const double log_uniform = -std::log(static_cast<double>(count));
  std::size_t k = 0;
  for (std::size_t p = 0; p < count; ++p) {
    const double pointer = u0 + static_cast<double>(p);
    while (k + 1 < w.size() && scaled_cdf[k] <= pointer) ++k;
    Particle child = particles[k];
    child.log_weight = log_uniform;
    out.push_back(child);
  }
  return out;
}

std::vector<Particle> resample_systematic(std::span<const Particle> particles, double u0) {
  return resample_systematic(particles, u0, particles.size());
}

std::vector<Particle> resample_systematic(std::span<const Particle> particles, const RngStream& stream) {
  return resample_systematic(particles, stream.uniform_at(0), particles.size());
}

LabeledTrack update_particles(const LabeledTrack& track, std::span<const Point2> assigned, Signature signature,
                              const TrackerConfig& config, const RngStream& resample_stream) {
  LabeledTrack out;
  out.label = track.label;
  out.signature = std::move(signature);
  if (assigned.empty()) {
    out.particles = track.particles;
    return out;
  }

  const double var = config.meas_sigma * config.meas_sigma;
  const double inv2var = 0.5 / var;
  const double log_norm = -std::log(2.0 * std::numbers::pi * var) * static_cast<double>(assigned.size());
  std::vector<double> logw(track.particles.size());
  double best_loglik = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < track.particles.size(); ++p) {
    const Particle& part = track.particles[p];
    double ll = log_norm;
    for (const Point2& z : assigned) {
      const double dx = z.x - part.px;
      const double dy = z.y - part.py;
      ll -= (dx * dx + dy * dy) * inv2var;
    }
    best_loglik = std::max(best_loglik, ll);
    logw[p] = part.log_weight + ll;
  }

  out.particles = track.particles;
  // Every particle's likelihood underflows in linear arithmetic: the
  // measurements carry no usable information about this cloud.
  const double hi = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(hi) || best_loglik < std::log(std::numeric_limits<double>::min())) {
    const double uniform = -std::log(static_cast<double>(out.particles.size()));
    for (Particle& p : out.particles) p.log_weight = uniform;
    out.weight_fallback = true;
    return out;
  }
  normalize_log_weights_inplace(logw);

  double sq = 0.0;
  for (std::size_t p = 0; p < logw.size(); ++p) {
    out.particles[p].log_weight = logw[p];
    const double w = std::exp(logw[p]);
    sq += w * w;
  }
  const double ess = 1.0 / sq;
  if (ess < 0.5 * static_cast<double>(out.particles.size())) {
    out.particles = resample_systematic(out.particles, resample_stream);
  }
  return out;
}

std::vector<Hypothesis> prune(std::vector<Hypothesis> hypotheses, double tau, std::size_t h_max) {
  if (hypotheses.empty()) return hypotheses;
  std::sort(hypotheses.begin(), hypotheses.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.id < b.id;
  });
  std::size_t keep = 1;
  while (keep < hypotheses.size() && keep < h_max && hypotheses[keep].weight >= tau) ++keep;
  hypotheses.resize(std::min(keep, std::max<std::size_t>(h_max, 1)));

  double total = 0.0;
  for (const Hypothesis& h : hypotheses) total += h.weight;
  if (!(total > 0.0)) throw DegenerateWeightsError("prune: surviving hypotheses carry no weight");
  for (Hypothesis& h : hypotheses) h.weight /= total;
  return hypotheses;
}

KinematicState mean_state(const LabeledTrack& track) {
  KinematicState m{};
  double wsum = 0.0;
  double s = 0.0;
  double c = 0.0;
  for (const Particle& p : track.particles) {
    const double w = std::exp(p.log_weight);
    wsum += w;
    m.px += w * p.px;
    m.py += w * p.py;
    m.v += w * p.v;
    m.omega += w * p.omega;
    s += w * std::sin(p.phi);
    c += w * std::cos(p.phi);
  }
  if (wsum > 0.0) {
    m.px /= wsum;
    m.py /= wsum;
    m.v /= wsum;
    m.omega /= wsum;
  }
  m.phi = std::atan2(s, c);
  return m;
}

Estimate extract_estimate(const GlmbPosterior& posterior) {
  Estimate est;
  if (posterior.hypotheses.empty()) return est;
  const Hypothesis* best = &posterior.hypotheses.front();
  for (const Hypothesis& h : posterior.hypotheses) {
    if (h.weight > best->weight || (h.weight == best->weight && h.id < best->id)) best = &h;
  }
  for (std::size_t k = 0; k < best->tracks.size(); ++k) {
    const LabeledTrack& track = posterior.track_pool.at(best->tracks[k]);
    TrackEstimate te;
    te.label = best->labels[k];
    te.state = mean_state(track);
    te.position = {te.state.px, te.state.py};
    est.tracks.push_back(te);
  }
  return est;
}

}  // namespace glmb
