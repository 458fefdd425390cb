#include "glmb/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace glmb {

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w <= 0.0) w += two_pi;
  return w - std::numbers::pi;
}

namespace detail {

KinematicState ctrv_turning(const KinematicState& s, double dt) {
  const double r = s.v / s.omega;
  const double phi_next = s.phi + s.omega * dt;
  KinematicState out = s;
  out.px = s.px + r * (std::sin(phi_next) - std::sin(s.phi));
  out.py = s.py + r * (std::cos(s.phi) - std::cos(phi_next));
  out.phi = wrap_angle(phi_next);
  return out;
}

KinematicState ctrv_straight(const KinematicState& s, double dt) {
  KinematicState out = s;
  out.px = s.px + s.v * dt * std::cos(s.phi);
  out.py = s.py + s.v * dt * std::sin(s.phi);
  out.phi = wrap_angle(s.phi + s.omega * dt);
  return out;
}

}  // namespace detail

KinematicState ctrv_step(const KinematicState& state, double dt, const std::optional<ProcessNoise>& noise) {
  KinematicState out = std::abs(state.omega) > kStraightLineOmega ? detail::ctrv_turning(state, dt)
                                                                  : detail::ctrv_straight(state, dt);
  if (noise) {
    out.px += noise->px;
    out.py += noise->py;
    out.v = std::max(0.0, out.v + noise->v);
    out.omega += noise->omega;
  }
  return out;
}

ProcessNoise draw_process_noise(const TrackerConfig& config, std::int64_t step, std::uint64_t slot,
                                std::uint64_t particle) {
  const RngStream rng(config.seed, {step, Domain::predict, slot, particle});
  return ProcessNoise{config.sigma_pos * rng.normal_at(0), config.sigma_pos * rng.normal_at(1),
                      config.sigma_v * rng.normal_at(2), config.sigma_omega * rng.normal_at(3)};
}

LabeledTrack predict_track(const LabeledTrack& track, const TrackerConfig& config, std::int64_t step,
                           std::uint64_t slot) {
  LabeledTrack out;
  out.label = track.label;
  out.particles.resize(track.particles.size());
  const auto n = static_cast<std::int64_t>(track.particles.size());
  for (std::int64_t p = 0; p < n; ++p) {
    const Particle& in = track.particles[p];
    Particle& next = out.particles[p];
    next.set_state(ctrv_step(in.state(), config.dt, draw_process_noise(config, step, slot, p)));
    next.log_weight = in.log_weight;
  }
  return out;
}

GlmbPosterior predict(const GlmbPosterior& posterior, const TrackerConfig& config) {
  GlmbPosterior out;
  out.step = posterior.step + 1;
  out.hypotheses = posterior.hypotheses;
  out.labels = posterior.labels;
  out.next_hypothesis_id = posterior.next_hypothesis_id;
  out.track_pool.resize(posterior.track_pool.size());

  // Flatten (track, particle) into one index space so small pools with large
  // clouds and large pools with small clouds both spread across workers.
  std::vector<std::size_t> offsets(posterior.track_pool.size() + 1, 0);
  for (std::size_t s = 0; s < posterior.track_pool.size(); ++s) {
    const LabeledTrack& in = posterior.track_pool[s];
    out.track_pool[s].label = in.label;
    out.track_pool[s].particles.resize(in.particles.size());
    offsets[s + 1] = offsets[s] + in.particles.size();
  }
  const auto total = static_cast<std::int64_t>(offsets.back());
  const std::int64_t step = out.step;

#pragma omp parallel for schedule(static)
  for (std::int64_t flat = 0; flat < total; ++flat) {
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), static_cast<std::size_t>(flat));
    const auto slot = static_cast<std::size_t>(it - offsets.begin()) - 1;
    const std::size_t p = static_cast<std::size_t>(flat) - offsets[slot];
    const Particle& in = posterior.track_pool[slot].particles[p];
    Particle& next = out.track_pool[slot].particles[p];
    next.set_state(ctrv_step(in.state(), config.dt, draw_process_noise(config, step, slot, p)));
    next.log_weight = in.log_weight;
  }
  return out;
}

std::vector<Birth> spawn_births(const MeasurementSet& measurements, const CompatibilityMatrix& compat,
                                const TrackerConfig& config, LabelIssuer& labels) {
  if (compat.m != measurements.size()) {
    throw ContractViolation("compatibility matrix does not match the measurement set");
  }
  struct Seed {
    double evidence;
    std::uint32_t index;
  };
  std::vector<Seed> seeds;
  for (std::size_t i = 0; i < compat.m; ++i) {
    double best = 0.0;
    for (std::size_t j = 1; j <= compat.t; ++j) {
      const double c = compat.at(i, j);
      if (c > 0.0) best = std::max(best, c / (c + compat.kappa));
    }
    if (compat.t == 0 || best < config.birth_seed_threshold) {
      seeds.push_back({best, static_cast<std::uint32_t>(i)});
    }
  }
  std::stable_sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.evidence < b.evidence; });
  if (seeds.size() > config.birth_max_per_step) seeds.resize(config.birth_max_per_step);

  std::vector<Birth> births;
  births.reserve(seeds.size());
  const double uniform_weight = -std::log(static_cast<double>(config.particles_per_track));
  for (const Seed& seed : seeds) {
    Birth b;
    b.candidate.seed_point = measurements.detections[seed.index];
    b.candidate.label = labels.issue(measurements.step);
    b.candidate.r_birth = config.r_birth;
    b.candidate.measurement = seed.index;
    b.track.label = b.candidate.label;
    b.track.newborn = true;
    b.track.particles.resize(config.particles_per_track);
    for (std::size_t p = 0; p < config.particles_per_track; ++p) {
      const RngStream rng(config.seed, {measurements.step, Domain::birth,
                                        static_cast<std::uint64_t>(b.candidate.label.birth_index), p});
      Particle& part = b.track.particles[p];
      part.px = b.candidate.seed_point.x + config.birth_pos_sigma * rng.normal_at(0);
      part.py = b.candidate.seed_point.y + config.birth_pos_sigma * rng.normal_at(1);
      part.v = config.v_max * rng.uniform_at(4);
      part.phi = std::numbers::pi - 2.0 * std::numbers::pi * rng.uniform_at(5);
      part.omega = config.omega_sigma * rng.normal_at(3);
      part.log_weight = uniform_weight;
    }
    births.push_back(std::move(b));
  }
  return births;
}

}  // namespace glmb
