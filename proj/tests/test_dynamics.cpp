#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "glmb/dynamics.hpp"
#include "glmb/likelihood.hpp"

using namespace glmb;

namespace {

constexpr double kPi = std::numbers::pi;

void expect_state_near(const KinematicState& a, const KinematicState& b, double tol) {
  EXPECT_NEAR(a.px, b.px, tol);
  EXPECT_NEAR(a.py, b.py, tol);
  EXPECT_NEAR(a.v, b.v, tol);
  EXPECT_NEAR(a.phi, b.phi, tol);
  EXPECT_NEAR(a.omega, b.omega, tol);
}

CompatibilityMatrix clutter_only(std::size_t m, double kappa) {
  CompatibilityMatrix c;
  c.m = m;
  c.kappa = kappa;
  c.entries.assign(m, kappa);
  return c;
}

}  // namespace

TEST(WrapAngle, HalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_NEAR(wrap_angle(-kPi), kPi, 1e-15);
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(2 * kPi + 0.5), 0.5, 1e-12);
  EXPECT_NEAR(wrap_angle(-2 * kPi - 0.5), -0.5, 1e-12);
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(w - a, 2 * kPi), 0.0, 1e-12);
  }
}

TEST(CtrvStep, AtRestIsIdentity) {
  const KinematicState s{};
  EXPECT_EQ(ctrv_step(s, 0.1), s);
}

TEST(CtrvStep, StraightLine) {
  expect_state_near(ctrv_step({0, 0, 1, 0, 0}, 0.1), {0.1, 0, 1, 0, 0}, 1e-15);
}

TEST(CtrvStep, HalfCircle) {
  const KinematicState s = ctrv_step({0, 0, 1, 0, kPi}, 1.0);
  expect_state_near(s, {0, 2 / kPi, 1, kPi, kPi}, 1e-12);
  EXPECT_NEAR(s.py, 0.6366, 1e-4);
}

TEST(CtrvStep, BranchesAgreeNearThreshold) {
  for (double omega : {1e-7, -1e-7, 1e-5, -1e-5}) {
    const KinematicState s{3.0, -2.0, 12.0, 0.8, omega};
    const KinematicState turn = detail::ctrv_turning(s, 0.1);
    const KinematicState line = detail::ctrv_straight(s, 0.1);
    EXPECT_NEAR(turn.px, line.px, 1e-6) << omega;
    EXPECT_NEAR(turn.py, line.py, 1e-6) << omega;
    EXPECT_NEAR(turn.phi, line.phi, 1e-12);
  }
}

TEST(CtrvStep, PreservesSpeedAndAdvancesHeading) {
  for (double omega : {-3.0, -0.2, 0.0, 0.4, 2.5}) {
    for (double phi : {-3.0, 0.0, 1.2, 3.1}) {
      const KinematicState s = ctrv_step({1, 2, 7.5, phi, omega}, 0.1);
      EXPECT_DOUBLE_EQ(s.v, 7.5);
      EXPECT_DOUBLE_EQ(s.omega, omega);
      EXPECT_NEAR(std::remainder(s.phi - (phi + omega * 0.1), 2 * kPi), 0.0, 1e-12);
    }
  }
}

TEST(CtrvStep, NoiseAppliedAfterTransition) {
  const ProcessNoise n{0.1, -0.2, -5.0, 0.3};
  const KinematicState s = ctrv_step({0, 0, 1, 0, 0}, 0.1, n);
  EXPECT_NEAR(s.px, 0.2, 1e-15);
  EXPECT_NEAR(s.py, -0.2, 1e-15);
  EXPECT_EQ(s.v, 0.0);  // clamped
  EXPECT_NEAR(s.omega, 0.3, 1e-15);
  EXPECT_EQ(s.phi, 0.0);  // heading only moves through omega
}

TEST(Predict, EmptyPosterior) {
  const GlmbPosterior p = GlmbPosterior::initial();
  const GlmbPosterior q = predict(p, TrackerConfig{});
  EXPECT_EQ(q.step, 0);
  EXPECT_EQ(q.hypotheses, p.hypotheses);
  EXPECT_TRUE(q.track_pool.empty());
}

TEST(Predict, NoiseFreePropagation) {
  TrackerConfig cfg;
  cfg.sigma_pos = cfg.sigma_v = cfg.sigma_omega = 0.0;
  GlmbPosterior p;
  p.step = 4;
  p.track_pool.push_back(fixture::point_cloud(1.0, 2.0, 64, {0, 0}, 3.0, 0.7));
  for (auto& part : p.track_pool[0].particles) part.omega = 0.4;
  p.track_pool[0].signature = {1, 2};
  Hypothesis h;
  h.id = 3;
  h.weight = 1.0;
  h.labels = {Label{0, 0}};
  h.tracks = {0};
  p.hypotheses = {h};
  const GlmbPosterior q = predict(p, cfg);
  const KinematicState expected = ctrv_step({1.0, 2.0, 3.0, 0.7, 0.4}, cfg.dt);
  EXPECT_EQ(q.step, 5);
  EXPECT_EQ(q.hypotheses, p.hypotheses);
  EXPECT_TRUE(q.track_pool[0].signature.empty());
  for (const auto& part : q.track_pool[0].particles) {
    EXPECT_EQ(part.state(), expected);
    EXPECT_EQ(part.log_weight, p.track_pool[0].particles[0].log_weight);
  }
}

TEST(Predict, MeanDisplacementMatchesMotion) {
  TrackerConfig cfg;
  const std::size_t n = 10000;
  const double v = 4.0, phi = 0.6;
  GlmbPosterior p;
  p.track_pool.push_back(fixture::point_cloud(0.0, 0.0, n, {0, 0}, v, phi));
  const GlmbPosterior q = predict(p, cfg);
  double mx = 0, my = 0;
  for (const auto& part : q.track_pool[0].particles) {
    mx += part.px / n;
    my += part.py / n;
  }
  const double tol = 3 * cfg.sigma_pos / std::sqrt(double(n));
  EXPECT_NEAR(mx, v * cfg.dt * std::cos(phi), tol);
  EXPECT_NEAR(my, v * cfg.dt * std::sin(phi), tol);
}

TEST(Predict, KeepsStructureAndMatchesPerTrackKernel) {
  TrackerConfig cfg;
  GlmbPosterior p;
  p.step = 9;
  for (int t = 0; t < 3; ++t) p.track_pool.push_back(fixture::point_cloud(t, -t, 50 + t, {0, t}, 2.0, 0.1 * t));
  Hypothesis h;
  h.id = 1;
  h.weight = 0.4;
  h.labels = {Label{0, 0}, Label{0, 2}};
  h.tracks = {0, 2};
  Hypothesis g = h;
  g.id = 2;
  g.weight = 0.6;
  g.labels = {Label{0, 1}};
  g.tracks = {1};
  p.hypotheses = {h, g};
  const GlmbPosterior q = predict(p, cfg);
  EXPECT_EQ(q.hypotheses, p.hypotheses);
  ASSERT_EQ(q.track_pool.size(), 3u);
  for (std::size_t s = 0; s < 3; ++s) {
    EXPECT_EQ(q.track_pool[s], predict_track(p.track_pool[s], cfg, 10, s));
  }
}

TEST(SpawnBirths, NoMeasurementsNoBirths) {
  LabelIssuer labels;
  const MeasurementSet z{0, {}};
  EXPECT_TRUE(spawn_births(z, clutter_only(0, 1e-4), TrackerConfig{}, labels).empty());
}

TEST(SpawnBirths, ColdStartAnchorsAtMeasurement) {
  TrackerConfig cfg;
  LabelIssuer labels;
  const MeasurementSet z{3, {{12.0, -4.0}}};
  const auto births = spawn_births(z, clutter_only(1, 1e-4), cfg, labels);
  ASSERT_EQ(births.size(), 1u);
  const LabeledTrack& t = births[0].track;
  EXPECT_TRUE(t.newborn);
  EXPECT_EQ(t.label, (Label{3, 0}));
  EXPECT_EQ(births[0].candidate.measurement, 0u);
  ASSERT_EQ(t.particles.size(), cfg.particles_per_track);
  const double n = static_cast<double>(t.particles.size());
  double mx = 0, my = 0, wsum = 0;
  for (const auto& p : t.particles) {
    mx += p.px / n;
    my += p.py / n;
    wsum += std::exp(p.log_weight);
    EXPECT_GE(p.v, 0.0);
    EXPECT_LE(p.v, cfg.v_max);
    EXPECT_GT(p.phi, -kPi);
    EXPECT_LE(p.phi, kPi);
  }
  EXPECT_NEAR(wsum, 1.0, 1e-9);
  EXPECT_NEAR(mx, 12.0, 3 * cfg.birth_pos_sigma / std::sqrt(n));
  EXPECT_NEAR(my, -4.0, 3 * cfg.birth_pos_sigma / std::sqrt(n));
}

TEST(SpawnBirths, WellExplainedMeasurementDoesNotSeed) {
  TrackerConfig cfg;
  cfg.birth_seed_threshold = 0.5;
  CompatibilityMatrix c;
  c.m = 1;
  c.t = 1;
  c.kappa = 0.01;
  c.entries = {0.01, 0.99};  // 0.99 / (0.99 + 0.01) = 0.99
  c.gate_mask = {1};
  LabelIssuer labels;
  EXPECT_TRUE(spawn_births({0, {{0, 0}}}, c, cfg, labels).empty());
  c.entries = {0.01, 0.005};  // evidence 1/3
  EXPECT_EQ(spawn_births({0, {{0, 0}}}, c, cfg, labels).size(), 1u);
}

TEST(SpawnBirths, LowestEvidenceFirstAndCapped) {
  TrackerConfig cfg;
  cfg.birth_seed_threshold = 0.9;
  cfg.birth_max_per_step = 2;
  cfg.particles_per_track = 8;
  CompatibilityMatrix c;
  c.m = 4;
  c.t = 1;
  c.kappa = 1.0;
  c.entries = {1, 0.5, 1, 0.0, 1, 2.0, 1, 100.0};  // evidence 1/3, 0, 2/3, 0.99
  c.gate_mask = {1, 0, 1, 1};
  LabelIssuer labels;
  labels.issue(0);
  const MeasurementSet z{2, {{0, 0}, {1, 0}, {2, 0}, {3, 0}}};
  const auto births = spawn_births(z, c, cfg, labels);
  ASSERT_EQ(births.size(), 2u);
  EXPECT_EQ(births[0].candidate.measurement, 1u);
  EXPECT_EQ(births[1].candidate.measurement, 0u);
  EXPECT_LT((Label{0, 0}), births[0].track.label);
  EXPECT_LT(births[0].track.label, births[1].track.label);
}

TEST(SpawnBirths, Deterministic) {
  TrackerConfig cfg;
  LabelIssuer a, b;
  const MeasurementSet z{1, {{1, 1}, {5, 5}}};
  EXPECT_EQ(spawn_births(z, clutter_only(2, 1e-4), cfg, a)[1].track,
            spawn_births(z, clutter_only(2, 1e-4), cfg, b)[1].track);
}
