#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <omp.h>

#include "crosschecks.hpp"
#include "fixtures.hpp"
#include "glmb/dynamics.hpp"
#include "glmb/reference.hpp"
#include "glmb/update.hpp"
#include "glmb/weights.hpp"
#include "oracles.hpp"

using namespace glmb;

namespace {

Hypothesis hyp(std::uint64_t id, double w, std::vector<Label> labels = {}, std::vector<std::uint32_t> tracks = {}) {
  Hypothesis h;
  h.id = id;
  h.weight = w;
  h.labels = std::move(labels);
  h.tracks = std::move(tracks);
  return h;
}

std::vector<double> weights_of(const LabeledTrack& t) {
  std::vector<double> w;
  for (const auto& p : t.particles) w.push_back(fixture::weight_of(p));
  return w;
}

MeasurementSet detections_around(std::int32_t step, Point2 c, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed + step);
  std::normal_distribution<double> n(0.0, 0.25);
  MeasurementSet z{step, {}};
  for (std::size_t k = 0; k < d; ++k) z.detections.push_back({c.x + n(gen), c.y + n(gen)});
  return z;
}

}  // namespace

TEST(UpdateParticles, EmptyAssignmentIsIdentity) {
  const auto t = fixture::weighted_cloud({{0, 0}, {1, 0}}, {0.25, 0.75});
  const LabeledTrack u = update_particles(t, {}, {}, TrackerConfig{}, RngStream(1, {}));
  EXPECT_EQ(u.particles, t.particles);
  EXPECT_TRUE(u.signature.empty());
}

TEST(UpdateParticles, BayesReweight) {
  TrackerConfig cfg;
  cfg.meas_sigma = 1.0;
  const auto t = fixture::weighted_cloud({{0, 0}, {1, 0}}, {0.5, 0.5});
  const std::vector<Point2> one{{0, 0}};
  const LabeledTrack u = update_particles(t, one, {4}, cfg, RngStream(1, {}));
  const auto w = weights_of(u);
  EXPECT_NEAR(w[0], 0.62246, 1e-5);
  EXPECT_NEAR(w[1], 0.37754, 1e-5);
  EXPECT_EQ(u.signature, (Signature{4}));

  const std::vector<Point2> two{{0, 0}, {0, 0}};
  const auto w2 = weights_of(update_particles(t, two, {0, 1}, cfg, RngStream(1, {})));
  EXPECT_NEAR(w2[0], 0.73106, 1e-5);
  EXPECT_NEAR(w2[1], 0.26894, 1e-5);
}

TEST(UpdateParticles, ResamplesWhenDegenerate) {
  TrackerConfig cfg;
  std::vector<Point2> pts;
  for (int p = 0; p < 100; ++p) pts.push_back({p * 0.1, 0});
  const auto t = fixture::weighted_cloud(pts, std::vector<double>(100, 0.01));
  const std::vector<Point2> z{{5.0, 0}};
  const LabeledTrack u = update_particles(t, z, {0}, cfg, RngStream(2, {}));
  ASSERT_EQ(u.particles.size(), 100u);
  for (const auto& p : u.particles) {
    EXPECT_NEAR(p.log_weight, -std::log(100.0), 1e-12);
    EXPECT_NEAR(p.px, 5.0, 1.0);
  }
  EXPECT_FALSE(u.weight_fallback);
}

TEST(UpdateParticles, CollapsedWeightsFallBackToUniform) {
  TrackerConfig cfg;
  cfg.meas_sigma = 1e-3;
  const auto t = fixture::weighted_cloud({{0, 0}, {1, 0}}, {0.5, 0.5});
  const std::vector<Point2> z{{1e6, 1e6}};
  const LabeledTrack u = update_particles(t, z, {0}, cfg, RngStream(1, {}));
  EXPECT_TRUE(u.weight_fallback);
  for (double w : weights_of(u)) EXPECT_NEAR(w, 0.5, 1e-12);
}

TEST(ResampleSystematic, UniformWeightsCopyOnce) {
  const auto t = fixture::weighted_cloud({{0, 0}, {1, 0}, {2, 0}, {3, 0}}, {0.25, 0.25, 0.25, 0.25});
  for (double u0 : {0.0, 0.3, 0.999}) {
    const auto out = resample_systematic(t.particles, u0);
    ASSERT_EQ(out.size(), 4u);
    for (int p = 0; p < 4; ++p) EXPECT_EQ(out[p].px, p);
  }
}

TEST(ResampleSystematic, PointMass) {
  const auto t = fixture::weighted_cloud({{0, 0}, {1, 0}, {2, 0}, {3, 0}}, {1.0, 1e-300, 1e-300, 1e-300});
  for (const auto& p : resample_systematic(t.particles, 0.7)) {
    EXPECT_EQ(p.px, 0.0);
    EXPECT_NEAR(p.log_weight, -std::log(4.0), 1e-15);
  }
}

TEST(ResampleSystematic, OffspringCountsFloorOrCeil) {
  const auto r = crosscheck::resampling_offspring_check(17);
  EXPECT_EQ(r.violations, 0u) << "of " << r.draws;
  EXPECT_LT(r.worst_mean_error, 1e-12);
}

TEST(ResampleSystematic, PreservesWeightedMeanInExpectation) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point2> pts;
  std::vector<double> w;
  double total = 0.0;
  for (int p = 0; p < 50; ++p) {
    pts.push_back({10 * u(gen), 0});
    w.push_back(u(gen) * u(gen));
    total += w.back();
  }
  double target = 0.0;
  for (int p = 0; p < 50; ++p) target += pts[p].x * w[p] / total;
  const auto cloud = fixture::weighted_cloud(pts, w);
  const int trials = 10000;
  double s = 0, ss = 0;
  for (int k = 0; k < trials; ++k) {
    double m = 0;
    for (const auto& p : resample_systematic(cloud.particles, u(gen))) m += p.px / 50;
    s += m;
    ss += m * m;
  }
  const double mean = s / trials;
  const double se = std::sqrt((ss / trials - mean * mean) / trials);
  EXPECT_NEAR(mean, target, 3 * se + 1e-12);
}

TEST(Prune, Examples) {
  auto out = prune({hyp(1, 0.6), hyp(2, 0.3), hyp(3, 0.05), hyp(4, 0.05)}, 0.1, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].id, 1u);
  EXPECT_NEAR(out[0].weight, 2.0 / 3, 1e-12);
  EXPECT_NEAR(out[1].weight, 1.0 / 3, 1e-12);

  const std::vector<Hypothesis> keep{hyp(1, 0.5), hyp(2, 0.3), hyp(3, 0.2)};
  EXPECT_EQ(prune(keep, 0.1, 5), keep);

  const std::vector<Hypothesis> single{hyp(9, 1.0)};
  EXPECT_EQ(prune(single, 0.5, 3), single);
}

TEST(Prune, HeaviestSurvivesAnyThreshold) {
  const auto out = prune({hyp(1, 0.4), hyp(2, 0.35), hyp(3, 0.25)}, 0.9, 10);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].id, 1u);
  EXPECT_DOUBLE_EQ(out[0].weight, 1.0);
}

TEST(Prune, TiesBrokenBySmallerId) {
  const auto out = prune({hyp(7, 0.25), hyp(3, 0.25), hyp(5, 0.25), hyp(4, 0.25)}, 0.0001, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].id, 3u);
  EXPECT_EQ(out[1].id, 4u);
}

TEST(Prune, Idempotent) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Hypothesis> hs;
    std::vector<double> w;
    for (int k = 0; k < 30; ++k) w.push_back(std::pow(u(gen), 4));
    const auto p = normalize_weights(w);
    for (int k = 0; k < 30; ++k) hs.push_back(hyp(k, p[k]));
    const auto once = prune(hs, 0.01, 8);
    const auto twice = prune(once, 0.01, 8);
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t k = 0; k < once.size(); ++k) {
      EXPECT_EQ(once[k].id, twice[k].id);
      EXPECT_NEAR(once[k].weight, twice[k].weight, 1e-15);
    }
  }
}

TEST(ExtractEstimate, WeightedMean) {
  GlmbPosterior p;
  p.track_pool.push_back(fixture::weighted_cloud({{0, 0}, {2, 0}}, {0.5, 0.5}));
  p.hypotheses = {hyp(1, 1.0, {Label{0, 0}}, {0})};
  const Estimate e = extract_estimate(p);
  ASSERT_EQ(e.cardinality(), 1u);
  EXPECT_NEAR(e.tracks[0].position.x, 1.0, 1e-12);
  EXPECT_NEAR(e.tracks[0].position.y, 0.0, 1e-12);
}

TEST(ExtractEstimate, EmptyHypothesis) {
  EXPECT_EQ(extract_estimate(GlmbPosterior::initial()).cardinality(), 0u);
}

TEST(ExtractEstimate, ArgmaxHypothesis) {
  GlmbPosterior p;
  for (int t = 0; t < 3; ++t) p.track_pool.push_back(fixture::point_cloud(t, 0, 1, {0, t}));
  p.hypotheses = {hyp(1, 0.3, {Label{0, 0}, Label{0, 1}, Label{0, 2}}, {0, 1, 2}),
                  hyp(2, 0.7, {Label{0, 0}, Label{0, 1}}, {0, 1})};
  EXPECT_EQ(extract_estimate(p).cardinality(), 2u);
}

TEST(MeanState, CircularHeading) {
  LabeledTrack t = fixture::weighted_cloud({{0, 0}, {0, 0}}, {0.5, 0.5});
  t.particles[0].phi = std::numbers::pi - 0.1;
  t.particles[1].phi = -std::numbers::pi + 0.1;
  EXPECT_NEAR(std::abs(mean_state(t).phi), std::numbers::pi, 1e-12);
}

TEST(KalmanCrossCheck, StraightLineSingleObject) {
  const auto r = crosscheck::kalman_crosscheck(2024);
  EXPECT_EQ(r.failures, 0u) << "worst ratio " << r.worst_ratio;
}

TEST(FilterStep, RejectsOutOfOrderMeasurements) {
  EXPECT_THROW(filter_step(GlmbPosterior::initial(), {3, {}}, TrackerConfig{}), ContractViolation);
}

TEST(FilterStep, ColdStartCreatesBirthsOnly) {
  TrackerConfig cfg;
  cfg.particles_per_track = 64;
  const StepResult r = filter_step(GlmbPosterior::initial(), {0, {{10, 10}}}, cfg);
  EXPECT_EQ(r.diagnostics.births, 1u);
  for (const auto& h : r.posterior.hypotheses) {
    for (const auto& l : h.labels) EXPECT_EQ(l.birth_step, 0);
  }
  EXPECT_EQ(check_posterior(r.posterior, cfg.h_max), "");
}

TEST(FilterStep, EmptyInputsNeverFail) {
  const StepResult r = filter_step(GlmbPosterior::initial(), {0, {}}, TrackerConfig{});
  ASSERT_EQ(r.posterior.hypotheses.size(), 1u);
  EXPECT_TRUE(r.posterior.hypotheses[0].labels.empty());
  EXPECT_EQ(r.estimate.cardinality(), 0u);
}

TEST(FilterStep, TrackDiesWithoutDetections) {
  TrackerConfig cfg;
  cfg.particles_per_track = 128;
  Tracker tracker(cfg);
  for (std::int32_t k = 0; k < 30; ++k) tracker.step(detections_around(k, {20, 20}, 5, 1));
  EXPECT_EQ(tracker.last().estimate.cardinality(), 1u);
  for (std::int32_t k = 30; k < 60; ++k) tracker.step({k, {}});
  EXPECT_EQ(tracker.last().estimate.cardinality(), 0u);
}

TEST(FilterStep, InvariantsHoldEveryStep) {
  TrackerConfig cfg;
  cfg.particles_per_track = 64;
  cfg.h_max = 7;
  Tracker tracker(cfg);
  for (std::int32_t k = 0; k < 40; ++k) {
    MeasurementSet z = detections_around(k, {5 + 0.3 * k, 5}, 5, 2);
    if (k > 10) {
      const auto more = detections_around(k, {6 + 0.3 * k, 5.5}, 5, 3);
      z.detections.insert(z.detections.end(), more.detections.begin(), more.detections.end());
    }
    if (k % 7 == 0) z.detections.push_back({70, 70});
    const StepResult& r = tracker.step(z);
    ASSERT_EQ(check_posterior(r.posterior, cfg.h_max), "") << "step " << k;
    // Every pooled cloud is referenced and (source, signature) is unique.
    std::set<std::uint32_t> used;
    for (const auto& h : r.posterior.hypotheses) used.insert(h.tracks.begin(), h.tracks.end());
    EXPECT_EQ(used.size(), r.posterior.track_pool.size());
  }
}

TEST(FilterStep, MatchesExactPosteriorTinyInstance) {
  TrackerConfig cfg;
  cfg.particles_per_track = 256;
  cfg.h_up = 100000;
  cfg.h_max = 1000;
  cfg.prune_tau = 1e-12;
  cfg.clutter_kappa = 0.05;
  cfg.birth_seed_threshold = 1e-9;

  GlmbPosterior post;
  post.step = 0;
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n(0.0, 0.2);
  for (int t = 0; t < 2; ++t) {
    LabeledTrack tr = fixture::point_cloud(0, 0, cfg.particles_per_track, {0, t});
    for (auto& p : tr.particles) {
      p.px = 1.0 * t + n(gen);
      p.py = n(gen);
    }
    post.track_pool.push_back(tr);
  }
  post.labels.issue(0);
  post.labels.issue(0);
  post.hypotheses = {hyp(1, 1.0, {Label{0, 0}, Label{0, 1}}, {0, 1})};
  post.next_hypothesis_id = 2;
  const MeasurementSet z{1, {{0.2, 0.1}, {0.7, -0.1}}};

  const StepResult r = filter_step(post, z, cfg);
  ASSERT_EQ(r.diagnostics.births, 0u);

  // Oracle matrix straight from the predicted clouds.
  const GlmbPosterior pred = predict(post, cfg);
  CompatibilityMatrix c;
  c.m = 2;
  c.t = 2;
  c.kappa = cfg.clutter_kappa;
  c.entries.assign(6, 0.0);
  const double var = cfg.meas_sigma * cfg.meas_sigma;
  for (std::size_t i = 0; i < 2; ++i) {
    c.at(i, 0) = cfg.clutter_kappa;
    for (std::size_t j = 0; j < 2; ++j) {
      double mx = 0, my = 0, sxx = 0, sxy = 0, syy = 0, lik = 0;
      for (const auto& p : pred.track_pool[j].particles) {
        const double w = std::exp(p.log_weight);
        mx += w * p.px;
        my += w * p.py;
        const double dx = z.detections[i].x - p.px, dy = z.detections[i].y - p.py;
        lik += w * std::exp(-(dx * dx + dy * dy) / (2 * var)) / (2 * std::numbers::pi * var);
      }
      for (const auto& p : pred.track_pool[j].particles) {
        const double w = std::exp(p.log_weight);
        sxx += w * (p.px - mx) * (p.px - mx);
        sxy += w * (p.px - mx) * (p.py - my);
        syy += w * (p.py - my) * (p.py - my);
      }
      sxx += var;
      syy += var;
      const double dx = z.detections[i].x - mx, dy = z.detections[i].y - my;
      const double d2 = (syy * dx * dx - 2 * sxy * dx * dy + sxx * dy * dy) / (sxx * syy - sxy * sxy);
      if (d2 <= cfg.gate_chi2) c.at(i, j + 1) = cfg.p_detect * lik;
    }
  }
  const auto exact = oracle::enumerate_posterior(c, {cfg.p_survival, cfg.p_survival}, cfg);

  oracle::Distribution got;
  for (const auto& h : r.posterior.hypotheses) {
    std::vector<std::uint8_t> s(2, 0);
    for (const auto& l : h.labels) s[l.birth_index] = 1;
    std::vector<std::uint32_t> a;
    for (const auto& target : h.assoc_map) a.push_back(target ? target->birth_index + 1 : 0);
    got[oracle::outcome_key(s, a)] += h.weight;
  }
  EXPECT_LT(oracle::total_variation(exact, got), 0.02);
}

TEST(FilterStep, ReferenceBackendAndThreadCountsAgree) {
  TrackerConfig cfg;
  cfg.particles_per_track = 64;
  auto run = [&](Backend b) {
    Tracker t(cfg, b);
    std::vector<StepResult> out;
    for (std::int32_t k = 0; k < 15; ++k) {
      MeasurementSet z = detections_around(k, {10 + 0.5 * k, 10}, 5, 4);
      const auto other = detections_around(k, {30, 10 + 0.4 * k}, 5, 5);
      z.detections.insert(z.detections.end(), other.detections.begin(), other.detections.end());
      out.push_back(t.step(z));
    }
    return out;
  };
  const auto ref = run(Backend::reference);
  const int saved = omp_get_max_threads();
  for (int threads : {1, 4}) {
    omp_set_num_threads(threads);
    const auto par = run(Backend::parallel);
    for (std::size_t k = 0; k < ref.size(); ++k) {
      EXPECT_EQ(par[k].posterior.hypotheses, ref[k].posterior.hypotheses) << k;
      EXPECT_EQ(par[k].posterior.track_pool, ref[k].posterior.track_pool) << k;
    }
  }
  omp_set_num_threads(saved);
}

TEST(RunUpdateJobs, ReferenceMatchesParallel) {
  TrackerConfig cfg;
  std::vector<LabeledTrack> pool;
  for (int t = 0; t < 3; ++t) {
    LabeledTrack tr = fixture::point_cloud(0, 0, 200, {0, t});
    std::mt19937_64 gen(t);
    std::normal_distribution<double> n(0.0, 0.5);
    for (auto& p : tr.particles) {
      p.px = t + n(gen);
      p.py = n(gen);
    }
    pool.push_back(tr);
  }
  const MeasurementSet z{4, {{0.1, 0}, {1.1, 0.2}, {2.0, -0.3}, {1.0, 0.0}}};
  const std::vector<UpdateJob> jobs{{0, {0}}, {1, {1, 3}}, {1, {}}, {2, {2}}, {0, {0, 1}}};
  const auto par = run_update_jobs(jobs, pool, z, cfg);
  const auto ref = reference::run_update_jobs(jobs, pool, z, cfg);
  EXPECT_EQ(par, ref);
  EXPECT_EQ(par[2].particles, pool[1].particles);
  EXPECT_EQ(par[1].signature, (Signature{1, 3}));
}

TEST(CheckPosterior, DetectsViolations) {
  GlmbPosterior p;
  p.track_pool.push_back(fixture::point_cloud(0, 0, 1, {0, 0}));
  p.hypotheses = {hyp(1, 0.5, {Label{0, 0}}, {0}), hyp(2, 0.4)};
  EXPECT_NE(check_posterior(p, 5), "");
  p.hypotheses[1].weight = 0.5;
  EXPECT_EQ(check_posterior(p, 5), "");
  EXPECT_NE(check_posterior(p, 1), "");
  p.hypotheses[1].assoc_map = {Label{0, 0}};
  EXPECT_NE(check_posterior(p, 5), "");
}
