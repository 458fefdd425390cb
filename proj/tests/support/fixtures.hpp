#pragma once

#include <cmath>
#include <vector>

#include "glmb/types.hpp"

namespace fixture {

// Cloud of n identical particles at (x, y) with uniform weights.
inline glmb::LabeledTrack point_cloud(double x, double y, std::size_t n = 1, glmb::Label label = {0, 0},
                                      double v = 0.0, double phi = 0.0) {
  glmb::LabeledTrack t;
  t.label = label;
  const double lw = -std::log(static_cast<double>(n));
  for (std::size_t p = 0; p < n; ++p) {
    glmb::Particle part;
    part.px = x;
    part.py = y;
    part.v = v;
    part.phi = phi;
    part.log_weight = lw;
    t.particles.push_back(part);
  }
  return t;
}

// Particles at the given points with the given linear weights.
inline glmb::LabeledTrack weighted_cloud(const std::vector<glmb::Point2>& points, const std::vector<double>& w,
                                         glmb::Label label = {0, 0}) {
  glmb::LabeledTrack t;
  t.label = label;
  for (std::size_t p = 0; p < points.size(); ++p) {
    glmb::Particle part;
    part.px = points[p].x;
    part.py = points[p].y;
    part.log_weight = std::log(w[p]);
    t.particles.push_back(part);
  }
  return t;
}

inline double weight_of(const glmb::Particle& p) { return std::exp(p.log_weight); }

}  // namespace fixture
