#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "glmb/types.hpp"

namespace glmb {

struct Region {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 80.0;
  double ymax = 80.0;

  double width() const noexcept { return xmax - xmin; }
  double height() const noexcept { return ymax - ymin; }
  double area() const noexcept { return width() * height(); }
  bool contains(const Point2& p) const noexcept { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
  bool operator==(const Region&) const = default;
};

/// Single-object ground-truth track sampled every dt seconds.
struct GroundTrack {
  double dt = 0.1;
  std::vector<Point2> points;

  std::size_t size() const noexcept { return points.size(); }
};

/// Throws ConfigError unless K >= 2 and no step is longer than v_max * dt.
void validate_ground_track(const GroundTrack& track, double v_max = 15.0);

/// Closed Lissajous loop covering 75% of the region's half extents:
///   x(t) = cx + 0.75 rx sin(2 pi t / T),  y(t) = cy + 0.75 ry sin(4 pi t / T + pi / 3)
/// with T = duration, sampled at t = 0, dt, 2 dt, ...
GroundTrack synth_ground_track(double duration, double dt, const Region& region = {});

/// CSV with header `step,x,y`, one row per step. dt is not part of the file.
GroundTrack read_ground_track(std::istream& in, double dt = 0.1);
void write_ground_track(std::ostream& out, const GroundTrack& track);

struct ConvoyParams {
  std::size_t n_objects = 1;
  std::size_t detections_per_object = 5;
  double lambda_clutter = 0.0;
  double sigma = 0.25;
  std::size_t delta = 2;

  bool operator==(const ConvoyParams&) const = default;
};

struct ScenarioObject {
  std::size_t id = 0;
  std::size_t entry_step = 0;
  std::vector<Point2> positions;  // positions[k - entry_step] for active steps k

  bool operator==(const ScenarioObject&) const = default;
};

struct ScenarioTruth {
  std::vector<ScenarioObject> objects;
  Region region;
  ConvoyParams params;
  double dt = 0.1;
  std::size_t num_steps = 0;

  /// Positions of the objects active at step k, in id order.
  std::vector<Point2> positions_at(std::size_t k) const;
  std::size_t cardinality_at(std::size_t k) const;
  bool operator==(const ScenarioTruth&) const = default;
};

/// N time-offset copies of the base track: object n enters at n * delta and
/// occupies base point k - n * delta at step k. Throws ConfigError if some
/// object would never enter.
ScenarioTruth make_convoy(const GroundTrack& track, std::size_t n_objects, std::size_t delta);

/// D detections per active object drawn N(truth, sigma^2 I), plus
/// Poisson(lambda) clutter points uniform over the region. Output is sorted
/// by (x, y). Streams: (step, detection, object index) and (step, clutter, 0).
MeasurementSet sample_detections(std::span<const Point2> truth, std::int32_t step, std::size_t detections_per_object,
                                 double sigma, double lambda_clutter, const Region& region, std::uint64_t seed);

struct Scenario {
  ScenarioTruth truth;
  std::vector<MeasurementSet> measurements;  // one per step

  bool operator==(const Scenario&) const = default;
};

/// Convoy truth plus detections for every step.
Scenario generate_scenario(const GroundTrack& track, const ConvoyParams& params, const Region& region,
                           std::uint64_t seed);

/// Line-delimited JSON: a header record {"scenario": {...}} followed by one
/// record per step {"k", "time", "truth": [{"id","x","y"}], "detections": [[x,y]]}.
/// See docs/scenario_format.md.
void write_scenario(std::ostream& out, const Scenario& scenario);
Scenario read_scenario(std::istream& in);

Scenario load_scenario(const std::string& path);
void save_scenario(const std::string& path, const Scenario& scenario);

}  // namespace glmb
