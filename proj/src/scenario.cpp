#include "glmb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "glmb/rng.hpp"

namespace glmb {

using nlohmann::json;

void validate_ground_track(const GroundTrack& track, double v_max) {
  if (track.points.size() < 2) throw ConfigError("ground track needs at least 2 points");
  if (!(track.dt > 0.0)) throw ConfigError("ground track dt must be positive");
  const double max_step = v_max * track.dt;
  for (std::size_t k = 1; k < track.points.size(); ++k) {
    const double d = std::hypot(track.points[k].x - track.points[k - 1].x, track.points[k].y - track.points[k - 1].y);
    if (d > max_step + 1e-12) {
      throw ConfigError("ground track step " + std::to_string(k) + " moves " + std::to_string(d) +
                        " m, more than v_max * dt = " + std::to_string(max_step) + " m");
    }
  }
}

GroundTrack synth_ground_track(double duration, double dt, const Region& region) {
  if (!(region.width() > 0.0) || !(region.height() > 0.0)) throw ConfigError("degenerate region");
  if (!(dt > 0.0) || !(duration / dt >= 2.0)) throw ConfigError("duration must cover at least two steps");
  // Rounded so that 54.8 s at 0.1 s gives exactly 548 points.
  const auto k = static_cast<std::size_t>(std::llround(duration / dt));
  const double cx = 0.5 * (region.xmin + region.xmax);
  const double cy = 0.5 * (region.ymin + region.ymax);
  const double ax = 0.75 * 0.5 * region.width();
  const double ay = 0.75 * 0.5 * region.height();
  GroundTrack track;
  track.dt = dt;
  track.points.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double t = static_cast<double>(i) * dt;
    track.points.push_back({cx + ax * std::sin(2.0 * std::numbers::pi * t / duration),
                            cy + ay * std::sin(4.0 * std::numbers::pi * t / duration + std::numbers::pi / 3.0)});
  }
  return track;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, std::size_t line, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParseError(line, std::string("cannot parse ") + what + " from '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw ParseError(line, std::string("bad ") + what + " '" + s + "'");
  return v;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

}  // namespace

GroundTrack read_ground_track(std::istream& in, double dt) {
  GroundTrack track;
  track.dt = dt;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != "step,x,y") throw ParseError(lineno, "expected header 'step,x,y'");
      header = true;
      continue;
    }
    const auto fields = split_csv(line);
    if (fields.size() != 3) throw ParseError(lineno, "expected 3 fields, got " + std::to_string(fields.size()));
    const double step = parse_double(fields[0], lineno, "step");
    if (step != static_cast<double>(track.points.size())) {
      throw ParseError(lineno, "steps must be consecutive from 0");
    }
    track.points.push_back({parse_double(fields[1], lineno, "x"), parse_double(fields[2], lineno, "y")});
  }
  if (!header) throw ParseError(lineno, "missing header 'step,x,y'");
  return track;
}

void write_ground_track(std::ostream& out, const GroundTrack& track) {
  out << "step,x,y\n";
  for (std::size_t k = 0; k < track.points.size(); ++k) {
    out << k << ',' << json(track.points[k].x).dump() << ',' << json(track.points[k].y).dump() << '\n';
  }
}

std::vector<Point2> ScenarioTruth::positions_at(std::size_t k) const {
  std::vector<Point2> out;
  for (const ScenarioObject& o : objects) {
    if (k >= o.entry_step && k - o.entry_step < o.positions.size()) out.push_back(o.positions[k - o.entry_step]);
  }
  return out;
}

std::size_t ScenarioTruth::cardinality_at(std::size_t k) const {
  std::size_t n = 0;
  for (const ScenarioObject& o : objects) {
    if (k >= o.entry_step && k - o.entry_step < o.positions.size()) ++n;
  }
  return n;
}

ScenarioTruth make_convoy(const GroundTrack& track, std::size_t n_objects, std::size_t delta) {
  if (n_objects < 1) throw ConfigError("convoy needs at least one object");
  const std::size_t k_total = track.points.size();
  if (k_total < 2) throw ConfigError("ground track needs at least 2 points");
  if ((n_objects - 1) * delta >= k_total) {
    throw ConfigError("object " + std::to_string(n_objects - 1) + " would enter at step " +
                      std::to_string((n_objects - 1) * delta) + ", past the end of the track");
  }
  ScenarioTruth truth;
  truth.dt = track.dt;
  truth.num_steps = k_total;
  truth.params.n_objects = n_objects;
  truth.params.delta = delta;
  for (std::size_t n = 0; n < n_objects; ++n) {
    ScenarioObject o;
    o.id = n;
    o.entry_step = n * delta;
    o.positions.assign(track.points.begin(), track.points.begin() + static_cast<std::ptrdiff_t>(k_total - o.entry_step));
    truth.objects.push_back(std::move(o));
  }
  return truth;
}

MeasurementSet sample_detections(std::span<const Point2> truth, std::int32_t step, std::size_t detections_per_object,
                                 double sigma, double lambda_clutter, const Region& region, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw ConfigError("detection sigma must be positive");
  MeasurementSet z;
  z.step = step;
  z.detections.reserve(truth.size() * detections_per_object);
  for (std::size_t n = 0; n < truth.size(); ++n) {
    const RngStream rng(seed, {step, Domain::detection, n, 0});
    for (std::size_t d = 0; d < detections_per_object; ++d) {
      z.detections.push_back({truth[n].x + sigma * rng.normal_at(2 * d), truth[n].y + sigma * rng.normal_at(2 * d + 1)});
    }
  }
  if (lambda_clutter > 0.0) {
    RngStream rng(seed, {step, Domain::clutter, 0, 0});
    std::poisson_distribution<int> count(lambda_clutter);
    const int c = count(rng);
    const RngStream pos(seed, {step, Domain::clutter, 1, 0});
    for (int i = 0; i < c; ++i) {
      z.detections.push_back({region.xmin + region.width() * pos.uniform_at(2 * i),
                              region.ymin + region.height() * pos.uniform_at(2 * i + 1)});
    }
  }
  std::sort(z.detections.begin(), z.detections.end(),
            [](const Point2& a, const Point2& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  return z;
}

Scenario generate_scenario(const GroundTrack& track, const ConvoyParams& params, const Region& region,
                           std::uint64_t seed) {
  Scenario s;
  s.truth = make_convoy(track, params.n_objects, params.delta);
  s.truth.params = params;
  s.truth.region = region;
  s.measurements.reserve(s.truth.num_steps);
  for (std::size_t k = 0; k < s.truth.num_steps; ++k) {
    const auto truth_k = s.truth.positions_at(k);
    s.measurements.push_back(sample_detections(truth_k, static_cast<std::int32_t>(k), params.detections_per_object,
                                               params.sigma, params.lambda_clutter, region, seed));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Scenario file
// ---------------------------------------------------------------------------

void write_scenario(std::ostream& out, const Scenario& scenario) {
  const ScenarioTruth& t = scenario.truth;
  json header;
  header["scenario"] = {
      {"dt", t.dt},
      {"num_steps", t.num_steps},
      {"region", {t.region.xmin, t.region.ymin, t.region.xmax, t.region.ymax}},
      {"n_objects", t.params.n_objects},
      {"detections_per_object", t.params.detections_per_object},
      {"lambda_clutter", t.params.lambda_clutter},
      {"sigma", t.params.sigma},
      {"delta", t.params.delta},
  };
  out << header.dump() << '\n';
  for (std::size_t k = 0; k < t.num_steps; ++k) {
    json rec;
    rec["k"] = k;
    rec["time"] = static_cast<double>(k) * t.dt;
    json truth = json::array();
    for (const ScenarioObject& o : t.objects) {
      if (k >= o.entry_step && k - o.entry_step < o.positions.size()) {
        const Point2& p = o.positions[k - o.entry_step];
        truth.push_back({{"id", o.id}, {"x", p.x}, {"y", p.y}});
      }
    }
    rec["truth"] = std::move(truth);
    json dets = json::array();
    if (k < scenario.measurements.size()) {
      for (const Point2& z : scenario.measurements[k].detections) dets.push_back({z.x, z.y});
    }
    rec["detections"] = std::move(dets);
    out << rec.dump() << '\n';
  }
}

namespace {

template <typename T>
T field(const json& obj, const char* name, std::size_t line) {
  if (!obj.is_object() || !obj.contains(name)) throw ParseError(line, std::string("missing field '") + name + "'");
  try {
    return obj.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(line, std::string("field '") + name + "': " + e.what());
  }
}

double number(const json& v, std::size_t line, const char* what) {
  if (!v.is_number()) throw ParseError(line, std::string(what) + " must be a number");
  return v.get<double>();
}

}  // namespace

Scenario read_scenario(std::istream& in) {
  Scenario s;
  ScenarioTruth& t = s.truth;
  std::map<std::size_t, std::size_t> object_index;  // id -> objects[]
  bool have_header = false;
  std::string line;
  std::size_t lineno = 0;
  std::size_t expected_k = 0;
  double first_time = 0.0;

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object()) throw ParseError(lineno, "record must be a JSON object");

    if (rec.contains("scenario")) {
      if (have_header || expected_k > 0) throw ParseError(lineno, "scenario header must be the first record");
      const json& h = rec["scenario"];
      t.dt = field<double>(h, "dt", lineno);
      const auto region = field<std::vector<double>>(h, "region", lineno);
      if (region.size() != 4) throw ParseError(lineno, "region must be [xmin, ymin, xmax, ymax]");
      t.region = {region[0], region[1], region[2], region[3]};
      t.params.n_objects = field<std::size_t>(h, "n_objects", lineno);
      t.params.detections_per_object = field<std::size_t>(h, "detections_per_object", lineno);
      t.params.lambda_clutter = field<double>(h, "lambda_clutter", lineno);
      t.params.sigma = field<double>(h, "sigma", lineno);
      t.params.delta = field<std::size_t>(h, "delta", lineno);
      have_header = true;
      continue;
    }

    const auto k = field<std::int64_t>(rec, "k", lineno);
    if (k != static_cast<std::int64_t>(expected_k)) {
      throw ParseError(lineno, "expected step " + std::to_string(expected_k) + ", got " + std::to_string(k));
    }
    const double time = field<double>(rec, "time", lineno);
    if (k == 0) first_time = time;
    if (k == 1 && !have_header) t.dt = time - first_time;
    if (!rec.contains("truth") || !rec["truth"].is_array()) throw ParseError(lineno, "missing array 'truth'");
    if (!rec.contains("detections") || !rec["detections"].is_array()) {
      throw ParseError(lineno, "missing array 'detections'");
    }
    for (const json& obj : rec["truth"]) {
      const auto id = field<std::size_t>(obj, "id", lineno);
      const Point2 p{number(obj.value("x", json()), lineno, "truth x"), number(obj.value("y", json()), lineno, "truth y")};
      auto it = object_index.find(id);
      if (it == object_index.end()) {
        it = object_index.emplace(id, t.objects.size()).first;
        t.objects.push_back({id, static_cast<std::size_t>(k), {}});
      }
      ScenarioObject& o = t.objects[it->second];
      if (o.entry_step + o.positions.size() != static_cast<std::size_t>(k)) {
        throw ParseError(lineno, "object " + std::to_string(id) + " is not active on consecutive steps");
      }
      o.positions.push_back(p);
    }
    MeasurementSet z;
    z.step = static_cast<std::int32_t>(k);
    for (const json& d : rec["detections"]) {
      if (!d.is_array() || d.size() != 2) throw ParseError(lineno, "detection must be [x, y]");
      z.detections.push_back({number(d[0], lineno, "detection x"), number(d[1], lineno, "detection y")});
    }
    s.measurements.push_back(std::move(z));
    ++expected_k;
  }
  t.num_steps = expected_k;
  std::sort(t.objects.begin(), t.objects.end(), [](const ScenarioObject& a, const ScenarioObject& b) { return a.id < b.id; });
  if (!have_header) {
    t.params.n_objects = t.objects.size();
    if (t.objects.size() > 1) t.params.delta = t.objects[1].entry_step - t.objects[0].entry_step;
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open scenario file '" + path + "'");
  return read_scenario(in);
}

void save_scenario(const std::string& path, const Scenario& scenario) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file '" + path + "'");
  write_scenario(out, scenario);
}

}  // namespace glmb
