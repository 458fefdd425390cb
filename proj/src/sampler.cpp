#include "glmb/sampler.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

namespace glmb {

RngStream survival_stream(std::uint64_t seed, std::int64_t step, std::uint64_t hypothesis_id, std::uint64_t sample) {
  return RngStream(seed, {step, Domain::survival, hypothesis_id, sample});
}

RngStream association_stream(std::uint64_t seed, std::int64_t step, std::uint64_t hypothesis_id,
                             std::uint64_t sample) {
  return RngStream(seed, {step, Domain::association, hypothesis_id, sample});
}

std::vector<std::uint8_t> sample_survival(std::span<const double> death_probs, const RngStream& stream) {
  std::vector<std::uint8_t> alive(death_probs.size());
  for (std::size_t j = 0; j < death_probs.size(); ++j) {
    alive[j] = stream.uniform_at(j) >= death_probs[j] ? 1 : 0;
  }
  return alive;
}

CompatibilityMatrix zero_dead_columns(const CompatibilityMatrix& compat, std::span<const std::uint8_t> survival) {
  if (survival.size() != compat.t) throw ContractViolation("survival mask does not match track columns");
  CompatibilityMatrix out = compat;
  for (std::size_t j = 1; j <= compat.t; ++j) {
    if (survival[j - 1]) continue;
    for (std::size_t i = 0; i < compat.m; ++i) out.at(i, j) = 0.0;
  }
  return out;
}

std::vector<std::uint32_t> sample_associations(const CompatibilityMatrix& compat_pruned, const RngStream& stream) {
  std::vector<std::uint32_t> assoc(compat_pruned.m, 0);
  const std::size_t cols = compat_pruned.cols();
  for (std::size_t i = 0; i < compat_pruned.m; ++i) {
    const double* row = compat_pruned.entries.data() + i * cols;
    double total = 0.0;
    std::size_t last_positive = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      total += row[j];
      if (row[j] > 0.0) last_positive = j;
    }
    if (last_positive == cols) throw ContractViolation("association row without positive entry");
    const double u = stream.uniform_at(i) * total;
    double acc = 0.0;
    std::size_t pick = last_positive;
    for (std::size_t j = 0; j < cols; ++j) {
      acc += row[j];
      if (u < acc) {
        pick = j;
        break;
      }
    }
    assoc[i] = static_cast<std::uint32_t>(pick);
  }
  return assoc;
}

namespace {

double log_poisson(double n, double rate) { return n * std::log(rate) - rate - std::lgamma(n + 1.0); }

}  // namespace

double count_pmf(std::size_t n, const TrackerConfig& config) {
  const double rate = config.detection_rate;
  const double x = static_cast<double>(n);
  const double poisson = std::exp(log_poisson(x, rate));
  if (config.count_model == CountModel::poisson) return poisson;
  const std::size_t d = config.detections_max;
  double binomial = 0.0;
  if (n <= d) {
    const double q = rate / static_cast<double>(d);
    const double dd = static_cast<double>(d);
    const double log_choose = std::lgamma(dd + 1.0) - std::lgamma(x + 1.0) - std::lgamma(dd - x + 1.0);
    const double a = n > 0 ? x * std::log(q) : 0.0;
    const double b = n < d ? (dd - x) * std::log1p(-q) : 0.0;
    binomial = std::exp(log_choose + a + b);
  }
  const double eta = config.count_outlier_weight;
  return (1.0 - eta) * binomial + eta * poisson;
}

double log_hypothesis_weight(double parent_log_weight, std::span<const std::uint8_t> survival,
                             std::span<const std::uint32_t> assoc, const CompatibilityMatrix& compat,
                             std::span<const double> survival_priors, const TrackerConfig& config) {
  if (survival.size() != compat.t || survival_priors.size() != compat.t || assoc.size() != compat.m) {
    throw ContractViolation("hypothesis_weight: argument sizes do not match the compatibility matrix");
  }
  std::vector<std::uint32_t> hits(compat.t + 1, 0);
  for (std::size_t i = 0; i < assoc.size(); ++i) {
    const std::uint32_t j = assoc[i];
    if (j > compat.t) throw ContractViolation("association targets a nonexistent column");
    if (j > 0 && !survival[j - 1]) throw ContractViolation("association targets a dead track");
    ++hits[j];
  }
  double lw = parent_log_weight;
  for (std::size_t j = 0; j < compat.t; ++j) {
    const double ps = survival_priors[j];
    lw += survival[j] ? std::log(ps) : std::log1p(-ps);
  }
  for (std::size_t i = 0; i < assoc.size(); ++i) lw += std::log(compat.at(i, assoc[i]));
  const bool counts = config.detection_rate > 0.0;
  const double log_miss = counts ? std::log((1.0 - config.p_detect) + config.p_detect * count_pmf(0, config))
                                 : std::log1p(-config.p_detect);
  for (std::size_t j = 1; j <= compat.t; ++j) {
    if (!survival[j - 1]) continue;
    if (hits[j] == 0) {
      lw += log_miss;
    } else if (counts) {
      lw += std::log(count_pmf(hits[j], config));
    }
  }
  return lw;
}

double hypothesis_weight(double parent_weight, std::span<const std::uint8_t> survival,
                         std::span<const std::uint32_t> assoc, const CompatibilityMatrix& compat,
                         std::span<const double> survival_priors, const TrackerConfig& config) {
  return std::exp(log_hypothesis_weight(std::log(parent_weight), survival, assoc, compat, survival_priors, config));
}

CompatibilityMatrix restrict_columns(const CompatibilityMatrix& compat, std::span<const std::uint32_t> columns) {
  CompatibilityMatrix out;
  out.m = compat.m;
  out.t = columns.size();
  out.kappa = compat.kappa;
  out.entries.resize(out.m * out.cols());
  out.gate_mask.resize(out.m * out.t);
  for (std::uint32_t c : columns) {
    if (c < 1 || c > compat.t) throw ContractViolation("restrict_columns: column out of range");
    out.track_slots.push_back(compat.track_slots[c - 1]);
    out.track_labels.push_back(compat.track_labels[c - 1]);
  }
  for (std::size_t i = 0; i < out.m; ++i) {
    out.at(i, 0) = compat.at(i, 0);
    for (std::size_t k = 0; k < columns.size(); ++k) {
      out.at(i, k + 1) = compat.at(i, columns[k]);
      out.gate_mask[i * out.t + k] = compat.gate_mask[i * compat.t + (columns[k] - 1)];
    }
  }
  return out;
}

ParentView make_parent_view(const Hypothesis& parent, const CompatibilityMatrix& compat,
                            std::span<const std::uint32_t> birth_columns) {
  ParentView view;
  view.columns.reserve(parent.tracks.size() + birth_columns.size());
  for (std::uint32_t slot : parent.tracks) {
    std::uint32_t col = 0;
    for (std::size_t j = 0; j < compat.track_slots.size(); ++j) {
      if (compat.track_slots[j] == slot) {
        col = static_cast<std::uint32_t>(j + 1);
        break;
      }
    }
    if (col == 0) throw ContractViolation("hypothesis references a track missing from the compatibility matrix");
    view.columns.push_back(col);
  }
  view.columns.insert(view.columns.end(), birth_columns.begin(), birth_columns.end());
  return view;
}

namespace {

struct SparseEntry {
  std::uint32_t col;  // local column >= 1
  double value;
};

// Row-compressed positive track entries of a hypothesis-local matrix.
struct SparseRows {
  std::vector<std::uint32_t> offsets;
  std::vector<SparseEntry> entries;
};

SparseRows compress(const CompatibilityMatrix& local) {
  SparseRows rows;
  rows.offsets.reserve(local.m + 1);
  rows.offsets.push_back(0);
  for (std::size_t i = 0; i < local.m; ++i) {
    for (std::size_t j = 1; j <= local.t; ++j) {
      const double c = local.at(i, j);
      if (c > 0.0) rows.entries.push_back({static_cast<std::uint32_t>(j), c});
    }
    rows.offsets.push_back(static_cast<std::uint32_t>(rows.entries.size()));
  }
  return rows;
}

struct SampleKeyHash {
  std::uint64_t operator()(std::span<const std::uint8_t> survival, std::span<const std::uint32_t> assoc) const {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (std::uint8_t s : survival) h = hash_combine(h, s);
    for (std::uint32_t a : assoc) h = hash_combine(h, a);
    return h;
  }
};

// Samples all successors of one parent. Arithmetic mirrors
// sample_survival / sample_associations exactly so the serial reference
// reproduces the same draws bit for bit.
std::vector<Candidate> sample_parent(const GenerationContext& ctx, std::uint32_t parent_index,
                                     const ParentView& view) {
  const Hypothesis& parent = ctx.predicted->hypotheses[parent_index];
  const CompatibilityMatrix local = restrict_columns(*ctx.compat, view.columns);
  const SparseRows rows = compress(local);
  const std::size_t t = view.columns.size();
  const std::size_t m = local.m;

  std::vector<double> death(t), priors(t);
  for (std::size_t k = 0; k < t; ++k) {
    death[k] = ctx.death_probs[view.columns[k] - 1];
    priors[k] = ctx.survival_priors[view.columns[k] - 1];
  }
  const double parent_log_w = std::log(parent.weight);
  const std::int64_t step = ctx.predicted->step;
  const std::uint64_t seed = ctx.config->seed;

  std::vector<Candidate> out;
  std::unordered_multimap<std::uint64_t, std::size_t> seen;
  std::vector<std::uint8_t> alive(t);
  std::vector<std::uint32_t> assoc(m);

  for (std::size_t s = 0; s < ctx.h_up; ++s) {
    const RngStream surv = survival_stream(seed, step, parent.id, s);
    for (std::size_t k = 0; k < t; ++k) alive[k] = surv.uniform_at(k) >= death[k] ? 1 : 0;

    const RngStream pick = association_stream(seed, step, parent.id, s);
    for (std::size_t i = 0; i < m; ++i) {
      const SparseEntry* begin = rows.entries.data() + rows.offsets[i];
      const SparseEntry* end = rows.entries.data() + rows.offsets[i + 1];
      double total = local.kappa;
      std::uint32_t last_positive = 0;
      for (const SparseEntry* e = begin; e != end; ++e) {
        if (alive[e->col - 1]) {
          total += e->value;
          last_positive = e->col;
        }
      }
      const double u = pick.uniform_at(i) * total;
      std::uint32_t choice = last_positive;
      double acc = local.kappa;
      if (u < acc) {
        choice = 0;
      } else {
        for (const SparseEntry* e = begin; e != end; ++e) {
          if (!alive[e->col - 1]) continue;
          acc += e->value;
          if (u < acc) {
            choice = e->col;
            break;
          }
        }
      }
      assoc[i] = choice;
    }

    const std::uint64_t h = SampleKeyHash{}(alive, assoc);
    bool duplicate = false;
    auto [lo, hi] = seen.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      const Candidate& c = out[it->second];
      if (c.survival == alive && c.assoc == assoc) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    seen.emplace(h, out.size());
    Candidate c;
    c.parent = parent_index;
    c.survival = alive;
    c.assoc = assoc;
    out.push_back(std::move(c));
  }
  for (Candidate& c : out) {
    c.log_weight = log_hypothesis_weight(parent_log_w, c.survival, c.assoc, local, priors, *ctx.config);
  }
  return out;
}

}  // namespace

GenerationResult generate_hypotheses(const GenerationContext& ctx) {
  if (!ctx.predicted || !ctx.compat || !ctx.config) throw ContractViolation("generation context incomplete");
  if (ctx.death_probs.size() != ctx.compat->t || ctx.survival_priors.size() != ctx.compat->t) {
    throw ContractViolation("per-column probabilities do not match the compatibility matrix");
  }
  const auto& parents = ctx.predicted->hypotheses;
  GenerationResult result;
  result.views.resize(parents.size());
  std::vector<std::vector<Candidate>> per_parent(parents.size());
  const auto n = static_cast<std::int64_t>(parents.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t h = 0; h < n; ++h) {
    result.views[h] = make_parent_view(parents[h], *ctx.compat, ctx.birth_columns);
    per_parent[h] = sample_parent(ctx, static_cast<std::uint32_t>(h), result.views[h]);
  }

  std::size_t total = 0;
  for (const auto& v : per_parent) total += v.size();
  result.candidates.reserve(total);
  for (auto& v : per_parent) {
    for (Candidate& c : v) result.candidates.push_back(std::move(c));
  }
  result.samples_drawn = parents.size() * ctx.h_up;
  return result;
}

}  // namespace glmb
