#include "glmb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace glmb {

namespace {

// Square-or-wide case (n <= m): potentials u, v and shortest augmenting
// paths, one row at a time. Arrays are 1-based with column 0 as sentinel.
std::vector<std::size_t> assign_rows(std::span<const double> a, std::size_t n, std::size_t m) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Assignment hungarian(std::span<const double> cost, std::size_t rows, std::size_t cols) {
  if (cost.size() != rows * cols) throw ContractViolation("hungarian: cost size does not match dimensions");
  Assignment out;
  if (rows == 0 || cols == 0) return out;
  for (double c : cost) {
    if (!std::isfinite(c)) throw ContractViolation("hungarian: costs must be finite");
  }
  if (rows <= cols) {
    const auto r2c = assign_rows(cost, rows, cols);
    for (std::size_t i = 0; i < rows; ++i) out.pairs.emplace_back(i, r2c[i]);
  } else {
    std::vector<double> tr(cost.size());
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) tr[j * rows + i] = cost[i * cols + j];
    }
    const auto c2r = assign_rows(tr, cols, rows);
    for (std::size_t j = 0; j < cols; ++j) out.pairs.emplace_back(c2r[j], j);
    std::sort(out.pairs.begin(), out.pairs.end());
  }
  for (const auto& [i, j] : out.pairs) out.cost += cost[i * cols + j];
  return out;
}

std::optional<double> tracking_error(std::span<const Point2> truth, std::span<const Point2> estimates) {
  if (truth.empty() || estimates.empty()) return std::nullopt;
  std::vector<double> cost(truth.size() * estimates.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = 0; j < estimates.size(); ++j) {
      cost[i * estimates.size() + j] = std::hypot(truth[i].x - estimates[j].x, truth[i].y - estimates[j].y);
    }
  }
  const Assignment a = hungarian(cost, truth.size(), estimates.size());
  return a.cost / static_cast<double>(a.pairs.size());
}

CardinalityError cardinality_error(std::size_t true_count, std::size_t estimated_count) {
  CardinalityError e;
  e.absolute = true_count > estimated_count ? true_count - estimated_count : estimated_count - true_count;
  if (true_count > 0) e.relative = static_cast<double>(e.absolute) / static_cast<double>(true_count);
  return e;
}

RunSummary summarize_run(std::span<const StepRecord> steps, std::int64_t first_step) {
  RunSummary s;
  if (steps.empty()) return s;
  std::vector<double> times;
  double hyp = 0.0;
  double card = 0.0;
  std::size_t card_n = 0;
  double err = 0.0;
  std::size_t err_n = 0;
  for (const StepRecord& r : steps) {
    times.push_back(r.update_s);
    hyp += static_cast<double>(r.n_hypotheses);
    if (r.k < first_step) continue;
    const auto ce = cardinality_error(r.true_cardinality, r.est_cardinality);
    if (ce.relative) {
      card += *ce.relative;
      ++card_n;
    }
    if (r.track_err_m) {
      err += *r.track_err_m;
      ++err_n;
    }
  }
  double total = 0.0;
  for (double t : times) total += t;
  s.mean_update_s = total / static_cast<double>(times.size());
  std::sort(times.begin(), times.end());
  // Nearest-rank percentile.
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(times.size())));
  s.p95_update_s = times[std::max<std::size_t>(rank, 1) - 1];
  s.mean_hypotheses = hyp / static_cast<double>(steps.size());
  s.rel_card_err = card_n ? card / static_cast<double>(card_n) : std::numeric_limits<double>::quiet_NaN();
  s.track_err_m = err_n ? err / static_cast<double>(err_n) : std::numeric_limits<double>::quiet_NaN();
  return s;
}

MeanSem mean_sem(std::span<const double> values) {
  MeanSem r;
  r.n = values.size();
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(r.n);
  if (r.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sem = std::sqrt(ss / static_cast<double>(r.n - 1)) / std::sqrt(static_cast<double>(r.n));
  }
  return r;
}

std::vector<ConfigSummary> aggregate(std::span<const RunRecord> runs) {
  std::vector<ConfigSummary> out;
  std::vector<std::vector<const RunRecord*>> groups;
  for (const RunRecord& r : runs) {
    std::size_t g = 0;
    while (g < out.size() && !(out[g].n_objects == r.n_objects && out[g].h_max == r.h_max)) ++g;
    if (g == out.size()) {
      out.push_back({});
      out.back().n_objects = r.n_objects;
      out.back().h_max = r.h_max;
      groups.emplace_back();
    }
    groups[g].push_back(&r);
  }
  for (std::size_t g = 0; g < out.size(); ++g) {
    std::vector<double> t, c, e, h;
    for (const RunRecord* r : groups[g]) {
      t.push_back(r->summary.mean_update_s);
      c.push_back(r->summary.rel_card_err);
      if (!std::isnan(r->summary.track_err_m)) e.push_back(r->summary.track_err_m);
      h.push_back(r->summary.mean_hypotheses);
    }
    out[g].update_s = mean_sem(t);
    out[g].rel_card_err = mean_sem(c);
    out[g].track_err_m = mean_sem(e);
    out[g].hypotheses = mean_sem(h);
  }
  return out;
}

}  // namespace glmb
