#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "trendband/bootstrap.hpp"
#include "trendband/errors.hpp"
#include "trendband/series.hpp"

namespace trendband {

// Confidence bands from centered bootstrap draws. Intervals are
// quantile-reflected around the trend estimate:
//   [m(tau) - q_{1-a/2}(tau), m(tau) - q_{a/2}(tau)].

struct Band {
  EvalGrid grid;
  std::vector<double> center;
  std::vector<double> lower;
  std::vector<double> upper;
  double alpha = 0.0;
  std::optional<double> alpha_s;       // pointwise level of a simultaneous band
  std::optional<double> sim_fraction;  // achieved P* fraction at alpha_s
  std::vector<std::uint8_t> valid;
};

// q_alpha = inf{u : P*[draw <= u] >= alpha}, i.e. the order statistic
// x_(ceil(alpha B)). The ceil carries 1e-9 slack so decimal alphas hit the
// exact-rational index.
inline double empirical_quantile(std::span<const double> sorted_draws, double alpha) {
  if (sorted_draws.empty()) throw std::invalid_argument("empirical_quantile: empty draws");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("empirical_quantile: alpha must lie in (0,1]");
  const auto B = static_cast<double>(sorted_draws.size());
  auto idx = static_cast<std::size_t>(std::ceil(alpha * B - 1e-9));
  idx = std::clamp<std::size_t>(idx, 1, sorted_draws.size());
  return sorted_draws[idx - 1];
}

namespace detail {

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
}

inline std::vector<double> sorted_column(const CenteredDraws& draws, std::size_t j) {
  std::vector<double> col(draws.B);
  for (std::size_t b = 0; b < draws.B; ++b) col[b] = draws(b, j);
  std::sort(col.begin(), col.end());
  return col;
}

}  // namespace detail

inline Band pointwise_band(const CenteredDraws& draws, const TrendCurve& m_hat, double alpha) {
  if (!(draws.grid == m_hat.grid))
    throw std::invalid_argument("pointwise_band: draws and estimate grids differ");
  detail::check_alpha(alpha);

  const std::size_t m = draws.grid.size();
  Band band;
  band.grid = draws.grid;
  band.alpha = alpha;
  band.center.assign(m, std::numeric_limits<double>::quiet_NaN());
  band.lower.assign(m, std::numeric_limits<double>::quiet_NaN());
  band.upper.assign(m, std::numeric_limits<double>::quiet_NaN());
  band.valid.assign(m, 0);

  for (std::size_t j = 0; j < m; ++j) {
    if (!draws.valid[j] || !m_hat.valid[j]) continue;
    const std::vector<double> col = detail::sorted_column(draws, j);
    const double q_lo = empirical_quantile(col, alpha / 2.0);
    const double q_hi = empirical_quantile(col, 1.0 - alpha / 2.0);
    band.center[j] = m_hat.estimate[j];
    band.lower[j] = m_hat.estimate[j] - q_hi;
    band.upper[j] = m_hat.estimate[j] - q_lo;
    band.valid[j] = 1;
  }
  return band;
}

// Three-step simultaneous band over the subset (indices into draws.grid):
// for every alpha_p on the grid {1/B, ..., floor(alpha B)/B} compute the
// fraction of replicates whose centered draw lies inside the pointwise
// alpha_p interval at every subset point, pick alpha_s minimizing
// |fraction - (1-alpha)|, largest alpha_p on ties (shortest band), and
// reflect the alpha_s quantiles around m_hat. Subset points without valid
// draws are dropped (valid = 0 in the result) rather than failing the band.
inline Band simultaneous_band(const CenteredDraws& draws, const TrendCurve& m_hat, double alpha,
                              std::vector<std::size_t> subset) {
  if (!(draws.grid == m_hat.grid))
    throw std::invalid_argument("simultaneous_band: draws and estimate grids differ");
  detail::check_alpha(alpha);
  if (subset.empty()) throw std::invalid_argument("simultaneous_band: empty subset");
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  if (subset.back() >= draws.grid.size())
    throw std::invalid_argument("simultaneous_band: subset index out of range");

  const std::size_t B = draws.B;
  std::vector<std::size_t> active;  // subset positions with usable draws
  for (std::size_t s = 0; s < subset.size(); ++s)
    if (draws.valid[subset[s]] && m_hat.valid[subset[s]]) active.push_back(s);
  if (active.empty())
    throw NumericError("simultaneous_band: no valid grid point in the requested subset");

  std::vector<std::vector<double>> sorted(active.size());
  for (std::size_t a = 0; a < active.size(); ++a)
    sorted[a] = detail::sorted_column(draws, subset[active[a]]);

  // alpha_p = j/B; quantile ranks stay integral: ceil(j/2) and B - floor(j/2).
  const auto jmax =
      static_cast<std::size_t>(std::floor(alpha * static_cast<double>(B) + 1e-9));
  if (jmax < 1)
    throw NumericError("simultaneous_band: alpha below 1/B leaves no feasible alpha_p");

  std::size_t best_j = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  double best_fraction = 0.0;
  std::vector<double> q_lo(active.size()), q_hi(active.size());
  for (std::size_t j = 1; j <= jmax; ++j) {
    const std::size_t lo_idx = (j + 1) / 2;     // ceil(j/2), 1-based
    const std::size_t hi_idx = B - j / 2;       // B - floor(j/2), 1-based
    for (std::size_t a = 0; a < active.size(); ++a) {
      q_lo[a] = sorted[a][lo_idx - 1];
      q_hi[a] = sorted[a][hi_idx - 1];
    }
    std::size_t count = 0;
    for (std::size_t b = 0; b < B; ++b) {
      bool inside = true;
      for (std::size_t a = 0; a < active.size(); ++a) {
        const double d = draws(b, subset[active[a]]);
        if (d < q_lo[a] || d > q_hi[a]) {
          inside = false;
          break;
        }
      }
      count += inside ? 1 : 0;
    }
    const double fraction = static_cast<double>(count) / static_cast<double>(B);
    const double dist = std::abs(fraction - (1.0 - alpha));
    if (dist <= best_dist) {  // <= so the largest alpha_p wins ties
      best_dist = dist;
      best_j = j;
      best_fraction = fraction;
    }
  }

  Band band;
  {
    std::vector<double> pts(subset.size());
    for (std::size_t s = 0; s < subset.size(); ++s) pts[s] = draws.grid[subset[s]];
    band.grid = EvalGrid(std::move(pts));
  }
  band.alpha = alpha;
  band.alpha_s = static_cast<double>(best_j) / static_cast<double>(B);
  band.sim_fraction = best_fraction;
  band.center.assign(subset.size(), std::numeric_limits<double>::quiet_NaN());
  band.lower.assign(subset.size(), std::numeric_limits<double>::quiet_NaN());
  band.upper.assign(subset.size(), std::numeric_limits<double>::quiet_NaN());
  band.valid.assign(subset.size(), 0);

  const std::size_t lo_idx = (best_j + 1) / 2;
  const std::size_t hi_idx = B - best_j / 2;
  for (std::size_t a = 0; a < active.size(); ++a) {
    const std::size_t s = active[a];
    const std::size_t g = subset[s];
    band.center[s] = m_hat.estimate[g];
    band.lower[s] = m_hat.estimate[g] - sorted[a][hi_idx - 1];
    band.upper[s] = m_hat.estimate[g] - sorted[a][lo_idx - 1];
    band.valid[s] = 1;
  }
  return band;
}

// Evaluation sets of the coverage study: U_i(h) = {i/5 - h + j/100 :
// j = 0..floor(200h)}, G_sub = U_1 u U_4, G = U_1 u ... u U_4. The floor
// carries 1e-9 slack (200*0.06 must count as 12).
struct EvalSets {
  EvalGrid g_sub;
  EvalGrid g;
  std::vector<std::size_t> g_sub_indices_in_g;
};

inline EvalSets build_eval_sets(double h) {
  if (!(h > 0.0 && h < 0.2)) throw std::invalid_argument("build_eval_sets: need 0 < h < 0.2");
  const auto jmax = static_cast<std::size_t>(std::floor(200.0 * h + 1e-9));

  auto dedupe_sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end(),
                        [](double a, double b) { return std::abs(a - b) < 1e-12; }),
            v.end());
    return v;
  };

  std::vector<double> sub, all;
  for (int i = 1; i <= 4; ++i) {
    for (std::size_t j = 0; j <= jmax; ++j) {
      const double p = static_cast<double>(i) / 5.0 - h + static_cast<double>(j) / 100.0;
      all.push_back(p);
      if (i == 1 || i == 4) sub.push_back(p);
    }
  }

  EvalSets sets;
  sets.g = EvalGrid(dedupe_sorted(std::move(all)));
  sets.g_sub = EvalGrid(dedupe_sorted(std::move(sub)));

  const auto& gp = sets.g.points();
  for (double p : sets.g_sub.points()) {
    auto it = std::lower_bound(gp.begin(), gp.end(), p - 1e-12);
    if (it == gp.end() || std::abs(*it - p) > 1e-12)
      throw NumericError("build_eval_sets: G_sub point missing from G");
    sets.g_sub_indices_in_g.push_back(static_cast<std::size_t>(it - gp.begin()));
  }
  return sets;
}

}  // namespace trendband
