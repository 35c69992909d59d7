#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "trendband/errors.hpp"
#include "trendband/kernel.hpp"
#include "trendband/series.hpp"

namespace trendband {

// Local constant (Nadaraya-Watson) and local linear trend estimation with
// missing data. All estimators weight observation t by
// k_t(tau) = K((t/n - tau)/h) D_t, so only observed points ever contribute.

// A grid point is insufficient-data when fewer than kMinWindowPoints observed
// points carry positive kernel weight, or the total weight falls below
// kMinWeightSum. Two points is the minimum for a meaningful local mean with
// nondegenerate leave-out behavior.
inline constexpr std::size_t kMinWindowPoints = 2;
inline constexpr double kMinWeightSum = 1e-10;

// Weighted 2x2 normal matrices worse conditioned than this are treated as
// insufficient data by the local linear estimator.
inline constexpr double kMaxConditionNumber = 1e12;

namespace detail {

// 1-based inclusive index range of observations whose rescaled time can fall
// inside the kernel support around tau. Slightly over-inclusive; zero-weight
// entries are filtered by the accumulation itself.
struct WindowBounds {
  std::size_t lo, hi;  // empty iff lo > hi
};

inline WindowBounds kernel_window(std::size_t n, double tau, double h, double support) {
  const double nd = static_cast<double>(n);
  double lo_d = std::ceil(nd * (tau - h * support) - 1e-9);
  double hi_d = std::floor(nd * (tau + h * support) + 1e-9);
  long long lo = std::max(1LL, static_cast<long long>(lo_d));
  long long hi = std::min(static_cast<long long>(n), static_cast<long long>(hi_d));
  if (lo > hi) return {1, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

struct NwAccumulation {
  double num = 0.0;
  double den = 0.0;
  std::size_t points = 0;  // observed entries with positive weight
};

// Single accumulation routine shared by every local-constant path so that
// pointwise calls, curves and precomputed weight plans agree bit for bit.
// Indices in [skip_lo, skip_hi] (1-based) are excluded (leave-(2k+1)-out).
inline NwAccumulation nw_accumulate(const ObservedSeries& s, double h, double tau,
                                    const KernelSpec& kernel, std::size_t skip_lo = 1,
                                    std::size_t skip_hi = 0) {
  const std::size_t n = s.size();
  const double nd = static_cast<double>(n);
  const WindowBounds w = kernel_window(n, tau, h, kernel.support_halfwidth);
  NwAccumulation acc;
  for (std::size_t t = w.lo; t <= w.hi; ++t) {
    if (t >= skip_lo && t <= skip_hi) continue;
    if (!s.observed[t - 1]) continue;
    const double weight = eval_kernel(kernel, (static_cast<double>(t) / nd - tau) / h);
    if (weight <= 0.0) continue;
    acc.num += weight * s.values[t - 1];
    acc.den += weight;
    ++acc.points;
  }
  return acc;
}

inline bool nw_sufficient(const NwAccumulation& acc) {
  return acc.points >= kMinWindowPoints && acc.den >= kMinWeightSum;
}

inline void check_bandwidth(double h) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("bandwidth must lie in (0,1)");
}

inline void check_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0,1)");
}

}  // namespace detail

inline std::optional<double> local_constant(const ObservedSeries& series, double h, double tau,
                                            const KernelSpec& kernel = {}) {
  series.validate();
  detail::check_bandwidth(h);
  detail::check_tau(tau);
  const auto acc = detail::nw_accumulate(series, h, tau, kernel);
  if (!detail::nw_sufficient(acc)) return std::nullopt;
  return acc.num / acc.den;
}

inline TrendCurve local_constant_curve(const ObservedSeries& series, double h,
                                       const EvalGrid& grid, const KernelSpec& kernel = {}) {
  series.validate();
  detail::check_bandwidth(h);
  TrendCurve curve;
  curve.grid = grid;
  curve.estimate.resize(grid.size());
  curve.valid.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const auto acc = detail::nw_accumulate(series, h, grid[j], kernel);
    if (detail::nw_sufficient(acc)) {
      curve.estimate[j] = acc.num / acc.den;
      curve.valid[j] = 1;
    } else {
      curve.estimate[j] = std::numeric_limits<double>::quiet_NaN();
      curve.valid[j] = 0;
    }
  }
  return curve;
}

struct LocalLinearFit {
  double level;
  double slope;
};

// Weighted least squares line fit at tau with regressors (1, t/n - tau).
// Solved in slope-centered coordinates for stability; the condition check is
// on the raw weighted normal matrix.
inline std::optional<LocalLinearFit> local_linear(const ObservedSeries& series, double h,
                                                  double tau, const KernelSpec& kernel = {}) {
  series.validate();
  detail::check_bandwidth(h);
  detail::check_tau(tau);

  const std::size_t n = series.size();
  const double nd = static_cast<double>(n);
  const auto w = detail::kernel_window(n, tau, h, kernel.support_halfwidth);

  double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
  std::size_t points = 0;
  for (std::size_t t = w.lo; t <= w.hi; ++t) {
    if (!series.observed[t - 1]) continue;
    const double dx = static_cast<double>(t) / nd - tau;
    const double weight = eval_kernel(kernel, dx / h);
    if (weight <= 0.0) continue;
    const double y = series.values[t - 1];
    s0 += weight;
    s1 += weight * dx;
    s2 += weight * dx * dx;
    t0 += weight * y;
    t1 += weight * dx * y;
    ++points;
  }
  if (points < kMinWindowPoints || s0 < kMinWeightSum) return std::nullopt;

  // Eigenvalues of [[s0, s1], [s1, s2]].
  const double tr = s0 + s2;
  const double det = s0 * s2 - s1 * s1;
  const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
  const double lam_max = 0.5 * (tr + disc);
  const double lam_min = 0.5 * (tr - disc);
  if (!(lam_min > 0.0) || lam_max / lam_min > kMaxConditionNumber) return std::nullopt;

  const double dbar = s1 / s0;
  const double s2c = s2 - s1 * dbar;  // sum w (dx - dbar)^2
  const double t1c = t1 - t0 * dbar;  // sum w (dx - dbar) y
  const double slope = t1c / s2c;
  const double level = (t0 - slope * s1) / s0;
  return LocalLinearFit{level, slope};
}

// p_hat(tau) = (nh)^{-1} sum_t k_t(tau) D_t, the implicit estimator of the
// observation probability p(tau). Zero is a legal value.
inline double observed_probability(const ObservedSeries& series, double h, double tau,
                                   const KernelSpec& kernel = {}) {
  series.validate();
  detail::check_bandwidth(h);
  detail::check_tau(tau);
  const auto acc = detail::nw_accumulate(series, h, tau, kernel);
  return acc.den / (static_cast<double>(series.size()) * h);
}

// Leave-(2k+1)-out local constant estimator at tau = t_center/n: all indices
// with |t - t_center| <= k are excluded from the fit.
inline std::optional<double> local_constant_leave_out(const ObservedSeries& series, double h,
                                                      std::size_t t_center, std::size_t k,
                                                      const KernelSpec& kernel = {}) {
  const std::size_t n = series.size();
  if (t_center < 1 || t_center > n)
    throw std::invalid_argument("local_constant_leave_out: center index out of range");
  detail::check_bandwidth(h);
  const double tau = static_cast<double>(t_center) / static_cast<double>(n);
  const std::size_t skip_lo = t_center > k ? t_center - k : 1;
  const std::size_t skip_hi = t_center + k;
  const auto acc = detail::nw_accumulate(series, h, tau, kernel, skip_lo, skip_hi);
  if (!detail::nw_sufficient(acc)) return std::nullopt;
  return acc.num / acc.den;
}

struct MCVResult {
  double selected_h;
  std::map<double, double> criterion_by_h;  // non-finite where no point contributed
};

// Modified cross-validation: mean squared leave-(2k+1)-out prediction error
// over observed points. Points whose leave-out window is insufficient are
// skipped and the criterion renormalized by the contributing count, so the
// criterion stays comparable across candidate bandwidths under heavy
// missingness. k = 0 is ordinary leave-one-out cross-validation.
inline MCVResult mcv_select(const ObservedSeries& series, std::size_t k,
                            const std::vector<double>& candidates,
                            const KernelSpec& kernel = {}) {
  series.validate();
  if (candidates.empty()) throw std::invalid_argument("mcv_select: no candidate bandwidths");
  for (double h : candidates) detail::check_bandwidth(h);

  const std::size_t n = series.size();
  MCVResult result;
  result.selected_h = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();

  for (double h : candidates) {
    double sum_sq = 0.0;
    std::size_t contributing = 0;
    for (std::size_t t = 1; t <= n; ++t) {
      if (!series.observed[t - 1]) continue;
      const double tau = static_cast<double>(t) / static_cast<double>(n);
      const std::size_t skip_lo = t > k ? t - k : 1;
      const auto acc = detail::nw_accumulate(series, h, tau, kernel, skip_lo, t + k);
      if (!detail::nw_sufficient(acc)) continue;
      const double err = acc.num / acc.den - series.values[t - 1];
      sum_sq += err * err;
      ++contributing;
    }
    const double criterion = contributing > 0
                                 ? sum_sq / static_cast<double>(contributing)
                                 : std::numeric_limits<double>::infinity();
    result.criterion_by_h[h] = criterion;
    if (std::isfinite(criterion) && criterion < best) {
      best = criterion;
      result.selected_h = h;
    }
  }
  if (!std::isfinite(best))
    throw NumericError("mcv_select: criterion non-finite for every candidate bandwidth");
  return result;
}

struct ResidualExtraction {
  std::vector<double> z;             // hat z_t = y_t - m~(t/n) at observed t, 0 elsewhere
  std::vector<double> m_tilde_at_t;  // oversmoothed fit at t/n (observed t), 0 at missing
  std::vector<std::uint8_t> fit_ok;  // observed and the h~ window fit succeeded
};

// Algorithm step: residuals of the oversmoothed trend fit. Observed points
// where the fit is insufficient-data get z_t = 0 with fit_ok = 0; there the
// bootstrap falls back to m~(t/n) := y_t so the point reproduces itself in
// every replicate rather than dropping out of the missing pattern.
inline ResidualExtraction residuals(const ObservedSeries& series, double h_tilde,
                                    const KernelSpec& kernel = {}) {
  series.validate();
  detail::check_bandwidth(h_tilde);

  const std::size_t n = series.size();
  ResidualExtraction out;
  out.z.assign(n, 0.0);
  out.m_tilde_at_t.assign(n, 0.0);
  out.fit_ok.assign(n, 0);

  std::size_t observed = 0, insufficient = 0;
  for (std::size_t t = 1; t <= n; ++t) {
    if (!series.observed[t - 1]) continue;
    ++observed;
    const double tau = static_cast<double>(t) / static_cast<double>(n);
    const auto acc = detail::nw_accumulate(series, h_tilde, tau, kernel);
    if (detail::nw_sufficient(acc)) {
      const double fit = acc.num / acc.den;
      out.m_tilde_at_t[t - 1] = fit;
      out.z[t - 1] = series.values[t - 1] - fit;
      out.fit_ok[t - 1] = 1;
    } else {
      out.m_tilde_at_t[t - 1] = series.values[t - 1];
      ++insufficient;
    }
  }
  if (2 * insufficient > observed)
    throw NumericError("residuals: oversmoothed fit insufficient at more than 50% of observed points");
  return out;
}

// Precomputed per-grid-point kernel weights over observed indices. The plan
// depends only on (missing pattern, h, grid), so one plan serves every
// bootstrap replicate; evaluation reproduces local_constant exactly.
struct LocalWeightPlan {
  std::vector<std::size_t> offsets;  // size m+1
  std::vector<std::size_t> index;    // 0-based observed indices, ascending per point
  std::vector<double> weight;
  std::vector<double> weight_sum;    // per grid point
  std::vector<std::uint8_t> valid;

  std::size_t points() const { return weight_sum.size(); }

  double evaluate(std::size_t j, const std::vector<double>& values) const {
    double num = 0.0;
    for (std::size_t k = offsets[j]; k < offsets[j + 1]; ++k)
      num += weight[k] * values[index[k]];
    return num / weight_sum[j];
  }
};

inline LocalWeightPlan build_weight_plan(const ObservedSeries& series, double h,
                                         const EvalGrid& grid, const KernelSpec& kernel = {}) {
  series.validate();
  detail::check_bandwidth(h);
  const std::size_t n = series.size();
  const double nd = static_cast<double>(n);

  LocalWeightPlan plan;
  plan.offsets.reserve(grid.size() + 1);
  plan.offsets.push_back(0);
  plan.weight_sum.reserve(grid.size());
  plan.valid.reserve(grid.size());

  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double tau = grid[j];
    const auto w = detail::kernel_window(n, tau, h, kernel.support_halfwidth);
    double den = 0.0;
    std::size_t points = 0;
    for (std::size_t t = w.lo; t <= w.hi; ++t) {
      if (!series.observed[t - 1]) continue;
      const double weight = eval_kernel(kernel, (static_cast<double>(t) / nd - tau) / h);
      if (weight <= 0.0) continue;
      plan.index.push_back(t - 1);
      plan.weight.push_back(weight);
      den += weight;
      ++points;
    }
    plan.offsets.push_back(plan.index.size());
    plan.weight_sum.push_back(den);
    plan.valid.push_back(points >= kMinWindowPoints && den >= kMinWeightSum ? 1 : 0);
  }
  return plan;
}

}  // namespace trendband
