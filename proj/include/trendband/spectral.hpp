#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "trendband/errors.hpp"
#include "trendband/parallel.hpp"
#include "trendband/series.hpp"

namespace trendband {

// Seasonal toolkit: Fourier-term regression on observed points and the
// Lomb-Scargle periodogram for irregular observation patterns. Time is in
// fractional years, so frequency j means j cycles per year.

struct FourierFit {
  std::size_t M = 0;
  std::vector<std::pair<double, double>> coefficients;  // (a_j, b_j), j = 1..M
  ObservedSeries residual_series;
  double mse = 0.0;
  std::size_t n_obs = 0;
};

struct Periodogram {
  std::vector<double> frequencies;  // cycles per unit time
  std::vector<double> power;
};

namespace detail {

// Gaussian elimination with partial pivoting; a is row-major p x p and both
// arguments are destroyed. Throws NumericError on (near-)singular systems.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                       std::size_t p) {
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r)
      if (std::abs(a[r * p + col]) > std::abs(a[pivot * p + col])) pivot = r;
    if (std::abs(a[pivot * p + col]) < 1e-12)
      throw NumericError("solve_dense: rank-deficient design");
    if (pivot != col) {
      for (std::size_t cc = 0; cc < p; ++cc) std::swap(a[pivot * p + cc], a[col * p + cc]);
      std::swap(b[pivot], b[col]);
    }
    const double d = a[col * p + col];
    for (std::size_t r = col + 1; r < p; ++r) {
      const double f = a[r * p + col] / d;
      if (f == 0.0) continue;
      for (std::size_t cc = col; cc < p; ++cc) a[r * p + cc] -= f * a[col * p + cc];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(p);
  for (std::size_t ri = p; ri-- > 0;) {
    double acc = b[ri];
    for (std::size_t cc = ri + 1; cc < p; ++cc) acc -= a[ri * p + cc] * x[cc];
    x[ri] = acc / a[ri * p + ri];
  }
  return x;
}

}  // namespace detail

// Least squares of x_t on {cos(2 j pi t), sin(2 j pi t)}_{j=1..M} over
// observed points only. No intercept, matching the seasonal regression as
// printed; adding one would only shift the residuals by a constant.
inline FourierFit fourier_fit(const ObservedSeries& series,
                              const std::vector<double>& time_in_years, std::size_t M) {
  series.validate();
  if (M < 1) throw std::invalid_argument("fourier_fit: M must be at least 1");
  const std::size_t n = series.size();
  if (time_in_years.size() != n)
    throw std::invalid_argument("fourier_fit: time array length mismatch");
  const std::size_t n_obs = series.observed_count();
  if (n_obs < 2 * M)
    throw std::invalid_argument("fourier_fit: need at least 2M observed points");

  const std::size_t p = 2 * M;
  std::vector<double> a(p * p, 0.0), rhs(p, 0.0), reg(p);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t i = 0; i < n; ++i) {
    if (!series.observed[i]) continue;
    const double t = time_in_years[i];
    for (std::size_t j = 1; j <= M; ++j) {
      reg[2 * (j - 1)] = std::cos(two_pi * static_cast<double>(j) * t);
      reg[2 * (j - 1) + 1] = std::sin(two_pi * static_cast<double>(j) * t);
    }
    const double x = series.values[i];
    for (std::size_t r = 0; r < p; ++r) {
      rhs[r] += reg[r] * x;
      for (std::size_t c = r; c < p; ++c) a[r * p + c] += reg[r] * reg[c];
    }
  }
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t c = 0; c < r; ++c) a[r * p + c] = a[c * p + r];

  const std::vector<double> coef = detail::solve_dense(std::move(a), std::move(rhs), p);

  FourierFit fit;
  fit.M = M;
  fit.n_obs = n_obs;
  for (std::size_t j = 0; j < M; ++j)
    fit.coefficients.emplace_back(coef[2 * j], coef[2 * j + 1]);

  fit.residual_series.values.assign(n, 0.0);
  fit.residual_series.observed = series.observed;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!series.observed[i]) continue;
    const double t = time_in_years[i];
    double fitted = 0.0;
    for (std::size_t j = 1; j <= M; ++j) {
      fitted += coef[2 * (j - 1)] * std::cos(two_pi * static_cast<double>(j) * t) +
                coef[2 * (j - 1) + 1] * std::sin(two_pi * static_cast<double>(j) * t);
    }
    const double resid = series.values[i] - fitted;
    fit.residual_series.values[i] = resid;
    rss += resid * resid;
  }
  fit.mse = rss / static_cast<double>(n_obs);
  return fit;
}

struct InfoCriteria {
  double aic;
  double bic;
  double mse;
};

// Full Gaussian log-likelihood convention with 2M+1 parameters (2M
// coefficients plus the residual variance):
//   aic = n ln(2 pi mse) + n + 2 (2M+1)
//   bic = n ln(2 pi mse) + n + ln(n) (2M+1)
// Only orderings/argmins are comparable across software conventions.
inline InfoCriteria info_criteria(const FourierFit& fit) {
  if (!(fit.mse > 0.0)) throw NumericError("info_criteria: undefined at mse = 0");
  const auto n = static_cast<double>(fit.n_obs);
  const auto params = static_cast<double>(2 * fit.M + 1);
  const double core = n * std::log(2.0 * std::numbers::pi * fit.mse) + n;
  return InfoCriteria{core + 2.0 * params, core + std::log(n) * params, fit.mse};
}

// Classical Lomb-Scargle periodogram. With w = 2 pi f, mean-centered values
// d_i = x_i - xbar and the per-frequency offset
//   tan(2 w tau) = sum sin(2 w t_i) / sum cos(2 w t_i),
// the power at f is
//   P(f) = (1 / 2 s^2) [ (sum d_i cos w(t_i-tau))^2 / sum cos^2 w(t_i-tau)
//                      + (sum d_i sin w(t_i-tau))^2 / sum sin^2 w(t_i-tau) ].
// Convention notes: s^2 is the 1/(N-1) sample variance (some sources use
// 1/N, rescaling power by (N-1)/N), and the variance normalization makes the
// white-noise power approximately Exp(1) (unnormalized spectral-density
// conventions omit the 1/s^2).
inline Periodogram lomb_scargle(const ObservedSeries& series,
                                const std::vector<double>& time_in_years,
                                const std::vector<double>& frequencies) {
  series.validate();
  const std::size_t n = series.size();
  if (time_in_years.size() != n)
    throw std::invalid_argument("lomb_scargle: time array length mismatch");
  for (double f : frequencies)
    if (!(f > 0.0)) throw std::invalid_argument("lomb_scargle: frequencies must be positive");

  std::vector<double> t, x;
  for (std::size_t i = 0; i < n; ++i) {
    if (!series.observed[i]) continue;
    t.push_back(time_in_years[i]);
    x.push_back(series.values[i]);
  }
  const std::size_t m = t.size();
  if (m < 3) throw std::invalid_argument("lomb_scargle: need at least 3 observed points");
  bool spread = false;
  for (std::size_t i = 1; i < m; ++i) spread = spread || t[i] != t[0];
  if (!spread) throw std::invalid_argument("lomb_scargle: degenerate time array");

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(m);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(m - 1);

  Periodogram pg;
  pg.frequencies = frequencies;
  pg.power.assign(frequencies.size(), 0.0);
  if (var < 1e-300) return pg;  // constant series: zero power by convention

  constexpr double two_pi = 2.0 * std::numbers::pi;
  parallel_for(frequencies.size(), [&](std::size_t fi) {
    const double omega = two_pi * frequencies[fi];
    double s2 = 0.0, c2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      s2 += std::sin(2.0 * omega * t[i]);
      c2 += std::cos(2.0 * omega * t[i]);
    }
    const double tau_off = std::atan2(s2, c2) / (2.0 * omega);
    double cx = 0.0, sx = 0.0, cc = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double arg = omega * (t[i] - tau_off);
      const double c = std::cos(arg);
      const double s = std::sin(arg);
      const double d = x[i] - mean;
      cx += c * d;
      sx += s * d;
      cc += c * c;
      ss += s * s;
    }
    double power = 0.0;
    if (cc > 1e-12) power += cx * cx / cc;
    if (ss > 1e-12) power += sx * sx / ss;
    pg.power[fi] = 0.5 * power / var;
  });
  return pg;
}

}  // namespace trendband
