#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "trendband/errors.hpp"
#include "trendband/estimator.hpp"
#include "trendband/parallel.hpp"
#include "trendband/rng.hpp"
#include "trendband/series.hpp"

namespace trendband {

// Wild bootstrap variants for the trend regression. Residuals of an
// oversmoothed fit m~ (bandwidth h~ > h) are multiplied by dependent
// Gaussian multipliers and re-smoothed with h; the missing pattern is copied
// unchanged into every replicate.

enum class BootstrapMethod { AWB, DWB, WB };

// gamma = theta^(1/ell): converts a block-length parameter ell into the AR
// coefficient of the AWB multipliers (and back).
inline double gamma_from_ell(double theta, double ell) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("gamma_from_ell: theta must lie in (0,1)");
  if (!(ell > 0.0)) throw std::invalid_argument("gamma_from_ell: ell must be positive");
  return std::pow(theta, 1.0 / ell);
}

inline double ell_from_gamma(double theta, double gamma) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("ell_from_gamma: theta must lie in (0,1)");
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("ell_from_gamma: gamma must lie in (0,1)");
  return std::log(theta) / std::log(gamma);
}

struct BootstrapConfig {
  BootstrapMethod method = BootstrapMethod::AWB;
  std::optional<double> gamma;   // AWB/WB tuning, in [0,1)
  std::optional<double> theta;   // alternative tuning via gamma = theta^(1/ell)
  std::optional<double> ell;     // block length (DWB; AWB via theta)
  std::size_t B = 999;
  double h = 0.0;
  double h_tilde = 0.0;          // 0 means the default oversmoothing 2 h^(5/9)
  std::uint64_t seed = 0;

  double resolved_h_tilde() const {
    return h_tilde > 0.0 ? h_tilde : 2.0 * std::pow(h, 5.0 / 9.0);
  }

  double resolved_gamma() const {
    switch (method) {
      case BootstrapMethod::WB:
        return 0.0;
      case BootstrapMethod::AWB:
        return gamma ? *gamma : gamma_from_ell(*theta, *ell);
      case BootstrapMethod::DWB:
        throw std::invalid_argument("resolved_gamma: DWB has no AR parameter");
    }
    throw std::invalid_argument("resolved_gamma: unknown method");
  }

  double resolved_ell() const {
    if (ell) return *ell;
    return ell_from_gamma(theta.value_or(0.01), *gamma);
  }

  void validate() const {
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("BootstrapConfig: h must lie in (0,1)");
    const double ht = resolved_h_tilde();
    if (!(ht > h && ht < 1.0))
      throw std::invalid_argument("BootstrapConfig: oversmoothing requires h < h_tilde < 1");
    if (B < 2) throw std::invalid_argument("BootstrapConfig: B must be at least 2");
    switch (method) {
      case BootstrapMethod::AWB: {
        const bool has_pair = theta.has_value() && ell.has_value();
        if (gamma.has_value() == has_pair)
          throw std::invalid_argument("BootstrapConfig: AWB needs exactly one of gamma or (theta, ell)");
        const double g = resolved_gamma();
        if (!(g >= 0.0 && g < 1.0))
          throw std::invalid_argument("BootstrapConfig: AWB gamma must lie in [0,1)");
        break;
      }
      case BootstrapMethod::DWB: {
        if (!ell && !gamma)
          throw std::invalid_argument("BootstrapConfig: DWB needs ell, or gamma to convert");
        if (!(resolved_ell() >= 1.0))
          throw std::invalid_argument("BootstrapConfig: DWB block length must be >= 1");
        break;
      }
      case BootstrapMethod::WB:
        break;
    }
  }
};

// Stationary AR(1) multipliers: xi_1 ~ N(0,1), xi_t = gamma xi_{t-1} + nu_t,
// nu_t iid N(0, 1-gamma^2). gamma = 0 gives the plain wild bootstrap.
inline std::vector<double> awb_multipliers(std::size_t n, double gamma, Rng& rng) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("awb_multipliers: gamma must lie in [0,1)");
  std::vector<double> xi(n);
  if (n == 0) return xi;
  std::normal_distribution<double> std_normal(0.0, 1.0);
  xi[0] = std_normal(rng);
  const double nu_sd = std::sqrt(1.0 - gamma * gamma);
  for (std::size_t t = 1; t < n; ++t) xi[t] = gamma * xi[t - 1] + nu_sd * std_normal(rng);
  return xi;
}

namespace detail {

// max(0, 1 - |x|): the Bartlett kernel. Positive semidefinite, so the banded
// multiplier covariance below always admits a Cholesky factor up to roundoff.
inline double bartlett(double x) { return std::max(0.0, 1.0 - std::abs(x)); }

// Lower Cholesky factor of the n x n covariance C(s,t) = bartlett((s-t)/ell),
// stored banded: entry(i, d) = L(i, i-d) for d = 0..band. The band never
// widens, so the factored multipliers are exactly independent beyond it.
class BandedCholesky {
 public:
  BandedCholesky(std::size_t n, double ell) : n_(n) {
    band_ = 0;
    while (band_ + 1 < n_ && bartlett(static_cast<double>(band_ + 1) / ell) > 0.0) ++band_;
    // Escalating diagonal loading as the repair path for roundoff-induced
    // indefiniteness; eigenvalue clipping would destroy the band structure.
    const double loads[] = {0.0, 1e-12, 1e-10, 1e-8, 1e-6};
    for (double load : loads) {
      if (try_factor(ell, load)) return;
    }
    throw NumericError("BandedCholesky: covariance factorization failed after diagonal loading");
  }

  std::size_t band() const { return band_; }

  // xi = L z for iid standard normal z: multipliers with the target banded
  // covariance.
  std::vector<double> apply(Rng& rng) const {
    std::normal_distribution<double> std_normal(0.0, 1.0);
    std::vector<double> z(n_), xi(n_);
    for (auto& v : z) v = std_normal(rng);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t dmax = std::min(i, band_);
      double acc = 0.0;
      for (std::size_t d = 0; d <= dmax; ++d) acc += entry(i, d) * z[i - d];
      xi[i] = acc;
    }
    return xi;
  }

  double factor_entry(std::size_t i, std::size_t j) const {  // L(i,j), j <= i
    if (i - j > band_) return 0.0;
    return entry(i, i - j);
  }

 private:
  double& entry(std::size_t i, std::size_t d) { return l_[i * (band_ + 1) + d]; }
  double entry(std::size_t i, std::size_t d) const { return l_[i * (band_ + 1) + d]; }

  bool try_factor(double ell, double load) {
    l_.assign(n_ * (band_ + 1), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t jlo = i > band_ ? i - band_ : 0;
      for (std::size_t j = jlo; j <= i; ++j) {
        double sum = bartlett(static_cast<double>(i - j) / ell);
        if (i == j) sum += load;
        for (std::size_t k = jlo; k < j; ++k)
          sum -= entry(i, i - k) * entry(j, j - k);
        if (j < i) {
          entry(i, i - j) = sum / entry(j, 0);
        } else {
          if (!(sum > 0.0)) return false;
          entry(i, 0) = std::sqrt(sum);
        }
      }
    }
    return true;
  }

  std::size_t n_;
  std::size_t band_;
  std::vector<double> l_;
};

}  // namespace detail

// l-dependent jointly Gaussian multipliers with cov(xi_s, xi_t) =
// bartlett((s-t)/ell): unit variance, exactly zero correlation once
// |s-t| >= ell.
inline std::vector<double> dwb_multipliers(std::size_t n, double ell, Rng& rng) {
  if (!(ell >= 1.0)) throw std::invalid_argument("dwb_multipliers: ell must be >= 1");
  detail::BandedCholesky factor(n, ell);
  return factor.apply(rng);
}

// Algorithm step: y*_t = m~(t/n) + xi_t hat z_t at observed t; missing
// indices stay missing with a zero placeholder.
inline ObservedSeries bootstrap_sample(const ObservedSeries& series,
                                       const std::vector<double>& residual_z,
                                       const std::vector<double>& m_tilde_at_t,
                                       const std::vector<double>& xi) {
  series.validate();
  const std::size_t n = series.size();
  if (residual_z.size() != n || m_tilde_at_t.size() != n || xi.size() != n)
    throw std::invalid_argument("bootstrap_sample: array length mismatch");
  ObservedSeries out;
  out.values.assign(n, 0.0);
  out.observed = series.observed;
  for (std::size_t i = 0; i < n; ++i)
    if (series.observed[i]) out.values[i] = m_tilde_at_t[i] + xi[i] * residual_z[i];
  return out;
}

// B x grid matrix of centered bootstrap statistics m*_b(tau) - m~(tau).
struct CenteredDraws {
  EvalGrid grid;
  std::size_t B = 0;
  std::vector<double> data;  // row-major, B rows
  std::vector<std::uint8_t> valid;

  double operator()(std::size_t b, std::size_t j) const { return data[b * grid.size() + j]; }
  double& at(std::size_t b, std::size_t j) { return data[b * grid.size() + j]; }
};

struct BootstrapRun {
  TrendCurve m_hat;    // bandwidth h
  TrendCurve m_tilde;  // oversmoothing bandwidth h~
  CenteredDraws draws;
};

// Full replicate loop. Deterministic given (series, config, grid): replicate
// b draws from substream (seed, kStreamReplicateBase + b) regardless of the
// worker count.
inline BootstrapRun run_bootstrap(const ObservedSeries& series, const BootstrapConfig& config,
                                  const EvalGrid& grid, const KernelSpec& kernel = {}) {
  series.validate();
  config.validate();
  const std::size_t n = series.size();
  const double h_tilde = config.resolved_h_tilde();

  BootstrapRun run;
  run.m_hat = local_constant_curve(series, config.h, grid, kernel);
  run.m_tilde = local_constant_curve(series, h_tilde, grid, kernel);
  const ResidualExtraction res = residuals(series, h_tilde, kernel);
  const LocalWeightPlan plan = build_weight_plan(series, config.h, grid, kernel);

  CenteredDraws& draws = run.draws;
  draws.grid = grid;
  draws.B = config.B;
  draws.valid.resize(grid.size());
  bool any_valid = false;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    draws.valid[j] = plan.valid[j] && run.m_tilde.valid[j] ? 1 : 0;
    any_valid = any_valid || draws.valid[j];
  }
  if (!any_valid) throw NumericError("run_bootstrap: insufficient data at every grid point");
  draws.data.assign(config.B * grid.size(), std::numeric_limits<double>::quiet_NaN());

  const bool dwb = config.method == BootstrapMethod::DWB;
  const double gamma = dwb ? 0.0 : config.resolved_gamma();
  std::optional<detail::BandedCholesky> factor;
  if (dwb) factor.emplace(n, config.resolved_ell());

  parallel_for(config.B, [&](std::size_t b) {
    Rng rng = make_rng(config.seed, kStreamReplicateBase + b);
    const std::vector<double> xi =
        dwb ? factor->apply(rng) : awb_multipliers(n, gamma, rng);
    std::vector<double> ystar(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      if (series.observed[i]) ystar[i] = res.m_tilde_at_t[i] + xi[i] * res.z[i];
    for (std::size_t j = 0; j < grid.size(); ++j)
      if (draws.valid[j])
        draws.at(b, j) = plan.evaluate(j, ystar) - run.m_tilde.estimate[j];
  });
  return run;
}

}  // namespace trendband
