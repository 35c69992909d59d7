#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "trendband/bands.hpp"
#include "trendband/bootstrap.hpp"
#include "trendband/errors.hpp"
#include "trendband/kernel.hpp"
#include "trendband/parallel.hpp"
#include "trendband/rng.hpp"
#include "trendband/series.hpp"

namespace trendband {

// Coverage-study data generating processes and the Monte Carlo engine:
// y_t = m(t/n) + sigma(t/n) u_t with a smooth-transition trend, ARMA(1,1)
// errors normalized to a fixed signal-to-noise ratio, optional cyclical
// volatility and a first-order Markov missingness chain.

// G(tau, lambda, c) = (1 + exp{-lambda (tau - c)})^{-1}
inline double logistic_transition(double tau, double lambda, double c) {
  if (!(lambda > 0.0)) throw std::invalid_argument("logistic_transition: lambda must be positive");
  return 1.0 / (1.0 + std::exp(-lambda * (tau - c)));
}

// m(tau) = beta1 tau + beta2 tau G(tau, lambda, c)
inline double trend_value(double tau, double beta1, double beta2, double lambda, double c) {
  return beta1 * tau + beta2 * tau * logistic_transition(tau, lambda, c);
}

// sigma(tau) = sigma0 + (sigma* - sigma0) tau + a cos(2 pi k tau)
inline double volatility(double tau, double sigma0, double sigma_star, double a, int k) {
  return sigma0 + (sigma_star - sigma0) * tau + a * std::cos(2.0 * std::numbers::pi * k * tau);
}

struct VolatilitySpec {
  enum class Kind { Constant, Cyclical };
  Kind kind = Kind::Constant;
  double sigma0 = 1.0;
  double sigma_star = 1.0;  // cyclical trend endpoint
  double a = 0.0;           // cycle amplitude
  int k = 0;                // cycles on [0,1]

  static VolatilitySpec constant(double sigma) {
    return {Kind::Constant, sigma, sigma, 0.0, 0};
  }
  static VolatilitySpec cyclical(double sigma0, double sigma_star, double a, int k) {
    return {Kind::Cyclical, sigma0, sigma_star, a, k};
  }

  double at(double tau) const {
    return kind == Kind::Constant ? sigma0 : volatility(tau, sigma0, sigma_star, a, k);
  }

  // Cyclical sigma must stay strictly positive (checked on a 1001-point
  // grid); a constant sigma may be zero, which degenerates to a noiseless
  // series.
  void validate() const {
    if (kind == Kind::Constant) {
      if (!(sigma0 >= 0.0))
        throw std::invalid_argument("VolatilitySpec: constant sigma must be nonnegative");
      return;
    }
    for (int i = 0; i <= 1000; ++i) {
      if (!(at(static_cast<double>(i) / 1000.0) > 0.0))
        throw std::invalid_argument("VolatilitySpec: sigma must be positive on [0,1]");
    }
  }
};

struct MissingSpec {
  enum class Kind { None, Markov };
  Kind kind = Kind::None;
  double p01 = 0.0;  // P(D_t = 1 | D_{t-1} = 0)
  double p11 = 0.0;  // P(D_t = 1 | D_{t-1} = 1)

  static MissingSpec none() { return {}; }
  static MissingSpec markov(double p01, double p11) {
    return {Kind::Markov, p01, p11};
  }

  // Stationary P(D = 1); 0.5 by convention when the chain has no unique
  // stationary law (p01 = 1 - p11 = 0).
  double stationary_observed() const {
    if (kind == Kind::None) return 1.0;
    const double denom = p01 + (1.0 - p11);
    return denom > 0.0 ? p01 / denom : 0.5;
  }

  void validate() const {
    if (kind == Kind::None) return;
    if (!(p01 >= 0.0 && p01 <= 1.0 && p11 >= 0.0 && p11 <= 1.0))
      throw std::invalid_argument("MissingSpec: transition probabilities must lie in [0,1]");
  }
};

// Innovation variance normalization: sigma_eps^2 = ((1-phi^2)/4) /
// (1+psi^2-2 phi psi), which fixes Var(u_t) = 1/4 for every pure AR and
// pure MA parameterization.
inline double arma_innovation_variance(double phi, double psi) {
  if (!(std::abs(phi) < 1.0))
    throw std::invalid_argument("arma_innovation_variance: |phi| must be < 1");
  return ((1.0 - phi * phi) / 4.0) / (1.0 + psi * psi - 2.0 * phi * psi);
}

// u_t = phi u_{t-1} + psi eps_{t-1} + eps_t with normalized Gaussian
// innovations. Stationary start via burn-in with a continuous eps stream.
inline std::vector<double> arma_errors(std::size_t n, double phi, double psi, Rng& rng) {
  const double sd = std::sqrt(arma_innovation_variance(phi, psi));
  const std::size_t burn = std::max<std::size_t>(
      200, static_cast<std::size_t>(std::ceil(50.0 / (1.0 - std::abs(phi)))));
  std::normal_distribution<double> std_normal(0.0, 1.0);
  std::vector<double> u(n);
  double u_prev = 0.0, eps_prev = 0.0;
  for (std::size_t t = 0; t < burn + n; ++t) {
    const double eps = sd * std_normal(rng);
    const double ut = phi * u_prev + psi * eps_prev + eps;
    if (t >= burn) u[t - burn] = ut;
    u_prev = ut;
    eps_prev = eps;
  }
  return u;
}

// First-order Markov chain for the observation indicator, started from its
// stationary distribution.
inline std::vector<std::uint8_t> markov_missing(std::size_t n, double p01, double p11, Rng& rng) {
  if (!(p01 >= 0.0 && p01 <= 1.0 && p11 >= 0.0 && p11 <= 1.0))
    throw std::invalid_argument("markov_missing: probabilities must lie in [0,1]");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::uint8_t> d(n);
  if (n == 0) return d;
  const double denom = p01 + (1.0 - p11);
  const double pi1 = denom > 0.0 ? p01 / denom : 0.5;
  d[0] = unif(rng) < pi1 ? 1 : 0;
  for (std::size_t t = 1; t < n; ++t) {
    const double p = d[t - 1] ? p11 : p01;
    d[t] = unif(rng) < p ? 1 : 0;
  }
  return d;
}

struct SimulationConfig {
  std::size_t n = 200;
  double beta1 = -1.0;
  double beta2 = 2.5;
  double lambda = 10.0;
  double c = 0.9;
  double phi = 0.0;
  double psi = 0.0;
  VolatilitySpec vol = VolatilitySpec::constant(1.0);
  MissingSpec missing = MissingSpec::none();
  std::size_t mc_reps = 1;
  BootstrapConfig bootstrap;
  double alpha = 0.05;

  // DGP fields only; simulate_series does not touch the bootstrap settings.
  void validate_dgp() const {
    if (n == 0) throw std::invalid_argument("SimulationConfig: n must be positive");
    if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("SimulationConfig: |phi| must be < 1");
    if (!(lambda > 0.0)) throw std::invalid_argument("SimulationConfig: lambda must be positive");
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("SimulationConfig: c must lie in (0,1)");
    vol.validate();
    missing.validate();
  }

  void validate() const {
    validate_dgp();
    if (mc_reps == 0) throw std::invalid_argument("SimulationConfig: mc_reps must be positive");
    bootstrap.validate();
    if (!(alpha > 0.0 && alpha < 1.0))
      throw std::invalid_argument("SimulationConfig: alpha must lie in (0,1)");
  }

  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (phi != 0.0 && psi != 0.0)
      w.push_back("mixed ARMA(1,1): the variance normalization fixes Var(u)=1/4 only for pure AR or pure MA");
    if (missing.kind == MissingSpec::Kind::Markov && missing.p01 == 0.0)
      w.push_back("missingness chain with p01=0 is absorbing at the all-missing state");
    return w;
  }
};

// Trend + volatility + ARMA errors + missingness. Values at missing indices
// are generated and then masked, so estimators can be checked for
// missing-invariance. The error and missingness chains use independent
// substreams of `seed` (exogeneity by construction).
inline ObservedSeries simulate_series(const SimulationConfig& config, std::uint64_t seed) {
  config.validate_dgp();
  const std::size_t n = config.n;

  Rng err_rng = make_rng(seed, kStreamErrors);
  const std::vector<double> u = arma_errors(n, config.phi, config.psi, err_rng);

  ObservedSeries s;
  s.values.resize(n);
  s.observed.assign(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = static_cast<double>(i + 1) / static_cast<double>(n);
    s.values[i] = trend_value(tau, config.beta1, config.beta2, config.lambda, config.c) +
                  config.vol.at(tau) * u[i];
  }
  if (config.missing.kind == MissingSpec::Kind::Markov) {
    Rng miss_rng = make_rng(seed, kStreamMissing);
    s.observed = markov_missing(n, config.missing.p01, config.missing.p11, miss_rng);
    if (s.observed_count() == 0) throw NumericError("simulate_series: chain produced no observed point");
  }
  return s;
}

// Long-run variance of the normalized ARMA(1,1):
// Omega_U = sigma_eps^2 (1+psi)^2 / (1-phi)^2.
inline double theoretical_lrv(double phi, double psi) {
  const double se2 = arma_innovation_variance(phi, psi);
  const double num = (1.0 + psi) * (1.0 + psi);
  const double den = (1.0 - phi) * (1.0 - phi);
  return se2 * num / den;
}

// sigma_as^2(tau) = p(tau)^{-1} sigma(tau)^2 Omega_U kappa_2 (acceptance-test
// oracle for the estimator's asymptotic variance).
inline double asymptotic_variance(double tau, const std::function<double(double)>& p_fn,
                                  const std::function<double(double)>& sigma_fn, double omega_u,
                                  double kappa2) {
  const double p = p_fn(tau);
  if (!(p > 0.0)) throw std::invalid_argument("asymptotic_variance: p(tau) must be positive");
  const double s = sigma_fn(tau);
  return s * s * omega_u * kappa2 / p;
}

struct AsymptoticDiagnostics {
  double omega_u;
  double kappa2;
  std::function<double(double)> sigma2_as_at;
  std::function<double(double)> b_as_at;
};

// B_as(tau) = mu_2 p(tau)^{-1} [m p]''(tau); the second derivative is taken
// numerically (central differences), as the simulation DGP has no closed form
// worth maintaining.
inline AsymptoticDiagnostics make_asymptotic_diagnostics(
    std::function<double(double)> p_fn, std::function<double(double)> sigma_fn,
    std::function<double(double)> m_fn, double phi, double psi, const KernelSpec& kernel = {}) {
  const KernelMoments mom = kernel_moments(kernel);
  const double omega = theoretical_lrv(phi, psi);
  AsymptoticDiagnostics diag;
  diag.omega_u = omega;
  diag.kappa2 = mom.kappa2;
  diag.sigma2_as_at = [=](double tau) {
    return asymptotic_variance(tau, p_fn, sigma_fn, omega, mom.kappa2);
  };
  diag.b_as_at = [=, mu2 = mom.mu2](double tau) {
    const double p = p_fn(tau);
    if (!(p > 0.0)) throw std::invalid_argument("b_as_at: p(tau) must be positive");
    const double step = std::min({1e-3, tau / 2.0, (1.0 - tau) / 2.0});
    auto f = [&](double x) { return m_fn(x) * p_fn(x); };
    const double second = (f(tau + step) - 2.0 * f(tau) + f(tau - step)) / (step * step);
    return mu2 * second / p;
  };
  return diag;
}

// Average pointwise and simultaneous coverage of the bootstrap bands plus the
// average (over replications) median (over grid points) interval lengths.
struct CoverageReport {
  double pointwise_coverage = 0.0;
  double simultaneous_coverage_gsub = 0.0;
  double simultaneous_coverage_g = 0.0;
  double median_length_pointwise = 0.0;
  double median_length_gsub = 0.0;
  double median_length_g = 0.0;
  std::size_t mc_reps = 0;  // completed replications
  std::size_t dropped_reps = 0;
};

namespace detail {

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

inline double band_median_length(const Band& band) {
  std::vector<double> lengths;
  for (std::size_t j = 0; j < band.grid.size(); ++j)
    if (band.valid[j]) lengths.push_back(band.upper[j] - band.lower[j]);
  return median_of(std::move(lengths));
}

// Fraction of valid band points containing the true trend.
inline double band_pointwise_hits(const Band& band, const SimulationConfig& config,
                                  std::size_t* valid_points) {
  std::size_t hits = 0, valid = 0;
  for (std::size_t j = 0; j < band.grid.size(); ++j) {
    if (!band.valid[j]) continue;
    ++valid;
    const double m = trend_value(band.grid[j], config.beta1, config.beta2, config.lambda, config.c);
    if (band.lower[j] <= m && m <= band.upper[j]) ++hits;
  }
  *valid_points = valid;
  return valid > 0 ? static_cast<double>(hits) / static_cast<double>(valid) : 0.0;
}

inline bool band_simultaneous_hit(const Band& band, const SimulationConfig& config) {
  for (std::size_t j = 0; j < band.grid.size(); ++j) {
    if (!band.valid[j]) continue;
    const double m = trend_value(band.grid[j], config.beta1, config.beta2, config.lambda, config.c);
    if (!(band.lower[j] <= m && m <= band.upper[j])) return false;
  }
  return true;
}

}  // namespace detail

inline constexpr std::uint64_t kStreamMonteCarloBase = 1ULL << 32;

// One Monte Carlo coverage experiment: simulate, bootstrap, band, score.
// Replications run in parallel on substreams derived from
// (bootstrap.seed, repetition index); degenerate replications are dropped
// and counted.
inline CoverageReport monte_carlo_coverage(const SimulationConfig& config,
                                           const KernelSpec& kernel = {}) {
  config.validate();
  const EvalSets sets = build_eval_sets(config.bootstrap.h);
  std::vector<std::size_t> all_g(sets.g.size());
  for (std::size_t j = 0; j < all_g.size(); ++j) all_g[j] = j;

  const std::size_t R = config.mc_reps;
  std::vector<std::uint8_t> ok(R, 0);
  std::vector<double> pw_cov(R), sim_gsub(R), sim_g(R);
  std::vector<double> len_pw(R), len_gsub(R), len_g(R);

  parallel_for(R, [&](std::size_t r) {
    const std::uint64_t rep_seed =
        derive_seed(config.bootstrap.seed, kStreamMonteCarloBase + r);
    try {
      const ObservedSeries series = simulate_series(config, rep_seed);
      BootstrapConfig bconf = config.bootstrap;
      bconf.seed = derive_seed(rep_seed, kStreamBootstrap);
      const BootstrapRun run = run_bootstrap(series, bconf, sets.g, kernel);

      const Band pw = pointwise_band(run.draws, run.m_hat, config.alpha);
      const Band sg = simultaneous_band(run.draws, run.m_hat, config.alpha, all_g);
      const Band sgs =
          simultaneous_band(run.draws, run.m_hat, config.alpha, sets.g_sub_indices_in_g);

      std::size_t valid_points = 0;
      const double cov = detail::band_pointwise_hits(pw, config, &valid_points);
      if (valid_points == 0) return;  // nothing to score; rep stays dropped

      pw_cov[r] = cov;
      sim_gsub[r] = detail::band_simultaneous_hit(sgs, config) ? 1.0 : 0.0;
      sim_g[r] = detail::band_simultaneous_hit(sg, config) ? 1.0 : 0.0;
      len_pw[r] = detail::band_median_length(pw);
      len_gsub[r] = detail::band_median_length(sgs);
      len_g[r] = detail::band_median_length(sg);
      ok[r] = 1;
    } catch (const NumericError&) {
      // degenerate replication: dropped and counted
    }
  });

  CoverageReport report;
  double sum_pw = 0, sum_sgs = 0, sum_sg = 0, sum_lpw = 0, sum_lgs = 0, sum_lg = 0;
  for (std::size_t r = 0; r < R; ++r) {
    if (!ok[r]) {
      ++report.dropped_reps;
      continue;
    }
    ++report.mc_reps;
    sum_pw += pw_cov[r];
    sum_sgs += sim_gsub[r];
    sum_sg += sim_g[r];
    sum_lpw += len_pw[r];
    sum_lgs += len_gsub[r];
    sum_lg += len_g[r];
  }
  if (report.mc_reps == 0)
    throw NumericError("monte_carlo_coverage: every replication was degenerate");
  const auto completed = static_cast<double>(report.mc_reps);
  report.pointwise_coverage = sum_pw / completed;
  report.simultaneous_coverage_gsub = sum_sgs / completed;
  report.simultaneous_coverage_g = sum_sg / completed;
  report.median_length_pointwise = sum_lpw / completed;
  report.median_length_gsub = sum_lgs / completed;
  report.median_length_g = sum_lg / completed;
  return report;
}

}  // namespace trendband
