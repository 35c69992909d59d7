// trendband CLI: batch front end over the library. Subcommands: fit, band,
// mcv, simulate, seasonal, periodogram. Every output table gets a sidecar
// <out>.meta recording the full resolved configuration; the sidecar doubles
// as a --config file, so any run can be replayed exactly.
//
// Exit codes: 0 success, 1 usage/validation, 2 data error, 3 numeric failure.

#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trendband/trendband.hpp"

namespace {

using namespace trendband;

struct InputOpts {
  std::string path;
  std::string delimiter = ",";
  std::string time_col = "0";
  std::string value_col = "1";
  std::string missing_tokens = ",NA,NaN";
  std::string date_format;

  CsvSpec to_spec() const {
    CsvSpec spec;
    if (delimiter.size() != 1) throw std::invalid_argument("--delimiter must be a single byte");
    spec.delimiter = delimiter[0];
    spec.time_column = time_col;
    spec.value_column = value_col;
    spec.missing_tokens.clear();
    std::string token;
    std::istringstream tokens(missing_tokens);
    while (std::getline(tokens, token, ',')) spec.missing_tokens.insert(token);
    if (!missing_tokens.empty() && missing_tokens.back() == ',') spec.missing_tokens.insert("");
    spec.date_format = date_format;
    return spec;
  }
};

void add_input_options(CLI::App* sub, InputOpts& o) {
  sub->add_option("--input", o.path, "Input CSV file")->required();
  sub->add_option("--delimiter", o.delimiter, "Input field delimiter (default ,)");
  sub->add_option("--time-col", o.time_col, "Time column: header name or 0-based index");
  sub->add_option("--value-col", o.value_col, "Value column: header name or 0-based index");
  sub->add_option("--missing-tokens", o.missing_tokens,
                  "Comma-joined cell values treated as missing (default \",NA,NaN\")");
  sub->add_option("--date-format", o.date_format,
                  "strptime pattern for the time column (e.g. %Y-%m-%d); empty = numeric");
}

struct BootstrapOpts {
  std::string method = "awb";
  double gamma = -1.0;  // <0 means unset
  double theta = -1.0;
  double ell = -1.0;
  std::size_t B = 999;
  double h = 0.0;
  double h_tilde = 0.0;
  std::uint64_t seed = 0;

  BootstrapConfig to_config() const {
    BootstrapConfig c;
    if (method == "awb") c.method = BootstrapMethod::AWB;
    else if (method == "dwb") c.method = BootstrapMethod::DWB;
    else if (method == "wb") c.method = BootstrapMethod::WB;
    else throw std::invalid_argument("--method must be awb, dwb or wb");
    if (gamma >= 0.0) c.gamma = gamma;
    if (theta >= 0.0) c.theta = theta;
    if (ell >= 0.0) c.ell = ell;
    c.B = B;
    c.h = h;
    c.h_tilde = h_tilde;
    c.seed = seed;
    return c;
  }
};

void add_bootstrap_options(CLI::App* sub, BootstrapOpts& o, bool need_h = true) {
  sub->add_option("--method", o.method, "Bootstrap method: awb, dwb or wb (default awb)")
      ->check(CLI::IsMember({"awb", "dwb", "wb"}));
  sub->add_option("--gamma", o.gamma, "AWB AR parameter in [0,1)");
  sub->add_option("--theta", o.theta, "Tuning via gamma = theta^(1/ell) (default 0.01 for DWB conversion)");
  sub->add_option("--ell", o.ell, "Block length parameter");
  sub->add_option("--B", o.B, "Bootstrap replications (default 999)");
  auto* hopt = sub->add_option("--h", o.h, "Estimation bandwidth in (0,1)");
  if (need_h) hopt->required();
  sub->add_option("--h-tilde", o.h_tilde, "Oversmoothing bandwidth (default 2 h^(5/9))");
  sub->add_option("--seed", o.seed, "Master RNG seed (default 0)");
}

// Table plus metadata sidecar; if the sidecar fails, the table is removed so
// no partial outputs survive.
void write_output(const std::string& path, const std::vector<std::string>& lines,
                  const CLI::App* sub) {
  write_table(path, lines);
  try {
    std::vector<std::string> meta;
    meta.push_back(std::string("# trendband ") + version_string());
    meta.push_back("# command: " + sub->get_name());
    meta.push_back("[" + sub->get_name() + "]");
    std::istringstream cfg(sub->config_to_str(true, false));
    std::string line;
    while (std::getline(cfg, line))
      if (!line.empty()) meta.push_back(line);
    write_table(path + ".meta", meta);
  } catch (...) {
    std::remove(path.c_str());
    throw;
  }
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

int run_fit(const CLI::App* sub, const InputOpts& in, double h, double grid_delta,
            bool local_linear_fit, const std::string& out) {
  const LoadedSeries loaded = load_series(in.path, in.to_spec());
  const double delta = grid_delta > 0.0 ? grid_delta : h;
  const EvalGrid grid = EvalGrid::interior(loaded.series.size(), delta);

  std::vector<std::string> lines;
  if (local_linear_fit) {
    lines.push_back("tau,level,slope,valid");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto fit = local_linear(loaded.series, h, grid[j]);
      if (fit)
        lines.push_back(format_double(grid[j]) + "," + format_double(fit->level) + "," +
                        format_double(fit->slope) + ",true");
      else
        lines.push_back(format_double(grid[j]) + ",,,false");
    }
  } else {
    const TrendCurve curve = local_constant_curve(loaded.series, h, grid);
    lines.push_back("tau,estimate,valid");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      if (curve.valid[j])
        lines.push_back(format_double(grid[j]) + "," + format_double(curve.estimate[j]) + ",true");
      else
        lines.push_back(format_double(grid[j]) + ",,false");
    }
  }
  write_output(out, lines, sub);
  return 0;
}

int run_band(const CLI::App* sub, const InputOpts& in, const BootstrapOpts& bopts, double alpha,
             double grid_delta, bool pointwise, const std::string& out) {
  const LoadedSeries loaded = load_series(in.path, in.to_spec());
  const BootstrapConfig config = bopts.to_config();
  const double delta = grid_delta > 0.0 ? grid_delta : config.h;
  const EvalGrid grid = EvalGrid::interior(loaded.series.size(), delta);

  const BootstrapRun run = run_bootstrap(loaded.series, config, grid);
  Band band;
  if (pointwise) {
    band = pointwise_band(run.draws, run.m_hat, alpha);
  } else {
    std::vector<std::size_t> all(grid.size());
    for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
    band = simultaneous_band(run.draws, run.m_hat, alpha, all);
    std::size_t dropped = 0;
    for (auto v : band.valid) dropped += v ? 0 : 1;
    if (dropped > 0)
      std::cerr << "warning: " << dropped << " grid points had insufficient data and were dropped\n";
  }

  std::vector<std::string> lines;
  lines.push_back("tau,center,lower,upper,valid,alpha_s");
  const std::string alpha_s = band.alpha_s ? format_double(*band.alpha_s) : std::string();
  for (std::size_t j = 0; j < band.grid.size(); ++j) {
    if (band.valid[j])
      lines.push_back(format_double(band.grid[j]) + "," + format_double(band.center[j]) + "," +
                      format_double(band.lower[j]) + "," + format_double(band.upper[j]) +
                      ",true," + alpha_s);
    else
      lines.push_back(format_double(band.grid[j]) + ",,,,false," + alpha_s);
  }
  write_output(out, lines, sub);
  return 0;
}

int run_mcv(const CLI::App* sub, const InputOpts& in, std::size_t k,
            const std::vector<double>& candidates, const std::string& out) {
  const LoadedSeries loaded = load_series(in.path, in.to_spec());
  const MCVResult result = mcv_select(loaded.series, k, candidates);
  std::vector<std::string> lines;
  lines.push_back("h,criterion,selected");
  for (const auto& [h, crit] : result.criterion_by_h)
    lines.push_back(format_double(h) + "," + format_double(crit) + "," +
                    bool_str(h == result.selected_h));
  write_output(out, lines, sub);
  return 0;
}

int run_simulate(const CLI::App* sub, const SimulationConfig& config, const std::string& out) {
  for (const auto& w : config.warnings()) std::cerr << "warning: " << w << "\n";
  const CoverageReport report = monte_carlo_coverage(config);
  std::vector<std::string> lines;
  lines.push_back("metric,value");
  lines.push_back("pointwise_coverage," + format_double(report.pointwise_coverage));
  lines.push_back("simultaneous_coverage_gsub," + format_double(report.simultaneous_coverage_gsub));
  lines.push_back("simultaneous_coverage_g," + format_double(report.simultaneous_coverage_g));
  lines.push_back("median_length_pointwise," + format_double(report.median_length_pointwise));
  lines.push_back("median_length_gsub," + format_double(report.median_length_gsub));
  lines.push_back("median_length_g," + format_double(report.median_length_g));
  lines.push_back("completed_reps," + std::to_string(report.mc_reps));
  lines.push_back("dropped_reps," + std::to_string(report.dropped_reps));
  write_output(out, lines, sub);
  return 0;
}

int run_seasonal(const CLI::App* sub, const InputOpts& in, std::size_t M, std::size_t max_M,
                 const std::string& out, const std::string& coef_out,
                 const std::string& residual_out) {
  const LoadedSeries loaded = load_series(in.path, in.to_spec());

  std::vector<std::string> lines;
  lines.push_back("M,aic,bic,mse");
  for (std::size_t m = 1; m <= max_M; ++m) {
    const FourierFit fit = fourier_fit(loaded.series, loaded.time, m);
    const InfoCriteria ic = info_criteria(fit);
    lines.push_back(std::to_string(m) + "," + format_double(ic.aic) + "," +
                    format_double(ic.bic) + "," + format_double(ic.mse));
  }
  write_output(out, lines, sub);

  const FourierFit chosen = fourier_fit(loaded.series, loaded.time, M);
  if (!coef_out.empty()) {
    std::vector<std::string> coef_lines;
    coef_lines.push_back("j,a,b");
    for (std::size_t j = 0; j < chosen.coefficients.size(); ++j)
      coef_lines.push_back(std::to_string(j + 1) + "," +
                           format_double(chosen.coefficients[j].first) + "," +
                           format_double(chosen.coefficients[j].second));
    write_table(coef_out, coef_lines);
  }
  if (!residual_out.empty()) {
    // Index-based time keeps the residual file regularly spaced for reloading
    // into fit/band; the years column is carried for the periodogram.
    std::vector<std::string> res_lines;
    res_lines.push_back("index,value,years");
    const auto& rs = chosen.residual_series;
    for (std::size_t i = 0; i < rs.size(); ++i)
      res_lines.push_back(std::to_string(i) + "," +
                          (rs.observed[i] ? format_double(rs.values[i]) : std::string("NA")) +
                          "," + format_double(loaded.time[i]));
    write_table(residual_out, res_lines);
  }
  return 0;
}

int run_periodogram(const CLI::App* sub, const InputOpts& in, double fmin, double fmax,
                    double fstep, const std::string& out) {
  const LoadedSeries loaded = load_series(in.path, in.to_spec());
  if (!(fmin > 0.0 && fmax >= fmin && fstep > 0.0))
    throw std::invalid_argument("periodogram: need 0 < freq-min <= freq-max and freq-step > 0");
  std::vector<double> freqs;
  for (double f = fmin; f <= fmax + 1e-12; f += fstep) freqs.push_back(f);
  const Periodogram pg = lomb_scargle(loaded.series, loaded.time, freqs);
  std::vector<std::string> lines;
  lines.push_back("frequency,power");
  for (std::size_t i = 0; i < pg.frequencies.size(); ++i)
    lines.push_back(format_double(pg.frequencies[i]) + "," + format_double(pg.power[i]));
  write_output(out, lines, sub);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth trend estimation and bootstrap confidence bands for "
               "equally spaced time series with missing observations"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print help");  // keep -h free: --h is the bandwidth
  app.set_version_flag("--version", std::string("trendband ") + version_string());
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = hardware)");

  app.set_config("--config", "", "Config file: [subcommand] section of key=value lines "
                                 "(CLI flags override; sidecar .meta files replay runs)");
  app.allow_config_extras(CLI::config_extras_mode::error);

  auto configure = [](CLI::App* sub) {
    sub->set_help_flag("--help", "Print help");
    sub->fallthrough();  // lets --config / --threads appear after the subcommand
    sub->option_defaults()->always_capture_default(true);
    return sub;
  };

  // fit
  auto* fit = configure(app.add_subcommand("fit", "Local constant / local linear trend fit"));
  InputOpts fit_in;
  add_input_options(fit, fit_in);
  double fit_h = 0.0, fit_delta = 0.0;
  bool fit_ll = false;
  std::string fit_out;
  fit->add_option("--h", fit_h, "Bandwidth in (0,1)")->required();
  fit->add_option("--grid-delta", fit_delta, "Boundary exclusion (default h)");
  fit->add_flag("--local-linear", fit_ll, "Fit a local line (level and slope)");
  fit->add_option("--out", fit_out, "Output table path")->required();

  // band
  auto* band = configure(app.add_subcommand("band", "Bootstrap confidence bands"));
  InputOpts band_in;
  add_input_options(band, band_in);
  BootstrapOpts band_boot;
  add_bootstrap_options(band, band_boot);
  double band_alpha = 0.05, band_delta = 0.0;
  bool band_pointwise = false;
  std::string band_out;
  band->add_option("--alpha", band_alpha, "1 - confidence level (default 0.05)");
  band->add_option("--grid-delta", band_delta, "Boundary exclusion (default h)");
  band->add_flag("--pointwise", band_pointwise, "Pointwise intervals instead of simultaneous");
  band->add_option("--out", band_out, "Output table path")->required();

  // mcv
  auto* mcv = configure(app.add_subcommand("mcv", "Modified cross-validation bandwidth selection"));
  InputOpts mcv_in;
  add_input_options(mcv, mcv_in);
  std::size_t mcv_k = 0;
  std::vector<double> mcv_candidates;
  std::string mcv_out;
  mcv->add_option("--k", mcv_k, "Leave out k observations on each side (default 0)");
  mcv->add_option("--candidates", mcv_candidates, "Candidate bandwidths")
      ->required()
      ->delimiter(',');
  mcv->add_option("--out", mcv_out, "Output table path")->required();

  // simulate
  auto* sim = configure(app.add_subcommand("simulate", "Monte Carlo coverage study"));
  SimulationConfig sim_config;
  sim_config.vol = VolatilitySpec::cyclical(1.0, 2.0, 0.5, 4);
  BootstrapOpts sim_boot;
  add_bootstrap_options(sim, sim_boot);
  std::string sim_vol = "cyclical", sim_out;
  bool sim_markov = false;
  double sim_p01 = 0.20, sim_p11 = 0.55;
  sim->add_option("--n", sim_config.n, "Sample size (default 200)");
  sim->add_option("--beta1", sim_config.beta1, "Trend slope before the shift (default -1)");
  sim->add_option("--beta2", sim_config.beta2, "Trend slope after the shift (default 2.5)");
  sim->add_option("--lambda", sim_config.lambda, "Transition smoothness (default 10)");
  sim->add_option("--c", sim_config.c, "Shift location in (0,1) (default 0.9)");
  sim->add_option("--phi", sim_config.phi, "AR(1) coefficient (default 0)");
  sim->add_option("--psi", sim_config.psi, "MA(1) coefficient (default 0)");
  sim->add_option("--vol", sim_vol, "Volatility: constant or cyclical (default cyclical)")
      ->check(CLI::IsMember({"constant", "cyclical"}));
  sim->add_option("--sigma0", sim_config.vol.sigma0, "Volatility start (default 1)");
  sim->add_option("--sigma-star", sim_config.vol.sigma_star, "Volatility end (default 2)");
  sim->add_option("--vol-a", sim_config.vol.a, "Cycle amplitude (default 0.5)");
  sim->add_option("--vol-k", sim_config.vol.k, "Cycle count (default 4)");
  sim->add_flag("--markov", sim_markov, "Markov missingness");
  sim->add_option("--p01", sim_p01, "P(observed | previous missing) (default 0.20)");
  sim->add_option("--p11", sim_p11, "P(observed | previous observed) (default 0.55)");
  sim->add_option("--reps", sim_config.mc_reps, "Monte Carlo repetitions")->default_val(500);
  sim->add_option("--alpha", sim_config.alpha, "1 - nominal coverage (default 0.05)");
  sim->add_option("--out", sim_out, "Output table path")->required();

  // seasonal
  auto* seas = configure(app.add_subcommand("seasonal", "Fourier seasonal regression"));
  InputOpts seas_in;
  add_input_options(seas, seas_in);
  std::size_t seas_M = 3, seas_max_M = 7;
  std::string seas_out, seas_coef_out, seas_res_out;
  seas->add_option("--M", seas_M, "Harmonics for the reported fit (default 3)");
  seas->add_option("--max-M", seas_max_M, "Criteria table covers M = 1..max-M (default 7)");
  seas->add_option("--out", seas_out, "Criteria table path")->required();
  seas->add_option("--coef-out", seas_coef_out, "Coefficient table path (optional)");
  seas->add_option("--residual-out", seas_res_out, "Residual series path (optional)");

  // periodogram
  auto* perio = configure(app.add_subcommand("periodogram", "Lomb-Scargle periodogram"));
  InputOpts perio_in;
  add_input_options(perio, perio_in);
  double perio_fmin = 0.05, perio_fmax = 6.0, perio_fstep = 0.01;
  std::string perio_out;
  perio->add_option("--freq-min", perio_fmin, "Lowest frequency, cycles/year (default 0.05)");
  perio->add_option("--freq-max", perio_fmax, "Highest frequency (default 6)");
  perio->add_option("--freq-step", perio_fstep, "Frequency step (default 0.01)");
  perio->add_option("--out", perio_out, "Output table path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  trendband::max_threads().store(threads);
  try {
    if (fit->parsed()) return run_fit(fit, fit_in, fit_h, fit_delta, fit_ll, fit_out);
    if (band->parsed())
      return run_band(band, band_in, band_boot, band_alpha, band_delta, band_pointwise, band_out);
    if (mcv->parsed()) return run_mcv(mcv, mcv_in, mcv_k, mcv_candidates, mcv_out);
    if (sim->parsed()) {
      sim_config.vol.kind = sim_vol == "constant" ? VolatilitySpec::Kind::Constant
                                                  : VolatilitySpec::Kind::Cyclical;
      sim_config.missing =
          sim_markov ? MissingSpec::markov(sim_p01, sim_p11) : MissingSpec::none();
      sim_config.bootstrap = sim_boot.to_config();
      return run_simulate(sim, sim_config, sim_out);
    }
    if (seas->parsed())
      return run_seasonal(seas, seas_in, seas_M, seas_max_M, seas_out, seas_coef_out, seas_res_out);
    if (perio->parsed())
      return run_periodogram(perio, perio_in, perio_fmin, perio_fmax, perio_fstep, perio_out);
  } catch (const trendband::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
