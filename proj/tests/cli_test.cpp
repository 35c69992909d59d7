#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

const std::string kCli = TRENDBAND_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("tbcli_" + std::to_string(::getpid()) + "_" +
                                       std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write_noisy_series(const std::string& path, int n = 200) {
  std::ofstream out(path);
  for (int i = 0; i < n; ++i) {
    if (i % 7 == 3) {
      out << i << ",NA\n";
    } else {
      const double tau = static_cast<double>(i + 1) / n;
      const double value = std::sin(4.0 * tau) + 0.3 * std::cos(31.0 * i + 1.0);
      out << i << "," << value << "\n";
    }
  }
}

}  // namespace

TEST_CASE("fit subcommand produces table plus metadata sidecar") {
  Workspace ws;
  write_noisy_series(ws.file("in.csv"));
  const std::string out = ws.file("fit.csv");
  REQUIRE(run("fit --input " + ws.file("in.csv") + " --h 0.1 --out " + out) == 0);

  std::ifstream table(out);
  std::string header;
  std::getline(table, header);
  CHECK(header == "tau,estimate,valid");
  CHECK(fs::exists(out + ".meta"));
  const std::string meta = slurp(out + ".meta");
  CHECK(meta.find("# command: fit") != std::string::npos);
  CHECK(meta.find("h=0.1") != std::string::npos);

  REQUIRE(run("fit --input " + ws.file("in.csv") + " --h 0.1 --local-linear --out " +
              ws.file("ll.csv")) == 0);
  std::ifstream ll(ws.file("ll.csv"));
  std::getline(ll, header);
  CHECK(header == "tau,level,slope,valid");
}

TEST_CASE("band subcommand is deterministic and replayable from its sidecar") {
  Workspace ws;
  write_noisy_series(ws.file("in.csv"));
  const std::string base = "band --input " + ws.file("in.csv") +
                           " --h 0.08 --gamma 0.4 --B 199 --seed 11 --out ";

  REQUIRE(run(base + ws.file("a.csv")) == 0);
  REQUIRE(run(base + ws.file("b.csv")) == 0);
  CHECK(slurp(ws.file("a.csv")) == slurp(ws.file("b.csv")));  // byte-identical

  // replay purely from the metadata sidecar
  REQUIRE(run("band --config " + ws.file("a.csv") + ".meta --out " + ws.file("c.csv")) == 0);
  CHECK(slurp(ws.file("c.csv")) == slurp(ws.file("a.csv")));

  std::ifstream table(ws.file("a.csv"));
  std::string header;
  std::getline(table, header);
  CHECK(header == "tau,center,lower,upper,valid,alpha_s");
}

TEST_CASE("band pointwise variant and threads flag") {
  Workspace ws;
  write_noisy_series(ws.file("in.csv"));
  const std::string tail = " --input " + ws.file("in.csv") +
                           " --h 0.08 --gamma 0.2 --B 99 --seed 5 --pointwise --out ";
  REQUIRE(run("band" + tail + ws.file("p1.csv")) == 0);
  REQUIRE(run("--threads 1 band" + tail + ws.file("p2.csv")) == 0);
  CHECK(slurp(ws.file("p1.csv")) == slurp(ws.file("p2.csv")));
}

TEST_CASE("mcv subcommand reports criteria and selection") {
  Workspace ws;
  write_noisy_series(ws.file("in.csv"));
  const std::string out = ws.file("mcv.csv");
  REQUIRE(run("mcv --input " + ws.file("in.csv") +
              " --k 5 --candidates 0.05,0.1,0.2 --out " + out) == 0);
  const std::string table = slurp(out);
  CHECK(table.find("h,criterion,selected") != std::string::npos);
  CHECK(table.find("true") != std::string::npos);
}

TEST_CASE("simulate subcommand emits a coverage report") {
  Workspace ws;
  const std::string out = ws.file("cov.csv");
  REQUIRE(run("simulate --n 120 --reps 5 --B 49 --h 0.06 --gamma 0.2 --seed 3 --out " + out) ==
          0);
  const std::string table = slurp(out);
  CHECK(table.find("metric,value") != std::string::npos);
  CHECK(table.find("pointwise_coverage,") != std::string::npos);
  CHECK(table.find("completed_reps,5") != std::string::npos);
}

TEST_CASE("seasonal and periodogram subcommands chain on yearly data") {
  Workspace ws;
  {
    std::ofstream out(ws.file("in.csv"));
    out << "years,conc\n";
    for (int i = 0; i < 800; ++i) {
      const double t = 0.01 * i;  // numeric time already in years
      if (i % 5 == 2) {
        out << t << ",NA\n";
      } else {
        const double x = 2.0 * std::cos(2.0 * std::numbers::pi * t) + 0.2 * std::sin(17.0 * i);
        out << t << "," << x << "\n";
      }
    }
  }
  const std::string in = " --input " + ws.file("in.csv") + " --time-col years --value-col conc";
  REQUIRE(run("seasonal" + in + " --M 1 --max-M 4 --out " + ws.file("ic.csv") +
              " --coef-out " + ws.file("coef.csv") + " --residual-out " + ws.file("res.csv")) ==
          0);
  CHECK(slurp(ws.file("ic.csv")).find("M,aic,bic,mse") != std::string::npos);
  CHECK(slurp(ws.file("coef.csv")).find("j,a,b") != std::string::npos);

  // residual file reloads as a regular series
  REQUIRE(run("fit --input " + ws.file("res.csv") + " --time-col index --value-col value" +
              " --h 0.1 --out " + ws.file("resfit.csv")) == 0);

  REQUIRE(run("periodogram" + in + " --freq-min 0.5 --freq-max 2 --freq-step 0.01 --out " +
              ws.file("pg.csv")) == 0);
  // argmax should land on 1 cycle/year
  std::ifstream pg(ws.file("pg.csv"));
  std::string line;
  std::getline(pg, line);
  double best_f = 0.0, best_p = -1.0;
  while (std::getline(pg, line)) {
    const auto comma = line.find(',');
    const double f = std::stod(line.substr(0, comma));
    const double p = std::stod(line.substr(comma + 1));
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  CHECK(std::abs(best_f - 1.0) < 0.011);
}

TEST_CASE("exit codes distinguish usage, data and numeric failures") {
  Workspace ws;
  write_noisy_series(ws.file("in.csv"));

  CHECK(run("band --input " + ws.file("in.csv") + " --out " + ws.file("x.csv")) == 1);  // no --h
  CHECK(run("") == 1);                                                                  // no subcommand
  CHECK(run("fit --input " + ws.file("nope.csv") + " --h 0.1 --out " + ws.file("x.csv")) == 2);
  CHECK(run("fit --input " + ws.file("in.csv") + " --h 0.1 --delimiter ,, --out " +
            ws.file("x.csv")) == 1);
  // k larger than the series: every leave-out window is empty -> numeric failure
  CHECK(run("mcv --input " + ws.file("in.csv") + " --k 400 --candidates 0.05 --out " +
            ws.file("x.csv")) == 3);
  CHECK_FALSE(fs::exists(ws.file("x.csv")));

  // unknown key in a config file is rejected
  {
    std::ofstream cfg(ws.file("bad.cfg"));
    cfg << "h=0.1\nbogus_key=1\n";
  }
  CHECK(run("fit --config " + ws.file("bad.cfg") + " --input " + ws.file("in.csv") + " --out " +
            ws.file("x.csv")) == 1);

  CHECK(run("--version") == 0);
  CHECK(run("band --help") == 0);
}

TEST_CASE("simulate subcommand: markov missingness and constant volatility paths") {
  Workspace ws;
  const std::string out = ws.file("cov2.csv");
  REQUIRE(run("simulate --n 200 --markov --p01 0.2 --p11 0.55 --vol constant --sigma0 1 "
              "--beta1 0 --beta2 0 --reps 4 --B 29 --h 0.06 --gamma 0.1 --seed 9 --out " +
              out) == 0);
  const std::string table = slurp(out);
  CHECK(table.find("completed_reps,4") != std::string::npos);
  const std::string meta = slurp(out + ".meta");
  CHECK(meta.find("markov=true") != std::string::npos);
  CHECK(meta.find("vol=\"constant\"") != std::string::npos);
}

TEST_CASE("full application workflow on date-indexed seasonal data") {
  // Daily series over ~8 years, ~70% missing, three seasonal harmonics,
  // a slow trend and AR(1) noise. Deseasonalize, band the residuals, and
  // check the band actually covers the injected trend.
  Workspace ws;
  std::vector<double> truth;   // injected trend, indexed by day
  {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.4);
    std::ofstream out(ws.file("daily.csv"));
    out << "date,conc\n";
    const int n_days = 2922;
    int y = 2000, m = 1, d = 1;
    auto advance_day = [&]() {
      static const int dim[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
      int days = dim[m - 1];
      if (m == 2 && (y % 4 == 0 && (y % 100 != 0 || y % 400 == 0))) days = 29;
      if (++d > days) {
        d = 1;
        if (++m > 12) {
          m = 1;
          ++y;
        }
      }
    };
    double ar = 0.0;
    for (int i = 0; i < n_days; ++i) {
      const double t = static_cast<double>(i) / 365.25;
      const double tau = static_cast<double>(i + 1) / n_days;
      const double trend = -1.5 * tau + 3.0 * tau / (1.0 + std::exp(-10.0 * (tau - 0.8)));
      const double season = 1.2 * std::cos(2 * std::numbers::pi * t) +
                            0.4 * std::sin(4 * std::numbers::pi * t) +
                            0.2 * std::cos(6 * std::numbers::pi * t);
      ar = 0.4 * ar + noise(rng);
      truth.push_back(trend);
      char date[16];
      std::snprintf(date, sizeof(date), "%04d-%02d-%02d", y, m, d);
      if (unif(rng) < 0.3)
        out << date << "," << (trend + season + ar) << "\n";
      else
        out << date << ",NA\n";  // drop ~70% of days but keep the rows
      advance_day();
    }
  }
  const std::string in = " --input " + ws.file("daily.csv") +
                         " --time-col date --value-col conc --date-format %Y-%m-%d";

  REQUIRE(run("seasonal" + in + " --M 3 --max-M 4 --out " + ws.file("ic.csv") +
              " --residual-out " + ws.file("res.csv")) == 0);
  REQUIRE(run("mcv --input " + ws.file("res.csv") + " --time-col index --value-col value" +
              " --k 5 --candidates 0.02,0.03,0.05 --out " + ws.file("mcv.csv")) == 0);
  REQUIRE(run("band --input " + ws.file("res.csv") + " --time-col index --value-col value" +
              " --h 0.03 --gamma 0.5 --B 499 --seed 13 --out " + ws.file("band.csv")) == 0);

  std::ifstream band(ws.file("band.csv"));
  std::string line;
  std::getline(band, line);
  int covered = 0, valid = 0;
  while (std::getline(band, line)) {
    std::istringstream row(line);
    std::string tau_s, center_s, lower_s, upper_s, valid_s;
    std::getline(row, tau_s, ',');
    std::getline(row, center_s, ',');
    std::getline(row, lower_s, ',');
    std::getline(row, upper_s, ',');
    std::getline(row, valid_s, ',');
    if (valid_s != "true") continue;
    ++valid;
    const double tau = std::stod(tau_s);
    const auto day = static_cast<std::size_t>(std::llround(tau * truth.size())) - 1;
    if (std::stod(lower_s) <= truth[day] && truth[day] <= std::stod(upper_s)) ++covered;
  }
  REQUIRE(valid > 1000);
  CHECK(covered >= static_cast<int>(0.7 * valid));
}
