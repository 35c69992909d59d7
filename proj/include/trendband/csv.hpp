#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "trendband/bands.hpp"
#include "trendband/errors.hpp"
#include "trendband/series.hpp"

namespace trendband {

// CSV ingestion and table emission for the CLI. Input must already be one
// row per period; rows are mapped to consecutive time indices and gaps in
// the time column become missing rows, so spacing is always regular.

struct CsvSpec {
  char delimiter = ',';
  std::string time_column = "0";   // header name, or 0-based index if all digits
  std::string value_column = "1";
  std::set<std::string> missing_tokens = {"", "NA", "NaN"};
  std::string date_format;         // strptime-style; empty means numeric time
};

struct LoadedSeries {
  ObservedSeries series;
  std::vector<double> time;  // fractional years for dates, raw numeric otherwise
  bool time_is_date = false;
};

// Shortest round-trip decimal representation; reloading reproduces the bits.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

namespace detail {

inline std::string trim(std::string s) {
  const auto notspace = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

inline std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delimiter)) cells.push_back(cell);
  if (!line.empty() && line.back() == delimiter) cells.emplace_back();
  return cells;
}

inline bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Serial day count from 1970-01-01 (civil-from-days algorithm).
inline long long days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

inline double fractional_years_from_serial(double serial_days) {
  static const auto epoch = static_cast<double>(days_from_civil(2000, 1, 1));
  return 2000.0 + (serial_days - epoch) / 365.25;
}

inline std::optional<double> parse_date_serial(const std::string& cell, const std::string& fmt) {
  std::tm tm{};
  std::istringstream ss(cell);
  ss >> std::get_time(&tm, fmt.c_str());
  if (ss.fail()) return std::nullopt;
  return static_cast<double>(days_from_civil(tm.tm_year + 1900,
                                             static_cast<unsigned>(tm.tm_mon + 1),
                                             static_cast<unsigned>(tm.tm_mday)));
}

}  // namespace detail

inline LoadedSeries load_series(const std::string& path, const CsvSpec& spec) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw DataError(path + ": empty file");

  const bool named = !detail::all_digits(spec.time_column) || !detail::all_digits(spec.value_column);
  std::size_t time_idx = 0, value_idx = 0, first_row = 0;
  if (named) {
    const auto header = detail::split_line(lines[0], spec.delimiter);
    auto find = [&](const std::string& name) {
      for (std::size_t i = 0; i < header.size(); ++i)
        if (detail::trim(header[i]) == name) return i;
      throw DataError(path + ": column '" + name + "' not found in header");
    };
    time_idx = detail::all_digits(spec.time_column) ? std::stoul(spec.time_column)
                                                    : find(spec.time_column);
    value_idx = detail::all_digits(spec.value_column) ? std::stoul(spec.value_column)
                                                      : find(spec.value_column);
    first_row = 1;
  } else {
    time_idx = std::stoul(spec.time_column);
    value_idx = std::stoul(spec.value_column);
  }
  if (time_idx == value_idx) throw DataError(path + ": time and value columns must differ");

  struct Row {
    double time;
    std::optional<double> value;
  };
  std::vector<Row> rows;
  const bool dates = !spec.date_format.empty();
  for (std::size_t li = first_row; li < lines.size(); ++li) {
    const std::string lineno = std::to_string(li + 1);
    if (detail::trim(lines[li]).empty()) continue;
    const auto cells = detail::split_line(lines[li], spec.delimiter);
    if (time_idx >= cells.size() || value_idx >= cells.size())
      throw DataError(path + ": line " + lineno + ": too few columns");

    const std::string time_cell = detail::trim(cells[time_idx]);
    double t;
    if (dates) {
      const auto serial = detail::parse_date_serial(time_cell, spec.date_format);
      if (!serial) throw DataError(path + ": line " + lineno + ": unparseable date '" + time_cell + "'");
      t = *serial;
    } else {
      const auto parsed = parse_double(time_cell);
      if (!parsed) throw DataError(path + ": line " + lineno + ": unparseable time '" + time_cell + "'");
      t = *parsed;
    }
    if (!rows.empty() && !(t > rows.back().time))
      throw DataError(path + ": line " + lineno + ": non-monotone time");

    const std::string value_cell = detail::trim(cells[value_idx]);
    std::optional<double> v;
    if (spec.missing_tokens.count(value_cell) == 0) {
      v = parse_double(value_cell);
      if (!v) throw DataError(path + ": line " + lineno + ": malformed numeric '" + value_cell + "'");
    }
    rows.push_back({t, v});
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  // Regular-spacing contract: the smallest positive gap is the step, every
  // gap must be an integer multiple of it, and the gap fills become missing.
  double step = 1.0;
  if (rows.size() > 1) {
    step = rows[1].time - rows[0].time;
    for (std::size_t i = 1; i + 1 < rows.size(); ++i)
      step = std::min(step, rows[i + 1].time - rows[i].time);
  }

  LoadedSeries out;
  out.time_is_date = dates;
  auto push = [&](std::optional<double> v, double t) {
    out.series.values.push_back(v.value_or(0.0));
    out.series.observed.push_back(v.has_value() ? 1 : 0);
    out.time.push_back(dates ? detail::fractional_years_from_serial(t) : t);
  };
  push(rows[0].value, rows[0].time);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double gap = rows[i].time - rows[i - 1].time;
    const double ratio = gap / step;
    const double rounded = std::round(ratio);
    if (std::abs(ratio - rounded) > 1e-6 * std::max(1.0, std::abs(ratio)))
      throw DataError(path + ": irregular time spacing before value at time " +
                      format_double(rows[i].time));
    for (long long fill = 1; fill < static_cast<long long>(rounded); ++fill)
      push(std::nullopt, rows[i - 1].time + step * static_cast<double>(fill));
    push(rows[i].value, rows[i].time);
  }
  out.series.validate();
  return out;
}

// Atomic table writer: temp file then rename, so failed runs leave nothing
// partial behind.
inline void write_table(const std::string& path, const std::vector<std::string>& lines) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream outf(tmp, std::ios::trunc);
    if (!outf) throw DataError("cannot write " + tmp);
    for (const auto& l : lines) outf << l << '\n';
    outf.flush();
    if (!outf) {
      std::remove(tmp.c_str());
      throw DataError("write failed for " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw DataError("cannot rename " + tmp + " to " + path);
  }
}

// Long-format plot data: one row per grid point; numeric fields are blank at
// invalid points.
inline void emit_plot_data(const Band& band, const std::string& path, char delimiter = ',') {
  const std::string d(1, delimiter);
  std::vector<std::string> lines;
  lines.push_back("tau" + d + "center" + d + "lower" + d + "upper" + d + "valid");
  for (std::size_t j = 0; j < band.grid.size(); ++j) {
    if (band.valid[j]) {
      lines.push_back(format_double(band.grid[j]) + d + format_double(band.center[j]) + d +
                      format_double(band.lower[j]) + d + format_double(band.upper[j]) + d +
                      "true");
    } else {
      lines.push_back(format_double(band.grid[j]) + d + d + d + d + "false");
    }
  }
  write_table(path, lines);
}

}  // namespace trendband
