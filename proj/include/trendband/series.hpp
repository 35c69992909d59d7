#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace trendband {

// Equally spaced series with an observed/missing indicator per index.
// Index i (0-based) is observation t = i+1 at rescaled time t/n.
// Values at missing indices are placeholders and must never influence
// any estimate.
struct ObservedSeries {
  std::vector<double> values;
  std::vector<std::uint8_t> observed;

  std::size_t size() const { return values.size(); }

  std::size_t observed_count() const {
    std::size_t c = 0;
    for (auto d : observed) c += d ? 1 : 0;
    return c;
  }

  void validate() const {
    if (values.empty()) throw std::invalid_argument("ObservedSeries: empty series");
    if (values.size() != observed.size())
      throw std::invalid_argument("ObservedSeries: values/observed length mismatch");
    if (observed_count() == 0)
      throw std::invalid_argument("ObservedSeries: no observed points");
  }
};

// Strictly increasing evaluation points in the open unit interval.
class EvalGrid {
 public:
  EvalGrid() = default;

  explicit EvalGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("EvalGrid: empty grid");
    double prev = 0.0;
    for (double p : points_) {
      if (!(p > prev && p < 1.0))
        throw std::invalid_argument("EvalGrid: points must be strictly increasing in (0,1)");
      prev = p;
    }
  }

  // All interior lattice points t/n with delta < t/n < 1-delta. The default
  // inference grid: the boundary strip [0,delta] u [1-delta,1] is excluded
  // because the estimator has edge effects there.
  static EvalGrid interior(std::size_t n, double delta) {
    if (n == 0) throw std::invalid_argument("EvalGrid::interior: n must be positive");
    std::vector<double> pts;
    pts.reserve(n);
    for (std::size_t t = 1; t <= n; ++t) {
      double tau = static_cast<double>(t) / static_cast<double>(n);
      if (tau > delta && tau < 1.0 - delta) pts.push_back(tau);
    }
    return EvalGrid(std::move(pts));
  }

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }

  bool operator==(const EvalGrid& other) const { return points_ == other.points_; }

 private:
  std::vector<double> points_;
};

// Trend estimates on a grid. valid[j] is false where too little data fell in
// the kernel window; estimate[j] is NaN there and must be ignored.
struct TrendCurve {
  EvalGrid grid;
  std::vector<double> estimate;
  std::vector<std::uint8_t> valid;
};

}  // namespace trendband
