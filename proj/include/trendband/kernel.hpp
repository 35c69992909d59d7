#pragma once

#include <cmath>
#include <stdexcept>

namespace trendband {

// Compact-support smoothing kernels. Only the Epanechnikov kernel
// K(x) = 3/4 (1 - x^2) 1{|x| <= 1} is shipped; the enum leaves room for
// other compact-support kernels without interface changes.
enum class KernelFamily { Epanechnikov };

struct KernelSpec {
  KernelFamily family = KernelFamily::Epanechnikov;
  double support_halfwidth = 1.0;
};

// kappa_k = int K(w)^k dw, mu_2 = int w^2 K(w) dw.
struct KernelMoments {
  double kappa1;
  double kappa2;
  double mu2;
};

inline double eval_kernel(const KernelSpec& spec, double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("eval_kernel: non-finite x");
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      if (std::abs(x) > spec.support_halfwidth) return 0.0;
      return 0.75 * (1.0 - x * x);
  }
  throw std::invalid_argument("eval_kernel: unknown kernel family");
}

// Closed forms are authoritative; the test suite cross-checks them against
// adaptive quadrature.
inline KernelMoments kernel_moments(const KernelSpec& spec) {
  switch (spec.family) {
    case KernelFamily::Epanechnikov:
      return KernelMoments{1.0, 3.0 / 5.0, 1.0 / 5.0};
  }
  throw std::invalid_argument("kernel_moments: unknown kernel family");
}

}  // namespace trendband
