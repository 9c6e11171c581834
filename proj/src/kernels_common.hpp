#pragma once

// Per-element arithmetic shared by the serial and OpenMP kernels.

#include <cmath>
#include <limits>

#include "adasel/kernels.hpp"

namespace adasel::kernels::detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    acc += d * d;
  }
  return acc;
}

/// Column means and centered root-sum-of-squares.
struct ColumnMoments {
  std::vector<double> mean;
  std::vector<double> norm;
};

inline ColumnMoments column_moments(const Matrix& x) {
  ColumnMoments m{std::vector<double>(x.cols(), 0.0), std::vector<double>(x.cols(), 0.0)};
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) s += x(r, c);
    m.mean[c] = s / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const double d = x(r, c) - m.mean[c];
      ss += d * d;
    }
    m.norm[c] = std::sqrt(ss);
  }
  return m;
}

inline double pair_correlation(const Matrix& x, const ColumnMoments& m, std::size_t a,
                               std::size_t b) {
  if (m.norm[a] == 0.0 || m.norm[b] == 0.0) return std::numeric_limits<double>::quiet_NaN();
  double cov = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r)
    cov += (x(r, a) - m.mean[a]) * (x(r, b) - m.mean[b]);
  const double r = cov / (m.norm[a] * m.norm[b]);
  return std::clamp(r, -1.0, 1.0);
}

inline int optimum_for_row(const OutcomeView& t, std::span<const std::uint8_t> allowed,
                           std::size_t i) {
  int best = -1;
  double best_latency = 0.0;
  for (std::size_t m = 0; m < t.n_models; ++m) {
    if (!allowed.empty() && !allowed[m]) continue;
    const std::size_t cell = i * t.n_models + m;
    if (!t.met[cell]) continue;
    if (best < 0 || t.latency[cell] < best_latency) {
      best = static_cast<int>(m);
      best_latency = t.latency[cell];
    }
  }
  return best;
}

}  // namespace adasel::kernels::detail
