#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "adasel/kernels.hpp"
#include "kernels_common.hpp"

namespace adasel::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace omp {

Matrix squared_distances(const Matrix& queries, const Matrix& rows) {
  if (queries.cols() != rows.cols()) throw ShapeError("squared_distances: width mismatch");
  Matrix out(queries.rows(), rows.rows());
  const auto nq = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < nq; ++i) {
    const auto q = queries.row(static_cast<std::size_t>(i));
    auto dst = out.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < rows.rows(); ++j)
      dst[j] = detail::squared_distance(q, rows.row(j));
  }
  return out;
}

Matrix correlation_matrix(const Matrix& x) {
  const auto moments = detail::column_moments(x);
  const auto n = static_cast<std::ptrdiff_t>(x.cols());
  Matrix out(x.cols(), x.cols());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ai = 0; ai < n; ++ai) {
    const auto a = static_cast<std::size_t>(ai);
    for (std::size_t b = a; b < x.cols(); ++b) {
      const double r = a == b ? (moments.norm[a] == 0.0 ? std::nan("") : 1.0)
                              : detail::pair_correlation(x, moments, a, b);
      out(a, b) = r;
      out(b, a) = r;
    }
  }
  return out;
}

std::vector<int> optimum_labels(const OutcomeView& table, std::span<const std::uint8_t> allowed) {
  std::vector<int> out(table.n_inputs);
  const auto n = static_cast<std::ptrdiff_t>(table.n_inputs);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        detail::optimum_for_row(table, allowed, static_cast<std::size_t>(i));
  return out;
}

}  // namespace omp
}  // namespace adasel::kernels
