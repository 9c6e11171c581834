#include <algorithm>

#include "adasel/kernels.hpp"
#include "kernels_common.hpp"

namespace adasel::kernels {

void squared_distances_to(const Matrix& rows, std::span<const double> query,
                          std::span<double> out) {
  if (query.size() != rows.cols() || out.size() != rows.rows())
    throw ShapeError("squared_distances_to: width mismatch");
  for (std::size_t j = 0; j < rows.rows(); ++j)
    out[j] = detail::squared_distance(query, rows.row(j));
}

namespace serial {

Matrix squared_distances(const Matrix& queries, const Matrix& rows) {
  if (queries.cols() != rows.cols()) throw ShapeError("squared_distances: width mismatch");
  Matrix out(queries.rows(), rows.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i)
    for (std::size_t j = 0; j < rows.rows(); ++j)
      out(i, j) = detail::squared_distance(queries.row(i), rows.row(j));
  return out;
}

Matrix correlation_matrix(const Matrix& x) {
  const auto moments = detail::column_moments(x);
  Matrix out(x.cols(), x.cols());
  for (std::size_t a = 0; a < x.cols(); ++a)
    for (std::size_t b = a; b < x.cols(); ++b) {
      const double r = a == b ? (moments.norm[a] == 0.0 ? std::nan("") : 1.0)
                              : detail::pair_correlation(x, moments, a, b);
      out(a, b) = r;
      out(b, a) = r;
    }
  return out;
}

std::vector<int> optimum_labels(const OutcomeView& table, std::span<const std::uint8_t> allowed) {
  std::vector<int> out(table.n_inputs);
  for (std::size_t i = 0; i < table.n_inputs; ++i)
    out[i] = detail::optimum_for_row(table, allowed, i);
  return out;
}

}  // namespace serial
}  // namespace adasel::kernels
