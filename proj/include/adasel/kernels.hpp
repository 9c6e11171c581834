#pragma once

// Data-parallel inner loops. Each kernel exists twice: a straightforward
// serial reference and an OpenMP version. Every output element is computed by
// the same arithmetic in both, so results are bitwise identical; the tests
// hold them to that and bench/ compares their speed.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adasel/matrix.hpp"

namespace adasel::kernels {

/// Optimum model column per row of an input-major (met, latency) table:
/// fastest goal-meeting model, ties to the lower column, -1 when none meets.
/// `allowed`, when non-empty, masks which model columns may be chosen.
struct OutcomeView {
  std::span<const std::uint8_t> met;
  std::span<const double> latency;
  std::size_t n_inputs = 0;
  std::size_t n_models = 0;
};

namespace serial {

/// out(i, j) = squared Euclidean distance between queries row i and rows row j.
Matrix squared_distances(const Matrix& queries, const Matrix& rows);

/// Pearson correlation for every column pair; NaN where a column is constant.
/// Diagonal is 1 for non-constant columns.
Matrix correlation_matrix(const Matrix& x);

std::vector<int> optimum_labels(const OutcomeView& table,
                                std::span<const std::uint8_t> allowed = {});

}  // namespace serial

namespace omp {

Matrix squared_distances(const Matrix& queries, const Matrix& rows);
Matrix correlation_matrix(const Matrix& x);
std::vector<int> optimum_labels(const OutcomeView& table,
                                std::span<const std::uint8_t> allowed = {});

}  // namespace omp

/// Squared distance from one query to every row; shared by the KNN paths.
void squared_distances_to(const Matrix& rows, std::span<const double> query,
                          std::span<double> out);

/// Number of threads the OpenMP kernels will use (1 without OpenMP).
int max_threads();

}  // namespace adasel::kernels
