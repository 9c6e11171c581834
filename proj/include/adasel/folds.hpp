#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace adasel {

/// Fold id per item: a seeded shuffle dealt round-robin, so fold sizes differ
/// by at most one and the first n % k folds hold the extra items.
/// ParameterError unless 1 <= k <= n.
std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed);

/// Same, but items are dealt class by class (classes in ascending order) so
/// every fold sees each class in proportion.
std::vector<int> assign_folds_stratified(std::span<const int> classes, int k, std::uint64_t seed);

}  // namespace adasel
