#include "adasel/folds.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "adasel/errors.hpp"

namespace adasel {

namespace {

std::vector<std::size_t> shuffled(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  return order;
}

void check(std::size_t n, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > n)
    throw ParameterError("fold count " + std::to_string(k) + " must be in [1, " +
                         std::to_string(n) + "]");
}

}  // namespace

std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed) {
  check(n, k);
  std::mt19937_64 rng(seed);
  const auto order = shuffled(n, rng);
  std::vector<int> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos)
    fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return fold;
}

std::vector<int> assign_folds_stratified(std::span<const int> classes, int k, std::uint64_t seed) {
  check(classes.size(), k);
  std::mt19937_64 rng(seed);
  const auto order = shuffled(classes.size(), rng);
  std::map<int, std::vector<std::size_t>> by_class;
  for (auto i : order) by_class[classes[i]].push_back(i);
  std::vector<int> fold(classes.size());
  std::size_t pos = 0;
  for (const auto& [cls, items] : by_class)
    for (auto i : items) fold[i] = static_cast<int>(pos++ % static_cast<std::size_t>(k));
  return fold;
}

}  // namespace adasel
