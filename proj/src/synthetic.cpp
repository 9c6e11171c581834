#include "adasel/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace adasel::synthetic {

namespace {

std::string numbered(const char* prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

// Dividing by the inverse keeps the shortest text form short (0.7544, not 0.75440000001).
double round_to(double v, double step) {
  const double inv = std::round(1.0 / step);
  return std::round(v * inv) / inv;
}

}  // namespace

Dataset complementary(const ComplementaryConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);

  Dataset d;
  d.models = {{"fast", "Fast model", 40.0}, {"slow", "Slow model", 240.0}};
  d.dense_names = {"x0", "x1"};
  for (std::size_t j = 0; j < config.noise_features; ++j)
    d.dense_names.push_back(numbered("noise", j, 1));
  d.vocab_size = config.vocab_size;

  for (std::size_t i = 0; i < config.n_inputs; ++i) {
    FeatureRow row;
    row.input_id = numbered("in", i, 4);
    const double x0 = round_to(unit(rng), 1e-4);
    row.dense.push_back(x0);
    row.dense.push_back(round_to(x0 + 0.03 * jitter(rng), 1e-4));
    for (std::size_t j = 0; j < config.noise_features; ++j)
      row.dense.push_back(round_to(unit(rng), 1e-4));

    const bool fast_side = x0 < 0.5;
    for (std::uint32_t t = 0; t < config.vocab_size; ++t) {
      double rate = 0.3;
      if (t == 0) rate = fast_side ? 0.9 : 0.05;
      if (t == 1) rate = fast_side ? 0.05 : 0.9;
      if (unit(rng) < rate) {
        row.counts.index.push_back(t);
        row.counts.count.push_back(1 + static_cast<std::uint32_t>(unit(rng) * 3));
      }
    }

    const bool fast_met = fast_side;
    const bool slow_met = (x0 >= 0.5 && x0 < 0.95) || x0 < 0.25;
    const double lf = round_to(config.fast_latency_ms * (1.0 + 0.05 * unit(rng)), 1e-3);
    const double ls = round_to(config.slow_latency_ms * (1.0 + 0.05 * unit(rng)), 1e-3);
    d.records.push_back({row.input_id, "fast", fast_met, std::nullopt, lf,
                         round_to(lf * 2.5, 1e-3)});
    d.records.push_back({row.input_id, "slow", slow_met, std::nullopt, ls,
                         round_to(ls * 3.0, 1e-3)});
    d.features.push_back(std::move(row));
  }
  return d;
}

Dataset planted_disk(const DiskLayout& layout) {
  Dataset d;
  d.models = {{"a", "a", std::nullopt}, {"b", "b", std::nullopt}};
  d.dense_names = {"u", "v"};
  auto add_grid = [&](const char* prefix, std::size_t side, double offset) {
    for (std::size_t i = 0; i < side; ++i)
      for (std::size_t j = 0; j < side; ++j) {
        FeatureRow row;
        row.input_id = numbered(prefix, i * side + j, 4);
        const double u = (static_cast<double>(i) + offset) / static_cast<double>(side);
        const double v = (static_cast<double>(j) + offset) / static_cast<double>(side);
        row.dense = {u, v};
        const double du = u - 0.5, dv = v - 0.5;
        const bool inside = du * du + dv * dv < layout.disk_radius * layout.disk_radius;
        d.records.push_back({row.input_id, "a", !inside, std::nullopt, 10.0, std::nullopt});
        d.records.push_back({row.input_id, "b", inside, std::nullopt, 12.0, std::nullopt});
        d.features.push_back(std::move(row));
      }
  };
  add_grid("g", layout.train_side, 0.5);
  add_grid("t", layout.test_side, layout.test_offset);
  return d;
}

Dataset random_trace(std::size_t n_inputs, std::size_t n_models, std::size_t dense_width,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset d;
  std::vector<double> rate(n_models), base(n_models);
  for (std::size_t m = 0; m < n_models; ++m) {
    const auto id = numbered("m", m, 1);
    d.models.push_back({id, id, std::nullopt});
    rate[m] = 0.2 + 0.6 * unit(rng);
    base[m] = 1.0 + 30.0 * unit(rng);
  }
  for (std::size_t j = 0; j < dense_width; ++j) d.dense_names.push_back(numbered("f", j, 1));
  for (std::size_t i = 0; i < n_inputs; ++i) {
    FeatureRow row;
    row.input_id = numbered("r", i, 4);
    int first_met = -1;
    for (std::size_t m = 0; m < n_models; ++m) {
      const bool met = unit(rng) < rate[m];
      if (met && first_met < 0) first_met = static_cast<int>(m);
      d.records.push_back({row.input_id, d.models[m].model_id, met, std::nullopt,
                           base[m] * (0.8 + 0.4 * unit(rng)), std::nullopt});
    }
    for (std::size_t j = 0; j < dense_width; ++j)
      row.dense.push_back(j == 0 ? 0.5 * unit(rng) + 0.1 * (first_met + 1) : unit(rng));
    d.features.push_back(std::move(row));
  }
  return d;
}

}  // namespace adasel::synthetic
