#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "adasel/errors.hpp"
#include "adasel/feature_pipeline.hpp"

using namespace adasel;

namespace {

double pcc_oracle(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Columns mixing a few latent factors, so strong correlations are common.
Matrix latent_mixture(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = 10 + rng() % 30, d = 2 + rng() % 9, k = 1 + rng() % 3;
  Matrix latent(n, k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) latent(i, j) = g(rng);
  Matrix x(n, d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> w(k);
    for (auto& v : w) v = g(rng);
    const double noise = 0.05 + 0.5 * static_cast<double>(rng() % 100) / 100.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v = noise * g(rng);
      for (std::size_t j = 0; j < k; ++j) v += w[j] * latent(i, j);
      x(i, c) = v;
    }
  }
  return x;
}

SparseCounts tokens(std::vector<std::uint32_t> idx) {
  SparseCounts s;
  for (auto i : idx) {
    s.index.push_back(i);
    s.count.push_back(1);
  }
  return s;
}

// Feature 0 is the label index; the rest are uniform noise.
void planted(std::size_t n, std::size_t noise, std::uint64_t seed, Matrix& x, std::vector<int>& y) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  x = Matrix(n, noise + 1);
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(rng() % 3);
    y.push_back(c);
    x(i, 0) = c;
    for (std::size_t j = 1; j <= noise; ++j) x(i, j) = u(rng);
  }
}

}  // namespace

TEST(Pearson, PerfectRelations) {
  const std::vector<double> x{1, 2, 3}, y{2, 4, 6}, z{3, 2, 1};
  EXPECT_DOUBLE_EQ(pearson_correlation(x, y), 1.0);
  EXPECT_DOUBLE_EQ(pearson_correlation(x, z), -1.0);
}

TEST(Pearson, MatchesDefinitionalOracle) {
  const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
  EXPECT_NEAR(pearson_correlation(x, y), pcc_oracle(x, y), 1e-12);
  EXPECT_NEAR(pearson_correlation(x, y), 0.8, 1e-12);  // 4 / sqrt(5*5)
}

TEST(Pearson, SymmetricAndAffineInvariant) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> pos(0.1, 10);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> x(20), y(20), xa(20);
    for (auto& v : x) v = g(rng);
    for (auto& v : y) v = g(rng);
    const double a = pos(rng), b = 5 * g(rng);
    for (std::size_t i = 0; i < 20; ++i) xa[i] = a * x[i] + b;
    const double r = pearson_correlation(x, y);
    EXPECT_NEAR(r, pearson_correlation(y, x), 1e-12);
    EXPECT_NEAR(r, pearson_correlation(xa, y), 1e-9);
  }
}

TEST(Pearson, ConstantVectorIsUndefined) {
  const std::vector<double> x{1, 1, 1}, y{1, 2, 3};
  EXPECT_THROW(pearson_correlation(x, y), UndefinedCorrelationError);
}

TEST(CorrelationFilter, IdenticalColumnsRemoveTheSecond) {
  const Matrix x = Matrix::from_rows({{1, 1, 5}, {2, 2, 3}, {3, 3, 4}});
  const auto s = correlation_filter(x, {});
  ASSERT_EQ(s.removed_by_correlation.size(), 1u);
  EXPECT_EQ(s.removed_by_correlation[0].removed, 1u);
  EXPECT_EQ(s.removed_by_correlation[0].kept, 0u);
  EXPECT_DOUBLE_EQ(s.removed_by_correlation[0].abs_r, 1.0);
}

TEST(CorrelationFilter, OrthogonalColumnsSurvive) {
  const Matrix x = Matrix::from_rows({{1, 1, 1}, {-1, 1, -1}, {1, -1, -1}, {-1, -1, 1}});
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      EXPECT_EQ(pcc_oracle(x.column(a), x.column(b)), 0.0);
  const auto s = correlation_filter(x, {});
  EXPECT_TRUE(s.removed_by_correlation.empty());
  EXPECT_EQ(s.kept_dense.size(), 3u);
}

TEST(CorrelationFilter, NoSurvivingPairAboveThreshold) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 300; ++t) {
    const Matrix x = latent_mixture(rng);
    const auto s = correlation_filter(x, {});
    for (std::size_t i = 0; i < s.kept_dense.size(); ++i)
      for (std::size_t j = i + 1; j < s.kept_dense.size(); ++j)
        EXPECT_LE(std::abs(pcc_oracle(x.column(s.kept_dense[i]), x.column(s.kept_dense[j]))),
                  0.75 + 1e-12);
    EXPECT_EQ(s.kept_dense.size() + s.removed_by_correlation.size(), x.cols());
  }
}

TEST(Greedy, RemovesNoiseKeepsPlantedFeature) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Matrix x;
    std::vector<int> y;
    planted(90, 3, seed, x, y);
    const Matrix scaled = apply_scaler(fit_scaler(x), x);
    const std::vector<std::size_t> all{0, 1, 2, 3};
    PipelineConfig cfg;
    cfg.seed = seed;
    const auto s = greedy_importance_selection(scaled, y, all, {}, cfg);
    EXPECT_EQ(s.kept_dense, std::vector<std::size_t>{0});
    EXPECT_EQ(s.removed_by_greedy.size(), 3u);
    for (const auto& r : s.removed_by_greedy) EXPECT_LE(r.accuracy_delta, cfg.greedy_min_accuracy_drop);
    ASSERT_EQ(s.importance.size(), 1u);
    EXPECT_DOUBLE_EQ(s.importance[0], 1.0);
  }
}

TEST(Greedy, AllInformativeFeaturesStay) {
  // Class = 2*a + b over two binary features: dropping either loses half the classes.
  Matrix x(80, 2);
  std::vector<int> y;
  for (std::size_t i = 0; i < 80; ++i) {
    const int a = static_cast<int>(i % 2), b = static_cast<int>((i / 2) % 2);
    x(i, 0) = a;
    x(i, 1) = b;
    y.push_back(2 * a + b);
  }
  const std::vector<std::size_t> all{0, 1};
  const auto s = greedy_importance_selection(x, y, all, {}, {});
  EXPECT_TRUE(s.removed_by_greedy.empty());
  EXPECT_EQ(s.kept_dense.size(), 2u);
  double sum = 0;
  for (double v : s.importance) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Greedy, NeverRemovesTheLastFeature) {
  // Labels unrelated to any feature: everything is removable except one.
  std::mt19937_64 rng(4);
  Matrix x(40, 3);
  std::vector<int> y;
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t f = 0; f < 3; ++f) x(i, f) = 1.0;
    y.push_back(static_cast<int>(rng() % 2));
  }
  const std::vector<std::size_t> all{0, 1, 2};
  const auto s = greedy_importance_selection(x, y, all, {}, {});
  EXPECT_EQ(s.kept_dense.size(), 1u);
}

TEST(Chi2, ClassExclusiveTokenRanksFirst) {
  // Rows: A, A, B, B. Token 0 only in A rows, token 1 in every row.
  const std::vector<SparseCounts> counts{tokens({0, 1}), tokens({0, 1}), tokens({1}), tokens({1})};
  const std::vector<int> labels{0, 0, 1, 1};
  // Token 0 table: present (A=2, B=0), absent (A=0, B=2), every expected cell 1.
  const double token0 = (2 - 1.0) * (2 - 1.0) + (0 - 1.0) * (0 - 1.0) + (0 - 1.0) * (0 - 1.0) +
                        (2 - 1.0) * (2 - 1.0);
  const auto stat = chi2_scores(counts, labels, 3);
  EXPECT_DOUBLE_EQ(stat[0], token0);
  EXPECT_DOUBLE_EQ(stat[1], 0.0);
  EXPECT_DOUBLE_EQ(stat[2], 0.0);  // all-zero column
  const auto order = chi2_select(counts, labels, 3, 1);
  EXPECT_EQ(order, std::vector<std::uint32_t>{0});
  EXPECT_EQ(chi2_select(counts, labels, 3, 10), (std::vector<std::uint32_t>{0, 1, 2}));
}

TEST(Chi2, FullSelectionIsAPermutation) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::uint32_t v = 1 + static_cast<std::uint32_t>(rng() % 20);
    std::vector<SparseCounts> counts;
    std::vector<int> labels;
    for (int r = 0; r < 15; ++r) {
      SparseCounts s;
      for (std::uint32_t i = 0; i < v; ++i)
        if (rng() % 3 == 0) {
          s.index.push_back(i);
          s.count.push_back(1 + static_cast<std::uint32_t>(rng() % 4));
        }
      counts.push_back(s);
      labels.push_back(static_cast<int>(rng() % 3));
    }
    auto sel = chi2_select(counts, labels, v, static_cast<int>(v));
    std::sort(sel.begin(), sel.end());
    for (std::uint32_t i = 0; i < v; ++i) EXPECT_EQ(sel[i], i);
  }
}

TEST(Scaler, DirectSubstitution) {
  const Matrix col = Matrix::from_rows({{2}, {4}, {6}});
  const auto p = fit_scaler(col);
  const auto s = apply_scaler(p, col);
  EXPECT_NEAR(s(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(s(1, 0), 0.5, 1e-12);
  EXPECT_NEAR(s(2, 0), 1.0, 1e-12);
  const std::vector<double> unseen{8.0};
  EXPECT_EQ(apply_scaler(p, std::span<const double>(unseen))[0], 1.0);
  const auto c = apply_scaler(fit_scaler(Matrix::from_rows({{5}, {5}})), Matrix::from_rows({{5}, {5}}));
  EXPECT_EQ(c(0, 0), 0.0);
  EXPECT_EQ(c(1, 0), 0.0);
}

TEST(Scaler, MonotonePerFeature) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0, 50);
  Matrix x(40, 1);
  for (std::size_t i = 0; i < 40; ++i) x(i, 0) = g(rng);
  const Matrix s = apply_scaler(fit_scaler(x), x);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 40; ++j)
      if (x(i, 0) < x(j, 0)) EXPECT_LE(s(i, 0), s(j, 0));
}

TEST(Pipeline, ProjectionAndJsonRoundTrip) {
  std::vector<FeatureRow> rows;
  std::vector<int> y;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 60; ++i) {
    const int c = i % 2;
    const double a = c + 0.1 * u(rng);
    rows.push_back({"r" + std::to_string(i), {a, a * 2 + 0.001 * u(rng), u(rng)}, tokens({static_cast<std::uint32_t>(c)})});
    y.push_back(c);
  }
  PipelineConfig cfg;
  cfg.chi2_k = 1;
  const auto sel = run_feature_pipeline(rows, y, 3, {}, cfg);
  EXPECT_EQ(sel.removed_by_correlation.size(), 1u);
  EXPECT_EQ(sel.kept_counts.size(), 1u);
  const auto back = selection_from_json(selection_to_json(sel));
  EXPECT_EQ(back.kept_dense, sel.kept_dense);
  EXPECT_EQ(back.kept_counts, sel.kept_counts);
  EXPECT_EQ(back.project(rows[3]), sel.project(rows[3]));
  EXPECT_EQ(sel.project(rows[3]).size(), sel.output_width());
  EXPECT_THROW(selection_from_json(nlohmann::json::object()), FormatError);
}
