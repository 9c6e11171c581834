#pragma once

// Feature reduction and scaling ahead of the premodel classifier:
// a pairwise-correlation filter, a greedy importance search driven by
// cross-validated accuracy, chi-square ranking of count features, and
// min-max scaling fitted on training rows only.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "adasel/classifiers.hpp"
#include "adasel/labeling.hpp"
#include "adasel/matrix.hpp"
#include "adasel/trace_store.hpp"

namespace adasel {

struct PipelineConfig {
  double pcc_threshold = 0.75;
  double greedy_min_accuracy_drop = 0.0;
  int chi2_k = 2000;
  int greedy_cv_folds = 5;
  std::uint64_t seed = 0;
};

struct CorrelationRemoval {
  std::size_t removed;
  std::size_t kept;
  double abs_r;
};

struct GreedyRemoval {
  std::size_t feature;
  double accuracy_delta;  // baseline minus accuracy without the feature
};

/// Which dense and count features survive, with the evidence for each drop.
/// Dense indices refer to the original dense columns.
struct FeatureSelection {
  std::size_t dense_width = 0;
  std::vector<std::size_t> kept_dense;
  std::vector<CorrelationRemoval> removed_by_correlation;
  std::vector<GreedyRemoval> removed_by_greedy;
  std::vector<double> importance;  // aligned with kept_dense, sums to 1 when known
  std::vector<std::uint32_t> kept_counts;
  std::vector<double> chi2_scores;  // aligned with kept_counts

  /// Keeps every dense column and no counts.
  static FeatureSelection keep_all(std::size_t dense_width);

  std::size_t output_width() const { return kept_dense.size() + kept_counts.size(); }

  /// Kept dense values followed by kept counts, as one vector.
  std::vector<double> project(const FeatureRow& row) const;
  Matrix project(std::span<const FeatureRow> rows) const;
};

/// ParameterError for unequal lengths or fewer than two samples,
/// UndefinedCorrelationError when either vector is constant.
double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Walks column pairs (i < j) in ascending order; while both are still kept
/// and |r| exceeds the threshold, j is dropped in favour of i. Constant
/// columns count as uncorrelated. Fills kept_dense and removed_by_correlation.
FeatureSelection correlation_filter(const Matrix& features, const PipelineConfig& config);

/// Cross-validated accuracy of `spec` trained on `columns` of x.
struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::KNN;
  Hyperparams hp;
};

double cross_validated_accuracy(const Matrix& x, std::span<const int> y,
                                std::span<const std::size_t> columns, const ClassifierSpec& spec,
                                int folds, std::uint64_t seed);

/// Greedy backward elimination starting from `start` (typically the
/// correlation survivors). Each round removes the feature whose removal costs
/// the least cross-validated accuracy, provided that cost is at most
/// greedy_min_accuracy_drop; the last feature is never removed. `x` should be
/// scaled already.
FeatureSelection greedy_importance_selection(const Matrix& x, std::span<const int> y,
                                             std::span<const std::size_t> start,
                                             const ClassifierSpec& trainer,
                                             const PipelineConfig& config);

/// Convenience form over labeled examples (dense features, labels as
/// classes); fits a scaler on the examples before searching.
FeatureSelection greedy_importance_selection(std::span<const LabeledExample> labeled,
                                             const ClassifierSpec& trainer,
                                             const PipelineConfig& config);

/// Presence/absence chi-square statistic of every count feature against the
/// label classes.
std::vector<double> chi2_scores(std::span<const SparseCounts> counts, std::span<const int> labels,
                                std::uint32_t vocab_size);

/// The min(k, vocab) highest-statistic indices, ties by ascending index.
/// ParameterError for k <= 0 or a row/label count mismatch.
std::vector<std::uint32_t> chi2_select(std::span<const SparseCounts> counts,
                                       std::span<const int> labels, std::uint32_t vocab_size,
                                       int k);

struct ScalerParams {
  std::vector<double> min;
  std::vector<double> max;
};

/// EmptyInputError when there are no training rows.
ScalerParams fit_scaler(const Matrix& train);

/// (x - min) / (max - min) clamped to [0,1]; constant features map to 0.
std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> row);
Matrix apply_scaler(const ScalerParams& params, const Matrix& rows);

/// Correlation stage, scaling, greedy stage, then chi-square on counts when
/// the dataset has any. Labels are class ints (see premodel label coding).
FeatureSelection run_feature_pipeline(std::span<const FeatureRow> rows, std::span<const int> labels,
                                      std::uint32_t vocab_size, const ClassifierSpec& trainer,
                                      const PipelineConfig& config);

/// stage,feature,action,statistic rows for every decision in `sel`.
void write_selection_report(const FeatureSelection& sel, std::span<const std::string> dense_names,
                            const std::filesystem::path& path);

nlohmann::json selection_to_json(const FeatureSelection& sel);
/// FormatError on a malformed document.
FeatureSelection selection_from_json(const nlohmann::json& j);

}  // namespace adasel
