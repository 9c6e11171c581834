#pragma once

// Cross-validated comparison of dispatch policies: always-one-model, the
// trained premodel, the feature-stacking alternative, and the oracle.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "adasel/feature_pipeline.hpp"
#include "adasel/labeling.hpp"
#include "adasel/premodel.hpp"

namespace adasel {

struct FoldPlan {
  int k = 10;
  std::uint64_t seed = 0;
  std::vector<std::string> input_ids;
  std::vector<int> fold;  // per input, aligned with input_ids

  std::vector<std::size_t> test_rows(int f) const;
  std::vector<std::size_t> train_rows(int f) const;
  std::size_t fold_size(int f) const;
};

/// Seeded shuffle dealt round-robin. With `stratify_by`, inputs are dealt
/// label by label so each fold mirrors the label mix. ParameterError when k
/// exceeds the input count.
FoldPlan kfold_split(std::span<const std::string> input_ids, int k, std::uint64_t seed,
                     std::span<const Label> stratify_by = {});

/// Square confusion counts, rows = actual class, columns = predicted class.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {}
  void add(std::size_t actual, std::size_t predicted, std::size_t times = 1) {
    counts_[actual * n_ + predicted] += times;
  }
  std::size_t at(std::size_t actual, std::size_t predicted) const {
    return counts_[actual * n_ + predicted];
  }
  std::size_t classes() const { return n_; }

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PrfSummary {
  std::vector<ClassScores> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

/// 2PR / (P + R); 0 when P + R is 0.
double f1_score(double precision, double recall);

/// Per-class precision/recall/F1 with zero denominators giving 0; macro is
/// the unweighted mean over classes.
PrfSummary precision_recall_f1(const ConfusionMatrix& confusion);

/// bleu^2 / time_s. DomainError for time_s <= 0.
double bleups(double bleu, double time_s);

struct AdaptiveRecipe {
  bool cascade = false;
  std::vector<ClassifierKind> kinds{ClassifierKind::KNN};  // one, or one per level
  std::vector<std::string> selected_models;
  Hyperparams hp;
  FallbackPolicy fallback;
  double overhead_ms = 0.0;
  /// Re-run the feature pipeline on each fold's training rows.
  std::optional<PipelineConfig> feature_pipeline;
};

/// Dense-feature and count-feature classifiers whose class scores are
/// averaged before the argmax.
struct FeatureStackingRecipe {
  ClassifierKind dense_kind = ClassifierKind::KNN;
  ClassifierKind count_kind = ClassifierKind::NaiveBayes;
  std::vector<std::string> selected_models;
  Hyperparams hp;
  FallbackPolicy fallback;
  double overhead_ms = 0.0;
};

struct SingleModelPolicy {
  std::string model_id;
};
struct OraclePolicy {};

struct Policy {
  std::string name;
  std::variant<SingleModelPolicy, AdaptiveRecipe, FeatureStackingRecipe, OraclePolicy> spec;

  bool is_single_model() const { return std::holds_alternative<SingleModelPolicy>(spec); }
};

struct PolicyMetrics {
  std::string policy;
  bool single_model = false;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Pooled over every input (each is tested exactly once).
  double mean_latency_ms = 0.0;
  std::optional<double> mean_energy_mj;
  /// Geometric mean of the per-fold means.
  double geomean_latency_ms = 0.0;
  std::optional<double> geomean_energy_mj;
  std::map<std::string, double> utilization;  // model ids and "FAILURE"
  double oracle_accuracy = 0.0;
  double oracle_latency_ms = 0.0;
  double oracle_gap = 0.0;
  /// Dispatch decision per input, aligned with the outcome table.
  std::vector<int> dispatch;
};

/// Outcome table plus optimum-labeled examples (aligned with the table's
/// inputs), built once per dataset and criterion.
struct EvaluationData {
  OutcomeTable table;
  std::vector<LabeledExample> labeled;
  std::uint32_t vocab_size = 0;
};

EvaluationData prepare_evaluation(const Dataset& dataset, const Criterion& criterion);

/// Dispatches every input under `policy`; trainable policies are trained per
/// fold on the other folds only. ProtocolError when the plan does not cover
/// the dataset's inputs or leaves a fold without training data.
PolicyMetrics evaluate_policy(const Policy& policy, const EvaluationData& data,
                              const FoldPlan& folds);

/// Speedup of `row` relative to `reference` (reference latency / row latency).
double speedup(const PolicyMetrics& row, const PolicyMetrics& reference);
double accuracy_delta(const PolicyMetrics& a, const PolicyMetrics& b);

/// Most accurate single-model row (ties: lower latency, then name), if any.
std::optional<std::size_t> best_single_model(std::span<const PolicyMetrics> metrics);

/// CSV text of the comparison table; identical inputs give identical bytes.
std::string comparison_csv(std::span<const PolicyMetrics> metrics);
std::string comparison_summary(std::span<const PolicyMetrics> metrics);

/// Writes report.csv and summary.txt under `out_dir`. EmptyInputError for an
/// empty list, IoError on write failure.
void comparison_report(std::span<const PolicyMetrics> metrics, const std::filesystem::path& out_dir);

}  // namespace adasel
