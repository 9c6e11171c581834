#pragma once

// The selector run ahead of inference. Either one multi-class classifier over
// {selected models, Failure}, or a cascade of binary classifiers, one per
// selected model, consulted in selection order until one fires.

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "adasel/classifiers.hpp"
#include "adasel/feature_pipeline.hpp"
#include "adasel/labeling.hpp"

namespace adasel {

inline constexpr int kPremodelFormatVersion = 1;

struct CascadeLevel {
  ClassifierKind kind;
  std::string target_model;
};

struct SingleArchitecture {
  ClassifierKind kind;
};

struct CascadeArchitecture {
  std::vector<CascadeLevel> levels;
};

using PremodelArchitecture = std::variant<SingleArchitecture, CascadeArchitecture>;

struct FallbackPolicy {
  std::optional<std::string> use_model;  // empty: report Failure

  static FallbackPolicy report_failure() { return {}; }
  static FallbackPolicy use(std::string model_id) { return {std::move(model_id)}; }
  /// "failure" or "model:<id>".
  static FallbackPolicy parse(std::string_view text);
  std::string str() const;
};

struct PremodelOptions {
  FeatureSelection selection;  // empty dense_width means keep every dense feature
  double overhead_ms = 0.0;
};

struct PremodelDecision {
  Label choice;
  int levels_consulted = 0;
  /// Classifier score of the class behind the choice: the argmax class for a
  /// single premodel, the firing level's positive score for a cascade, and
  /// the last level's negative score on exhaustion.
  double confidence = 0.0;
};

class Premodel {
 public:
  const PremodelArchitecture& architecture() const { return architecture_; }
  const std::vector<std::string>& selected_models() const { return selected_; }
  const FallbackPolicy& fallback() const { return fallback_; }
  const ScalerParams& scaler() const { return scaler_; }
  const FeatureSelection& selection() const { return selection_; }
  double overhead_ms() const { return overhead_ms_; }
  bool is_cascade() const { return std::holds_alternative<CascadeArchitecture>(architecture_); }
  std::size_t level_count() const { return classifiers_.size(); }
  const TrainedClassifier& classifier(std::size_t level) const { return classifiers_.at(level); }
  /// True when every level is KNN over one index, computed once per query.
  bool shares_neighbors() const;

  /// Selection, then scaling, then classification. ShapeError when the row
  /// does not match the dataset width the premodel was built for.
  PremodelDecision predict(const FeatureRow& row) const;
  /// Same, for a vector already projected through selection() (unscaled).
  PremodelDecision predict_projected(std::span<const double> projected) const;

  friend Premodel build_single(ClassifierKind, std::span<const LabeledExample>,
                               const OutcomeTable&, std::span<const std::string>,
                               const Hyperparams&, FallbackPolicy, const PremodelOptions&);
  friend Premodel build_cascade(std::span<const ClassifierKind>, std::span<const LabeledExample>,
                                const OutcomeTable&, std::span<const std::string>,
                                const Hyperparams&, FallbackPolicy, const PremodelOptions&);
  friend nlohmann::json premodel_to_json(const Premodel&);
  friend Premodel premodel_from_json(const nlohmann::json&);

 private:
  Premodel() = default;

  PremodelArchitecture architecture_;
  std::vector<std::string> selected_;
  // Single: class c < selected_.size() is selected_[c]; kFailureClass is Failure.
  // Cascade: level classes are 0 (pass) and 1 (use this level's model). A
  // level left with no training examples is trained as all-pass.
  std::vector<TrainedClassifier> classifiers_;
  std::shared_ptr<const NeighborIndex> neighbors_;
  ScalerParams scaler_;
  FeatureSelection selection_;
  FallbackPolicy fallback_;
  double overhead_ms_ = 0.0;
};

/// Class id used for Failure in a single premodel.
inline constexpr int kFailureClass = -1;

/// Each labeled example's label restricted to `selected`: the fastest
/// selected model meeting the goal on that input, else Failure. Examples are
/// matched to the table by input_id (LookupError if absent).
std::vector<Label> relabel_to_selected(std::span<const LabeledExample> labeled,
                                       const OutcomeTable& table,
                                       std::span<const std::string> selected);

/// One multi-class classifier over |selected| + 1 classes.
Premodel build_single(ClassifierKind kind, std::span<const LabeledExample> labeled,
                      const OutcomeTable& table, std::span<const std::string> selected,
                      const Hyperparams& hp, FallbackPolicy fallback,
                      const PremodelOptions& options = {});

/// Level i decides "use selected[i]" and is trained on the examples whose
/// restricted label is not an earlier level's model. All-KNN cascades share
/// one neighbor index. `level_kinds` has one entry per selected model, or a
/// single entry reused for every level.
Premodel build_cascade(std::span<const ClassifierKind> level_kinds,
                       std::span<const LabeledExample> labeled, const OutcomeTable& table,
                       std::span<const std::string> selected, const Hyperparams& hp,
                       FallbackPolicy fallback, const PremodelOptions& options = {});

inline PremodelDecision premodel_predict(const Premodel& p, const FeatureRow& row) {
  return p.predict(row);
}

nlohmann::json premodel_to_json(const Premodel& p);
/// FormatError for malformed documents or a version other than
/// kPremodelFormatVersion.
Premodel premodel_from_json(const nlohmann::json& j);

void save_premodel(const Premodel& p, const std::filesystem::path& path);
Premodel load_premodel(const std::filesystem::path& path);

}  // namespace adasel
