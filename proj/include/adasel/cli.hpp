#pragma once

// Batch command surface: validate, label, select-features, select-models,
// train, evaluate, predict, sweep.

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "adasel/classifiers.hpp"
#include "adasel/feature_pipeline.hpp"
#include "adasel/labeling.hpp"
#include "adasel/model_selection.hpp"
#include "adasel/premodel.hpp"
#include "json.hpp"

namespace adasel::cli {

struct RunConfig {
  std::filesystem::path trace;
  std::filesystem::path features;
  std::filesystem::path models;  // optional sidecar
  std::filesystem::path out_dir = "out";
  std::string criterion = "boolean_goal";  // or "score_at_least"
  double score_threshold = 0.5;
  SelectionConfig selection;
  PipelineConfig pipeline;
  Hyperparams hyperparams;
  std::string architecture = "single";  // or "cascade"
  std::vector<ClassifierKind> classifiers{ClassifierKind::KNN};
  std::string fallback = "failure";
  double overhead_ms = 0.0;
  std::uint64_t seed = 0;
  int folds = 10;
  bool stratify_folds = false;
  bool evaluate_feature_pipeline = false;
  double calibration_fraction = 0.2;
  double theta_cal = 0.5;
  double trust_threshold = 0.5;
  double radius_test_fraction = 0.25;
  std::vector<double> radii{0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 1.0,
                            std::numeric_limits<double>::infinity()};
  std::vector<double> sweep_thetas{5.0, 2.0, 1.0, 0.5};

  Criterion make_criterion() const;
};

/// Overlays the keys present in `j` onto `config`. Unknown keys and wrong
/// types throw ParameterError.
void apply_config_json(RunConfig& config, const nlohmann::json& j);

/// Runs one command line. Returns the process exit status: 0 success,
/// 1 domain failure, 2 usage error or missing input.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adasel::cli
