#pragma once

// Optimum-model labels: for each input, the fastest candidate that meets the
// evaluation goal, or Failure when none does.

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adasel/trace_store.hpp"

namespace adasel {

struct Criterion {
  enum class Kind { BooleanGoal, ScoreThreshold };
  Kind kind = Kind::BooleanGoal;
  double threshold = 0.0;  // ScoreThreshold only, in [0,1]

  static Criterion boolean_goal() { return {}; }
  /// Throws DomainError when threshold lies outside [0,1].
  static Criterion score_at_least(double threshold);
};

inline constexpr std::string_view kFailureToken = "FAILURE";

/// A model_id or Failure. Orders models by id with Failure last.
class Label {
 public:
  static Label failure() { return Label(); }
  static Label model(std::string id) { return Label(std::move(id)); }
  /// "FAILURE" maps to Failure, anything else to a model id.
  static Label parse(std::string_view token);

  bool is_failure() const { return !id_.has_value(); }
  const std::string& model_id() const;
  std::string str() const { return id_ ? *id_ : std::string(kFailureToken); }

  friend bool operator==(const Label&, const Label&) = default;
  friend bool operator<(const Label& a, const Label& b) {
    if (a.is_failure() || b.is_failure()) return !a.is_failure() && b.is_failure();
    return *a.id_ < *b.id_;
  }

 private:
  Label() = default;
  explicit Label(std::string id) : id_(std::move(id)) {}
  std::optional<std::string> id_;
};

struct LabeledExample {
  std::string input_id;
  FeatureRow features;
  Label label;
};

/// Throws CriterionModeError when the record carries the other mode's column.
bool meets_goal(const TraceRecord& record, const Criterion& criterion);

/// Trace outcomes under one criterion as dense input-major arrays. Models are
/// in ascending model_id order (so column order is the tie-break order);
/// inputs follow the dataset's feature rows.
struct OutcomeTable {
  std::vector<std::string> input_ids;
  std::vector<std::string> model_ids;
  std::vector<std::uint8_t> met;
  std::vector<double> latency_ms;
  std::vector<double> energy_mj;  // empty when the trace has no energy

  std::size_t n_inputs() const { return input_ids.size(); }
  std::size_t n_models() const { return model_ids.size(); }
  bool has_energy() const { return !energy_mj.empty(); }

  bool met_at(std::size_t input, std::size_t model) const {
    return met[input * n_models() + model] != 0;
  }
  double latency(std::size_t input, std::size_t model) const {
    return latency_ms[input * n_models() + model];
  }
  double energy(std::size_t input, std::size_t model) const {
    return energy_mj[input * n_models() + model];
  }

  std::optional<std::size_t> model_index(std::string_view id) const;
  std::optional<std::size_t> input_index(std::string_view id) const;

  Label label_of(int model_index) const {
    return model_index < 0 ? Label::failure()
                           : Label::model(model_ids[static_cast<std::size_t>(model_index)]);
  }
};

/// Needs a complete matrix (CompletenessError otherwise).
OutcomeTable build_outcomes(const Dataset& dataset, const Criterion& criterion);

/// Column index of each input's optimum model, -1 for Failure. With a
/// non-empty `allowed` mask only those columns compete, which gives the best
/// alternative among a selected subset.
std::vector<int> optimum_indices(const OutcomeTable& table,
                                 std::span<const std::uint8_t> allowed = {});

/// Scans the dataset records of one input directly. LookupError for an
/// unknown input.
Label optimum_model(const std::string& input_id, const Dataset& dataset,
                    const Criterion& criterion);

std::vector<LabeledExample> label_dataset(const Dataset& dataset, const Criterion& criterion);

/// Share of examples per label; Failure is keyed "FAILURE". EmptyInputError
/// for an empty list.
std::map<std::string, double> optimal_share(std::span<const LabeledExample> labeled);

struct OracleSummary {
  double accuracy = 0.0;
  double mean_latency_ms = 0.0;
  std::optional<double> mean_energy_mj;
};

/// Always dispatching the optimum. Failure inputs are misses with zero cost.
OracleSummary oracle_metrics(const OutcomeTable& table);
OracleSummary oracle_metrics(const Dataset& dataset, const Criterion& criterion);

void write_labels_csv(std::span<const LabeledExample> labeled, const std::filesystem::path& path);
std::vector<std::pair<std::string, Label>> read_labels_csv(const std::filesystem::path& path);

}  // namespace adasel
