#pragma once

// Greedy choice of which candidate models the premodel chooses among. Every
// quantity here is an "ideal dispatch" figure: it assumes a perfect selector
// within the chosen set.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adasel/labeling.hpp"

namespace adasel {

enum class SelectionMethod { Accuracy, Optimal, Alternate };
enum class ImprovementMetric { AccuracyGain, OptimalGain };

const char* to_string(SelectionMethod m);
const char* to_string(ImprovementMetric m);
SelectionMethod parse_selection_method(std::string_view name);

struct SelectionConfig {
  SelectionMethod method = SelectionMethod::Accuracy;
  double theta = 0.5;  // percentage points
  /// Add the chosen model before testing its gain, as the printed loop does,
  /// which keeps one sub-threshold model. Off by default.
  bool literal_pseudocode = false;
};

/// Model sets are column indices into the OutcomeTable.
using ModelSet = std::vector<std::size_t>;

/// Fraction of inputs on which some member meets the goal (0 for an empty set).
double set_accuracy(const OutcomeTable& table, std::span<const std::size_t> set);

/// Mean per-input latency with ideal dispatch: the fastest goal-meeting
/// member, or the slowest member when none meets the goal.
double set_mean_latency(const OutcomeTable& table, std::span<const std::size_t> set);

/// Most frequent non-Failure label, ties by ascending model_id.
/// NoViableModelError when every label is Failure, EmptyInputError when empty.
std::string most_optimum_model(std::span<const LabeledExample> labeled);
std::size_t most_optimum_model(const OutcomeTable& table);

struct Improvement {
  double accuracy_gain = 0.0;  // fraction, not percent
  double latency_delta = 0.0;  // ideal-dispatch mean latency change, ms
  double score = 0.0;          // what the metric ranks by; +inf when dominant
};

/// AccuracyGain scores the accuracy gain; OptimalGain scores gain per ms of
/// added mean latency, with any positive gain at no latency cost ranked +inf.
/// ParameterError when `candidate` is already in `current`.
Improvement candidate_improvement(const OutcomeTable& table, std::span<const std::size_t> current,
                                  std::size_t candidate, ImprovementMetric metric);

struct SelectionStep {
  int iteration = 0;
  ImprovementMetric metric = ImprovementMetric::AccuracyGain;
  std::string candidate;
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  double latency_delta = 0.0;
  bool chosen = false;
};

struct SelectionResult {
  std::vector<std::string> models;  // in selection order
  std::vector<SelectionStep> log;   // iteration 0 is the initial model
  double accuracy = 0.0;
  double mean_latency_ms = 0.0;
};

/// Starts from the most frequently optimal model, then adds the best
/// candidate under the iteration's metric while its realized accuracy gain is
/// at least theta percentage points. The candidate that falls short is logged
/// and discarded.
SelectionResult select_models(const OutcomeTable& table, const SelectionConfig& config);

ImprovementMetric metric_for_iteration(SelectionMethod method, int iteration);

struct SweepRow {
  SelectionMethod method;
  double theta;
  SelectionResult result;
};

std::vector<SweepRow> sensitivity_sweep(const OutcomeTable& table,
                                        std::span<const SelectionMethod> methods,
                                        std::span<const double> thetas);

void write_selection_log(const SelectionResult& result, const std::filesystem::path& path);
void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);

}  // namespace adasel
