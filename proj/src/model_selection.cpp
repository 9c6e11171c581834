#include "adasel/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "adasel/csv.hpp"
#include "adasel/errors.hpp"

namespace adasel {

namespace {

std::size_t covered_count(const OutcomeTable& t, std::span<const std::size_t> set) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < t.n_inputs(); ++i)
    for (auto m : set)
      if (t.met_at(i, m)) {
        ++hits;
        break;
      }
  return hits;
}

ModelSet with(std::span<const std::size_t> set, std::size_t extra) {
  ModelSet s(set.begin(), set.end());
  s.push_back(extra);
  return s;
}

}  // namespace

const char* to_string(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::Accuracy: return "accuracy";
    case SelectionMethod::Optimal: return "optimal";
    case SelectionMethod::Alternate: return "alternate";
  }
  return "?";
}

const char* to_string(ImprovementMetric m) {
  return m == ImprovementMetric::AccuracyGain ? "accuracy_gain" : "optimal_gain";
}

SelectionMethod parse_selection_method(std::string_view name) {
  if (name == "accuracy") return SelectionMethod::Accuracy;
  if (name == "optimal") return SelectionMethod::Optimal;
  if (name == "alternate") return SelectionMethod::Alternate;
  throw ParameterError("selection method must be accuracy, optimal or alternate");
}

double set_accuracy(const OutcomeTable& t, std::span<const std::size_t> set) {
  if (set.empty() || t.n_inputs() == 0) return 0.0;
  return static_cast<double>(covered_count(t, set)) / static_cast<double>(t.n_inputs());
}

double set_mean_latency(const OutcomeTable& t, std::span<const std::size_t> set) {
  if (set.empty() || t.n_inputs() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < t.n_inputs(); ++i) {
    double fastest_met = std::numeric_limits<double>::infinity();
    double slowest = 0.0;
    for (auto m : set) {
      slowest = std::max(slowest, t.latency(i, m));
      if (t.met_at(i, m)) fastest_met = std::min(fastest_met, t.latency(i, m));
    }
    total += std::isinf(fastest_met) ? slowest : fastest_met;
  }
  return total / static_cast<double>(t.n_inputs());
}

std::string most_optimum_model(std::span<const LabeledExample> labeled) {
  if (labeled.empty()) throw EmptyInputError("most_optimum_model: no labeled examples");
  std::map<std::string, std::size_t> counts;
  for (const auto& ex : labeled)
    if (!ex.label.is_failure()) ++counts[ex.label.model_id()];
  if (counts.empty()) throw NoViableModelError("every input is labeled Failure");
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

std::size_t most_optimum_model(const OutcomeTable& t) {
  if (t.n_inputs() == 0) throw EmptyInputError("most_optimum_model: empty trace");
  const auto optimum = optimum_indices(t);
  std::vector<std::size_t> counts(t.n_models(), 0);
  for (int o : optimum)
    if (o >= 0) ++counts[static_cast<std::size_t>(o)];
  const auto best = std::max_element(counts.begin(), counts.end());
  if (*best == 0) throw NoViableModelError("every input is labeled Failure");
  return static_cast<std::size_t>(best - counts.begin());
}

Improvement candidate_improvement(const OutcomeTable& t, std::span<const std::size_t> current,
                                  std::size_t candidate, ImprovementMetric metric) {
  if (std::find(current.begin(), current.end(), candidate) != current.end())
    throw ParameterError("candidate is already in the current set");
  const auto grown = with(current, candidate);
  Improvement imp;
  if (t.n_inputs() > 0) {
    const auto before = covered_count(t, current), after = covered_count(t, grown);
    imp.accuracy_gain =
        static_cast<double>(after - before) / static_cast<double>(t.n_inputs());
  }
  imp.latency_delta = set_mean_latency(t, grown) - set_mean_latency(t, current);
  if (metric == ImprovementMetric::AccuracyGain) {
    imp.score = imp.accuracy_gain;
  } else if (imp.latency_delta <= 0.0) {
    imp.score = imp.accuracy_gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    imp.score = imp.accuracy_gain / imp.latency_delta;
  }
  return imp;
}

ImprovementMetric metric_for_iteration(SelectionMethod method, int iteration) {
  switch (method) {
    case SelectionMethod::Accuracy: return ImprovementMetric::AccuracyGain;
    case SelectionMethod::Optimal: return ImprovementMetric::OptimalGain;
    case SelectionMethod::Alternate:
      return iteration % 2 == 1 ? ImprovementMetric::OptimalGain : ImprovementMetric::AccuracyGain;
  }
  return ImprovementMetric::AccuracyGain;
}

SelectionResult select_models(const OutcomeTable& t, const SelectionConfig& config) {
  if (!(config.theta > 0.0)) throw ParameterError("theta must be positive");
  const std::size_t first = most_optimum_model(t);
  const double n = static_cast<double>(t.n_inputs());

  SelectionResult res;
  ModelSet current{first};
  std::size_t covered = covered_count(t, current);
  res.models.push_back(t.model_ids[first]);
  res.log.push_back({0, ImprovementMetric::AccuracyGain, t.model_ids[first], 0.0,
                     static_cast<double>(covered) / n, set_mean_latency(t, current), true});

  for (int iteration = 1; current.size() < t.n_models(); ++iteration) {
    const auto metric = metric_for_iteration(config.method, iteration);
    std::vector<std::size_t> candidates;
    for (std::size_t m = 0; m < t.n_models(); ++m)
      if (std::find(current.begin(), current.end(), m) == current.end()) candidates.push_back(m);

    std::vector<Improvement> imps(candidates.size());
    const auto nc = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < nc; ++c)
      imps[static_cast<std::size_t>(c)] =
          candidate_improvement(t, current, candidates[static_cast<std::size_t>(c)], metric);

    std::size_t best = 0;
    for (std::size_t c = 1; c < candidates.size(); ++c)
      if (imps[c].score > imps[best].score) best = c;

    const std::size_t pick = candidates[best];
    const std::size_t covered_after = covered_count(t, with(current, pick));
    const double gain_pct = 100.0 * static_cast<double>(covered_after - covered) / n;
    const bool keep = config.literal_pseudocode || gain_pct >= config.theta;
    res.log.push_back({iteration, metric, t.model_ids[pick], static_cast<double>(covered) / n,
                       static_cast<double>(covered_after) / n, imps[best].latency_delta, keep});
    if (!keep) break;
    current.push_back(pick);
    covered = covered_after;
    res.models.push_back(t.model_ids[pick]);
    if (config.literal_pseudocode && !(gain_pct > config.theta)) break;
  }
  res.accuracy = set_accuracy(t, current);
  res.mean_latency_ms = set_mean_latency(t, current);
  return res;
}

std::vector<SweepRow> sensitivity_sweep(const OutcomeTable& t,
                                        std::span<const SelectionMethod> methods,
                                        std::span<const double> thetas) {
  std::vector<SweepRow> rows;
  for (auto method : methods)
    for (double theta : thetas)
      rows.push_back({method, theta, select_models(t, {method, theta, false})});
  return rows;
}

void write_selection_log(const SelectionResult& r, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "iteration,metric,candidate,accuracy_before,accuracy_after,latency_delta,chosen\n";
  for (const auto& s : r.log)
    out << s.iteration << ',' << (s.iteration == 0 ? "most_optimal" : to_string(s.metric)) << ','
        << s.candidate << ',' << csv::format_double(s.accuracy_before) << ','
        << csv::format_double(s.accuracy_after) << ',' << csv::format_double(s.latency_delta)
        << ',' << (s.chosen ? 1 : 0) << '\n';
}

void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "method,theta,n_models,models,accuracy,mean_latency_ms\n";
  for (const auto& row : rows) {
    std::string models;
    for (const auto& m : row.result.models) models += (models.empty() ? "" : ";") + m;
    out << to_string(row.method) << ',' << csv::format_double(row.theta) << ','
        << row.result.models.size() << ',' << models << ','
        << csv::format_double(row.result.accuracy) << ','
        << csv::format_double(row.result.mean_latency_ms) << '\n';
  }
}

}  // namespace adasel
