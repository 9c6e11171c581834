#include "adasel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "adasel/csv.hpp"
#include "adasel/errors.hpp"
#include "adasel/folds.hpp"

namespace adasel {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

int dispatch_index(const OutcomeTable& t, const Label& label) {
  if (label.is_failure()) return -1;
  auto m = t.model_index(label.model_id());
  if (!m) throw LookupError("premodel chose unknown model '" + label.model_id() + "'");
  return static_cast<int>(*m);
}

double geometric_mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double log_sum = 0.0;
  for (double x : v) {
    if (x <= 0.0) return 0.0;
    log_sum += std::log(x);
  }
  return std::exp(log_sum / static_cast<double>(v.size()));
}

std::vector<LabeledExample> subset(std::span<const LabeledExample> all,
                                   std::span<const std::size_t> rows) {
  std::vector<LabeledExample> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(all[r]);
  return out;
}

void dispatch_adaptive(const AdaptiveRecipe& recipe, const EvaluationData& data,
                       const FoldPlan& folds, std::vector<int>& dispatch) {
  for (int f = 0; f < folds.k; ++f) {
    const auto train = folds.train_rows(f), test = folds.test_rows(f);
    if (test.empty()) continue;
    if (train.empty()) throw ProtocolError("fold " + std::to_string(f) + " has no training rows");
    const auto labeled = subset(data.labeled, train);

    PremodelOptions options;
    options.overhead_ms = recipe.overhead_ms;
    if (recipe.feature_pipeline) {
      const auto restricted = relabel_to_selected(labeled, data.table, recipe.selected_models);
      std::vector<FeatureRow> rows;
      std::vector<int> y;
      for (std::size_t i = 0; i < labeled.size(); ++i) {
        rows.push_back(labeled[i].features);
        y.push_back(dispatch_index(data.table, restricted[i]));
      }
      options.selection = run_feature_pipeline(rows, y, data.vocab_size,
                                               {recipe.kinds.front(), recipe.hp},
                                               *recipe.feature_pipeline);
    }
    const Premodel p =
        recipe.cascade
            ? build_cascade(recipe.kinds, labeled, data.table, recipe.selected_models, recipe.hp,
                            recipe.fallback, options)
            : build_single(recipe.kinds.front(), labeled, data.table, recipe.selected_models,
                           recipe.hp, recipe.fallback, options);
    for (auto r : test)
      dispatch[r] = dispatch_index(data.table, p.predict(data.labeled[r].features).choice);
  }
}

Matrix count_matrix(std::span<const LabeledExample> ex, std::span<const std::size_t> rows,
                    std::uint32_t vocab) {
  Matrix m(rows.size(), vocab);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& c = ex[rows[i]].features.counts;
    for (std::size_t k = 0; k < c.index.size(); ++k) m(i, c.index[k]) = c.count[k];
  }
  return m;
}

Matrix dense_matrix(std::span<const LabeledExample> ex, std::span<const std::size_t> rows) {
  const std::size_t d = ex.empty() ? 0 : ex.front().features.dense.size();
  Matrix m(rows.size(), d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy(ex[rows[i]].features.dense.begin(), ex[rows[i]].features.dense.end(),
              m.row(i).begin());
  return m;
}

void dispatch_stacking(const FeatureStackingRecipe& recipe, const EvaluationData& data,
                       const FoldPlan& folds, std::vector<int>& dispatch) {
  if (data.vocab_size == 0)
    throw ParameterError("feature stacking needs count features in the dataset");
  const auto& sel = recipe.selected_models;
  for (int f = 0; f < folds.k; ++f) {
    const auto train = folds.train_rows(f), test = folds.test_rows(f);
    if (test.empty()) continue;
    if (train.empty()) throw ProtocolError("fold " + std::to_string(f) + " has no training rows");
    const auto labeled = subset(data.labeled, train);
    const auto restricted = relabel_to_selected(labeled, data.table, sel);
    std::vector<int> y;
    for (const auto& l : restricted)
      y.push_back(l.is_failure()
                      ? kFailureClass
                      : static_cast<int>(std::find(sel.begin(), sel.end(), l.model_id()) -
                                         sel.begin()));

    const Matrix dense_raw = dense_matrix(data.labeled, train);
    const Matrix count_raw = count_matrix(data.labeled, train, data.vocab_size);
    const auto dense_scaler = fit_scaler(dense_raw);
    const auto count_scaler = fit_scaler(count_raw);
    const auto dense_clf =
        train_classifier(recipe.dense_kind, apply_scaler(dense_scaler, dense_raw), y, recipe.hp);
    const auto count_clf =
        train_classifier(recipe.count_kind, apply_scaler(count_scaler, count_raw), y, recipe.hp);

    const Matrix dense_test = apply_scaler(dense_scaler, dense_matrix(data.labeled, test));
    const Matrix count_test =
        apply_scaler(count_scaler, count_matrix(data.labeled, test, data.vocab_size));
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto a = dense_clf.predict(dense_test.row(i));
      const auto b = count_clf.predict(count_test.row(i));
      std::vector<double> avg(a.scores.size());
      for (std::size_t c = 0; c < avg.size(); ++c) avg[c] = (a.scores[c] + b.scores[c]) / 2.0;
      const auto best = std::max_element(avg.begin(), avg.end()) - avg.begin();
      const int cls = dense_clf.classes()[static_cast<std::size_t>(best)];
      const Label choice = cls == kFailureClass
                               ? (recipe.fallback.use_model
                                      ? Label::model(*recipe.fallback.use_model)
                                      : Label::failure())
                               : Label::model(sel[static_cast<std::size_t>(cls)]);
      dispatch[test[i]] = dispatch_index(data.table, choice);
    }
  }
}

double policy_overhead(const Policy& policy) {
  return std::visit(overloaded{
                        [](const AdaptiveRecipe& r) { return r.overhead_ms; },
                        [](const FeatureStackingRecipe& r) { return r.overhead_ms; },
                        [](const auto&) { return 0.0; },
                    },
                    policy.spec);
}

}  // namespace

std::vector<std::size_t> FoldPlan::test_rows(int f) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (fold[i] == f) rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(int f) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if (fold[i] != f) rows.push_back(i);
  return rows;
}

std::size_t FoldPlan::fold_size(int f) const {
  return static_cast<std::size_t>(std::count(fold.begin(), fold.end(), f));
}

FoldPlan kfold_split(std::span<const std::string> input_ids, int k, std::uint64_t seed,
                     std::span<const Label> stratify_by) {
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.input_ids.assign(input_ids.begin(), input_ids.end());
  if (stratify_by.empty()) {
    plan.fold = assign_folds(input_ids.size(), k, seed);
  } else {
    if (stratify_by.size() != input_ids.size())
      throw ShapeError("kfold_split: one stratification label per input required");
    std::set<Label> distinct(stratify_by.begin(), stratify_by.end());
    std::vector<Label> order(distinct.begin(), distinct.end());
    std::vector<int> cls;
    for (const auto& l : stratify_by)
      cls.push_back(static_cast<int>(std::lower_bound(order.begin(), order.end(), l) -
                                     order.begin()));
    plan.fold = assign_folds_stratified(cls, k, seed);
  }
  return plan;
}

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * recall * precision / denom : 0.0;
}

PrfSummary precision_recall_f1(const ConfusionMatrix& cm) {
  PrfSummary s;
  const std::size_t n = cm.classes();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t tp = cm.at(c, c), fp = 0, fn = 0;
    for (std::size_t o = 0; o < n; ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
    }
    ClassScores cs;
    cs.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    cs.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    cs.f1 = f1_score(cs.precision, cs.recall);
    s.per_class.push_back(cs);
    s.macro_precision += cs.precision;
    s.macro_recall += cs.recall;
    s.macro_f1 += cs.f1;
  }
  if (n) {
    s.macro_precision /= static_cast<double>(n);
    s.macro_recall /= static_cast<double>(n);
    s.macro_f1 /= static_cast<double>(n);
  }
  return s;
}

double bleups(double bleu, double time_s) {
  if (!(time_s > 0.0)) throw DomainError("bleups: inference time must be positive");
  return bleu * bleu / time_s;
}

EvaluationData prepare_evaluation(const Dataset& dataset, const Criterion& criterion) {
  EvaluationData d;
  d.table = build_outcomes(dataset, criterion);
  const auto optimum = optimum_indices(d.table);
  for (std::size_t i = 0; i < dataset.features.size(); ++i)
    d.labeled.push_back({dataset.features[i].input_id, dataset.features[i],
                         d.table.label_of(optimum[i])});
  d.vocab_size = dataset.vocab_size;
  return d;
}

PolicyMetrics evaluate_policy(const Policy& policy, const EvaluationData& data,
                              const FoldPlan& folds) {
  const auto& t = data.table;
  const std::size_t n = t.n_inputs();
  if (folds.input_ids != t.input_ids)
    throw ProtocolError("fold plan does not cover this dataset's inputs in order");
  if (folds.fold.size() != n) throw ProtocolError("fold plan size mismatch");

  const auto optimum = optimum_indices(t);
  std::vector<int> dispatch(n, -1);
  std::visit(overloaded{
                 [&](const SingleModelPolicy& p) {
                   auto m = t.model_index(p.model_id);
                   if (!m) throw LookupError("unknown model '" + p.model_id + "'");
                   std::fill(dispatch.begin(), dispatch.end(), static_cast<int>(*m));
                 },
                 [&](const OraclePolicy&) { dispatch = optimum; },
                 [&](const AdaptiveRecipe& r) { dispatch_adaptive(r, data, folds, dispatch); },
                 [&](const FeatureStackingRecipe& r) {
                   dispatch_stacking(r, data, folds, dispatch);
                 },
             },
             policy.spec);

  const double overhead = policy_overhead(policy);
  PolicyMetrics pm;
  pm.policy = policy.name;
  pm.single_model = policy.is_single_model();
  pm.dispatch = dispatch;

  std::vector<double> latency(n), energy(n);
  std::size_t hits = 0;
  const std::size_t failure_slot = t.n_models();
  ConfusionMatrix cm(t.n_models() + 1);
  std::vector<std::size_t> used(t.n_models() + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int d = dispatch[i];
    latency[i] = overhead;
    energy[i] = 0.0;
    if (d >= 0) {
      const auto m = static_cast<std::size_t>(d);
      latency[i] += t.latency(i, m);
      if (t.has_energy()) energy[i] = t.energy(i, m);
      hits += t.met_at(i, m) ? 1 : 0;
    }
    const std::size_t actual = optimum[i] < 0 ? failure_slot : static_cast<std::size_t>(optimum[i]);
    const std::size_t predicted = d < 0 ? failure_slot : static_cast<std::size_t>(d);
    cm.add(actual, predicted);
    ++used[predicted];
  }

  const double nn = static_cast<double>(std::max<std::size_t>(n, 1));
  pm.accuracy = static_cast<double>(hits) / nn;
  double lat_sum = 0.0, en_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lat_sum += latency[i];
    en_sum += energy[i];
  }
  pm.mean_latency_ms = lat_sum / nn;
  if (t.has_energy()) pm.mean_energy_mj = en_sum / nn;

  std::vector<double> fold_lat, fold_en;
  for (int f = 0; f < folds.k; ++f) {
    const auto rows = folds.test_rows(f);
    if (rows.empty()) continue;
    double l = 0.0, e = 0.0;
    for (auto r : rows) {
      l += latency[r];
      e += energy[r];
    }
    fold_lat.push_back(l / static_cast<double>(rows.size()));
    fold_en.push_back(e / static_cast<double>(rows.size()));
  }
  pm.geomean_latency_ms = geometric_mean(fold_lat);
  if (t.has_energy()) pm.geomean_energy_mj = geometric_mean(fold_en);

  // Macro scores over the classes that occur as an optimum or a dispatch.
  const auto prf = precision_recall_f1(cm);
  std::size_t active = 0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    std::size_t support = 0;
    for (std::size_t o = 0; o < cm.classes(); ++o) support += cm.at(c, o) + cm.at(o, c);
    if (!support) continue;
    ++active;
    pm.precision += prf.per_class[c].precision;
    pm.recall += prf.per_class[c].recall;
    pm.f1 += prf.per_class[c].f1;
  }
  if (active) {
    pm.precision /= static_cast<double>(active);
    pm.recall /= static_cast<double>(active);
    pm.f1 /= static_cast<double>(active);
  }

  for (std::size_t m = 0; m < t.n_models(); ++m)
    pm.utilization[t.model_ids[m]] = static_cast<double>(used[m]) / nn;
  pm.utilization[std::string(kFailureToken)] = static_cast<double>(used[failure_slot]) / nn;

  const auto oracle = oracle_metrics(t);
  pm.oracle_accuracy = oracle.accuracy;
  pm.oracle_latency_ms = oracle.mean_latency_ms;
  pm.oracle_gap = oracle.accuracy - pm.accuracy;
  return pm;
}

double speedup(const PolicyMetrics& row, const PolicyMetrics& reference) {
  return row.mean_latency_ms > 0.0 ? reference.mean_latency_ms / row.mean_latency_ms : 0.0;
}

double accuracy_delta(const PolicyMetrics& a, const PolicyMetrics& b) {
  return a.accuracy - b.accuracy;
}

std::optional<std::size_t> best_single_model(std::span<const PolicyMetrics> metrics) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    if (!metrics[i].single_model) continue;
    if (!best) {
      best = i;
      continue;
    }
    const auto& a = metrics[i];
    const auto& b = metrics[*best];
    if (a.accuracy > b.accuracy ||
        (a.accuracy == b.accuracy &&
         (a.mean_latency_ms < b.mean_latency_ms ||
          (a.mean_latency_ms == b.mean_latency_ms && a.policy < b.policy))))
      best = i;
  }
  return best;
}

std::string comparison_csv(std::span<const PolicyMetrics> metrics) {
  std::set<std::string> models;
  for (const auto& m : metrics)
    for (const auto& [id, share] : m.utilization)
      if (id != kFailureToken) models.insert(id);
  const auto ref = best_single_model(metrics);

  std::ostringstream out;
  out << "policy,accuracy,precision,recall,f1,mean_latency_ms,mean_energy_mj,oracle_gap";
  for (const auto& id : models) out << ",util_" << id;
  out << ",util_failure,speedup_vs_best_single,accuracy_delta_vs_best_single\n";
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const auto& m = metrics[i];
    out << m.policy << ',' << csv::format_double(m.accuracy) << ','
        << csv::format_double(m.precision) << ',' << csv::format_double(m.recall) << ','
        << csv::format_double(m.f1) << ',' << csv::format_double(m.mean_latency_ms) << ','
        << (m.mean_energy_mj ? csv::format_double(*m.mean_energy_mj) : "NA") << ','
        << csv::format_double(m.oracle_gap);
    for (const auto& id : models) {
      auto it = m.utilization.find(id);
      out << ',' << csv::format_double(it == m.utilization.end() ? 0.0 : it->second);
    }
    auto fail = m.utilization.find(std::string(kFailureToken));
    out << ',' << csv::format_double(fail == m.utilization.end() ? 0.0 : fail->second);
    if (ref && *ref != i)
      out << ',' << csv::format_double(speedup(m, metrics[*ref])) << ','
          << csv::format_double(accuracy_delta(m, metrics[*ref]));
    else
      out << ",,";
    out << '\n';
  }
  return out.str();
}

std::string comparison_summary(std::span<const PolicyMetrics> metrics) {
  const auto ref = best_single_model(metrics);
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  for (const auto& m : metrics) {
    out << m.policy << ": accuracy " << m.accuracy << " (oracle gap " << m.oracle_gap
        << "), F1 " << m.f1 << ", mean latency " << m.mean_latency_ms
        << " ms (fold geomean " << m.geomean_latency_ms << " ms)";
    if (m.mean_energy_mj) out << ", mean energy " << *m.mean_energy_mj << " mJ";
    if (ref && &metrics[*ref] != &m)
      out << ", " << speedup(m, metrics[*ref]) << "x speedup and "
          << 100.0 * accuracy_delta(m, metrics[*ref]) << " pp accuracy vs "
          << metrics[*ref].policy;
    out << '\n';
  }
  return out.str();
}

void comparison_report(std::span<const PolicyMetrics> metrics,
                       const std::filesystem::path& out_dir) {
  if (metrics.empty()) throw EmptyInputError("comparison_report: no policies");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  for (const auto& [name, text] :
       {std::pair{"report.csv", comparison_csv(metrics)},
        std::pair{"summary.txt", comparison_summary(metrics)}}) {
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write '" + (out_dir / name).string() + "'");
    out << text;
    if (!out) throw IoError("write to '" + (out_dir / name).string() + "' failed");
  }
}

}  // namespace adasel
