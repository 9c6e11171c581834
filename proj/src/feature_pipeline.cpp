#include "adasel/feature_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "adasel/csv.hpp"
#include "adasel/errors.hpp"
#include "adasel/folds.hpp"
#include "adasel/kernels.hpp"

namespace adasel {

FeatureSelection FeatureSelection::keep_all(std::size_t dense_width) {
  FeatureSelection s;
  s.dense_width = dense_width;
  s.kept_dense.resize(dense_width);
  std::iota(s.kept_dense.begin(), s.kept_dense.end(), 0);
  return s;
}

std::vector<double> FeatureSelection::project(const FeatureRow& row) const {
  if (row.dense.size() != dense_width)
    throw ShapeError("feature row '" + row.input_id + "' has " +
                     std::to_string(row.dense.size()) + " dense values, expected " +
                     std::to_string(dense_width));
  std::vector<double> out;
  out.reserve(output_width());
  for (auto i : kept_dense) out.push_back(row.dense[i]);
  for (auto c : kept_counts) out.push_back(static_cast<double>(row.counts.at(c)));
  return out;
}

Matrix FeatureSelection::project(std::span<const FeatureRow> rows) const {
  Matrix m(rows.size(), output_width());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto v = project(rows[r]);
    std::copy(v.begin(), v.end(), m.row(r).begin());
  }
  return m;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ParameterError("pearson_correlation needs two equal-length vectors of size >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedCorrelationError("pearson_correlation: constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

FeatureSelection correlation_filter(const Matrix& features, const PipelineConfig& config) {
  if (!(config.pcc_threshold > 0.0 && config.pcc_threshold <= 1.0))
    throw ParameterError("pcc_threshold must lie in (0,1]");
  const std::size_t d = features.cols();
  FeatureSelection sel;
  sel.dense_width = d;
  if (features.rows() < 2 || d == 0) {
    sel = FeatureSelection::keep_all(d);
    return sel;
  }
  const Matrix r = kernels::omp::correlation_matrix(features);
  std::vector<bool> kept(d, true);
  for (std::size_t i = 0; i < d; ++i) {
    if (!kept[i]) continue;
    for (std::size_t j = i + 1; j < d; ++j) {
      if (!kept[j]) continue;
      const double a = std::abs(r(i, j));
      if (std::isnan(a) || a <= config.pcc_threshold) continue;
      kept[j] = false;
      sel.removed_by_correlation.push_back({j, i, a});
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    if (kept[i]) sel.kept_dense.push_back(i);
  return sel;
}

double cross_validated_accuracy(const Matrix& x, std::span<const int> y,
                                std::span<const std::size_t> columns, const ClassifierSpec& spec,
                                int folds, std::uint64_t seed) {
  const std::size_t n = x.rows();
  if (n == 0) throw EmptyInputError("cross_validated_accuracy: no rows");
  const Matrix sub = x.select_cols(columns);
  const int k = std::min<int>(folds, static_cast<int>(n));
  if (k < 2) {
    const auto c = train_classifier(spec.kind, sub, y, spec.hp);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < n; ++r) hits += c.predict(sub.row(r)).label == y[r];
    return static_cast<double>(hits) / static_cast<double>(n);
  }
  const auto fold = assign_folds(n, k, seed);
  std::size_t hits = 0;
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < n; ++r) (fold[r] == f ? test_rows : train_rows).push_back(r);
    std::vector<int> train_y;
    for (auto r : train_rows) train_y.push_back(y[r]);
    const auto c = train_classifier(spec.kind, sub.select_rows(train_rows), train_y, spec.hp);
    for (auto r : test_rows) hits += c.predict(sub.row(r)).label == y[r];
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

FeatureSelection greedy_importance_selection(const Matrix& x, std::span<const int> y,
                                             std::span<const std::size_t> start,
                                             const ClassifierSpec& trainer,
                                             const PipelineConfig& config) {
  if (x.rows() == 0) throw EmptyInputError("greedy_importance_selection: no examples");
  if (y.size() != x.rows()) throw ShapeError("greedy_importance_selection: label count mismatch");
  if (config.greedy_min_accuracy_drop < 0.0)
    throw ParameterError("greedy_min_accuracy_drop must be nonnegative");

  FeatureSelection sel;
  sel.dense_width = x.cols();
  std::vector<std::size_t> current(start.begin(), start.end());
  if (current.empty()) return sel;

  auto accuracy = [&](std::span<const std::size_t> cols) {
    return cross_validated_accuracy(x, y, cols, trainer, config.greedy_cv_folds, config.seed);
  };

  double baseline = accuracy(current);
  std::vector<double> deltas, without_acc;
  while (true) {
    if (current.size() == 1) {
      deltas.assign(1, 0.0);
      break;
    }
    deltas.assign(current.size(), 0.0);
    without_acc.assign(current.size(), 0.0);
    const auto m = static_cast<std::ptrdiff_t>(current.size());
    // Candidates are independent; each writes only its own slot.
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t c = 0; c < m; ++c) {
      std::vector<std::size_t> without;
      for (std::ptrdiff_t o = 0; o < m; ++o)
        if (o != c) without.push_back(current[static_cast<std::size_t>(o)]);
      const auto slot = static_cast<std::size_t>(c);
      without_acc[slot] = accuracy(without);
      deltas[slot] = baseline - without_acc[slot];
    }
    std::size_t least = 0;
    for (std::size_t c = 1; c < current.size(); ++c)
      if (deltas[c] < deltas[least] ||
          (deltas[c] == deltas[least] && current[c] < current[least]))
        least = c;
    if (deltas[least] > config.greedy_min_accuracy_drop) break;
    sel.removed_by_greedy.push_back({current[least], deltas[least]});
    baseline = without_acc[least];
    current.erase(current.begin() + static_cast<std::ptrdiff_t>(least));
  }

  sel.kept_dense = current;
  double total = 0.0;
  for (double d : deltas) total += std::max(d, 0.0);
  sel.importance.resize(current.size());
  for (std::size_t i = 0; i < current.size(); ++i)
    sel.importance[i] = total > 0.0 ? std::max(deltas[i], 0.0) / total
                                    : 1.0 / static_cast<double>(current.size());
  return sel;
}

namespace {

std::vector<int> label_classes(std::span<const LabeledExample> labeled) {
  std::map<Label, int> ids;
  for (const auto& ex : labeled) ids.emplace(ex.label, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  std::vector<int> y;
  for (const auto& ex : labeled) y.push_back(ids.at(ex.label));
  return y;
}

}  // namespace

FeatureSelection greedy_importance_selection(std::span<const LabeledExample> labeled,
                                             const ClassifierSpec& trainer,
                                             const PipelineConfig& config) {
  if (labeled.empty()) throw EmptyInputError("greedy_importance_selection: no examples");
  std::vector<FeatureRow> rows;
  for (const auto& ex : labeled) rows.push_back(ex.features);
  const std::size_t d = rows.front().dense.size();
  const Matrix raw = FeatureSelection::keep_all(d).project(rows);
  const Matrix scaled = apply_scaler(fit_scaler(raw), raw);
  std::vector<std::size_t> all(d);
  std::iota(all.begin(), all.end(), 0);
  return greedy_importance_selection(scaled, label_classes(labeled), all, trainer, config);
}

std::vector<double> chi2_scores(std::span<const SparseCounts> counts, std::span<const int> labels,
                                std::uint32_t vocab_size) {
  if (counts.size() != labels.size())
    throw ParameterError("chi2: " + std::to_string(counts.size()) + " rows but " +
                         std::to_string(labels.size()) + " labels");
  std::map<int, std::size_t> class_slot;
  for (int l : labels) class_slot.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [l, s] : class_slot) s = next++;
  const std::size_t nc = class_slot.size();
  const double n = static_cast<double>(labels.size());

  std::vector<double> class_total(nc, 0.0);
  // present[f * nc + c]: rows of class c in which feature f occurs
  std::vector<double> present(static_cast<std::size_t>(vocab_size) * nc, 0.0);
  for (std::size_t r = 0; r < counts.size(); ++r) {
    const auto c = class_slot.at(labels[r]);
    class_total[c] += 1.0;
    for (std::size_t k = 0; k < counts[r].index.size(); ++k) {
      const auto f = counts[r].index[k];
      if (f >= vocab_size) throw ShapeError("chi2: count index beyond vocabulary");
      if (counts[r].count[k] > 0) present[f * nc + c] += 1.0;
    }
  }

  std::vector<double> stat(vocab_size, 0.0);
  for (std::uint32_t f = 0; f < vocab_size; ++f) {
    double row_present = 0.0;
    for (std::size_t c = 0; c < nc; ++c) row_present += present[f * nc + c];
    const double row_absent = n - row_present;
    double s = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const double obs_p = present[f * nc + c];
      const double obs_a = class_total[c] - obs_p;
      const double exp_p = row_present * class_total[c] / n;
      const double exp_a = row_absent * class_total[c] / n;
      if (exp_p > 0.0) s += (obs_p - exp_p) * (obs_p - exp_p) / exp_p;
      if (exp_a > 0.0) s += (obs_a - exp_a) * (obs_a - exp_a) / exp_a;
    }
    stat[f] = s;
  }
  return stat;
}

std::vector<std::uint32_t> chi2_select(std::span<const SparseCounts> counts,
                                       std::span<const int> labels, std::uint32_t vocab_size,
                                       int k) {
  if (k <= 0) throw ParameterError("chi2_select: k must be positive");
  const auto stat = chi2_scores(counts, labels, vocab_size);
  std::vector<std::uint32_t> idx(vocab_size);
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return stat[a] > stat[b]; });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(k)));
  return idx;
}

ScalerParams fit_scaler(const Matrix& train) {
  if (train.rows() == 0) throw EmptyInputError("fit_scaler: no training rows");
  ScalerParams p{std::vector<double>(train.row(0).begin(), train.row(0).end()),
                 std::vector<double>(train.row(0).begin(), train.row(0).end())};
  for (std::size_t r = 1; r < train.rows(); ++r)
    for (std::size_t c = 0; c < train.cols(); ++c) {
      p.min[c] = std::min(p.min[c], train(r, c));
      p.max[c] = std::max(p.max[c], train(r, c));
    }
  return p;
}

std::vector<double> apply_scaler(const ScalerParams& params, std::span<const double> row) {
  if (row.size() != params.min.size())
    throw ShapeError("apply_scaler: expected width " + std::to_string(params.min.size()) +
                     ", got " + std::to_string(row.size()));
  std::vector<double> out(row.size());
  for (std::size_t c = 0; c < row.size(); ++c) {
    const double span = params.max[c] - params.min[c];
    out[c] = span > 0.0 ? std::clamp((row[c] - params.min[c]) / span, 0.0, 1.0) : 0.0;
  }
  return out;
}

Matrix apply_scaler(const ScalerParams& params, const Matrix& rows) {
  Matrix out(rows.rows(), rows.cols());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    const auto v = apply_scaler(params, rows.row(r));
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

FeatureSelection run_feature_pipeline(std::span<const FeatureRow> rows, std::span<const int> labels,
                                      std::uint32_t vocab_size, const ClassifierSpec& trainer,
                                      const PipelineConfig& config) {
  if (rows.empty()) throw EmptyInputError("run_feature_pipeline: no rows");
  const std::size_t d = rows.front().dense.size();
  const Matrix dense = FeatureSelection::keep_all(d).project(rows);

  FeatureSelection sel = correlation_filter(dense, config);
  if (!sel.kept_dense.empty()) {
    const Matrix scaled = apply_scaler(fit_scaler(dense), dense);
    auto greedy = greedy_importance_selection(scaled, labels, sel.kept_dense, trainer, config);
    sel.kept_dense = std::move(greedy.kept_dense);
    sel.removed_by_greedy = std::move(greedy.removed_by_greedy);
    sel.importance = std::move(greedy.importance);
  }
  if (vocab_size > 0) {
    std::vector<SparseCounts> counts;
    for (const auto& r : rows) counts.push_back(r.counts);
    const auto stat = chi2_scores(counts, labels, vocab_size);
    sel.kept_counts = chi2_select(counts, labels, vocab_size, config.chi2_k);
    for (auto c : sel.kept_counts) sel.chi2_scores.push_back(stat[c]);
  }
  return sel;
}

void write_selection_report(const FeatureSelection& sel, std::span<const std::string> dense_names,
                            const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  auto name = [&](std::size_t i) {
    return i < dense_names.size() ? "f_" + dense_names[i] : "f#" + std::to_string(i);
  };
  out << "stage,feature,action,statistic\n";
  for (const auto& r : sel.removed_by_correlation)
    out << "correlation," << name(r.removed) << ",removed," << csv::format_double(r.abs_r)
        << '\n';
  for (const auto& r : sel.removed_by_greedy)
    out << "greedy," << name(r.feature) << ",removed," << csv::format_double(r.accuracy_delta)
        << '\n';
  for (std::size_t i = 0; i < sel.kept_dense.size(); ++i)
    out << "greedy," << name(sel.kept_dense[i]) << ",kept,"
        << (i < sel.importance.size() ? csv::format_double(sel.importance[i]) : "") << '\n';
  for (std::size_t i = 0; i < sel.kept_counts.size(); ++i)
    out << "chi2,c_" << sel.kept_counts[i] << ",kept,"
        << (i < sel.chi2_scores.size() ? csv::format_double(sel.chi2_scores[i]) : "") << '\n';
}

nlohmann::json selection_to_json(const FeatureSelection& s) {
  using nlohmann::json;
  json corr = json::array(), greedy = json::array();
  for (const auto& r : s.removed_by_correlation)
    corr.push_back({{"removed", r.removed}, {"kept", r.kept}, {"abs_r", r.abs_r}});
  for (const auto& r : s.removed_by_greedy)
    greedy.push_back({{"feature", r.feature}, {"accuracy_delta", r.accuracy_delta}});
  return {{"dense_width", s.dense_width},
          {"kept_dense", s.kept_dense},
          {"kept_counts", s.kept_counts},
          {"removed_by_correlation", std::move(corr)},
          {"removed_by_greedy", std::move(greedy)},
          {"importance", s.importance},
          {"chi2_scores", s.chi2_scores}};
}

FeatureSelection selection_from_json(const nlohmann::json& fs) {
  FeatureSelection s;
  try {
    s.dense_width = fs.at("dense_width").get<std::size_t>();
    s.kept_dense = fs.at("kept_dense").get<std::vector<std::size_t>>();
    s.kept_counts = fs.at("kept_counts").get<std::vector<std::uint32_t>>();
    for (const auto& r : fs.at("removed_by_correlation"))
      s.removed_by_correlation.push_back({r.at("removed").get<std::size_t>(),
                                          r.at("kept").get<std::size_t>(),
                                          r.at("abs_r").get<double>()});
    for (const auto& r : fs.at("removed_by_greedy"))
      s.removed_by_greedy.push_back(
          {r.at("feature").get<std::size_t>(), r.at("accuracy_delta").get<double>()});
    s.importance = fs.at("importance").get<std::vector<double>>();
    s.chi2_scores = fs.at("chi2_scores").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("feature selection: ") + e.what());
  }
  for (auto f : s.kept_dense)
    if (f >= s.dense_width) throw FormatError("feature selection keeps a column past dense_width");
  return s;
}

}  // namespace adasel
