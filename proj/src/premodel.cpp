#include "adasel/premodel.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "adasel/errors.hpp"

namespace adasel {

namespace {

using nlohmann::json;

struct Prepared {
  Matrix scaled;
  ScalerParams scaler;
  FeatureSelection selection;
  std::vector<Label> labels;
};

void check_selected(std::span<const std::string> selected, const OutcomeTable& table) {
  if (selected.empty()) throw ParameterError("premodel needs at least one selected model");
  std::set<std::string> seen;
  for (const auto& id : selected) {
    if (!table.model_index(id)) throw LookupError("selected model '" + id + "' is not in the trace");
    if (!seen.insert(id).second) throw ParameterError("selected model '" + id + "' listed twice");
  }
}

void check_fallback(const FallbackPolicy& fallback, const OutcomeTable& table) {
  if (fallback.use_model && !table.model_index(*fallback.use_model))
    throw LookupError("fallback model '" + *fallback.use_model + "' is not in the trace");
}

Prepared prepare(std::span<const LabeledExample> labeled, const OutcomeTable& table,
                 std::span<const std::string> selected, const PremodelOptions& options) {
  if (labeled.empty()) throw EmptyInputError("premodel training set is empty");
  check_selected(selected, table);
  Prepared p;
  p.selection = options.selection;
  if (p.selection.dense_width == 0 && p.selection.kept_dense.empty() &&
      p.selection.kept_counts.empty())
    p.selection = FeatureSelection::keep_all(labeled.front().features.dense.size());
  std::vector<FeatureRow> rows;
  rows.reserve(labeled.size());
  for (const auto& ex : labeled) rows.push_back(ex.features);
  const Matrix raw = p.selection.project(rows);
  p.scaler = fit_scaler(raw);
  p.scaled = apply_scaler(p.scaler, raw);
  p.labels = relabel_to_selected(labeled, table, selected);
  return p;
}

int selected_class(const Label& label, std::span<const std::string> selected) {
  if (label.is_failure()) return kFailureClass;
  auto it = std::find(selected.begin(), selected.end(), label.model_id());
  return static_cast<int>(it - selected.begin());
}

Label apply_fallback(const FallbackPolicy& fallback) {
  return fallback.use_model ? Label::model(*fallback.use_model) : Label::failure();
}

}  // namespace

FallbackPolicy FallbackPolicy::parse(std::string_view text) {
  if (text == "failure" || text == "FAILURE") return report_failure();
  if (text.starts_with("model:") && text.size() > 6) return use(std::string(text.substr(6)));
  throw ParameterError("fallback must be 'failure' or 'model:<id>', got '" + std::string(text) +
                       "'");
}

std::string FallbackPolicy::str() const { return use_model ? "model:" + *use_model : "failure"; }

std::vector<Label> relabel_to_selected(std::span<const LabeledExample> labeled,
                                       const OutcomeTable& table,
                                       std::span<const std::string> selected) {
  std::vector<std::uint8_t> allowed(table.n_models(), 0);
  for (const auto& id : selected) {
    auto m = table.model_index(id);
    if (!m) throw LookupError("selected model '" + id + "' is not in the trace");
    allowed[*m] = 1;
  }
  const auto best = optimum_indices(table, allowed);
  std::vector<Label> out;
  out.reserve(labeled.size());
  for (const auto& ex : labeled) {
    auto i = table.input_index(ex.input_id);
    if (!i) throw LookupError("labeled input '" + ex.input_id + "' is not in the trace");
    out.push_back(table.label_of(best[*i]));
  }
  return out;
}

Premodel build_single(ClassifierKind kind, std::span<const LabeledExample> labeled,
                      const OutcomeTable& table, std::span<const std::string> selected,
                      const Hyperparams& hp, FallbackPolicy fallback,
                      const PremodelOptions& options) {
  check_fallback(fallback, table);
  auto prep = prepare(labeled, table, selected, options);
  std::vector<int> y;
  y.reserve(prep.labels.size());
  for (const auto& l : prep.labels) y.push_back(selected_class(l, selected));

  Premodel p;
  p.architecture_ = SingleArchitecture{kind};
  p.selected_.assign(selected.begin(), selected.end());
  p.classifiers_.push_back(train_classifier(kind, prep.scaled, y, hp));
  p.neighbors_ = p.classifiers_.front().neighbor_index();
  p.scaler_ = std::move(prep.scaler);
  p.selection_ = std::move(prep.selection);
  p.fallback_ = std::move(fallback);
  p.overhead_ms_ = options.overhead_ms;
  return p;
}

Premodel build_cascade(std::span<const ClassifierKind> level_kinds,
                       std::span<const LabeledExample> labeled, const OutcomeTable& table,
                       std::span<const std::string> selected, const Hyperparams& hp,
                       FallbackPolicy fallback, const PremodelOptions& options) {
  check_fallback(fallback, table);
  if (level_kinds.size() != 1 && level_kinds.size() != selected.size())
    throw ParameterError("cascade needs one classifier kind per level (or one for all)");
  auto prep = prepare(labeled, table, selected, options);
  const std::size_t n = prep.labels.size();
  std::vector<int> cls(n);
  for (std::size_t r = 0; r < n; ++r) cls[r] = selected_class(prep.labels[r], selected);

  Premodel p;
  CascadeArchitecture arch;
  const bool any_knn = std::any_of(level_kinds.begin(), level_kinds.end(),
                                   [](ClassifierKind k) { return k == ClassifierKind::KNN; });
  if (any_knn) p.neighbors_ = std::make_shared<const NeighborIndex>(prep.scaled);

  for (std::size_t level = 0; level < selected.size(); ++level) {
    const ClassifierKind kind = level_kinds.size() == 1 ? level_kinds[0] : level_kinds[level];
    arch.levels.push_back({kind, selected[level]});
    const int target = static_cast<int>(level);
    // Rows already claimed by an earlier level are left out of this level.
    std::vector<int> row_labels(n);
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < n; ++r) {
      const bool claimed = cls[r] != kFailureClass && cls[r] < target;
      row_labels[r] = claimed ? kExcludedRow : (cls[r] == target ? 1 : 0);
      if (!claimed) rows.push_back(r);
    }
    if (rows.empty()) {
      // Nothing left to decide on: an all-pass level.
      std::fill(row_labels.begin(), row_labels.end(), 0);
      rows.resize(n);
      for (std::size_t r = 0; r < n; ++r) rows[r] = r;
    }
    if (kind == ClassifierKind::KNN) {
      p.classifiers_.push_back(make_shared_knn(p.neighbors_, row_labels, hp.knn_k));
    } else {
      std::vector<int> y;
      for (auto r : rows) y.push_back(row_labels[r]);
      p.classifiers_.push_back(train_classifier(kind, prep.scaled.select_rows(rows), y, hp));
    }
  }
  p.architecture_ = std::move(arch);
  p.selected_.assign(selected.begin(), selected.end());
  p.scaler_ = std::move(prep.scaler);
  p.selection_ = std::move(prep.selection);
  p.fallback_ = std::move(fallback);
  p.overhead_ms_ = options.overhead_ms;
  return p;
}

bool Premodel::shares_neighbors() const {
  return neighbors_ && std::all_of(classifiers_.begin(), classifiers_.end(), [](const auto& c) {
           return c.kind() == ClassifierKind::KNN;
         });
}

PremodelDecision Premodel::predict(const FeatureRow& row) const {
  return predict_projected(selection_.project(row));
}

PremodelDecision Premodel::predict_projected(std::span<const double> projected) const {
  const auto x = apply_scaler(scaler_, projected);

  if (!is_cascade()) {
    const auto pred = classifiers_.front().predict(x);
    const auto& classes = classifiers_.front().classes();
    const double conf = pred.scores[static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), pred.label) - classes.begin())];
    if (pred.label == kFailureClass) return {apply_fallback(fallback_), 1, conf};
    return {Label::model(selected_[static_cast<std::size_t>(pred.label)]), 1, conf};
  }

  // KNN levels reuse one neighbor ordering of the query.
  std::vector<Neighbor> order;
  double last_pass = 0.0;
  for (std::size_t level = 0; level < classifiers_.size(); ++level) {
    const auto& c = classifiers_[level];
    Prediction pred;
    if (c.kind() == ClassifierKind::KNN) {
      if (order.empty()) order = neighbor_order(*neighbors_, x);
      pred = c.predict_from_neighbors(order);
    } else {
      pred = c.predict(x);
    }
    const auto& classes = c.classes();
    auto score_of = [&](int cls) {
      auto it = std::lower_bound(classes.begin(), classes.end(), cls);
      return it != classes.end() && *it == cls
                 ? pred.scores[static_cast<std::size_t>(it - classes.begin())]
                 : 0.0;
    };
    if (pred.label == 1)
      return {Label::model(selected_[level]), static_cast<int>(level + 1), score_of(1)};
    last_pass = score_of(0);
  }
  return {apply_fallback(fallback_), static_cast<int>(classifiers_.size()), last_pass};
}

// --- persistence ---------------------------------------------------------------

json premodel_to_json(const Premodel& p) {
  json j;
  j["version"] = kPremodelFormatVersion;
  if (const auto* s = std::get_if<SingleArchitecture>(&p.architecture_)) {
    j["architecture"] = {{"type", "single"}, {"kind", to_string(s->kind)}};
  } else {
    json levels = json::array();
    for (const auto& l : std::get<CascadeArchitecture>(p.architecture_).levels)
      levels.push_back({{"kind", to_string(l.kind)}, {"target", l.target_model}});
    j["architecture"] = {{"type", "cascade"}, {"levels", std::move(levels)}};
  }
  j["selected_models"] = p.selected_;
  json levels = json::array();
  for (const auto& c : p.classifiers_) levels.push_back(c.to_json());
  j["levels"] = std::move(levels);
  j["scaler"] = {{"min", p.scaler_.min}, {"max", p.scaler_.max}};

  j["feature_selection"] = selection_to_json(p.selection_);
  j["fallback"] = p.fallback_.use_model
                      ? json{{"type", "model"}, {"model_id", *p.fallback_.use_model}}
                      : json{{"type", "failure"}};
  j["overhead_ms"] = p.overhead_ms_;
  if (p.neighbors_) {
    json rows = json::array();
    const auto& m = p.neighbors_->rows();
    for (std::size_t r = 0; r < m.rows(); ++r)
      rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    j["neighbor_index"] = {{"width", m.cols()}, {"rows", std::move(rows)}};
  } else {
    j["neighbor_index"] = nullptr;
  }
  return j;
}

Premodel premodel_from_json(const json& j) {
  try {
    if (!j.is_object() || !j.contains("version"))
      throw FormatError("premodel document has no version field");
    const int version = j.at("version").get<int>();
    if (version != kPremodelFormatVersion)
      throw FormatError("premodel format version " + std::to_string(version) +
                        " is not supported (expected " + std::to_string(kPremodelFormatVersion) +
                        ")");
    Premodel p;
    const auto& arch = j.at("architecture");
    const auto type = arch.at("type").get<std::string>();
    if (type == "single") {
      p.architecture_ = SingleArchitecture{parse_classifier_kind(arch.at("kind").get<std::string>())};
    } else if (type == "cascade") {
      CascadeArchitecture c;
      for (const auto& l : arch.at("levels"))
        c.levels.push_back({parse_classifier_kind(l.at("kind").get<std::string>()),
                            l.at("target").get<std::string>()});
      p.architecture_ = std::move(c);
    } else {
      throw FormatError("unknown premodel architecture '" + type + "'");
    }
    p.selected_ = j.at("selected_models").get<std::vector<std::string>>();

    if (!j.at("neighbor_index").is_null()) {
      const auto& ni = j.at("neighbor_index");
      const auto width = ni.at("width").get<std::size_t>();
      std::vector<std::vector<double>> rows;
      for (const auto& r : ni.at("rows")) {
        rows.push_back(r.get<std::vector<double>>());
        if (rows.back().size() != width) throw FormatError("neighbor_index row width mismatch");
      }
      p.neighbors_ = std::make_shared<const NeighborIndex>(Matrix::from_rows(rows));
    }
    for (const auto& c : j.at("levels"))
      p.classifiers_.push_back(TrainedClassifier::from_json(c, p.neighbors_));

    p.scaler_.min = j.at("scaler").at("min").get<std::vector<double>>();
    p.scaler_.max = j.at("scaler").at("max").get<std::vector<double>>();

    p.selection_ = selection_from_json(j.at("feature_selection"));
    const auto& s = p.selection_;

    const auto& fb = j.at("fallback");
    p.fallback_ = fb.at("type").get<std::string>() == "model"
                      ? FallbackPolicy::use(fb.at("model_id").get<std::string>())
                      : FallbackPolicy::report_failure();
    p.overhead_ms_ = j.at("overhead_ms").get<double>();

    const std::size_t expected_levels =
        p.is_cascade() ? std::get<CascadeArchitecture>(p.architecture_).levels.size() : 1;
    if (p.classifiers_.size() != expected_levels)
      throw FormatError("premodel level count does not match its architecture");
    if (p.scaler_.min.size() != s.output_width() || p.scaler_.max.size() != s.output_width())
      throw FormatError("scaler width does not match the feature selection");
    for (const auto& c : p.classifiers_)
      if (c.width() != s.output_width())
        throw FormatError("classifier width does not match the feature selection");
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("premodel: ") + e.what());
  }
}

void save_premodel(const Premodel& p, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << premodel_to_json(p).dump(1) << '\n';
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Premodel load_premodel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw FormatError("premodel file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return premodel_from_json(j);
}

}  // namespace adasel
