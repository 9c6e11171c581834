#include "adasel/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "adasel/csv.hpp"
#include "adasel/errors.hpp"
#include "adasel/evaluation.hpp"
#include "adasel/soundness.hpp"
#include "adasel/trace_store.hpp"

namespace adasel::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit status 2: bad usage, unreadable config, missing input or artifact.
struct UsageError : Error {
  using Error::Error;
};

constexpr const char* kLabels = "labels.csv";
constexpr const char* kSelectionJson = "selection.json";
constexpr const char* kFeatureJson = "feature_selection.json";
constexpr const char* kPremodel = "premodel.json";
constexpr const char* kConformal = "conformal.json";

template <class T>
T get_as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ParameterError("config key '" + key + "' has the wrong type");
  }
}

double radius_value(const json& v) {
  if (v.is_string() && (v == "inf" || v == "infinity"))
    return std::numeric_limits<double>::infinity();
  return get_as<double>(v, "radii");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void require_input(const fs::path& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("no ") + what + " file given");
  if (!fs::exists(path))
    throw UsageError(std::string(what) + " file '" + path.string() + "' does not exist");
}

fs::path artifact(const RunConfig& c, const char* name, const char* producer) {
  auto p = c.out_dir / name;
  if (!fs::exists(p))
    throw UsageError("missing artifact " + p.string() + " (run '" + producer + "' first)");
  return p;
}

Dataset load_inputs(const RunConfig& c) {
  require_input(c.trace, "trace");
  require_input(c.features, "features");
  if (!c.models.empty()) require_input(c.models, "models");
  return load_dataset(c.trace, c.features, c.models);
}

// Labels from labels.csv joined onto the dataset's feature rows.
std::vector<LabeledExample> labeled_from_artifact(const RunConfig& c, const Dataset& d) {
  const auto rows = read_labels_csv(artifact(c, kLabels, "label"));
  std::map<std::string, Label> by_id(rows.begin(), rows.end());
  std::vector<LabeledExample> out;
  for (const auto& f : d.features) {
    auto it = by_id.find(f.input_id);
    if (it == by_id.end())
      throw InvariantError("labels.csv has no label for input '" + f.input_id + "'");
    out.push_back({f.input_id, f, it->second});
  }
  return out;
}

std::vector<std::string> selected_from_artifact(const RunConfig& c) {
  const auto j = read_json(artifact(c, kSelectionJson, "select-models"));
  try {
    return j.at("models").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("selection.json: ") + e.what());
  }
}

std::optional<FeatureSelection> optional_feature_selection(const RunConfig& c) {
  const auto p = c.out_dir / kFeatureJson;
  if (!fs::exists(p)) return std::nullopt;
  return selection_from_json(read_json(p));
}

std::vector<int> class_ids(std::span<const Label> labels, const OutcomeTable& t) {
  std::vector<int> y;
  for (const auto& l : labels) {
    if (l.is_failure()) {
      y.push_back(kFailureClass);
      continue;
    }
    auto m = t.model_index(l.model_id());
    if (!m) throw LookupError("label '" + l.model_id() + "' is not a model in the trace");
    y.push_back(static_cast<int>(*m));
  }
  return y;
}

// Seeded permutation split: first `held` shuffled rows are held out.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> holdout_split(std::size_t n,
                                                                            std::size_t held,
                                                                            std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> in(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(out.begin(), out.end());
  std::sort(in.begin(), in.end());
  return {in, out};
}

Premodel train_premodel(const RunConfig& c, std::span<const LabeledExample> labeled,
                        const OutcomeTable& table, std::span<const std::string> selected,
                        const PremodelOptions& options) {
  const auto fallback = FallbackPolicy::parse(c.fallback);
  if (c.architecture == "cascade")
    return build_cascade(c.classifiers, labeled, table, selected, c.hyperparams, fallback,
                         options);
  return build_single(c.classifiers.front(), labeled, table, selected, c.hyperparams, fallback,
                      options);
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  require_input(c.trace, "trace");
  require_input(c.features, "features");
  if (!c.models.empty()) require_input(c.models, "models");
  const Dataset d = read_dataset(c.trace, c.features, c.models);
  const auto report = validate(d);
  for (const auto& v : report.violations)
    out << to_string(v.kind) << ' ' << v.location << ": " << v.message << '\n';
  if (!report.ok()) {
    out << report.violations.size() << " violation(s)\n";
    return 1;
  }
  out << "ok: " << d.features.size() << " inputs, " << d.models.size() << " models, "
      << d.records.size() << " records\n";
  return 0;
}

int cmd_label(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_inputs(c);
  const auto labeled = label_dataset(d, c.make_criterion());
  fs::create_directories(c.out_dir);
  write_labels_csv(labeled, c.out_dir / kLabels);
  out << "labeled " << labeled.size() << " inputs:";
  for (const auto& [label, share] : optimal_share(labeled))
    out << ' ' << label << '=' << csv::format_double(share);
  out << '\n';
  return 0;
}

int cmd_select_features(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_inputs(c);
  const auto table = build_outcomes(d, c.make_criterion());
  const auto labeled = labeled_from_artifact(c, d);
  std::vector<Label> labels;
  for (const auto& ex : labeled) labels.push_back(ex.label);
  const auto y = class_ids(labels, table);
  const auto sel = run_feature_pipeline(d.features, y, d.vocab_size,
                                        {c.classifiers.front(), c.hyperparams}, c.pipeline);
  fs::create_directories(c.out_dir);
  write_selection_report(sel, d.dense_names, c.out_dir / "feature_selection.csv");
  write_text(c.out_dir / kFeatureJson, selection_to_json(sel).dump(1) + "\n");
  out << "kept " << sel.kept_dense.size() << " of " << sel.dense_width << " dense features ("
      << sel.removed_by_correlation.size() << " correlated, " << sel.removed_by_greedy.size()
      << " by importance) and " << sel.kept_counts.size() << " of " << d.vocab_size
      << " count features\n";
  return 0;
}

int cmd_select_models(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_inputs(c);
  const auto table = build_outcomes(d, c.make_criterion());
  const auto res = select_models(table, c.selection);
  fs::create_directories(c.out_dir);
  write_selection_log(res, c.out_dir / "selection_log.csv");
  const json j{{"method", to_string(c.selection.method)},
               {"theta", c.selection.theta},
               {"models", res.models},
               {"accuracy", res.accuracy},
               {"mean_latency_ms", res.mean_latency_ms}};
  write_text(c.out_dir / kSelectionJson, j.dump(1) + "\n");
  out << "selected " << csv::join(res.models) << " (ideal accuracy "
      << csv::format_double(res.accuracy) << ", mean latency "
      << csv::format_double(res.mean_latency_ms) << " ms)\n";
  return 0;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_inputs(c);
  const auto table = build_outcomes(d, c.make_criterion());
  const auto labeled = labeled_from_artifact(c, d);
  const auto selected = selected_from_artifact(c);
  PremodelOptions options;
  options.overhead_ms = c.overhead_ms;
  if (auto sel = optional_feature_selection(c)) options.selection = std::move(*sel);

  if (!(c.calibration_fraction >= 0.0 && c.calibration_fraction < 1.0))
    throw ParameterError("calibration_fraction must lie in [0,1)");
  const auto held = static_cast<std::size_t>(
      std::floor(c.calibration_fraction * static_cast<double>(labeled.size())));
  const auto [train_rows, cal_rows] = holdout_split(labeled.size(), held, c.seed);
  std::vector<LabeledExample> train;
  for (auto r : train_rows) train.push_back(labeled[r]);
  const Premodel p = train_premodel(c, train, table, selected, options);

  fs::create_directories(c.out_dir);
  save_premodel(p, c.out_dir / kPremodel);
  if (!cal_rows.empty()) {
    std::vector<LabeledExample> cal;
    std::vector<FeatureRow> rows;
    for (auto r : cal_rows) {
      cal.push_back(labeled[r]);
      rows.push_back(labeled[r].features);
    }
    const auto expected = relabel_to_selected(cal, table, selected);
    const auto cm = calibrate_conformal(p, rows, expected, c.theta_cal, c.trust_threshold);
    const json j{{"theta_cal", cm.theta_cal},
                 {"trust_threshold", cm.trust_threshold},
                 {"calibration_scores", cm.calibration_scores}};
    write_text(c.out_dir / kConformal, j.dump(1) + "\n");
  } else {
    fs::remove(c.out_dir / kConformal);
  }
  out << "trained " << c.architecture << ' ' << to_string(c.classifiers.front())
      << " premodel over " << csv::join(selected) << " on " << train.size() << " inputs ("
      << cal_rows.size() << " held out for calibration)\n";
  return 0;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_inputs(c);
  const auto data = prepare_evaluation(d, c.make_criterion());
  const auto selected = selected_from_artifact(c);

  std::vector<Label> strata;
  if (c.stratify_folds)
    for (const auto& ex : data.labeled) strata.push_back(ex.label);
  const auto plan = kfold_split(data.table.input_ids, c.folds, c.seed, strata);

  std::vector<Policy> policies;
  for (const auto& id : data.table.model_ids) policies.push_back({id, SingleModelPolicy{id}});
  AdaptiveRecipe adaptive;
  adaptive.cascade = c.architecture == "cascade";
  adaptive.kinds = c.classifiers;
  adaptive.selected_models = selected;
  adaptive.hp = c.hyperparams;
  adaptive.fallback = FallbackPolicy::parse(c.fallback);
  adaptive.overhead_ms = c.overhead_ms;
  if (c.evaluate_feature_pipeline) adaptive.feature_pipeline = c.pipeline;
  policies.push_back({"adaptive", adaptive});
  if (d.vocab_size > 0) {
    FeatureStackingRecipe stacking;
    stacking.selected_models = selected;
    stacking.hp = c.hyperparams;
    stacking.fallback = adaptive.fallback;
    stacking.overhead_ms = c.overhead_ms;
    policies.push_back({"stacking", stacking});
  }
  policies.push_back({"oracle", OraclePolicy{}});

  std::vector<PolicyMetrics> metrics;
  for (const auto& p : policies) metrics.push_back(evaluate_policy(p, data, plan));
  fs::create_directories(c.out_dir);
  comparison_report(metrics, c.out_dir);

  const auto& a = *std::find_if(metrics.begin(), metrics.end(),
                                [](const PolicyMetrics& m) { return m.policy == "adaptive"; });
  out << "adaptive: accuracy " << csv::format_double(a.accuracy) << ", mean latency "
      << csv::format_double(a.mean_latency_ms) << " ms, oracle gap "
      << csv::format_double(a.oracle_gap) << " over " << c.folds << " folds\n";
  return 0;
}

int cmd_predict(const RunConfig& c, const std::string& input_id, std::ostream& out) {
  const Premodel p = load_premodel(artifact(c, kPremodel, "train"));
  require_input(c.features, "features");
  const Dataset d = read_features_file(c.features);
  std::optional<ConformalModel> cm;
  if (fs::exists(c.out_dir / kConformal)) {
    const auto j = read_json(c.out_dir / kConformal);
    try {
      cm = ConformalModel{j.at("calibration_scores").get<std::vector<double>>(),
                          j.at("theta_cal").get<double>(), j.at("trust_threshold").get<double>()};
    } catch (const json::exception& e) {
      throw FormatError(std::string("conformal.json: ") + e.what());
    }
  }

  std::vector<const FeatureRow*> rows;
  for (const auto& f : d.features)
    if (input_id.empty() || f.input_id == input_id) rows.push_back(&f);
  if (!input_id.empty() && rows.empty())
    throw LookupError("input '" + input_id + "' is not in the features file");

  std::ostringstream table;
  table << "input_id,choice,confidence" << (cm ? ",p_value,untrusted" : "") << '\n';
  for (const auto* row : rows) {
    const auto dec = p.predict(*row);
    table << row->input_id << ',' << dec.choice.str() << ','
          << csv::format_double(dec.confidence);
    if (cm) {
      const double pv = conformal_pvalue(*cm, nonconformity(std::clamp(dec.confidence, 0.0, 1.0)));
      table << ',' << csv::format_double(pv) << ',' << (pv < cm->trust_threshold ? 1 : 0);
    }
    table << '\n';
    if (!input_id.empty())
      out << dec.choice.str() << '\n';
    else
      out << row->input_id << ',' << dec.choice.str() << '\n';
  }
  fs::create_directories(c.out_dir);
  write_text(c.out_dir / "predictions.csv", table.str());
  return 0;
}

int cmd_sweep(const RunConfig& c, std::ostream& out) {
  const Dataset d = load_inputs(c);
  const auto table = build_outcomes(d, c.make_criterion());
  const std::vector<SelectionMethod> methods{SelectionMethod::Accuracy, SelectionMethod::Optimal,
                                             SelectionMethod::Alternate};
  const auto rows = sensitivity_sweep(table, methods, c.sweep_thetas);
  fs::create_directories(c.out_dir);
  write_sweep_csv(rows, c.out_dir / "sensitivity_sweep.csv");

  if (!(c.radius_test_fraction > 0.0 && c.radius_test_fraction < 1.0))
    throw ParameterError("radius_test_fraction must lie in (0,1)");
  const auto n = table.n_inputs();
  const auto held = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(c.radius_test_fraction * static_cast<double>(n))));
  if (held >= n) throw ParameterError("too few inputs for a radius sweep");
  const auto [train_rows, test_rows] = holdout_split(n, held, c.seed);
  const auto optimum = optimum_indices(table);
  const auto keep = FeatureSelection::keep_all(d.dense_width());
  std::vector<FeatureRow> train_f, test_f;
  std::vector<Label> train_labels;
  for (auto r : train_rows) {
    train_f.push_back(d.features[r]);
    train_labels.push_back(table.label_of(optimum[r]));
  }
  for (auto r : test_rows) test_f.push_back(d.features[r]);
  const auto scaler = fit_scaler(keep.project(train_f));
  const auto curve =
      radius_accuracy_sweep(apply_scaler(scaler, keep.project(train_f)), train_labels,
                            apply_scaler(scaler, keep.project(test_f)), test_rows, table, c.radii);
  write_radius_sweep_csv(curve, c.out_dir / "radius_sweep.csv");
  out << "sensitivity sweep: " << rows.size() << " rows; radius sweep: " << curve.size()
      << " radii\n";
  return 0;
}

}  // namespace

Criterion RunConfig::make_criterion() const {
  if (criterion == "boolean_goal") return Criterion::boolean_goal();
  if (criterion == "score_at_least") return Criterion::score_at_least(score_threshold);
  throw ParameterError("criterion must be boolean_goal or score_at_least");
}

void apply_config_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ParameterError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "trace") c.trace = get_as<std::string>(v, key);
    else if (key == "features") c.features = get_as<std::string>(v, key);
    else if (key == "models") c.models = get_as<std::string>(v, key);
    else if (key == "out_dir") c.out_dir = get_as<std::string>(v, key);
    else if (key == "criterion") c.criterion = get_as<std::string>(v, key);
    else if (key == "score_threshold") c.score_threshold = get_as<double>(v, key);
    else if (key == "architecture") c.architecture = get_as<std::string>(v, key);
    else if (key == "fallback") c.fallback = get_as<std::string>(v, key);
    else if (key == "overhead_ms") c.overhead_ms = get_as<double>(v, key);
    else if (key == "seed") c.seed = get_as<std::uint64_t>(v, key);
    else if (key == "folds") c.folds = get_as<int>(v, key);
    else if (key == "stratify_folds") c.stratify_folds = get_as<bool>(v, key);
    else if (key == "evaluate_feature_pipeline") c.evaluate_feature_pipeline = get_as<bool>(v, key);
    else if (key == "calibration_fraction") c.calibration_fraction = get_as<double>(v, key);
    else if (key == "theta_cal") c.theta_cal = get_as<double>(v, key);
    else if (key == "trust_threshold") c.trust_threshold = get_as<double>(v, key);
    else if (key == "radius_test_fraction") c.radius_test_fraction = get_as<double>(v, key);
    else if (key == "sweep_thetas") c.sweep_thetas = get_as<std::vector<double>>(v, key);
    else if (key == "radii") {
      c.radii.clear();
      if (!v.is_array()) throw ParameterError("config key 'radii' must be an array");
      for (const auto& r : v) c.radii.push_back(radius_value(r));
    } else if (key == "classifiers") {
      c.classifiers.clear();
      for (const auto& name : get_as<std::vector<std::string>>(v, key))
        c.classifiers.push_back(parse_classifier_kind(name));
    } else if (key == "selection") {
      for (const auto& [k, x] : v.items()) {
        if (k == "method") c.selection.method = parse_selection_method(get_as<std::string>(x, k));
        else if (k == "theta") c.selection.theta = get_as<double>(x, k);
        else if (k == "literal_pseudocode") c.selection.literal_pseudocode = get_as<bool>(x, k);
        else throw ParameterError("unknown config key 'selection." + k + "'");
      }
    } else if (key == "pipeline") {
      for (const auto& [k, x] : v.items()) {
        if (k == "pcc_threshold") c.pipeline.pcc_threshold = get_as<double>(x, k);
        else if (k == "greedy_min_accuracy_drop")
          c.pipeline.greedy_min_accuracy_drop = get_as<double>(x, k);
        else if (k == "chi2_k") c.pipeline.chi2_k = get_as<int>(x, k);
        else if (k == "greedy_cv_folds") c.pipeline.greedy_cv_folds = get_as<int>(x, k);
        else throw ParameterError("unknown config key 'pipeline." + k + "'");
      }
    } else if (key == "hyperparams") {
      auto& hp = c.hyperparams;
      for (const auto& [k, x] : v.items()) {
        if (k == "knn_k") hp.knn_k = get_as<int>(x, k);
        else if (k == "tree_max_depth") hp.tree_max_depth = get_as<int>(x, k);
        else if (k == "tree_min_leaf") hp.tree_min_leaf = get_as<int>(x, k);
        else if (k == "svm_epochs") hp.svm_epochs = get_as<int>(x, k);
        else if (k == "svm_reg_lambda") hp.svm_reg_lambda = get_as<double>(x, k);
        else throw ParameterError("unknown config key 'hyperparams." + k + "'");
      }
    } else {
      throw ParameterError("unknown config key '" + key + "'");
    }
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive model selection: premodel training and evaluation"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path, out_dir, trace, features, models, criterion, method, architecture,
      fallback, input_id;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta, overhead, score_threshold;
  std::optional<int> folds, knn_k;
  std::vector<std::string> classifiers;
  bool stratify = false, literal = false, fold_pipeline = false;

  app.add_option("--config", config_path, "JSON config (keys mirror RunConfig fields)");
  app.add_option("--out", out_dir, "output directory for artifacts");
  app.add_option("--seed", seed, "seed for every random choice");
  app.add_option("--trace", trace, "trace CSV");
  app.add_option("--features", features, "features CSV");
  app.add_option("--models", models, "models sidecar CSV");
  app.add_option("--criterion", criterion, "boolean_goal or score_at_least");
  app.add_option("--score-threshold", score_threshold, "threshold for score_at_least");
  app.add_option("--method", method, "model selection method: accuracy, optimal, alternate");
  app.add_option("--theta", theta, "minimum accuracy gain in percentage points");
  app.add_flag("--literal-pseudocode", literal, "add the candidate before the theta test");
  app.add_option("--architecture", architecture, "single or cascade");
  app.add_option("--classifier", classifiers, "knn, nb, tree or svm (one per cascade level)");
  app.add_option("--knn-k", knn_k, "neighbors for knn");
  app.add_option("--fallback", fallback, "failure or model:<id>");
  app.add_option("--overhead-ms", overhead, "premodel cost charged per input");
  app.add_option("--folds", folds, "cross-validation folds");
  app.add_flag("--stratify", stratify, "stratify folds by optimum label");
  app.add_flag("--fold-feature-pipeline", fold_pipeline,
               "re-run feature selection inside each evaluation fold");
  app.add_option("--input-id", input_id, "predict: only this input");

  const std::vector<std::pair<const char*, const char*>> commands{
      {"validate", "check trace and features against the dataset invariants"},
      {"label", "write the optimum model per input"},
      {"select-features", "correlation filter, importance search and chi2 ranking"},
      {"select-models", "greedy candidate model selection"},
      {"train", "train the premodel and its conformal calibration"},
      {"evaluate", "cross-validated comparison against single models and the oracle"},
      {"predict", "premodel decisions for feature rows"},
      {"sweep", "theta sensitivity table and radius sweep"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    // Defaults, then the config file, then explicit flags.
    auto merge_settings = [&](RunConfig& c) {
      if (!config_path.empty()) {
        require_input(config_path, "config");
        apply_config_json(c, read_json(config_path));
      }
      if (!out_dir.empty()) c.out_dir = out_dir;
      if (seed) c.seed = *seed;
      if (!trace.empty()) c.trace = trace;
      if (!features.empty()) c.features = features;
      if (!models.empty()) c.models = models;
      if (!criterion.empty()) c.criterion = criterion;
      if (score_threshold) c.score_threshold = *score_threshold;
      if (!method.empty()) c.selection.method = parse_selection_method(method);
      if (theta) c.selection.theta = *theta;
      if (literal) c.selection.literal_pseudocode = true;
      if (!architecture.empty()) c.architecture = architecture;
      if (!classifiers.empty()) {
        c.classifiers.clear();
        for (const auto& k : classifiers) c.classifiers.push_back(parse_classifier_kind(k));
      }
      if (knn_k) c.hyperparams.knn_k = *knn_k;
      if (!fallback.empty()) c.fallback = fallback;
      if (overhead) c.overhead_ms = *overhead;
      if (folds) c.folds = *folds;
      if (stratify) c.stratify_folds = true;
      if (fold_pipeline) c.evaluate_feature_pipeline = true;
      c.pipeline.seed = c.seed;
      c.hyperparams.rng_seed = c.seed;
      if (c.architecture != "single" && c.architecture != "cascade")
        throw UsageError("architecture must be single or cascade");
      if (c.classifiers.empty()) throw UsageError("at least one classifier is required");
      if (!(c.selection.theta > 0.0)) throw UsageError("theta must be positive");
      if (c.folds < 2) throw UsageError("folds must be at least 2");
      if (c.hyperparams.knn_k < 1) throw UsageError("knn_k must be at least 1");
      c.make_criterion();
      FallbackPolicy::parse(c.fallback);
    };
    RunConfig c;
    try {
      merge_settings(c);
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    } catch (const FormatError& e) {
      throw UsageError(e.what());
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "validate") return cmd_validate(c, out);
    if (cmd == "label") return cmd_label(c, out);
    if (cmd == "select-features") return cmd_select_features(c, out);
    if (cmd == "select-models") return cmd_select_models(c, out);
    if (cmd == "train") return cmd_train(c, out);
    if (cmd == "evaluate") return cmd_evaluate(c, out);
    if (cmd == "predict") return cmd_predict(c, input_id, out);
    return cmd_sweep(c, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace adasel::cli
