#include <gtest/gtest.h>

#include <numeric>
#include <random>
#include <set>

#include "adasel/errors.hpp"
#include "adasel/evaluation.hpp"
#include "adasel/synthetic.hpp"
#include "test_util.hpp"

using namespace adasel;
using testutil::Cell;

namespace {

EvaluationData eval_data(const Dataset& d) { return prepare_evaluation(d, Criterion::boolean_goal()); }

FoldPlan plan_for(const EvaluationData& e, int k, std::uint64_t seed) {
  return kfold_split(e.table.input_ids, k, seed);
}

AdaptiveRecipe knn_recipe(std::vector<std::string> selected, double overhead = 0.0) {
  AdaptiveRecipe r;
  r.selected_models = std::move(selected);
  r.hp.knn_k = 3;
  r.overhead_ms = overhead;
  return r;
}

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back("x" + std::to_string(i));
  return v;
}

}  // namespace

TEST(Folds, SizesDifferByAtMostOne) {
  const auto a = kfold_split(ids(100), 10, 1);
  for (int f = 0; f < 10; ++f) EXPECT_EQ(a.fold_size(f), 10u);
  const auto b = kfold_split(ids(101), 10, 1);
  std::multiset<std::size_t> sizes;
  for (int f = 0; f < 10; ++f) sizes.insert(b.fold_size(f));
  EXPECT_EQ(sizes.count(11), 1u);
  EXPECT_EQ(sizes.count(10), 9u);
  EXPECT_THROW(kfold_split(ids(3), 4, 1), ParameterError);
}

TEST(Folds, PartitionAndDeterminism) {
  const auto a = kfold_split(ids(57), 10, 9), b = kfold_split(ids(57), 10, 9);
  EXPECT_EQ(a.fold, b.fold);
  EXPECT_NE(a.fold, kfold_split(ids(57), 10, 10).fold);
  for (int f = 0; f < 10; ++f) {
    auto test = a.test_rows(f), train = a.train_rows(f);
    EXPECT_EQ(test.size() + train.size(), 57u);
    std::vector<std::size_t> all;
    std::merge(test.begin(), test.end(), train.begin(), train.end(), std::back_inserter(all));
    std::vector<std::size_t> expect(57);
    std::iota(expect.begin(), expect.end(), 0);
    EXPECT_EQ(all, expect);
  }
}

TEST(Folds, StratifiedFoldsMirrorTheLabelMix) {
  std::vector<Label> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(i < 40 ? Label::model("A") : Label::failure());
  const auto p = kfold_split(ids(60), 10, 3, labels);
  for (int f = 0; f < 10; ++f) {
    std::size_t a = 0;
    for (auto r : p.test_rows(f)) a += labels[r] == Label::model("A");
    EXPECT_EQ(a, 4u);
    EXPECT_EQ(p.fold_size(f), 6u);
  }
}

TEST(Metrics, FormulaValues) {
  EXPECT_NEAR(bleups(0.4, 2.0), 0.08, 1e-12);
  EXPECT_THROW(bleups(0.4, 0.0), DomainError);
  EXPECT_NEAR(f1_score(0.5, 0.5), 0.5, 1e-12);
  EXPECT_EQ(f1_score(0.0, 0.0), 0.0);
  EXPECT_NEAR(f1_score(1.0, 0.5), 2.0 / 3.0, 1e-12);
}

TEST(Metrics, PrecisionRecallMatchOracleOnRandomConfusions) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 2 + rng() % 4;
    ConfusionMatrix cm(k);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (int i = 0; i < 50; ++i) {
      const std::size_t a = rng() % k, p = rng() % k;
      cm.add(a, p);
      pairs.emplace_back(a, p);
    }
    const auto s = precision_recall_f1(cm);
    double mp = 0, mr = 0, mf = 0;
    for (std::size_t c = 0; c < k; ++c) {
      // Count from the raw pairs, not the matrix.
      double tp = 0, pred = 0, act = 0;
      for (auto [a, p] : pairs) {
        tp += a == c && p == c;
        pred += p == c;
        act += a == c;
      }
      const double prec = pred ? tp / pred : 0.0, rec = act ? tp / act : 0.0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      EXPECT_NEAR(s.per_class[c].precision, prec, 1e-12);
      EXPECT_NEAR(s.per_class[c].recall, rec, 1e-12);
      EXPECT_NEAR(s.per_class[c].f1, f1, 1e-12);
      mp += prec / k;
      mr += rec / k;
      mf += f1 / k;
    }
    EXPECT_NEAR(s.macro_precision, mp, 1e-12);
    EXPECT_NEAR(s.macro_recall, mr, 1e-12);
    EXPECT_NEAR(s.macro_f1, mf, 1e-12);
  }
}

TEST(EvaluatePolicy, OracleRowEqualsOracleMetrics) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto e = eval_data(synthetic::random_trace(45, 4, 2, seed));
    const auto m = evaluate_policy({"oracle", OraclePolicy{}}, e, plan_for(e, 10, seed));
    const auto o = oracle_metrics(e.table);
    EXPECT_EQ(m.accuracy, o.accuracy);
    EXPECT_EQ(m.mean_latency_ms, o.mean_latency_ms);
    EXPECT_EQ(m.oracle_gap, 0.0);
    EXPECT_EQ(m.recall, 1.0);
  }
}

TEST(EvaluatePolicy, SingleModelLatencyIsTheTraceMean) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = synthetic::random_trace(33, 3, 1, seed);
    const auto e = eval_data(d);
    for (const auto& id : e.table.model_ids) {
      double sum = 0.0;
      std::size_t met = 0, n = 0;
      for (const auto& f : d.features)
        for (const auto& r : d.records)
          if (r.input_id == f.input_id && r.model_id == id) {
            sum += r.latency_ms;
            met += *r.goal_met;
            ++n;
          }
      const auto m = evaluate_policy({id, SingleModelPolicy{id}}, e, plan_for(e, 10, 1));
      EXPECT_EQ(m.mean_latency_ms, sum / static_cast<double>(n));
      EXPECT_EQ(m.accuracy, static_cast<double>(met) / static_cast<double>(n));
      EXPECT_EQ(m.utilization.at(id), 1.0);
    }
  }
}

TEST(EvaluatePolicy, UtilizationSumsToOne) {
  const auto e = eval_data(synthetic::random_trace(80, 4, 2, 5));
  const std::vector<Policy> policies{
      {"oracle", OraclePolicy{}},
      {"adaptive", knn_recipe({"m0", "m1", "m2"})},
  };
  for (const auto& p : policies) {
    const auto m = evaluate_policy(p, e, plan_for(e, 10, 2));
    double total = 0;
    for (const auto& [k, v] : m.utilization) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LE(m.accuracy, m.oracle_accuracy);
  }
}

TEST(EvaluatePolicy, AlwaysOneModelAdaptiveIsSinglePlusOverhead) {
  // A meets the goal everywhere and is fastest, so every label is A.
  std::vector<std::vector<Cell>> cells;
  for (int i = 0; i < 30; ++i) cells.push_back({{true, 1.0 + 0.1 * i}, {i % 2 == 0, 50}});
  const auto e = eval_data(testutil::grid_dataset({"A", "B"}, cells));
  const auto plan = plan_for(e, 10, 3);
  const auto single = evaluate_policy({"A", SingleModelPolicy{"A"}}, e, plan);
  const auto adaptive = evaluate_policy({"adaptive", knn_recipe({"A", "B"}, 0.75)}, e, plan);
  EXPECT_EQ(adaptive.accuracy, single.accuracy);
  EXPECT_NEAR(adaptive.mean_latency_ms, single.mean_latency_ms + 0.75, 1e-12);
  EXPECT_EQ(adaptive.utilization.at("A"), 1.0);
}

TEST(EvaluatePolicy, FailureDispatchCostsOnlyOverhead) {
  // Only failures in training, so the premodel always reports Failure.
  std::vector<std::vector<Cell>> cells(20, {{false, 7}, {false, 9}});
  cells[0][0].met = true;  // one viable input keeps the trace non-degenerate
  const auto e = eval_data(testutil::grid_dataset({"A", "B"}, cells));
  auto recipe = knn_recipe({"B"}, 0.5);
  const auto m = evaluate_policy({"adaptive", recipe}, e, plan_for(e, 10, 4));
  EXPECT_EQ(m.utilization.at("FAILURE"), 1.0);
  EXPECT_NEAR(m.mean_latency_ms, 0.5, 1e-12);
  EXPECT_EQ(m.accuracy, 0.0);
}

TEST(EvaluatePolicy, ProtocolErrors) {
  const auto e = eval_data(synthetic::random_trace(20, 2, 1, 1));
  auto plan = plan_for(e, 5, 1);
  std::swap(plan.input_ids[0], plan.input_ids[1]);
  EXPECT_THROW(evaluate_policy({"o", OraclePolicy{}}, e, plan), ProtocolError);
  auto single_fold = plan_for(e, 1, 1);
  EXPECT_THROW(evaluate_policy({"a", knn_recipe({"m0"})}, e, single_fold), ProtocolError);
}

TEST(Report, ReferenceRowHasEmptyDeltas) {
  const auto e = eval_data(synthetic::random_trace(40, 3, 2, 7));
  const auto plan = plan_for(e, 10, 7);
  std::vector<PolicyMetrics> rows;
  for (const auto& id : e.table.model_ids) rows.push_back(evaluate_policy({id, SingleModelPolicy{id}}, e, plan));
  rows.push_back(evaluate_policy({"adaptive", knn_recipe({"m0", "m1", "m2"})}, e, plan));
  rows.push_back(evaluate_policy({"oracle", OraclePolicy{}}, e, plan));
  const auto ref = best_single_model(rows);
  ASSERT_TRUE(ref.has_value());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(rows[i].accuracy, rows[*ref].accuracy);

  const auto csv = comparison_csv(rows);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("policy,accuracy,precision,recall,f1,mean_latency_ms", 0), 0u);
  for (std::size_t i = 0; std::getline(in, line); ++i) {
    const bool empty_tail = line.size() >= 2 && line.substr(line.size() - 2) == ",,";
    EXPECT_EQ(empty_tail, i == *ref) << line;
  }
}

TEST(Report, DeltasAreAntisymmetric) {
  PolicyMetrics a, b;
  a.accuracy = 0.8;
  a.mean_latency_ms = 4.0;
  b.accuracy = 0.6;
  b.mean_latency_ms = 10.0;
  EXPECT_EQ(accuracy_delta(a, b), -accuracy_delta(b, a));
  EXPECT_NEAR(speedup(a, b) * speedup(b, a), 1.0, 1e-12);
  EXPECT_EQ(speedup(a, b), 2.5);
}

TEST(Report, RerunsAreByteIdentical) {
  testutil::TempDir one, two;
  const auto d = synthetic::complementary({});
  for (const auto* dir : {&one, &two}) {
    const auto e = eval_data(d);
    const auto plan = plan_for(e, 10, 11);
    std::vector<PolicyMetrics> rows;
    rows.push_back(evaluate_policy({"fast", SingleModelPolicy{"fast"}}, e, plan));
    rows.push_back(evaluate_policy({"adaptive", knn_recipe({"slow", "fast"})}, e, plan));
    FeatureStackingRecipe stack;
    stack.selected_models = {"slow", "fast"};
    rows.push_back(evaluate_policy({"stacking", stack}, e, plan));
    comparison_report(rows, dir->path());
  }
  EXPECT_EQ(testutil::read_file(one / "report.csv"), testutil::read_file(two / "report.csv"));
  EXPECT_EQ(testutil::read_file(one / "summary.txt"), testutil::read_file(two / "summary.txt"));
  EXPECT_FALSE(testutil::read_file(one / "report.csv").empty());
  EXPECT_THROW(comparison_report({}, one.path()), EmptyInputError);
}
