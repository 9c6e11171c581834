#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "adasel/errors.hpp"
#include "adasel/model_selection.hpp"
#include "adasel/synthetic.hpp"
#include "test_util.hpp"

using namespace adasel;
using testutil::Cell;
using testutil::grid_dataset;

namespace {

OutcomeTable table_of(const Dataset& d) { return build_outcomes(d, Criterion::boolean_goal()); }

// Greedy selection written against the raw records, no OutcomeTable.
std::vector<std::string> brute_force_greedy(const Dataset& d, double theta_pct) {
  std::map<std::string, std::map<std::string, std::pair<bool, double>>> cell;  // input -> model
  for (const auto& r : d.records) cell[r.input_id][r.model_id] = {*r.goal_met, r.latency_ms};
  std::set<std::string> models;
  for (const auto& m : d.models) models.insert(m.model_id);

  std::map<std::string, int> optimal_count;
  for (const auto& [in, row] : cell) {
    std::string best;
    double lat = 0;
    for (const auto& [m, c] : row)
      if (c.first && (best.empty() || c.second < lat)) {
        best = m;
        lat = c.second;
      }
    if (!best.empty()) ++optimal_count[best];
  }
  std::string first;
  for (const auto& [m, c] : optimal_count)
    if (first.empty() || c > optimal_count[first]) first = m;

  auto covered = [&](const std::vector<std::string>& set) {
    int n = 0;
    for (const auto& [in, row] : cell) {
      bool hit = false;
      for (const auto& m : set) hit = hit || row.at(m).first;
      n += hit;
    }
    return n;
  };

  std::vector<std::string> chosen{first};
  const double n = static_cast<double>(cell.size());
  while (chosen.size() < models.size()) {
    std::string pick;
    int pick_cov = -1;
    for (const auto& m : models) {
      if (std::find(chosen.begin(), chosen.end(), m) != chosen.end()) continue;
      auto trial = chosen;
      trial.push_back(m);
      const int c = covered(trial);
      if (c > pick_cov) {
        pick = m;
        pick_cov = c;
      }
    }
    if (100.0 * (pick_cov - covered(chosen)) / n < theta_pct) break;
    chosen.push_back(pick);
  }
  return chosen;
}

}  // namespace

TEST(SetAccuracy, HandCounts) {
  const auto t = table_of(grid_dataset(
      {"A", "B"}, {{{true, 1}, {false, 2}}, {{true, 1}, {true, 2}}, {{true, 1}, {false, 2}},
                   {{false, 1}, {false, 2}}}));
  EXPECT_EQ(set_accuracy(t, ModelSet{}), 0.0);
  EXPECT_EQ(set_accuracy(t, ModelSet{0}), 0.75);
  EXPECT_EQ(set_accuracy(t, ModelSet{0, 1}), oracle_metrics(t).accuracy);
}

TEST(SetAccuracy, MonotoneUnderInclusion) {
  std::mt19937_64 rng(1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto t = table_of(synthetic::random_trace(30, 5, 1, seed));
    ModelSet s;
    double prev = 0.0;
    std::vector<std::size_t> order{0, 1, 2, 3, 4};
    std::shuffle(order.begin(), order.end(), rng);
    for (auto m : order) {
      s.push_back(m);
      const double a = set_accuracy(t, s);
      EXPECT_GE(a, prev);
      prev = a;
    }
    EXPECT_EQ(prev, oracle_metrics(t).accuracy);
  }
}

TEST(MostOptimum, CountsAndTies) {
  auto l = [](std::vector<std::string> ids) {
    std::vector<LabeledExample> out;
    for (auto& id : ids)
      out.push_back({id, {id, {0.0}, {}}, id == "F" ? Label::failure() : Label::model(id)});
    return out;
  };
  EXPECT_EQ(most_optimum_model(l({"A", "A", "B"})), "A");
  EXPECT_EQ(most_optimum_model(l({"B", "A"})), "A");
  EXPECT_EQ(most_optimum_model(l({"F", "F", "B"})), "B");
  EXPECT_THROW(most_optimum_model(l({"F"})), NoViableModelError);
  EXPECT_THROW(most_optimum_model(l({})), EmptyInputError);

  const auto t = table_of(grid_dataset({"A", "B"}, {{{true, 5}, {true, 1}}, {{true, 1}, {false, 1}}}));
  EXPECT_EQ(t.model_ids[most_optimum_model(t)], "A");
}

TEST(CandidateImprovement, HandCounts) {
  // Current {A} covers inputs 1,2; candidate B covers 2,3 (inputs numbered from 1).
  const auto t = table_of(grid_dataset(
      {"A", "B", "C"}, {{{true, 1}, {false, 2}, {true, 3}}, {{true, 1}, {true, 2}, {true, 3}},
                        {{false, 1}, {true, 2}, {false, 3}}, {{false, 1}, {false, 2}, {false, 3}}}));
  const auto b = candidate_improvement(t, ModelSet{0}, 1, ImprovementMetric::AccuracyGain);
  EXPECT_EQ(b.accuracy_gain, 0.25);
  // C behaves like A on coverage.
  EXPECT_EQ(candidate_improvement(t, ModelSet{0}, 2, ImprovementMetric::AccuracyGain).accuracy_gain, 0.0);
  EXPECT_THROW(candidate_improvement(t, ModelSet{0}, 0, ImprovementMetric::AccuracyGain), ParameterError);
}

TEST(CandidateImprovement, OptimalGainDividesByLatencyIncrease) {
  // A: fast, covers input 0. B: slow, covers input 1.
  const auto t = table_of(grid_dataset({"A", "B"}, {{{true, 2}, {false, 10}}, {{false, 2}, {true, 10}}}));
  const auto imp = candidate_improvement(t, ModelSet{0}, 1, ImprovementMetric::OptimalGain);
  // Ideal dispatch before: 2, 2 -> 2. After: 2, 10 -> 6.
  EXPECT_EQ(imp.latency_delta, 4.0);
  EXPECT_EQ(imp.score, 0.5 / 4.0);
  const auto free = table_of(grid_dataset({"A", "B"}, {{{true, 2}, {false, 1}}, {{false, 2}, {true, 1}}}));
  EXPECT_TRUE(std::isinf(candidate_improvement(free, ModelSet{0}, 1, ImprovementMetric::OptimalGain).score));
}

TEST(CandidateImprovement, PaperWalkthroughArithmetic) {
  // 28300 of 40000 inputs (70.75%) covered by m1; m2 covers 5137 of the
  // remaining 11700 (43.91%).
  OutcomeTable t;
  t.model_ids = {"m1", "m2"};
  const std::size_t n = 40000;
  for (std::size_t i = 0; i < n; ++i) {
    t.input_ids.push_back("i" + std::to_string(i));
    const bool m1 = i < 28300;
    const bool m2 = !m1 && i < 28300 + 5137;
    t.met.push_back(m1);
    t.met.push_back(m2);
    t.latency_ms.push_back(1.0);
    t.latency_ms.push_back(4.0);
  }
  EXPECT_EQ(set_accuracy(t, ModelSet{0}), 0.7075);
  const auto imp = candidate_improvement(t, ModelSet{0}, 1, ImprovementMetric::AccuracyGain);
  EXPECT_NEAR(100.0 * imp.accuracy_gain, 12.84, 0.01);
  EXPECT_NEAR(imp.accuracy_gain, (1 - 0.7075) * 0.4391, 1e-4);
}

TEST(SelectModels, MatchesBruteForceGreedy) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::size_t models = 1 + rng() % 5, inputs = 1 + rng() % 50;
    const auto d = synthetic::random_trace(inputs, models, 1, rng());
    const auto table = table_of(d);
    if (oracle_metrics(table).accuracy == 0.0) continue;
    for (double theta : {0.5, 1.0, 2.0, 5.0})
      EXPECT_EQ(select_models(table, {SelectionMethod::Accuracy, theta, false}).models,
                brute_force_greedy(d, theta));
  }
}

TEST(SelectModels, LoggedGainsMeetTheta) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto table = table_of(synthetic::random_trace(60, 5, 1, seed));
    for (auto method : {SelectionMethod::Accuracy, SelectionMethod::Optimal, SelectionMethod::Alternate})
      for (double theta : {0.5, 2.0, 5.0}) {
        const auto r = select_models(table, {method, theta, false});
        std::size_t added = 0;
        for (const auto& s : r.log) {
          if (s.iteration == 0) continue;
          const double gain = 100.0 * (s.accuracy_after - s.accuracy_before);
          if (s.chosen) {
            ++added;
            EXPECT_GE(gain, theta - 1e-9);
          } else {
            EXPECT_LT(gain, theta + 1e-9);
          }
        }
        EXPECT_EQ(added + 1, r.models.size());
        EXPECT_LE(r.accuracy, oracle_metrics(table).accuracy);
        EXPECT_EQ(r.log.front().candidate, table.model_ids[most_optimum_model(table)]);
      }
  }
}

TEST(SelectModels, MonotoneInTheta) {
  const std::vector<double> thetas{5, 2, 1, 0.5};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto table = table_of(synthetic::random_trace(80, 6, 1, seed));
    for (auto method : {SelectionMethod::Accuracy, SelectionMethod::Optimal, SelectionMethod::Alternate}) {
      std::size_t prev = 0;
      for (double theta : thetas) {
        const auto n = select_models(table, {method, theta, false}).models.size();
        EXPECT_GE(n, prev);
        prev = n;
      }
    }
  }
}

TEST(SelectModels, UselessModelNeverChosen) {
  // C only meets the goal where A already does.
  const auto t = table_of(grid_dataset(
      {"A", "B", "C"}, {{{true, 1}, {false, 2}, {true, 3}}, {{true, 1}, {true, 2}, {true, 3}},
                        {{false, 1}, {true, 2}, {false, 3}}, {{true, 1}, {false, 2}, {false, 3}}}));
  for (auto method : {SelectionMethod::Accuracy, SelectionMethod::Optimal, SelectionMethod::Alternate})
    for (double theta : {0.01, 0.5, 5.0, 50.0}) {
      const auto r = select_models(t, {method, theta, false});
      EXPECT_EQ(std::count(r.models.begin(), r.models.end(), "C"), 0);
      EXPECT_EQ(r.models.front(), "A");
    }
}

TEST(SelectModels, LiteralPseudocodeKeepsTheShortfallModel) {
  // B adds 25 points; with theta 30 the walkthrough rule stops at {A}.
  const auto t = table_of(grid_dataset(
      {"A", "B"}, {{{true, 1}, {false, 2}}, {{true, 1}, {false, 2}}, {{true, 1}, {false, 2}},
                   {{false, 1}, {true, 2}}}));
  EXPECT_EQ(select_models(t, {SelectionMethod::Accuracy, 30, false}).models,
            std::vector<std::string>{"A"});
  EXPECT_EQ(select_models(t, {SelectionMethod::Accuracy, 30, true}).models,
            (std::vector<std::string>{"A", "B"}));
  EXPECT_THROW(select_models(t, {SelectionMethod::Accuracy, 0, false}), ParameterError);
}

TEST(SelectModels, AlternateStartsWithOptimalGain) {
  EXPECT_EQ(metric_for_iteration(SelectionMethod::Alternate, 1), ImprovementMetric::OptimalGain);
  EXPECT_EQ(metric_for_iteration(SelectionMethod::Alternate, 2), ImprovementMetric::AccuracyGain);
  EXPECT_EQ(metric_for_iteration(SelectionMethod::Optimal, 2), ImprovementMetric::OptimalGain);
}

TEST(Sweep, TwelveConfigurations) {
  const auto t = table_of(synthetic::random_trace(50, 5, 1, 3));
  const std::vector<SelectionMethod> methods{SelectionMethod::Accuracy, SelectionMethod::Optimal,
                                             SelectionMethod::Alternate};
  const std::vector<double> thetas{5, 2, 1, 0.5};
  const auto rows = sensitivity_sweep(t, methods, thetas);
  ASSERT_EQ(rows.size(), 12u);
  testutil::TempDir dir;
  write_sweep_csv(rows, dir / "s.csv");
  const auto text = testutil::read_file(dir / "s.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
}
