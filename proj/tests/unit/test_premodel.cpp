#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <set>

#include "adasel/errors.hpp"
#include "adasel/premodel.hpp"
#include "adasel/synthetic.hpp"
#include "test_util.hpp"

using namespace adasel;
using testutil::Cell;
using testutil::grid_dataset;

namespace {

struct Fixture {
  Dataset data;
  OutcomeTable table;
  std::vector<LabeledExample> labeled;
};

Fixture make(Dataset d) {
  Fixture f;
  f.table = build_outcomes(d, Criterion::boolean_goal());
  f.labeled = label_dataset(d, Criterion::boolean_goal());
  f.data = std::move(d);
  return f;
}

Hyperparams knn(int k) {
  Hyperparams hp;
  hp.knn_k = k;
  return hp;
}

// Rows cycle through optima A, B, C, Failure.
Dataset four_way(std::size_t n) {
  std::vector<std::vector<Cell>> cells;
  for (std::size_t i = 0; i < n; ++i) {
    switch (i % 4) {
      case 0: cells.push_back({{true, 1}, {true, 2}, {false, 3}}); break;
      case 1: cells.push_back({{false, 1}, {true, 2}, {true, 3}}); break;
      case 2: cells.push_back({{false, 1}, {false, 2}, {true, 3}}); break;
      default: cells.push_back({{false, 1}, {false, 2}, {false, 3}}); break;
    }
  }
  return grid_dataset({"A", "B", "C"}, cells);
}

}  // namespace

TEST(Premodel, UniformLabelIsAlwaysPredicted) {
  std::vector<std::vector<Cell>> cells(12, {{true, 1}, {true, 5}});
  const auto f = make(grid_dataset({"A", "B"}, cells));
  const std::vector<std::string> sel{"A", "B"};
  for (auto kind : {ClassifierKind::KNN, ClassifierKind::NaiveBayes, ClassifierKind::DecisionTree,
                    ClassifierKind::LinearSVM}) {
    const auto p = build_single(kind, f.labeled, f.table, sel, knn(3), FallbackPolicy::report_failure());
    for (double x : {-5.0, 0.0, 3.5, 100.0})
      EXPECT_EQ(p.predict({"q", {x}, {}}).choice, Label::model("A")) << to_string(kind);
  }
}

TEST(Premodel, SingleHasOneClassPerSelectedModelPlusFailure) {
  const auto f = make(four_way(20));
  const std::vector<std::string> sel{"A", "B", "C"};
  const auto p = build_single(ClassifierKind::KNN, f.labeled, f.table, sel, knn(1),
                              FallbackPolicy::report_failure());
  EXPECT_EQ(p.classifier(0).classes().size(), 4u);
  EXPECT_EQ(p.level_count(), 1u);
}

TEST(Premodel, LabelsAreRestrictedToTheSelection) {
  // Optimum is A, but only B and C are selected; B is the fastest meeting one.
  const auto f = make(grid_dataset({"A", "B", "C"}, {{{true, 1}, {true, 3}, {true, 2}}}));
  const std::vector<std::string> bc{"B", "C"};
  EXPECT_EQ(relabel_to_selected(f.labeled, f.table, bc)[0], Label::model("C"));
  const std::vector<std::string> b{"B"};
  EXPECT_EQ(relabel_to_selected(f.labeled, f.table, b)[0], Label::model("B"));
  const auto g = make(grid_dataset({"A", "B"}, {{{true, 1}, {false, 3}}}));
  EXPECT_TRUE(relabel_to_selected(g.labeled, g.table, b)[0].is_failure());
}

TEST(Premodel, OneLevelCascadeMatchesBinarySingle) {
  const auto f = make(synthetic::random_trace(60, 3, 2, 3));
  const std::vector<std::string> sel{"m1"};
  const std::vector<ClassifierKind> kinds{ClassifierKind::KNN};
  const auto single = build_single(ClassifierKind::KNN, f.labeled, f.table, sel, knn(3),
                                   FallbackPolicy::report_failure());
  const auto cascade = build_cascade(kinds, f.labeled, f.table, sel, knn(3),
                                     FallbackPolicy::report_failure());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.2, 1.2);
  for (int t = 0; t < 200; ++t) {
    const FeatureRow q{"q", {u(rng), u(rng)}, {}};
    EXPECT_EQ(single.predict(q).choice, cascade.predict(q).choice);
  }
}

TEST(Premodel, MemorizingKnnReproducesTrainingLabels) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto f = make(synthetic::random_trace(50, 4, 3, seed));
    const std::vector<std::string> sel{"m2", "m0", "m3"};
    const auto expected = relabel_to_selected(f.labeled, f.table, sel);
    const std::vector<ClassifierKind> kinds{ClassifierKind::KNN};
    const auto single = build_single(ClassifierKind::KNN, f.labeled, f.table, sel, knn(1),
                                     FallbackPolicy::report_failure());
    const auto cascade = build_cascade(kinds, f.labeled, f.table, sel, knn(1),
                                       FallbackPolicy::report_failure());
    EXPECT_TRUE(cascade.shares_neighbors());
    for (std::size_t i = 0; i < f.labeled.size(); ++i) {
      EXPECT_EQ(single.predict(f.labeled[i].features).choice, expected[i]);
      EXPECT_EQ(cascade.predict(f.labeled[i].features).choice, expected[i]);
    }
  }
}

TEST(Premodel, LevelsConsulted) {
  const auto f = make(four_way(20));
  const std::vector<std::string> sel{"A", "B", "C"};
  const std::vector<ClassifierKind> kinds{ClassifierKind::KNN};
  const auto cascade = build_cascade(kinds, f.labeled, f.table, sel, knn(1),
                                     FallbackPolicy::report_failure());
  const auto single = build_single(ClassifierKind::KNN, f.labeled, f.table, sel, knn(1),
                                   FallbackPolicy::report_failure());
  for (std::size_t i = 0; i < 8; ++i) {
    const auto& row = f.labeled[i].features;
    EXPECT_EQ(single.predict(row).levels_consulted, 1);
    const auto d = cascade.predict(row);
    // Rows cycle A, B, C, Failure: the firing level is i % 4, exhaustion is 3.
    EXPECT_EQ(d.levels_consulted, static_cast<int>(std::min<std::size_t>(i % 4 + 1, 3)));
    if (i % 4 == 3) EXPECT_TRUE(d.choice.is_failure());
  }
}

TEST(Premodel, FallbackReplacesFailure) {
  const auto f = make(four_way(20));
  const std::vector<std::string> sel{"A", "B"};
  const std::vector<ClassifierKind> kinds{ClassifierKind::KNN};
  const auto single = build_single(ClassifierKind::KNN, f.labeled, f.table, sel, knn(1),
                                   FallbackPolicy::use("C"));
  const auto cascade = build_cascade(kinds, f.labeled, f.table, sel, knn(1), FallbackPolicy::use("C"));
  // Row 2's restricted label is Failure (only C meets the goal there).
  EXPECT_EQ(single.predict(f.labeled[2].features).choice, Label::model("C"));
  EXPECT_EQ(cascade.predict(f.labeled[2].features).choice, Label::model("C"));
  EXPECT_EQ(single.predict(f.labeled[0].features).choice, Label::model("A"));
  EXPECT_THROW(build_single(ClassifierKind::KNN, f.labeled, f.table, sel, knn(1),
                            FallbackPolicy::use("Z")),
               LookupError);
}

TEST(Premodel, FallbackParsing) {
  EXPECT_FALSE(FallbackPolicy::parse("failure").use_model.has_value());
  EXPECT_EQ(*FallbackPolicy::parse("model:B").use_model, "B");
  EXPECT_EQ(FallbackPolicy::parse("model:B").str(), "model:B");
  EXPECT_THROW(FallbackPolicy::parse("B"), ParameterError);
  EXPECT_THROW(FallbackPolicy::parse("model:"), ParameterError);
}

TEST(Premodel, BadSelections) {
  const auto f = make(four_way(8));
  const std::vector<std::string> none, unknown{"Z"}, twice{"A", "A"};
  EXPECT_THROW(build_single(ClassifierKind::KNN, f.labeled, f.table, none, knn(1), {}), ParameterError);
  EXPECT_THROW(build_single(ClassifierKind::KNN, f.labeled, f.table, unknown, knn(1), {}), LookupError);
  EXPECT_THROW(build_single(ClassifierKind::KNN, f.labeled, f.table, twice, knn(1), {}), ParameterError);
  EXPECT_THROW(build_single(ClassifierKind::KNN, {}, f.table, std::vector<std::string>{"A"}, knn(1), {}),
               EmptyInputError);
}

TEST(Premodel, SaveLoadGivesIdenticalDecisions) {
  testutil::TempDir dir;
  const auto f = make(synthetic::random_trace(80, 4, 3, 9));
  const std::vector<std::string> sel{"m0", "m1", "m3"};
  std::vector<Premodel> models;
  for (auto kind : {ClassifierKind::KNN, ClassifierKind::NaiveBayes, ClassifierKind::DecisionTree,
                    ClassifierKind::LinearSVM})
    models.push_back(build_single(kind, f.labeled, f.table, sel, knn(3), FallbackPolicy::use("m2")));
  const std::vector<ClassifierKind> mixed{ClassifierKind::KNN, ClassifierKind::DecisionTree,
                                          ClassifierKind::KNN};
  models.push_back(build_cascade(mixed, f.labeled, f.table, sel, knn(3), {}));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  for (const auto& p : models) {
    save_premodel(p, dir / "p.json");
    const auto back = load_premodel(dir / "p.json");
    EXPECT_EQ(premodel_to_json(back), premodel_to_json(p));
    for (int t = 0; t < 100; ++t) {
      const FeatureRow q{"q", {u(rng), u(rng), u(rng)}, {}};
      const auto a = p.predict(q), b = back.predict(q);
      EXPECT_EQ(a.choice, b.choice);
      EXPECT_EQ(a.levels_consulted, b.levels_consulted);
      EXPECT_EQ(a.confidence, b.confidence);
    }
  }
}

TEST(Premodel, TruncatedFileIsFormatError) {
  testutil::TempDir dir;
  const auto f = make(four_way(12));
  const auto p = build_single(ClassifierKind::KNN, f.labeled, f.table, std::vector<std::string>{"A"},
                              knn(1), {});
  save_premodel(p, dir / "p.json");
  const auto text = testutil::read_file(dir / "p.json");
  testutil::write_file(dir / "cut.json", text.substr(0, text.size() / 2));
  EXPECT_THROW(load_premodel(dir / "cut.json"), FormatError);
  EXPECT_THROW(load_premodel(dir / "missing.json"), IoError);
}

TEST(Premodel, WrongVersionNamesBothVersions) {
  const auto f = make(four_way(12));
  const auto p = build_single(ClassifierKind::KNN, f.labeled, f.table, std::vector<std::string>{"A"},
                              knn(1), {});
  auto j = premodel_to_json(p);
  j["version"] = 99;
  try {
    premodel_from_json(j);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("99"), std::string::npos);
    EXPECT_NE(msg.find(std::to_string(kPremodelFormatVersion)), std::string::npos);
  }
}

TEST(Premodel, OutputsStayInsideSelectionFailureAndFallback) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 2);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto f = make(synthetic::random_trace(40, 5, 2, seed));
    const std::vector<std::string> sel{"m4", "m1"};
    const std::vector<ClassifierKind> kinds{ClassifierKind::NaiveBayes};
    const std::vector<Premodel> ps{
        build_single(ClassifierKind::LinearSVM, f.labeled, f.table, sel, knn(3), FallbackPolicy::use("m0")),
        build_cascade(kinds, f.labeled, f.table, sel, knn(3), {})};
    const std::set<std::string> ok{"m4", "m1", "m0", "FAILURE"};
    for (const auto& p : ps)
      for (int t = 0; t < 100; ++t) {
        const auto d = p.predict({"q", {u(rng), u(rng)}, {}});
        EXPECT_TRUE(ok.count(d.choice.str())) << d.choice.str();
        EXPECT_GE(d.levels_consulted, 1);
        EXPECT_LE(d.levels_consulted, static_cast<int>(p.level_count()));
      }
  }
}

TEST(Premodel, WrongRowWidthIsShapeError) {
  const auto f = make(four_way(12));
  const auto p = build_single(ClassifierKind::KNN, f.labeled, f.table, std::vector<std::string>{"A"},
                              knn(1), {});
  EXPECT_THROW(p.predict({"q", {1.0, 2.0}, {}}), ShapeError);
}
