#pragma once

// The premodel classifier kinds behind one train/predict contract. Class
// labels are plain ints; score vectors align with classes(), which is sorted
// ascending, and argmax ties go to the first (smallest) class.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "adasel/matrix.hpp"
#include "json.hpp"

namespace adasel {

enum class ClassifierKind { KNN, NaiveBayes, DecisionTree, LinearSVM };

const char* to_string(ClassifierKind kind);
/// Accepts knn, nb, tree, svm (and the long names). ParameterError otherwise.
ClassifierKind parse_classifier_kind(std::string_view name);

struct Hyperparams {
  int knn_k = 5;
  int tree_max_depth = 8;
  int tree_min_leaf = 2;
  int svm_epochs = 200;
  double svm_reg_lambda = 1e-3;
  std::uint64_t rng_seed = 0;
};

/// Stored training rows, searched by Euclidean distance. Immutable once
/// built so several classifiers (cascade levels) can share one instance.
class NeighborIndex {
 public:
  explicit NeighborIndex(Matrix rows) : rows_(std::move(rows)) {}
  const Matrix& rows() const { return rows_; }
  std::size_t size() const { return rows_.rows(); }
  std::size_t width() const { return rows_.cols(); }

 private:
  Matrix rows_;
};

struct Neighbor {
  std::size_t row;
  double distance;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// All stored rows ordered by ascending distance to `x`, ties by row id.
std::vector<Neighbor> neighbor_order(const NeighborIndex& index, std::span<const double> x);

/// The k nearest rows (ParameterError when k exceeds the stored rows).
std::vector<Neighbor> shared_knn_distances(const NeighborIndex& index, std::span<const double> x,
                                           std::size_t k);

struct Prediction {
  int label = 0;
  std::vector<double> scores;  // aligned with TrainedClassifier::classes()
};

namespace detail {

struct KnnModel {
  std::shared_ptr<const NeighborIndex> index;
  std::vector<int> row_labels;  // kExcludedRow rows do not vote
  int k = 5;
};

struct NaiveBayesModel {
  std::vector<double> log_prior;         // per class
  std::vector<std::vector<double>> mean;  // [class][feature]
  std::vector<std::vector<double>> var;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> dist;  // class frequencies, leaves only
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct SvmModel {
  std::vector<std::vector<double>> weights;  // one-vs-rest, per class
  std::vector<double> bias;
};

}  // namespace detail

inline constexpr int kExcludedRow = INT32_MIN;

class TrainedClassifier {
 public:
  ClassifierKind kind() const;
  const std::vector<int>& classes() const { return classes_; }
  std::size_t width() const { return width_; }

  /// ShapeError when x has the wrong width.
  Prediction predict(std::span<const double> x) const;

  /// KNN only: vote using a neighbor order computed once for the query,
  /// taking the first k rows this classifier has labels for.
  Prediction predict_from_neighbors(std::span<const Neighbor> order) const;

  /// The shared index of a KNN classifier, null for other kinds.
  std::shared_ptr<const NeighborIndex> neighbor_index() const;

  /// KNN parameters omit the index rows; they are serialized once by the owner.
  nlohmann::json to_json() const;
  static TrainedClassifier from_json(const nlohmann::json& j,
                                     std::shared_ptr<const NeighborIndex> index);

  friend TrainedClassifier train_classifier(ClassifierKind, const Matrix&, std::span<const int>,
                                            const Hyperparams&);
  friend TrainedClassifier make_shared_knn(std::shared_ptr<const NeighborIndex>,
                                           std::vector<int>, int);

 private:
  using Model = std::variant<detail::KnnModel, detail::NaiveBayesModel, detail::TreeModel,
                             detail::SvmModel>;
  TrainedClassifier(Model model, std::vector<int> classes, std::size_t width)
      : model_(std::move(model)), classes_(std::move(classes)), width_(width) {}

  Prediction finish(std::vector<double> scores) const;

  Model model_;
  std::vector<int> classes_;
  std::size_t width_ = 0;
};

/// ShapeError on width mismatch between X and y, EmptyInputError on no rows.
TrainedClassifier train_classifier(ClassifierKind kind, const Matrix& x, std::span<const int> y,
                                   const Hyperparams& hp);

/// KNN voting over an existing index. Rows labelled kExcludedRow never vote;
/// at least one row must carry a label.
TrainedClassifier make_shared_knn(std::shared_ptr<const NeighborIndex> index,
                                  std::vector<int> row_labels, int k);

inline Prediction predict_label(const TrainedClassifier& c, std::span<const double> x) {
  return c.predict(x);
}

}  // namespace adasel
