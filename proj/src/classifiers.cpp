#include "adasel/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "adasel/errors.hpp"
#include "adasel/kernels.hpp"

namespace adasel {

namespace {

constexpr double kVarianceFloor = 1e-9;
constexpr double kLog2Pi = 1.8378770664093453;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::size_t class_slot(const std::vector<int>& classes, int label) {
  return static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), label) -
                                  classes.begin());
}

std::vector<int> sorted_classes(std::span<const int> y) {
  std::vector<int> c;
  for (int v : y)
    if (v != kExcludedRow) c.push_back(v);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

// --- Naive Bayes -----------------------------------------------------------

detail::NaiveBayesModel fit_naive_bayes(const Matrix& x, std::span<const int> y,
                                        const std::vector<int>& classes) {
  const std::size_t nc = classes.size(), d = x.cols();
  detail::NaiveBayesModel m;
  m.mean.assign(nc, std::vector<double>(d, 0.0));
  m.var.assign(nc, std::vector<double>(d, 0.0));
  std::vector<double> count(nc, 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto c = class_slot(classes, y[r]);
    count[c] += 1.0;
    for (std::size_t f = 0; f < d; ++f) m.mean[c][f] += x(r, f);
  }
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t f = 0; f < d; ++f) m.mean[c][f] /= count[c];
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto c = class_slot(classes, y[r]);
    for (std::size_t f = 0; f < d; ++f) {
      const double dv = x(r, f) - m.mean[c][f];
      m.var[c][f] += dv * dv;
    }
  }
  m.log_prior.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t f = 0; f < d; ++f)
      m.var[c][f] = std::max(m.var[c][f] / count[c], kVarianceFloor);
    m.log_prior[c] = std::log(count[c] / static_cast<double>(x.rows()));
  }
  return m;
}

std::vector<double> naive_bayes_scores(const detail::NaiveBayesModel& m,
                                       std::span<const double> x) {
  const std::size_t nc = m.log_prior.size();
  std::vector<double> logp(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    double lp = m.log_prior[c];
    for (std::size_t f = 0; f < x.size(); ++f) {
      const double dv = x[f] - m.mean[c][f];
      lp -= 0.5 * (kLog2Pi + std::log(m.var[c][f]) + dv * dv / m.var[c][f]);
    }
    logp[c] = lp;
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  double total = 0.0;
  for (auto& v : logp) total += (v = std::exp(v - top));
  for (auto& v : logp) v /= total;
  return logp;
}

// --- Decision tree ---------------------------------------------------------

struct TreeBuilder {
  const Matrix& x;
  std::vector<std::size_t> y;  // class slots
  std::size_t n_classes;
  int max_depth;
  std::size_t min_leaf;
  detail::TreeModel tree;

  static double gini(const std::vector<double>& counts, double n) {
    if (n <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : counts) s += (c / n) * (c / n);
    return 1.0 - s;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    std::vector<double> counts(n_classes, 0.0);
    for (auto r : rows) counts[y[r]] += 1.0;
    const double n = static_cast<double>(rows.size());
    const double parent = gini(counts, n) * n;

    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_cost = parent;
    if (depth < max_depth && parent > 0.0 && rows.size() >= 2 * min_leaf) {
      std::vector<std::size_t> order = rows;
      for (std::size_t f = 0; f < x.cols(); ++f) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return x(a, f) != x(b, f) ? x(a, f) < x(b, f) : a < b;
        });
        std::vector<double> left(n_classes, 0.0), right = counts;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          left[y[order[i]]] += 1.0;
          right[y[order[i]]] -= 1.0;
          const double lo = x(order[i], f), hi = x(order[i + 1], f);
          if (lo == hi) continue;
          const std::size_t nl = i + 1, nr = order.size() - nl;
          if (nl < min_leaf || nr < min_leaf) continue;
          const double cost = gini(left, static_cast<double>(nl)) * static_cast<double>(nl) +
                              gini(right, static_cast<double>(nr)) * static_cast<double>(nr);
          if (cost < best_cost - 1e-12) {
            best_cost = cost;
            best_feature = static_cast<int>(f);
            best_threshold = lo + (hi - lo) / 2.0;
          }
        }
      }
    }

    if (best_feature < 0) {
      for (auto& c : counts) c /= n;
      tree.nodes[static_cast<std::size_t>(id)].dist = std::move(counts);
      return id;
    }
    std::vector<std::size_t> lrows, rrows;
    for (auto r : rows)
      (x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? lrows : rrows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(lrows), depth + 1);
    const int r = grow(std::move(rrows), depth + 1);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }
};

std::vector<double> tree_scores(const detail::TreeModel& t, std::span<const double> x) {
  std::size_t at = 0;
  while (t.nodes[at].feature >= 0) {
    const auto& node = t.nodes[at];
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                      ? node.left
                                      : node.right);
  }
  return t.nodes[at].dist;
}

// --- Linear SVM ------------------------------------------------------------

// Fisher-Yates with explicit draws so the order depends only on the seed.
void seeded_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

// Pegasos-style subgradient descent on the regularized hinge loss. The bias
// is a weight on a constant 1 input and is regularized with the rest.
detail::SvmModel fit_svm(const Matrix& x, std::span<const int> y, const std::vector<int>& classes,
                         const Hyperparams& hp) {
  detail::SvmModel m;
  const std::size_t d = x.cols(), n = x.rows();
  if (classes.size() < 2) {
    m.weights.assign(classes.size(), std::vector<double>(d, 0.0));
    m.bias.assign(classes.size(), 0.0);
    return m;
  }
  const double lambda = hp.svm_reg_lambda;
  for (std::size_t c = 0; c < classes.size(); ++c) {
    std::mt19937_64 rng(hp.rng_seed + 0x9E3779B97F4A7C15ULL * (c + 1));
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::size_t t = 0;
    for (int epoch = 0; epoch < hp.svm_epochs; ++epoch) {
      seeded_shuffle(order, rng);
      for (auto i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t + 1));
        const double label = y[i] == classes[c] ? 1.0 : -1.0;
        double margin = b;
        for (std::size_t f = 0; f < d; ++f) margin += w[f] * x(i, f);
        margin *= label;
        const double shrink = 1.0 - eta * lambda;
        for (auto& wf : w) wf *= shrink;
        b *= shrink;
        if (margin < 1.0) {
          for (std::size_t f = 0; f < d; ++f) w[f] += eta * label * x(i, f);
          b += eta * label;
        }
      }
    }
    m.weights.push_back(std::move(w));
    m.bias.push_back(b);
  }
  return m;
}

std::vector<double> svm_scores(const detail::SvmModel& m, std::span<const double> x) {
  const std::size_t nc = m.weights.size();
  if (nc == 1) return {1.0};
  std::vector<double> s(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    double v = m.bias[c];
    for (std::size_t f = 0; f < x.size(); ++f) v += m.weights[c][f] * x[f];
    s[c] = v;
  }
  const double top = *std::max_element(s.begin(), s.end());
  double total = 0.0;
  for (auto& v : s) total += (v = std::exp(v - top));
  for (auto& v : s) v /= total;
  return s;
}

// --- KNN -------------------------------------------------------------------

std::vector<double> knn_vote(const detail::KnnModel& m, const std::vector<int>& classes,
                             std::span<const Neighbor> order) {
  std::vector<double> votes(classes.size(), 0.0);
  int taken = 0;
  for (const auto& nb : order) {
    if (taken == m.k) break;
    const int label = m.row_labels[nb.row];
    if (label == kExcludedRow) continue;
    votes[class_slot(classes, label)] += 1.0;
    ++taken;
  }
  for (auto& v : votes) v /= static_cast<double>(taken);
  return votes;
}

}  // namespace

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::KNN: return "knn";
    case ClassifierKind::NaiveBayes: return "nb";
    case ClassifierKind::DecisionTree: return "tree";
    case ClassifierKind::LinearSVM: return "svm";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(std::string_view name) {
  if (name == "knn" || name == "KNN") return ClassifierKind::KNN;
  if (name == "nb" || name == "NaiveBayes") return ClassifierKind::NaiveBayes;
  if (name == "tree" || name == "dt" || name == "DecisionTree") return ClassifierKind::DecisionTree;
  if (name == "svm" || name == "LinearSVM") return ClassifierKind::LinearSVM;
  throw ParameterError("unknown classifier kind '" + std::string(name) + "'");
}

std::vector<Neighbor> neighbor_order(const NeighborIndex& index, std::span<const double> x) {
  if (x.size() != index.width()) throw ShapeError("neighbor_order: query width mismatch");
  std::vector<double> d2(index.size());
  kernels::squared_distances_to(index.rows(), x, d2);
  std::vector<Neighbor> out(index.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {i, d2[i]};
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.row < b.row;
  });
  for (auto& nb : out) nb.distance = std::sqrt(nb.distance);
  return out;
}

std::vector<Neighbor> shared_knn_distances(const NeighborIndex& index, std::span<const double> x,
                                           std::size_t k) {
  if (k == 0 || k > index.size())
    throw ParameterError("shared_knn_distances: k=" + std::to_string(k) + " but index holds " +
                         std::to_string(index.size()) + " rows");
  auto order = neighbor_order(index, x);
  order.resize(k);
  return order;
}

ClassifierKind TrainedClassifier::kind() const {
  return std::visit(overloaded{
                        [](const detail::KnnModel&) { return ClassifierKind::KNN; },
                        [](const detail::NaiveBayesModel&) { return ClassifierKind::NaiveBayes; },
                        [](const detail::TreeModel&) { return ClassifierKind::DecisionTree; },
                        [](const detail::SvmModel&) { return ClassifierKind::LinearSVM; },
                    },
                    model_);
}

Prediction TrainedClassifier::finish(std::vector<double> scores) const {
  const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
  return {classes_[static_cast<std::size_t>(best)], std::move(scores)};
}

Prediction TrainedClassifier::predict(std::span<const double> x) const {
  if (x.size() != width_)
    throw ShapeError("predict: expected width " + std::to_string(width_) + ", got " +
                     std::to_string(x.size()));
  return std::visit(
      overloaded{
          [&](const detail::KnnModel& m) {
            return finish(knn_vote(m, classes_, neighbor_order(*m.index, x)));
          },
          [&](const detail::NaiveBayesModel& m) { return finish(naive_bayes_scores(m, x)); },
          [&](const detail::TreeModel& m) { return finish(tree_scores(m, x)); },
          [&](const detail::SvmModel& m) { return finish(svm_scores(m, x)); },
      },
      model_);
}

Prediction TrainedClassifier::predict_from_neighbors(std::span<const Neighbor> order) const {
  const auto* m = std::get_if<detail::KnnModel>(&model_);
  if (!m) throw ParameterError("predict_from_neighbors needs a KNN classifier");
  return finish(knn_vote(*m, classes_, order));
}

std::shared_ptr<const NeighborIndex> TrainedClassifier::neighbor_index() const {
  const auto* m = std::get_if<detail::KnnModel>(&model_);
  return m ? m->index : nullptr;
}

TrainedClassifier train_classifier(ClassifierKind kind, const Matrix& x, std::span<const int> y,
                                   const Hyperparams& hp) {
  if (x.rows() == 0) throw EmptyInputError("train_classifier: no examples");
  if (y.size() != x.rows())
    throw ShapeError("train_classifier: " + std::to_string(x.rows()) + " rows but " +
                     std::to_string(y.size()) + " labels");
  auto classes = sorted_classes(y);
  if (std::find(y.begin(), y.end(), kExcludedRow) != y.end())
    throw ParameterError("train_classifier: reserved label value");
  switch (kind) {
    case ClassifierKind::KNN:
      return make_shared_knn(std::make_shared<const NeighborIndex>(x),
                             std::vector<int>(y.begin(), y.end()), hp.knn_k);
    case ClassifierKind::NaiveBayes:
      return {fit_naive_bayes(x, y, classes), classes, x.cols()};
    case ClassifierKind::DecisionTree: {
      if (hp.tree_max_depth < 1 || hp.tree_min_leaf < 1)
        throw ParameterError("tree depth and min_leaf must be positive");
      TreeBuilder b{x, {}, classes.size(), hp.tree_max_depth,
                    static_cast<std::size_t>(hp.tree_min_leaf), {}};
      for (int v : y) b.y.push_back(class_slot(classes, v));
      std::vector<std::size_t> rows(x.rows());
      std::iota(rows.begin(), rows.end(), 0);
      b.grow(std::move(rows), 0);
      return {std::move(b.tree), classes, x.cols()};
    }
    case ClassifierKind::LinearSVM:
      if (hp.svm_epochs < 1 || !(hp.svm_reg_lambda > 0.0))
        throw ParameterError("svm epochs and lambda must be positive");
      return {fit_svm(x, y, classes, hp), classes, x.cols()};
  }
  throw ParameterError("train_classifier: unknown kind");
}

TrainedClassifier make_shared_knn(std::shared_ptr<const NeighborIndex> index,
                                  std::vector<int> row_labels, int k) {
  if (!index || row_labels.size() != index->size())
    throw ShapeError("make_shared_knn: one label per indexed row required");
  if (k < 1) throw ParameterError("knn k must be positive");
  auto classes = sorted_classes(row_labels);
  if (classes.empty()) throw EmptyInputError("make_shared_knn: every row is excluded");
  const std::size_t width = index->width();
  return {detail::KnnModel{std::move(index), std::move(row_labels), k}, std::move(classes), width};
}

// --- serialization -----------------------------------------------------------

nlohmann::json TrainedClassifier::to_json() const {
  nlohmann::json j;
  j["kind"] = adasel::to_string(kind());
  j["classes"] = classes_;
  j["width"] = width_;
  std::visit(overloaded{
                 [&](const detail::KnnModel& m) {
                   j["k"] = m.k;
                   j["row_labels"] = m.row_labels;
                 },
                 [&](const detail::NaiveBayesModel& m) {
                   j["log_prior"] = m.log_prior;
                   j["mean"] = m.mean;
                   j["var"] = m.var;
                 },
                 [&](const detail::TreeModel& m) {
                   auto nodes = nlohmann::json::array();
                   for (const auto& n : m.nodes)
                     nodes.push_back({{"feature", n.feature},
                                      {"threshold", n.threshold},
                                      {"left", n.left},
                                      {"right", n.right},
                                      {"dist", n.dist}});
                   j["nodes"] = std::move(nodes);
                 },
                 [&](const detail::SvmModel& m) {
                   j["weights"] = m.weights;
                   j["bias"] = m.bias;
                 },
             },
             model_);
  return j;
}

TrainedClassifier TrainedClassifier::from_json(const nlohmann::json& j,
                                               std::shared_ptr<const NeighborIndex> index) {
  try {
    const auto kind = parse_classifier_kind(j.at("kind").get<std::string>());
    auto classes = j.at("classes").get<std::vector<int>>();
    const auto width = j.at("width").get<std::size_t>();
    switch (kind) {
      case ClassifierKind::KNN:
        if (!index || index->width() != width)
          throw FormatError("KNN classifier without a matching neighbor index");
        return make_shared_knn(std::move(index), j.at("row_labels").get<std::vector<int>>(),
                               j.at("k").get<int>());
      case ClassifierKind::NaiveBayes: {
        detail::NaiveBayesModel m;
        m.log_prior = j.at("log_prior").get<std::vector<double>>();
        m.mean = j.at("mean").get<std::vector<std::vector<double>>>();
        m.var = j.at("var").get<std::vector<std::vector<double>>>();
        return {std::move(m), std::move(classes), width};
      }
      case ClassifierKind::DecisionTree: {
        detail::TreeModel m;
        for (const auto& n : j.at("nodes"))
          m.nodes.push_back({n.at("feature").get<int>(), n.at("threshold").get<double>(),
                             n.at("left").get<int>(), n.at("right").get<int>(),
                             n.at("dist").get<std::vector<double>>()});
        return {std::move(m), std::move(classes), width};
      }
      case ClassifierKind::LinearSVM: {
        detail::SvmModel m;
        m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
        m.bias = j.at("bias").get<std::vector<double>>();
        return {std::move(m), std::move(classes), width};
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("classifier: ") + e.what());
  }
  throw FormatError("classifier: unknown kind");
}

}  // namespace adasel
