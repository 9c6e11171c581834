#include "adasel/soundness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "adasel/csv.hpp"
#include "adasel/errors.hpp"
#include "adasel/kernels.hpp"
#include "adasel/premodel.hpp"

namespace adasel {

double nonconformity(double prob_for_label) {
  if (!(prob_for_label >= 0.0 && prob_for_label <= 1.0))
    throw DomainError("nonconformity: probability must lie in [0,1]");
  return 1.0 - prob_for_label;
}

double conformal_pvalue(const ConformalModel& cm, double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw DomainError("conformal_pvalue: score must lie in [0,1]");
  if (cm.calibration_scores.empty())
    throw DomainError("conformal_pvalue: no calibration scores");
  std::size_t greater = 0, equal = 0;
  for (double aj : cm.calibration_scores) {
    if (aj > a)
      ++greater;
    else if (aj == a)
      ++equal;
  }
  const double q1 = static_cast<double>(cm.calibration_scores.size() + 1);
  return static_cast<double>(greater) / q1 +
         cm.theta_cal * static_cast<double>(equal + 1) / q1;
}

bool flag_untrusted(const ConformalModel& cm, double class_prob) {
  return conformal_pvalue(cm, nonconformity(class_prob)) < cm.trust_threshold;
}

ConformalModel calibrate_conformal(const Premodel& premodel, std::span<const FeatureRow> rows,
                                   std::span<const Label> expected, double theta_cal,
                                   double trust_threshold) {
  if (rows.size() != expected.size())
    throw ShapeError("calibrate_conformal: one expected label per row required");
  if (rows.empty()) throw EmptyInputError("calibrate_conformal: empty calibration split");
  ConformalModel cm;
  cm.theta_cal = theta_cal;
  cm.trust_threshold = trust_threshold;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto d = premodel.predict(rows[i]);
    const double prob = d.choice == expected[i] ? std::clamp(d.confidence, 0.0, 1.0) : 0.0;
    cm.calibration_scores.push_back(nonconformity(prob));
  }
  return cm;
}

std::vector<RadiusPoint> radius_accuracy_sweep(const Matrix& train_x,
                                               std::span<const Label> train_labels,
                                               const Matrix& test_x,
                                               std::span<const std::size_t> test_rows,
                                               const OutcomeTable& table,
                                               std::span<const double> radii) {
  if (train_labels.size() != train_x.rows() || test_rows.size() != test_x.rows())
    throw ShapeError("radius_accuracy_sweep: label/row count mismatch");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (!(radii[i] >= 0.0) || (i > 0 && !(radii[i] > radii[i - 1])))
      throw ParameterError("radii must be nonnegative and strictly ascending");

  // Vote slots in Label order, so the first maximum wins ties.
  std::map<Label, int> slot_of;
  for (const auto& l : train_labels) slot_of.emplace(l, 0);
  std::vector<Label> slot_label;
  for (auto& [label, slot] : slot_of) {
    slot = static_cast<int>(slot_label.size());
    slot_label.push_back(label);
  }
  std::vector<int> train_slot;
  for (const auto& l : train_labels) train_slot.push_back(slot_of.at(l));
  std::vector<int> model_of_slot;
  for (const auto& l : slot_label) {
    if (l.is_failure()) {
      model_of_slot.push_back(-1);
      continue;
    }
    auto m = table.model_index(l.model_id());
    if (!m) throw LookupError("training label '" + l.model_id() + "' is not in the trace");
    model_of_slot.push_back(static_cast<int>(*m));
  }

  const Matrix d2 = kernels::omp::squared_distances(test_x, train_x);
  std::vector<RadiusPoint> curve;
  for (double r : radii) {
    const double r2 = std::isinf(r) ? r : r * r;
    std::vector<std::uint8_t> hit(test_x.rows(), 0), failed(test_x.rows(), 0);
    const auto nt = static_cast<std::ptrdiff_t>(test_x.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ti = 0; ti < nt; ++ti) {
      const auto t = static_cast<std::size_t>(ti);
      std::vector<int> votes(slot_label.size(), 0);
      int total = 0;
      for (std::size_t j = 0; j < train_x.rows(); ++j)
        if (d2(t, j) <= r2) {
          ++votes[static_cast<std::size_t>(train_slot[j])];
          ++total;
        }
      int model = -1;
      if (total > 0) {
        const auto best = std::max_element(votes.begin(), votes.end()) - votes.begin();
        model = model_of_slot[static_cast<std::size_t>(best)];
      }
      if (model < 0)
        failed[t] = 1;
      else
        hit[t] = table.met_at(test_rows[t], static_cast<std::size_t>(model)) ? 1 : 0;
    }
    const double n = static_cast<double>(std::max<std::size_t>(test_x.rows(), 1));
    double hits = 0.0, fails = 0.0;
    for (std::size_t t = 0; t < test_x.rows(); ++t) {
      hits += hit[t];
      fails += failed[t];
    }
    curve.push_back({r, hits / n, fails / n});
  }
  return curve;
}

void write_radius_sweep_csv(std::span<const RadiusPoint> curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "radius,accuracy,dispatch_failure_fraction\n";
  for (const auto& p : curve)
    out << csv::format_double(p.radius) << ',' << csv::format_double(p.accuracy) << ','
        << csv::format_double(p.dispatch_failure_fraction) << '\n';
}

}  // namespace adasel
