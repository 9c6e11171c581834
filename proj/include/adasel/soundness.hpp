#pragma once

// Two ways to judge whether a premodel decision can be trusted: a conformal
// p-value over calibration nonconformity scores, and a permissible-distance
// sweep that dispatches by vote among training points within a radius.

#include <filesystem>
#include <span>
#include <vector>

#include "adasel/labeling.hpp"
#include "adasel/matrix.hpp"

namespace adasel {

class Premodel;
struct FeatureRow;

struct ConformalModel {
  std::vector<double> calibration_scores;  // a_j in [0,1]
  double theta_cal = 0.5;
  double trust_threshold = 0.5;
};

/// 1 - probability of the label; DomainError outside [0,1].
double nonconformity(double prob_for_label);

/// |{a_j > a}| / (q+1) + theta_cal * (|{a_j = a}| + 1) / (q+1).
/// DomainError when `a` lies outside [0,1] or there are no calibration scores.
double conformal_pvalue(const ConformalModel& cm, double a);

/// True when the p-value of nonconformity(class_prob) is below trust_threshold.
bool flag_untrusted(const ConformalModel& cm, double class_prob);

/// Calibration scores from a held-out split: the nonconformity of the
/// premodel's confidence in each row's decision. Rows whose decision differs
/// from the expected label score 1 (no support for the right answer).
ConformalModel calibrate_conformal(const Premodel& premodel, std::span<const FeatureRow> rows,
                                   std::span<const Label> expected, double theta_cal = 0.5,
                                   double trust_threshold = 0.5);

struct RadiusPoint {
  double radius;
  double accuracy;
  double dispatch_failure_fraction;
};

/// Vote rule: majority label among training rows within `radius` (inclusive),
/// ties by Label order (models by id, Failure last); no rows in range
/// dispatches Failure. A dispatch counts as accurate when the model meets the
/// goal on that test input. `radii` must be strictly ascending and may end in
/// +infinity. Features are expected to be scaled with the training scaler.
std::vector<RadiusPoint> radius_accuracy_sweep(const Matrix& train_x,
                                               std::span<const Label> train_labels,
                                               const Matrix& test_x,
                                               std::span<const std::size_t> test_rows,
                                               const OutcomeTable& table,
                                               std::span<const double> radii);

void write_radius_sweep_csv(std::span<const RadiusPoint> curve, const std::filesystem::path& path);

}  // namespace adasel
