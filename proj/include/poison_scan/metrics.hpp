#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "poison_scan/embedding_store.hpp"

namespace poison_scan {

struct EvalReport {
    double auc = 0.0;
    double fpr_at_95_tpr = 0.0;
    std::size_t n_clean = 0;
    std::size_t n_backdoor = 0;
    DetectorKind detector = DetectorKind::KDist;
    double wall_time_seconds = 0.0;
};

/// Mann-Whitney AUC with average ranks for ties. Raises DegenerateLabels
/// unless both classes are present, CountMismatch on length mismatch.
double auc(std::span<const double> scores, const LabelVector& labels);

/// FPR of the rule score >= t for the largest t whose TPR reaches target_tpr.
/// Thresholds range over the observed scores plus +infinity (nothing flagged).
double fpr_at_tpr(std::span<const double> scores, const LabelVector& labels, double target_tpr = 0.95);

struct SweepPoint {
    double removal_fraction = 0.0;
    double threshold = 0.0;
    double tpr = 0.0;
    double fpr = 0.0;
};

/// One point per removal fraction p: the threshold is the ceil(p*n)-th highest
/// score (+infinity when that count is 0) and TPR/FPR are for score >= threshold.
std::vector<SweepPoint> threshold_sweep(std::span<const double> scores, const LabelVector& labels,
                                        std::span<const double> removal_fractions);

/// 0.01, 0.02, ..., 0.99.
std::vector<double> default_sweep_grid();

EvalReport evaluate(const ScoreVector& scores, const LabelVector& labels, double wall_time_seconds = 0.0);

/// JSON object with exactly the EvalReport field names, in declaration order.
std::string to_json(const EvalReport& report);
std::string sweep_to_csv(std::span<const SweepPoint> sweep);

}  // namespace poison_scan
