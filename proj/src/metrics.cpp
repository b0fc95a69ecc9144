#include "poison_scan/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "poison_scan/error.hpp"
#include "poison_scan/filtering.hpp"

namespace poison_scan {

namespace {

struct ClassCounts {
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

ClassCounts check_inputs(std::span<const double> scores, const LabelVector& labels) {
    if (scores.size() != labels.count()) {
        throw Error(ErrorCode::CountMismatch, std::to_string(scores.size()) + " scores vs " +
                                                  std::to_string(labels.count()) + " labels");
    }
    ClassCounts c;
    c.positives = labels.backdoor_count();
    c.negatives = labels.count() - c.positives;
    if (c.positives == 0 || c.negatives == 0) {
        throw Error(ErrorCode::DegenerateLabels, "need at least one clean and one backdoor sample");
    }
    return c;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace

double auc(std::span<const double> scores, const LabelVector& labels) {
    const ClassCounts counts = check_inputs(scores, labels);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double positive_rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::size_t tied_positives = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels.is_backdoor(order[j])) ++tied_positives;
            ++j;
        }
        // ranks i+1 .. j share their mean
        const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
        positive_rank_sum += mean_rank * static_cast<double>(tied_positives);
        i = j;
    }
    const double p = static_cast<double>(counts.positives);
    const double n = static_cast<double>(counts.negatives);
    return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double fpr_at_tpr(std::span<const double> scores, const LabelVector& labels, double target_tpr) {
    const ClassCounts counts = check_inputs(scores, labels);
    if (target_tpr <= 0.0) return 0.0;  // t = +infinity
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const double p = static_cast<double>(counts.positives);
    const double n = static_cast<double>(counts.negatives);
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double t = scores[order[i]];
        while (i < order.size() && scores[order[i]] == t) {
            if (labels.is_backdoor(order[i])) ++tp; else ++fp;
            ++i;
        }
        if (static_cast<double>(tp) / p >= target_tpr) return static_cast<double>(fp) / n;
    }
    return 1.0;  // unreachable for target_tpr <= 1
}

std::vector<SweepPoint> threshold_sweep(std::span<const double> scores, const LabelVector& labels,
                                        std::span<const double> removal_fractions) {
    const ClassCounts counts = check_inputs(scores, labels);
    std::vector<double> all(scores.begin(), scores.end());
    std::vector<double> pos;
    std::vector<double> neg;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        (labels.is_backdoor(i) ? pos : neg).push_back(scores[i]);
    }
    std::sort(all.begin(), all.end(), std::greater<>());
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    auto at_or_above = [](const std::vector<double>& sorted, double t) {
        return static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
    };

    std::vector<SweepPoint> sweep;
    sweep.reserve(removal_fractions.size());
    for (double fraction : removal_fractions) {
        const std::size_t m = removal_count(std::clamp(fraction, 0.0, 1.0), all.size());
        SweepPoint pt;
        pt.removal_fraction = fraction;
        pt.threshold = m == 0 ? std::numeric_limits<double>::infinity() : all[m - 1];
        pt.tpr = at_or_above(pos, pt.threshold) / static_cast<double>(counts.positives);
        pt.fpr = at_or_above(neg, pt.threshold) / static_cast<double>(counts.negatives);
        sweep.push_back(pt);
    }
    return sweep;
}

std::vector<double> default_sweep_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 99; ++i) grid.push_back(static_cast<double>(i) / 100.0);
    return grid;
}

EvalReport evaluate(const ScoreVector& scores, const LabelVector& labels, double wall_time_seconds) {
    EvalReport report;
    report.auc = auc(scores.scores, labels);
    report.fpr_at_95_tpr = fpr_at_tpr(scores.scores, labels, 0.95);
    report.n_backdoor = labels.backdoor_count();
    report.n_clean = labels.count() - report.n_backdoor;
    report.detector = scores.detector;
    report.wall_time_seconds = wall_time_seconds;
    return report;
}

std::string to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["auc"] = report.auc;
    j["fpr_at_95_tpr"] = report.fpr_at_95_tpr;
    j["n_clean"] = report.n_clean;
    j["n_backdoor"] = report.n_backdoor;
    j["detector"] = std::string(to_string(report.detector));
    j["wall_time_seconds"] = report.wall_time_seconds;
    return j.dump(2) + "\n";
}

std::string sweep_to_csv(std::span<const SweepPoint> sweep) {
    std::string text = "removal_fraction,threshold,tpr,fpr\n";
    for (const auto& pt : sweep) {
        text += format_double(pt.removal_fraction) + "," + format_double(pt.threshold) + "," +
                format_double(pt.tpr) + "," + format_double(pt.fpr) + "\n";
    }
    return text;
}

}  // namespace poison_scan
