#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "poison_scan/embedding_store.hpp"
#include "poison_scan/pipeline.hpp"

namespace poison_scan {

struct FilterPolicy {
    enum class Kind : std::uint8_t { TopFraction, AbsoluteThreshold, MeanPlusStd };

    Kind kind = Kind::TopFraction;
    double value = 0.10;  // fraction, threshold, or sigma multiplier depending on kind

    static FilterPolicy top_fraction(double fraction) { return {Kind::TopFraction, fraction}; }
    static FilterPolicy absolute_threshold(double t) { return {Kind::AbsoluteThreshold, t}; }
    static FilterPolicy mean_plus_std(double sigmas) { return {Kind::MeanPlusStd, sigmas}; }
};

/// ceil(fraction * n), treating products within 1e-9 of an integer as that integer.
std::size_t removal_count(double fraction, std::size_t n);

/// Sorted indices to remove.
///  TopFraction: the removal_count(fraction, n) highest scores, ties to the lower index.
///  AbsoluteThreshold: score >= threshold.
///  MeanPlusStd: score >= mean + value * std (population std over all scores).
/// Raises EmptyScores or InvalidPolicy (fraction outside (0, 1), non-finite values).
std::vector<std::size_t> select_removals(std::span<const double> scores, const FilterPolicy& policy);

/// Ascending complement of `removals` within 0..n-1. Raises IndexOutOfRange.
std::vector<std::size_t> kept_indices(std::size_t n, std::span<const std::size_t> removals);

/// Kept index list; when `out` is given, writes images.emb, labels.lbl (if
/// labels present), texts.emb (if texts present), kept.txt and removed.txt
/// there, rows in original relative order.
std::vector<std::size_t> purify(const DatasetHandle& data, std::span<const std::size_t> removals,
                                const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace poison_scan
