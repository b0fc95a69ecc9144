#include "poison_scan/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "poison_scan/error.hpp"

namespace poison_scan {

std::size_t removal_count(double fraction, std::size_t n) {
    const double product = fraction * static_cast<double>(n);
    const double nearest = std::round(product);
    if (std::abs(product - nearest) <= 1e-9 * std::max(1.0, nearest)) {
        return static_cast<std::size_t>(nearest);
    }
    return static_cast<std::size_t>(std::ceil(product));
}

std::vector<std::size_t> select_removals(std::span<const double> scores, const FilterPolicy& policy) {
    if (scores.empty()) {
        throw Error(ErrorCode::EmptyScores, "no scores to filter");
    }
    if (!std::isfinite(policy.value)) {
        throw Error(ErrorCode::InvalidPolicy, "policy parameter must be finite");
    }
    for (double s : scores) {
        if (!std::isfinite(s)) throw Error(ErrorCode::InvalidPolicy, "scores must be finite");
    }

    std::vector<std::size_t> removed;
    auto remove_at_or_above = [&](double threshold) {
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= threshold) removed.push_back(i);
        }
    };

    switch (policy.kind) {
    case FilterPolicy::Kind::TopFraction: {
        if (!(policy.value > 0.0 && policy.value < 1.0)) {
            throw Error(ErrorCode::InvalidPolicy, "fraction must lie in (0, 1)");
        }
        const std::size_t m = removal_count(policy.value, scores.size());
        std::vector<std::size_t> order(scores.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                          });
        removed.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
        std::sort(removed.begin(), removed.end());
        break;
    }
    case FilterPolicy::Kind::AbsoluteThreshold:
        remove_at_or_above(policy.value);
        break;
    case FilterPolicy::Kind::MeanPlusStd: {
        const double n = static_cast<double>(scores.size());
        const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / n;
        double var = 0.0;
        for (double s : scores) var += (s - mean) * (s - mean);
        remove_at_or_above(mean + policy.value * std::sqrt(var / n));
        break;
    }
    }
    return removed;
}

std::vector<std::size_t> kept_indices(std::size_t n, std::span<const std::size_t> removals) {
    std::vector<char> drop(n, 0);
    for (std::size_t r : removals) {
        if (r >= n) {
            throw Error(ErrorCode::IndexOutOfRange, "removal index " + std::to_string(r) +
                                                        " outside 0.." + std::to_string(n - 1));
        }
        drop[r] = 1;
    }
    std::vector<std::size_t> kept;
    kept.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!drop[i]) kept.push_back(i);
    }
    return kept;
}

std::vector<std::size_t> purify(const DatasetHandle& data, std::span<const std::size_t> removals,
                                const std::optional<std::filesystem::path>& out_dir) {
    std::vector<std::size_t> kept = kept_indices(data.count(), removals);
    if (!out_dir) return kept;

    std::error_code ec;
    std::filesystem::create_directories(*out_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create " + out_dir->string() + ": " + ec.message());
    }
    if (kept.empty()) {
        throw Error(ErrorCode::EmptyMatrix, "every sample was removed; nothing to write");
    }
    std::vector<std::size_t> removed = kept_indices(data.count(), kept);
    write_index_list(*out_dir / "kept.txt", kept);
    write_index_list(*out_dir / "removed.txt", removed);
    write_embeddings(*out_dir / "images.emb", data.images.gather(kept));
    if (data.texts) write_embeddings(*out_dir / "texts.emb", data.texts->gather(kept));
    if (data.labels) write_labels(*out_dir / "labels.lbl", data.labels->gather(kept));
    return kept;
}

}  // namespace poison_scan
