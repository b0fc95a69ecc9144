#include "poison_scan/pipeline.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "poison_scan/error.hpp"
#include "poison_scan/knn.hpp"
#include "poison_scan/parallel.hpp"
#include "poison_scan/rng.hpp"

namespace poison_scan {

namespace {

constexpr std::size_t kResampleChunk = 64;

bool needs_neighbor_stats(std::span<const DetectorKind> kinds) {
    return std::any_of(kinds.begin(), kinds.end(), [](DetectorKind k) {
        return k == DetectorKind::SLOF || k == DetectorKind::DAO;
    });
}

bool has_kind(std::span<const DetectorKind> kinds, DetectorKind kind) {
    return std::find(kinds.begin(), kinds.end(), kind) != kinds.end();
}

}  // namespace

std::vector<std::size_t> BatchPlan::resample_batch(std::size_t i) const {
    if (mode != BatchMode::Resample) {
        throw Error(ErrorCode::InvalidConfig, "resample_batch called on a partition plan");
    }
    if (i >= sample_count) {
        throw Error(ErrorCode::IndexOutOfRange, "sample " + std::to_string(i));
    }
    const std::size_t others = std::min(batch_size, sample_count) - 1;
    const std::size_t pool = sample_count - 1;  // every index except i
    std::vector<std::size_t> batch;
    batch.reserve(others + 1);
    if (others == pool) {
        for (std::size_t j = 0; j < sample_count; ++j) {
            if (j != i) batch.push_back(j);
        }
    } else {
        // Floyd's sampling of `others` distinct values from [0, pool).
        std::mt19937_64 rng(derive_seed(seed, i));
        std::unordered_set<std::size_t> chosen;
        chosen.reserve(others * 2);
        for (std::size_t j = pool - others; j < pool; ++j) {
            std::uniform_int_distribution<std::size_t> pick(0, j);
            const std::size_t t = pick(rng);
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        batch.assign(chosen.begin(), chosen.end());
        std::sort(batch.begin(), batch.end());
        for (auto& v : batch) {
            if (v >= i) ++v;
        }
    }
    batch.insert(batch.begin(), i);
    return batch;
}

BatchPlan plan_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed, BatchMode mode,
                       std::size_t k) {
    if (n < k + 1) {
        throw Error(ErrorCode::DatasetTooSmall, std::to_string(n) + " samples cannot supply k=" +
                                                    std::to_string(k) + " neighbors");
    }
    if (batch_size < k + 1) {
        throw Error(ErrorCode::DatasetTooSmall, "batch size " + std::to_string(batch_size) +
                                                    " must be >= k+1 = " + std::to_string(k + 1));
    }
    BatchPlan plan;
    plan.mode = mode;
    plan.batch_size = batch_size;
    plan.seed = seed;
    plan.sample_count = n;
    if (mode == BatchMode::Resample) return plan;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t end = std::min(n, start + batch_size);
        plan.batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                                  order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    if (plan.batches.size() > 1 && plan.batches.back().size() < k + 1) {
        auto tail = std::move(plan.batches.back());
        plan.batches.pop_back();
        plan.batches.back().insert(plan.batches.back().end(), tail.begin(), tail.end());
    }
    return plan;
}

DatasetHandle::DatasetHandle(EmbeddingMatrix images_, std::optional<EmbeddingMatrix> texts_,
                             std::optional<LabelVector> labels_)
    : images(std::move(images_)), texts(std::move(texts_)), labels(std::move(labels_)) {
    if (texts) {
        if (texts->count() != images.count()) {
            throw Error(ErrorCode::CountMismatch, "text count " + std::to_string(texts->count()) +
                                                      " != image count " + std::to_string(images.count()));
        }
        if (texts->dim() != images.dim()) {
            throw Error(ErrorCode::DimMismatch, "text dim " + std::to_string(texts->dim()) +
                                                    " != image dim " + std::to_string(images.dim()));
        }
    }
    if (labels && labels->count() != images.count()) {
        throw Error(ErrorCode::CountMismatch, "label count " + std::to_string(labels->count()) +
                                                  " != image count " + std::to_string(images.count()));
    }
}

ReferenceSet build_reference_set(EmbeddingView images, std::optional<EmbeddingView> texts,
                                 std::span<const std::size_t> batch) {
    if (texts && texts->dim != images.dim) {
        throw Error(ErrorCode::DimMismatch, "image dim " + std::to_string(images.dim) +
                                                " != text dim " + std::to_string(texts->dim));
    }
    ReferenceSet refs;
    refs.dim = images.dim;
    refs.image_rows = batch.size();
    refs.rows = batch.size() * (texts ? 2 : 1);
    refs.data.reserve(refs.rows * refs.dim);
    auto append = [&](EmbeddingView source) {
        for (std::size_t idx : batch) {
            if (idx >= source.rows) throw Error(ErrorCode::IndexOutOfRange, "row " + std::to_string(idx));
            auto r = source.row(idx);
            refs.data.insert(refs.data.end(), r.begin(), r.end());
        }
    };
    append(images);
    if (texts) append(*texts);
    return refs;
}

std::vector<std::vector<double>> score_reference_set(EmbeddingView refs,
                                                     std::span<const std::size_t> query_slots,
                                                     const DetectorConfig& det,
                                                     std::span<const DetectorKind> kinds,
                                                     std::uint64_t forest_seed) {
    const std::size_t nq = query_slots.size();
    std::vector<std::vector<double>> out(kinds.size(), std::vector<double>(nq));

    // Rows whose neighborhoods are needed: the queries, plus their neighbors for SLOF/DAO.
    std::vector<std::size_t> rows(query_slots.begin(), query_slots.end());
    NeighborTable table = knn_within(refs, rows, det.k);
    constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> row_of(refs.rows, kAbsent);
    for (std::size_t r = 0; r < rows.size(); ++r) row_of[rows[r]] = r;

    NeighborTable extra;
    std::vector<std::size_t> extra_rows;
    std::vector<std::size_t> extra_of;
    if (needs_neighbor_stats(kinds)) {
        std::vector<char> wanted(refs.rows, 0);
        for (std::size_t q = 0; q < nq; ++q) {
            for (auto idx : table[q].indices) {
                if (row_of[idx] == kAbsent) wanted[idx] = 1;
            }
        }
        extra_of.assign(refs.rows, kAbsent);
        for (std::size_t s = 0; s < refs.rows; ++s) {
            if (wanted[s]) {
                extra_of[s] = extra_rows.size();
                extra_rows.push_back(s);
            }
        }
        extra = knn_within(refs, extra_rows, det.k);
    }
    auto neighborhood = [&](std::size_t slot) {
        return row_of[slot] != kAbsent ? table[row_of[slot]] : extra[extra_of[slot]];
    };

    const bool want_lid_stats = has_kind(kinds, DetectorKind::DAO);
    std::vector<double> nb_kdist(det.k);
    std::vector<double> nb_lid(det.k);
    std::optional<IsolationForest> forest;
    if (has_kind(kinds, DetectorKind::IForest)) {
        DetectorConfig forest_cfg = det;
        forest_cfg.seed = forest_seed;
        forest = iforest_fit(refs, forest_cfg);
    }

    for (std::size_t q = 0; q < nq; ++q) {
        const NeighborSet ns = table[q];
        if (needs_neighbor_stats(kinds)) {
            for (std::size_t i = 0; i < det.k; ++i) {
                const NeighborSet other = neighborhood(ns.indices[i]);
                nb_kdist[i] = kdist(other);
                if (want_lid_stats) {
                    nb_lid[i] = estimate_lid_mle(other, det.epsilon, det.lid_cap, det.lid_normalization);
                }
            }
        }
        for (std::size_t c = 0; c < kinds.size(); ++c) {
            double s = 0.0;
            switch (kinds[c]) {
            case DetectorKind::KDist: s = score_kdist(ns); break;
            case DetectorKind::LID: s = score_lid(ns, det.epsilon, det.lid_cap, det.lid_normalization); break;
            case DetectorKind::SLOF: s = score_slof(ns, nb_kdist, det.epsilon); break;
            case DetectorKind::DAO: s = score_dao(ns, nb_kdist, nb_lid, det.epsilon); break;
            case DetectorKind::IForest: s = iforest_score(*forest, refs.row(query_slots[q])); break;
            }
            out[c][q] = s;
        }
    }
    return out;
}

std::vector<ScoreVector> score_dataset_multi(const DatasetHandle& data, const DetectorConfig& det,
                                             std::span<const DetectorKind> kinds, const BatchPlan& plan,
                                             std::size_t threads) {
    for (DetectorKind kind : kinds) {
        DetectorConfig check = det;
        check.kind = kind;
        check.validate();
    }
    if (plan.sample_count != data.count()) {
        throw Error(ErrorCode::CountMismatch, "plan covers " + std::to_string(plan.sample_count) +
                                                  " samples, dataset has " + std::to_string(data.count()));
    }
    std::vector<ScoreVector> result(kinds.size());
    for (std::size_t c = 0; c < kinds.size(); ++c) {
        result[c].detector = kinds[c];
        result[c].scores.assign(data.count(), 0.0);
    }
    const EmbeddingView images = data.images.view();
    const std::optional<EmbeddingView> texts =
        data.texts ? std::optional<EmbeddingView>(data.texts->view()) : std::nullopt;

    if (plan.mode == BatchMode::Partition) {
        parallel_for(plan.batches.size(), threads, [&](std::size_t b) {
            const auto& batch = plan.batches[b];
            const ReferenceSet refs = build_reference_set(images, texts, batch);
            std::vector<std::size_t> slots(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) slots[i] = refs.query_slot(i);
            const auto scores = score_reference_set(refs.view(), slots, det, kinds, derive_seed(det.seed, b));
            for (std::size_t c = 0; c < kinds.size(); ++c) {
                for (std::size_t i = 0; i < batch.size(); ++i) result[c].scores[batch[i]] = scores[c][i];
            }
        });
    } else {
        const std::size_t chunks = (data.count() + kResampleChunk - 1) / kResampleChunk;
        parallel_for(chunks, threads, [&](std::size_t chunk) {
            const std::size_t end = std::min(data.count(), (chunk + 1) * kResampleChunk);
            const std::size_t slot0[1] = {0};
            for (std::size_t i = chunk * kResampleChunk; i < end; ++i) {
                const auto batch = plan.resample_batch(i);
                const ReferenceSet refs = build_reference_set(images, texts, batch);
                const auto scores = score_reference_set(refs.view(), slot0, det, kinds, derive_seed(det.seed, i));
                for (std::size_t c = 0; c < kinds.size(); ++c) result[c].scores[i] = scores[c][0];
            }
        });
    }
    return result;
}

ScoreVector score_dataset(const DatasetHandle& data, const DetectorConfig& det, const BatchPlan& plan,
                          std::size_t threads) {
    const DetectorKind kinds[1] = {det.kind};
    return std::move(score_dataset_multi(data, det, kinds, plan, threads).front());
}

}  // namespace poison_scan
