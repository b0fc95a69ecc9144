#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "poison_scan/detectors.hpp"
#include "poison_scan/embedding_store.hpp"

namespace poison_scan {

enum class BatchMode : std::uint8_t { Partition, Resample };

/// How samples are grouped into reference batches.
///
/// Partition: a seeded shuffle of 0..n-1 cut into consecutive chunks of
/// batch_size; a trailing chunk smaller than k+1 is merged into the one before.
/// Resample: sample i is scored against itself plus batch_size-1 distinct other
/// samples drawn from a stream seeded by (seed, i), generated on demand.
struct BatchPlan {
    BatchMode mode = BatchMode::Partition;
    std::size_t batch_size = 2048;
    std::uint64_t seed = 0;
    std::size_t sample_count = 0;
    std::vector<std::vector<std::size_t>> batches;  // Partition only

    /// Resample mode: sample i first, then the other members in ascending order.
    std::vector<std::size_t> resample_batch(std::size_t i) const;
};

BatchPlan plan_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed, BatchMode mode,
                       std::size_t k);

/// Image embeddings are the queries; text embeddings, when present, only enrich
/// the reference sets. Counts and dims must agree.
struct DatasetHandle {
    DatasetHandle(EmbeddingMatrix images, std::optional<EmbeddingMatrix> texts = std::nullopt,
                  std::optional<LabelVector> labels = std::nullopt);

    EmbeddingMatrix images;
    std::optional<EmbeddingMatrix> texts;
    std::optional<LabelVector> labels;

    std::size_t count() const noexcept { return images.count(); }
};

/// Batch image rows followed by batch text rows; image row i of the batch is slot i.
struct ReferenceSet {
    std::vector<float> data;
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::size_t image_rows = 0;

    EmbeddingView view() const noexcept { return {data, rows, dim}; }
    std::size_t query_slot(std::size_t batch_position) const noexcept { return batch_position; }
};

ReferenceSet build_reference_set(EmbeddingView images, std::optional<EmbeddingView> texts,
                                 std::span<const std::size_t> batch);

/// Scores the reference rows at `query_slots` with each of `kinds`, sharing one
/// neighbor search. Neighbor kdists and LIDs come from the same reference set
/// with each reference point excluding its own slot. `forest_seed` seeds the
/// isolation forest fitted on `refs`.
std::vector<std::vector<double>> score_reference_set(EmbeddingView refs,
                                                     std::span<const std::size_t> query_slots,
                                                     const DetectorConfig& det,
                                                     std::span<const DetectorKind> kinds,
                                                     std::uint64_t forest_seed);

ScoreVector score_dataset(const DatasetHandle& data, const DetectorConfig& det, const BatchPlan& plan,
                          std::size_t threads = 1);

/// One ScoreVector per kind; all kinds share det's other settings.
std::vector<ScoreVector> score_dataset_multi(const DatasetHandle& data, const DetectorConfig& det,
                                             std::span<const DetectorKind> kinds, const BatchPlan& plan,
                                             std::size_t threads = 1);

}  // namespace poison_scan
