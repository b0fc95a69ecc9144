#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "poison_scan/embedding_store.hpp"

namespace poison_scan {

/// The k nearest reference points of one query: distances ascending,
/// equal distances ordered by ascending reference index.
struct NeighborSet {
    std::span<const double> distances;
    std::span<const std::uint32_t> indices;

    std::size_t k() const noexcept { return distances.size(); }
};

/// Distance to the k-th nearest neighbor (the last entry of `ns.distances`).
inline double kdist(const NeighborSet& ns) { return ns.distances.back(); }

/// Flat storage of one NeighborSet per query, all with the same k.
class NeighborTable {
public:
    NeighborTable() = default;
    NeighborTable(std::size_t queries, std::size_t k)
        : k_(k), distances_(queries * k), indices_(queries * k) {}

    std::size_t size() const noexcept { return k_ == 0 ? 0 : distances_.size() / k_; }
    std::size_t k() const noexcept { return k_; }

    NeighborSet operator[](std::size_t q) const {
        return {std::span<const double>(distances_).subspan(q * k_, k_),
                std::span<const std::uint32_t>(indices_).subspan(q * k_, k_)};
    }
    std::span<double> distances(std::size_t q) { return std::span<double>(distances_).subspan(q * k_, k_); }
    std::span<std::uint32_t> indices(std::size_t q) {
        return std::span<std::uint32_t>(indices_).subspan(q * k_, k_);
    }

    friend bool operator==(const NeighborTable&, const NeighborTable&) = default;

private:
    std::size_t k_ = 0;
    std::vector<double> distances_;
    std::vector<std::uint32_t> indices_;
};

/// Dense |queries| x |refs| Euclidean distances, row-major, double precision.
struct DistanceBlock {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

/// Squared Euclidean distance accumulated in double, coordinates in order.
double squared_distance(std::span<const float> a, std::span<const float> b) noexcept;

DistanceBlock pairwise_distances(EmbeddingView queries, EmbeddingView refs);

/// Exact k-nearest neighbors of every query row among `refs`.
///
/// `self_slots` is either empty (no exclusion) or holds, for each query, the
/// reference slot that query occupies; that slot is never returned. Exclusion
/// is by slot identity, so exact duplicates elsewhere in `refs` remain valid
/// neighbors at distance 0.
///
/// Candidates are screened with a single-precision dot-product pass and a
/// rigorous rounding-error margin, then re-ranked on exact double-precision
/// distances, so the result equals a naive double-precision search and does
/// not depend on SIMD width or threading.
NeighborTable knn(EmbeddingView queries, EmbeddingView refs, std::size_t k,
                  std::span<const std::size_t> self_slots = {});

/// k-NN of the reference rows at `slots` against all of `refs`, each query
/// excluding its own slot.
NeighborTable knn_within(EmbeddingView refs, std::span<const std::size_t> slots, std::size_t k);

}  // namespace poison_scan
