#include "poison_scan/knn.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "poison_scan/error.hpp"

namespace poison_scan {

namespace {

using RowMajorF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMapF = Eigen::Map<const RowMajorF>;

constexpr std::size_t kQueryTile = 128;
constexpr std::size_t kNoSelf = std::numeric_limits<std::size_t>::max();

struct Candidate {
    double distance;
    std::uint32_t index;

    bool operator<(const Candidate& o) const {
        return distance < o.distance || (distance == o.distance && index < o.index);
    }
};

// Queries are either the rows of a dense view or selected rows of `refs`.
struct QuerySource {
    EmbeddingView rows;
    std::span<const std::size_t> slots;  // when use_slots, query i is refs row slots[i]
    bool use_slots = false;

    std::size_t size() const { return use_slots ? slots.size() : rows.rows; }
    std::span<const float> row(std::size_t i) const {
        return use_slots ? rows.row(slots[i]) : rows.row(i);
    }
};

void check_k(std::size_t k, std::size_t refs, bool exclude_self) {
    if (k == 0) {
        throw Error(ErrorCode::KTooSmall, "k must be >= 1");
    }
    const std::size_t available = refs - (exclude_self && refs > 0 ? 1 : 0);
    if (k > available) {
        throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " but only " +
                                              std::to_string(available) + " reference points");
    }
}

NeighborTable knn_kernel(const QuerySource& queries, EmbeddingView refs, std::size_t k,
                         std::span<const std::size_t> self_slots) {
    const std::size_t nq = queries.size();
    const std::size_t nr = refs.rows;
    const std::size_t dim = refs.dim;
    NeighborTable table(nq, k);
    if (nq == 0) return table;

    std::vector<double> ref_sq(nr);
    double max_ref_sq = 0.0;
    for (std::size_t j = 0; j < nr; ++j) {
        double s = 0.0;
        for (float v : refs.row(j)) s += static_cast<double>(v) * v;
        ref_sq[j] = s;
        max_ref_sq = std::max(max_ref_sq, s);
    }
    const double max_ref_norm = std::sqrt(max_ref_sq);

    // |fl(x.y) - x.y| <= gamma_d |x||y| for any summation order in float.
    const double unit = std::ldexp(1.0, -24);
    const double d_unit = static_cast<double>(dim) * unit;
    const double gamma = d_unit < 0.5 ? d_unit / (1.0 - d_unit) : 1.0;
    const double dbl_eps = std::numeric_limits<double>::epsilon();

    const ConstMapF ref_map(refs.data.data(), static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(dim));
    RowMajorF tile;
    RowMajorF dots;
    std::vector<double> approx(nr);
    std::vector<double> scratch(nr);
    std::vector<Candidate> candidates;

    for (std::size_t start = 0; start < nq; start += kQueryTile) {
        const std::size_t count = std::min(kQueryTile, nq - start);
        tile.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
        for (std::size_t t = 0; t < count; ++t) {
            auto r = queries.row(start + t);
            std::copy(r.begin(), r.end(), tile.row(static_cast<Eigen::Index>(t)).data());
        }
        dots.noalias() = tile * ref_map.transpose();

        for (std::size_t t = 0; t < count; ++t) {
            const std::size_t q = start + t;
            const std::size_t self = self_slots.empty() ? kNoSelf : self_slots[q];
            auto qrow = queries.row(q);
            double q_sq = 0.0;
            for (float v : qrow) q_sq += static_cast<double>(v) * v;

            const float* dot_row = dots.row(static_cast<Eigen::Index>(t)).data();
            for (std::size_t j = 0; j < nr; ++j) {
                approx[j] = q_sq + ref_sq[j] - 2.0 * static_cast<double>(dot_row[j]);
            }
            if (self != kNoSelf) approx[self] = std::numeric_limits<double>::infinity();

            std::copy(approx.begin(), approx.end(), scratch.begin());
            std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
            const double kth = scratch[k - 1];

            // Any true member of the k-NN set has approx <= kth + 2 * err.
            const double err = 2.0 * gamma * std::sqrt(q_sq) * max_ref_norm +
                               8.0 * dbl_eps * (q_sq + max_ref_sq);
            const double cutoff = kth + 4.0 * err;

            candidates.clear();
            for (std::size_t j = 0; j < nr; ++j) {
                if (j == self || !(approx[j] <= cutoff)) continue;
                candidates.push_back(
                    {std::sqrt(squared_distance(qrow, refs.row(j))), static_cast<std::uint32_t>(j)});
            }
            std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k),
                              candidates.end());
            auto out_d = table.distances(q);
            auto out_i = table.indices(q);
            for (std::size_t i = 0; i < k; ++i) {
                out_d[i] = candidates[i].distance;
                out_i[i] = candidates[i].index;
            }
        }
    }
    return table;
}

}  // namespace

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double t = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        s += t * t;
    }
    return s;
}

DistanceBlock pairwise_distances(EmbeddingView queries, EmbeddingView refs) {
    if (queries.dim != refs.dim) {
        throw Error(ErrorCode::DimMismatch, "query dim " + std::to_string(queries.dim) +
                                                " != reference dim " + std::to_string(refs.dim));
    }
    DistanceBlock block{queries.rows, refs.rows, std::vector<double>(queries.rows * refs.rows)};
    for (std::size_t i = 0; i < queries.rows; ++i) {
        for (std::size_t j = 0; j < refs.rows; ++j) {
            block.values[i * refs.rows + j] = std::sqrt(squared_distance(queries.row(i), refs.row(j)));
        }
    }
    return block;
}

NeighborTable knn(EmbeddingView queries, EmbeddingView refs, std::size_t k,
                  std::span<const std::size_t> self_slots) {
    if (queries.dim != refs.dim) {
        throw Error(ErrorCode::DimMismatch, "query dim " + std::to_string(queries.dim) +
                                                " != reference dim " + std::to_string(refs.dim));
    }
    if (!self_slots.empty()) {
        if (self_slots.size() != queries.rows) {
            throw Error(ErrorCode::CountMismatch, "self_slots must have one entry per query");
        }
        for (std::size_t s : self_slots) {
            if (s >= refs.rows) throw Error(ErrorCode::IndexOutOfRange, "self slot " + std::to_string(s));
        }
    }
    check_k(k, refs.rows, !self_slots.empty());
    return knn_kernel(QuerySource{queries, {}, false}, refs, k, self_slots);
}

NeighborTable knn_within(EmbeddingView refs, std::span<const std::size_t> slots, std::size_t k) {
    for (std::size_t s : slots) {
        if (s >= refs.rows) throw Error(ErrorCode::IndexOutOfRange, "slot " + std::to_string(s));
    }
    check_k(k, refs.rows, true);
    return knn_kernel(QuerySource{refs, slots, true}, refs, k, slots);
}

}  // namespace poison_scan
