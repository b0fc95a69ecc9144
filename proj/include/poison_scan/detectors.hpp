#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "poison_scan/embedding_store.hpp"
#include "poison_scan/knn.hpp"

namespace poison_scan {

/// Denominator of the LID maximum-likelihood estimate: the k-term mean
/// (including the zero i = k term) or the k-1 term mean.
enum class LidNormalization : std::uint8_t { K, KMinusOne };

struct DetectorConfig {
    DetectorKind kind = DetectorKind::DAO;
    std::size_t k = 16;
    double epsilon = 1e-12;
    double lid_cap = 1e6;
    LidNormalization lid_normalization = LidNormalization::K;
    std::size_t iforest_trees = 100;
    /// Upper bound on the per-tree subsample; the effective size is min(this, |refs|).
    std::size_t iforest_subsample = 256;
    std::uint64_t seed = 0;

    /// Raises InvalidConfig unless k >= 1, epsilon > 0, lid_cap > 0, trees >= 1, subsample >= 2.
    void validate() const;
};

/// Finite ceiling applied to each DAO term.
inline constexpr double kDaoTermCeiling = 1e300;

double score_kdist(const NeighborSet& ns);

/// Maximum-likelihood LID estimate from ascending k-NN radii:
///   -( (1/k) * sum_i ln(max(r_i, eps) / max(r_k, eps)) )^-1
/// clamped to (0, lid_cap]. All-equal radii give lid_cap. Raises KTooSmall for k < 2.
double estimate_lid_mle(std::span<const double> radii, double epsilon, double lid_cap,
                        LidNormalization norm = LidNormalization::K);
double estimate_lid_mle(const NeighborSet& ns, double epsilon, double lid_cap,
                        LidNormalization norm = LidNormalization::K);

double score_lid(const NeighborSet& ns, double epsilon, double lid_cap,
                 LidNormalization norm = LidNormalization::K);

/// Mean over the k neighbors of kdist(q) / kdist(o), radii floored at epsilon
/// and each ratio kept within [epsilon, 1/epsilon].
double score_slof(const NeighborSet& query, std::span<const double> neighbor_kdists, double epsilon);

/// As score_slof, but each ratio is raised to the neighbor's LID estimate.
/// Terms are capped at kDaoTermCeiling. With every neighbor LID equal to 1
/// this returns exactly score_slof.
double score_dao(const NeighborSet& query, std::span<const double> neighbor_kdists,
                 std::span<const double> neighbor_lids, double epsilon);

/// Average unsuccessful-search path length of a binary search tree over n
/// points: c(1) = 0, c(2) = 1, c(n) = 2 H(n-1) - 2 (n-1) / n with
/// H(m) = ln(m) + 0.5772156649.
double average_path_length(std::size_t n) noexcept;

struct IsolationTreeNode {
    static constexpr std::int32_t kLeaf = -1;

    std::int32_t left = kLeaf;
    std::int32_t right = kLeaf;
    std::uint32_t feature = 0;
    std::uint32_t size = 0;  // training points reaching this node
    double split = 0.0;      // x[feature] < split goes left

    bool is_leaf() const noexcept { return left == kLeaf; }
    friend bool operator==(const IsolationTreeNode&, const IsolationTreeNode&) = default;
};

/// Nodes in depth-first pre-order; index 0 is the root.
using IsolationTree = std::vector<IsolationTreeNode>;

struct IsolationForest {
    std::size_t dim = 0;
    std::size_t psi = 0;
    double c_psi = 0.0;
    std::size_t height_limit = 0;
    std::vector<IsolationTree> trees;

    /// Depth of the leaf reached by `x` plus c(leaf size).
    double path_length(std::size_t tree, std::span<const float> x) const;

    friend bool operator==(const IsolationForest&, const IsolationForest&) = default;
};

/// Builds cfg.iforest_trees isolation trees over `refs`.
///
/// Tree t draws from std::mt19937_64(derive_seed(cfg.seed, t)):
///  1. a psi-subsample by partial Fisher-Yates over 0..n-1
///     (uniform_int_distribution on [i, n-1] for i = 0..psi-1);
///  2. nodes grown depth-first, left child before right. A node becomes a leaf
///     when it holds <= 1 point, reaches ceil(log2 psi), or has no non-constant
///     feature. Otherwise the split feature is drawn uniformly from the
///     non-constant features (ascending index order) and the split value from
///     uniform_real_distribution(min, max), redrawn while equal to min.
IsolationForest iforest_fit(EmbeddingView refs, const DetectorConfig& cfg);

/// 2^(-E[h(x)] / c(psi)), in (0, 1). Raises DimMismatch.
double iforest_score(const IsolationForest& forest, std::span<const float> query);

}  // namespace poison_scan
