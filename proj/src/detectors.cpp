#include "poison_scan/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "poison_scan/error.hpp"
#include "poison_scan/rng.hpp"

namespace poison_scan {

namespace {

constexpr double kEulerGamma = 0.5772156649;

double clamp_ratio(double ratio, double epsilon) {
    return std::clamp(ratio, epsilon, 1.0 / epsilon);
}

void check_neighbor_arrays(const NeighborSet& query, std::size_t n, const char* what) {
    if (n != query.k()) {
        throw Error(ErrorCode::CountMismatch, std::string(what) + " must have k entries");
    }
    if (query.k() == 0) {
        throw Error(ErrorCode::KTooSmall, "empty neighbor set");
    }
}

class TreeBuilder {
public:
    TreeBuilder(EmbeddingView refs, std::size_t height_limit, std::mt19937_64& rng)
        : refs_(refs), height_limit_(height_limit), rng_(rng),
          lo_(refs.dim), hi_(refs.dim) {}

    IsolationTree build(std::span<std::size_t> points) {
        tree_.clear();
        grow(points, 0);
        return std::move(tree_);
    }

private:
    std::int32_t grow(std::span<std::size_t> points, std::size_t depth) {
        const auto id = static_cast<std::int32_t>(tree_.size());
        tree_.push_back({});
        tree_[id].size = static_cast<std::uint32_t>(points.size());
        if (points.size() <= 1 || depth >= height_limit_) return id;

        const std::size_t dim = refs_.dim;
        std::fill(lo_.begin(), lo_.end(), std::numeric_limits<float>::infinity());
        std::fill(hi_.begin(), hi_.end(), -std::numeric_limits<float>::infinity());
        for (std::size_t p : points) {
            auto x = refs_.row(p);
            for (std::size_t f = 0; f < dim; ++f) {
                lo_[f] = std::min(lo_[f], x[f]);
                hi_[f] = std::max(hi_[f], x[f]);
            }
        }
        features_.clear();
        for (std::size_t f = 0; f < dim; ++f) {
            if (lo_[f] < hi_[f]) features_.push_back(static_cast<std::uint32_t>(f));
        }
        if (features_.empty()) return id;

        std::uniform_int_distribution<std::size_t> pick(0, features_.size() - 1);
        const std::uint32_t feature = features_[pick(rng_)];
        const double lo = lo_[feature];
        const double hi = hi_[feature];
        std::uniform_real_distribution<double> draw(lo, hi);
        double split = draw(rng_);
        while (split <= lo) split = draw(rng_);

        auto mid = std::partition(points.begin(), points.end(),
                                  [&](std::size_t p) { return refs_.row(p)[feature] < split; });
        const auto left_count = static_cast<std::size_t>(mid - points.begin());

        tree_[id].feature = feature;
        tree_[id].split = split;
        const std::int32_t left = grow(points.first(left_count), depth + 1);
        const std::int32_t right = grow(points.subspan(left_count), depth + 1);
        tree_[id].left = left;
        tree_[id].right = right;
        return id;
    }

    EmbeddingView refs_;
    std::size_t height_limit_;
    std::mt19937_64& rng_;
    std::vector<float> lo_;
    std::vector<float> hi_;
    std::vector<std::uint32_t> features_;
    IsolationTree tree_;
};

}  // namespace

void DetectorConfig::validate() const {
    if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be > 0");
    if (!(lid_cap > 0.0)) throw Error(ErrorCode::InvalidConfig, "lid_cap must be > 0");
    if (iforest_trees < 1) throw Error(ErrorCode::InvalidConfig, "iforest_trees must be >= 1");
    if (iforest_subsample < 2) throw Error(ErrorCode::InvalidConfig, "iforest_subsample must be >= 2");
    if ((kind == DetectorKind::LID || kind == DetectorKind::DAO) && k < 2) {
        throw Error(ErrorCode::KTooSmall, "LID estimation needs k >= 2");
    }
}

double score_kdist(const NeighborSet& ns) { return kdist(ns); }

double estimate_lid_mle(std::span<const double> radii, double epsilon, double lid_cap,
                        LidNormalization norm) {
    const std::size_t k = radii.size();
    if (k < 2) {
        throw Error(ErrorCode::KTooSmall, "LID estimation needs k >= 2, got " + std::to_string(k));
    }
    const double r_k = std::max(radii[k - 1], epsilon);
    const std::size_t terms = norm == LidNormalization::K ? k : k - 1;
    double log_sum = 0.0;
    for (std::size_t i = 0; i < terms; ++i) {
        log_sum += std::log(std::max(radii[i], epsilon) / r_k);
    }
    if (log_sum == 0.0) return lid_cap;
    const double lid = -static_cast<double>(terms) / log_sum;
    if (!(lid > 0.0)) return lid_cap;  // only reachable through radii out of order
    return std::min(lid, lid_cap);
}

double estimate_lid_mle(const NeighborSet& ns, double epsilon, double lid_cap, LidNormalization norm) {
    return estimate_lid_mle(ns.distances, epsilon, lid_cap, norm);
}

double score_lid(const NeighborSet& ns, double epsilon, double lid_cap, LidNormalization norm) {
    return estimate_lid_mle(ns, epsilon, lid_cap, norm);
}

double score_slof(const NeighborSet& query, std::span<const double> neighbor_kdists, double epsilon) {
    check_neighbor_arrays(query, neighbor_kdists.size(), "neighbor_kdists");
    const double own = std::max(kdist(query), epsilon);
    double sum = 0.0;
    for (double other : neighbor_kdists) {
        sum += clamp_ratio(own / std::max(other, epsilon), epsilon);
    }
    return sum / static_cast<double>(query.k());
}

double score_dao(const NeighborSet& query, std::span<const double> neighbor_kdists,
                 std::span<const double> neighbor_lids, double epsilon) {
    check_neighbor_arrays(query, neighbor_kdists.size(), "neighbor_kdists");
    check_neighbor_arrays(query, neighbor_lids.size(), "neighbor_lids");
    const double own = std::max(kdist(query), epsilon);
    double sum = 0.0;
    for (std::size_t i = 0; i < neighbor_kdists.size(); ++i) {
        const double ratio = clamp_ratio(own / std::max(neighbor_kdists[i], epsilon), epsilon);
        const double term = std::pow(ratio, neighbor_lids[i]);
        sum += term <= kDaoTermCeiling ? term : kDaoTermCeiling;
    }
    return sum / static_cast<double>(query.k());
}

double average_path_length(std::size_t n) noexcept {
    if (n <= 1) return 0.0;
    if (n == 2) return 1.0;
    const double m = static_cast<double>(n - 1);
    return 2.0 * (std::log(m) + kEulerGamma) - 2.0 * m / static_cast<double>(n);
}

double IsolationForest::path_length(std::size_t tree, std::span<const float> x) const {
    const IsolationTree& nodes = trees[tree];
    std::size_t id = 0;
    double depth = 0.0;
    while (!nodes[id].is_leaf()) {
        const auto& node = nodes[id];
        id = static_cast<std::size_t>(x[node.feature] < node.split ? node.left : node.right);
        depth += 1.0;
    }
    return depth + average_path_length(nodes[id].size);
}

IsolationForest iforest_fit(EmbeddingView refs, const DetectorConfig& cfg) {
    if (refs.rows < 2) {
        throw Error(ErrorCode::TooFewPoints, "isolation forest needs >= 2 reference points");
    }
    if (cfg.iforest_trees < 1 || cfg.iforest_subsample < 2) {
        throw Error(ErrorCode::InvalidConfig, "iforest_trees >= 1 and iforest_subsample >= 2 required");
    }
    IsolationForest forest;
    forest.dim = refs.dim;
    forest.psi = std::min(cfg.iforest_subsample, refs.rows);
    forest.c_psi = average_path_length(forest.psi);
    forest.height_limit = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(forest.psi))));
    forest.trees.reserve(cfg.iforest_trees);

    std::vector<std::size_t> order(refs.rows);
    for (std::size_t t = 0; t < cfg.iforest_trees; ++t) {
        std::mt19937_64 rng(derive_seed(cfg.seed, t));
        std::iota(order.begin(), order.end(), std::size_t{0});
        for (std::size_t i = 0; i < forest.psi; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, refs.rows - 1);
            std::swap(order[i], order[pick(rng)]);
        }
        TreeBuilder builder(refs, forest.height_limit, rng);
        forest.trees.push_back(builder.build(std::span<std::size_t>(order).first(forest.psi)));
    }
    return forest;
}

double iforest_score(const IsolationForest& forest, std::span<const float> query) {
    if (query.size() != forest.dim) {
        throw Error(ErrorCode::DimMismatch, "query dim " + std::to_string(query.size()) +
                                                " != forest dim " + std::to_string(forest.dim));
    }
    double total = 0.0;
    for (std::size_t t = 0; t < forest.trees.size(); ++t) total += forest.path_length(t, query);
    const double mean = total / static_cast<double>(forest.trees.size());
    return std::exp2(-mean / forest.c_psi);
}

}  // namespace poison_scan
