#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "poison_scan/embedding_store.hpp"
#include "poison_scan/pipeline.hpp"

namespace poison_scan {

/// Gaussian mixture on the unit sphere with one tight, offset backdoor cluster.
///
/// Spreads are total (root-mean-square norm of the noise vector), so they do
/// not grow with d: clean noise has per-coordinate std sigma_clean / sqrt(d).
struct SyntheticConfig {
    std::size_t n = 10000;
    std::size_t d = 512;
    std::size_t n_clusters = 50;
    double poison_rate = 0.0001;
    double sigma_clean = 0.2;
    double sigma_backdoor = 0.02;
    /// Chord distance from the backdoor centroid to its anchor clean centroid, in units of sigma_clean.
    double backdoor_offset = 5.0;
    /// Dimension of the subspace the backdoor spread lives in (0 = all d directions).
    std::size_t backdoor_rank = 4;
    bool with_text = true;
    std::uint64_t seed = 0;

    std::size_t backdoor_count() const;
    /// Raises InvalidConfig on any violated invariant.
    void validate() const;
};

/// Image embeddings, texts when cfg.with_text, and labels (always present).
DatasetHandle generate(const SyntheticConfig& cfg);

/// As generate, with an explicit backdoor count (no rate bound; must be < n).
DatasetHandle generate_with_backdoors(const SyntheticConfig& cfg, std::size_t backdoors);

struct Quartiles {
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

/// Linear-interpolation quartiles of `values` (copied and sorted).
Quartiles quartiles(std::vector<double> values);

struct KdistGroupSummary {
    std::size_t backdoor_count = 0;
    Quartiles clean;
    Quartiles backdoor;
};

/// One batch per count with exactly that many backdoor points; kdist of every
/// image point against the batch (plus texts when cfg.with_text). The clean
/// geometry is shared across counts: each count reuses cfg.seed.
std::vector<KdistGroupSummary> kdist_distribution_experiment(const SyntheticConfig& base,
                                                             std::span<const std::size_t> backdoor_counts,
                                                             std::size_t batch_size = 1024,
                                                             std::size_t k = 16);

std::string kdist_summary_csv(std::span<const KdistGroupSummary> rows);

struct SweepCell {
    DetectorKind detector = DetectorKind::KDist;
    double rate = 0.0;
    std::size_t k = 0;
    double auc = 0.0;
};

struct SensitivitySweepOptions {
    std::vector<DetectorKind> detectors{DetectorKind::KDist, DetectorKind::SLOF, DetectorKind::LID,
                                        DetectorKind::DAO};
    std::size_t batch_size = 2048;
    std::size_t threads = 1;
};

/// Full scoring + AUC for every (rate, k, detector). The dataset for rate i is
/// generated with seed derive_seed(base.seed, i) and shared by all k values.
std::vector<SweepCell> poison_rate_sensitivity_sweep(const SyntheticConfig& base,
                                                     std::span<const double> rates,
                                                     std::span<const std::size_t> k_values,
                                                     const SensitivitySweepOptions& options = {});

/// Header "detector,rate,k,auc".
std::string sweep_cells_csv(std::span<const SweepCell> cells);

}  // namespace poison_scan
