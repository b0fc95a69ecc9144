#include "poison_scan/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>

#include "poison_scan/error.hpp"
#include "poison_scan/metrics.hpp"
#include "poison_scan/rng.hpp"

namespace poison_scan {

namespace {

// Stream layout under cfg.seed: 0 = shared geometry, 1 = backdoor membership,
// 2 + i = everything drawn for sample i.
constexpr std::uint64_t kGeometryStream = 0;
constexpr std::uint64_t kMembershipStream = 1;
constexpr std::uint64_t kFirstSampleStream = 2;

using Vec = std::vector<double>;

void fill_normal(Vec& v, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : v) x = normal(rng);
}

void normalize(Vec& v) {
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Vec random_unit(std::size_t d, std::mt19937_64& rng) {
    Vec v(d);
    do {
        fill_normal(v, rng);
    } while (dot(v, v) == 0.0);
    normalize(v);
    return v;
}

// Unit vector orthogonal to every vector in `against` (Gram-Schmidt, redrawn if degenerate).
Vec random_orthogonal(std::size_t d, const std::vector<Vec>& against, std::mt19937_64& rng) {
    for (;;) {
        Vec v(d);
        fill_normal(v, rng);
        for (const Vec& b : against) {
            const double p = dot(v, b);
            for (std::size_t i = 0; i < d; ++i) v[i] -= p * b[i];
        }
        if (dot(v, v) > 1e-12) {
            normalize(v);
            return v;
        }
    }
}

struct Geometry {
    std::vector<Vec> centroids;
    Vec backdoor_centroid;
    std::vector<Vec> backdoor_basis;  // empty = isotropic
};

Geometry build_geometry(const SyntheticConfig& cfg) {
    std::mt19937_64 rng(derive_seed(cfg.seed, kGeometryStream));
    Geometry g;
    g.centroids.reserve(cfg.n_clusters);
    for (std::size_t c = 0; c < cfg.n_clusters; ++c) g.centroids.push_back(random_unit(cfg.d, rng));

    const Vec& anchor = g.centroids.front();
    const double chord = cfg.backdoor_offset * cfg.sigma_clean;
    const double angle = 2.0 * std::asin(chord / 2.0);
    g.backdoor_centroid.assign(cfg.d, 0.0);
    if (cfg.d > 1) {
        const Vec dir = random_orthogonal(cfg.d, {anchor}, rng);
        for (std::size_t i = 0; i < cfg.d; ++i) {
            g.backdoor_centroid[i] = std::cos(angle) * anchor[i] + std::sin(angle) * dir[i];
        }
    } else {
        g.backdoor_centroid = anchor;
    }
    if (cfg.backdoor_rank != 0 && cfg.backdoor_rank < cfg.d) {
        for (std::size_t r = 0; r < cfg.backdoor_rank; ++r) {
            g.backdoor_basis.push_back(random_orthogonal(cfg.d, g.backdoor_basis, rng));
        }
    }
    return g;
}

void store(std::vector<float>& out, std::size_t row, Vec& v) {
    normalize(v);
    std::transform(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(row * v.size()),
                   [](double x) { return static_cast<float>(x); });
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace

std::size_t SyntheticConfig::backdoor_count() const {
    return static_cast<std::size_t>(std::llround(poison_rate * static_cast<double>(n)));
}

void SyntheticConfig::validate() const {
    auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidConfig, why); };
    if (n < 1) fail("n must be >= 1");
    if (d < 1) fail("d must be >= 1");
    if (n_clusters < 1) fail("n_clusters must be >= 1");
    if (!(poison_rate >= 0.0 && poison_rate <= 0.2)) fail("poison_rate must lie in [0, 0.2]");
    if (poison_rate > 0.0 && backdoor_count() < 1) fail("poison_rate * n rounds to zero backdoor samples");
    if (!(sigma_clean > 0.0)) fail("sigma_clean must be > 0");
    if (!(sigma_backdoor >= 0.0 && sigma_backdoor < sigma_clean)) {
        fail("sigma_backdoor must lie in [0, sigma_clean)");
    }
    if (!(backdoor_offset >= 0.0 && backdoor_offset * sigma_clean <= 2.0)) {
        fail("backdoor_offset * sigma_clean must lie in [0, 2]");
    }
}

DatasetHandle generate(const SyntheticConfig& cfg) {
    cfg.validate();
    return generate_with_backdoors(cfg, cfg.backdoor_count());
}

DatasetHandle generate_with_backdoors(const SyntheticConfig& cfg_in, std::size_t backdoors) {
    SyntheticConfig cfg = cfg_in;
    cfg.poison_rate = 0.0;  // the explicit count replaces the rate bound
    cfg.validate();
    if (backdoors >= cfg.n) {
        throw Error(ErrorCode::InvalidConfig, "backdoor count must be < n");
    }
    const Geometry geo = build_geometry(cfg);
    const std::size_t n = cfg.n;
    const std::size_t d = cfg.d;

    std::vector<Label> labels(n, Label::Clean);
    {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(derive_seed(cfg.seed, kMembershipStream));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i = 0; i < backdoors; ++i) labels[order[i]] = Label::Backdoor;
    }

    std::vector<float> images(n * d);
    std::vector<float> texts(cfg.with_text ? n * d : 0);
    const double clean_scale = cfg.sigma_clean / std::sqrt(static_cast<double>(d));
    const std::size_t rank = geo.backdoor_basis.empty() ? d : geo.backdoor_basis.size();
    const double backdoor_scale = cfg.sigma_backdoor / std::sqrt(static_cast<double>(rank));
    const double text_scale = 0.5 * clean_scale;

    Vec point(d);
    Vec noise(d);
    Vec coeffs(geo.backdoor_basis.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::mt19937_64 rng(derive_seed(cfg.seed, kFirstSampleStream + i));
        if (labels[i] == Label::Backdoor) {
            point = geo.backdoor_centroid;
            if (geo.backdoor_basis.empty()) {
                fill_normal(noise, rng);
                for (std::size_t j = 0; j < d; ++j) point[j] += backdoor_scale * noise[j];
            } else {
                fill_normal(coeffs, rng);
                for (std::size_t r = 0; r < coeffs.size(); ++r) {
                    for (std::size_t j = 0; j < d; ++j) point[j] += backdoor_scale * coeffs[r] * geo.backdoor_basis[r][j];
                }
            }
        } else {
            std::uniform_int_distribution<std::size_t> pick(0, cfg.n_clusters - 1);
            point = geo.centroids[pick(rng)];
            fill_normal(noise, rng);
            for (std::size_t j = 0; j < d; ++j) point[j] += clean_scale * noise[j];
        }
        store(images, i, point);
        if (cfg.with_text) {
            for (std::size_t j = 0; j < d; ++j) point[j] = images[i * d + j];
            fill_normal(noise, rng);
            for (std::size_t j = 0; j < d; ++j) point[j] += text_scale * noise[j];
            store(texts, i, point);
        }
    }

    std::optional<EmbeddingMatrix> text_matrix;
    if (cfg.with_text) text_matrix.emplace(n, d, std::move(texts), true);
    return DatasetHandle(EmbeddingMatrix(n, d, std::move(images), true), std::move(text_matrix),
                         LabelVector(std::move(labels)));
}

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) return {};
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] + frac * (values[hi] - values[lo]);
    };
    return {at(0.25), at(0.5), at(0.75)};
}

std::vector<KdistGroupSummary> kdist_distribution_experiment(const SyntheticConfig& base,
                                                             std::span<const std::size_t> backdoor_counts,
                                                             std::size_t batch_size, std::size_t k) {
    for (std::size_t c : backdoor_counts) {
        if (c > batch_size / 2) {
            throw Error(ErrorCode::InvalidConfig, "backdoor count " + std::to_string(c) +
                                                      " exceeds half the batch size");
        }
    }
    std::vector<KdistGroupSummary> out;
    const DetectorKind kinds[1] = {DetectorKind::KDist};
    DetectorConfig det;
    det.kind = DetectorKind::KDist;
    det.k = k;
    for (std::size_t c : backdoor_counts) {
        SyntheticConfig cfg = base;
        cfg.n = batch_size;
        const DatasetHandle data = generate_with_backdoors(cfg, c);
        std::vector<std::size_t> all(batch_size);
        std::iota(all.begin(), all.end(), std::size_t{0});
        const ReferenceSet refs = build_reference_set(
            data.images.view(), data.texts ? std::optional<EmbeddingView>(data.texts->view()) : std::nullopt, all);
        const auto scores = score_reference_set(refs.view(), all, det, kinds, 0);

        std::vector<double> clean;
        std::vector<double> backdoor;
        for (std::size_t i = 0; i < batch_size; ++i) {
            (data.labels->is_backdoor(i) ? backdoor : clean).push_back(scores[0][i]);
        }
        out.push_back({c, quartiles(std::move(clean)), quartiles(std::move(backdoor))});
    }
    return out;
}

std::string kdist_summary_csv(std::span<const KdistGroupSummary> rows) {
    std::string text = "backdoor_count,group,q1,median,q3\n";
    for (const auto& r : rows) {
        for (auto [name, q] : {std::pair{"clean", r.clean}, std::pair{"backdoor", r.backdoor}}) {
            text += std::to_string(r.backdoor_count) + "," + name + "," + format_double(q.q1) + "," +
                    format_double(q.median) + "," + format_double(q.q3) + "\n";
        }
    }
    return text;
}

std::vector<SweepCell> poison_rate_sensitivity_sweep(const SyntheticConfig& base, std::span<const double> rates,
                                                     std::span<const std::size_t> k_values,
                                                     const SensitivitySweepOptions& options) {
    for (double r : rates) {
        if (!(r >= 0.0001 && r <= 0.10)) {
            throw Error(ErrorCode::InvalidConfig, "sweep rates must lie in [0.0001, 0.10]");
        }
    }
    std::vector<SweepCell> cells;
    for (std::size_t ri = 0; ri < rates.size(); ++ri) {
        SyntheticConfig cfg = base;
        cfg.poison_rate = rates[ri];
        cfg.seed = derive_seed(base.seed, ri);
        const DatasetHandle data = generate(cfg);
        for (std::size_t k : k_values) {
            DetectorConfig det;
            det.k = k;
            det.seed = cfg.seed;
            const BatchPlan plan = plan_batches(data.count(), options.batch_size, cfg.seed, BatchMode::Partition, k);
            const auto scores = score_dataset_multi(data, det, options.detectors, plan, options.threads);
            for (std::size_t c = 0; c < options.detectors.size(); ++c) {
                cells.push_back({options.detectors[c], rates[ri], k, auc(scores[c].scores, *data.labels)});
            }
        }
    }
    return cells;
}

std::string sweep_cells_csv(std::span<const SweepCell> cells) {
    std::string text = "detector,rate,k,auc\n";
    for (const auto& c : cells) {
        text += std::string(to_string(c.detector)) + "," + format_double(c.rate) + "," + std::to_string(c.k) +
                "," + format_double(c.auc) + "\n";
    }
    return text;
}

}  // namespace poison_scan
