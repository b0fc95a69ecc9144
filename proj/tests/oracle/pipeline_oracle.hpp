#pragma once

// Bridges library dataset types to the naive oracle: every batch of a
// partition plan is rebuilt as plain double rows and scored from scratch.

#include "oracle/naive.hpp"
#include "poison_scan/pipeline.hpp"
#include "poison_scan/rng.hpp"

namespace oracle {

inline Detector to_oracle(poison_scan::DetectorKind k) {
    using poison_scan::DetectorKind;
    switch (k) {
    case DetectorKind::KDist: return Detector::KDist;
    case DetectorKind::SLOF: return Detector::SLOF;
    case DetectorKind::LID: return Detector::LID;
    case DetectorKind::DAO: return Detector::DAO;
    case DetectorKind::IForest: return Detector::IForest;
    }
    return Detector::KDist;
}

inline std::vector<double> score_partition(const poison_scan::DatasetHandle& data,
                                           const poison_scan::DetectorConfig& det,
                                           const poison_scan::BatchPlan& plan) {
    const std::size_t d = data.images.dim();
    const auto img = rows_of({data.images.data().begin(), data.images.data().end()}, d);
    std::optional<Points> txt;
    if (data.texts) txt = rows_of({data.texts->data().begin(), data.texts->data().end()}, d);
    const Params p{det.k, det.epsilon, det.lid_cap,
                   det.lid_normalization == poison_scan::LidNormalization::KMinusOne};
    std::vector<double> out(data.count());
    for (std::size_t b = 0; b < plan.batches.size(); ++b) {
        const auto& batch = plan.batches[b];
        Points refs;
        for (auto i : batch) refs.push_back(img[i]);
        if (txt) {
            for (auto i : batch) refs.push_back((*txt)[i]);
        }
        const std::uint64_t forest_seed = poison_scan::derive_seed(det.seed, b);
        const auto s = score_batch(refs, batch.size(), to_oracle(det.kind), p,
                                   {det.iforest_trees, det.iforest_subsample},
                                   [&](std::size_t t) { return poison_scan::derive_seed(forest_seed, t); });
        for (std::size_t i = 0; i < batch.size(); ++i) out[batch[i]] = s[i];
    }
    return out;
}

}  // namespace oracle
