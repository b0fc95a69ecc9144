#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "oracle/pipeline_oracle.hpp"
#include "poison_scan/error.hpp"
#include "poison_scan/pipeline.hpp"
#include "poison_scan/rng.hpp"
#include "support.hpp"

using namespace poison_scan;
using test_support::column;

namespace {

constexpr DetectorKind kAllKinds[] = {DetectorKind::KDist, DetectorKind::SLOF, DetectorKind::LID,
                                      DetectorKind::DAO, DetectorKind::IForest};

}  // namespace

TEST_CASE("partition plan chunking") {
    SUBCASE("trailing chunk merges into the previous one") {
        const auto plan = plan_batches(10, 4, 3, BatchMode::Partition, 2);
        REQUIRE(plan.batches.size() == 2);
        CHECK(plan.batches[0].size() == 4);
        CHECK(plan.batches[1].size() == 6);
    }
    SUBCASE("trailing chunk kept when large enough") {
        const auto plan = plan_batches(10, 4, 3, BatchMode::Partition, 1);
        REQUIRE(plan.batches.size() == 3);
        CHECK(plan.batches[2].size() == 2);
    }
    SUBCASE("n equal to batch size") {
        const auto plan = plan_batches(64, 64, 1, BatchMode::Partition, 16);
        REQUIRE(plan.batches.size() == 1);
        auto b = plan.batches[0];
        std::sort(b.begin(), b.end());
        std::vector<std::size_t> all(64);
        std::iota(all.begin(), all.end(), std::size_t{0});
        CHECK(b == all);
    }
    SUBCASE("too small") {
        CHECK_THROWS_AS(plan_batches(16, 2048, 0, BatchMode::Partition, 16), Error);
        CHECK_THROWS_AS(plan_batches(100, 16, 0, BatchMode::Partition, 16), Error);
        CHECK_NOTHROW(plan_batches(17, 2048, 0, BatchMode::Partition, 16));
    }
}

TEST_CASE("partition covers every sample exactly once with batches of at least k+1") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 1 + rng() % 20;
        const std::size_t n = k + 1 + rng() % 3000;
        const std::size_t bs = k + 1 + rng() % 500;
        const auto plan = plan_batches(n, bs, rng(), BatchMode::Partition, k);
        std::vector<int> seen(n, 0);
        for (const auto& b : plan.batches) {
            CHECK(b.size() >= k + 1);
            for (auto i : b) ++seen[i];
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
    CHECK(plan_batches(500, 64, 9, BatchMode::Partition, 16).batches ==
          plan_batches(500, 64, 9, BatchMode::Partition, 16).batches);
}

TEST_CASE("resample batches") {
    const auto plan = plan_batches(1000, 50, 4, BatchMode::Resample, 16);
    CHECK(plan.batches.empty());
    for (std::size_t i : {0u, 1u, 500u, 999u}) {
        const auto b = plan.resample_batch(i);
        REQUIRE(b.size() == 50);
        CHECK(b[0] == i);
        CHECK(std::set<std::size_t>(b.begin(), b.end()).size() == 50);
        CHECK(std::is_sorted(b.begin() + 1, b.end()));
        CHECK(*std::max_element(b.begin(), b.end()) < 1000);
        CHECK(plan.resample_batch(i) == b);
    }
    CHECK(plan.resample_batch(3) != plan.resample_batch(4));
    const auto whole = plan_batches(20, 64, 4, BatchMode::Resample, 3).resample_batch(7);
    CHECK(whole.size() == 20);
    CHECK_THROWS_AS(plan.resample_batch(1000), Error);
}

TEST_CASE("reference set layout") {
    const EmbeddingMatrix img(4, 2, {0, 0, 1, 1, 2, 2, 3, 3});
    const EmbeddingMatrix txt(4, 2, {10, 10, 11, 11, 12, 12, 13, 13});
    const std::vector<std::size_t> batch{2, 0, 3};
    const auto with = build_reference_set(img.view(), txt.view(), batch);
    CHECK(with.rows == 6);
    CHECK(with.image_rows == 3);
    CHECK(with.data == std::vector<float>{2, 2, 0, 0, 3, 3, 12, 12, 10, 10, 13, 13});
    CHECK(with.query_slot(1) == 1);
    const auto without = build_reference_set(img.view(), std::nullopt, batch);
    CHECK(without.rows == 3);

    const EmbeddingMatrix narrow(4, 1, {0, 1, 2, 3});
    CHECK_THROWS_AS(build_reference_set(img.view(), narrow.view(), batch), Error);
    CHECK_THROWS_AS(DatasetHandle(img, narrow), Error);
    CHECK_THROWS_AS(DatasetHandle(img, txt.gather(std::vector<std::size_t>{0, 1})), Error);
    CHECK_THROWS_AS(DatasetHandle(img, std::nullopt, LabelVector::from_bytes(std::vector<std::uint8_t>{0, 1})),
                    Error);
}

TEST_CASE("self exclusion masks only the query's own slot when texts are present") {
    // Text copies coincide with their images, so every image's nearest neighbor is its own text row.
    const EmbeddingMatrix img(3, 1, {0, 1, 5});
    const DatasetHandle data(img, img);
    DetectorConfig det;
    det.kind = DetectorKind::KDist;
    det.k = 1;
    const auto s = score_dataset(data, det, plan_batches(3, 3, 0, BatchMode::Partition, 1));
    CHECK(s.scores == std::vector<double>{0, 0, 0});
    det.k = 2;
    const auto s2 = score_dataset(data, det, plan_batches(3, 3, 0, BatchMode::Partition, 2));
    CHECK(s2.scores == std::vector<double>{1, 1, 4});
}

TEST_CASE("1-D end to end examples") {
    const DatasetHandle data(column({0, 1, 2, 10}));
    const auto plan = plan_batches(4, 2048, 0, BatchMode::Partition, 1);
    DetectorConfig det;
    det.k = 1;
    det.kind = DetectorKind::SLOF;
    CHECK(score_dataset(data, det, plan).scores == std::vector<double>{1, 1, 1, 8});
    det.kind = DetectorKind::KDist;
    CHECK(score_dataset(data, det, plan).scores == std::vector<double>{1, 1, 1, 8});
}

TEST_CASE("identical embeddings give identical scores for every detector") {
    const DatasetHandle data(EmbeddingMatrix(40, 3, std::vector<float>(120, 0.5f)));
    const auto plan = plan_batches(40, 2048, 0, BatchMode::Partition, 4);
    DetectorConfig det;
    det.k = 4;
    const auto all = score_dataset_multi(data, det, kAllKinds, plan);
    for (const auto& sv : all) {
        for (double v : sv.scores) {
            CHECK(std::isfinite(v));
            CHECK(v == sv.scores[0]);
        }
    }
}

TEST_CASE("multi-detector scoring equals one pass per detector") {
    const DatasetHandle data(test_support::gaussian_matrix(300, 6, 2), test_support::gaussian_matrix(300, 6, 3));
    const auto plan = plan_batches(300, 100, 5, BatchMode::Partition, 8);
    DetectorConfig det;
    det.k = 8;
    det.seed = 17;
    const auto all = score_dataset_multi(data, det, kAllKinds, plan);
    for (std::size_t c = 0; c < 5; ++c) {
        det.kind = kAllKinds[c];
        CHECK(score_dataset(data, det, plan) == all[c]);
    }
}

TEST_CASE("pipeline scores equal the oracle on small datasets") {
    std::mt19937_64 rng(31);
    for (int inst = 0; inst < 12; ++inst) {
        const std::size_t n = 40 + rng() % 300;
        const std::size_t d = 1 + rng() % 12;
        auto img = test_support::gaussian_matrix(n, d, rng());
        std::optional<EmbeddingMatrix> txt;
        if (inst % 2 == 0) txt = test_support::gaussian_matrix(n, d, rng());
        const DatasetHandle data(img, txt);
        DetectorConfig det;
        det.k = 2 + rng() % 10;
        det.seed = rng();
        det.iforest_trees = 20;
        const auto plan = plan_batches(n, 30 + rng() % 200, rng(), BatchMode::Partition, det.k);
        for (DetectorKind kind : kAllKinds) {
            det.kind = kind;
            const auto got = score_dataset(data, det, plan);
            const auto expect = oracle::score_partition(data, det, plan);
            for (std::size_t i = 0; i < n; ++i) REQUIRE(test_support::close_rel(got.scores[i], expect[i], 1e-9));
        }
    }
}

TEST_CASE("scores do not depend on thread count") {
    const DatasetHandle data(test_support::gaussian_matrix(2000, 16, 4), test_support::gaussian_matrix(2000, 16, 5));
    DetectorConfig det;
    det.iforest_trees = 10;
    for (auto mode : {BatchMode::Partition, BatchMode::Resample}) {
        const auto plan = plan_batches(2000, 256, 6, mode, det.k);
        const auto one = score_dataset_multi(data, det, kAllKinds, plan, 1);
        for (std::size_t threads : {2u, 3u, 8u}) CHECK(score_dataset_multi(data, det, kAllKinds, plan, threads) == one);
    }
}

TEST_CASE("a sample's score depends only on its own batch") {
    const DatasetHandle data(test_support::gaussian_matrix(900, 8, 6), test_support::gaussian_matrix(900, 8, 7));
    DetectorConfig det;
    det.seed = 3;
    const auto plan = plan_batches(900, 200, 8, BatchMode::Partition, det.k);
    const auto full = score_dataset_multi(data, det, kAllKinds, plan, 2);
    const std::size_t b = 2;
    const auto& batch = plan.batches[b];
    const auto refs = build_reference_set(data.images.view(), data.texts->view(), batch);
    std::vector<std::size_t> slots(batch.size());
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    const auto alone = score_reference_set(refs.view(), slots, det, kAllKinds, derive_seed(det.seed, b));
    for (std::size_t c = 0; c < 5; ++c) {
        for (std::size_t i = 0; i < batch.size(); ++i) CHECK(alone[c][i] == full[c].scores[batch[i]]);
    }
}

TEST_CASE("resample mode scores each sample against its own drawn batch") {
    const DatasetHandle data(test_support::gaussian_matrix(150, 4, 12));
    DetectorConfig det;
    det.kind = DetectorKind::DAO;
    det.k = 5;
    const auto plan = plan_batches(150, 40, 13, BatchMode::Resample, det.k);
    const auto got = score_dataset(data, det, plan);
    const auto img = oracle::rows_of({data.images.data().begin(), data.images.data().end()}, 4);
    oracle::Params p;
    p.k = 5;
    for (std::size_t i = 0; i < 150; i += 7) {
        oracle::Points refs;
        for (auto j : plan.resample_batch(i)) refs.push_back(img[j]);
        const auto s = oracle::score_batch(refs, 1, oracle::Detector::DAO, p, {}, [](std::size_t) { return 0ull; });
        CHECK(test_support::close_rel(got.scores[i], s[0], 1e-9));
    }
}

TEST_CASE("rare poisoned samples are usually alone in their batch") {
    const std::size_t n = 100000, poisoned = 10;
    std::size_t alone = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto plan = plan_batches(n, 1024, seed, BatchMode::Partition, 16);
        for (const auto& batch : plan.batches) {
            const auto in_batch = std::count_if(batch.begin(), batch.end(), [](std::size_t i) { return i < poisoned; });
            if (in_batch == 1) ++alone;
        }
        total += poisoned;
    }
    const double fraction = static_cast<double>(alone) / static_cast<double>(total);
    INFO("alone fraction " << fraction);
    CHECK(fraction >= 0.85);
}

TEST_CASE("plan and dataset count must agree") {
    const DatasetHandle data(test_support::gaussian_matrix(50, 2, 1));
    CHECK_THROWS_AS(score_dataset(data, DetectorConfig{}, plan_batches(60, 64, 0, BatchMode::Partition, 16)), Error);
}
