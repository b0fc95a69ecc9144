#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <random>

#include "cli.hpp"
#include "poison_scan/embedding_store.hpp"
#include "poison_scan/parallel.hpp"
#include "support.hpp"

using namespace poison_scan;
using test_support::TempDir;
using test_support::read_bytes;
using json = nlohmann::json;

namespace {

int run(std::initializer_list<std::string> args) { return cli::run(std::vector<std::string>(args)); }

json read_json(const std::filesystem::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

void synth(const TempDir& dir, const std::string& sub, const std::string& extra_seed = "7") {
    REQUIRE(run({"synth", "--n", "3000", "--d", "16", "--clusters", "5", "--poison-rate", "0.002", "--seed",
                 extra_seed, "--out-dir", (dir / sub).string()}) == cli::kExitOk);
}

}  // namespace

TEST_CASE("synth, score, eval and filter chain") {
    TempDir dir("cli_chain");
    synth(dir, "data");
    const auto data = dir / "data";
    CHECK(load_embeddings(data / "images.emb").count() == 3000);
    CHECK(load_labels(data / "labels.lbl").backdoor_count() == 6);
    CHECK(read_json(data / "run.log.json")["config"]["seed"] == 7);

    REQUIRE(run({"score", "--images", (data / "images.emb").string(), "--texts", (data / "texts.emb").string(),
                 "--out", (dir / "s.scr").string(), "--csv", (dir / "s.csv").string()}) == cli::kExitOk);
    const auto scores = read_scores(dir / "s.scr");
    CHECK(scores.count() == 3000);
    CHECK(scores.detector == DetectorKind::DAO);
    const json log = read_json(dir / "s.scr.log.json");
    CHECK(log["config"]["detector"] == "dao");
    CHECK(log["config"]["k"] == 16);
    CHECK(log["config"]["batch_size"] == 2048);
    CHECK(log["config"]["mode"] == "partition");
    CHECK(log["config"]["normalize"] == true);
    CHECK(log["wall_time_seconds"].get<double>() >= 0.0);
    CHECK(read_bytes(dir / "s.csv").size() > 3000);

    REQUIRE(run({"eval", "--scores", (dir / "s.scr").string(), "--labels", (data / "labels.lbl").string(), "--out",
                 (dir / "eval.json").string(), "--run-log", (dir / "s.scr.log.json").string(), "--sweep",
                 (dir / "sweep.csv").string()}) == cli::kExitOk);
    const json report = read_json(dir / "eval.json");
    CHECK(report["auc"].get<double>() > 0.99);
    CHECK(report["n_backdoor"] == 6);
    CHECK(report["n_clean"] == 2994);
    CHECK(report["wall_time_seconds"] == log["wall_time_seconds"]);

    REQUIRE(run({"filter", "--scores", (dir / "s.scr").string(), "--images", (data / "images.emb").string(),
                 "--texts", (data / "texts.emb").string(), "--labels", (data / "labels.lbl").string(),
                 "--top-fraction", "0.10", "--out-dir", (dir / "purified").string()}) == cli::kExitOk);
    const json summary = read_json(dir / "purified" / "filter.json");
    CHECK(summary["removed"] == 300);
    CHECK(summary["backdoor_removed"] == 6);
    CHECK(load_embeddings(dir / "purified" / "images.emb").count() == 2700);
    CHECK(load_embeddings(dir / "purified" / "texts.emb").count() == 2700);
    CHECK(read_index_list(dir / "purified" / "removed.txt").size() == 300);
}

TEST_CASE("threshold above every score keeps the dataset intact") {
    TempDir dir("cli_thr");
    synth(dir, "data");
    const auto data = dir / "data";
    REQUIRE(run({"score", "--images", (data / "images.emb").string(), "--detector", "kdist", "--out",
                 (dir / "s.scr").string()}) == cli::kExitOk);
    REQUIRE(run({"filter", "--scores", (dir / "s.scr").string(), "--images", (data / "images.emb").string(),
                 "--labels", (data / "labels.lbl").string(), "--threshold", "1e9", "--out-dir",
                 (dir / "p").string()}) == cli::kExitOk);
    CHECK(read_json(dir / "p" / "filter.json")["removed"] == 0);
    CHECK(read_bytes(dir / "p" / "images.emb") == read_bytes(data / "images.emb"));
    CHECK(read_bytes(dir / "p" / "labels.lbl") == read_bytes(data / "labels.lbl"));
}

TEST_CASE("usage errors exit with code 2") {
    TempDir dir("cli_usage");
    synth(dir, "data");
    const auto data = dir / "data";
    CHECK(run({}) == cli::kExitUsage);
    CHECK(run({"frobnicate"}) == cli::kExitUsage);
    CHECK(run({"score", "--images", (data / "images.emb").string(), "--require-text", "--out",
               (dir / "s.scr").string()}) == cli::kExitUsage);
    CHECK_FALSE(std::filesystem::exists(dir / "s.scr"));
    CHECK(run({"score", "--images", (data / "images.emb").string(), "--detector", "lof", "--out",
               (dir / "s.scr").string()}) == cli::kExitUsage);
    CHECK(run({"score", "--images", (dir / "missing.emb").string(), "--out", (dir / "s.scr").string()}) ==
          cli::kExitUsage);
    CHECK(run({"bench", "--d", "0", "--out", (dir / "b.json").string()}) == cli::kExitUsage);
    CHECK(run({"bench", "--n", "0", "--out", (dir / "b.json").string()}) == cli::kExitUsage);

    REQUIRE(run({"score", "--images", (data / "images.emb").string(), "--detector", "kdist", "--out",
                 (dir / "s.scr").string()}) == cli::kExitOk);
    CHECK(run({"filter", "--scores", (dir / "s.scr").string(), "--images", (data / "images.emb").string(),
               "--top-fraction", "1.0", "--out-dir", (dir / "p").string()}) == cli::kExitUsage);
    CHECK(run({"filter", "--scores", (dir / "s.scr").string(), "--images", (data / "images.emb").string(),
               "--top-fraction", "0.1", "--threshold", "2", "--out-dir", (dir / "p").string()}) == cli::kExitUsage);
    CHECK(run({"--help"}) == cli::kExitOk);
}

TEST_CASE("data errors exit with code 1") {
    TempDir dir("cli_err");
    synth(dir, "a");
    write_labels(dir / "short.lbl", LabelVector::from_bytes(std::vector<std::uint8_t>{0, 1}));
    REQUIRE(run({"score", "--images", (dir / "a" / "images.emb").string(), "--detector", "kdist", "--out",
                 (dir / "s.scr").string()}) == cli::kExitOk);
    CHECK(run({"eval", "--scores", (dir / "s.scr").string(), "--labels", (dir / "short.lbl").string(), "--out",
               (dir / "e.json").string()}) == cli::kExitError);

    std::ofstream(dir / "bad.emb") << "not an embedding file";
    CHECK(run({"score", "--images", (dir / "bad.emb").string(), "--out", (dir / "x.scr").string()}) ==
          cli::kExitError);

    SUBCASE("dataset smaller than k+1") {
        write_embeddings(dir / "tiny.emb", EmbeddingMatrix(3, 2, {1, 0, 0, 1, 1, 1}));
        CHECK(run({"score", "--images", (dir / "tiny.emb").string(), "--out", (dir / "x.scr").string()}) ==
              cli::kExitError);
    }
}

TEST_CASE("eval on perfect and shuffled labels") {
    TempDir dir("cli_eval");
    const std::size_t n = 10000;
    std::vector<double> s(n);
    std::vector<std::uint8_t> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<double>(i);
        labels[i] = i >= n - 1000;
    }
    write_scores(dir / "s.scr", ScoreVector{s, DetectorKind::KDist});
    write_labels(dir / "l.lbl", LabelVector::from_bytes(labels));
    REQUIRE(run({"eval", "--scores", (dir / "s.scr").string(), "--labels", (dir / "l.lbl").string(), "--out",
                 (dir / "e.json").string()}) == cli::kExitOk);
    CHECK(read_json(dir / "e.json")["auc"] == 1.0);
    CHECK(read_json(dir / "e.json")["fpr_at_95_tpr"] == 0.0);
    CHECK(read_json(dir / "e.json")["wall_time_seconds"] == 0.0);

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto shuffled = labels;
        std::mt19937_64 rng(seed);
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        write_labels(dir / "l.lbl", LabelVector::from_bytes(shuffled));
        REQUIRE(run({"eval", "--scores", (dir / "s.scr").string(), "--labels", (dir / "l.lbl").string(), "--out",
                     (dir / "e.json").string()}) == cli::kExitOk);
        CHECK(std::abs(read_json(dir / "e.json")["auc"].get<double>() - 0.5) <= 0.05);
    }
}

TEST_CASE("subcommand outputs are byte identical across runs and thread counts") {
    TempDir dir("cli_det");
    synth(dir, "a", "11");
    synth(dir, "b", "11");
    for (const char* f : {"images.emb", "texts.emb", "labels.lbl"}) {
        CHECK(read_bytes(dir / "a" / f) == read_bytes(dir / "b" / f));
    }
    const auto img = (dir / "a" / "images.emb").string();
    const auto txt = (dir / "a" / "texts.emb").string();
    for (const char* det : {"kdist", "slof", "lid", "dao", "iforest"}) {
        for (const char* mode : {"partition", "resample"}) {
            std::vector<std::vector<char>> outs;
            for (const char* threads : {"1", "1", "4"}) {
                REQUIRE(run({"score", "--images", img, "--texts", txt, "--detector", det, "--mode", mode, "--batch-size",
                             "700", "--trees", "20", "--seed", "5", "--threads", threads, "--out",
                             (dir / "s.scr").string(), "--csv", (dir / "s.csv").string()}) == cli::kExitOk);
                auto bytes = read_bytes(dir / "s.scr");
                const auto csv = read_bytes(dir / "s.csv");
                bytes.insert(bytes.end(), csv.begin(), csv.end());
                outs.push_back(bytes);
            }
            CHECK(outs[0] == outs[1]);
            CHECK(outs[0] == outs[2]);
        }
    }
}

TEST_CASE("bench reports throughput and a stable score digest") {
    TempDir dir("cli_bench");
    REQUIRE(run({"bench", "--n", "3000", "--d", "16", "--threads", "1", "--out", (dir / "b1.json").string(),
                 "--scores-out", (dir / "b1.scr").string()}) == cli::kExitOk);
    REQUIRE(run({"bench", "--n", "3000", "--d", "16", "--threads", "3", "--out", (dir / "b3.json").string(),
                 "--scores-out", (dir / "b3.scr").string()}) == cli::kExitOk);
    const json a = read_json(dir / "b1.json");
    const json b = read_json(dir / "b3.json");
    CHECK(a["samples_per_second"].get<double>() > 0.0);
    CHECK(a["scores_fnv1a64"] == b["scores_fnv1a64"]);
    CHECK(a["config"]["detector"] == "dao");
    CHECK(read_bytes(dir / "b1.scr") == read_bytes(dir / "b3.scr"));
}

TEST_CASE("experiment subcommands emit deterministic CSV") {
    TempDir dir("cli_exp");
    for (const char* name : {"k1.csv", "k2.csv"}) {
        REQUIRE(run({"kdist-exp", "--d", "16", "--batch-size", "256", "--counts", "1,5,10", "--out",
                     (dir / name).string()}) == cli::kExitOk);
    }
    CHECK(read_bytes(dir / "k1.csv") == read_bytes(dir / "k2.csv"));
    for (auto [name, threads] : {std::pair{"s1.csv", "1"}, std::pair{"s2.csv", "2"}}) {
        REQUIRE(run({"sweep", "--n", "2000", "--d", "8", "--no-text", "--rates", "0.001,0.05", "--ks", "8,32",
                     "--batch-size", "512", "--threads", threads, "--out", (dir / name).string()}) == cli::kExitOk);
    }
    CHECK(read_bytes(dir / "s1.csv") == read_bytes(dir / "s2.csv"));
    std::ifstream in(dir / "s1.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "detector,rate,k,auc");
}

TEST_CASE("thread count falls back to POISON_SCAN_THREADS") {
    ::setenv("POISON_SCAN_THREADS", "3", 1);
    CHECK(resolve_threads() == 3);
    CHECK(resolve_threads(5) == 5);
    ::setenv("POISON_SCAN_THREADS", "zero", 1);
    CHECK(resolve_threads() >= 1);
    ::unsetenv("POISON_SCAN_THREADS");
    CHECK(resolve_threads() >= 1);
}
