#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "poison_scan/detectors.hpp"
#include "poison_scan/embedding_store.hpp"
#include "poison_scan/error.hpp"
#include "poison_scan/filtering.hpp"
#include "poison_scan/metrics.hpp"
#include "poison_scan/parallel.hpp"
#include "poison_scan/pipeline.hpp"
#include "poison_scan/synth.hpp"

namespace poison_scan::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::uint64_t fnv1a64(std::span<const double> values) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (double v : values) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xFF;
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ---------------------------------------------------------------- options

const std::map<std::string, DetectorKind> kDetectorNames{
    {"kdist", DetectorKind::KDist}, {"slof", DetectorKind::SLOF}, {"lid", DetectorKind::LID},
    {"dao", DetectorKind::DAO},     {"iforest", DetectorKind::IForest}};

const std::map<std::string, BatchMode> kModeNames{{"partition", BatchMode::Partition},
                                                  {"resample", BatchMode::Resample}};

const std::map<std::string, LidNormalization> kLidNormNames{{"k", LidNormalization::K},
                                                            {"k-1", LidNormalization::KMinusOne}};

struct DetectorFlags {
    DetectorConfig det;
    std::size_t batch_size = 2048;
    BatchMode mode = BatchMode::Partition;
    std::uint64_t seed = 0;
    std::size_t threads = 0;  // 0 = POISON_SCAN_THREADS or hardware
    std::string detector_name = "dao";
    std::string mode_name = "partition";
    std::string lid_norm_name = "k";

    /// Maps the validated names onto the enum fields; call after parsing.
    void resolve() {
        det.kind = kDetectorNames.at(detector_name);
        mode = kModeNames.at(mode_name);
        det.lid_normalization = kLidNormNames.at(lid_norm_name);
    }

    void add_to(CLI::App* app) {
        app->add_option("--detector", detector_name, "kdist, slof, lid, dao or iforest")
            ->check(CLI::IsMember(kDetectorNames));
        app->add_option("--k", det.k, "Locality (neighbors per query)")->check(CLI::PositiveNumber);
        app->add_option("--batch-size", batch_size, "Reference batch size")->check(CLI::PositiveNumber);
        app->add_option("--mode", mode_name, "partition or resample")->check(CLI::IsMember(kModeNames));
        app->add_option("--seed", seed, "Seed for batching and the isolation forest");
        app->add_option("--threads", threads, "Worker threads (default: POISON_SCAN_THREADS or all cores)");
        app->add_option("--epsilon", det.epsilon, "Distance floor")->check(CLI::PositiveNumber);
        app->add_option("--lid-cap", det.lid_cap, "Maximum LID estimate")->check(CLI::PositiveNumber);
        app->add_option("--lid-norm", lid_norm_name, "LID MLE denominator: k or k-1")
            ->check(CLI::IsMember(kLidNormNames));
        app->add_option("--trees", det.iforest_trees, "Isolation forest size")->check(CLI::PositiveNumber);
        app->add_option("--subsample", det.iforest_subsample, "Isolation forest subsample bound")
            ->check(CLI::Range(std::size_t{2}, std::numeric_limits<std::size_t>::max()));
    }

    json to_json(std::size_t resolved_threads) const {
        return json{{"detector", to_string(det.kind)},
                    {"k", det.k},
                    {"batch_size", batch_size},
                    {"mode", mode == BatchMode::Partition ? "partition" : "resample"},
                    {"seed", seed},
                    {"threads", resolved_threads},
                    {"epsilon", det.epsilon},
                    {"lid_cap", det.lid_cap},
                    {"lid_norm", det.lid_normalization == LidNormalization::K ? "k" : "k-1"},
                    {"trees", det.iforest_trees},
                    {"subsample", det.iforest_subsample}};
    }
};

void add_synth_flags(CLI::App* app, SyntheticConfig& cfg) {
    app->add_option("--n", cfg.n, "Total samples")->check(CLI::PositiveNumber);
    app->add_option("--d", cfg.d, "Embedding dimension")->check(CLI::PositiveNumber);
    app->add_option("--clusters", cfg.n_clusters, "Clean cluster count")->check(CLI::PositiveNumber);
    app->add_option("--poison-rate", cfg.poison_rate, "Backdoor fraction M/(M+N)");
    app->add_option("--sigma-clean", cfg.sigma_clean, "Clean cluster spread");
    app->add_option("--sigma-backdoor", cfg.sigma_backdoor, "Backdoor cluster spread");
    app->add_option("--backdoor-offset", cfg.backdoor_offset, "Backdoor separation in units of sigma-clean");
    app->add_option("--backdoor-rank", cfg.backdoor_rank, "Backdoor spread subspace dimension (0 = isotropic)");
    app->add_flag("--with-text,!--no-text", cfg.with_text, "Emit paired text embeddings (default on)");
    app->add_option("--seed", cfg.seed, "Generator seed");
}

json synth_to_json(const SyntheticConfig& cfg) {
    return json{{"n", cfg.n},
                {"d", cfg.d},
                {"clusters", cfg.n_clusters},
                {"poison_rate", cfg.poison_rate},
                {"sigma_clean", cfg.sigma_clean},
                {"sigma_backdoor", cfg.sigma_backdoor},
                {"backdoor_offset", cfg.backdoor_offset},
                {"backdoor_rank", cfg.backdoor_rank},
                {"with_text", cfg.with_text},
                {"seed", cfg.seed}};
}

fs::path default_log(const fs::path& output) {
    fs::path log = output;
    log += ".log.json";
    return log;
}

// ---------------------------------------------------------------- score

struct ScoreArgs {
    fs::path images;
    std::optional<fs::path> texts;
    bool require_text = false;
    bool normalize = true;
    DetectorFlags flags;
    fs::path out;
    std::optional<fs::path> csv;
    std::optional<fs::path> log;
};

int cmd_score(ScoreArgs& a) {
    a.flags.resolve();
    if (a.require_text && !a.texts) throw UsageError("--require-text given without --texts");
    const auto start = Clock::now();
    const std::size_t threads = resolve_threads(a.flags.threads);

    EmbeddingMatrix images = load_embeddings(a.images);
    std::optional<EmbeddingMatrix> texts;
    if (a.texts) texts = load_embeddings(*a.texts);
    if (a.normalize) {
        images = l2_normalize(images);
        if (texts) texts = l2_normalize(*texts);
    }
    const DatasetHandle data(std::move(images), std::move(texts));
    DetectorConfig det = a.flags.det;
    det.seed = a.flags.seed;
    det.validate();
    const BatchPlan plan = plan_batches(data.count(), a.flags.batch_size, a.flags.seed, a.flags.mode, det.k);
    const auto score_start = Clock::now();
    const ScoreVector scores = score_dataset(data, det, plan, threads);
    const double score_seconds = seconds_since(score_start);

    write_scores(a.out, scores);
    if (a.csv) write_scores_csv(*a.csv, scores);

    json log{{"subcommand", "score"},
             {"config",
              {{"images", a.images.string()},
               {"texts", a.texts ? json(a.texts->string()) : json(nullptr)},
               {"normalize", a.normalize},
               {"require_text", a.require_text},
               {"out", a.out.string()},
               {"csv", a.csv ? json(a.csv->string()) : json(nullptr)}}},
             {"count", scores.count()},
             {"batches", plan.mode == BatchMode::Partition ? plan.batches.size() : data.count()},
             {"wall_time_seconds", score_seconds},
             {"total_seconds", seconds_since(start)},
             {"status", "ok"}};
    log["config"].update(a.flags.to_json(threads));
    write_json(a.log.value_or(default_log(a.out)), log);
    return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    fs::path scores;
    fs::path labels;
    fs::path out;
    std::optional<fs::path> run_log;
    std::optional<fs::path> sweep;
    std::optional<fs::path> log;
};

int cmd_eval(const EvalArgs& a) {
    const auto start = Clock::now();
    const ScoreVector scores = read_scores(a.scores);
    const LabelVector labels = load_labels(a.labels, scores.count());

    double wall = 0.0;
    if (a.run_log) {
        std::ifstream in(*a.run_log);
        if (!in) throw Error(ErrorCode::IoError, "cannot open " + a.run_log->string());
        const json j = json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.contains("wall_time_seconds")) {
            throw Error(ErrorCode::IoError, a.run_log->string() + " is not a score run log");
        }
        wall = j["wall_time_seconds"].get<double>();
    }
    const EvalReport report = evaluate(scores, labels, wall);
    write_text(a.out, to_json(report));
    if (a.sweep) {
        const auto grid = default_sweep_grid();
        write_text(*a.sweep, sweep_to_csv(threshold_sweep(scores.scores, labels, grid)));
    }
    write_json(a.log.value_or(default_log(a.out)),
               json{{"subcommand", "eval"},
                    {"config",
                     {{"scores", a.scores.string()},
                      {"labels", a.labels.string()},
                      {"out", a.out.string()},
                      {"run_log", a.run_log ? json(a.run_log->string()) : json(nullptr)},
                      {"sweep", a.sweep ? json(a.sweep->string()) : json(nullptr)}}},
                    {"total_seconds", seconds_since(start)},
                    {"status", "ok"}});
    return kExitOk;
}

// ---------------------------------------------------------------- filter

struct FilterArgs {
    fs::path scores;
    fs::path images;
    std::optional<fs::path> texts;
    std::optional<fs::path> labels;
    std::optional<double> top_fraction;
    std::optional<double> threshold;
    std::optional<double> sigma_multiplier;
    fs::path out_dir;
};

int cmd_filter(const FilterArgs& a) {
    const int chosen = (a.top_fraction ? 1 : 0) + (a.threshold ? 1 : 0) + (a.sigma_multiplier ? 1 : 0);
    if (chosen > 1) throw UsageError("choose one of --top-fraction, --threshold, --sigma-multiplier");
    FilterPolicy policy = FilterPolicy::top_fraction(0.10);
    if (a.top_fraction) {
        if (!(*a.top_fraction > 0.0 && *a.top_fraction < 1.0)) {
            throw UsageError("--top-fraction must lie in (0, 1)");
        }
        policy = FilterPolicy::top_fraction(*a.top_fraction);
    } else if (a.threshold) {
        policy = FilterPolicy::absolute_threshold(*a.threshold);
    } else if (a.sigma_multiplier) {
        policy = FilterPolicy::mean_plus_std(*a.sigma_multiplier);
    }

    const auto start = Clock::now();
    const ScoreVector scores = read_scores(a.scores);
    EmbeddingMatrix images = load_embeddings(a.images);
    if (images.count() != scores.count()) {
        throw Error(ErrorCode::CountMismatch, std::to_string(scores.count()) + " scores vs " +
                                                  std::to_string(images.count()) + " embeddings");
    }
    std::optional<EmbeddingMatrix> texts;
    if (a.texts) texts = load_embeddings(*a.texts);
    std::optional<LabelVector> labels;
    if (a.labels) labels = load_labels(*a.labels, images.count());
    const DatasetHandle data(std::move(images), std::move(texts), std::move(labels));

    const auto removed = select_removals(scores.scores, policy);
    const auto kept = purify(data, removed, a.out_dir);

    static constexpr const char* kPolicyNames[] = {"top_fraction", "threshold", "mean_plus_std"};
    json log{{"subcommand", "filter"},
             {"config",
              {{"scores", a.scores.string()},
               {"images", a.images.string()},
               {"texts", a.texts ? json(a.texts->string()) : json(nullptr)},
               {"labels", a.labels ? json(a.labels->string()) : json(nullptr)},
               {"policy", kPolicyNames[static_cast<int>(policy.kind)]},
               {"policy_value", policy.value}}},
             {"total", data.count()},
             {"removed", removed.size()},
             {"kept", kept.size()}};
    if (data.labels) {
        std::size_t removed_backdoor = 0;
        for (std::size_t r : removed) removed_backdoor += data.labels->is_backdoor(r) ? 1 : 0;
        log["backdoor_total"] = data.labels->backdoor_count();
        log["backdoor_removed"] = removed_backdoor;
    }
    write_json(a.out_dir / "filter.json", log);
    log["config"]["out_dir"] = a.out_dir.string();
    log["total_seconds"] = seconds_since(start);
    log["status"] = "ok";
    write_json(a.out_dir / "run.log.json", log);
    return kExitOk;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    SyntheticConfig cfg;
    fs::path out_dir;
};

int cmd_synth(const SynthArgs& a) {
    const auto start = Clock::now();
    const DatasetHandle data = generate(a.cfg);
    fs::create_directories(a.out_dir);
    write_embeddings(a.out_dir / "images.emb", data.images);
    if (data.texts) write_embeddings(a.out_dir / "texts.emb", *data.texts);
    write_labels(a.out_dir / "labels.lbl", *data.labels);
    write_json(a.out_dir / "run.log.json", json{{"subcommand", "synth"},
                                                {"config", synth_to_json(a.cfg)},
                                                {"backdoor_count", data.labels->backdoor_count()},
                                                {"total_seconds", seconds_since(start)},
                                                {"status", "ok"}});
    return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
    std::size_t n = 1'000'000;
    std::size_t d = 512;
    bool with_text = false;
    DetectorFlags flags;
    std::optional<fs::path> scores_out;
    fs::path out;
};

int cmd_bench(BenchArgs& a) {
    a.flags.resolve();
    const std::size_t threads = resolve_threads(a.flags.threads);
    SyntheticConfig cfg;
    cfg.n = a.n;
    cfg.d = a.d;
    cfg.with_text = a.with_text;
    cfg.seed = a.flags.seed;
    cfg.poison_rate = cfg.backdoor_count() >= 1 ? cfg.poison_rate : 0.0;

    const auto gen_start = Clock::now();
    const DatasetHandle data = generate(cfg);
    const double generate_seconds = seconds_since(gen_start);

    DetectorConfig det = a.flags.det;
    det.seed = a.flags.seed;
    det.validate();
    const BatchPlan plan = plan_batches(data.count(), a.flags.batch_size, a.flags.seed, a.flags.mode, det.k);
    const auto score_start = Clock::now();
    const ScoreVector scores = score_dataset(data, det, plan, threads);
    const double score_seconds = seconds_since(score_start);
    if (a.scores_out) write_scores(*a.scores_out, scores);

    json report{{"subcommand", "bench"},
                {"config", a.flags.to_json(threads)},
                {"n", a.n},
                {"d", a.d},
                {"with_text", a.with_text},
                {"generate_seconds", generate_seconds},
                {"wall_time_seconds", score_seconds},
                {"samples_per_second", static_cast<double>(a.n) / score_seconds},
                {"scores_fnv1a64", hex64(fnv1a64(scores.scores))},
                {"status", "ok"}};
    write_json(a.out, report);
    std::cout << report.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- experiments

struct KdistExpArgs {
    SyntheticConfig cfg;
    std::size_t batch_size = 1024;
    std::size_t k = 16;
    std::vector<std::size_t> counts{1, 5, 10, 50};
    fs::path out;
};

int cmd_kdist_exp(const KdistExpArgs& a) {
    const auto start = Clock::now();
    const auto rows = kdist_distribution_experiment(a.cfg, a.counts, a.batch_size, a.k);
    write_text(a.out, kdist_summary_csv(rows));
    json cfg = synth_to_json(a.cfg);
    cfg["batch_size"] = a.batch_size;
    cfg["k"] = a.k;
    cfg["counts"] = a.counts;
    write_json(default_log(a.out), json{{"subcommand", "kdist-exp"},
                                        {"config", cfg},
                                        {"total_seconds", seconds_since(start)},
                                        {"status", "ok"}});
    return kExitOk;
}

struct SweepArgs {
    SyntheticConfig cfg;
    std::vector<double> rates{0.0001, 0.001, 0.01, 0.05, 0.10};
    std::vector<std::size_t> ks{16};
    std::vector<std::string> detectors{"kdist", "slof", "lid", "dao"};
    std::size_t batch_size = 2048;
    std::size_t threads = 0;
    fs::path out;
};

int cmd_sweep(const SweepArgs& a) {
    const auto start = Clock::now();
    SensitivitySweepOptions options;
    options.detectors.clear();
    for (const auto& name : a.detectors) {
        auto kind = parse_detector(name);
        if (!kind) throw UsageError("unknown detector " + name);
        options.detectors.push_back(*kind);
    }
    options.batch_size = a.batch_size;
    options.threads = resolve_threads(a.threads);
    const auto cells = poison_rate_sensitivity_sweep(a.cfg, a.rates, a.ks, options);
    write_text(a.out, sweep_cells_csv(cells));
    json cfg = synth_to_json(a.cfg);
    cfg["rates"] = a.rates;
    cfg["ks"] = a.ks;
    cfg["detectors"] = a.detectors;
    cfg["batch_size"] = a.batch_size;
    cfg["threads"] = options.threads;
    write_json(default_log(a.out), json{{"subcommand", "sweep"},
                                        {"config", cfg},
                                        {"total_seconds", seconds_since(start)},
                                        {"status", "ok"}});
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Backdoor sample detection with local outlier scores", "poison_scan"};
    app.require_subcommand(1);

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Score every image embedding");
    score_cmd->add_option("--images", score.images, "EMB1 image embeddings")->required()->check(CLI::ExistingFile);
    score_cmd->add_option("--texts", score.texts, "EMB1 text embeddings (extra reference points)")
        ->check(CLI::ExistingFile);
    score_cmd->add_flag("--require-text", score.require_text, "Fail unless --texts is given");
    score_cmd->add_flag("--normalize,!--no-normalize", score.normalize, "L2-normalize rows first (default on)");
    score.flags.add_to(score_cmd);
    score_cmd->add_option("--out", score.out, "SCR1 output")->required();
    score_cmd->add_option("--csv", score.csv, "Also write index,score CSV");
    score_cmd->add_option("--log", score.log, "Run log path (default <out>.log.json)");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "AUC and FPR@95 of a score file");
    eval_cmd->add_option("--scores", eval.scores, "SCR1 scores")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--labels", eval.labels, "LBL1 labels")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--out", eval.out, "EvalReport JSON output")->required();
    eval_cmd->add_option("--run-log", eval.run_log, "Score run log supplying wall_time_seconds")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--sweep", eval.sweep, "Also write a removal-fraction threshold sweep CSV");
    eval_cmd->add_option("--log", eval.log, "Run log path (default <out>.log.json)");

    FilterArgs filter;
    auto* filter_cmd = app.add_subcommand("filter", "Remove top-scoring samples and write the purified set");
    filter_cmd->add_option("--scores", filter.scores, "SCR1 scores")->required()->check(CLI::ExistingFile);
    filter_cmd->add_option("--images", filter.images, "EMB1 image embeddings")->required()->check(CLI::ExistingFile);
    filter_cmd->add_option("--texts", filter.texts, "EMB1 text embeddings")->check(CLI::ExistingFile);
    filter_cmd->add_option("--labels", filter.labels, "LBL1 labels")->check(CLI::ExistingFile);
    filter_cmd->add_option("--top-fraction", filter.top_fraction, "Remove the top fraction (default 0.10)");
    filter_cmd->add_option("--threshold", filter.threshold, "Remove scores >= threshold");
    filter_cmd->add_option("--sigma-multiplier", filter.sigma_multiplier, "Remove scores >= mean + m * std");
    filter_cmd->add_option("--out-dir", filter.out_dir, "Output directory")->required();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic poisoned embedding dataset");
    add_synth_flags(synth_cmd, synth.cfg);
    synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Throughput on generated data");
    bench_cmd->add_option("--n", bench.n, "Samples")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--d", bench.d, "Embedding dimension")->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--with-text", bench.with_text, "Generate and use text reference rows");
    bench.flags.add_to(bench_cmd);
    bench_cmd->add_option("--scores-out", bench.scores_out, "Write the SCR1 scores");
    bench_cmd->add_option("--out", bench.out, "Report JSON")->required();

    KdistExpArgs kexp;
    auto* kexp_cmd = app.add_subcommand("kdist-exp", "kdist distribution vs within-batch backdoor count");
    add_synth_flags(kexp_cmd, kexp.cfg);
    kexp_cmd->add_option("--batch-size", kexp.batch_size, "Batch size")->check(CLI::PositiveNumber);
    kexp_cmd->add_option("--k", kexp.k, "Locality")->check(CLI::PositiveNumber);
    kexp_cmd->add_option("--counts", kexp.counts, "Backdoor counts per batch")->delimiter(',');
    kexp_cmd->add_option("--out", kexp.out, "CSV output")->required();

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "AUC grid over poisoning rate and locality");
    add_synth_flags(sweep_cmd, sweep.cfg);
    sweep_cmd->add_option("--rates", sweep.rates, "Poisoning rates")->delimiter(',');
    sweep_cmd->add_option("--ks", sweep.ks, "Locality values")->delimiter(',');
    sweep_cmd->add_option("--detectors", sweep.detectors, "Detectors")->delimiter(',');
    sweep_cmd->add_option("--batch-size", sweep.batch_size, "Batch size")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads");
    sweep_cmd->add_option("--out", sweep.out, "CSV output (header detector,rate,k,auc)")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (score_cmd->parsed()) return cmd_score(score);
        if (eval_cmd->parsed()) return cmd_eval(eval);
        if (filter_cmd->parsed()) return cmd_filter(filter);
        if (synth_cmd->parsed()) return cmd_synth(synth);
        if (bench_cmd->parsed()) return cmd_bench(bench);
        if (kexp_cmd->parsed()) return cmd_kdist_exp(kexp);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}

}  // namespace poison_scan::cli
