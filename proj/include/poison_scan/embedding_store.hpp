#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poison_scan {

/// Non-owning row-major view over `rows` x `dim` single-precision values.
struct EmbeddingView {
    std::span<const float> data;
    std::size_t rows = 0;
    std::size_t dim = 0;

    std::span<const float> row(std::size_t i) const { return data.subspan(i * dim, dim); }
};

/// Dense row-major matrix of sample embeddings. Immutable once built; every
/// constructor validates shape and finiteness.
class EmbeddingMatrix {
public:
    EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> data,
                    bool normalized = false);

    std::size_t count() const noexcept { return count_; }
    std::size_t dim() const noexcept { return dim_; }
    bool normalized() const noexcept { return normalized_; }
    std::span<const float> data() const noexcept { return data_; }
    std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
    EmbeddingView view() const noexcept { return {data_, count_, dim_}; }

    /// Copy of the listed rows, in the listed order.
    EmbeddingMatrix gather(std::span<const std::size_t> indices) const;

    friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

private:
    std::size_t count_;
    std::size_t dim_;
    std::vector<float> data_;
    bool normalized_;
};

enum class Label : std::uint8_t { Clean = 0, Backdoor = 1 };

class LabelVector {
public:
    LabelVector() = default;
    explicit LabelVector(std::vector<Label> flags) : flags_(std::move(flags)) {}
    /// Accepts raw 0/1 bytes; any other value raises InvalidLabelValue.
    static LabelVector from_bytes(std::span<const std::uint8_t> bytes);

    std::size_t count() const noexcept { return flags_.size(); }
    Label operator[](std::size_t i) const { return flags_[i]; }
    bool is_backdoor(std::size_t i) const { return flags_[i] == Label::Backdoor; }
    std::span<const Label> flags() const noexcept { return flags_; }
    std::size_t backdoor_count() const noexcept;
    LabelVector gather(std::span<const std::size_t> indices) const;

    friend bool operator==(const LabelVector&, const LabelVector&) = default;

private:
    std::vector<Label> flags_;
};

enum class DetectorKind : std::uint8_t { KDist = 0, SLOF = 1, LID = 2, DAO = 3, IForest = 4 };

std::string_view to_string(DetectorKind kind) noexcept;
/// Parses the CLI spelling (kdist, slof, lid, dao, iforest).
std::optional<DetectorKind> parse_detector(std::string_view name) noexcept;

/// Per-sample anomaly scores; higher means more likely poisoned.
struct ScoreVector {
    std::vector<double> scores;
    DetectorKind detector = DetectorKind::KDist;

    std::size_t count() const noexcept { return scores.size(); }
    friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

EmbeddingMatrix load_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m);

/// Loads an LBL1 file. When `expected_count` is given the header count must match it.
LabelVector load_labels(const std::filesystem::path& path,
                        std::optional<std::size_t> expected_count = std::nullopt);
void write_labels(const std::filesystem::path& path, const LabelVector& labels);

ScoreVector read_scores(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path, const ScoreVector& s);
/// "index,score" header followed by one row per sample, shortest round-trip formatting.
void write_scores_csv(const std::filesystem::path& path, const ScoreVector& s);
std::string format_scores_csv(const ScoreVector& s);

/// Scales every row to unit L2 norm (norm accumulated in double). Raises ZeroRowError.
EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m);

/// Writes `indices` one per line in decimal.
void write_index_list(const std::filesystem::path& path, std::span<const std::size_t> indices);
std::vector<std::size_t> read_index_list(const std::filesystem::path& path);

}  // namespace poison_scan
