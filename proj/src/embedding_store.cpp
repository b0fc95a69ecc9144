#include "poison_scan/embedding_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "poison_scan/error.hpp"

namespace poison_scan {

namespace {

constexpr std::string_view kEmbeddingMagic = "EMB1";
constexpr std::string_view kLabelMagic = "LBL1";
constexpr std::string_view kScoreMagic = "SCR1";

// All on-disk integers and floats are little-endian.
template <typename T>
T byteswap_if_needed(T value) {
    if constexpr (std::endian::native == std::endian::little) {
        return value;
    } else {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
}

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) {
            throw Error(ErrorCode::IoError, "cannot open " + path.string());
        }
        in_.seekg(0, std::ios::end);
        size_ = static_cast<std::uint64_t>(in_.tellg());
        in_.seekg(0, std::ios::beg);
    }

    void expect_magic(std::string_view magic) {
        char buf[4] = {};
        if (remaining() < 4) {
            throw Error(ErrorCode::BadMagic, path_.string() + " is shorter than its magic");
        }
        in_.read(buf, 4);
        if (std::string_view(buf, 4) != magic) {
            throw Error(ErrorCode::BadMagic,
                        path_.string() + ": expected " + std::string(magic));
        }
        pos_ += 4;
    }

    template <typename T>
    T read_scalar() {
        T value{};
        read_array(std::span<T>(&value, 1));
        return value;
    }

    template <typename T>
    void read_array(std::span<T> out) {
        const std::uint64_t bytes = out.size_bytes();
        if (remaining() < bytes) {
            throw Error(ErrorCode::TruncatedFile, path_.string() + ": payload shorter than header declares");
        }
        in_.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
        if (!in_) {
            throw Error(ErrorCode::IoError, "read failed on " + path_.string());
        }
        pos_ += bytes;
        if constexpr (std::endian::native != std::endian::little) {
            for (auto& v : out) v = byteswap_if_needed(v);
        }
    }

    void expect_end() const {
        if (remaining() != 0) {
            throw Error(ErrorCode::TrailingData,
                        path_.string() + ": " + std::to_string(remaining()) + " bytes after payload");
        }
    }

    std::uint64_t remaining() const { return size_ - pos_; }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t size_ = 0;
    std::uint64_t pos_ = 0;
};

class Writer {
public:
    explicit Writer(const std::filesystem::path& path)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) {
            throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
        }
    }

    void magic(std::string_view m) { out_.write(m.data(), static_cast<std::streamsize>(m.size())); }

    template <typename T>
    void scalar(T value) {
        value = byteswap_if_needed(value);
        out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
    }

    template <typename T>
    void array(std::span<const T> values) {
        if constexpr (std::endian::native == std::endian::little) {
            out_.write(reinterpret_cast<const char*>(values.data()),
                       static_cast<std::streamsize>(values.size_bytes()));
        } else {
            for (T v : values) scalar(v);
        }
    }

    void finish() {
        out_.flush();
        if (!out_) {
            throw Error(ErrorCode::IoError, "write failed on " + path_.string());
        }
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

std::uint32_t checked_u32(std::size_t n, const char* what) {
    if (n > 0xFFFFFFFFu) {
        throw Error(ErrorCode::InvalidConfig, std::string(what) + " exceeds 32-bit header field");
    }
    return static_cast<std::uint32_t>(n);
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

}  // namespace

EmbeddingMatrix::EmbeddingMatrix(std::size_t count, std::size_t dim, std::vector<float> data,
                                 bool normalized)
    : count_(count), dim_(dim), data_(std::move(data)), normalized_(normalized) {
    if (dim_ == 0) {
        throw Error(ErrorCode::ZeroDim, "embedding dim must be >= 1");
    }
    if (count_ == 0) {
        throw Error(ErrorCode::EmptyMatrix, "embedding count must be >= 1");
    }
    if (data_.size() != count_ * dim_) {
        throw Error(ErrorCode::DimMismatch, "data size " + std::to_string(data_.size()) +
                                                " != count*dim " + std::to_string(count_ * dim_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) {
        if (!std::isfinite(data_[i])) {
            throw NonFiniteValueError(i / dim_, i % dim_);
        }
    }
    if (normalized_) {
        for (std::size_t r = 0; r < count_; ++r) {
            double sq = 0.0;
            for (float v : row(r)) sq += static_cast<double>(v) * v;
            if (std::abs(std::sqrt(sq) - 1.0) > 1e-5) {
                throw Error(ErrorCode::InvalidConfig,
                            "row " + std::to_string(r) + " flagged normalized but norm is " +
                                format_double(std::sqrt(sq)));
            }
        }
    }
}

EmbeddingMatrix EmbeddingMatrix::gather(std::span<const std::size_t> indices) const {
    std::vector<float> out;
    out.reserve(indices.size() * dim_);
    for (std::size_t idx : indices) {
        if (idx >= count_) {
            throw Error(ErrorCode::IndexOutOfRange, "row " + std::to_string(idx));
        }
        auto r = row(idx);
        out.insert(out.end(), r.begin(), r.end());
    }
    return EmbeddingMatrix(indices.size(), dim_, std::move(out), normalized_);
}

LabelVector LabelVector::from_bytes(std::span<const std::uint8_t> bytes) {
    std::vector<Label> flags(bytes.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (bytes[i] > 1) {
            throw Error(ErrorCode::InvalidLabelValue,
                        "value " + std::to_string(bytes[i]) + " at index " + std::to_string(i));
        }
        flags[i] = static_cast<Label>(bytes[i]);
    }
    return LabelVector(std::move(flags));
}

std::size_t LabelVector::backdoor_count() const noexcept {
    return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), Label::Backdoor));
}

LabelVector LabelVector::gather(std::span<const std::size_t> indices) const {
    std::vector<Label> out;
    out.reserve(indices.size());
    for (std::size_t idx : indices) {
        if (idx >= flags_.size()) {
            throw Error(ErrorCode::IndexOutOfRange, "label " + std::to_string(idx));
        }
        out.push_back(flags_[idx]);
    }
    return LabelVector(std::move(out));
}

std::string_view to_string(DetectorKind kind) noexcept {
    switch (kind) {
    case DetectorKind::KDist: return "kdist";
    case DetectorKind::SLOF: return "slof";
    case DetectorKind::LID: return "lid";
    case DetectorKind::DAO: return "dao";
    case DetectorKind::IForest: return "iforest";
    }
    return "unknown";
}

std::optional<DetectorKind> parse_detector(std::string_view name) noexcept {
    for (auto kind : {DetectorKind::KDist, DetectorKind::SLOF, DetectorKind::LID, DetectorKind::DAO,
                      DetectorKind::IForest}) {
        if (to_string(kind) == name) return kind;
    }
    return std::nullopt;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
    Reader in(path);
    in.expect_magic(kEmbeddingMagic);
    const auto count = in.read_scalar<std::uint32_t>();
    const auto dim = in.read_scalar<std::uint32_t>();
    if (dim == 0) {
        throw Error(ErrorCode::ZeroDim, path.string());
    }
    const std::uint64_t values = std::uint64_t{count} * dim;
    if (in.remaining() < values * sizeof(float)) {
        throw Error(ErrorCode::TruncatedFile,
                    path.string() + ": header declares " + std::to_string(values) + " values");
    }
    std::vector<float> data(values);
    in.read_array(std::span<float>(data));
    in.expect_end();
    return EmbeddingMatrix(count, dim, std::move(data));
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingMatrix& m) {
    Writer out(path);
    out.magic(kEmbeddingMagic);
    out.scalar(checked_u32(m.count(), "count"));
    out.scalar(checked_u32(m.dim(), "dim"));
    out.array(m.data());
    out.finish();
}

LabelVector load_labels(const std::filesystem::path& path, std::optional<std::size_t> expected_count) {
    Reader in(path);
    in.expect_magic(kLabelMagic);
    const auto count = in.read_scalar<std::uint32_t>();
    if (expected_count && *expected_count != count) {
        throw Error(ErrorCode::CountMismatch, path.string() + ": " + std::to_string(count) +
                                                  " labels, expected " +
                                                  std::to_string(*expected_count));
    }
    std::vector<std::uint8_t> bytes(count);
    in.read_array(std::span<std::uint8_t>(bytes));
    in.expect_end();
    return LabelVector::from_bytes(bytes);
}

void write_labels(const std::filesystem::path& path, const LabelVector& labels) {
    Writer out(path);
    out.magic(kLabelMagic);
    out.scalar(checked_u32(labels.count(), "count"));
    std::vector<std::uint8_t> bytes(labels.count());
    std::transform(labels.flags().begin(), labels.flags().end(), bytes.begin(),
                   [](Label l) { return static_cast<std::uint8_t>(l); });
    out.array(std::span<const std::uint8_t>(bytes));
    out.finish();
}

ScoreVector read_scores(const std::filesystem::path& path) {
    Reader in(path);
    in.expect_magic(kScoreMagic);
    const auto count = in.read_scalar<std::uint32_t>();
    const auto tag = in.read_scalar<std::uint8_t>();
    if (tag > static_cast<std::uint8_t>(DetectorKind::IForest)) {
        throw Error(ErrorCode::InvalidConfig, path.string() + ": unknown detector tag " +
                                                  std::to_string(tag));
    }
    ScoreVector s;
    s.detector = static_cast<DetectorKind>(tag);
    s.scores.resize(count);
    in.read_array(std::span<double>(s.scores));
    in.expect_end();
    return s;
}

void write_scores(const std::filesystem::path& path, const ScoreVector& s) {
    Writer out(path);
    out.magic(kScoreMagic);
    out.scalar(checked_u32(s.count(), "count"));
    out.scalar(static_cast<std::uint8_t>(s.detector));
    out.array(std::span<const double>(s.scores));
    out.finish();
}

std::string format_scores_csv(const ScoreVector& s) {
    std::string text = "index,score\n";
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
        text += std::to_string(i);
        text += ',';
        text += format_double(s.scores[i]);
        text += '\n';
    }
    return text;
}

void write_scores_csv(const std::filesystem::path& path, const ScoreVector& s) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    out << format_scores_csv(s);
    if (!out.flush()) {
        throw Error(ErrorCode::IoError, "write failed on " + path.string());
    }
}

EmbeddingMatrix l2_normalize(const EmbeddingMatrix& m) {
    std::vector<float> out(m.data().begin(), m.data().end());
    const std::size_t dim = m.dim();
    for (std::size_t r = 0; r < m.count(); ++r) {
        float* row = out.data() + r * dim;
        double sq = 0.0;
        for (std::size_t j = 0; j < dim; ++j) sq += static_cast<double>(row[j]) * row[j];
        if (sq == 0.0) {
            throw ZeroRowError(r);
        }
        const double inv = 1.0 / std::sqrt(sq);
        for (std::size_t j = 0; j < dim; ++j) {
            row[j] = static_cast<float>(row[j] * inv);
        }
    }
    return EmbeddingMatrix(m.count(), dim, std::move(out), true);
}

void write_index_list(const std::filesystem::path& path, std::span<const std::size_t> indices) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    }
    for (std::size_t idx : indices) out << idx << '\n';
    if (!out.flush()) {
        throw Error(ErrorCode::IoError, "write failed on " + path.string());
    }
}

std::vector<std::size_t> read_index_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path.string());
    }
    std::vector<std::size_t> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t value = 0;
        auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
        if (ec != std::errc{} || ptr != line.data() + line.size()) {
            throw Error(ErrorCode::IoError, path.string() + ": bad index line '" + line + "'");
        }
        out.push_back(value);
    }
    return out;
}

}  // namespace poison_scan
