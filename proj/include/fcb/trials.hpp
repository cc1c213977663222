#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fcb/codecs.hpp"
#include "fcb/error.hpp"
#include "fcb/fiqa.hpp"
#include "fcb/imgcore.hpp"

namespace fcb {

enum class TrialKind { mated_other, mated_self, non_mated };
enum class Source { lossy, lossless };

std::string to_string(TrialKind kind);
TrialKind parse_trial_kind(const std::string& name);
std::string to_string(Source source);

/// Cosine of the angle between two equal-length vectors, clamped to [-1, 1].
/// Throws SimilarityError on a length mismatch or a zero-norm input.
template <typename A, typename B>
double cosine_similarity(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    if (a.size() != b.size()) throw SimilarityError("embedding dimensions differ");
    const double na = a.norm();
    const double nb = b.norm();
    if (!(na > 0.0) || !(nb > 0.0)) throw SimilarityError("zero-norm embedding");
    const double c = a.dot(b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

struct TrialPair {
    std::string probe_id;
    std::string reference_id;
    TrialKind kind = TrialKind::mated_other;
    Source probe_source = Source::lossy;
    Source reference_source = Source::lossy;

    friend auto operator<=>(const TrialPair&, const TrialPair&) = default;
};

/// Pairs in canonical order (sorted; probe_id <= reference_id).
struct TrialSet {
    TrialKind kind = TrialKind::mated_other;
    std::vector<TrialPair> pairs;

    friend bool operator==(const TrialSet&, const TrialSet&) = default;
};

/// Every unordered pair of distinct records within each subject.
TrialSet generate_mated_other(const DatasetManifest& manifest);
/// One pair per record: lossless probe against its own lossy version.
TrialSet generate_mated_self(const DatasetManifest& manifest);
/// `count` distinct cross-subject pairs drawn uniformly without replacement
/// from std::mt19937_64 seeded with `seed`. Throws SampleError when fewer
/// than `count` cross-subject pairs exist.
TrialSet generate_non_mated(const DatasetManifest& manifest, std::size_t count, std::uint64_t seed);

/// Number of unordered cross-subject record pairs.
std::size_t cross_subject_pairs(const DatasetManifest& manifest);

std::string format_trial_set(const TrialSet& set);

// ---------------------------------------------------------------------------
// Embeddings

struct Embedding {
    std::string image_id;
    Eigen::VectorXd vector;
};

/// Variant an embedding was computed from. A missing codec marks the
/// lossless (pre-compression) image.
struct EmbeddingKey {
    std::string image_id;
    std::optional<CodecId> codec;
    long long target_bytes = 0;

    static EmbeddingKey lossless(std::string id) { return {std::move(id), std::nullopt, 0}; }
    static EmbeddingKey lossy(std::string id, CodecId c, ByteBudget b) { return {std::move(id), c, b.target_bytes}; }

    friend auto operator<=>(const EmbeddingKey&, const EmbeddingKey&) = default;
};

/// Text form, one line per vector:
/// image_id<TAB>codec<TAB>target_bytes|LOSSLESS<TAB>v1,v2,...
/// Lossless rows carry the codec name "none".
class EmbeddingStore {
public:
    /// Throws Error on non-finite components or a dimension change.
    void add(const EmbeddingKey& key, Eigen::VectorXd vector);
    const Eigen::VectorXd* find(const EmbeddingKey& key) const;
    std::size_t size() const { return vectors_.size(); }
    std::optional<Eigen::Index> dimension() const { return dimension_; }

    std::string format() const;
    static EmbeddingStore parse(const std::string& text);

private:
    std::map<EmbeddingKey, Eigen::VectorXd> vectors_;
    std::optional<Eigen::Index> dimension_;
};

/// Desk-scale stand-in for a recognition model: luma, 8x8 bilinear
/// downsample, mean removed, L2-normalized. Constant images map to zero.
Eigen::VectorXd toy_embed(const ImagePlane& image);

struct EmbedResult {
    std::filesystem::path path;
    std::optional<Eigen::VectorXd> vector;
    std::string error;
};

/// Embedder plugin: same line protocol as quality plugins, with a
/// comma-separated vector as the payload.
std::vector<EmbedResult> embed_with_plugin(const PluginSource& source, const std::vector<std::filesystem::path>& images);

// ---------------------------------------------------------------------------
// Scoring

struct ComparisonScore {
    TrialPair pair;
    CodecId codec = CodecId::jpeg;
    long long target_bytes = 0;
    double value = 0.0;
};

struct TrialFailure {
    TrialPair pair;
    CodecId codec = CodecId::jpeg;
    long long target_bytes = 0;
    std::string message;
};

struct TrialScores {
    std::vector<ComparisonScore> scores;
    std::vector<TrialFailure> failures;
};

/// One cosine score per pair, or a failure naming the missing or degenerate
/// embedding.
TrialScores score_trials(const TrialSet& trials, const EmbeddingStore& store, CodecId codec, ByteBudget budget);

}  // namespace fcb
