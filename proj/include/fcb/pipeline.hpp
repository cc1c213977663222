#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fcb/analysis.hpp"
#include "fcb/codecs.hpp"
#include "fcb/fiqa.hpp"
#include "fcb/imgcore.hpp"
#include "fcb/trials.hpp"

namespace fcb {

/// A quality method: a built-in metric name, or a named plugin.
struct FiqaMethod {
    std::string name;
    std::optional<PluginSource> plugin;
};

struct EmbedderSpec {
    enum class Kind { toy, plugin, precomputed };
    Kind kind = Kind::toy;
    PluginSource plugin;
    /// Precomputed embedding store file.
    std::filesystem::path store;
};

/// Everything a run depends on. Defaults follow the ROI experiment.
struct RunConfig {
    std::filesystem::path manifest;
    Variant variant = Variant::roi;
    std::filesystem::path out_root = "fcb-out";
    std::vector<CodecId> codecs{kAllCodecs.begin(), kAllCodecs.end()};
    /// Empty means the variant's default ladder.
    std::vector<ByteBudget> ladder;
    std::vector<TrialKind> trial_kinds{TrialKind::mated_other, TrialKind::mated_self, TrialKind::non_mated};
    std::uint64_t non_mated_seed = 1;
    /// Missing means "as many as the mated-other trials".
    std::optional<std::size_t> non_mated_count;
    std::vector<FiqaMethod> fiqa{{kSharpness1, std::nullopt}, {kSharpness2, std::nullopt}};
    EmbedderSpec embedder;
    NormalizationScope normalization = NormalizationScope::per_method_global;
    XAxis x_axis = XAxis::bytes;
    int jobs = 1;
    bool exhaustive_search = false;
    bool use_cache = true;
    int roi_size = 250;
    PortraitGeometry portrait;
    /// The manifest already lists prepared images; `run` skips `prep` output.
    bool preprocessed = false;
    /// Raw values kept per size point for the scatter figures; missing = all.
    std::optional<std::size_t> keep_raw;

    std::vector<ByteBudget> effective_ladder() const;
    std::vector<std::string> method_names() const;
};

/// Parses the JSON config. Relative paths resolve against `base_dir`.
/// Unknown keys and invalid values throw ConfigError.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);
/// JSON echo sufficient to re-run (absolute paths, explicit defaults).
std::string config_to_json(const RunConfig& config);
/// Throws ConfigError on an unusable combination.
void validate_config(const RunConfig& config);

/// Output locations under out_root.
struct RunLayout {
    std::filesystem::path root;

    std::filesystem::path prep_dir() const { return root / "prep"; }
    std::filesystem::path prep_manifest() const { return root / "prep" / "manifest.tsv"; }
    std::filesystem::path compressed_dir() const { return root / "compressed"; }
    std::filesystem::path decoded_dir() const { return root / "decoded"; }
    std::filesystem::path ladder_report() const { return root / "scores" / "ladder.tsv"; }
    std::filesystem::path quality_scores() const { return root / "scores" / "quality.tsv"; }
    std::filesystem::path embeddings() const { return root / "scores" / "embeddings.tsv"; }
    std::filesystem::path comparison_scores() const { return root / "scores" / "comparisons.tsv"; }
    std::filesystem::path trials_dir() const { return root / "trials"; }
    std::filesystem::path reports_dir() const { return root / "reports"; }
    std::filesystem::path run_report() const { return root / "run_report.json"; }
};

struct Failure {
    std::string stage;
    std::string item;
    std::string message;
};

struct PrepResult {
    std::filesystem::path manifest;
    std::size_t written = 0;
    std::vector<Failure> skipped;
};

/// Aligns (roi) or crops (portrait) every record into out_root/prep and
/// writes a manifest for the prepared set. Records without landmarks or with
/// unusable geometry are skipped and reported.
PrepResult cmd_prep(const RunConfig& config);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunReport {
    std::string config_json;
    std::vector<StageTiming> timings;
    std::vector<Failure> failures;
    std::vector<std::string> encoder_versions;
    std::vector<std::filesystem::path> outputs;
    std::size_t comparisons = 0;
    std::size_t quality_scores = 0;

    std::string to_json() const;
};

/// Trial sets for the configured kinds, in config order. The non-mated count
/// defaults to the number of mated-other pairs. Infeasible samples are
/// recorded in `failures` and their set omitted.
std::vector<TrialSet> generate_trials(const RunConfig& config, const DatasetManifest& manifest,
                                      std::vector<Failure>& failures);

/// compress -> decode -> quality -> embed -> trials -> analysis. Per-cell
/// problems accumulate in the report; stage-fatal ones throw.
RunReport cmd_run(const RunConfig& config);

/// Re-render tables or figures from the persisted score files, optionally
/// for a subset of codecs. Throws MissingArtifact when a score file is absent.
std::vector<std::filesystem::path> cmd_table(const RunConfig& config, const std::vector<CodecId>& selection = {});
std::vector<std::filesystem::path> cmd_plot(const RunConfig& config, const std::vector<CodecId>& selection = {});

/// Score table I/O (quality: image_id, codec, target_bytes, method, value;
/// comparisons: kind, codec, target_bytes, probe_id, reference_id, value).
struct QualityRow {
    std::string image_id;
    CodecId codec = CodecId::jpeg;
    long long target_bytes = 0;
    std::string method;
    double value = 0.0;
};
std::string format_quality_rows(std::vector<QualityRow> rows);
std::vector<QualityRow> parse_quality_rows(const std::string& text);
std::string format_comparisons(std::vector<ComparisonScore> scores);
std::vector<ComparisonScore> parse_comparisons(const std::string& text);

/// Statistics, curves and distance table from the two score tables.
ReportInputs analyze(const RunConfig& config, const std::vector<QualityRow>& quality,
                     const std::vector<ComparisonScore>& comparisons, const std::vector<CodecId>& codecs,
                     std::vector<Failure>* failures = nullptr);

}  // namespace fcb
