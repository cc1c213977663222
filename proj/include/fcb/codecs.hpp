#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fcb/image.hpp"
#include "fcb/imgcore.hpp"

namespace fcb {

enum class CodecId { png_resized, jpeg, jpeg2000, jpegxl };

inline constexpr std::array<CodecId, 4> kAllCodecs = {CodecId::png_resized, CodecId::jpeg,
                                                      CodecId::jpeg2000, CodecId::jpegxl};

std::string to_string(CodecId id);
/// Accepts the canonical names (png_resized, jpeg, jpeg2000, jpegxl).
CodecId parse_codec(const std::string& name);
/// File extension without the dot: png, jpg, jp2, jxl.
std::string codec_extension(CodecId id);

/// Human-readable label used in figures and tables.
std::string codec_label(CodecId id);

/// The one searched scalar per codec:
///   jpeg        integer quality in [1, 100]
///   jpegxl      distance in [0.1, 25.0]
///   jpeg2000    compression ratio in [1, 2000]
///   png_resized scale factor in (0, 1]
struct CodecParam {
    CodecId codec = CodecId::jpeg;
    double value = 0.0;

    std::string to_string() const;
    friend bool operator==(const CodecParam&, const CodecParam&) = default;
};

bool param_in_range(const CodecParam& p);

/// Finite parameter grid, index 0 = most aggressive, last = highest fidelity.
///   jpeg        qualities 1..100
///   jpegxl      distances 25.00 down to 0.10 in steps of 0.01
///   jpeg2000    ratios 2000, then 1.02^k for k = 383..0
///   png_resized scales w'/w for output widths w' = 1..w
class ParamGrid {
public:
    ParamGrid(CodecId codec, int source_width = 1);

    CodecId codec() const noexcept { return codec_; }
    int size() const noexcept { return size_; }
    CodecParam at(int index) const;
    /// Short description used in cache keys and reports.
    std::string descriptor() const;

private:
    CodecId codec_;
    int size_ = 0;
    int source_width_ = 1;
};

ParamGrid grid_for(CodecId codec, const ImagePlane& image);

/// Byte budget, inclusive upper bound. 1 kB = 1000 bytes.
struct ByteBudget {
    long long target_bytes = 0;

    static ByteBudget from_kb(double kb);
    friend auto operator<=>(const ByteBudget&, const ByteBudget&) = default;
};

/// Adapter contract: param in, deterministic bytes out.
class CodecAdapter {
public:
    virtual ~CodecAdapter() = default;
    virtual CodecId id() const = 0;
    virtual std::vector<std::uint8_t> encode(const ImagePlane& image, const CodecParam& param) const = 0;
    virtual ImagePlane decode(std::span<const std::uint8_t> payload) const = 0;
    /// Underlying library name and version, e.g. "libjpeg-turbo 2.1.2".
    virtual std::string version() const = 0;
};

/// Built-in adapters are stateless singletons.
const CodecAdapter& adapter_for(CodecId codec);

/// Output dims png_resized produces for `scale` on a w x h source.
std::pair<int, int> png_resized_dims(int width, int height, double scale);

/// Throws CodecError (naming codec and param) on encoder failure.
std::vector<std::uint8_t> encode_with_param(const ImagePlane& image, const CodecParam& param);
/// Throws DecodeError on corrupt payloads.
ImagePlane decode(std::span<const std::uint8_t> payload, CodecId codec);

struct CompressionOutcome {
    std::string image_id;
    CodecId codec = CodecId::jpeg;
    ByteBudget budget;
    CodecParam chosen_param;
    int grid_index = 0;
    long long achieved_bytes = 0;
    std::vector<std::uint8_t> payload;
    int out_w = 0;
    int out_h = 0;
    /// Encoder invocations spent by the search.
    int probes = 0;
};

struct SearchOptions {
    /// Scan the whole grid instead of bisecting. For auditing.
    bool exhaustive = false;
};

/// Rate search for one (image, codec). Encodings are memoized per grid index,
/// so several budgets against the same image share probes. The probe path
/// depends only on the budget, so results do not depend on budget order.
///
/// The search brackets the budget between a fitting and an overshooting grid
/// index (bisecting over fixed anchors, then false position on log-size
/// against a per-codec rate coordinate, halving when the bracket shrinks
/// slowly) until they are adjacent. The steps on either side of that
/// boundary are then probed; if they show size is not monotone there, the 8
/// nearest grid steps are scanned and the largest fitting size among indices
/// whose next higher-fidelity step overshoots is taken (ties to higher
/// fidelity). The chosen parameter's next higher-fidelity step therefore
/// always exceeds the budget.
class BudgetSearcher {
public:
    BudgetSearcher(const ImagePlane& image, CodecId codec, SearchOptions options = {});

    /// Throws BudgetInfeasible when even the most aggressive parameter
    /// overshoots.
    CompressionOutcome compress(ByteBudget budget);

    const ParamGrid& grid() const noexcept { return grid_; }
    /// Encoded size at a grid index (memoized).
    long long size_at(int index);
    int probes() const noexcept { return static_cast<int>(cache_.size()); }

private:
    const std::vector<std::uint8_t>& payload_at(int index);
    int search(long long budget);
    double rate_coordinate(int index) const;
    int nearest_index(double x, int first, int last) const;

    const ImagePlane& image_;
    CodecId codec_;
    SearchOptions options_;
    ParamGrid grid_;
    std::map<int, std::vector<std::uint8_t>> cache_;
};

/// One-shot BudgetSearcher::compress.
CompressionOutcome compress_to_budget(const ImagePlane& image, CodecId codec, ByteBudget budget,
                                      const SearchOptions& options = {});

// ---------------------------------------------------------------------------
// Ladder runs

/// Standard ladders, in bytes.
std::vector<ByteBudget> roi_ladder();
std::vector<ByteBudget> extended_roi_ladder();
std::vector<ByteBudget> portrait_ladder();

struct LadderCell {
    std::string image_id;
    CodecId codec = CodecId::jpeg;
    ByteBudget budget;
    std::optional<CodecParam> chosen_param;
    long long achieved_bytes = 0;
    int out_w = 0;
    int out_h = 0;
    /// "ok" or "error: <message>". Cache hits report "ok" too.
    std::string status;
    std::filesystem::path file;

    bool ok() const { return status == "ok"; }
};

struct LadderReport {
    std::vector<LadderCell> cells;  // sorted by (image_id, codec, budget desc)
    std::vector<std::string> encoder_versions;

    std::size_t failures() const;
};

struct LadderOptions {
    SearchOptions search;
    int jobs = 1;
    /// Reuse cells whose content-hash key matches a previous run.
    bool use_cache = true;
};

/// Persisted payload location: out_root/<codec>/<target_bytes>/<image_id>.<ext>.
std::filesystem::path cell_path(const std::filesystem::path& out_root, CodecId codec,
                                ByteBudget budget, const std::string& image_id);

/// Compresses every (image, codec, budget) cell. Per-cell failures (load,
/// infeasible budget, encoder errors) are recorded, never thrown.
LadderReport run_ladder(const DatasetManifest& manifest, const std::vector<CodecId>& codecs,
                        const std::vector<ByteBudget>& ladder, const std::filesystem::path& out_root,
                        const LadderOptions& options = {});

/// Tab-separated report with '#' comment lines carrying the kB convention and
/// encoder versions.
std::string format_ladder_report(const LadderReport& report);
LadderReport parse_ladder_report(const std::string& text, const std::filesystem::path& out_root);

}  // namespace fcb
