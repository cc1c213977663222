#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fcb/codecs.hpp"
#include "fcb/trials.hpp"

namespace fcb {

/// One raw observation: a quality score (method = metric name) or a
/// comparison score (method = trial kind name) for a compressed variant.
struct ScoreRecord {
    std::string method;
    CodecId codec = CodecId::jpeg;
    long long target_bytes = 0;
    double value = 0.0;
};

struct SizePointStats {
    CodecId codec = CodecId::jpeg;
    long long target_bytes = 0;
    std::string method;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;
    /// Sorted ascending; possibly thinned to `keep_raw` evenly spaced values.
    std::vector<double> raw_values;
};

/// Per (method, codec, target_bytes) mean, min, max and count. Values are
/// summed in sorted order, so the result does not depend on input order.
/// Output sorted by method, codec, then descending target_bytes.
std::vector<SizePointStats> aggregate(std::vector<ScoreRecord> scores,
                                      std::optional<std::size_t> keep_raw = std::nullopt);

struct CurvePoint {
    long long target_bytes = 0;
    double value = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// Points sorted by strictly decreasing target_bytes.
struct ScoreCurve {
    CodecId codec = CodecId::jpeg;
    std::string method;
    std::vector<CurvePoint> points;
    bool normalized = false;
};

/// Mean curves, one per (method, codec) present in `stats`.
std::vector<ScoreCurve> mean_curves(const std::vector<SizePointStats>& stats);

enum class NormalizationScope { per_method_global, per_curve };
std::string to_string(NormalizationScope scope);
NormalizationScope parse_normalization(const std::string& name);

/// Min-max normalization to [0, 1] over the scope; a scope whose values are
/// all equal maps to 0.5.
std::vector<ScoreCurve> normalize_curves(std::vector<ScoreCurve> curves,
                                         NormalizationScope scope = NormalizationScope::per_method_global);

/// `bytes` integrates over the target sizes; `equal_spacing` over the point
/// indices.
enum class XAxis { bytes, equal_spacing };
std::string to_string(XAxis axis);
XAxis parse_x_axis(const std::string& name);

/// Trapezoidal area of a normalized curve divided by its x extent, so the
/// result is the mean height in [0, 1].
double curve_area(const ScoreCurve& curve, XAxis axis = XAxis::bytes);

struct DistanceCell {
    TrialKind kind = TrialKind::mated_other;
    /// Missing for the mean over codecs.
    std::optional<CodecId> codec;
    std::string method;
    /// 100 * |area difference| before rounding.
    double real = 0.0;
    int value = 0;
};

/// 100 * |area(q) - area(c)| rounded half away from zero. Both curves must be
/// normalized, share the codec, and sample the same target sizes.
DistanceCell curve_distance(const ScoreCurve& q, const ScoreCurve& c, TrialKind kind,
                            XAxis axis = XAxis::bytes);

/// Mean of the unrounded per-codec distances, rounded once. Requires exactly
/// one cell per codec in `codecs`, all for the same kind and method.
DistanceCell combine_distances(const std::vector<DistanceCell>& cells, const std::vector<CodecId>& codecs);

/// Rows: each trial kind x (each codec, then combined). Columns: methods.
struct DistanceTable {
    std::vector<TrialKind> kinds;
    std::vector<CodecId> codecs;
    std::vector<std::string> methods;
    std::vector<DistanceCell> cells;

    const DistanceCell* find(TrialKind kind, std::optional<CodecId> codec, const std::string& method) const;
};

/// `quality` holds normalized quality curves (method = metric name);
/// `comparison` holds normalized comparison curves (method = trial kind).
DistanceTable build_distance_table(const std::vector<ScoreCurve>& quality,
                                   const std::vector<ScoreCurve>& comparison,
                                   const std::vector<TrialKind>& kinds, const std::vector<CodecId>& codecs,
                                   const std::vector<std::string>& methods, XAxis axis = XAxis::bytes);

std::string format_stats_table(const std::vector<SizePointStats>& quality,
                               const std::vector<SizePointStats>& comparison);
std::string format_distance_table(const DistanceTable& table);

struct ReportInputs {
    std::vector<SizePointStats> quality_stats;
    std::vector<SizePointStats> comparison_stats;
    /// Normalized curves for the per-codec overview figures.
    std::vector<ScoreCurve> curves;
    std::optional<DistanceTable> table;
};

struct ReportOptions {
    bool tables = true;
    bool figures = true;
    /// Restricts figures to these codecs; empty means all present.
    std::vector<CodecId> codecs;
};

/// Writes into out_dir:
///   stats.tsv, distance_table.tsv                 (tables)
///   curves_<codec>.svg   normalized mean curves   (one per codec with curves)
///   scores_<codec>.svg   raw comparison scores with means and min/max markers
/// Output bytes depend only on the inputs. Returns the files written.
std::vector<std::filesystem::path> render_report(const ReportInputs& inputs, const std::filesystem::path& out_dir,
                                                 const ReportOptions& options = {});

}  // namespace fcb
