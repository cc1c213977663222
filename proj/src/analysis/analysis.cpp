#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>

#include "fcb/analysis.hpp"
#include "fcb/error.hpp"
#include "fcb/text.hpp"

namespace fcb {

std::vector<SizePointStats> aggregate(std::vector<ScoreRecord> scores, std::optional<std::size_t> keep_raw) {
    auto key = [](const ScoreRecord& r) { return std::tuple(r.method, r.codec, -r.target_bytes); };
    std::sort(scores.begin(), scores.end(), [&](const ScoreRecord& a, const ScoreRecord& b) {
        return std::tuple(key(a), a.value) < std::tuple(key(b), b.value);
    });

    std::vector<SizePointStats> out;
    for (std::size_t i = 0; i < scores.size();) {
        std::size_t j = i;
        while (j < scores.size() && key(scores[j]) == key(scores[i])) ++j;
        SizePointStats s;
        s.method = scores[i].method;
        s.codec = scores[i].codec;
        s.target_bytes = scores[i].target_bytes;
        s.n = j - i;
        s.min = scores[i].value;
        s.max = scores[j - 1].value;
        double sum = 0.0;
        for (std::size_t k = i; k < j; ++k) sum += scores[k].value;
        s.mean = std::clamp(sum / static_cast<double>(s.n), s.min, s.max);

        const std::size_t cap = keep_raw.value_or(s.n);
        if (cap >= s.n) {
            for (std::size_t k = i; k < j; ++k) s.raw_values.push_back(scores[k].value);
        } else if (cap == 1) {
            s.raw_values.push_back(scores[i].value);
        } else if (cap > 1) {
            for (std::size_t k = 0; k < cap; ++k) {
                s.raw_values.push_back(scores[i + k * (s.n - 1) / (cap - 1)].value);
            }
        }
        out.push_back(std::move(s));
        i = j;
    }
    return out;
}

std::vector<ScoreCurve> mean_curves(const std::vector<SizePointStats>& stats) {
    std::map<std::pair<std::string, CodecId>, ScoreCurve> curves;
    for (const auto& s : stats) {
        auto& c = curves[{s.method, s.codec}];
        c.method = s.method;
        c.codec = s.codec;
        c.points.push_back({s.target_bytes, s.mean});
    }
    std::vector<ScoreCurve> out;
    for (auto& [k, c] : curves) {
        std::sort(c.points.begin(), c.points.end(),
                  [](const CurvePoint& a, const CurvePoint& b) { return a.target_bytes > b.target_bytes; });
        for (std::size_t i = 1; i < c.points.size(); ++i) {
            if (c.points[i].target_bytes == c.points[i - 1].target_bytes) {
                throw Error("curve " + c.method + "/" + to_string(c.codec) + " repeats target size " +
                            std::to_string(c.points[i].target_bytes));
            }
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::string to_string(NormalizationScope scope) {
    return scope == NormalizationScope::per_curve ? "per_curve" : "per_method_global";
}

NormalizationScope parse_normalization(const std::string& name) {
    if (name == "per_method_global") return NormalizationScope::per_method_global;
    if (name == "per_curve") return NormalizationScope::per_curve;
    throw ConfigError("unknown normalization scope '" + name + "'");
}

std::string to_string(XAxis axis) { return axis == XAxis::bytes ? "bytes" : "equal_spacing"; }

XAxis parse_x_axis(const std::string& name) {
    if (name == "bytes") return XAxis::bytes;
    if (name == "equal_spacing") return XAxis::equal_spacing;
    throw ConfigError("unknown x axis '" + name + "'");
}

namespace {

void rescale(ScoreCurve& c, double lo, double hi) {
    for (auto& p : c.points) {
        p.value = hi > lo ? std::clamp((p.value - lo) / (hi - lo), 0.0, 1.0) : 0.5;
    }
    c.normalized = true;
}

}  // namespace

std::vector<ScoreCurve> normalize_curves(std::vector<ScoreCurve> curves, NormalizationScope scope) {
    auto range = [](const ScoreCurve& c, double& lo, double& hi) {
        for (const auto& p : c.points) {
            lo = std::min(lo, p.value);
            hi = std::max(hi, p.value);
        }
    };
    for (const auto& c : curves) {
        if (c.points.empty()) throw Error("cannot normalize an empty curve (" + c.method + ")");
    }
    if (scope == NormalizationScope::per_curve) {
        for (auto& c : curves) {
            double lo = c.points.front().value, hi = lo;
            range(c, lo, hi);
            rescale(c, lo, hi);
        }
        return curves;
    }
    std::map<std::string, std::pair<double, double>> bounds;
    for (const auto& c : curves) {
        auto [it, fresh] = bounds.try_emplace(c.method, c.points.front().value, c.points.front().value);
        range(c, it->second.first, it->second.second);
    }
    for (auto& c : curves) {
        const auto [lo, hi] = bounds.at(c.method);
        rescale(c, lo, hi);
    }
    return curves;
}

double curve_area(const ScoreCurve& curve, XAxis axis) {
    if (curve.points.size() < 2) throw Error("curve area needs at least 2 points (" + curve.method + ")");
    if (!curve.normalized) throw Error("curve area needs a normalized curve (" + curve.method + ")");
    auto pts = curve.points;
    std::sort(pts.begin(), pts.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.target_bytes > b.target_bytes; });
    auto x = [&](std::size_t i) {
        return axis == XAxis::bytes ? static_cast<double>(pts[i].target_bytes) : -static_cast<double>(i);
    };
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        area += (x(i) - x(i + 1)) * (pts[i].value + pts[i + 1].value) / 2.0;
    }
    const double extent = x(0) - x(pts.size() - 1);
    if (!(extent > 0.0)) throw Error("curve area needs distinct target sizes (" + curve.method + ")");
    return area / extent;
}

DistanceCell curve_distance(const ScoreCurve& q, const ScoreCurve& c, TrialKind kind, XAxis axis) {
    if (q.codec != c.codec) throw Error("curve distance across different codecs");
    auto xs = [](const ScoreCurve& s) {
        std::vector<long long> v;
        for (const auto& p : s.points) v.push_back(p.target_bytes);
        std::sort(v.begin(), v.end());
        return v;
    };
    if (xs(q) != xs(c)) {
        throw Error("curve distance: " + q.method + " and " + c.method + " sample different target sizes for " +
                    to_string(q.codec));
    }
    DistanceCell cell;
    cell.kind = kind;
    cell.codec = q.codec;
    cell.method = q.method;
    cell.real = 100.0 * std::abs(curve_area(q, axis) - curve_area(c, axis));
    cell.value = static_cast<int>(text::round_half_away(cell.real));
    return cell;
}

DistanceCell combine_distances(const std::vector<DistanceCell>& cells, const std::vector<CodecId>& codecs) {
    if (codecs.empty()) throw Error("combined distance needs at least one codec");
    if (cells.empty()) throw Error("combined distance needs cells");
    DistanceCell out;
    out.kind = cells.front().kind;
    out.method = cells.front().method;
    double sum = 0.0;
    for (const auto codec : codecs) {
        const auto n = std::count_if(cells.begin(), cells.end(), [&](const DistanceCell& c) {
            return c.codec == codec && c.kind == out.kind && c.method == out.method;
        });
        if (n != 1) {
            throw Error("combined distance for " + out.method + " needs exactly one " + to_string(codec) +
                        " cell, found " + std::to_string(n));
        }
    }
    if (cells.size() != codecs.size()) throw Error("combined distance got cells outside the codec set");
    for (const auto& c : cells) sum += c.real;
    out.real = sum / static_cast<double>(cells.size());
    out.value = static_cast<int>(text::round_half_away(out.real));
    return out;
}

const DistanceCell* DistanceTable::find(TrialKind kind, std::optional<CodecId> codec, const std::string& method) const {
    for (const auto& c : cells) {
        if (c.kind == kind && c.codec == codec && c.method == method) return &c;
    }
    return nullptr;
}

DistanceTable build_distance_table(const std::vector<ScoreCurve>& quality, const std::vector<ScoreCurve>& comparison,
                                   const std::vector<TrialKind>& kinds, const std::vector<CodecId>& codecs,
                                   const std::vector<std::string>& methods, XAxis axis) {
    auto find = [](const std::vector<ScoreCurve>& curves, const std::string& method, CodecId codec) {
        for (const auto& c : curves) {
            if (c.method == method && c.codec == codec) return &c;
        }
        throw Error("no " + method + " curve for " + to_string(codec));
    };
    DistanceTable table{kinds, codecs, methods, {}};
    for (const auto kind : kinds) {
        for (const auto& method : methods) {
            std::vector<DistanceCell> row;
            for (const auto codec : codecs) {
                row.push_back(curve_distance(*find(quality, method, codec), *find(comparison, to_string(kind), codec),
                                             kind, axis));
            }
            const auto combined = combine_distances(row, codecs);
            table.cells.insert(table.cells.end(), row.begin(), row.end());
            table.cells.push_back(combined);
        }
    }
    return table;
}

}  // namespace fcb
