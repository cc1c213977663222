#include <algorithm>
#include <set>
#include <sstream>

#include "fcb/analysis.hpp"
#include "fcb/error.hpp"
#include "fcb/text.hpp"
#include "svg.hpp"

namespace fcb {

namespace {

std::string kb_label(long long bytes) { return text::format_double(static_cast<double>(bytes) / 1000.0) + "kB"; }

std::string series_label(const std::string& method) {
    if (method == kSharpness1) return "Sharpness-1";
    if (method == kSharpness2) return "Sharpness-2";
    if (method == "mated_other") return "Mated-other";
    if (method == "mated_self") return "Mated-self";
    if (method == "non_mated") return "Non-mated";
    return method;
}

void stats_rows(std::ostringstream& out, const char* series, const std::vector<SizePointStats>& stats) {
    for (const auto& s : stats) {
        out << series << '\t' << s.method << '\t' << to_string(s.codec) << '\t' << s.target_bytes << '\t' << s.n
            << '\t' << text::format_double(s.mean) << '\t' << text::format_double(s.min) << '\t'
            << text::format_double(s.max) << '\n';
    }
}

std::vector<std::pair<double, std::string>> ticks(const std::set<long long>& sizes) {
    std::vector<std::pair<double, std::string>> out;
    for (auto it = sizes.rbegin(); it != sizes.rend(); ++it) out.emplace_back(static_cast<double>(*it), kb_label(*it));
    return out;
}

bool selected(const ReportOptions& options, CodecId codec) {
    return options.codecs.empty() ||
           std::find(options.codecs.begin(), options.codecs.end(), codec) != options.codecs.end();
}

}  // namespace

std::string format_stats_table(const std::vector<SizePointStats>& quality, const std::vector<SizePointStats>& comparison) {
    std::ostringstream out;
    out << "series\tmethod\tcodec\ttarget_bytes\tn\tmean\tmin\tmax\n";
    stats_rows(out, "quality", quality);
    stats_rows(out, "comparison", comparison);
    return out.str();
}

std::string format_distance_table(const DistanceTable& table) {
    std::ostringstream out;
    out << "trial_kind\tcodec";
    for (const auto& m : table.methods) out << '\t' << m;
    out << '\n';
    for (const auto kind : table.kinds) {
        std::vector<std::optional<CodecId>> rows(table.codecs.begin(), table.codecs.end());
        rows.push_back(std::nullopt);
        for (const auto& codec : rows) {
            out << to_string(kind) << '\t' << (codec ? to_string(*codec) : "combined");
            for (const auto& m : table.methods) {
                const auto* cell = table.find(kind, codec, m);
                out << '\t' << (cell ? std::to_string(cell->value) : "");
            }
            out << '\n';
        }
    }
    return out.str();
}

std::vector<std::filesystem::path> render_report(const ReportInputs& inputs, const std::filesystem::path& out_dir,
                                                 const ReportOptions& options) {
    std::vector<std::filesystem::path> written;
    auto emit = [&](const std::string& name, const std::string& contents) {
        const auto file = out_dir / name;
        try {
            text::write_file(file, contents);
        } catch (const std::exception& e) {
            throw Error("cannot write report file " + file.string() + ": " + e.what());
        }
        written.push_back(file);
    };

    if (options.tables) {
        emit("stats.tsv", format_stats_table(inputs.quality_stats, inputs.comparison_stats));
        if (inputs.table) emit("distance_table.tsv", format_distance_table(*inputs.table));
    }
    if (!options.figures) return written;

    for (const auto codec : kAllCodecs) {
        if (!selected(options, codec)) continue;

        svg::Figure curves;
        curves.title = "Normalized mean scores, " + codec_label(codec);
        curves.x_label = "Target size";
        curves.y_label = "Normalized mean score";
        curves.y_range = std::pair(0.0, 1.0);
        std::set<long long> sizes;
        for (const auto& c : inputs.curves) {
            if (c.codec != codec) continue;
            svg::Series s{series_label(c.method), {}, {}, {}};
            for (const auto& p : c.points) {
                s.line.emplace_back(static_cast<double>(p.target_bytes), p.value);
                sizes.insert(p.target_bytes);
            }
            curves.series.push_back(std::move(s));
        }
        if (!curves.series.empty()) {
            curves.x_ticks = ticks(sizes);
            emit("curves_" + to_string(codec) + ".svg", svg::render(curves));
        }

        svg::Figure scores;
        scores.title = "Comparison scores, " + codec_label(codec);
        scores.x_label = "Target size";
        scores.y_label = "Comparison score";
        sizes.clear();
        std::vector<std::string> order;
        for (const auto& st : inputs.comparison_stats) {
            if (st.codec == codec && std::find(order.begin(), order.end(), st.method) == order.end()) {
                order.push_back(st.method);
            }
        }
        for (const auto& method : order) {
            svg::Series s{series_label(method), {}, {}, {}};
            for (const auto& st : inputs.comparison_stats) {
                if (st.codec != codec || st.method != method) continue;
                const auto x = static_cast<double>(st.target_bytes);
                sizes.insert(st.target_bytes);
                s.line.emplace_back(x, st.mean);
                for (const double v : st.raw_values) s.scatter.emplace_back(x, v);
                s.rhombi.emplace_back(x, st.min);
                s.rhombi.emplace_back(x, st.max);
            }
            scores.series.push_back(std::move(s));
        }
        if (!scores.series.empty()) {
            scores.x_ticks = ticks(sizes);
            emit("scores_" + to_string(codec) + ".svg", svg::render(scores));
        }
    }
    return written;
}

}  // namespace fcb
