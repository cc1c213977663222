#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fcb/error.hpp"
#include "fcb/pipeline.hpp"
#include "fcb/text.hpp"

namespace fcb {

namespace {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must not throw.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    const auto threads = static_cast<std::size_t>(std::max(1, jobs));
    if (threads == 1 || n < 2) {
        worker();
        return;
    }
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
}

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string cell_name(const std::string& id, CodecId codec, long long bytes) {
    return id + " " + to_string(codec) + " " + std::to_string(bytes);
}

DatasetManifest prepared_manifest(const RunConfig& config) {
    const RunLayout layout{config.out_root};
    if (config.preprocessed) return load_manifest(config.manifest);
    if (!std::filesystem::exists(layout.prep_manifest())) {
        throw MissingArtifact("prepared manifest " + layout.prep_manifest().string() +
                              " not found; run `fcbench prep` first or set \"preprocessed\": true");
    }
    return load_manifest(layout.prep_manifest());
}

std::vector<ScoreRecord> quality_records(const std::vector<QualityRow>& rows) {
    std::vector<ScoreRecord> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back({r.method, r.codec, r.target_bytes, r.value});
    return out;
}

std::vector<ScoreRecord> comparison_records(const std::vector<ComparisonScore>& rows) {
    std::vector<ScoreRecord> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back({to_string(r.pair.kind), r.codec, r.target_bytes, r.value});
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Score tables

std::string format_quality_rows(std::vector<QualityRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const QualityRow& a, const QualityRow& b) {
        return std::tuple(a.image_id, a.codec, -a.target_bytes, a.method) <
               std::tuple(b.image_id, b.codec, -b.target_bytes, b.method);
    });
    std::ostringstream out;
    out << "image_id\tcodec\ttarget_bytes\tmethod\tvalue\n";
    for (const auto& r : rows) {
        out << r.image_id << '\t' << to_string(r.codec) << '\t' << r.target_bytes << '\t' << r.method << '\t'
            << text::format_double(r.value) << '\n';
    }
    return out.str();
}

std::vector<QualityRow> parse_quality_rows(const std::string& contents) {
    std::vector<QualityRow> rows;
    std::size_t row = 0;
    for (const auto& line : text::lines(contents)) {
        ++row;
        if (row == 1 || line.empty()) continue;
        const auto f = text::split(line, '\t');
        if (f.size() != 5) throw ParseError("quality scores: expected 5 fields", row);
        rows.push_back({f[0], parse_codec(f[1]), text::parse_int(f[2], row), f[3], text::parse_double(f[4], row)});
    }
    return rows;
}

std::string format_comparisons(std::vector<ComparisonScore> scores) {
    std::sort(scores.begin(), scores.end(), [](const ComparisonScore& a, const ComparisonScore& b) {
        return std::tuple(a.pair.kind, a.codec, -a.target_bytes, a.pair) <
               std::tuple(b.pair.kind, b.codec, -b.target_bytes, b.pair);
    });
    std::ostringstream out;
    out << "kind\tcodec\ttarget_bytes\tprobe_id\treference_id\tvalue\n";
    for (const auto& s : scores) {
        out << to_string(s.pair.kind) << '\t' << to_string(s.codec) << '\t' << s.target_bytes << '\t'
            << s.pair.probe_id << '\t' << s.pair.reference_id << '\t' << text::format_double(s.value) << '\n';
    }
    return out.str();
}

std::vector<ComparisonScore> parse_comparisons(const std::string& contents) {
    std::vector<ComparisonScore> out;
    std::size_t row = 0;
    for (const auto& line : text::lines(contents)) {
        ++row;
        if (row == 1 || line.empty()) continue;
        const auto f = text::split(line, '\t');
        if (f.size() != 6) throw ParseError("comparison scores: expected 6 fields", row);
        ComparisonScore s;
        try {
            s.pair.kind = parse_trial_kind(f[0]);
        } catch (const ConfigError& e) {
            throw ParseError(e.what(), row);
        }
        s.pair.probe_id = f[3];
        s.pair.reference_id = f[4];
        if (s.pair.kind == TrialKind::mated_self) s.pair.probe_source = Source::lossless;
        s.codec = parse_codec(f[1]);
        s.target_bytes = text::parse_int(f[2], row);
        s.value = text::parse_double(f[5], row);
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Analysis

ReportInputs analyze(const RunConfig& config, const std::vector<QualityRow>& quality,
                     const std::vector<ComparisonScore>& comparisons, const std::vector<CodecId>& codecs,
                     std::vector<Failure>* failures) {
    ReportInputs in;
    in.quality_stats = aggregate(quality_records(quality), config.keep_raw);
    in.comparison_stats = aggregate(comparison_records(comparisons), config.keep_raw);

    auto curves = mean_curves(in.quality_stats);
    const auto comparison_curves = mean_curves(in.comparison_stats);
    const std::size_t n_quality = curves.size();
    curves.insert(curves.end(), comparison_curves.begin(), comparison_curves.end());
    curves = normalize_curves(std::move(curves), config.normalization);

    // Legend order: configured quality methods, then trial kinds.
    std::map<std::string, int> rank;
    for (const auto& m : config.method_names()) rank.emplace(m, static_cast<int>(rank.size()));
    for (const auto k : config.trial_kinds) rank.emplace(to_string(k), static_cast<int>(rank.size()));
    in.curves = curves;
    std::stable_sort(in.curves.begin(), in.curves.end(), [&](const ScoreCurve& a, const ScoreCurve& b) {
        const auto ra = rank.count(a.method) ? rank.at(a.method) : static_cast<int>(rank.size());
        const auto rb = rank.count(b.method) ? rank.at(b.method) : static_cast<int>(rank.size());
        return std::tuple(ra, a.method, a.codec) < std::tuple(rb, b.method, b.codec);
    });

    std::vector<TrialKind> kinds;
    for (const auto k : config.trial_kinds) {
        if (k != TrialKind::non_mated) kinds.push_back(k);
    }
    const auto methods = config.method_names();
    if (!kinds.empty() && !methods.empty() && !codecs.empty()) {
        const std::vector<ScoreCurve> q(curves.begin(), curves.begin() + static_cast<std::ptrdiff_t>(n_quality));
        const std::vector<ScoreCurve> c(curves.begin() + static_cast<std::ptrdiff_t>(n_quality), curves.end());
        try {
            in.table = build_distance_table(q, c, kinds, codecs, methods, config.x_axis);
        } catch (const Error& e) {
            if (failures) failures->push_back({"analysis", "distance table", e.what()});
        }
    }
    return in;
}

// ---------------------------------------------------------------------------
// prep

PrepResult cmd_prep(const RunConfig& config) {
    validate_config(config);
    const RunLayout layout{config.out_root};
    const auto manifest = load_manifest(config.manifest);
    const auto& recs = manifest.records;

    std::vector<std::optional<ImageRecord>> prepared(recs.size());
    std::vector<std::optional<Failure>> skipped(recs.size());
    parallel_for(recs.size(), config.jobs, [&](std::size_t i) {
        const auto& r = recs[i];
        try {
            if (!r.landmarks) throw GeometryError("record has no landmarks");
            const auto image = read_image(r.path);
            const auto out = config.variant == Variant::roi ? align_to_roi(image, *r.landmarks, config.roi_size)
                                                            : crop_portrait(image, *r.landmarks, config.portrait);
            const auto file = layout.prep_dir() / "images" / (r.image_id + ".png");
            write_png(out, file);
            prepared[i] = ImageRecord{r.image_id, r.subject_id, r.capture_id, file, std::nullopt};
        } catch (const Error& e) {
            skipped[i] = Failure{"prep", r.image_id, e.what()};
        }
    });

    PrepResult result;
    DatasetManifest out;
    out.variant = config.variant;
    for (std::size_t i = 0; i < recs.size(); ++i) {
        if (prepared[i]) out.records.push_back(std::move(*prepared[i]));
        if (skipped[i]) result.skipped.push_back(std::move(*skipped[i]));
    }
    result.written = out.records.size();
    if (out.records.empty()) throw Error("prep produced no images");
    save_manifest(out, layout.prep_manifest());
    result.manifest = layout.prep_manifest();
    return result;
}

// ---------------------------------------------------------------------------
// run

std::vector<TrialSet> generate_trials(const RunConfig& config, const DatasetManifest& manifest,
                                     std::vector<Failure>& failures) {
    const auto mated_other = generate_mated_other(manifest);
    std::vector<TrialSet> sets;
    for (const auto kind : config.trial_kinds) {
        try {
            switch (kind) {
                case TrialKind::mated_other: sets.push_back(mated_other); break;
                case TrialKind::mated_self: sets.push_back(generate_mated_self(manifest)); break;
                case TrialKind::non_mated:
                    sets.push_back(generate_non_mated(manifest, config.non_mated_count.value_or(mated_other.pairs.size()),
                                                      config.non_mated_seed));
                    break;
            }
        } catch (const SampleError& e) {
            failures.push_back({"trials", to_string(kind), e.what()});
        }
    }
    return sets;
}

RunReport cmd_run(const RunConfig& config) {
    validate_config(config);
    const RunLayout layout{config.out_root};
    RunReport report;
    report.config_json = config_to_json(config);
    Stopwatch clock;
    auto fail = [&](std::string stage, std::string item, std::string message) {
        report.failures.push_back({std::move(stage), std::move(item), std::move(message)});
    };

    auto manifest = prepared_manifest(config);
    std::sort(manifest.records.begin(), manifest.records.end(),
              [](const ImageRecord& a, const ImageRecord& b) { return a.image_id < b.image_id; });
    const auto ladder = config.effective_ladder();
    report.timings.push_back({"load", clock.lap()});

    // compress
    LadderOptions lopts;
    lopts.search.exhaustive = config.exhaustive_search;
    lopts.jobs = config.jobs;
    lopts.use_cache = config.use_cache;
    const auto lr = run_ladder(manifest, config.codecs, ladder, layout.compressed_dir(), lopts);
    text::write_file(layout.ladder_report(), format_ladder_report(lr));
    report.encoder_versions = lr.encoder_versions;
    for (const auto& c : lr.cells) {
        if (!c.ok()) fail("compress", cell_name(c.image_id, c.codec, c.budget.target_bytes), c.status);
    }
    report.timings.push_back({"compress", clock.lap()});

    // decode, built-in quality metrics, toy embeddings
    const bool plugin_fiqa = std::any_of(config.fiqa.begin(), config.fiqa.end(), [](const auto& m) { return m.plugin.has_value(); });
    const bool toy = config.embedder.kind == EmbedderSpec::Kind::toy;
    const bool plugin_embed = config.embedder.kind == EmbedderSpec::Kind::plugin;
    const bool need_files = plugin_fiqa || plugin_embed;
    const bool need_lossless = std::find(config.trial_kinds.begin(), config.trial_kinds.end(), TrialKind::mated_self) !=
                               config.trial_kinds.end();

    std::vector<const LadderCell*> cells;
    for (const auto& c : lr.cells) {
        if (c.ok()) cells.push_back(&c);
    }
    struct Decoded {
        std::vector<QualityRow> quality;
        std::optional<Eigen::VectorXd> embedding;
        std::filesystem::path file;
        std::vector<Failure> failures;
    };
    std::vector<Decoded> decoded(cells.size());
    parallel_for(cells.size(), config.jobs, [&](std::size_t i) {
        const auto& c = *cells[i];
        auto& d = decoded[i];
        const auto name = cell_name(c.image_id, c.codec, c.budget.target_bytes);
        try {
            const auto image = decode(text::read_bytes(c.file), c.codec);
            for (const auto& m : config.fiqa) {
                if (m.plugin) continue;
                try {
                    d.quality.push_back({c.image_id, c.codec, c.budget.target_bytes, m.name,
                                         score_builtin(m.name, c.image_id, image).value});
                } catch (const Error& e) {
                    d.failures.push_back({"quality", name + " " + m.name, e.what()});
                }
            }
            if (toy) d.embedding = toy_embed(image);
            if (need_files) {
                d.file = layout.decoded_dir() / to_string(c.codec) / std::to_string(c.budget.target_bytes) /
                         (c.image_id + ".png");
                write_png(image, d.file, 1);
            }
        } catch (const Error& e) {
            d.failures.push_back({"decode", name, e.what()});
        }
    });

    std::vector<QualityRow> quality;
    EmbeddingStore store;
    std::vector<std::filesystem::path> decoded_files;
    std::map<std::filesystem::path, EmbeddingKey> key_of_file;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        auto& d = decoded[i];
        const auto& c = *cells[i];
        quality.insert(quality.end(), d.quality.begin(), d.quality.end());
        for (auto& f : d.failures) report.failures.push_back(std::move(f));
        const auto key = EmbeddingKey::lossy(c.image_id, c.codec, c.budget);
        if (d.embedding) store.add(key, std::move(*d.embedding));
        if (!d.file.empty()) {
            decoded_files.push_back(d.file);
            key_of_file.emplace(d.file, key);
        }
    }
    decoded.clear();
    report.timings.push_back({"decode", clock.lap()});

    // quality plugins
    for (const auto& m : config.fiqa) {
        if (!m.plugin) continue;
        const auto scores = score_with_plugin({m.name, *m.plugin}, decoded_files);
        for (const auto& s : scores) {
            const auto& key = key_of_file.at(s.path);
            if (s.value) {
                quality.push_back({key.image_id, *key.codec, key.target_bytes, m.name, *s.value});
            } else {
                fail("quality", cell_name(key.image_id, *key.codec, key.target_bytes) + " " + m.name, s.error);
            }
        }
    }
    report.quality_scores = quality.size();
    text::write_file(layout.quality_scores(), format_quality_rows(quality));
    report.timings.push_back({"quality", clock.lap()});

    // embeddings
    if (toy && need_lossless) {
        std::vector<std::optional<Eigen::VectorXd>> lossless(manifest.records.size());
        std::vector<std::string> errors(manifest.records.size());
        parallel_for(manifest.records.size(), config.jobs, [&](std::size_t i) {
            try {
                lossless[i] = toy_embed(read_image(manifest.records[i].path));
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        });
        for (std::size_t i = 0; i < lossless.size(); ++i) {
            const auto& id = manifest.records[i].image_id;
            if (lossless[i]) store.add(EmbeddingKey::lossless(id), std::move(*lossless[i]));
            else fail("embed", id + " lossless", errors[i]);
        }
    } else if (plugin_embed) {
        auto files = decoded_files;
        if (need_lossless) {
            for (const auto& r : manifest.records) {
                files.push_back(r.path);
                key_of_file.emplace(r.path, EmbeddingKey::lossless(r.image_id));
            }
        }
        for (auto& e : embed_with_plugin(config.embedder.plugin, files)) {
            const auto& key = key_of_file.at(e.path);
            const auto name = key.codec ? cell_name(key.image_id, *key.codec, key.target_bytes) : key.image_id + " lossless";
            if (!e.vector) {
                fail("embed", name, e.error);
                continue;
            }
            try {
                store.add(key, std::move(*e.vector));
            } catch (const Error& err) {
                fail("embed", name, err.what());
            }
        }
    } else if (config.embedder.kind == EmbedderSpec::Kind::precomputed) {
        store = EmbeddingStore::parse(text::read_file(config.embedder.store));
    }
    text::write_file(layout.embeddings(), store.format());
    report.timings.push_back({"embed", clock.lap()});

    // trials
    const auto sets = generate_trials(config, manifest, report.failures);
    for (const auto& set : sets) {
        text::write_file(layout.trials_dir() / (to_string(set.kind) + ".tsv"), format_trial_set(set));
    }
    std::vector<ComparisonScore> comparisons;
    for (const auto& set : sets) {
        for (const auto codec : config.codecs) {
            for (const auto budget : ladder) {
                auto scored = score_trials(set, store, codec, budget);
                comparisons.insert(comparisons.end(), scored.scores.begin(), scored.scores.end());
                for (const auto& f : scored.failures) {
                    fail("compare", to_string(f.pair.kind) + " " + f.pair.probe_id + " " + f.pair.reference_id + " " +
                                        to_string(codec) + " " + std::to_string(budget.target_bytes),
                         f.message);
                }
            }
        }
    }
    report.comparisons = comparisons.size();
    text::write_file(layout.comparison_scores(), format_comparisons(comparisons));
    report.timings.push_back({"compare", clock.lap()});

    // analysis
    const auto inputs = analyze(config, quality, comparisons, config.codecs, &report.failures);
    report.outputs = {layout.ladder_report(), layout.quality_scores(), layout.embeddings(), layout.comparison_scores()};
    for (const auto& f : render_report(inputs, layout.reports_dir())) report.outputs.push_back(f);
    report.timings.push_back({"analysis", clock.lap()});
    report.outputs.push_back(layout.run_report());
    text::write_file(layout.run_report(), report.to_json());
    return report;
}

std::string RunReport::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = nlohmann::json::parse(config_json);
    j["encoder_versions"] = encoder_versions;
    j["timings_seconds"] = nlohmann::ordered_json::object();
    for (const auto& t : timings) j["timings_seconds"][t.stage] = t.seconds;
    j["quality_scores"] = quality_scores;
    j["comparison_scores"] = comparisons;
    j["failure_count"] = failures.size();
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& f : failures) j["failures"].push_back({{"stage", f.stage}, {"item", f.item}, {"message", f.message}});
    j["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : outputs) j["outputs"].push_back(o.string());
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// table / plot

namespace {

ReportInputs reload(const RunConfig& config, const std::vector<CodecId>& selection) {
    const RunLayout layout{config.out_root};
    for (const auto& f : {layout.quality_scores(), layout.comparison_scores()}) {
        if (!std::filesystem::exists(f)) throw MissingArtifact("score store " + f.string() + " not found; run `fcbench run` first");
    }
    const auto quality = parse_quality_rows(text::read_file(layout.quality_scores()));
    const auto comparisons = parse_comparisons(text::read_file(layout.comparison_scores()));
    for (const auto codec : selection) {
        if (std::find(config.codecs.begin(), config.codecs.end(), codec) == config.codecs.end()) {
            throw ConfigError("codec " + to_string(codec) + " is not part of this run");
        }
    }
    return analyze(config, quality, comparisons, selection.empty() ? config.codecs : selection);
}

}  // namespace

std::vector<std::filesystem::path> cmd_table(const RunConfig& config, const std::vector<CodecId>& selection) {
    validate_config(config);
    ReportOptions options;
    options.figures = false;
    return render_report(reload(config, selection), RunLayout{config.out_root}.reports_dir(), options);
}

std::vector<std::filesystem::path> cmd_plot(const RunConfig& config, const std::vector<CodecId>& selection) {
    validate_config(config);
    ReportOptions options;
    options.tables = false;
    options.codecs = selection;
    return render_report(reload(config, selection), RunLayout{config.out_root}.reports_dir(), options);
}

}  // namespace fcb
