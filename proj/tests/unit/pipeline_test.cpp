#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include <json.hpp>

#include "fcb/error.hpp"
#include "fcb/pipeline.hpp"
#include "fcb/synthetic.hpp"
#include "fcb/text.hpp"
#include "support.hpp"

using namespace fcb;
using fcb::testing::TempDir;

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(FCBENCH_EXE) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig toy_config(const TempDir& dir) {
    RunConfig c;
    c.manifest = synth::write_dataset(dir / "data", 3, 2, 4);
    c.out_root = dir / "out";
    c.codecs = {CodecId::png_resized, CodecId::jpeg};
    c.ladder = {{5000}, {2200}};
    return c;
}

}  // namespace

TEST_CASE("config parsing and validation") {
    SUBCASE("defaults follow the ROI experiment") {
        const auto c = parse_config("{}", "/base");
        CHECK(c.codecs.size() == 4);
        CHECK(c.effective_ladder() == roi_ladder());
        CHECK(c.trial_kinds.size() == 3);
        CHECK(c.method_names() == std::vector<std::string>{"sharpness1", "sharpness2"});
        CHECK_FALSE(c.non_mated_count.has_value());
    }
    SUBCASE("portrait variant defaults to the portrait ladder") {
        CHECK(parse_config(R"({"variant": "portrait"})").effective_ladder() == portrait_ladder());
        CHECK(parse_config(R"({"ladder": "extended_roi"})").effective_ladder() == extended_roi_ladder());
    }
    SUBCASE("relative paths resolve against the config directory") {
        const auto c = parse_config(R"({"manifest": "m.tsv", "out_root": "o"})", "/base/dir");
        CHECK(c.manifest == std::filesystem::path("/base/dir/m.tsv"));
        CHECK(c.out_root == std::filesystem::path("/base/dir/o"));
    }
    SUBCASE("plugins") {
        const auto c = parse_config(R"({"fiqa": ["sharpness2", {"name": "crfiqa", "command": "run.sh", "input_size": 112}],
                                       "embedder": {"vectors_file": "v.tsv"}})",
                                    "/b");
        REQUIRE(c.fiqa.size() == 2);
        CHECK(c.fiqa[1].plugin->command == "run.sh");
        CHECK(c.fiqa[1].plugin->input_size == 112);
        CHECK(c.embedder.kind == EmbedderSpec::Kind::plugin);
        CHECK(c.embedder.plugin.file == std::filesystem::path("/b/v.tsv"));
    }
    SUBCASE("invalid configs") {
        for (const char* bad : {R"({"codecs": ["webp"]})", R"({"codecs": []})", R"({"ladder": [2200, 5000]})",
                                R"({"ladder": [5000, 5000]})", R"({"ladder": [5000, 0]})", R"({"colour": 1})",
                                R"({"trial_kinds": []})", R"({"trial_kinds": ["mated"]})", R"({"jobs": 0})",
                                R"({"fiqa": ["sharpness9"]})", R"({"fiqa": ["sharpness1", "sharpness1"]})",
                                R"({"fiqa": [{"name": "mated_self", "command": "x"}]})",
                                R"({"fiqa": [{"name": "p", "command": "x", "scores_file": "y"}]})",
                                R"({"non_mated": {"count": "many"}})", R"({"roi_size": "big"})", "{", "[]"}) {
            CAPTURE(bad);
            CHECK_THROWS_AS(validate_config(parse_config(bad)), ConfigError);
        }
    }
    SUBCASE("the echo re-parses to the same run") {
        auto c = parse_config(R"({"codecs": ["jpeg"], "ladder": [3000, 2000], "non_mated": {"seed": 9, "count": 5},
                                  "fiqa": ["sharpness1", {"name": "p", "scores_file": "s.tsv"}], "keep_raw": 7})",
                              "/x");
        const auto echo = config_to_json(c);
        CHECK(config_to_json(parse_config(echo)) == echo);
        const auto j = nlohmann::json::parse(echo);
        CHECK(j["non_mated"]["seed"] == 9);
        CHECK(j["ladder"][1] == 2000);
    }
}

TEST_CASE("cmd_prep") {
    TempDir dir;
    SUBCASE("ROI alignment writes one 250x250 crop per face") {
        RunConfig c;
        c.manifest = synth::write_dataset(dir / "data", 3, 1, 2, 300, 260);
        c.out_root = dir / "out";
        const auto r = cmd_prep(c);
        CHECK(r.written == 3);
        CHECK(r.skipped.empty());
        const auto m = load_manifest(r.manifest);
        REQUIRE(m.records.size() == 3);
        for (const auto& rec : m.records) {
            const auto img = read_image(rec.path);
            CHECK(img.width() == 250);
            CHECK(img.height() == 250);
        }
    }
    SUBCASE("records without landmarks are skipped and reported") {
        auto m = load_manifest(synth::write_dataset(dir / "data", 2, 1, 2));
        m.records[1].landmarks.reset();
        save_manifest(m, dir / "data" / "partial.tsv");
        RunConfig c;
        c.manifest = dir / "data" / "partial.tsv";
        c.out_root = dir / "out";
        const auto r = cmd_prep(c);
        CHECK(r.written == 1);
        REQUIRE(r.skipped.size() == 1);
        CHECK(r.skipped[0].item == m.records[1].image_id);
    }
    SUBCASE("portrait crops past the border are filled with black") {
        RunConfig c;
        c.manifest = synth::write_dataset(dir / "data", 1, 1, 2);
        c.out_root = dir / "out";
        c.variant = Variant::portrait;
        const auto r = cmd_prep(c);
        REQUIRE(r.written == 1);
        const auto img = read_image(load_manifest(r.manifest).records[0].path);
        CHECK(img.width() > 250);
        for (int y = 0; y < img.height(); y += 3) {
            CHECK(img.at(0, y, 0) == 0);
            CHECK(img.at(img.width() - 1, y, 2) == 0);
        }
        CHECK(load_manifest(r.manifest).variant == Variant::portrait);
    }
}

TEST_CASE("toy run end to end") {
    TempDir dir;
    auto c = toy_config(dir);
    cmd_prep(c);
    const auto report = cmd_run(c);
    const RunLayout layout{c.out_root};

    CHECK(report.failures.empty());
    CHECK(std::filesystem::exists(layout.run_report()));
    CHECK(std::filesystem::exists(layout.compressed_dir() / "jpeg" / "2200" / "s0000_c01.jpg"));
    CHECK(std::filesystem::exists(layout.trials_dir() / "non_mated.tsv"));
    // 3 subjects x 2 captures: 3 mated-other, 6 mated-self, 3 non-mated, per codec and budget.
    CHECK(report.comparisons == (3 + 6 + 3) * 2 * 2);
    CHECK(report.quality_scores == 6 * 2 * 2 * 2);

    const auto table = text::read_file(layout.reports_dir() / "distance_table.tsv");
    const auto rows = text::lines(table);
    CHECK(rows[0] == "trial_kind\tcodec\tsharpness1\tsharpness2");
    CHECK(rows.size() == 1 + 2 * 3);
    for (const auto* svg : {"curves_jpeg.svg", "curves_png_resized.svg", "scores_jpeg.svg"}) {
        CHECK(std::filesystem::exists(layout.reports_dir() / svg));
    }
    const auto rr = nlohmann::json::parse(text::read_file(layout.run_report()));
    CHECK(rr["config"]["non_mated"]["seed"] == 1);
    CHECK(rr.contains("timings_seconds"));

    SUBCASE("table re-renders identical bytes") {
        const auto stats = text::read_file(layout.reports_dir() / "stats.tsv");
        std::filesystem::remove(layout.reports_dir() / "distance_table.tsv");
        cmd_table(c);
        CHECK(text::read_file(layout.reports_dir() / "distance_table.tsv") == table);
        CHECK(text::read_file(layout.reports_dir() / "stats.tsv") == stats);
    }
    SUBCASE("plot selection renders one panel") {
        std::filesystem::remove_all(layout.reports_dir());
        const auto files = cmd_plot(c, {CodecId::jpeg});
        CHECK(files.size() == 2);
        CHECK(std::filesystem::exists(layout.reports_dir() / "curves_jpeg.svg"));
        CHECK_FALSE(std::filesystem::exists(layout.reports_dir() / "curves_png_resized.svg"));
    }
    SUBCASE("rerun reproduces tabular outputs") {
        const auto quality = text::read_file(layout.quality_scores());
        const auto cmp = text::read_file(layout.comparison_scores());
        cmd_run(c);
        CHECK(text::read_file(layout.quality_scores()) == quality);
        CHECK(text::read_file(layout.comparison_scores()) == cmp);
        CHECK(text::read_file(layout.reports_dir() / "distance_table.tsv") == table);
    }
    SUBCASE("missing score store is named") {
        std::filesystem::remove(layout.comparison_scores());
        try {
            cmd_table(c);
            FAIL("expected MissingArtifact");
        } catch (const MissingArtifact& e) {
            CHECK(std::string(e.what()).find("comparisons.tsv") != std::string::npos);
        }
    }
}

TEST_CASE("run without prep output is a missing artifact") {
    TempDir dir;
    auto c = toy_config(dir);
    CHECK_THROWS_AS(cmd_run(c), MissingArtifact);
}

TEST_CASE("score tables round-trip") {
    std::vector<QualityRow> q{{"b", CodecId::jpeg, 2200, "sharpness1", 0.125}, {"a", CodecId::jpegxl, 5000, "p", -1.5}};
    const auto qt = format_quality_rows(q);
    CHECK(format_quality_rows(parse_quality_rows(qt)) == qt);
    std::vector<ComparisonScore> s{{{"a", "b", TrialKind::non_mated, Source::lossy, Source::lossy}, CodecId::jpeg, 3000, 0.25}};
    const auto st = format_comparisons(s);
    CHECK(format_comparisons(parse_comparisons(st)) == st);
    CHECK_THROWS_AS(parse_quality_rows("image_id\tcodec\ttarget_bytes\tmethod\tvalue\na\tjpeg\tx\tm\t1\n"), ParseError);
}

TEST_CASE("command line exit status") {
    TempDir dir;
    CHECK(run_cli("--help") == 0);
    text::write_file(dir / "bad.json", R"({"codecs": ["webp"]})");
    CHECK(run_cli("run --config " + (dir / "bad.json").string()) == 2);
    text::write_file(dir / "missing.json", R"({"manifest": "nope.tsv", "preprocessed": true})");
    CHECK(run_cli("run --config " + (dir / "missing.json").string() + " --out " + (dir / "o").string()) == 1);
    CHECK(run_cli("table --config " + (dir / "missing.json").string() + " --out " + (dir / "o").string()) == 1);
    CHECK(run_cli("synth --out " + (dir / "s").string() + " --subjects 2 --captures 2 --size 64") == 0);
    CHECK(std::filesystem::exists(dir / "s" / "manifest.tsv"));
    CHECK(run_cli("prep --manifest " + (dir / "s" / "manifest.tsv").string() + " --out " + (dir / "p").string()) == 0);
    CHECK(run_cli("run --manifest " + (dir / "s" / "manifest.tsv").string() + " --out " + (dir / "p").string() +
                  " --codecs jpeg --ladder 9000,2600 --seed 3") == 0);
    CHECK(std::filesystem::exists(dir / "p" / "reports" / "distance_table.tsv"));
}
