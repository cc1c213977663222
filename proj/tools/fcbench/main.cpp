#include <iostream>

#include <CLI11.hpp>

#include "fcb/error.hpp"
#include "fcb/pipeline.hpp"
#include "fcb/synthetic.hpp"
#include "fcb/text.hpp"

namespace {

struct Overrides {
    std::string config;
    std::string manifest;
    std::string out;
    std::string codecs;
    std::string ladder;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string variant;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON run configuration");
    cmd->add_option("--manifest", o.manifest, "Dataset manifest (overrides the config)");
    cmd->add_option("--out", o.out, "Output root (overrides the config)");
    cmd->add_option("--codecs", o.codecs, "Comma-separated codec names");
    cmd->add_option("--ladder", o.ladder, "Comma-separated byte budgets, or roi / extended_roi / portrait");
    cmd->add_option("--seed", o.seed, "Non-mated sampling seed");
    cmd->add_option("--jobs", o.jobs, "Parallelism limit");
    cmd->add_option("--variant", o.variant, "roi or portrait");
}

std::vector<fcb::CodecId> parse_codec_list(const std::string& s) {
    std::vector<fcb::CodecId> out;
    for (const auto& name : fcb::text::split(s, ',')) out.push_back(fcb::parse_codec(std::string(fcb::text::trim(name))));
    return out;
}

// For table/plot, --codecs selects outputs instead of redefining the run.
fcb::RunConfig build_config(const Overrides& o, bool codecs_define_run) {
    fcb::RunConfig c;
    if (!o.config.empty()) c = fcb::load_config(o.config);
    if (!o.manifest.empty()) c.manifest = o.manifest;
    if (!o.out.empty()) c.out_root = o.out;
    if (!o.variant.empty()) {
        try {
            c.variant = fcb::parse_variant(o.variant);
        } catch (const fcb::ParseError& e) {
            throw fcb::ConfigError(e.what());
        }
    }
    if (codecs_define_run && !o.codecs.empty()) c.codecs = parse_codec_list(o.codecs);
    if (!o.ladder.empty()) {
        if (o.ladder == "roi") c.ladder = fcb::roi_ladder();
        else if (o.ladder == "extended_roi") c.ladder = fcb::extended_roi_ladder();
        else if (o.ladder == "portrait") c.ladder = fcb::portrait_ladder();
        else {
            c.ladder.clear();
            for (const auto& b : fcb::text::split(o.ladder, ',')) {
                try {
                    c.ladder.push_back({fcb::text::parse_int(b)});
                } catch (const fcb::ParseError&) {
                    throw fcb::ConfigError("--ladder: '" + b + "' is not a byte count");
                }
            }
        }
    }
    if (o.seed) c.non_mated_seed = *o.seed;
    if (o.jobs) c.jobs = *o.jobs;
    fcb::validate_config(c);
    return c;
}

void print_failures(const std::vector<fcb::Failure>& failures) {
    constexpr std::size_t kShown = 20;
    for (std::size_t i = 0; i < failures.size() && i < kShown; ++i) {
        std::cerr << "  [" << failures[i].stage << "] " << failures[i].item << ": " << failures[i].message << '\n';
    }
    if (failures.size() > kShown) std::cerr << "  ... " << failures.size() - kShown << " more\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Face-image compression benchmark: byte-budget compression, quality scoring, comparison trials"};
    app.require_subcommand(1);

    Overrides o;
    auto* prep = app.add_subcommand("prep", "Align (roi) or crop (portrait) the manifest images");
    auto* run = app.add_subcommand("run", "Compress, score, compare and analyze");
    auto* table = app.add_subcommand("table", "Re-render tables from stored scores");
    auto* plot = app.add_subcommand("plot", "Re-render figures from stored scores");
    for (auto* cmd : {prep, run, table, plot}) add_common(cmd, o);

    auto* synth = app.add_subcommand("synth", "Write a synthetic face dataset with landmarks");
    std::string synth_out;
    int subjects = 10, captures = 2, size = 250;
    std::uint64_t synth_seed = 1;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--subjects", subjects, "Number of subjects")->check(CLI::PositiveNumber);
    synth->add_option("--captures", captures, "Captures per subject")->check(CLI::PositiveNumber);
    synth->add_option("--size", size, "Image side in pixels")->check(CLI::Range(16, 4096));
    synth->add_option("--seed", synth_seed, "Generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const auto manifest = fcb::synth::write_dataset(synth_out, subjects, captures, synth_seed, size, size);
            std::cout << "wrote " << subjects * captures << " images; manifest " << manifest.string() << '\n';
            return 0;
        }
        const auto config = build_config(o, prep->parsed() || run->parsed());
        if (prep->parsed()) {
            const auto r = fcb::cmd_prep(config);
            std::cout << "prepared " << r.written << " images; manifest " << r.manifest.string() << '\n';
            if (!r.skipped.empty()) {
                std::cerr << r.skipped.size() << " records skipped:\n";
                print_failures(r.skipped);
            }
        } else if (run->parsed()) {
            const auto r = fcb::cmd_run(config);
            for (const auto& t : r.timings) std::cout << t.stage << ": " << fcb::text::format_fixed(t.seconds, 1) << " s\n";
            std::cout << r.quality_scores << " quality scores, " << r.comparisons << " comparison scores\n";
            std::cout << "report: " << fcb::RunLayout{config.out_root}.run_report().string() << '\n';
            if (!r.failures.empty()) {
                std::cerr << r.failures.size() << " per-item failures:\n";
                print_failures(r.failures);
            }
        } else {
            std::vector<fcb::CodecId> selection;
            if (!o.codecs.empty()) selection = parse_codec_list(o.codecs);
            const auto files = table->parsed() ? fcb::cmd_table(config, selection) : fcb::cmd_plot(config, selection);
            for (const auto& f : files) std::cout << f.string() << '\n';
        }
    } catch (const fcb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
