#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "fcb/codecs.hpp"
#include "fcb/error.hpp"
#include "fcb/text.hpp"

namespace fcb {

namespace {

struct CacheEntry {
    int grid_index = 0;
    long long achieved_bytes = 0;
    int out_w = 0;
    int out_h = 0;
};

std::filesystem::path cache_file(const std::filesystem::path& out_root) {
    return out_root / "cache" / "ladder_cache.tsv";
}

std::map<std::string, CacheEntry> load_cache(const std::filesystem::path& out_root) {
    std::map<std::string, CacheEntry> cache;
    const auto file = cache_file(out_root);
    if (!std::filesystem::exists(file)) return cache;
    for (const auto& line : text::lines(text::read_file(file))) {
        const auto f = text::split(line, '\t');
        if (f.size() != 5) continue;
        try {
            cache[f[0]] = {static_cast<int>(text::parse_int(f[1])), text::parse_int(f[2]),
                           static_cast<int>(text::parse_int(f[3])), static_cast<int>(text::parse_int(f[4]))};
        } catch (const ParseError&) {
            // stale or foreign line; recompute that cell
        }
    }
    return cache;
}

void save_cache(const std::filesystem::path& out_root, const std::map<std::string, CacheEntry>& cache) {
    std::ostringstream out;
    for (const auto& [key, e] : cache) {
        out << key << '\t' << e.grid_index << '\t' << e.achieved_bytes << '\t' << e.out_w << '\t'
            << e.out_h << '\n';
    }
    text::write_file(cache_file(out_root), out.str());
}

std::string cell_key(const ImagePlane& image, CodecId codec, const ParamGrid& grid, ByteBudget budget,
                     const SearchOptions& search) {
    text::Fnv1a h;
    h.update_u64(static_cast<std::uint64_t>(image.width()));
    h.update_u64(static_cast<std::uint64_t>(image.height()));
    h.update(image.samples());
    h.update(to_string(codec));
    h.update(grid.descriptor());
    h.update(adapter_for(codec).version());
    h.update_u64(static_cast<std::uint64_t>(budget.target_bytes));
    h.update_u64(search.exhaustive ? 1 : 0);
    return h.hex();
}

bool cell_less(const LadderCell& a, const LadderCell& b) {
    if (a.image_id != b.image_id) return a.image_id < b.image_id;
    if (a.codec != b.codec) return a.codec < b.codec;
    return a.budget.target_bytes > b.budget.target_bytes;
}

}  // namespace

std::size_t LadderReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const auto& c) { return !c.ok(); }));
}

std::filesystem::path cell_path(const std::filesystem::path& out_root, CodecId codec, ByteBudget budget,
                                const std::string& image_id) {
    return out_root / to_string(codec) / std::to_string(budget.target_bytes) /
           (image_id + "." + codec_extension(codec));
}

LadderReport run_ladder(const DatasetManifest& manifest, const std::vector<CodecId>& codecs,
                        const std::vector<ByteBudget>& ladder, const std::filesystem::path& out_root,
                        const LadderOptions& options) {
    auto cache = options.use_cache ? load_cache(out_root) : std::map<std::string, CacheEntry>{};
    std::mutex cache_mutex;

    const auto& records = manifest.records;
    const std::size_t per_image = codecs.size() * ladder.size();
    std::vector<LadderCell> cells(records.size() * per_image);
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t r = next.fetch_add(1);
            if (r >= records.size()) return;
            const auto& rec = records[r];
            std::optional<ImagePlane> image;
            std::string load_error;
            try {
                image = read_image(rec.path);
            } catch (const std::exception& e) {
                load_error = e.what();
            }
            std::size_t slot = r * per_image;
            for (const auto codec : codecs) {
                std::optional<BudgetSearcher> searcher;
                for (const auto budget : ladder) {
                    LadderCell& cell = cells[slot++];
                    cell.image_id = rec.image_id;
                    cell.codec = codec;
                    cell.budget = budget;
                    cell.file = cell_path(out_root, codec, budget, rec.image_id);
                    if (!image) {
                        cell.status = "error: " + load_error;
                        continue;
                    }
                    try {
                        const ParamGrid grid = grid_for(codec, *image);
                        const auto key = cell_key(*image, codec, grid, budget, options.search);
                        std::optional<CacheEntry> hit;
                        {
                            std::lock_guard lock(cache_mutex);
                            if (auto it = cache.find(key); it != cache.end()) hit = it->second;
                        }
                        std::error_code ec;
                        if (hit && std::filesystem::file_size(cell.file, ec) ==
                                       static_cast<std::uintmax_t>(hit->achieved_bytes) && !ec) {
                            cell.chosen_param = grid.at(hit->grid_index);
                            cell.achieved_bytes = hit->achieved_bytes;
                            cell.out_w = hit->out_w;
                            cell.out_h = hit->out_h;
                            cell.status = "ok";
                            continue;
                        }
                        if (!searcher) searcher.emplace(*image, codec, options.search);
                        const auto outcome = searcher->compress(budget);
                        text::write_bytes(cell.file, outcome.payload);
                        cell.chosen_param = outcome.chosen_param;
                        cell.achieved_bytes = outcome.achieved_bytes;
                        cell.out_w = outcome.out_w;
                        cell.out_h = outcome.out_h;
                        cell.status = "ok";
                        std::lock_guard lock(cache_mutex);
                        cache[key] = {outcome.grid_index, outcome.achieved_bytes, outcome.out_w, outcome.out_h};
                    } catch (const std::exception& e) {
                        cell.status = std::string("error: ") + e.what();
                        std::error_code ec;
                        std::filesystem::remove(cell.file, ec);
                    }
                }
            }
        }
    };

    const int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    }
    if (options.use_cache) save_cache(out_root, cache);

    LadderReport report;
    report.cells = std::move(cells);
    std::sort(report.cells.begin(), report.cells.end(), cell_less);
    std::set<CodecId> used(codecs.begin(), codecs.end());
    for (const auto codec : used) {
        report.encoder_versions.push_back(to_string(codec) + "=" + adapter_for(codec).version());
    }
    return report;
}

std::string format_ladder_report(const LadderReport& report) {
    std::ostringstream out;
    out << "# target_bytes unit: 1 kB = 1000 bytes; budgets are inclusive upper limits\n";
    for (const auto& v : report.encoder_versions) out << "# encoder " << v << '\n';
    out << "image_id\tcodec\ttarget_bytes\tchosen_param\tachieved_bytes\tout_w\tout_h\tstatus\n";
    for (const auto& c : report.cells) {
        out << c.image_id << '\t' << to_string(c.codec) << '\t' << c.budget.target_bytes << '\t'
            << (c.chosen_param ? c.chosen_param->to_string() : "") << '\t';
        if (c.ok()) {
            out << c.achieved_bytes << '\t' << c.out_w << '\t' << c.out_h;
        } else {
            out << "\t\t";
        }
        std::string status = c.status;
        std::replace(status.begin(), status.end(), '\t', ' ');
        std::replace(status.begin(), status.end(), '\n', ' ');
        out << '\t' << status << '\n';
    }
    return out.str();
}

LadderReport parse_ladder_report(const std::string& contents, const std::filesystem::path& out_root) {
    LadderReport report;
    std::size_t row = 0;
    bool header = false;
    for (const auto& line : text::lines(contents)) {
        ++row;
        if (line.empty()) continue;
        if (line.starts_with("# encoder ")) {
            report.encoder_versions.push_back(line.substr(10));
            continue;
        }
        if (line.starts_with("#")) continue;
        if (!header) {
            header = true;
            continue;
        }
        const auto f = text::split(line, '\t');
        if (f.size() != 8) throw ParseError("ladder report: expected 8 fields", row);
        LadderCell c;
        c.image_id = f[0];
        c.codec = parse_codec(f[1]);
        c.budget = {text::parse_int(f[2], row)};
        c.status = f[7];
        if (!f[3].empty()) c.chosen_param = CodecParam{c.codec, text::parse_double(f[3], row)};
        if (c.ok()) {
            c.achieved_bytes = text::parse_int(f[4], row);
            c.out_w = static_cast<int>(text::parse_int(f[5], row));
            c.out_h = static_cast<int>(text::parse_int(f[6], row));
        }
        c.file = cell_path(out_root, c.codec, c.budget, c.image_id);
        report.cells.push_back(std::move(c));
    }
    return report;
}

}  // namespace fcb
