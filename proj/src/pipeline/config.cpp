#include <algorithm>
#include <set>

#include <json.hpp>

#include "fcb/error.hpp"
#include "fcb/pipeline.hpp"
#include "fcb/text.hpp"

namespace fcb {

using nlohmann::json;

std::vector<ByteBudget> RunConfig::effective_ladder() const {
    if (!ladder.empty()) return ladder;
    return variant == Variant::portrait ? portrait_ladder() : roi_ladder();
}

std::vector<std::string> RunConfig::method_names() const {
    std::vector<std::string> out;
    for (const auto& m : fiqa) out.push_back(m.name);
    return out;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) path = base / path;
    return path.lexically_normal();
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

template <typename T>
T get(const json& j, const std::string& what) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("invalid value for " + what + ": " + j.dump());
    }
}

PluginSource parse_plugin(const json& j, const std::filesystem::path& base, const std::string& where) {
    check_keys(j, {"name", "command", "scores_file", "vectors_file", "input_size"}, where);
    PluginSource src;
    if (j.contains("command")) src.command = get<std::string>(j["command"], where + ".command");
    for (const char* key : {"scores_file", "vectors_file"}) {
        if (j.contains(key)) src.file = resolve(base, get<std::string>(j[key], where + "." + key));
    }
    if (j.contains("input_size")) src.input_size = get<int>(j["input_size"], where + ".input_size");
    if (src.command.empty() == src.file.empty()) {
        throw ConfigError(where + " needs exactly one of 'command' or a precomputed file");
    }
    return src;
}

json plugin_json(const PluginSource& src, const char* file_key) {
    json j = json::object();
    if (!src.command.empty()) j["command"] = src.command;
    if (!src.file.empty()) j[file_key] = src.file.string();
    if (src.input_size) j["input_size"] = *src.input_size;
    return j;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j,
               {"manifest", "variant", "out_root", "codecs", "ladder", "trial_kinds", "non_mated", "fiqa", "embedder",
                "normalization", "x_axis", "jobs", "exhaustive_search", "use_cache", "roi_size", "portrait",
                "preprocessed", "keep_raw"},
               "config");
    RunConfig c;
    if (j.contains("manifest")) c.manifest = resolve(base_dir, get<std::string>(j["manifest"], "manifest"));
    if (j.contains("variant")) {
        try {
            c.variant = parse_variant(get<std::string>(j["variant"], "variant"));
        } catch (const ParseError& e) {
            throw ConfigError(e.what());
        }
    }
    if (j.contains("out_root")) c.out_root = resolve(base_dir, get<std::string>(j["out_root"], "out_root"));
    else c.out_root = resolve(base_dir, c.out_root.string());
    if (j.contains("codecs")) {
        c.codecs.clear();
        for (const auto& name : get<std::vector<std::string>>(j["codecs"], "codecs")) c.codecs.push_back(parse_codec(name));
    }
    if (j.contains("ladder")) {
        const auto& l = j["ladder"];
        if (l.is_string()) {
            const auto name = l.get<std::string>();
            if (name == "roi") c.ladder = roi_ladder();
            else if (name == "extended_roi") c.ladder = extended_roi_ladder();
            else if (name == "portrait") c.ladder = portrait_ladder();
            else throw ConfigError("unknown ladder name '" + name + "'");
        } else {
            for (const auto b : get<std::vector<long long>>(l, "ladder")) c.ladder.push_back({b});
        }
    }
    if (j.contains("trial_kinds")) {
        c.trial_kinds.clear();
        for (const auto& k : get<std::vector<std::string>>(j["trial_kinds"], "trial_kinds")) {
            c.trial_kinds.push_back(parse_trial_kind(k));
        }
    }
    if (j.contains("non_mated")) {
        const auto& nm = j["non_mated"];
        check_keys(nm, {"seed", "count"}, "non_mated");
        if (nm.contains("seed")) c.non_mated_seed = get<std::uint64_t>(nm["seed"], "non_mated.seed");
        if (nm.contains("count")) {
            const auto& n = nm["count"];
            if (n.is_string()) {
                if (n.get<std::string>() != "equal_to_mated_other") {
                    throw ConfigError("non_mated.count must be an integer or \"equal_to_mated_other\"");
                }
            } else {
                c.non_mated_count = get<std::size_t>(n, "non_mated.count");
            }
        }
    }
    if (j.contains("fiqa")) {
        c.fiqa.clear();
        for (const auto& m : j["fiqa"]) {
            if (m.is_string()) {
                c.fiqa.push_back({m.get<std::string>(), std::nullopt});
            } else {
                if (!m.contains("name")) throw ConfigError("fiqa plugin entry needs a name");
                const auto name = get<std::string>(m["name"], "fiqa.name");
                c.fiqa.push_back({name, parse_plugin(m, base_dir, "fiqa '" + name + "'")});
            }
        }
    }
    if (j.contains("embedder")) {
        const auto& e = j["embedder"];
        if (e.is_string()) {
            if (e.get<std::string>() != "toy") throw ConfigError("embedder must be \"toy\" or an object");
            c.embedder.kind = EmbedderSpec::Kind::toy;
        } else if (e.contains("store")) {
            check_keys(e, {"store"}, "embedder");
            c.embedder.kind = EmbedderSpec::Kind::precomputed;
            c.embedder.store = resolve(base_dir, get<std::string>(e["store"], "embedder.store"));
        } else {
            c.embedder.kind = EmbedderSpec::Kind::plugin;
            c.embedder.plugin = parse_plugin(e, base_dir, "embedder");
        }
    }
    if (j.contains("normalization")) c.normalization = parse_normalization(get<std::string>(j["normalization"], "normalization"));
    if (j.contains("x_axis")) c.x_axis = parse_x_axis(get<std::string>(j["x_axis"], "x_axis"));
    if (j.contains("jobs")) c.jobs = get<int>(j["jobs"], "jobs");
    if (j.contains("exhaustive_search")) c.exhaustive_search = get<bool>(j["exhaustive_search"], "exhaustive_search");
    if (j.contains("use_cache")) c.use_cache = get<bool>(j["use_cache"], "use_cache");
    if (j.contains("roi_size")) c.roi_size = get<int>(j["roi_size"], "roi_size");
    if (j.contains("portrait")) {
        const auto& p = j["portrait"];
        check_keys(p, {"width_per_ied", "height_per_emd", "eye_line_fraction"}, "portrait");
        if (p.contains("width_per_ied")) c.portrait.width_per_ied = get<double>(p["width_per_ied"], "portrait.width_per_ied");
        if (p.contains("height_per_emd")) c.portrait.height_per_emd = get<double>(p["height_per_emd"], "portrait.height_per_emd");
        if (p.contains("eye_line_fraction")) {
            c.portrait.eye_line_fraction = get<double>(p["eye_line_fraction"], "portrait.eye_line_fraction");
        }
    }
    if (j.contains("preprocessed")) c.preprocessed = get<bool>(j["preprocessed"], "preprocessed");
    if (j.contains("keep_raw") && !j["keep_raw"].is_null()) c.keep_raw = get<std::size_t>(j["keep_raw"], "keep_raw");
    validate_config(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& file) {
    return parse_config(text::read_file(file), std::filesystem::absolute(file).parent_path());
}

void validate_config(const RunConfig& c) {
    if (c.codecs.empty()) throw ConfigError("at least one codec is required");
    if (std::set<CodecId>(c.codecs.begin(), c.codecs.end()).size() != c.codecs.size()) {
        throw ConfigError("codecs must not repeat");
    }
    if (c.trial_kinds.empty()) throw ConfigError("at least one trial kind is required");
    if (std::set<TrialKind>(c.trial_kinds.begin(), c.trial_kinds.end()).size() != c.trial_kinds.size()) {
        throw ConfigError("trial kinds must not repeat");
    }
    const auto ladder = c.effective_ladder();
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        if (ladder[i].target_bytes <= 0) throw ConfigError("ladder budgets must be positive");
        if (i && !(ladder[i].target_bytes < ladder[i - 1].target_bytes)) {
            throw ConfigError("ladder must be strictly decreasing");
        }
    }
    std::set<std::string> names;
    for (const auto& m : c.fiqa) {
        if (m.name.empty()) throw ConfigError("quality method names must be non-empty");
        if (!names.insert(m.name).second) throw ConfigError("quality method '" + m.name + "' listed twice");
        if (!m.plugin && !is_builtin_metric(m.name)) {
            throw ConfigError("unknown built-in quality metric '" + m.name + "' (plugins need a command or scores_file)");
        }
        for (const auto k : {TrialKind::mated_other, TrialKind::mated_self, TrialKind::non_mated}) {
            if (m.name == to_string(k)) throw ConfigError("quality method name '" + m.name + "' is reserved");
        }
        if (m.name.find_first_of("\t\n") != std::string::npos) {
            throw ConfigError("quality method name must not contain tabs or newlines");
        }
    }
    if (c.jobs < 1) throw ConfigError("jobs must be >= 1");
    if (c.roi_size < 8) throw ConfigError("roi_size must be >= 8");
    if (!(c.portrait.width_per_ied > 0) || !(c.portrait.height_per_emd > 0) ||
        !(c.portrait.eye_line_fraction >= 0 && c.portrait.eye_line_fraction <= 1)) {
        throw ConfigError("portrait geometry out of range");
    }
    if (c.non_mated_count && *c.non_mated_count == 0) throw ConfigError("non_mated.count must be positive");
}

std::string config_to_json(const RunConfig& c) {
    // Empty paths stay empty; absolute("") is an error.
    auto abs = [](const std::filesystem::path& p) {
        return p.empty() ? std::string() : std::filesystem::absolute(p).lexically_normal().string();
    };
    json j;
    j["manifest"] = abs(c.manifest);
    j["variant"] = to_string(c.variant);
    j["out_root"] = abs(c.out_root);
    j["codecs"] = json::array();
    for (const auto codec : c.codecs) j["codecs"].push_back(to_string(codec));
    j["ladder"] = json::array();
    for (const auto b : c.effective_ladder()) j["ladder"].push_back(b.target_bytes);
    j["trial_kinds"] = json::array();
    for (const auto k : c.trial_kinds) j["trial_kinds"].push_back(to_string(k));
    j["non_mated"]["seed"] = c.non_mated_seed;
    if (c.non_mated_count) {
        j["non_mated"]["count"] = *c.non_mated_count;
    } else {
        j["non_mated"]["count"] = "equal_to_mated_other";
    }
    j["fiqa"] = json::array();
    for (const auto& m : c.fiqa) {
        if (!m.plugin) {
            j["fiqa"].push_back(m.name);
        } else {
            auto p = plugin_json(*m.plugin, "scores_file");
            p["name"] = m.name;
            j["fiqa"].push_back(p);
        }
    }
    switch (c.embedder.kind) {
        case EmbedderSpec::Kind::toy: j["embedder"] = "toy"; break;
        case EmbedderSpec::Kind::plugin: j["embedder"] = plugin_json(c.embedder.plugin, "vectors_file"); break;
        case EmbedderSpec::Kind::precomputed: j["embedder"]["store"] = c.embedder.store.string(); break;
    }
    j["normalization"] = to_string(c.normalization);
    j["x_axis"] = to_string(c.x_axis);
    j["jobs"] = c.jobs;
    j["exhaustive_search"] = c.exhaustive_search;
    j["use_cache"] = c.use_cache;
    j["roi_size"] = c.roi_size;
    j["portrait"] = {{"width_per_ied", c.portrait.width_per_ied},
                     {"height_per_emd", c.portrait.height_per_emd},
                     {"eye_line_fraction", c.portrait.eye_line_fraction}};
    j["preprocessed"] = c.preprocessed;
    j["keep_raw"] = c.keep_raw ? json(*c.keep_raw) : json(nullptr);
    return j.dump(2);
}

}  // namespace fcb
