#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "fcb/error.hpp"
#include "fcb/fiqa.hpp"
#include "fcb/imgcore.hpp"
#include "fcb/text.hpp"

namespace fcb {

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (const char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    return out + "'";
}

/// mkdtemp-backed directory removed on scope exit.
class TempDir {
public:
    TempDir() {
        auto pattern = (std::filesystem::temp_directory_path() / "fcb-plugin-XXXXXX").string();
        if (!::mkdtemp(pattern.data())) throw PluginError("cannot create a temporary directory");
        path_ = pattern;
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::string run_command(const std::string& command, const std::filesystem::path& stdin_file) {
    const std::string full = "(" + command + ") < " + shell_quote(stdin_file.string());
    FILE* pipe = ::popen(full.c_str(), "r");
    if (!pipe) throw PluginError("cannot launch plugin command: " + command);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
    const int status = ::pclose(pipe);
    if (status == -1 || !WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        const int code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
        throw PluginError("plugin command failed (exit status " + std::to_string(code) + "): " + command);
    }
    return out;
}

}  // namespace

std::vector<PluginField> run_plugin(const PluginSource& source, const std::vector<std::filesystem::path>& images) {
    if (source.command.empty() == source.file.empty()) {
        throw ConfigError("plugin needs exactly one of a command or a precomputed file");
    }
    std::vector<PluginField> fields;
    fields.reserve(images.size());
    // Echoed path -> request slot.
    std::map<std::string, std::size_t> slot;

    std::string output;
    std::optional<TempDir> scratch;
    if (!source.command.empty()) {
        std::string list;
        if (source.input_size) {
            if (*source.input_size < 1) throw ConfigError("plugin input size must be positive");
            scratch.emplace();
        }
        for (std::size_t i = 0; i < images.size(); ++i) {
            const auto original = std::filesystem::absolute(images[i]).lexically_normal();
            fields.push_back({images[i], std::nullopt, {}});
            auto sent = original;
            if (scratch) {
                sent = scratch->path() / (std::to_string(i) + ".png");
                try {
                    write_png(bilinear_resize(read_image(original), *source.input_size, *source.input_size), sent);
                } catch (const Error& e) {
                    fields.back().error = e.what();
                    continue;
                }
            }
            slot.emplace(sent.string(), i);
            list += sent.string() + '\n';
        }
        TempDir list_dir;
        const auto list_file = list_dir.path() / "images.txt";
        text::write_file(list_file, list);
        output = run_command(source.command, list_file);
    } else {
        const auto base = source.file.parent_path();
        for (std::size_t i = 0; i < images.size(); ++i) {
            fields.push_back({images[i], std::nullopt, {}});
            slot.emplace(std::filesystem::absolute(images[i]).lexically_normal().string(), i);
        }
        output = text::read_file(source.file);
        // Relative paths in a precomputed file are relative to the file.
        std::string rewritten;
        for (const auto& line : text::lines(output)) {
            const auto tab = line.find('\t');
            if (tab == std::string::npos || line.empty()) {
                rewritten += line + '\n';
                continue;
            }
            std::filesystem::path p = line.substr(0, tab);
            if (p.is_relative()) p = std::filesystem::absolute(base / p);
            rewritten += p.lexically_normal().string() + line.substr(tab) + '\n';
        }
        output = std::move(rewritten);
    }

    std::vector<int> answers(images.size(), 0);
    std::size_t row = 0;
    for (const auto& line : text::lines(output)) {
        ++row;
        if (text::trim(line).empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw PluginError("plugin output line " + std::to_string(row) + " has no tab");
        const auto it = slot.find(line.substr(0, tab));
        if (it == slot.end()) {
            // A precomputed file may cover more images than this request.
            if (!source.file.empty()) continue;
            throw PluginError("plugin answered an unrequested path: " + line.substr(0, tab));
        }
        auto& field = fields[it->second];
        if (++answers[it->second] > 1) {
            field.payload.reset();
            field.error = "duplicate plugin answer";
            continue;
        }
        field.payload = std::string(text::trim(std::string_view(line).substr(tab + 1)));
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (answers[i] == 0 && fields[i].error.empty()) fields[i].error = "no plugin answer";
    }
    return fields;
}

std::vector<PluginScore> score_with_plugin(const ScorerPlugin& plugin, const std::vector<std::filesystem::path>& images) {
    std::vector<PluginScore> out;
    out.reserve(images.size());
    for (auto& field : run_plugin(plugin.source, images)) {
        PluginScore s{field.path, std::nullopt, field.error};
        if (field.payload) {
            try {
                const double v = text::parse_double(*field.payload);
                if (!std::isfinite(v)) throw ParseError("non-finite");
                s.value = v;
            } catch (const ParseError&) {
                s.error = "non-numeric score '" + *field.payload + "'";
            }
        }
        if (!s.error.empty()) s.error = plugin.name + ": " + s.error;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace fcb
