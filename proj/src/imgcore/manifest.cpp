#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fcb/error.hpp"
#include "fcb/imgcore.hpp"
#include "fcb/text.hpp"

namespace fcb {

namespace {

const std::vector<std::string> kBaseColumns = {"image_id", "subject_id", "capture_id", "path"};

std::vector<std::string> landmark_columns() {
    std::vector<std::string> cols;
    for (int i = 1; i <= 5; ++i) {
        cols.push_back("x" + std::to_string(i));
        cols.push_back("y" + std::to_string(i));
    }
    return cols;
}

}  // namespace

std::string to_string(Variant v) {
    return v == Variant::roi ? "roi" : "portrait";
}

Variant parse_variant(const std::string& s) {
    if (s == "roi") return Variant::roi;
    if (s == "portrait") return Variant::portrait;
    throw ParseError("unknown variant '" + s + "' (expected roi or portrait)");
}

std::size_t DatasetManifest::subject_count() const {
    std::set<std::string_view> subjects;
    for (const auto& r : records) subjects.insert(r.subject_id);
    return subjects.size();
}

DatasetManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
    DatasetManifest manifest;
    const auto rows = text::lines(text);

    std::size_t row = 0;
    std::vector<std::string> header;
    char delim = '\t';
    bool has_landmarks = false;
    std::set<std::string> seen_ids;

    for (const auto& raw : rows) {
        ++row;
        const auto line = text::trim(raw);
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto body = text::trim(line.substr(1));
            if (body.starts_with("variant=")) {
                manifest.variant = parse_variant(std::string(text::trim(body.substr(8))));
            }
            continue;
        }
        if (header.empty()) {
            delim = line.find('\t') != std::string_view::npos ? '\t' : ',';
            for (auto& col : text::split(line, delim)) header.emplace_back(text::trim(col));
            for (std::size_t i = 0; i < kBaseColumns.size(); ++i) {
                if (i >= header.size() || header[i] != kBaseColumns[i]) {
                    throw ParseError("missing column '" + kBaseColumns[i] + "' in header", row);
                }
            }
            if (header.size() == kBaseColumns.size() + 10) {
                const auto lm = landmark_columns();
                if (!std::equal(lm.begin(), lm.end(), header.begin() + 4)) {
                    throw ParseError("landmark columns must be x1,y1,...,x5,y5", row);
                }
                has_landmarks = true;
            } else if (header.size() != kBaseColumns.size()) {
                throw ParseError("expected 4 or 14 columns, header has " +
                                     std::to_string(header.size()),
                                 row);
            }
            continue;
        }

        auto fields = text::split(raw, delim);
        if (fields.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                                 std::to_string(fields.size()),
                             row);
        }
        ImageRecord rec;
        rec.image_id = std::string(text::trim(fields[0]));
        rec.subject_id = std::string(text::trim(fields[1]));
        rec.capture_id = std::string(text::trim(fields[2]));
        const std::filesystem::path p{std::string(text::trim(fields[3]))};
        if (rec.image_id.empty() || rec.subject_id.empty() || p.empty()) {
            throw ParseError("empty image_id, subject_id or path", row);
        }
        rec.path = (p.is_relative() && !base_dir.empty()) ? base_dir / p : p;
        if (!seen_ids.insert(rec.image_id).second) {
            throw ParseError("duplicate image_id '" + rec.image_id + "'", row);
        }
        if (has_landmarks) {
            int empty = 0;
            for (int k = 0; k < 10; ++k) empty += text::trim(fields[4 + k]).empty() ? 1 : 0;
            if (empty == 10) {
                // no landmarks for this record
            } else if (empty != 0) {
                throw ParseError("partial landmark row for '" + rec.image_id + "'", row);
            } else {
                Landmarks lm;
                for (int k = 0; k < 5; ++k) {
                    lm(k, 0) = text::parse_double(fields[4 + 2 * k], row);
                    lm(k, 1) = text::parse_double(fields[5 + 2 * k], row);
                }
                if (!lm.allFinite()) {
                    throw ParseError("non-finite landmark for '" + rec.image_id + "'", row);
                }
                rec.landmarks = lm;
            }
        }
        manifest.records.push_back(std::move(rec));
    }
    if (header.empty()) throw ParseError("manifest has no header line");
    if (manifest.records.empty()) throw ParseError("manifest has no records");
    return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& file) {
    return parse_manifest(text::read_file(file), file.parent_path());
}

std::string serialize_manifest(const DatasetManifest& manifest, const std::filesystem::path& base_dir) {
    const bool any_landmarks = std::any_of(manifest.records.begin(), manifest.records.end(),
                                           [](const auto& r) { return r.landmarks.has_value(); });
    std::ostringstream out;
    out << "# variant=" << to_string(manifest.variant) << '\n';
    auto header = kBaseColumns;
    if (any_landmarks) {
        for (auto& c : landmark_columns()) header.push_back(c);
    }
    out << text::join(header, '\t') << '\n';
    for (const auto& r : manifest.records) {
        auto path = r.path;
        if (!base_dir.empty()) {
            const auto rel = path.lexically_relative(base_dir);
            if (!rel.empty() && *rel.begin() != "..") path = rel;
        }
        out << r.image_id << '\t' << r.subject_id << '\t' << r.capture_id << '\t'
            << path.generic_string();
        if (any_landmarks) {
            for (int k = 0; k < 5; ++k) {
                for (int c = 0; c < 2; ++c) {
                    out << '\t';
                    if (r.landmarks) out << text::format_double((*r.landmarks)(k, c));
                }
            }
        }
        out << '\n';
    }
    return out.str();
}

void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& file) {
    text::write_file(file, serialize_manifest(manifest, file.parent_path()));
}

}  // namespace fcb
