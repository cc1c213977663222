#include <cmath>
#include <sstream>

#include "fcb/text.hpp"
#include "fcb/trials.hpp"

namespace fcb {

void EmbeddingStore::add(const EmbeddingKey& key, Eigen::VectorXd vector) {
    if (!vector.allFinite()) throw Error("embedding for " + key.image_id + " has non-finite components");
    if (dimension_ && *dimension_ != vector.size()) {
        throw Error("embedding for " + key.image_id + " has dimension " + std::to_string(vector.size()) +
                    ", store holds " + std::to_string(*dimension_));
    }
    dimension_ = vector.size();
    vectors_[key] = std::move(vector);
}

const Eigen::VectorXd* EmbeddingStore::find(const EmbeddingKey& key) const {
    const auto it = vectors_.find(key);
    return it == vectors_.end() ? nullptr : &it->second;
}

std::string EmbeddingStore::format() const {
    std::ostringstream out;
    for (const auto& [key, v] : vectors_) {
        out << key.image_id << '\t' << (key.codec ? to_string(*key.codec) : "none") << '\t'
            << (key.codec ? std::to_string(key.target_bytes) : "LOSSLESS") << '\t';
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (i) out << ',';
            out << text::format_double(v[i]);
        }
        out << '\n';
    }
    return out.str();
}

namespace {

Eigen::VectorXd parse_vector(std::string_view s, std::size_t row) {
    const auto parts = text::split(s, ',');
    Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = text::parse_double(parts[i], row);
    return v;
}

}  // namespace

EmbeddingStore EmbeddingStore::parse(const std::string& contents) {
    EmbeddingStore store;
    std::size_t row = 0;
    for (const auto& line : text::lines(contents)) {
        ++row;
        if (line.empty() || line.starts_with('#')) continue;
        const auto f = text::split(line, '\t');
        if (f.size() != 4) throw ParseError("embedding store: expected 4 fields", row);
        EmbeddingKey key;
        key.image_id = f[0];
        if (f[2] == "LOSSLESS") {
            if (f[1] != "none") throw ParseError("embedding store: lossless row must use codec 'none'", row);
        } else {
            key.codec = parse_codec(f[1]);
            key.target_bytes = text::parse_int(f[2], row);
        }
        try {
            store.add(key, parse_vector(f[3], row));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), row);
        }
    }
    return store;
}

Eigen::VectorXd toy_embed(const ImagePlane& image) {
    constexpr int kSide = 8;
    const PlaneD gray = to_gray<double>(image);
    const int w = image.width(), h = image.height();
    Eigen::VectorXd v(kSide * kSide);
    for (int y = 0; y < kSide; ++y) {
        const double sy = std::clamp((y + 0.5) * h / kSide - 0.5, 0.0, h - 1.0);
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - y0;
        for (int x = 0; x < kSide; ++x) {
            const double sx = std::clamp((x + 0.5) * w / kSide - 0.5, 0.0, w - 1.0);
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - x0;
            const double top = gray(y0, x0) * (1 - fx) + gray(y0, x1) * fx;
            const double bottom = gray(y1, x0) * (1 - fx) + gray(y1, x1) * fx;
            v[y * kSide + x] = top * (1 - fy) + bottom * fy;
        }
    }
    v.array() -= v.mean();
    const double n = v.norm();
    // Below rounding noise of a constant image: treat as no signal.
    if (n < 1e-12) return Eigen::VectorXd::Zero(kSide * kSide);
    return v / n;
}

std::vector<EmbedResult> embed_with_plugin(const PluginSource& source, const std::vector<std::filesystem::path>& images) {
    std::vector<EmbedResult> out;
    std::optional<Eigen::Index> dim;
    for (auto& field : run_plugin(source, images)) {
        EmbedResult r{field.path, std::nullopt, field.error};
        if (field.payload) {
            try {
                auto v = parse_vector(*field.payload, 0);
                if (!v.allFinite()) throw ParseError("non-finite component");
                if (dim && *dim != v.size()) throw ParseError("vector length changed");
                dim = v.size();
                r.vector = std::move(v);
            } catch (const ParseError& e) {
                r.error = std::string("malformed embedding: ") + e.what();
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace fcb
