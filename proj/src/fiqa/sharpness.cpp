#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "fcb/error.hpp"
#include "fcb/fiqa.hpp"

namespace fcb {

namespace {

using Int = std::int64_t;

// Luma on an integer scale: 255 * 1000 is white.
constexpr Int kLumaScale = 255000;

struct LumaPlane {
    int w = 0;
    int h = 0;
    std::vector<Int> v;

    Int at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

LumaPlane luma(const ImagePlane& image) {
    LumaPlane p{image.width(), image.height(), {}};
    p.v.resize(static_cast<std::size_t>(p.w) * p.h);
    for (int y = 0; y < p.h; ++y) {
        for (int x = 0; x < p.w; ++x) {
            p.v[static_cast<std::size_t>(y) * p.w + x] =
                299 * image.at(x, y, 0) + 587 * image.at(x, y, 1) + 114 * image.at(x, y, 2);
        }
    }
    return p;
}

struct Variation {
    Int original = 0;
    Int lost = 0;
};

// Sum of neighbour differences along one direction, original (scaled by the
// kernel length) against the directional box sum. `horizontal` picks the axis.
Variation directional_variation(const LumaPlane& p, int radius, bool horizontal) {
    const int len = 2 * radius + 1;
    const int lines = horizontal ? p.h : p.w;
    const int span = horizontal ? p.w : p.h;
    auto sample = [&](int line, int pos) {
        pos = std::clamp(pos, 0, span - 1);
        return horizontal ? p.at(pos, line) : p.at(line, pos);
    };
    Variation out;
    std::vector<Int> blurred(static_cast<std::size_t>(span));
    for (int line = 0; line < lines; ++line) {
        for (int i = 0; i < span; ++i) {
            Int s = 0;
            for (int k = -radius; k <= radius; ++k) s += sample(line, i + k);
            blurred[static_cast<std::size_t>(i)] = s;
        }
        for (int i = 1; i < span; ++i) {
            const Int d_orig = len * std::llabs(sample(line, i) - sample(line, i - 1));
            const Int d_blur = std::llabs(blurred[static_cast<std::size_t>(i)] - blurred[static_cast<std::size_t>(i - 1)]);
            out.original += d_orig;
            out.lost += std::max<Int>(0, d_orig - d_blur);
        }
    }
    return out;
}

}  // namespace

double sharpness2(const ImagePlane& image) {
    if (image.empty()) throw GeometryError("sharpness2: empty image");
    const LumaPlane p = luma(image);
    Int total = 0;
    for (int y = 0; y < p.h; ++y) {
        for (int x = 0; x < p.w; ++x) {
            Int sum = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = std::clamp(y + dy, 0, p.h - 1);
                for (int dx = -1; dx <= 1; ++dx) sum += p.at(std::clamp(x + dx, 0, p.w - 1), yy);
            }
            total += std::llabs(9 * p.at(x, y) - sum);
        }
    }
    const double denom = 9.0 * static_cast<double>(kLumaScale) * static_cast<double>(p.v.size());
    return static_cast<double>(total) / denom;
}

double sharpness1(const ImagePlane& image, const Sharpness1Options& options) {
    if (image.width() < 2 || image.height() < 2) {
        throw GeometryError("sharpness1 needs an image of at least 2x2 pixels");
    }
    if (options.kernel_length < 3 || options.kernel_length % 2 == 0) {
        throw ConfigError("sharpness1 kernel length must be odd and >= 3");
    }
    const LumaPlane p = luma(image);
    const int radius = options.kernel_length / 2;

    double blur = -1.0;
    for (const bool horizontal : {true, false}) {
        const auto v = directional_variation(p, radius, horizontal);
        if (v.original == 0) continue;
        const double b = static_cast<double>(v.original - v.lost) / static_cast<double>(v.original);
        blur = std::max(blur, b);
    }
    if (blur < 0.0) return 0.0;
    return std::clamp(1.0 - blur, 0.0, 1.0);
}

bool is_builtin_metric(const std::string& method) {
    return method == kSharpness1 || method == kSharpness2;
}

QualityScore score_builtin(const std::string& method, const std::string& image_id, const ImagePlane& image) {
    if (method == kSharpness1) return {image_id, method, sharpness1(image)};
    if (method == kSharpness2) return {image_id, method, sharpness2(image)};
    throw ConfigError("unknown built-in quality metric '" + method + "'");
}

}  // namespace fcb
