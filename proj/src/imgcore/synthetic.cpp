#include "fcb/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fcb/error.hpp"

namespace fcb::synth {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw Error("below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    while (true) {
        const auto x = rng();
        if (x < limit) return x % n;
    }
}

namespace {

struct Rgb {
    double r, g, b;
};

Rgb mix(const Rgb& a, const Rgb& b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

double smoothstep(double e0, double e1, double x) {
    const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
    return t * t * (3 - 2 * t);
}

// Signed ellipse "radius": < 1 inside.
double ellipse(double x, double y, double cx, double cy, double rx, double ry, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dx = x - cx, dy = y - cy;
    const double u = (c * dx + s * dy) / rx;
    const double v = (-s * dx + c * dy) / ry;
    return std::sqrt(u * u + v * v);
}

struct Identity {
    Rgb skin, hair, iris, lips, background_top, background_bottom;
    double face_rx, face_ry, eye_spacing, eye_height, mouth_height, mouth_width, nose_len;
    double hair_line;
};

Identity make_identity(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + 1);
    Identity id;
    const double tone = uniform(rng, 0.25, 0.95);
    id.skin = mix({95, 60, 40}, {240, 200, 170}, tone);
    id.hair = mix({20, 15, 10}, {170, 120, 60}, uniform01(rng));
    id.iris = mix({40, 25, 15}, {70, 110, 140}, uniform01(rng));
    id.lips = mix(id.skin, {170, 60, 70}, uniform(rng, 0.35, 0.6));
    id.background_top = {uniform(rng, 90, 200), uniform(rng, 90, 200), uniform(rng, 100, 220)};
    id.background_bottom = mix(id.background_top, {30, 30, 40}, 0.5);
    id.face_rx = uniform(rng, 0.25, 0.31);
    id.face_ry = uniform(rng, 0.34, 0.40);
    id.eye_spacing = uniform(rng, 0.145, 0.175);
    id.eye_height = uniform(rng, -0.08, -0.04);
    id.mouth_height = uniform(rng, 0.15, 0.19);
    id.mouth_width = uniform(rng, 0.11, 0.14);
    id.nose_len = uniform(rng, 0.09, 0.12);
    id.hair_line = uniform(rng, -0.30, -0.22);
    return id;
}

}  // namespace

Face render_face(std::uint64_t subject_seed, std::uint64_t capture_seed, int width, int height) {
    const Identity id = make_identity(subject_seed);
    std::mt19937_64 rng(capture_seed * 0xD1B54A32D192ED03ull + subject_seed + 7);

    const double scale = std::min(width, height);
    const double cx = 0.5 * width + uniform(rng, -0.02, 0.02) * scale;
    const double cy = 0.52 * height + uniform(rng, -0.02, 0.02) * scale;
    const double roll = uniform(rng, -0.06, 0.06);
    const double smile = uniform(rng, 0.0, 1.0);
    const double light = uniform(rng, -0.25, 0.25);
    const double noise_amp = uniform(rng, 2.0, 5.0);
    const bool glasses = uniform01(rng) < 0.3;

    const double cr = std::cos(roll), sr = std::sin(roll);
    auto to_image = [&](double fx, double fy) {
        const double x = fx * scale, y = fy * scale;
        return Eigen::Vector2d(cx + cr * x - sr * y, cy + sr * x + cr * y);
    };

    Landmarks lm;
    const double mw = id.mouth_width * (1.0 + 0.25 * smile);
    lm.row(0) = to_image(-id.eye_spacing, id.eye_height).transpose();
    lm.row(1) = to_image(id.eye_spacing, id.eye_height).transpose();
    lm.row(2) = to_image(0.0, id.eye_height + id.nose_len + 0.02).transpose();
    lm.row(3) = to_image(-mw, id.mouth_height - 0.01 * smile).transpose();
    lm.row(4) = to_image(mw, id.mouth_height - 0.01 * smile).transpose();

    ImagePlane img(width, height);
    for (int py = 0; py < height; ++py) {
        for (int px = 0; px < width; ++px) {
            // Face-frame coordinates (undo roll), in units of `scale`.
            const double ix = px + 0.5 - cx, iy = py + 0.5 - cy;
            const double fx = (cr * ix + sr * iy) / scale;
            const double fy = (-sr * ix + cr * iy) / scale;

            Rgb c = mix(id.background_top, id.background_bottom, static_cast<double>(py) / height);
            c = mix(c, {c.r * 0.8, c.g * 0.8, c.b * 0.8},
                    0.5 + 0.5 * std::sin(px * 0.07 + py * 0.031));

            // shoulders
            const double sh = ellipse(fx, fy, 0.0, 0.78, 0.55, 0.30, 0.0);
            c = mix(c, mix(id.hair, {60, 70, 110}, 0.6), 1.0 - smoothstep(0.97, 1.0, sh));

            // hair behind the head
            const double hr = ellipse(fx, fy, 0.0, -0.06, id.face_rx * 1.18, id.face_ry * 1.12, 0.0);
            c = mix(c, id.hair, 1.0 - smoothstep(0.96, 1.0, hr));

            const double fr = ellipse(fx, fy, 0.0, 0.02, id.face_rx, id.face_ry, 0.0);
            if (fr < 1.02) {
                const double shade = 1.0 + light * fx / id.face_rx - 0.25 * fr * fr;
                Rgb skin{id.skin.r * shade, id.skin.g * shade, id.skin.b * shade};
                c = mix(c, skin, 1.0 - smoothstep(0.97, 1.02, fr));
                // fringe
                if (fy < id.hair_line + 0.04 * std::sin(fx * 25.0)) {
                    c = mix(c, id.hair, smoothstep(0.0, 0.02, id.hair_line - fy + 0.02));
                }
                // eyes, brows
                for (int side = -1; side <= 1; side += 2) {
                    const double ex = side * id.eye_spacing, ey = id.eye_height;
                    const double white = ellipse(fx, fy, ex, ey, 0.045, 0.018, 0.0);
                    c = mix(c, {235, 232, 228}, 1.0 - smoothstep(0.85, 1.0, white));
                    const double iris = ellipse(fx, fy, ex, ey, 0.017, 0.017, 0.0);
                    c = mix(c, id.iris, (1.0 - smoothstep(0.8, 1.0, iris)) * (white < 1.0));
                    const double pupil = ellipse(fx, fy, ex, ey, 0.007, 0.007, 0.0);
                    c = mix(c, {10, 10, 10}, 1.0 - smoothstep(0.7, 1.0, pupil));
                    const double brow = ellipse(fx, fy, ex, ey - 0.045, 0.05, 0.009, -side * 0.1);
                    c = mix(c, id.hair, 1.0 - smoothstep(0.8, 1.0, brow));
                    if (glasses) {
                        const double rim = ellipse(fx, fy, ex, ey, 0.07, 0.05, 0.0);
                        c = mix(c, {25, 25, 25}, std::max(0.0, 1.0 - std::abs(rim - 1.0) * 25.0));
                    }
                }
                // nose shadow
                const double nose = ellipse(fx, fy, 0.01, id.eye_height + id.nose_len * 0.6, 0.018,
                                            id.nose_len * 0.6, 0.0);
                c = mix(c, {c.r * 0.82, c.g * 0.8, c.b * 0.8}, 1.0 - smoothstep(0.6, 1.0, nose));
                const double nostril = ellipse(fx, fy, 0.0, id.eye_height + id.nose_len + 0.02, 0.03,
                                               0.01, 0.0);
                c = mix(c, {c.r * 0.6, c.g * 0.55, c.b * 0.55}, 1.0 - smoothstep(0.7, 1.0, nostril));
                // mouth, curved by the smile
                const double bend = 0.6 * smile * (fx / mw) * (fx / mw) * 0.03;
                const double mouth = ellipse(fx, fy + bend, 0.0, id.mouth_height, mw, 0.012 + 0.01 * smile, 0.0);
                c = mix(c, id.lips, 1.0 - smoothstep(0.8, 1.0, mouth));
                if (smile > 0.6) {
                    const double teeth = ellipse(fx, fy + bend, 0.0, id.mouth_height, mw * 0.7, 0.005, 0.0);
                    c = mix(c, {240, 240, 235}, 1.0 - smoothstep(0.7, 1.0, teeth));
                }
            }
            const double n = (uniform01(rng) - 0.5) * 2.0 * noise_amp;
            img.set_pixel(px, py, to_u8(c.r + n), to_u8(c.g + n), to_u8(c.b + n));
        }
    }
    return {std::move(img), lm};
}

std::filesystem::path write_dataset(const std::filesystem::path& dir, int subjects,
                                    int captures_per_subject, std::uint64_t seed, int width,
                                    int height) {
    DatasetManifest manifest;
    for (int s = 0; s < subjects; ++s) {
        for (int c = 0; c < captures_per_subject; ++c) {
            char id[32], subject[16], capture[16];
            std::snprintf(subject, sizeof subject, "s%04d", s);
            std::snprintf(capture, sizeof capture, "c%02d", c);
            std::snprintf(id, sizeof id, "%s_%s", subject, capture);
            const auto face = render_face(seed * 1000003ull + s, seed * 7919ull + s * 131ull + c, width, height);
            const auto file = dir / "images" / (std::string(id) + ".png");
            write_png(face.image, file);
            manifest.records.push_back({id, subject, capture, file, face.landmarks});
        }
    }
    const auto path = dir / "manifest.tsv";
    save_manifest(manifest, path);
    return path;
}

}  // namespace fcb::synth
