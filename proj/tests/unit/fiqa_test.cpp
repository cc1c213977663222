#include <doctest.h>

#include <cmath>
#include <random>

#include "fcb/error.hpp"
#include "fcb/fiqa.hpp"
#include "fcb/imgcore.hpp"
#include "fcb/synthetic.hpp"
#include "support.hpp"

using namespace fcb;
using namespace fcb::testing;

namespace {

// Floating-point restatement of the metrics, independent of the integer code.
double sharpness2_reference(const ImagePlane& img) {
    const PlaneD g = to_gray(img);
    return (g - box_blur_3x3(g)).abs().mean();
}

double sharpness1_reference(const ImagePlane& img, int k = 9) {
    const PlaneD g = to_gray(img);
    const Eigen::Index h = g.rows(), w = g.cols();
    const int r = k / 2;
    PlaneD bh(h, w), bv(h, w);
    for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < w; ++x) {
            double sh = 0, sv = 0;
            for (int d = -r; d <= r; ++d) {
                sh += g(y, std::clamp<Eigen::Index>(x + d, 0, w - 1));
                sv += g(std::clamp<Eigen::Index>(y + d, 0, h - 1), x);
            }
            bh(y, x) = sh / k;
            bv(y, x) = sv / k;
        }
    }
    auto retained = [](const PlaneD& orig, const PlaneD& blur, bool horizontal) -> std::optional<double> {
        double sd = 0, sv = 0;
        const Eigen::Index h = orig.rows(), w = orig.cols();
        for (Eigen::Index y = horizontal ? 0 : 1; y < h; ++y) {
            for (Eigen::Index x = horizontal ? 1 : 0; x < w; ++x) {
                const auto py = horizontal ? y : y - 1;
                const auto px = horizontal ? x - 1 : x;
                const double d = std::abs(orig(y, x) - orig(py, px));
                const double db = std::abs(blur(y, x) - blur(py, px));
                sd += d;
                sv += std::max(0.0, d - db);
            }
        }
        if (sd == 0) return std::nullopt;
        return (sd - sv) / sd;
    };
    const auto a = retained(g, bh, true);
    const auto b = retained(g, bv, false);
    if (!a && !b) return 0.0;
    const double blur = std::max(a.value_or(-1.0), b.value_or(-1.0));
    return std::clamp(1.0 - blur, 0.0, 1.0);
}

ImagePlane step_edge(int w, int h) {
    ImagePlane img(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::uint8_t v = (x < w / 2) ? 20 : 230;
            img.set_pixel(x, y, v, v, v);
        }
    }
    return img;
}

ImagePlane blur3_u8(const ImagePlane& img) {
    ImagePlane out(img.width(), img.height());
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                int sum = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        sum += img.at(std::clamp(x + dx, 0, img.width() - 1), std::clamp(y + dy, 0, img.height() - 1), c);
                    }
                }
                out.at(x, y, c) = to_u8(sum / 9.0);
            }
        }
    }
    return out;
}

std::filesystem::path write_face(const TempDir& dir, const std::string& name, int size = 64) {
    const auto file = dir / name;
    write_png(synth::render_face(7, name.size(), size, size).image, file);
    return file;
}

}  // namespace

TEST_CASE("to_gray") {
    CHECK((to_gray(solid(3, 2, 255, 255, 255)) == 1.0).all());
    CHECK((to_gray(solid(3, 2, 0, 0, 0)) == 0.0).all());
    const auto red = to_gray(solid(2, 2, 255, 0, 0));
    CHECK(red(1, 1) == doctest::Approx(0.299).epsilon(1e-15));
    CHECK(to_gray<float>(solid(1, 1, 0, 255, 0))(0, 0) == doctest::Approx(0.587f));
}

TEST_CASE("box_blur_3x3") {
    PlaneD c = PlaneD::Constant(4, 5, 0.3);
    CHECK(box_blur_3x3(c).isApprox(c));
    PlaneD row(1, 2);
    row << 0.0, 1.0;
    const auto b = box_blur_3x3(row);
    CHECK(b(0, 0) == doctest::Approx(1.0 / 3));
    CHECK(b(0, 1) == doctest::Approx(2.0 / 3));
    PlaneD one(1, 1);
    one << 0.42;
    CHECK(box_blur_3x3(one)(0, 0) == doctest::Approx(0.42));
}

TEST_CASE("sharpness2") {
    CHECK(sharpness2(solid(8, 8, 90, 10, 200)) == 0.0);
    CHECK(sharpness2(gray_image(2, 1, {0, 255})) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    CHECK(score_builtin(kSharpness2, "x", gray_image(2, 1, {0, 255})).value == doctest::Approx(1.0 / 3));
}

TEST_CASE("sharpness1") {
    CHECK(sharpness1(solid(8, 8, 90, 10, 200)) == 0.0);
    const auto edge = step_edge(32, 32);
    auto blurred = edge;
    for (int i = 0; i < 3; ++i) blurred = blur3_u8(blurred);
    CHECK(sharpness1(edge) > sharpness1(blurred));
    CHECK_THROWS_AS(sharpness1(solid(1, 5, 1, 2, 3)), GeometryError);
    CHECK_THROWS_AS(score_builtin("sharpness3", "x", edge), ConfigError);
    CHECK(is_builtin_metric("sharpness1"));
    CHECK_FALSE(is_builtin_metric("crfiqa"));
}

TEST_CASE("sharpness properties on random and face images") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 60; ++trial) {
        const int w = 2 + static_cast<int>(rng() % 40), h = 2 + static_cast<int>(rng() % 40);
        ImagePlane img = trial % 3 == 0 ? synth::render_face(trial, 1, w, h).image : random_image(rng, w, h);
        if (trial % 5 == 1) img = blur3_u8(blur3_u8(img));
        CAPTURE(trial);
        const double s1 = sharpness1(img), s2 = sharpness2(img);
        CHECK(s1 >= 0.0);
        CHECK(s1 <= 1.0);
        CHECK(s2 >= 0.0);
        CHECK(s2 <= 1.0);
        CHECK(s2 == doctest::Approx(sharpness2_reference(img)).epsilon(1e-12));
        CHECK(s1 == doctest::Approx(sharpness1_reference(img)).epsilon(1e-9));
        CHECK(sharpness1(mirror_x(img)) == s1);
        CHECK(sharpness1(mirror_y(img)) == s1);
        CHECK(sharpness2(mirror_x(img)) == s2);
        CHECK(sharpness2(mirror_y(img)) == s2);
        CHECK(sharpness2(invert(img)) == s2);
        const PlaneD g = to_gray(img);
        CHECK((s2 == 0.0) == ((box_blur_3x3(g) - g).abs() < 1e-15).all());
    }
}

TEST_CASE("quality plugins") {
    TempDir dir;
    const std::vector<std::filesystem::path> images{write_face(dir, "a.png"), write_face(dir, "bb.png"),
                                                    write_face(dir, "ccc.png")};

    SUBCASE("constant plugin scores every image") {
        const auto s = write_script(dir / "half.sh", "while read -r p; do printf '%s\\t0.5\\n' \"$p\"; done\n");
        const auto out = score_with_plugin({"half", {s.string(), {}, std::nullopt}}, images);
        REQUIRE(out.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(out[i].path == images[i]);
            CHECK(out[i].value == 0.5);
        }
    }
    SUBCASE("answers are matched by path, not order") {
        const auto s = write_script(dir / "rev.sh",
                                    "tac | while read -r p; do printf '%s\\t%s\\n' \"$p\" \"${#p}\"; done\n");
        const auto out = score_with_plugin({"len", {s.string(), {}, std::nullopt}}, images);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(*out[i].value == static_cast<double>(std::filesystem::absolute(images[i]).string().size()));
        }
    }
    SUBCASE("an omitted path fails only that image") {
        const auto s = write_script(dir / "skip.sh",
                                    "grep -v bb.png | while read -r p; do printf '%s\\t1\\n' \"$p\"; done\n");
        const auto out = score_with_plugin({"skip", {s.string(), {}, std::nullopt}}, images);
        CHECK(out[0].value == 1.0);
        CHECK_FALSE(out[1].value);
        CHECK(out[1].error.find("skip") != std::string::npos);
        CHECK(out[2].value == 1.0);
    }
    SUBCASE("duplicate and non-numeric answers fail per image") {
        const auto s = write_script(dir / "bad.sh",
                                    "while read -r p; do case \"$p\" in\n"
                                    "  *a.png) printf '%s\\t1\\n%s\\t2\\n' \"$p\" \"$p\";;\n"
                                    "  *bb.png) printf '%s\\tnan-ish\\n' \"$p\";;\n"
                                    "  *) printf '%s\\t0.25\\n' \"$p\";;\n"
                                    "esac; done\n");
        const auto out = score_with_plugin({"bad", {s.string(), {}, std::nullopt}}, images);
        CHECK_FALSE(out[0].value);
        CHECK(out[0].error.find("duplicate") != std::string::npos);
        CHECK_FALSE(out[1].value);
        CHECK(out[1].error.find("non-numeric") != std::string::npos);
        CHECK(out[2].value == 0.25);
    }
    SUBCASE("unrequested paths and failing commands are errors") {
        const auto extra = write_script(dir / "extra.sh", "cat >/dev/null; printf '/nope.png\\t1\\n'\n");
        CHECK_THROWS_AS(score_with_plugin({"x", {extra.string(), {}, std::nullopt}}, images), PluginError);
        const auto fail = write_script(dir / "fail.sh", "cat >/dev/null; exit 3\n");
        CHECK_THROWS_AS(score_with_plugin({"x", {fail.string(), {}, std::nullopt}}, images), PluginError);
        CHECK_THROWS_AS(score_with_plugin({"x", {(dir / "absent.sh").string(), {}, std::nullopt}}, images), PluginError);
    }
    SUBCASE("precomputed file rows are read back verbatim") {
        text::write_file(dir / "scores.tsv", "a.png\t0.125\nbb.png\t-3.5\n" + (dir / "ccc.png").string() +
                                                 "\t42\nunrelated.png\t9\n");
        const auto out = score_with_plugin({"file", {{}, dir / "scores.tsv", std::nullopt}}, images);
        CHECK(out[0].value == 0.125);
        CHECK(out[1].value == -3.5);
        CHECK(out[2].value == 42.0);
    }
    SUBCASE("input_size resizes images before the plugin sees them") {
        // Reads the PNG IHDR width and height.
        const auto s = write_script(dir / "dims.sh",
                                    "while read -r p; do set -- $(od -An -tu1 -j16 -N8 \"$p\");"
                                    " printf '%s\\t%s\\n' \"$p\" $(( ($3*256+$4)*1000 + $7*256+$8 )); done\n");
        const auto out = score_with_plugin({"dims", {s.string(), {}, 112}}, images);
        for (const auto& r : out) CHECK(r.value == 112112.0);
        const auto raw = score_with_plugin({"dims", {s.string(), {}, std::nullopt}}, images);
        for (const auto& r : raw) CHECK(r.value == 64064.0);
    }
    SUBCASE("exactly one source must be configured") {
        CHECK_THROWS_AS(run_plugin({}, images), ConfigError);
    }
}
