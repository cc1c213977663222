#include <doctest.h>

#include <random>

#include "fcb/error.hpp"
#include "fcb/imgcore.hpp"
#include "fcb/synthetic.hpp"
#include "support.hpp"

using namespace fcb;
using fcb::testing::TempDir;

namespace {

ImagePlane textured(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return fcb::testing::random_image(rng, w, h);
}

Landmarks scaled(const Landmarks& lm, double s) { return lm * s; }

}  // namespace

TEST_CASE("image plane rejects inconsistent sample counts") {
    CHECK_THROWS_AS(ImagePlane(2, 2, std::vector<std::uint8_t>(11)), Error);
    CHECK_THROWS_AS(ImagePlane(0, 3), Error);
    CHECK(ImagePlane(3, 2).samples().size() == 18);
}

TEST_CASE("manifest parsing") {
    SUBCASE("two well-formed rows") {
        const auto m = parse_manifest("image_id\tsubject_id\tcapture_id\tpath\na\ts1\tc1\ta.png\nb\ts2\tc1\tb.png\n", "/data");
        CHECK(m.records.size() == 2);
        CHECK(m.subject_count() == 2);
        CHECK(m.records[0].path == std::filesystem::path("/data/a.png"));
        CHECK_FALSE(m.records[0].landmarks.has_value());
    }
    SUBCASE("duplicate image id names the id and row") {
        try {
            parse_manifest("image_id,subject_id,capture_id,path\nx,s,c,x.png\nx,s,c2,y.png\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("'x'") != std::string::npos);
            CHECK(e.row() == 3);
        }
    }
    SUBCASE("missing column") {
        CHECK_THROWS_AS(parse_manifest("image_id,subject_id,path\na,s,a.png\n"), ParseError);
    }
    SUBCASE("partial landmarks are rejected") {
        CHECK_THROWS_AS(parse_manifest("image_id,subject_id,capture_id,path,x1,y1,x2,y2,x3,y3,x4,y4,x5,y5\n"
                                       "a,s,c,a.png,1,2,3,4,5,6,7,8,9,\n"),
                        ParseError);
    }
    SUBCASE("empty landmark fields mean no landmarks") {
        const auto m = parse_manifest("image_id,subject_id,capture_id,path,x1,y1,x2,y2,x3,y3,x4,y4,x5,y5\n"
                                      "a,s,c,a.png,,,,,,,,,,\n");
        CHECK_FALSE(m.records[0].landmarks.has_value());
    }
    SUBCASE("variant comment") {
        const auto m = parse_manifest("# variant=portrait\nimage_id,subject_id,capture_id,path\na,s,c,a.png\n");
        CHECK(m.variant == Variant::portrait);
    }
    SUBCASE("empty manifest") {
        CHECK_THROWS_AS(parse_manifest("image_id,subject_id,capture_id,path\n"), ParseError);
    }
}

TEST_CASE("manifest round-trips through serialize and load") {
    TempDir dir;
    DatasetManifest m;
    m.variant = Variant::portrait;
    Landmarks lm;
    lm << 10.25, 20.5, 30.125, 20.75, 20, 30, 12, 40.5, 28, 40.25;
    m.records.push_back({"img1", "s1", "c1", dir / "images" / "img1.png", lm});
    m.records.push_back({"img2", "s1", "c2", dir / "images" / "img2.png", std::nullopt});
    save_manifest(m, dir / "manifest.tsv");
    CHECK(load_manifest(dir / "manifest.tsv") == m);
}

TEST_CASE("png and pnm files decode to the written raster") {
    TempDir dir;
    const auto img = textured(17, 9, 3);
    write_png(img, dir / "a.png");
    CHECK(read_image(dir / "a.png") == img);

    std::string ppm = "P6\n2 1\n255\n";
    ppm += std::string("\x01\x02\x03\xfa\xfb\xfc", 6);
    text::write_file(dir / "b.ppm", ppm);
    const auto p = read_image(dir / "b.ppm");
    CHECK(p.width() == 2);
    CHECK(p.at(1, 0, 2) == 0xfc);
    CHECK_THROWS_AS(read_image(dir / "missing.png"), Error);
}

TEST_CASE("bilinear resize") {
    SUBCASE("same dimensions is the identity") {
        const auto img = textured(13, 7, 1);
        CHECK(bilinear_resize(img, 13, 7) == img);
    }
    SUBCASE("2x2 checker to 1x1 rounds 127.5 up") {
        const auto img = fcb::testing::gray_image(2, 2, {0, 255, 255, 0});
        const auto out = bilinear_resize(img, 1, 1);
        CHECK(out.at(0, 0, 0) == 128);
        CHECK(out.at(0, 0, 1) == 128);
    }
    SUBCASE("constant images stay constant") {
        const auto img = fcb::testing::solid(9, 5, 12, 200, 77);
        for (const auto& [w, h] : {std::pair{1, 1}, {3, 17}, {9, 5}, {40, 2}}) {
            CHECK(bilinear_resize(img, w, h) == fcb::testing::solid(w, h, 12, 200, 77));
        }
    }
    SUBCASE("empty target") { CHECK_THROWS_AS(bilinear_resize(textured(4, 4, 2), 0, 3), GeometryError); }
}

TEST_CASE("similarity estimation recovers an exact similarity") {
    const Landmarks from = reference_template_112();
    Similarity2 t{1.3 * std::cos(0.2), 1.3 * std::sin(0.2), Eigen::Vector2d(5.0, -3.0)};
    Landmarks to;
    for (int i = 0; i < 5; ++i) to.row(i) = t.apply(from.row(i).transpose()).transpose();
    const auto est = estimate_similarity(from, to);
    CHECK(est.a == doctest::Approx(t.a).epsilon(1e-12));
    CHECK(est.b == doctest::Approx(t.b).epsilon(1e-12));
    CHECK(est.t.x() == doctest::Approx(5.0));
    CHECK(est.t.y() == doctest::Approx(-3.0));
}

TEST_CASE("align_to_roi") {
    const auto src = textured(250, 250, 11);
    SUBCASE("template landmarks at the source size give the source") {
        CHECK(align_to_roi(src, alignment_template(250), 250) == src);
    }
    SUBCASE("landmarks at twice the template equal a factor-2 bilinear downsample") {
        CHECK(align_to_roi(src, scaled(alignment_template(125), 2.0), 125) == bilinear_resize(src, 125, 125));
    }
    SUBCASE("coincident landmarks fail") {
        Landmarks lm;
        lm.rowwise() = Eigen::RowVector2d(40, 40);
        CHECK_THROWS_AS(align_to_roi(src, lm, 250), GeometryError);
    }
    SUBCASE("collinear landmarks fail") {
        Landmarks lm;
        lm << 10, 10, 20, 20, 30, 30, 40, 40, 50, 50;
        CHECK_THROWS_AS(align_to_roi(src, lm, 250), GeometryError);
    }
    SUBCASE("samples outside the source are black") {
        // Landmarks spread 4x wider than the crop map its far corner outside the source.
        const auto out = align_to_roi(src, scaled(alignment_template(250), 4.0), 250);
        CHECK(out.at(249, 249, 0) == 0);
        CHECK(out.at(249, 249, 1) == 0);
        CHECK(out.at(249, 249, 2) == 0);
    }
}

TEST_CASE("crop_portrait") {
    const auto src = textured(300, 300, 5);
    Landmarks lm;
    // IED 40, EMD 50.
    lm << 130, 150, 170, 150, 150, 175, 135, 200, 165, 200;
    const PortraitGeometry g;

    SUBCASE("dimensions follow the rounded ratios") {
        const auto out = crop_portrait(src, lm, g);
        CHECK(out.width() == 160);
        CHECK(out.height() == 250);
    }
    SUBCASE("fully inside: only source pixels") {
        const auto r = portrait_rect(lm, g);
        REQUIRE(r.left >= 0);
        REQUIRE(r.top >= 0);
        const auto out = crop_portrait(src, lm, g);
        for (int y = 0; y < out.height(); y += 7) {
            for (int x = 0; x < out.width(); x += 5) CHECK(out.at(x, y, 1) == src.at(r.left + x, r.top + y, 1));
        }
    }
    SUBCASE("crop past the top edge is black there and source elsewhere") {
        Landmarks high = lm;
        high.col(1).array() -= 120.0;
        const auto r = portrait_rect(high, g);
        REQUIRE(r.top < 0);
        const auto out = crop_portrait(src, high, g);
        for (int y = 0; y < -r.top; ++y) {
            for (int x = 0; x < out.width(); ++x) {
                CHECK(out.at(x, y, 0) == 0);
                CHECK(out.at(x, y, 1) == 0);
                CHECK(out.at(x, y, 2) == 0);
            }
        }
        CHECK(out.at(3, -r.top, 0) == src.at(r.left + 3, 0, 0));
    }
    SUBCASE("zero inter-eye distance fails") {
        Landmarks bad = lm;
        bad.row(1) = bad.row(0);
        CHECK_THROWS_AS(crop_portrait(src, bad, g), GeometryError);
    }
}

TEST_CASE("synthetic faces are deterministic and carry usable landmarks") {
    const auto a = synth::render_face(3, 4, 120, 100);
    const auto b = synth::render_face(3, 4, 120, 100);
    CHECK(a.image == b.image);
    CHECK(a.landmarks == b.landmarks);
    CHECK(a.image.width() == 120);
    CHECK(a.landmarks(0, 0) < a.landmarks(1, 0));
    CHECK_NOTHROW(align_to_roi(a.image, a.landmarks, 64));
}
