#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fcb/error.hpp"
#include "fcb/synthetic.hpp"
#include "fcb/trials.hpp"
#include "support.hpp"

using namespace fcb;
using namespace fcb::testing;

namespace {

DatasetManifest manifest_of(const std::vector<int>& images_per_subject) {
    DatasetManifest m;
    for (std::size_t s = 0; s < images_per_subject.size(); ++s) {
        for (int c = 0; c < images_per_subject[s]; ++c) {
            const std::string sid = "s" + std::to_string(s);
            const std::string id = sid + "_" + std::to_string(c);
            m.records.push_back({id, sid, "c" + std::to_string(c), id + ".png", std::nullopt});
        }
    }
    return m;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
    Eigen::VectorXd v(n);
    for (auto& x : v) x = synth::uniform(rng, -1.0, 1.0);
    return v;
}

}  // namespace

TEST_CASE("cosine similarity") {
    Eigen::Vector3d a(1, 2, 3);
    CHECK(cosine_similarity(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cosine_similarity(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)) == 0.0);
    CHECK(cosine_similarity(Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0)) == -1.0);
    CHECK_THROWS_AS(cosine_similarity(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 1)), SimilarityError);
    CHECK_THROWS_AS(cosine_similarity(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(4)), SimilarityError);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        const auto u = random_vector(rng, 1 + static_cast<int>(rng() % 32));
        const auto v = random_vector(rng, static_cast<int>(u.size()));
        const double lambda = synth::uniform(rng, 1e-3, 1e3);
        const double s = cosine_similarity(u, v);
        CHECK(s >= -1.0);
        CHECK(s <= 1.0);
        CHECK(cosine_similarity(v, u) == doctest::Approx(s).epsilon(1e-12));
        CHECK(cosine_similarity(lambda * u, v) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("mated_other pairs") {
    CHECK(generate_mated_other(manifest_of({3, 2})).pairs.size() == 4);
    CHECK(generate_mated_other(manifest_of({1})).pairs.empty());
    const auto set = generate_mated_other(manifest_of({3, 1, 2}));
    CHECK(set.kind == TrialKind::mated_other);
    for (const auto& p : set.pairs) {
        CHECK(p.probe_id < p.reference_id);
        CHECK(p.probe_id.substr(0, 2) == p.reference_id.substr(0, 2));
        CHECK(p.probe_source == Source::lossy);
        CHECK(p.reference_source == Source::lossy);
    }
    CHECK(std::is_sorted(set.pairs.begin(), set.pairs.end()));

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<int> sizes(1 + rng() % 12);
        for (auto& n : sizes) n = static_cast<int>(rng() % 6);
        const auto m = manifest_of(sizes);
        std::size_t brute = 0;
        for (std::size_t i = 0; i < m.records.size(); ++i) {
            for (std::size_t j = i + 1; j < m.records.size(); ++j) {
                brute += m.records[i].subject_id == m.records[j].subject_id;
            }
        }
        CHECK(generate_mated_other(m).pairs.size() == brute);
    }
}

TEST_CASE("mated_self pairs") {
    const auto set = generate_mated_self(manifest_of({2, 3}));
    CHECK(set.pairs.size() == 5);
    for (const auto& p : set.pairs) {
        CHECK(p.probe_id == p.reference_id);
        CHECK(p.probe_source == Source::lossless);
        CHECK(p.reference_source == Source::lossy);
    }
    CHECK(generate_mated_self(DatasetManifest{}).pairs.empty());
}

TEST_CASE("non_mated pairs") {
    SUBCASE("one possible pair") {
        const auto set = generate_non_mated(manifest_of({1, 1}), 1, 3);
        REQUIRE(set.pairs.size() == 1);
        CHECK(set.pairs[0].probe_id == "s0_0");
        CHECK(set.pairs[0].reference_id == "s1_0");
    }
    SUBCASE("deterministic per seed, different across seeds") {
        const auto m = manifest_of({4, 3, 5, 2, 6});
        CHECK(format_trial_set(generate_non_mated(m, 20, 11)) == format_trial_set(generate_non_mated(m, 20, 11)));
        CHECK(generate_non_mated(m, 20, 11) != generate_non_mated(m, 20, 12));
    }
    SUBCASE("infeasible count") {
        const auto m = manifest_of({2, 2});
        CHECK(cross_subject_pairs(m) == 4);
        CHECK(generate_non_mated(m, 4, 1).pairs.size() == 4);
        CHECK_THROWS_AS(generate_non_mated(m, 5, 1), SampleError);
        CHECK_THROWS_AS(generate_non_mated(manifest_of({3}), 1, 1), SampleError);
    }
    SUBCASE("pairs are cross-subject and distinct, sparse and dense") {
        const auto m = manifest_of({5, 4, 3, 6, 2, 1, 4});
        for (const std::size_t count : {std::size_t{3}, cross_subject_pairs(m) / 2 + 5, cross_subject_pairs(m)}) {
            const auto set = generate_non_mated(m, count, 99);
            CHECK(set.pairs.size() == count);
            std::set<std::pair<std::string, std::string>> seen;
            for (const auto& p : set.pairs) {
                CHECK(p.probe_id.substr(0, 2) != p.reference_id.substr(0, 2));
                CHECK(p.probe_id < p.reference_id);
                CHECK(seen.emplace(p.probe_id, p.reference_id).second);
            }
        }
    }
    SUBCASE("manifest storage order does not matter") {
        auto m = manifest_of({3, 4, 2, 5});
        const auto a = generate_non_mated(m, 12, 4);
        const auto mo = generate_mated_other(m);
        std::mt19937_64 rng(1);
        std::shuffle(m.records.begin(), m.records.end(), rng);
        CHECK(generate_non_mated(m, 12, 4) == a);
        CHECK(generate_mated_other(m) == mo);
    }
}

TEST_CASE("toy_embed") {
    const auto face = synth::render_face(2, 2, 90, 70).image;
    const auto e = toy_embed(face);
    CHECK(e.size() == 64);
    CHECK(e.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(e.sum()) < 1e-12);
    const auto copy = face;
    CHECK(toy_embed(copy) == e);
    CHECK(cosine_similarity(toy_embed(copy), e) == doctest::Approx(1.0));
    CHECK(toy_embed(solid(30, 30, 9, 9, 9)).isZero());
}

TEST_CASE("embedding store") {
    EmbeddingStore store;
    std::mt19937_64 rng(3);
    store.add(EmbeddingKey::lossless("a"), random_vector(rng, 4));
    store.add(EmbeddingKey::lossy("a", CodecId::jpeg, {2200}), random_vector(rng, 4));
    store.add(EmbeddingKey::lossy("b", CodecId::jpegxl, {5000}), random_vector(rng, 4));
    CHECK(store.dimension() == 4);
    CHECK_THROWS_AS(store.add(EmbeddingKey::lossless("c"), random_vector(rng, 5)), Error);
    Eigen::VectorXd bad = Eigen::VectorXd::Ones(4);
    bad(2) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(store.add(EmbeddingKey::lossless("d"), bad), Error);

    const auto text = store.format();
    CHECK(text.find("a\tnone\tLOSSLESS\t") != std::string::npos);
    const auto back = EmbeddingStore::parse(text);
    CHECK(back.size() == 3);
    CHECK(*back.find(EmbeddingKey::lossy("a", CodecId::jpeg, {2200})) ==
          *store.find(EmbeddingKey::lossy("a", CodecId::jpeg, {2200})));
    CHECK(back.format() == text);
    CHECK(store.find(EmbeddingKey::lossy("a", CodecId::jpeg, {5000})) == nullptr);
    CHECK_THROWS_AS(EmbeddingStore::parse("a\tjpeg\t2200\t1,x\n"), ParseError);
}

TEST_CASE("score_trials") {
    const auto m = manifest_of({3, 2});
    const auto trials = generate_mated_other(m);
    REQUIRE(trials.pairs.size() == 4);
    EmbeddingStore store;
    std::mt19937_64 rng(12);
    for (const auto& r : m.records) store.add(EmbeddingKey::lossy(r.image_id, CodecId::jpeg, {2200}), random_vector(rng, 8));

    SUBCASE("complete store") {
        const auto out = score_trials(trials, store, CodecId::jpeg, {2200});
        CHECK(out.scores.size() == 4);
        CHECK(out.failures.empty());
        for (const auto& s : out.scores) {
            CHECK(s.value >= -1.0);
            CHECK(s.value <= 1.0);
        }
    }
    SUBCASE("a missing reference fails one pair") {
        EmbeddingStore partial;
        for (const auto& r : m.records) {
            if (r.image_id != "s1_1") partial.add(EmbeddingKey::lossy(r.image_id, CodecId::jpeg, {2200}), random_vector(rng, 8));
        }
        const auto out = score_trials(trials, partial, CodecId::jpeg, {2200});
        CHECK(out.scores.size() == 3);
        REQUIRE(out.failures.size() == 1);
        CHECK(out.failures[0].message.find("s1_1") != std::string::npos);
    }
    SUBCASE("self pairs with equal vectors score 1, zero vectors fail") {
        EmbeddingStore self;
        const auto v = random_vector(rng, 8);
        for (const auto& r : m.records) {
            self.add(EmbeddingKey::lossless(r.image_id), v);
            self.add(EmbeddingKey::lossy(r.image_id, CodecId::png_resized, {3000}),
                     r.image_id == "s0_0" ? Eigen::VectorXd::Zero(8) : Eigen::VectorXd(v));
        }
        const auto out = score_trials(generate_mated_self(m), self, CodecId::png_resized, {3000});
        CHECK(out.scores.size() == 4);
        for (const auto& s : out.scores) CHECK(s.value == doctest::Approx(1.0));
        REQUIRE(out.failures.size() == 1);
        CHECK(out.failures[0].message.find("zero-norm") != std::string::npos);
    }
}

TEST_CASE("embedding plugin") {
    TempDir dir;
    std::vector<std::filesystem::path> images;
    for (const auto* n : {"x.png", "y.png"}) {
        images.push_back(dir / n);
        write_png(synth::render_face(1, images.size(), 32, 32).image, images.back());
    }
    const auto s = write_script(dir / "emb.sh",
                                "while read -r p; do case \"$p\" in *x.png) printf '%s\\t1,0,2\\n' \"$p\";;"
                                " *) printf '%s\\t1,oops\\n' \"$p\";; esac; done\n");
    const auto out = embed_with_plugin({s.string(), {}, std::nullopt}, images);
    REQUIRE(out.size() == 2);
    REQUIRE(out[0].vector);
    CHECK(*out[0].vector == Eigen::Vector3d(1, 0, 2));
    CHECK_FALSE(out[1].vector);
    CHECK_FALSE(out[1].error.empty());
}
