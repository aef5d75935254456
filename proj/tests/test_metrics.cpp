#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pvlog/metrics.hpp"
#include "pvlog/mock_providers.hpp"
#include "pvlog/util.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace pvlog;
using namespace pvlog::test;

namespace {

std::vector<double> rand_vec(std::uint64_t seed, int dim) {
    std::vector<double> v(dim);
    for (int i = 0; i < dim; ++i) v[i] = seeded_unit(mix64(seed, i)) * 2.0 - 1.0;
    return v;
}

} // namespace

TEST_CASE("cosine basics") {
    std::vector<double> x{1.0, 0.0}, y{0.0, 1.0};
    CHECK(metrics::cosine(x, x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(metrics::cosine(x, y) == doctest::Approx(0.0).epsilon(1e-12));
    std::vector<double> neg{-1.0, 0.0};
    CHECK(metrics::cosine(x, neg) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK_THROWS_AS(metrics::cosine(x, std::vector<double>{1.0}), ValidationError);
    CHECK_THROWS_AS(metrics::cosine(x, std::vector<double>{0.0, 0.0}), ValidationError);
}

TEST_CASE("cosine matches the brute-force oracle on random vectors") {
    for (std::uint64_t t = 0; t < 200; ++t) {
        auto x = rand_vec(mix64(t, 1), 64);
        auto y = rand_vec(mix64(t, 2), 64);
        CHECK(metrics::cosine(x, y) == doctest::Approx(oracle::cosine(x, y)).epsilon(1e-12));
    }
}

TEST_CASE("text_image_alignment is the mean over aligned pairs") {
    std::vector<std::vector<double>> imgs, txts;
    for (std::uint64_t i = 0; i < 7; ++i) {
        imgs.push_back(rand_vec(mix64(i, 10), 32));
        txts.push_back(rand_vec(mix64(i, 11), 32));
    }
    CHECK(metrics::text_image_alignment(imgs, txts) ==
          doctest::Approx(oracle::text_image_alignment(imgs, txts)).epsilon(1e-12));
    imgs.pop_back();
    CHECK_THROWS_AS(metrics::text_image_alignment(imgs, txts), ValidationError);
}

TEST_CASE("pose diversity boundaries") {
    std::vector<Keypoint> a(17), b(17);
    for (int i = 0; i < 17; ++i) {
        a[i] = {0.25, 0.75};
        b[i] = {0.25, 0.75};
    }
    SUBCASE("identical keypoint sets score 0") {
        auto v = metrics::pose_diversity({a, b});
        REQUIRE(v.has_value());
        CHECK(*v == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("opposite unit-square corners score exactly 1") {
        for (int i = 0; i < 17; ++i) {
            a[i] = {0.0, 0.0};
            b[i] = {1.0, 1.0};
        }
        auto v = metrics::pose_diversity({a, b});
        REQUIRE(v.has_value());
        CHECK(*v == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("fewer than two sets means unavailable") {
        CHECK_FALSE(metrics::pose_diversity({a}).has_value());
        CHECK_FALSE(metrics::pose_diversity({}).has_value());
    }
}

TEST_CASE("pose diversity matches oracle on random sets") {
    for (std::uint64_t t = 0; t < 50; ++t) {
        std::vector<std::vector<Keypoint>> sets;
        int n = 2 + static_cast<int>(t % 4);
        for (int s = 0; s < n; ++s) {
            std::vector<Keypoint> kp(17);
            for (int i = 0; i < 17; ++i) {
                kp[i] = {seeded_unit(mix64(t * 100 + s, i * 2)), seeded_unit(mix64(t * 100 + s, i * 2 + 1))};
            }
            sets.push_back(std::move(kp));
        }
        auto got = metrics::pose_diversity(sets);
        auto want = oracle::pose_diversity(sets);
        REQUIRE(got.has_value());
        CHECK(*got == doctest::Approx(*want).epsilon(1e-12));
    }
}

TEST_CASE("character consistency blends clip and pose terms") {
    // Construct embeddings with known cosines to the reference: 0.8 and one
    // that combines to make the clip term exact.
    std::vector<double> ref{1.0, 0.0};
    std::vector<std::vector<double>> imgs{{0.8, 0.6}, {0.8, -0.6}}; // both cos = 0.8
    auto cc = metrics::character_consistency(imgs, ref, 0.4, 0.5);
    CHECK(cc.clip_term == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(cc.value == doctest::Approx(0.5 * 0.8 + 0.5 * 0.4).epsilon(1e-12));
    CHECK_FALSE(cc.incomplete);

    SUBCASE("missing pose term falls back to the clip term, flagged") {
        auto partial = metrics::character_consistency(imgs, ref, std::nullopt, 0.5);
        CHECK(partial.value == doctest::Approx(0.8).epsilon(1e-12));
        CHECK(partial.incomplete);
    }
    SUBCASE("alpha weighting") {
        auto weighted = metrics::character_consistency(imgs, ref, 0.4, 0.25);
        CHECK(weighted.value == doctest::Approx(0.25 * 0.8 + 0.75 * 0.4).epsilon(1e-12));
    }
}

TEST_CASE("consecutive frame consistency clamps negatives to zero") {
    std::vector<std::vector<double>> frames{{1.0, 0.0}, {1.0, 0.0}, {-1.0, 0.0}};
    // pair 1: cos 1.0; pair 2: cos -1.0 -> 0.0; mean 0.5
    CHECK(metrics::consecutive_frame_consistency(frames) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(metrics::consecutive_frame_consistency({{1.0, 0.0}}), ValidationError);
}

TEST_CASE("motion smoothness from flow") {
    CHECK(metrics::motion_smoothness_from_flow({0.1, 0.1, 0.1, 0.1}) == doctest::Approx(1.0));
    CHECK(metrics::motion_smoothness_from_flow({0.0, 0.0, 0.0}) == doctest::Approx(1.0));
    CHECK(metrics::motion_smoothness_from_flow({0.2, 0.3}) == doctest::Approx(1.0));
    // alternating flow maximizes the second difference
    CHECK(metrics::motion_smoothness_from_flow({0.0, 0.3, 0.0}) == doctest::Approx(0.0));
    for (std::uint64_t t = 0; t < 100; ++t) {
        std::vector<double> flows;
        for (int i = 0; i < 6; ++i) flows.push_back(seeded_unit(mix64(t, i)) * 0.4);
        CHECK(metrics::motion_smoothness_from_flow(flows) ==
              doctest::Approx(oracle::motion_smoothness(flows)).epsilon(1e-12));
    }
}

TEST_CASE("dynamic degree counts pairs above the threshold") {
    CHECK(metrics::dynamic_degree({0.1, 0.01, 0.2, 0.04}, 0.05) == doctest::Approx(0.5));
    CHECK(metrics::dynamic_degree({0.05}, 0.05) == doctest::Approx(0.0)); // strict >
    CHECK_THROWS_AS(metrics::dynamic_degree({}, 0.05), ValidationError);
}

TEST_CASE("mean frame score clamps into [0,1]") {
    CHECK(metrics::mean_frame_score({1.5, -0.5, 0.5}) == doctest::Approx(0.5));
    CHECK(metrics::mean_frame_score({0.25, 0.75}) ==
          doctest::Approx(oracle::mean_frame_score({0.25, 0.75})));
}

TEST_CASE("score_video composes the six metrics and matches oracles") {
    test::TempDir tmp;
    AssetStore store(tmp.path());
    metrics::MetricConfig config;
    MockVideoAnalyzer analyzer(store, config.embedding_dim);

    SUBCASE("constant-frame video: subject consistency 1, dynamic degree 0") {
        std::vector<std::uint64_t> seeds(5, 42);
        AssetRef vid = store.put(mockfmt::make_video(5.0, 768, 1360, seeds), AssetKind::video,
                                 768, 1360, 5.0);
        VideoScoreVector v = metrics::score_video(analyzer, config, vid);
        CHECK(v.subject_consistency == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(v.dynamic_degree == doctest::Approx(0.0));
        CHECK(v.motion_smoothness == doctest::Approx(1.0));
    }

    SUBCASE("random videos: all components in [0,1] and oracle-equal") {
        for (std::uint64_t t = 0; t < 50; ++t) {
            std::vector<std::uint64_t> seeds;
            for (int i = 0; i < 8; ++i) seeds.push_back(mix64(t, i));
            AssetRef vid = store.put(mockfmt::make_video(5.0, 768, 1360, seeds), AssetKind::video,
                                     768, 1360, 5.0);
            VideoScoreVector v = metrics::score_video(analyzer, config, vid);
            for (int c = 0; c < VideoScoreVector::kComponents; ++c) {
                CHECK(v.component(c) >= 0.0);
                CHECK(v.component(c) <= 1.0);
            }
            auto flows = analyzer.estimate_flow(vid);
            CHECK(v.motion_smoothness == doctest::Approx(oracle::motion_smoothness(flows)).epsilon(1e-12));
            CHECK(v.dynamic_degree ==
                  doctest::Approx(oracle::dynamic_degree(flows, config.dynamic_degree_flow_threshold)));
            CHECK(v.subject_consistency ==
                  doctest::Approx(oracle::consecutive_frame_consistency(
                                      analyzer.embed_frames(vid, FrameSpace::subject)))
                      .epsilon(1e-12));
            CHECK(v.aesthetic_quality ==
                  doctest::Approx(oracle::mean_frame_score(
                      analyzer.score_frames(vid, FrameCriterion::aesthetic))));
        }
    }

    SUBCASE("provider-delegated motion smoothness wins over the fallback") {
        MockVideoAnalyzer delegated(store, config.embedding_dim, 0.77);
        std::vector<std::uint64_t> seeds{1, 2, 3, 4};
        AssetRef vid = store.put(mockfmt::make_video(4.0, 768, 1360, seeds), AssetKind::video,
                                 768, 1360, 4.0);
        CHECK(metrics::motion_smoothness(delegated, vid) == doctest::Approx(0.77));
    }
}

TEST_CASE("metric config validation") {
    metrics::MetricConfig c;
    CHECK(c.validate().empty());
    CHECK(c.alpha == doctest::Approx(0.5));
    c.alpha = 1.5;
    CHECK_FALSE(c.validate().empty());
}
