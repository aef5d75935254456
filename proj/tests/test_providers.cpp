#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "pvlog/http_providers.hpp"
#include "pvlog/mock_providers.hpp"
#include "pvlog/schemas.hpp"
#include "test_util.hpp"

using namespace pvlog;
using namespace pvlog::test;

TEST_CASE("with_retry retries only retryable failures, bounded by max_attempts") {
    RetryPolicy fast{3, 0.0};

    SUBCASE("recovers within the budget") {
        int calls = 0;
        int got = with_retry(fast, [&] {
            if (++calls < 3) throw ProviderError("flaky", true);
            return 41;
        });
        CHECK(got == 41);
        CHECK(calls == 3);
    }
    SUBCASE("exhausts the budget") {
        int calls = 0;
        CHECK_THROWS_AS(with_retry(fast, [&]() -> int {
            ++calls;
            throw ProviderError("down", true);
        }),
                        ProviderError);
        CHECK(calls == 3);
    }
    SUBCASE("fatal errors are never retried") {
        int calls = 0;
        CHECK_THROWS_AS(with_retry(fast, [&]() -> int {
            ++calls;
            throw ProviderError("bad key", false);
        }),
                        ProviderError);
        CHECK(calls == 1);
    }
}

TEST_CASE("token bucket") {
    TokenBucket bucket(2.0, 1000.0);
    CHECK(bucket.try_acquire());
    CHECK(bucket.try_acquire());
    // immediately after draining, a third grab may fail; refill is 1000/s so
    // blocking acquire returns quickly
    bucket.acquire();
    CHECK(true);
}

TEST_CASE("provider_credential reads PV_<NAME>_KEY") {
    ::setenv("PV_TESTPROV_KEY", "sekrit", 1);
    auto got = provider_credential("testprov");
    REQUIRE(got.has_value());
    CHECK(*got == "sekrit");
    ::unsetenv("PV_TESTPROV_KEY");
    CHECK_FALSE(provider_credential("testprov").has_value());
}

TEST_CASE("http error classification") {
    CHECK(classify_http_error(429, "slow down").retryable);
    CHECK(classify_http_error(503, "oops").retryable);
    CHECK(classify_http_error(408, "timeout").retryable);
    CHECK_FALSE(classify_http_error(401, "no").retryable);
    CHECK_FALSE(classify_http_error(403, "no").retryable);
    CHECK_FALSE(classify_http_error(400, "bad request").retryable);
}

TEST_CASE("http chat model against a fake transport") {
    TempDir tmp;
    AssetStore store(tmp.path());
    ProviderConfig config;
    config.model_name = "chat-x";
    config.retry = {3, 0.0};

    SUBCASE("builds the message body and returns text") {
        std::string seen_path, seen_body;
        HttpChatModel chat(config, store, [&](const std::string& path, const std::string& body) {
            seen_path = path;
            seen_body = body;
            return HttpResult{200, json{{"text", "hello"}}.dump()};
        });
        AssetRef img = store.put(mockfmt::make_image(1, 768, 1360), AssetKind::image, 768, 1360);
        ChatResponse res = chat.chat({"sys", {{"prompt", std::nullopt}, {"", img}}, "schema"});
        CHECK(res.text == "hello");
        CHECK(seen_path == "/v1/chat");
        json body = json::parse(seen_body);
        CHECK(body["messages"][0]["content"] == "sys");
        CHECK(body["messages"][1]["content"][0]["text"] == "prompt");
        CHECK(body["messages"][1]["content"][1]["type"] == "image_base64");
    }
    SUBCASE("retryable status is retried to success") {
        int calls = 0;
        HttpChatModel chat(config, store, [&](const std::string&, const std::string&) {
            if (++calls < 3) return HttpResult{429, "busy"};
            return HttpResult{200, json{{"text", "ok"}}.dump()};
        });
        CHECK(chat.chat({"s", {{"p", std::nullopt}}, ""}).text == "ok");
        CHECK(calls == 3);
    }
    SUBCASE("auth failure is fatal on the first try") {
        int calls = 0;
        HttpChatModel chat(config, store, [&](const std::string&, const std::string&) {
            ++calls;
            return HttpResult{401, "bad key"};
        });
        CHECK_THROWS_AS(chat.chat({"s", {{"p", std::nullopt}}, ""}), ProviderError);
        CHECK(calls == 1);
    }
}

TEST_CASE("http image editor enforces the configured resolution") {
    TempDir tmp;
    AssetStore store(tmp.path());
    ProviderConfig config;
    config.retry = {1, 0.0};
    AssetRef ref = store.put(mockfmt::make_image(9, 768, 1360), AssetKind::image, 768, 1360);

    SUBCASE("passes knobs through and accepts matching output") {
        json seen;
        HttpImageEditor editor(config, store, [&](const std::string&, const std::string& body) {
            seen = json::parse(body);
            return HttpResult{200, json{{"image_base64", base64_encode("img-bytes")},
                                        {"width", 768},
                                        {"height", 1360}}
                                       .dump()};
        });
        AssetRef out = editor.edit_image("restyle", ref);
        CHECK(out.width == 768);
        CHECK(out.height == 1360);
        CHECK(seen["inference_steps"] == 20);
        CHECK(seen["guidance_scale"] == doctest::Approx(3.5));
        CHECK(seen["width"] == 768);
        CHECK(seen["height"] == 1360);
    }
    SUBCASE("wrong resolution is rejected") {
        HttpImageEditor editor(config, store, [&](const std::string&, const std::string&) {
            return HttpResult{200, json{{"image_base64", base64_encode("x")},
                                        {"width", 512},
                                        {"height", 512}}
                                       .dump()};
        });
        CHECK_THROWS_WITH_AS(editor.edit_image("p", ref),
                             doctest::Contains("512x512"), ProviderError);
    }
}

TEST_CASE("http embedder checks dimension and normalizes") {
    TempDir tmp;
    AssetStore store(tmp.path());
    ProviderConfig config;
    config.retry = {1, 0.0};

    SUBCASE("normalizes to unit length") {
        HttpEmbedder embedder(config, store, [&](const std::string&, const std::string&) {
            return HttpResult{200, json{{"embedding", {3.0, 4.0}}}.dump()};
        }, 2);
        auto v = embedder.embed_text("t");
        CHECK(v[0] == doctest::Approx(0.6));
        CHECK(v[1] == doctest::Approx(0.8));
    }
    SUBCASE("dimension mismatch is fatal") {
        HttpEmbedder embedder(config, store, [&](const std::string&, const std::string&) {
            return HttpResult{200, json{{"embedding", {1.0, 2.0, 3.0}}}.dump()};
        }, 2);
        CHECK_THROWS_AS(embedder.embed_text("t"), ProviderError);
    }
    SUBCASE("zero vector is fatal") {
        HttpEmbedder embedder(config, store, [&](const std::string&, const std::string&) {
            return HttpResult{200, json{{"embedding", {0.0, 0.0}}}.dump()};
        }, 2);
        CHECK_THROWS_AS(embedder.embed_text("t"), ProviderError);
    }
}

TEST_CASE("mock providers are pure functions of inputs and seed") {
    TempDir tmp;
    AssetStore store(tmp.path());
    ProviderSet a = make_mock_providers(7, store);
    ProviderSet b = make_mock_providers(7, store);
    ProviderSet c = make_mock_providers(8, store);

    AssetRef ref = store.put(mockfmt::make_image(1, 768, 1360), AssetKind::image, 768, 1360);

    SUBCASE("image editor") {
        AssetRef x = a.image_editor->edit_image("p", ref);
        AssetRef y = b.image_editor->edit_image("p", ref);
        CHECK(x.content_hash == y.content_hash);
        CHECK(x.width == 768);
        CHECK(x.height == 1360);
        CHECK(a.image_editor->edit_image("q", ref).content_hash != x.content_hash);
        CHECK(c.image_editor->edit_image("p", ref).content_hash != x.content_hash);
    }
    SUBCASE("video generator produces positive duration and distinct prompts diverge") {
        AssetRef kf = a.image_editor->edit_image("p", ref);
        AssetRef v1 = a.video_generator->image_to_video("walk", kf);
        AssetRef v2 = b.video_generator->image_to_video("walk", kf);
        AssetRef v3 = a.video_generator->image_to_video("run", kf);
        CHECK(v1.content_hash == v2.content_hash);
        CHECK(v1.content_hash != v3.content_hash);
        CHECK(*v1.duration > 0.0);
    }
    SUBCASE("embedder returns unit vectors") {
        auto v = a.embedder->embed_image(ref);
        double norm = 0.0;
        for (double x : v) norm += x * x;
        CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(a.embedder->embed_image(ref) == b.embedder->embed_image(ref));
    }
    SUBCASE("speech and music durations follow the mock formula") {
        AssetRef m = a.music->text_to_music("calm piano with strings");
        CHECK(*m.duration == doctest::Approx(mock_audio_duration("calm piano with strings")));
        AssetRef s = a.speech->text_to_speech("one two three", std::nullopt);
        CHECK(*s.duration == doctest::Approx(1.0)); // floor of 1 second
        CHECK(mock_audio_duration("w w w w w w w w w w w w w w w w w w w w") ==
              doctest::Approx(1.2));
    }
    SUBCASE("chat emits parseable documents for every schema") {
        for (const char* id : {schema::kStory, schema::kStoryboards, schema::kVideoPrompts,
                               schema::kMonologues, schema::kMusic, schema::kReviewVerdict,
                               schema::kImageVerdict, schema::kEditPrompt, schema::kVideoVerdict,
                               schema::kStoryboardJudge}) {
            ChatResponse res = a.chat->chat({"sys", {{"Storyboard 1: x\nStoryboard 2: y", std::nullopt}}, id});
            CHECK_NOTHROW(schema::parse_structured(res.text, id));
        }
    }
}

TEST_CASE("scripted chat model replays replies and records requests") {
    ScriptedChatModel chat;
    chat.push_reply("first");
    chat.push_schema_reply("s2", "second");
    CHECK(chat.chat({"", {{"a", std::nullopt}}, "s1"}).text == "first");
    CHECK(chat.chat({"", {{"b", std::nullopt}}, "s2"}).text == "second");
    CHECK(chat.requests().size() == 2);
    CHECK(chat.requests()[1].parts[0].text == "b");
    CHECK_THROWS_AS(chat.chat({"", {{"c", std::nullopt}}, "s1"}), ProviderError);
}

TEST_CASE("scripted image edit outage throws a retryable=false provider error") {
    TempDir tmp;
    AssetStore store(tmp.path());
    MockOptions options;
    options.image_edit_fail_after = 1;
    MockImageEditor editor(1, store, options);
    AssetRef ref = store.put(mockfmt::make_image(2, 768, 1360), AssetKind::image, 768, 1360);
    CHECK_NOTHROW(editor.edit_image("a", ref));
    CHECK_THROWS_AS(editor.edit_image("b", ref), ProviderError);
}

TEST_CASE("provider set identities cover every role") {
    TempDir tmp;
    AssetStore store(tmp.path());
    ProviderSet p = make_mock_providers(1, store);
    auto ids = p.identities();
    for (const char* role : {"chat", "video_quality_chat", "judge_chat", "image_edit",
                             "image_to_video", "text_to_music", "text_to_speech", "embedder",
                             "pose", "video_analyzer"}) {
        CHECK(ids.count(role) == 1);
    }
}
