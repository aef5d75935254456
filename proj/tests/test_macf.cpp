#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pvlog/macf.hpp"
#include "pvlog/mock_assets.hpp"
#include "pvlog/mock_providers.hpp"
#include "pvlog/schemas.hpp"
#include "test_util.hpp"

using namespace pvlog;
using namespace pvlog::test;

namespace {

std::string fenced(const json& j) {
    return "```json\n" + j.dump() + "\n```";
}

std::string story_reply(const std::string& tag = "x") {
    return fenced(json{{"character", "char " + tag}, {"story", "story " + tag}});
}

std::string verdict_reply(bool passed, const std::string& feedback = "") {
    return fenced(json{{"passed", passed}, {"feedback", feedback}});
}

std::string boards_reply(int k) {
    json arr = json::array();
    for (int i = 1; i <= k; ++i) arr.push_back({{"index", i}, {"text", "scene " + std::to_string(i)}});
    return fenced(json{{"storyboards", arr}});
}

std::string indexed_reply(const char* field, int k) {
    json arr = json::array();
    for (int i = 1; i <= k; ++i) arr.push_back({{"index", i}, {"text", std::string(field) + " " + std::to_string(i)}});
    return fenced(json{{field, arr}});
}

AssetRef mock_ref(AssetStore& store) {
    return store.put(mockfmt::make_image(1, 768, 1360), AssetKind::image, 768, 1360);
}

macf::AgentSpec story_spec(int max_rounds = 3) {
    macf::MacfConfig config;
    config.max_rounds = max_rounds;
    return macf::make_agent_spec("story", TemplateLibrary::builtin(), config);
}

} // namespace

TEST_CASE("reviewer fail^(r-1) then pass costs exactly r generator calls") {
    for (int r = 1; r <= 3; ++r) {
        ScriptedChatModel chat;
        for (int i = 0; i < r; ++i) chat.push_schema_reply(schema::kStory, story_reply(std::to_string(i)));
        for (int i = 0; i < r - 1; ++i) {
            chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(false, "fix " + std::to_string(i)));
        }
        chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(true));

        auto result = macf::generate_review(chat, story_spec(), {{"theme", "t"}});
        CHECK_FALSE(result.review_exhausted);
        CHECK(static_cast<int>(result.verdicts.size()) == r);
        int generator_calls = 0;
        for (const auto& req : chat.requests()) {
            if (req.schema_id == schema::kStory) ++generator_calls;
        }
        CHECK(generator_calls == r);
    }
}

TEST_CASE("all prior feedback is replayed verbatim into later generator prompts") {
    ScriptedChatModel chat;
    chat.push_schema_reply(schema::kStory, story_reply("a"));
    chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(false, "too short"));
    chat.push_schema_reply(schema::kStory, story_reply("b"));
    chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(false, "still flat"));
    chat.push_schema_reply(schema::kStory, story_reply("c"));
    chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(true));

    macf::generate_review(chat, story_spec(), {{"theme", "t"}});
    std::vector<std::string> generator_prompts;
    for (const auto& req : chat.requests()) {
        if (req.schema_id == schema::kStory) generator_prompts.push_back(req.parts[0].text);
    }
    REQUIRE(generator_prompts.size() == 3);
    CHECK(generator_prompts[0].find("too short") == std::string::npos);
    CHECK(generator_prompts[1].find("Feedback from review round 1: too short") != std::string::npos);
    CHECK(generator_prompts[2].find("Feedback from review round 1: too short") != std::string::npos);
    CHECK(generator_prompts[2].find("Feedback from review round 2: still flat") != std::string::npos);
}

TEST_CASE("exhaustion returns the last candidate, flagged") {
    ScriptedChatModel chat;
    for (int i = 0; i < 3; ++i) {
        chat.push_schema_reply(schema::kStory, story_reply(std::to_string(i)));
        chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(false, "no"));
    }
    auto result = macf::generate_review(chat, story_spec(), {{"theme", "t"}});
    CHECK(result.review_exhausted);
    CHECK(result.verdicts.size() == 3);
    CHECK(result.artifact.at("story") == "story 2");
}

TEST_CASE("one repair re-ask on parse failure, then stage error") {
    SUBCASE("repair recovers") {
        ScriptedChatModel chat;
        chat.push_schema_reply(schema::kStory, "this is not json");
        chat.push_schema_reply(schema::kStory, story_reply());
        chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(true));
        auto result = macf::generate_review(chat, story_spec(), {{"theme", "t"}});
        CHECK(result.artifact.at("character") == "char x");
        // repair request carries the parse error and the previous reply
        const auto& repair = chat.requests()[1];
        CHECK(repair.parts.back().text.find("rejected") != std::string::npos);
        CHECK(repair.parts.back().text.find("this is not json") != std::string::npos);
    }
    SUBCASE("second failure aborts the stage") {
        ScriptedChatModel chat;
        chat.push_schema_reply(schema::kStory, "garbage");
        chat.push_schema_reply(schema::kStory, "{\"wrong\": 1}");
        CHECK_THROWS_AS(macf::generate_review(chat, story_spec(), {{"theme", "t"}}), StageError);
    }
}

TEST_CASE("seg agent auto-check consumes a round without a reviewer call") {
    macf::MacfConfig config; // k in [4,8]
    ScriptedChatModel chat;
    chat.push_schema_reply(schema::kStoryboards, boards_reply(2)); // below k_min
    chat.push_schema_reply(schema::kStoryboards, boards_reply(5));
    chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(true));

    auto result = macf::run_seg_agent(chat, TemplateLibrary::builtin(), config, Story{"s"});
    CHECK(result.storyboards.size() == 5);
    REQUIRE(result.trace.size() == 2);
    CHECK_FALSE(result.trace[0].passed);
    CHECK(result.trace[0].feedback.find("out of range") != std::string::npos);
    int reviewer_calls = 0;
    for (const auto& req : chat.requests()) {
        if (req.schema_id == schema::kReviewVerdict) ++reviewer_calls;
    }
    CHECK(reviewer_calls == 1);
}

TEST_CASE("video and mono agents enforce arity against the storyboards") {
    macf::MacfConfig config;
    std::vector<Storyboard> boards;
    for (int i = 1; i <= 4; ++i) boards.push_back({i, "b" + std::to_string(i)});

    ScriptedChatModel chat;
    chat.push_schema_reply(schema::kVideoPrompts, indexed_reply("video_prompts", 3)); // wrong k
    chat.push_schema_reply(schema::kVideoPrompts, indexed_reply("video_prompts", 4));
    chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(true));
    auto video = macf::run_video_agent(chat, TemplateLibrary::builtin(), config, boards);
    CHECK(video.prompts.size() == 4);
    CHECK_FALSE(video.trace[0].passed);

    ScriptedChatModel chat2;
    json arr = json::array();
    for (int i : {1, 2, 3, 5}) arr.push_back({{"index", i}, {"text", "m"}}); // gap at 4
    chat2.push_schema_reply(schema::kMonologues, fenced(json{{"monologues", arr}}));
    chat2.push_schema_reply(schema::kMonologues, indexed_reply("monologues", 4));
    chat2.push_schema_reply(schema::kReviewVerdict, verdict_reply(true));
    auto mono = macf::run_mono_agent(chat2, TemplateLibrary::builtin(), config, boards);
    CHECK(mono.monologues.size() == 4);
    CHECK(mono.trace[0].feedback.find("exactly 1..4") != std::string::npos);
}

TEST_CASE("story agent attaches the stylized reference to generator and reviewer") {
    TempDir tmp;
    AssetStore store(tmp.path());
    AssetRef stylized = mock_ref(store);
    ScriptedChatModel chat;
    chat.push_schema_reply(schema::kStory, story_reply());
    chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(true));
    macf::run_story_agent(chat, TemplateLibrary::builtin(), {}, "theme", stylized);
    for (const auto& req : chat.requests()) {
        bool has_image = false;
        for (const auto& p : req.parts) {
            if (p.image && p.image->content_hash == stylized.content_hash) has_image = true;
        }
        CHECK(has_image);
    }
}

TEST_CASE("run_macf produces a valid plan from mocks") {
    TempDir tmp;
    AssetStore store(tmp.path());
    ProviderSet providers = make_mock_providers(3, store);
    ThemeSpec theme;
    theme.theme_text = "t";
    theme.style_text = "s";
    theme.reference_image = mock_ref(store);
    PlanBundle plan = macf::run_macf(*providers.chat, TemplateLibrary::builtin(), {}, theme,
                                     theme.reference_image);
    CHECK(validate(plan).empty());
    CHECK(plan.k() >= 4);
    CHECK(plan.k() <= 8);
    CHECK(plan.video_prompts.size() == plan.storyboards.size());
    CHECK(plan.monologues.size() == plan.storyboards.size());
}

TEST_CASE("storyboard count stays within bounds over 500 randomized runs") {
    TempDir tmp;
    AssetStore store(tmp.path());
    AssetRef ref = mock_ref(store);
    ThemeSpec theme;
    theme.theme_text = "t";
    theme.style_text = "s";
    theme.reference_image = ref;
    macf::MacfConfig config;
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        MockOptions options;
        options.review_fail_probability = 0.3; // exercise the retry rounds too
        MockChatModel chat(seed, options);
        PlanBundle plan = macf::run_macf(chat, TemplateLibrary::builtin(), config, theme, ref);
        CHECK(plan.k() >= config.k_min);
        CHECK(plan.k() <= config.k_max);
        CHECK(validate(plan).empty());
    }
}

TEST_CASE("stage failure carries the completed-stage checkpoint") {
    TempDir tmp;
    AssetStore store(tmp.path());
    AssetRef ref = mock_ref(store);
    ThemeSpec theme;
    theme.theme_text = "t";
    theme.style_text = "s";
    theme.reference_image = ref;

    ScriptedChatModel chat;
    chat.push_schema_reply(schema::kStory, story_reply());
    chat.push_schema_reply(schema::kStoryboards, boards_reply(5));
    chat.push_schema_reply(schema::kVideoPrompts, "broken");
    chat.push_schema_reply(schema::kVideoPrompts, "still broken"); // repair also fails
    chat.push_schema_reply(schema::kMonologues, indexed_reply("monologues", 5));
    chat.push_schema_reply(schema::kMusic, fenced(json{{"music", "calm"}}));
    for (int i = 0; i < 5; ++i) chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(true));

    try {
        macf::run_macf(chat, TemplateLibrary::builtin(), {}, theme, ref);
        FAIL("expected MacfStageError");
    } catch (const macf::MacfStageError& e) {
        CHECK(e.stage == "video");
        REQUIRE(e.checkpoint.story.has_value());
        CHECK(e.checkpoint.story->text == "story x");
        REQUIRE(e.checkpoint.storyboards.has_value());
        CHECK(e.checkpoint.storyboards->size() == 5);
    }
}

TEST_CASE("abort_on_exhaustion turns exhaustion into a stage failure") {
    TempDir tmp;
    AssetStore store(tmp.path());
    AssetRef ref = mock_ref(store);
    ThemeSpec theme;
    theme.theme_text = "t";
    theme.style_text = "s";
    theme.reference_image = ref;
    macf::MacfConfig config;
    config.abort_on_exhaustion = true;

    ScriptedChatModel chat;
    for (int i = 0; i < config.max_rounds; ++i) {
        chat.push_schema_reply(schema::kStory, story_reply(std::to_string(i)));
        chat.push_schema_reply(schema::kReviewVerdict, verdict_reply(false, "never"));
    }
    CHECK_THROWS_AS(macf::run_macf(chat, TemplateLibrary::builtin(), config, theme, ref),
                    macf::MacfStageError);
}

TEST_CASE("make_agent_spec rejects unknown agents and enforces placeholder closure") {
    macf::MacfConfig config;
    CHECK_THROWS_AS(macf::make_agent_spec("weather", TemplateLibrary::builtin(), config), ConfigError);
    for (const char* id : {"story", "seg", "video", "mono", "music"}) {
        CHECK_NOTHROW(macf::make_agent_spec(id, TemplateLibrary::builtin(), config));
    }
}

TEST_CASE("format_storyboards renders one indexed line per board") {
    std::vector<Storyboard> boards{{1, "wake up"}, {2, "make tea"}};
    CHECK(macf::format_storyboards(boards) == "Storyboard 1: wake up\nStoryboard 2: make tea");
}
