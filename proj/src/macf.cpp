#include "pvlog/macf.hpp"

#include <future>
#include <set>
#include <sstream>

#include "pvlog/schemas.hpp"

namespace pvlog::macf {

namespace {

constexpr const char* kSystem =
    "You are one agent in an automated stylized vlog production pipeline. "
    "Reply with exactly one fenced JSON document in the requested shape.";

struct AgentTable {
    const char* id;
    const char* schema;
    std::set<std::string> generator_vars;
    std::set<std::string> reviewer_vars;
};

const AgentTable* agent_table(const std::string& id) {
    static const std::vector<AgentTable> table = {
        {"story", schema::kStory, {"theme"}, {"theme", "candidate"}},
        {"seg", schema::kStoryboards, {"story", "k_min", "k_max"}, {"story", "candidate", "k_min", "k_max"}},
        {"video", schema::kVideoPrompts, {"storyboards"}, {"storyboards", "candidate"}},
        {"mono", schema::kMonologues, {"storyboards"}, {"storyboards", "candidate"}},
        {"music", schema::kMusic, {"theme", "storyboards"}, {"theme", "candidate"}},
    };
    for (const auto& row : table) {
        if (id == row.id) return &row;
    }
    return nullptr;
}

void check_placeholders(const PromptTemplate& tpl, const std::set<std::string>& allowed) {
    for (const auto& p : tpl.placeholders()) {
        if (!allowed.count(p)) {
            throw ConfigError("template '" + tpl.id() + "' uses undeclared placeholder '" + p + "'");
        }
    }
}

std::vector<ChatPart> make_parts(std::string prompt, const std::vector<AssetRef>& images) {
    std::vector<ChatPart> parts;
    parts.push_back({std::move(prompt), std::nullopt});
    for (const auto& img : images) parts.push_back({"", img});
    return parts;
}

/// Indexed {index, text} array out of a checked document, as domain pairs.
std::vector<std::pair<int, std::string>> indexed_entries(const json& doc, const char* field) {
    std::vector<std::pair<int, std::string>> out;
    for (const auto& e : doc.at(field)) {
        out.emplace_back(e.at("index").get<int>(), e.at("text").get<std::string>());
    }
    return out;
}

/// Indices must be exactly 1..expected (the list arrives sorted and unique).
std::optional<std::string> check_arity(const json& doc, const char* field, int expected,
                                       const std::string& what) {
    auto entries = indexed_entries(doc, field);
    if (static_cast<int>(entries.size()) != expected) {
        return what + " count mismatch: expected " + std::to_string(expected) + ", got " +
               std::to_string(entries.size());
    }
    for (int i = 0; i < expected; ++i) {
        if (entries[i].first != i + 1) {
            return what + " indices must be exactly 1.." + std::to_string(expected);
        }
    }
    return std::nullopt;
}

} // namespace

std::vector<std::string> MacfConfig::validate() const {
    std::vector<std::string> v;
    if (max_rounds < 1) v.push_back("max_rounds must be >= 1");
    if (k_min < 1) v.push_back("k_min must be >= 1");
    if (k_max < k_min) v.push_back("k_max must be >= k_min");
    return v;
}

AgentSpec make_agent_spec(const std::string& id, const TemplateLibrary& templates,
                          const MacfConfig& config) {
    const AgentTable* row = agent_table(id);
    if (!row) throw ConfigError("unknown agent id '" + id + "'");
    AgentSpec spec;
    spec.id = id;
    spec.generator_template = templates.get(id + "/generator");
    spec.reviewer_template = templates.get(id + "/reviewer");
    spec.output_schema = row->schema;
    spec.max_rounds = config.max_rounds;
    check_placeholders(spec.generator_template, row->generator_vars);
    check_placeholders(spec.reviewer_template, row->reviewer_vars);
    return spec;
}

json chat_structured(ChatModel& model, const std::string& stage, const std::string& system,
                     std::vector<ChatPart> parts, const std::string& schema_id) {
    ChatRequest request{system, parts, schema_id};
    ChatResponse response = model.chat(request);
    try {
        return schema::parse_structured(response.text, schema_id);
    } catch (const ParseError& first) {
        ChatRequest repair = request;
        repair.parts.push_back(
            {"Your previous reply was rejected: " + std::string(first.what()) +
                 "\nPrevious reply:\n" + response.text +
                 "\nReply again with exactly one fenced JSON document in the required shape.",
             std::nullopt});
        ChatResponse second = model.chat(repair);
        try {
            return schema::parse_structured(second.text, schema_id);
        } catch (const ParseError& again) {
            throw StageError(stage, "structured output failed after repair: " + std::string(again.what()));
        }
    }
}

GenerateReviewResult generate_review(ChatModel& model, const AgentSpec& spec,
                                     const std::map<std::string, std::string>& vars,
                                     const GenerateReviewOptions& options) {
    GenerateReviewResult result;
    std::string base_prompt = spec.generator_template.render(vars);
    for (int round = 1; round <= spec.max_rounds; ++round) {
        std::string prompt = base_prompt;
        for (const auto& v : result.verdicts) {
            prompt += "\n\nFeedback from review round " + std::to_string(v.round) + ": " + v.feedback;
        }
        result.artifact = chat_structured(model, spec.id, kSystem,
                                          make_parts(std::move(prompt), options.generator_images),
                                          spec.output_schema);

        if (options.auto_check) {
            if (auto fail = options.auto_check(result.artifact)) {
                result.verdicts.push_back({spec.id, round, false, *fail});
                continue;
            }
        }

        auto reviewer_vars = vars;
        reviewer_vars["candidate"] = dump_document(result.artifact);
        json verdict = chat_structured(model, spec.id, kSystem,
                                       make_parts(spec.reviewer_template.render(reviewer_vars),
                                                  options.reviewer_images),
                                       schema::kReviewVerdict);
        ReviewVerdict v{spec.id, round, verdict.at("passed").get<bool>(),
                        verdict.at("feedback").get<std::string>()};
        result.verdicts.push_back(v);
        if (v.passed) return result;
    }
    result.review_exhausted = true;
    return result;
}

std::string format_storyboards(const std::vector<Storyboard>& boards) {
    std::ostringstream out;
    for (std::size_t i = 0; i < boards.size(); ++i) {
        if (i) out << "\n";
        out << "Storyboard " << boards[i].index << ": " << boards[i].text;
    }
    return out.str();
}

StoryStageResult run_story_agent(ChatModel& model, const TemplateLibrary& templates,
                                 const MacfConfig& config, const std::string& theme,
                                 const AssetRef& stylized_ref) {
    AgentSpec spec = make_agent_spec("story", templates, config);
    GenerateReviewOptions options;
    options.generator_images = {stylized_ref};
    options.reviewer_images = {stylized_ref};
    auto r = generate_review(model, spec, {{"theme", theme}}, options);
    StoryStageResult out;
    out.character.description = r.artifact.at("character").get<std::string>();
    out.story.text = r.artifact.at("story").get<std::string>();
    out.trace = std::move(r.verdicts);
    out.exhausted = r.review_exhausted;
    return out;
}

SegStageResult run_seg_agent(ChatModel& model, const TemplateLibrary& templates,
                             const MacfConfig& config, const Story& story) {
    AgentSpec spec = make_agent_spec("seg", templates, config);
    GenerateReviewOptions options;
    options.auto_check = [&config](const json& doc) -> std::optional<std::string> {
        int k = static_cast<int>(doc.at("storyboards").size());
        if (k < config.k_min || k > config.k_max) {
            return "storyboard count out of range [" + std::to_string(config.k_min) + "," +
                   std::to_string(config.k_max) + "]: got " + std::to_string(k);
        }
        return check_arity(doc, "storyboards", k, "storyboard");
    };
    auto r = generate_review(model, spec,
                             {{"story", story.text},
                              {"k_min", std::to_string(config.k_min)},
                              {"k_max", std::to_string(config.k_max)}},
                             options);
    SegStageResult out;
    for (const auto& [index, text] : indexed_entries(r.artifact, "storyboards")) {
        out.storyboards.push_back({index, text});
    }
    out.trace = std::move(r.verdicts);
    out.exhausted = r.review_exhausted;
    return out;
}

VideoStageResult run_video_agent(ChatModel& model, const TemplateLibrary& templates,
                                 const MacfConfig& config, const std::vector<Storyboard>& boards) {
    AgentSpec spec = make_agent_spec("video", templates, config);
    int k = static_cast<int>(boards.size());
    GenerateReviewOptions options;
    options.auto_check = [k](const json& doc) {
        return check_arity(doc, "video_prompts", k, "video prompt");
    };
    auto r = generate_review(model, spec, {{"storyboards", format_storyboards(boards)}}, options);
    VideoStageResult out;
    for (const auto& [index, text] : indexed_entries(r.artifact, "video_prompts")) {
        out.prompts.push_back({index, text});
    }
    out.trace = std::move(r.verdicts);
    out.exhausted = r.review_exhausted;
    return out;
}

MonoStageResult run_mono_agent(ChatModel& model, const TemplateLibrary& templates,
                               const MacfConfig& config, const std::vector<Storyboard>& boards) {
    AgentSpec spec = make_agent_spec("mono", templates, config);
    int k = static_cast<int>(boards.size());
    GenerateReviewOptions options;
    options.auto_check = [k](const json& doc) {
        return check_arity(doc, "monologues", k, "monologue");
    };
    auto r = generate_review(model, spec, {{"storyboards", format_storyboards(boards)}}, options);
    MonoStageResult out;
    for (const auto& [index, text] : indexed_entries(r.artifact, "monologues")) {
        out.monologues.push_back({index, text});
    }
    out.trace = std::move(r.verdicts);
    out.exhausted = r.review_exhausted;
    return out;
}

MusicStageResult run_music_agent(ChatModel& model, const TemplateLibrary& templates,
                                 const MacfConfig& config, const std::vector<Storyboard>& boards,
                                 const std::string& theme) {
    AgentSpec spec = make_agent_spec("music", templates, config);
    auto r = generate_review(model, spec,
                             {{"theme", theme}, {"storyboards", format_storyboards(boards)}}, {});
    MusicStageResult out;
    out.music.text = r.artifact.at("music").get<std::string>();
    out.trace = std::move(r.verdicts);
    out.exhausted = r.review_exhausted;
    return out;
}

PlanBundle run_macf(ChatModel& model, const TemplateLibrary& templates, const MacfConfig& config,
                    const ThemeSpec& theme_spec, const AssetRef& stylized_ref) {
    if (auto v = config.validate(); !v.empty()) {
        throw ConfigError("macf config: " + v.front());
    }
    MacfCheckpoint cp;
    auto fail = [&cp](const StageError& e) -> MacfStageError {
        return MacfStageError(e.stage, e.what(), cp);
    };
    auto check_exhaustion = [&config](const std::string& stage, bool exhausted) {
        if (exhausted && config.abort_on_exhaustion) {
            throw StageError(stage, "review rounds exhausted");
        }
    };

    PlanBundle plan;
    try {
        auto story = run_story_agent(model, templates, config, theme_spec.theme_text, stylized_ref);
        check_exhaustion("story", story.exhausted);
        plan.character = story.character;
        plan.story = story.story;
        plan.review_trace = story.trace;
        cp.character = story.character;
        cp.story = story.story;
        cp.trace = plan.review_trace;

        auto seg = run_seg_agent(model, templates, config, plan.story);
        check_exhaustion("seg", seg.exhausted);
        plan.storyboards = seg.storyboards;
        plan.review_trace.insert(plan.review_trace.end(), seg.trace.begin(), seg.trace.end());
        cp.storyboards = seg.storyboards;
        cp.trace = plan.review_trace;
    } catch (const StageError& e) {
        throw fail(e);
    }

    // Downstream agents read only the frozen storyboards, so run concurrently.
    auto video_f = std::async(std::launch::async, [&] {
        return run_video_agent(model, templates, config, plan.storyboards);
    });
    auto mono_f = std::async(std::launch::async, [&] {
        return run_mono_agent(model, templates, config, plan.storyboards);
    });
    auto music_f = std::async(std::launch::async, [&] {
        return run_music_agent(model, templates, config, plan.storyboards, theme_spec.theme_text);
    });
    try {
        auto video = video_f.get();
        auto mono = mono_f.get();
        auto music = music_f.get();
        check_exhaustion("video", video.exhausted);
        check_exhaustion("mono", mono.exhausted);
        check_exhaustion("music", music.exhausted);
        plan.video_prompts = video.prompts;
        plan.monologues = mono.monologues;
        plan.music = music.music;
        plan.review_trace.insert(plan.review_trace.end(), video.trace.begin(), video.trace.end());
        plan.review_trace.insert(plan.review_trace.end(), mono.trace.begin(), mono.trace.end());
        plan.review_trace.insert(plan.review_trace.end(), music.trace.begin(), music.trace.end());
    } catch (const StageError& e) {
        throw fail(e);
    }

    if (auto violations = validate(plan); !violations.empty()) {
        throw fail(StageError("macf", "plan bundle invalid: " + violations.front()));
    }
    return plan;
}

} // namespace pvlog::macf
