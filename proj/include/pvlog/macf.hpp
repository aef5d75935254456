#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pvlog/domain.hpp"
#include "pvlog/prompt_template.hpp"
#include "pvlog/providers.hpp"

namespace pvlog::macf {

struct MacfConfig {
    int max_rounds = 3;     // bounded generate-review rounds per agent
    int k_min = 4;          // storyboard count bounds; the seg prompt states them
    int k_max = 8;
    bool abort_on_exhaustion = false; // default: proceed with last candidate + warning

    std::vector<std::string> validate() const;
};

struct AgentSpec {
    std::string id; // story, seg, video, mono, music
    PromptTemplate generator_template;
    PromptTemplate reviewer_template;
    std::string output_schema;
    int max_rounds = 3;
};

/// Builds the AgentSpec for one of the five agents from the template library,
/// checking that template placeholders stay within the agent's declared
/// variable set.
AgentSpec make_agent_spec(const std::string& id, const TemplateLibrary& templates,
                          const MacfConfig& config);

struct GenerateReviewResult {
    json artifact; // last candidate, schema-normalized
    std::vector<ReviewVerdict> verdicts;
    bool review_exhausted = false;
};

struct GenerateReviewOptions {
    /// Deterministic check run before the reviewer; a returned message is
    /// treated as a reviewer fail and consumes a round.
    std::function<std::optional<std::string>(const json&)> auto_check;
    std::vector<AssetRef> generator_images;
    std::vector<AssetRef> reviewer_images;
};

/// The bounded multi-round generate-review loop. Round r appends all prior
/// reviewer feedback to the generator prompt; stops on pass or max_rounds.
/// On exhaustion the last candidate is still returned, flagged.
GenerateReviewResult generate_review(ChatModel& model, const AgentSpec& spec,
                                     const std::map<std::string, std::string>& vars,
                                     const GenerateReviewOptions& options = {});

/// One chat round-trip with schema parsing and a single repair re-ask that
/// quotes the parse error. Throws StageError when the repair also fails.
json chat_structured(ChatModel& model, const std::string& stage, const std::string& system,
                     std::vector<ChatPart> parts, const std::string& schema_id);

/// Renders storyboards as "Storyboard <i>: <text>" lines for prompts.
std::string format_storyboards(const std::vector<Storyboard>& boards);

struct StoryStageResult {
    CharacterProfile character;
    Story story;
    std::vector<ReviewVerdict> trace;
    bool exhausted = false;
};

struct SegStageResult {
    std::vector<Storyboard> storyboards;
    std::vector<ReviewVerdict> trace;
    bool exhausted = false;
};

struct VideoStageResult {
    std::vector<VideoPrompt> prompts;
    std::vector<ReviewVerdict> trace;
    bool exhausted = false;
};

struct MonoStageResult {
    std::vector<Monologue> monologues;
    std::vector<ReviewVerdict> trace;
    bool exhausted = false;
};

struct MusicStageResult {
    MusicPrompt music;
    std::vector<ReviewVerdict> trace;
    bool exhausted = false;
};

StoryStageResult run_story_agent(ChatModel& model, const TemplateLibrary& templates,
                                 const MacfConfig& config, const std::string& theme,
                                 const AssetRef& stylized_ref);
SegStageResult run_seg_agent(ChatModel& model, const TemplateLibrary& templates,
                             const MacfConfig& config, const Story& story);
VideoStageResult run_video_agent(ChatModel& model, const TemplateLibrary& templates,
                                 const MacfConfig& config, const std::vector<Storyboard>& boards);
MonoStageResult run_mono_agent(ChatModel& model, const TemplateLibrary& templates,
                               const MacfConfig& config, const std::vector<Storyboard>& boards);
MusicStageResult run_music_agent(ChatModel& model, const TemplateLibrary& templates,
                                 const MacfConfig& config, const std::vector<Storyboard>& boards,
                                 const std::string& theme);

/// Stage outputs completed before a MACF failure, for checkpointing.
struct MacfCheckpoint {
    std::optional<CharacterProfile> character;
    std::optional<Story> story;
    std::optional<std::vector<Storyboard>> storyboards;
    std::vector<ReviewVerdict> trace;
};

class MacfStageError : public StageError {
public:
    MacfStageError(const std::string& stage, const std::string& msg, MacfCheckpoint checkpoint)
        : StageError(stage, msg), checkpoint(std::move(checkpoint)) {}
    MacfCheckpoint checkpoint;
};

/// Full MACF run: story -> seg -> {video, mono, music} (the last three
/// concurrently; they share only read-only storyboards). Returns a validated
/// PlanBundle; throws MacfStageError with the completed-stage checkpoint.
PlanBundle run_macf(ChatModel& model, const TemplateLibrary& templates, const MacfConfig& config,
                    const ThemeSpec& theme_spec, const AssetRef& stylized_ref);

} // namespace pvlog::macf
