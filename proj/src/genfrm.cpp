#include "pvlog/genfrm.hpp"

#include "pvlog/macf.hpp"
#include "pvlog/schemas.hpp"
#include "pvlog/util.hpp"

namespace pvlog::frm {

namespace {

constexpr const char* kQualitySystem =
    "You are a quality agent in an automated stylized vlog production pipeline. "
    "Reply with exactly one fenced JSON document in the requested shape.";

std::string scores_block(const VideoScoreVector& v) {
    std::string out;
    for (int i = 0; i < VideoScoreVector::kComponents; ++i) {
        out += std::string(VideoScoreVector::component_name(i)) + ": " +
               format_fixed(v.component(i), 4) + "\n";
    }
    return out;
}

} // namespace

std::vector<std::string> FrmConfig::validate() const {
    std::vector<std::string> v;
    if (image_feedback_iterations < 0) v.push_back("image_feedback_iterations must be >= 0");
    if (video_feedback_iterations < 0) v.push_back("video_feedback_iterations must be >= 0");
    return v;
}

AssetRef generate_keyframe(ImageEditor& editor, const TemplateLibrary& templates,
                           const Storyboard& board, const AssetRef& stylized_ref) {
    std::string prompt = templates.get("frm/keyframe_prompt").render({{"board", board.text}});
    return editor.edit_image(prompt, stylized_ref);
}

ImageScorePair score_keyframe(Embedder& embedder, const AssetRef& keyframe,
                              const AssetRef& stylized_ref, const Storyboard& board) {
    auto key = embedder.embed_image(keyframe);
    ImageScorePair scores;
    scores.i2i = metrics::cosine(key, embedder.embed_image(stylized_ref));
    scores.i2t = metrics::cosine(key, embedder.embed_text(board.text));
    return scores;
}

std::optional<ImageIssueReport> assess_image(ChatModel& quality_agent,
                                             const TemplateLibrary& templates,
                                             const AssetRef& keyframe, const Storyboard& board,
                                             const CharacterProfile& character,
                                             const AssetRef& stylized_ref,
                                             const ImageScorePair& scores) {
    std::string prompt = templates.get("frm/image_quality")
                             .render({{"board", board.text},
                                      {"character", character.description},
                                      {"i2i", format_fixed(scores.i2i, 4)},
                                      {"i2t", format_fixed(scores.i2t, 4)}});
    std::vector<ChatPart> parts = {{prompt, std::nullopt}, {"", stylized_ref}, {"", keyframe}};
    json verdict = macf::chat_structured(quality_agent, "keyframes", kQualitySystem,
                                         std::move(parts), schema::kImageVerdict);
    if (verdict.at("qualified").get<bool>()) return std::nullopt;
    ImageIssueReport report;
    for (const auto& i : verdict.at("issues")) {
        report.issues.push_back(image_issue_from_string(i.get<std::string>()));
    }
    report.suggestion = verdict.at("suggestion").get<std::string>();
    return report;
}

AssetRef regenerate_keyframe(ChatModel& edit_agent, ImageEditor& editor,
                             const TemplateLibrary& templates, const ImageIssueReport& report,
                             const Storyboard& board, const AssetRef& stylized_ref) {
    std::string prompt = templates.get("frm/edit_agent")
                             .render({{"board", board.text}, {"suggestion", report.suggestion}});
    json rewrite = macf::chat_structured(edit_agent, "keyframes", kQualitySystem,
                                         {{prompt, std::nullopt}}, schema::kEditPrompt);
    return editor.edit_image(rewrite.at("edit_prompt").get<std::string>(), stylized_ref);
}

bool image_candidate_accepted(const ImageScorePair& original, const ImageScorePair& candidate) {
    return candidate.i2i > original.i2i && candidate.i2t > original.i2t;
}

KeyframeRecord run_image_frm(const ProviderSet& providers, const TemplateLibrary& templates,
                             const FrmConfig& config, const Storyboard& board,
                             const CharacterProfile& character, const AssetRef& stylized_ref) {
    KeyframeRecord record;
    record.index = board.index;

    KeyframeAttempt first;
    first.asset = generate_keyframe(*providers.image_editor, templates, board, stylized_ref);
    first.scores = score_keyframe(*providers.embedder, first.asset, stylized_ref, board);
    first.outcome = AttemptOutcome::accepted;
    record.attempts.push_back(first);

    std::size_t accepted = 0;
    bool qualified_first = false;
    for (int iter = 1; iter <= config.image_feedback_iterations; ++iter) {
        auto& current = record.attempts[accepted];
        auto report = assess_image(*providers.chat, templates, current.asset, board, character,
                                   stylized_ref, current.scores);
        current.issue_report = report;
        if (!report) {
            qualified_first = (accepted == 0 && iter == 1);
            break;
        }
        KeyframeAttempt candidate;
        try {
            candidate.asset = regenerate_keyframe(*providers.chat, *providers.image_editor,
                                                  templates, *report, board, stylized_ref);
        } catch (const StageError&) {
            break; // edit-agent rewrite unparseable: keep the original (fail-safe rollback)
        }
        candidate.scores = score_keyframe(*providers.embedder, candidate.asset, stylized_ref, board);
        if (image_candidate_accepted(record.attempts[accepted].scores, candidate.scores)) {
            candidate.outcome = AttemptOutcome::accepted;
            record.attempts[accepted].outcome = AttemptOutcome::rolled_back;
            record.attempts.push_back(candidate);
            accepted = record.attempts.size() - 1;
        } else {
            candidate.outcome = AttemptOutcome::rolled_back;
            record.attempts.push_back(candidate);
        }
    }
    if (qualified_first) record.attempts[0].outcome = AttemptOutcome::qualified_first_pass;
    record.accepted = record.attempts[accepted].asset;
    record.scores = record.attempts[accepted].scores;
    return record;
}

AssetRef generate_video(VideoGenerator& generator, const VideoPrompt& prompt,
                        const AssetRef& keyframe) {
    return generator.image_to_video(prompt.text, keyframe);
}

VideoScoreVector score_video(VideoAnalyzer& analyzer, const metrics::MetricConfig& config,
                             const AssetRef& video) {
    return metrics::score_video(analyzer, config, video);
}

std::optional<VideoIssueReport> assess_video(ChatModel& quality_agent,
                                             const TemplateLibrary& templates,
                                             const AssetRef& video, const VideoPrompt& prompt,
                                             const VideoScoreVector& scores) {
    std::string rendered = templates.get("frm/video_quality")
                               .render({{"video_prompt", prompt.text},
                                        {"scores", scores_block(scores)}});
    std::vector<ChatPart> parts = {{rendered, std::nullopt}, {"", video}};
    json verdict = macf::chat_structured(quality_agent, "videos", kQualitySystem,
                                         std::move(parts), schema::kVideoVerdict);
    if (verdict.at("qualified").get<bool>()) return std::nullopt;
    VideoIssueReport report;
    report.revised_prompt = verdict.at("revised_prompt").get<std::string>();
    report.reason = verdict.at("reason").get<std::string>();
    return report;
}

AssetRef regenerate_video(VideoGenerator& generator, const VideoIssueReport& report,
                          const AssetRef& keyframe) {
    return generator.image_to_video(report.revised_prompt, keyframe);
}

bool video_candidate_accepted(const VideoScoreVector& original, const VideoScoreVector& candidate) {
    for (int i = 0; i < VideoScoreVector::kComponents; ++i) {
        if (!(candidate.component(i) > original.component(i))) return false;
    }
    return true;
}

VideoRecord run_video_frm(const ProviderSet& providers, const TemplateLibrary& templates,
                          const FrmConfig& config, const metrics::MetricConfig& metric_config,
                          const VideoPrompt& prompt, const AssetRef& accepted_keyframe) {
    VideoRecord record;
    record.index = prompt.index;

    VideoAttempt first;
    first.asset = generate_video(*providers.video_generator, prompt, accepted_keyframe);
    first.scores = frm::score_video(*providers.video_analyzer, metric_config, first.asset);
    first.outcome = AttemptOutcome::accepted;
    record.attempts.push_back(first);

    std::size_t accepted = 0;
    bool qualified_first = false;
    for (int iter = 1; iter <= config.video_feedback_iterations; ++iter) {
        auto& current = record.attempts[accepted];
        auto report = assess_video(*providers.video_quality_chat, templates, current.asset,
                                   prompt, current.scores);
        current.issue_report = report;
        if (!report) {
            qualified_first = (accepted == 0 && iter == 1);
            break;
        }
        VideoAttempt candidate;
        candidate.asset = regenerate_video(*providers.video_generator, *report, accepted_keyframe);
        candidate.scores = frm::score_video(*providers.video_analyzer, metric_config, candidate.asset);
        if (video_candidate_accepted(record.attempts[accepted].scores, candidate.scores)) {
            candidate.outcome = AttemptOutcome::accepted;
            record.attempts[accepted].outcome = AttemptOutcome::rolled_back;
            record.attempts.push_back(candidate);
            accepted = record.attempts.size() - 1;
        } else {
            candidate.outcome = AttemptOutcome::rolled_back;
            record.attempts.push_back(candidate);
        }
    }
    if (qualified_first) record.attempts[0].outcome = AttemptOutcome::qualified_first_pass;
    record.accepted = record.attempts[accepted].asset;
    record.scores = record.attempts[accepted].scores;
    return record;
}

AudioBundle generate_audio(MusicGenerator& music, SpeechSynthesizer& speech,
                           const PlanBundle& plan,
                           const std::optional<AssetRef>& voice_reference) {
    AudioBundle out;
    out.bgm = music.text_to_music(plan.music.text);
    out.used_default_voice = !voice_reference.has_value();
    for (const auto& m : plan.monologues) {
        out.speeches.push_back(speech.text_to_speech(m.text, voice_reference));
    }
    return out;
}

} // namespace pvlog::frm
