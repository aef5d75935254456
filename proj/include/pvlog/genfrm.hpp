#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pvlog/domain.hpp"
#include "pvlog/metrics.hpp"
#include "pvlog/prompt_template.hpp"
#include "pvlog/providers.hpp"

namespace pvlog::frm {

struct FrmConfig {
    int image_feedback_iterations = 1; // assess -> regenerate -> compare passes
    int video_feedback_iterations = 1;
    bool strict_dominance = true; // retained for config surface; rollback is always strict

    std::vector<std::string> validate() const;
};

// --- keyframes ---------------------------------------------------------

AssetRef generate_keyframe(ImageEditor& editor, const TemplateLibrary& templates,
                           const Storyboard& board, const AssetRef& stylized_ref);

ImageScorePair score_keyframe(Embedder& embedder, const AssetRef& keyframe,
                              const AssetRef& stylized_ref, const Storyboard& board);

/// One quality-agent call. Empty result means qualified. Scores are rendered
/// to 4 decimal places inside the prompt so the verdict is reproducible.
std::optional<ImageIssueReport> assess_image(ChatModel& quality_agent,
                                             const TemplateLibrary& templates,
                                             const AssetRef& keyframe, const Storyboard& board,
                                             const CharacterProfile& character,
                                             const AssetRef& stylized_ref,
                                             const ImageScorePair& scores);

/// Edit agent rewrites the suggestion into an edit prompt, then the editor
/// produces a new candidate. The original attempt is never mutated.
AssetRef regenerate_keyframe(ChatModel& edit_agent, ImageEditor& editor,
                             const TemplateLibrary& templates, const ImageIssueReport& report,
                             const Storyboard& board, const AssetRef& stylized_ref);

/// Pure acceptance rule: candidate wins iff strictly greater on both scores.
bool image_candidate_accepted(const ImageScorePair& original, const ImageScorePair& candidate);

KeyframeRecord run_image_frm(const ProviderSet& providers, const TemplateLibrary& templates,
                             const FrmConfig& config, const Storyboard& board,
                             const CharacterProfile& character, const AssetRef& stylized_ref);

// --- videos -------------------------------------------------------------

AssetRef generate_video(VideoGenerator& generator, const VideoPrompt& prompt,
                        const AssetRef& keyframe);

VideoScoreVector score_video(VideoAnalyzer& analyzer, const metrics::MetricConfig& config,
                             const AssetRef& video);

std::optional<VideoIssueReport> assess_video(ChatModel& quality_agent,
                                             const TemplateLibrary& templates,
                                             const AssetRef& video, const VideoPrompt& prompt,
                                             const VideoScoreVector& scores);

/// Regeneration uses the revised prompt verbatim on the accepted keyframe.
AssetRef regenerate_video(VideoGenerator& generator, const VideoIssueReport& report,
                          const AssetRef& keyframe);

/// Pure acceptance rule: candidate wins iff strictly greater on all six.
bool video_candidate_accepted(const VideoScoreVector& original, const VideoScoreVector& candidate);

VideoRecord run_video_frm(const ProviderSet& providers, const TemplateLibrary& templates,
                          const FrmConfig& config, const metrics::MetricConfig& metric_config,
                          const VideoPrompt& prompt, const AssetRef& accepted_keyframe);

// --- audio (feedback-free) ------------------------------------------------

struct AudioBundle {
    AssetRef bgm;
    std::vector<AssetRef> speeches; // one per monologue, in index order
    bool used_default_voice = false;
};

AudioBundle generate_audio(MusicGenerator& music, SpeechSynthesizer& speech,
                           const PlanBundle& plan,
                           const std::optional<AssetRef>& voice_reference);

} // namespace pvlog::frm
