#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace pvlog {

using json = nlohmann::json;

// Schema identifiers carried by persisted top-level documents.
inline constexpr const char* kSchemaPlanBundle = "pvlog/plan_bundle/v1";
inline constexpr const char* kSchemaKeyframeRecord = "pvlog/keyframe_record/v1";
inline constexpr const char* kSchemaVideoRecord = "pvlog/video_record/v1";
inline constexpr const char* kSchemaVlogManifest = "pvlog/vlog_manifest/v1";
inline constexpr const char* kSchemaEvalReport = "pvlog/eval_report/v1";
inline constexpr const char* kSchemaRunState = "pvlog/run_state/v1";
inline constexpr const char* kSchemaThemeSpec = "pvlog/theme_spec/v1";
inline constexpr const char* kSchemaAssetMeta = "pvlog/asset_meta/v1";
inline constexpr const char* kSchemaStoryboardScore = "pvlog/storyboard_score/v1";
inline constexpr const char* kSchemaAudioBundle = "pvlog/audio_bundle/v1";
inline constexpr const char* kSchemaConfig = "pvlog/config/v1";
inline constexpr const char* kSchemaBenchmark = "pvlog/benchmark/v1";

/// Canonical document rendering: sorted keys, 2-space indent, trailing newline.
/// deserialize(serialize(x)) re-serializes byte-identically through this.
std::string dump_document(const json& j);

/// Strict object reader: every consumed key is tracked and finish() rejects
/// unknown fields (provider output is untrusted, so parsing fails closed).
class StrictObject {
public:
    explicit StrictObject(const json& j, std::string context);
    const json& require(const char* key) const;
    const json* optional(const char* key) const;
    /// Throws ParseError if the object contains keys never consumed.
    void finish() const;

private:
    const json& j_;
    std::string context_;
    mutable std::vector<std::string> seen_;
};

enum class AssetKind { image, video, audio };
std::string to_string(AssetKind k);
AssetKind asset_kind_from_string(const std::string& s);

struct AssetRef {
    std::string content_hash; // sha-256 hex of the stored bytes
    AssetKind kind = AssetKind::image;
    std::optional<int> width;
    std::optional<int> height;
    std::optional<double> duration; // seconds; videos and audio
    std::string uri;                // locator into the asset store

    json to_json() const;
    static AssetRef from_json(const json& j);
    bool operator==(const AssetRef&) const = default;
};

struct ThemeSpec {
    std::string theme_text;
    std::string style_text;
    AssetRef reference_image;
    std::optional<AssetRef> voice_reference;
    std::uint64_t seed = 0;

    json to_json() const;
    static ThemeSpec from_json(const json& j);
};

struct CharacterProfile {
    std::string description;
    bool operator==(const CharacterProfile&) const = default;
};

struct Story {
    std::string text;
    bool operator==(const Story&) const = default;
};

struct Storyboard {
    int index = 0; // 1..k
    std::string text;
    bool operator==(const Storyboard&) const = default;
};

struct VideoPrompt {
    int index = 0;
    std::string text;
    bool operator==(const VideoPrompt&) const = default;
};

struct Monologue {
    int index = 0;
    std::string text;
    bool operator==(const Monologue&) const = default;
};

struct MusicPrompt {
    std::string text;
    bool operator==(const MusicPrompt&) const = default;
};

struct ReviewVerdict {
    std::string stage; // agent identifier: story, seg, video, mono, music
    int round = 1;
    bool passed = false;
    std::string feedback; // empty iff passed

    json to_json() const;
    static ReviewVerdict from_json(const json& j);
    bool operator==(const ReviewVerdict&) const = default;
};

struct PlanBundle {
    CharacterProfile character;
    Story story;
    std::vector<Storyboard> storyboards;
    std::vector<VideoPrompt> video_prompts;
    std::vector<Monologue> monologues;
    MusicPrompt music;
    std::vector<ReviewVerdict> review_trace;

    int k() const { return static_cast<int>(storyboards.size()); }
    json to_json() const;
    static PlanBundle from_json(const json& j);
};

struct ImageScorePair {
    double i2i = 0.0;
    double i2t = 0.0;

    json to_json() const;
    static ImageScorePair from_json(const json& j);
    bool operator==(const ImageScorePair&) const = default;
};

struct VideoScoreVector {
    double subject_consistency = 0.0;
    double background_consistency = 0.0;
    double motion_smoothness = 0.0;
    double dynamic_degree = 0.0;
    double aesthetic_quality = 0.0;
    double imaging_quality = 0.0;

    static constexpr int kComponents = 6;
    double component(int i) const;
    double& component(int i);
    static const char* component_name(int i);

    json to_json() const;
    static VideoScoreVector from_json(const json& j);
    bool operator==(const VideoScoreVector&) const = default;
};

enum class ImageIssue {
    limb_count,
    abnormal_pose_or_expression,
    abnormal_background_or_foreground,
    unreasonable_clothing,
    low_resolution,
    description_misalignment,
};
std::string to_string(ImageIssue i);
ImageIssue image_issue_from_string(const std::string& s);

struct ImageIssueReport {
    std::vector<ImageIssue> issues;
    std::string suggestion; // nonempty iff issues nonempty

    json to_json() const;
    static ImageIssueReport from_json(const json& j);
    bool operator==(const ImageIssueReport&) const = default;
};

struct VideoIssueReport {
    std::string revised_prompt;
    std::string reason;

    json to_json() const;
    static VideoIssueReport from_json(const json& j);
    bool operator==(const VideoIssueReport&) const = default;
};

enum class AttemptOutcome { accepted, rolled_back, qualified_first_pass };
std::string to_string(AttemptOutcome o);
AttemptOutcome attempt_outcome_from_string(const std::string& s);

struct KeyframeAttempt {
    AssetRef asset;
    ImageScorePair scores;
    std::optional<ImageIssueReport> issue_report;
    AttemptOutcome outcome = AttemptOutcome::accepted;

    json to_json() const;
    static KeyframeAttempt from_json(const json& j);
};

struct KeyframeRecord {
    int index = 0;
    AssetRef accepted;
    ImageScorePair scores;
    std::vector<KeyframeAttempt> attempts;

    json to_json() const;
    static KeyframeRecord from_json(const json& j);
};

struct VideoAttempt {
    AssetRef asset;
    VideoScoreVector scores;
    std::optional<VideoIssueReport> issue_report;
    AttemptOutcome outcome = AttemptOutcome::accepted;

    json to_json() const;
    static VideoAttempt from_json(const json& j);
};

struct VideoRecord {
    int index = 0;
    AssetRef accepted;
    VideoScoreVector scores;
    std::vector<VideoAttempt> attempts;

    json to_json() const;
    static VideoRecord from_json(const json& j);
};

struct ClipEntry {
    int index = 0;
    AssetRef video;
    AssetRef speech;
    double speech_offset = 0.0; // seconds from clip start
    double clip_duration = 0.0;
    std::optional<double> speech_trimmed_to; // recorded when speech outruns the clip

    json to_json() const;
    static ClipEntry from_json(const json& j);
};

struct Provenance {
    std::uint64_t seed = 0;
    std::map<std::string, std::string> providers;
    std::string config_digest;
    std::string tts_voice; // "default" or "reference:<hash>"
    std::string mux_command;

    json to_json() const;
    static Provenance from_json(const json& j);
};

struct VlogManifest {
    AssetRef stylized_reference;
    std::vector<ClipEntry> clips;
    AssetRef bgm;
    double bgm_gain_db = 0.0;
    double total_duration = 0.0;
    Provenance provenance;

    json to_json() const;
    static VlogManifest from_json(const json& j);
};

inline constexpr const char* kStoryboardDimensions[4] = {
    "story_interest", "temporal_continuity", "behavioral_diversity", "thematic_consistency"};

struct StoryboardDimensionScore {
    std::string name;
    int score = 0; // 1..5
    std::string reason;

    json to_json() const;
    static StoryboardDimensionScore from_json(const json& j);
    bool operator==(const StoryboardDimensionScore&) const = default;
};

struct StoryboardScore {
    std::vector<StoryboardDimensionScore> dimensions; // exactly the four names

    std::optional<int> score_for(const std::string& name) const;
    json to_json() const;
    static StoryboardScore from_json(const json& j);
};

struct ItemReport {
    std::string item_id;
    std::optional<StoryboardScore> storyboard; // absent = unscored (judge failure)
    std::optional<double> text_image_alignment;
    std::optional<double> character_consistency;
    bool character_consistency_incomplete = false; // pose unavailable, clip term only
    std::optional<VideoScoreVector> video;

    json to_json() const;
    static ItemReport from_json(const json& j);
};

struct EvalAggregate {
    std::map<std::string, double> storyboard; // mean per dimension, scored items only
    std::optional<double> text_image_alignment;
    std::optional<double> character_consistency;
    std::optional<VideoScoreVector> video;

    json to_json() const;
    static EvalAggregate from_json(const json& j);
};

struct EvalReport {
    std::string judge_identity;
    std::string judge_template_id;
    std::string note; // comparability caveat embedded in every report
    std::vector<ItemReport> per_item;
    EvalAggregate aggregate;
    int items_total = 0;
    int items_storyboard_unscored = 0;

    json to_json() const;
    static EvalReport from_json(const json& j);
};

// ---------------------------------------------------------------------------
// validate(): total functions returning violated invariants in field order.

std::vector<std::string> validate(const AssetRef& a);
std::vector<std::string> validate(const ThemeSpec& t);
std::vector<std::string> validate(const PlanBundle& p);
std::vector<std::string> validate(const ImageScorePair& s);
std::vector<std::string> validate(const VideoScoreVector& v);
std::vector<std::string> validate(const ImageIssueReport& r);
std::vector<std::string> validate(const VideoIssueReport& r);
std::vector<std::string> validate(const KeyframeRecord& r);
std::vector<std::string> validate(const VideoRecord& r);
std::vector<std::string> validate(const VlogManifest& m);
std::vector<std::string> validate(const StoryboardScore& s);
std::vector<std::string> validate(const EvalReport& r);

/// Dispatches on the document's "schema" field. Returns violations; a
/// document that fails to parse yields a single parse violation.
std::vector<std::string> validate_document(const json& doc);

} // namespace pvlog
