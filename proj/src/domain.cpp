#include "pvlog/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pvlog/errors.hpp"

namespace pvlog {

std::string dump_document(const json& j) {
    return j.dump(2) + "\n";
}

StrictObject::StrictObject(const json& j, std::string context)
    : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) {
        throw ParseError(context_ + ": expected object, got " + std::string(j_.type_name()));
    }
}

const json& StrictObject::require(const char* key) const {
    auto it = j_.find(key);
    if (it == j_.end()) throw ParseError(context_ + ": missing field '" + key + "'");
    seen_.push_back(key);
    return *it;
}

const json* StrictObject::optional(const char* key) const {
    seen_.push_back(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
}

void StrictObject::finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
        if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end()) {
            throw ParseError(context_ + ": unknown field '" + it.key() + "'");
        }
    }
}

namespace {

std::string get_string(const json& j, const std::string& ctx) {
    if (!j.is_string()) throw ParseError(ctx + ": expected string");
    return j.get<std::string>();
}

int get_int(const json& j, const std::string& ctx) {
    if (!j.is_number_integer()) throw ParseError(ctx + ": expected integer");
    return j.get<int>();
}

double get_double(const json& j, const std::string& ctx) {
    if (!j.is_number()) throw ParseError(ctx + ": expected number");
    return j.get<double>();
}

bool get_bool(const json& j, const std::string& ctx) {
    if (!j.is_boolean()) throw ParseError(ctx + ": expected boolean");
    return j.get<bool>();
}

void expect_schema(const StrictObject& o, const char* schema) {
    std::string got = get_string(o.require("schema"), "schema");
    if (got != schema) {
        throw ParseError(std::string("schema mismatch: expected '") + schema + "', got '" + got + "'");
    }
}

bool finite(double v) { return std::isfinite(v); }

} // namespace

// --- AssetKind -------------------------------------------------------------

std::string to_string(AssetKind k) {
    switch (k) {
        case AssetKind::image: return "image";
        case AssetKind::video: return "video";
        case AssetKind::audio: return "audio";
    }
    throw Error("bad AssetKind");
}

AssetKind asset_kind_from_string(const std::string& s) {
    if (s == "image") return AssetKind::image;
    if (s == "video") return AssetKind::video;
    if (s == "audio") return AssetKind::audio;
    throw ParseError("unknown asset kind '" + s + "'");
}

// --- AssetRef ----------------------------------------------------------------

json AssetRef::to_json() const {
    json j{{"content_hash", content_hash}, {"kind", to_string(kind)}, {"uri", uri}};
    if (width) j["width"] = *width;
    if (height) j["height"] = *height;
    if (duration) j["duration"] = *duration;
    return j;
}

AssetRef AssetRef::from_json(const json& j) {
    StrictObject o(j, "AssetRef");
    AssetRef a;
    a.content_hash = get_string(o.require("content_hash"), "AssetRef.content_hash");
    a.kind = asset_kind_from_string(get_string(o.require("kind"), "AssetRef.kind"));
    if (const json* w = o.optional("width")) a.width = get_int(*w, "AssetRef.width");
    if (const json* h = o.optional("height")) a.height = get_int(*h, "AssetRef.height");
    if (const json* d = o.optional("duration")) a.duration = get_double(*d, "AssetRef.duration");
    a.uri = get_string(o.require("uri"), "AssetRef.uri");
    o.finish();
    return a;
}

// --- ThemeSpec ---------------------------------------------------------------

json ThemeSpec::to_json() const {
    json j{{"schema", kSchemaThemeSpec},
           {"theme_text", theme_text},
           {"style_text", style_text},
           {"reference_image", reference_image.to_json()},
           {"seed", seed}};
    if (voice_reference) j["voice_reference"] = voice_reference->to_json();
    return j;
}

ThemeSpec ThemeSpec::from_json(const json& j) {
    StrictObject o(j, "ThemeSpec");
    expect_schema(o, kSchemaThemeSpec);
    ThemeSpec t;
    t.theme_text = get_string(o.require("theme_text"), "ThemeSpec.theme_text");
    t.style_text = get_string(o.require("style_text"), "ThemeSpec.style_text");
    t.reference_image = AssetRef::from_json(o.require("reference_image"));
    if (const json* v = o.optional("voice_reference")) t.voice_reference = AssetRef::from_json(*v);
    t.seed = o.require("seed").get<std::uint64_t>();
    o.finish();
    return t;
}

// --- ReviewVerdict -----------------------------------------------------------

json ReviewVerdict::to_json() const {
    return json{{"stage", stage}, {"round", round}, {"passed", passed}, {"feedback", feedback}};
}

ReviewVerdict ReviewVerdict::from_json(const json& j) {
    StrictObject o(j, "ReviewVerdict");
    ReviewVerdict v;
    v.stage = get_string(o.require("stage"), "ReviewVerdict.stage");
    v.round = get_int(o.require("round"), "ReviewVerdict.round");
    v.passed = get_bool(o.require("passed"), "ReviewVerdict.passed");
    v.feedback = get_string(o.require("feedback"), "ReviewVerdict.feedback");
    o.finish();
    return v;
}

// --- PlanBundle ----------------------------------------------------------------

namespace {

json indexed_to_json(int index, const std::string& text) {
    return json{{"index", index}, {"text", text}};
}

template <typename T>
T indexed_from_json(const json& j, const char* what) {
    StrictObject o(j, what);
    T t;
    t.index = get_int(o.require("index"), std::string(what) + ".index");
    t.text = get_string(o.require("text"), std::string(what) + ".text");
    o.finish();
    return t;
}

} // namespace

json PlanBundle::to_json() const {
    json boards = json::array();
    for (const auto& b : storyboards) boards.push_back(indexed_to_json(b.index, b.text));
    json prompts = json::array();
    for (const auto& p : video_prompts) prompts.push_back(indexed_to_json(p.index, p.text));
    json monos = json::array();
    for (const auto& m : monologues) monos.push_back(indexed_to_json(m.index, m.text));
    json trace = json::array();
    for (const auto& v : review_trace) trace.push_back(v.to_json());
    return json{{"schema", kSchemaPlanBundle},
                {"character", character.description},
                {"story", story.text},
                {"storyboards", boards},
                {"video_prompts", prompts},
                {"monologues", monos},
                {"music", music.text},
                {"review_trace", trace}};
}

PlanBundle PlanBundle::from_json(const json& j) {
    StrictObject o(j, "PlanBundle");
    expect_schema(o, kSchemaPlanBundle);
    PlanBundle p;
    p.character.description = get_string(o.require("character"), "PlanBundle.character");
    p.story.text = get_string(o.require("story"), "PlanBundle.story");
    for (const auto& b : o.require("storyboards")) {
        p.storyboards.push_back(indexed_from_json<Storyboard>(b, "Storyboard"));
    }
    for (const auto& v : o.require("video_prompts")) {
        p.video_prompts.push_back(indexed_from_json<VideoPrompt>(v, "VideoPrompt"));
    }
    for (const auto& m : o.require("monologues")) {
        p.monologues.push_back(indexed_from_json<Monologue>(m, "Monologue"));
    }
    p.music.text = get_string(o.require("music"), "PlanBundle.music");
    for (const auto& v : o.require("review_trace")) {
        p.review_trace.push_back(ReviewVerdict::from_json(v));
    }
    o.finish();
    return p;
}

// --- Scores --------------------------------------------------------------------

json ImageScorePair::to_json() const {
    return json{{"i2i", i2i}, {"i2t", i2t}};
}

ImageScorePair ImageScorePair::from_json(const json& j) {
    StrictObject o(j, "ImageScorePair");
    ImageScorePair s;
    s.i2i = get_double(o.require("i2i"), "ImageScorePair.i2i");
    s.i2t = get_double(o.require("i2t"), "ImageScorePair.i2t");
    o.finish();
    return s;
}

double VideoScoreVector::component(int i) const {
    switch (i) {
        case 0: return subject_consistency;
        case 1: return background_consistency;
        case 2: return motion_smoothness;
        case 3: return dynamic_degree;
        case 4: return aesthetic_quality;
        case 5: return imaging_quality;
    }
    throw Error("bad component index");
}

double& VideoScoreVector::component(int i) {
    switch (i) {
        case 0: return subject_consistency;
        case 1: return background_consistency;
        case 2: return motion_smoothness;
        case 3: return dynamic_degree;
        case 4: return aesthetic_quality;
        case 5: return imaging_quality;
    }
    throw Error("bad component index");
}

const char* VideoScoreVector::component_name(int i) {
    static const char* names[] = {"subject_consistency", "background_consistency",
                                  "motion_smoothness",   "dynamic_degree",
                                  "aesthetic_quality",   "imaging_quality"};
    if (i < 0 || i >= kComponents) throw Error("bad component index");
    return names[i];
}

json VideoScoreVector::to_json() const {
    json j;
    for (int i = 0; i < kComponents; ++i) j[component_name(i)] = component(i);
    return j;
}

VideoScoreVector VideoScoreVector::from_json(const json& j) {
    StrictObject o(j, "VideoScoreVector");
    VideoScoreVector v;
    for (int i = 0; i < kComponents; ++i) {
        v.component(i) = get_double(o.require(component_name(i)), component_name(i));
    }
    o.finish();
    return v;
}

// --- Issue reports ----------------------------------------------------------------

std::string to_string(ImageIssue i) {
    switch (i) {
        case ImageIssue::limb_count: return "limb_count";
        case ImageIssue::abnormal_pose_or_expression: return "abnormal_pose_or_expression";
        case ImageIssue::abnormal_background_or_foreground: return "abnormal_background_or_foreground";
        case ImageIssue::unreasonable_clothing: return "unreasonable_clothing";
        case ImageIssue::low_resolution: return "low_resolution";
        case ImageIssue::description_misalignment: return "description_misalignment";
    }
    throw Error("bad ImageIssue");
}

ImageIssue image_issue_from_string(const std::string& s) {
    for (int i = 0; i < 6; ++i) {
        auto issue = static_cast<ImageIssue>(i);
        if (to_string(issue) == s) return issue;
    }
    throw ParseError("unknown image issue '" + s + "'");
}

json ImageIssueReport::to_json() const {
    json arr = json::array();
    for (auto i : issues) arr.push_back(to_string(i));
    return json{{"issues", arr}, {"suggestion", suggestion}};
}

ImageIssueReport ImageIssueReport::from_json(const json& j) {
    StrictObject o(j, "ImageIssueReport");
    ImageIssueReport r;
    for (const auto& i : o.require("issues")) {
        r.issues.push_back(image_issue_from_string(get_string(i, "ImageIssueReport.issues[]")));
    }
    r.suggestion = get_string(o.require("suggestion"), "ImageIssueReport.suggestion");
    o.finish();
    return r;
}

json VideoIssueReport::to_json() const {
    return json{{"revised_prompt", revised_prompt}, {"reason", reason}};
}

VideoIssueReport VideoIssueReport::from_json(const json& j) {
    StrictObject o(j, "VideoIssueReport");
    VideoIssueReport r;
    r.revised_prompt = get_string(o.require("revised_prompt"), "VideoIssueReport.revised_prompt");
    r.reason = get_string(o.require("reason"), "VideoIssueReport.reason");
    o.finish();
    return r;
}

// --- Attempt records -----------------------------------------------------------------

std::string to_string(AttemptOutcome o) {
    switch (o) {
        case AttemptOutcome::accepted: return "accepted";
        case AttemptOutcome::rolled_back: return "rolled_back";
        case AttemptOutcome::qualified_first_pass: return "qualified_first_pass";
    }
    throw Error("bad AttemptOutcome");
}

AttemptOutcome attempt_outcome_from_string(const std::string& s) {
    if (s == "accepted") return AttemptOutcome::accepted;
    if (s == "rolled_back") return AttemptOutcome::rolled_back;
    if (s == "qualified_first_pass") return AttemptOutcome::qualified_first_pass;
    throw ParseError("unknown attempt outcome '" + s + "'");
}

json KeyframeAttempt::to_json() const {
    json j{{"asset", asset.to_json()}, {"scores", scores.to_json()}, {"outcome", to_string(outcome)}};
    if (issue_report) j["issue_report"] = issue_report->to_json();
    return j;
}

KeyframeAttempt KeyframeAttempt::from_json(const json& j) {
    StrictObject o(j, "KeyframeAttempt");
    KeyframeAttempt a;
    a.asset = AssetRef::from_json(o.require("asset"));
    a.scores = ImageScorePair::from_json(o.require("scores"));
    if (const json* r = o.optional("issue_report")) a.issue_report = ImageIssueReport::from_json(*r);
    a.outcome = attempt_outcome_from_string(get_string(o.require("outcome"), "KeyframeAttempt.outcome"));
    o.finish();
    return a;
}

json KeyframeRecord::to_json() const {
    json attempts_j = json::array();
    for (const auto& a : attempts) attempts_j.push_back(a.to_json());
    return json{{"schema", kSchemaKeyframeRecord},
                {"index", index},
                {"accepted", accepted.to_json()},
                {"scores", scores.to_json()},
                {"attempts", attempts_j}};
}

KeyframeRecord KeyframeRecord::from_json(const json& j) {
    StrictObject o(j, "KeyframeRecord");
    expect_schema(o, kSchemaKeyframeRecord);
    KeyframeRecord r;
    r.index = get_int(o.require("index"), "KeyframeRecord.index");
    r.accepted = AssetRef::from_json(o.require("accepted"));
    r.scores = ImageScorePair::from_json(o.require("scores"));
    for (const auto& a : o.require("attempts")) r.attempts.push_back(KeyframeAttempt::from_json(a));
    o.finish();
    return r;
}

json VideoAttempt::to_json() const {
    json j{{"asset", asset.to_json()}, {"scores", scores.to_json()}, {"outcome", to_string(outcome)}};
    if (issue_report) j["issue_report"] = issue_report->to_json();
    return j;
}

VideoAttempt VideoAttempt::from_json(const json& j) {
    StrictObject o(j, "VideoAttempt");
    VideoAttempt a;
    a.asset = AssetRef::from_json(o.require("asset"));
    a.scores = VideoScoreVector::from_json(o.require("scores"));
    if (const json* r = o.optional("issue_report")) a.issue_report = VideoIssueReport::from_json(*r);
    a.outcome = attempt_outcome_from_string(get_string(o.require("outcome"), "VideoAttempt.outcome"));
    o.finish();
    return a;
}

json VideoRecord::to_json() const {
    json attempts_j = json::array();
    for (const auto& a : attempts) attempts_j.push_back(a.to_json());
    return json{{"schema", kSchemaVideoRecord},
                {"index", index},
                {"accepted", accepted.to_json()},
                {"scores", scores.to_json()},
                {"attempts", attempts_j}};
}

VideoRecord VideoRecord::from_json(const json& j) {
    StrictObject o(j, "VideoRecord");
    expect_schema(o, kSchemaVideoRecord);
    VideoRecord r;
    r.index = get_int(o.require("index"), "VideoRecord.index");
    r.accepted = AssetRef::from_json(o.require("accepted"));
    r.scores = VideoScoreVector::from_json(o.require("scores"));
    for (const auto& a : o.require("attempts")) r.attempts.push_back(VideoAttempt::from_json(a));
    o.finish();
    return r;
}

// --- Manifest --------------------------------------------------------------------------

json ClipEntry::to_json() const {
    json j{{"index", index},
           {"video", video.to_json()},
           {"speech", speech.to_json()},
           {"speech_offset", speech_offset},
           {"clip_duration", clip_duration}};
    if (speech_trimmed_to) j["speech_trimmed_to"] = *speech_trimmed_to;
    return j;
}

ClipEntry ClipEntry::from_json(const json& j) {
    StrictObject o(j, "ClipEntry");
    ClipEntry c;
    c.index = get_int(o.require("index"), "ClipEntry.index");
    c.video = AssetRef::from_json(o.require("video"));
    c.speech = AssetRef::from_json(o.require("speech"));
    c.speech_offset = get_double(o.require("speech_offset"), "ClipEntry.speech_offset");
    c.clip_duration = get_double(o.require("clip_duration"), "ClipEntry.clip_duration");
    if (const json* t = o.optional("speech_trimmed_to")) {
        c.speech_trimmed_to = get_double(*t, "ClipEntry.speech_trimmed_to");
    }
    o.finish();
    return c;
}

json Provenance::to_json() const {
    return json{{"seed", seed},
                {"providers", providers},
                {"config_digest", config_digest},
                {"tts_voice", tts_voice},
                {"mux_command", mux_command}};
}

Provenance Provenance::from_json(const json& j) {
    StrictObject o(j, "Provenance");
    Provenance p;
    p.seed = o.require("seed").get<std::uint64_t>();
    const json& pv = o.require("providers");
    for (auto it = pv.begin(); it != pv.end(); ++it) {
        p.providers[it.key()] = get_string(it.value(), "Provenance.providers[]");
    }
    p.config_digest = get_string(o.require("config_digest"), "Provenance.config_digest");
    p.tts_voice = get_string(o.require("tts_voice"), "Provenance.tts_voice");
    p.mux_command = get_string(o.require("mux_command"), "Provenance.mux_command");
    o.finish();
    return p;
}

json VlogManifest::to_json() const {
    json clips_j = json::array();
    for (const auto& c : clips) clips_j.push_back(c.to_json());
    return json{{"schema", kSchemaVlogManifest},
                {"stylized_reference", stylized_reference.to_json()},
                {"clips", clips_j},
                {"bgm", bgm.to_json()},
                {"bgm_gain_db", bgm_gain_db},
                {"total_duration", total_duration},
                {"provenance", provenance.to_json()}};
}

VlogManifest VlogManifest::from_json(const json& j) {
    StrictObject o(j, "VlogManifest");
    expect_schema(o, kSchemaVlogManifest);
    VlogManifest m;
    m.stylized_reference = AssetRef::from_json(o.require("stylized_reference"));
    for (const auto& c : o.require("clips")) m.clips.push_back(ClipEntry::from_json(c));
    m.bgm = AssetRef::from_json(o.require("bgm"));
    m.bgm_gain_db = get_double(o.require("bgm_gain_db"), "VlogManifest.bgm_gain_db");
    m.total_duration = get_double(o.require("total_duration"), "VlogManifest.total_duration");
    m.provenance = Provenance::from_json(o.require("provenance"));
    o.finish();
    return m;
}

// --- Eval types --------------------------------------------------------------------------

json StoryboardDimensionScore::to_json() const {
    return json{{"name", name}, {"score", score}, {"reason", reason}};
}

StoryboardDimensionScore StoryboardDimensionScore::from_json(const json& j) {
    StrictObject o(j, "StoryboardDimensionScore");
    StoryboardDimensionScore d;
    d.name = get_string(o.require("name"), "StoryboardDimensionScore.name");
    d.score = get_int(o.require("score"), "StoryboardDimensionScore.score");
    d.reason = get_string(o.require("reason"), "StoryboardDimensionScore.reason");
    o.finish();
    return d;
}

std::optional<int> StoryboardScore::score_for(const std::string& name) const {
    for (const auto& d : dimensions) {
        if (d.name == name) return d.score;
    }
    return std::nullopt;
}

json StoryboardScore::to_json() const {
    json dims = json::array();
    for (const auto& d : dimensions) dims.push_back(d.to_json());
    return json{{"schema", kSchemaStoryboardScore}, {"dimensions", dims}};
}

StoryboardScore StoryboardScore::from_json(const json& j) {
    StrictObject o(j, "StoryboardScore");
    expect_schema(o, kSchemaStoryboardScore);
    StoryboardScore s;
    for (const auto& d : o.require("dimensions")) {
        s.dimensions.push_back(StoryboardDimensionScore::from_json(d));
    }
    o.finish();
    return s;
}

json ItemReport::to_json() const {
    json j{{"item_id", item_id}};
    j["storyboard"] = storyboard ? storyboard->to_json() : json(nullptr);
    j["text_image_alignment"] = text_image_alignment ? json(*text_image_alignment) : json(nullptr);
    j["character_consistency"] = character_consistency ? json(*character_consistency) : json(nullptr);
    j["character_consistency_incomplete"] = character_consistency_incomplete;
    j["video"] = video ? video->to_json() : json(nullptr);
    return j;
}

ItemReport ItemReport::from_json(const json& j) {
    StrictObject o(j, "ItemReport");
    ItemReport r;
    r.item_id = get_string(o.require("item_id"), "ItemReport.item_id");
    if (const json* s = o.optional("storyboard")) r.storyboard = StoryboardScore::from_json(*s);
    if (const json* t = o.optional("text_image_alignment")) {
        r.text_image_alignment = get_double(*t, "ItemReport.text_image_alignment");
    }
    if (const json* c = o.optional("character_consistency")) {
        r.character_consistency = get_double(*c, "ItemReport.character_consistency");
    }
    r.character_consistency_incomplete =
        get_bool(o.require("character_consistency_incomplete"), "ItemReport.character_consistency_incomplete");
    if (const json* v = o.optional("video")) r.video = VideoScoreVector::from_json(*v);
    o.finish();
    return r;
}

json EvalAggregate::to_json() const {
    json j;
    j["storyboard"] = json(storyboard);
    j["text_image_alignment"] = text_image_alignment ? json(*text_image_alignment) : json(nullptr);
    j["character_consistency"] = character_consistency ? json(*character_consistency) : json(nullptr);
    j["video"] = video ? video->to_json() : json(nullptr);
    return j;
}

EvalAggregate EvalAggregate::from_json(const json& j) {
    StrictObject o(j, "EvalAggregate");
    EvalAggregate a;
    const json& sb = o.require("storyboard");
    for (auto it = sb.begin(); it != sb.end(); ++it) {
        a.storyboard[it.key()] = get_double(it.value(), "EvalAggregate.storyboard[]");
    }
    if (const json* t = o.optional("text_image_alignment")) {
        a.text_image_alignment = get_double(*t, "EvalAggregate.text_image_alignment");
    }
    if (const json* c = o.optional("character_consistency")) {
        a.character_consistency = get_double(*c, "EvalAggregate.character_consistency");
    }
    if (const json* v = o.optional("video")) a.video = VideoScoreVector::from_json(*v);
    o.finish();
    return a;
}

json EvalReport::to_json() const {
    json items = json::array();
    for (const auto& i : per_item) items.push_back(i.to_json());
    return json{{"schema", kSchemaEvalReport},
                {"judge_identity", judge_identity},
                {"judge_template_id", judge_template_id},
                {"note", note},
                {"per_item", items},
                {"aggregate", aggregate.to_json()},
                {"items_total", items_total},
                {"items_storyboard_unscored", items_storyboard_unscored}};
}

EvalReport EvalReport::from_json(const json& j) {
    StrictObject o(j, "EvalReport");
    expect_schema(o, kSchemaEvalReport);
    EvalReport r;
    r.judge_identity = get_string(o.require("judge_identity"), "EvalReport.judge_identity");
    r.judge_template_id = get_string(o.require("judge_template_id"), "EvalReport.judge_template_id");
    r.note = get_string(o.require("note"), "EvalReport.note");
    for (const auto& i : o.require("per_item")) r.per_item.push_back(ItemReport::from_json(i));
    r.aggregate = EvalAggregate::from_json(o.require("aggregate"));
    r.items_total = get_int(o.require("items_total"), "EvalReport.items_total");
    r.items_storyboard_unscored =
        get_int(o.require("items_storyboard_unscored"), "EvalReport.items_storyboard_unscored");
    o.finish();
    return r;
}

// --- validate() ------------------------------------------------------------------------------

std::vector<std::string> validate(const AssetRef& a) {
    std::vector<std::string> v;
    if (a.content_hash.empty()) v.push_back("content_hash empty");
    bool spatial = a.kind == AssetKind::image || a.kind == AssetKind::video;
    if (spatial && (!a.width || !a.height)) v.push_back("width/height required for " + to_string(a.kind));
    if (!spatial && (a.width || a.height)) v.push_back("width/height not allowed for audio");
    bool timed = a.kind == AssetKind::video || a.kind == AssetKind::audio;
    if (timed && !a.duration) v.push_back("duration required for " + to_string(a.kind));
    if (!timed && a.duration) v.push_back("duration not allowed for image");
    if (a.duration && *a.duration <= 0.0) v.push_back("duration must be > 0");
    if (a.uri.empty()) v.push_back("uri empty");
    return v;
}

std::vector<std::string> validate(const ThemeSpec& t) {
    std::vector<std::string> v;
    if (t.theme_text.empty()) v.push_back("theme_text empty");
    if (t.style_text.empty()) v.push_back("style_text empty");
    if (t.reference_image.kind != AssetKind::image) v.push_back("reference_image is not an image");
    for (auto& s : validate(t.reference_image)) v.push_back("reference_image: " + s);
    if (t.voice_reference) {
        if (t.voice_reference->kind != AssetKind::audio) v.push_back("voice_reference is not audio");
    }
    return v;
}

std::vector<std::string> validate(const PlanBundle& p) {
    std::vector<std::string> v;
    if (p.character.description.empty()) v.push_back("character description empty");
    if (p.story.text.empty()) v.push_back("story empty");
    std::set<int> seen;
    for (const auto& b : p.storyboards) {
        if (!seen.insert(b.index).second) v.push_back("duplicate storyboard index " + std::to_string(b.index));
        if (b.text.empty()) v.push_back("storyboard " + std::to_string(b.index) + " text empty");
    }
    int k = p.k();
    for (int i = 1; i <= k; ++i) {
        if (!seen.count(i)) v.push_back("storyboard indices not contiguous 1..k (missing " + std::to_string(i) + ")");
    }
    if (static_cast<int>(p.video_prompts.size()) != k) v.push_back("|storyboards| != |video_prompts|");
    if (static_cast<int>(p.monologues.size()) != k) v.push_back("|storyboards| != |monologues|");
    if (p.music.text.empty()) v.push_back("music prompt empty");
    for (const auto& r : p.review_trace) {
        if (!r.passed && r.feedback.empty()) {
            v.push_back("verdict for stage " + r.stage + " failed without feedback");
        }
        if (r.passed && !r.feedback.empty()) {
            v.push_back("verdict for stage " + r.stage + " passed with nonempty feedback");
        }
    }
    return v;
}

std::vector<std::string> validate(const ImageScorePair& s) {
    std::vector<std::string> v;
    if (!finite(s.i2i)) v.push_back("i2i not finite");
    if (!finite(s.i2t)) v.push_back("i2t not finite");
    return v;
}

std::vector<std::string> validate(const VideoScoreVector& s) {
    std::vector<std::string> v;
    for (int i = 0; i < VideoScoreVector::kComponents; ++i) {
        double c = s.component(i);
        if (!finite(c)) v.push_back(std::string(VideoScoreVector::component_name(i)) + " not finite");
        else if (c < 0.0 || c > 1.0) v.push_back(std::string(VideoScoreVector::component_name(i)) + " out of [0,1]");
    }
    return v;
}

std::vector<std::string> validate(const ImageIssueReport& r) {
    std::vector<std::string> v;
    if (r.issues.empty() != r.suggestion.empty()) {
        v.push_back("suggestion nonempty iff issues nonempty");
    }
    return v;
}

std::vector<std::string> validate(const VideoIssueReport& r) {
    std::vector<std::string> v;
    if (r.revised_prompt.empty()) v.push_back("revised_prompt empty");
    if (r.reason.empty()) v.push_back("reason empty");
    return v;
}

std::vector<std::string> validate(const KeyframeRecord& r) {
    std::vector<std::string> v;
    if (r.attempts.empty()) {
        v.push_back("no attempts");
        return v;
    }
    int matches = 0;
    for (const auto& a : r.attempts) {
        if (a.asset.content_hash == r.accepted.content_hash) ++matches;
    }
    if (matches != 1) v.push_back("accepted must equal exactly one attempt's asset");
    const auto& first = r.attempts.front().scores;
    if (r.scores.i2i < first.i2i || r.scores.i2t < first.i2t) {
        v.push_back("accepted scores must componentwise dominate first attempt");
    }
    return v;
}

std::vector<std::string> validate(const VideoRecord& r) {
    std::vector<std::string> v;
    if (r.attempts.empty()) {
        v.push_back("no attempts");
        return v;
    }
    int matches = 0;
    for (const auto& a : r.attempts) {
        if (a.asset.content_hash == r.accepted.content_hash) ++matches;
    }
    if (matches != 1) v.push_back("accepted must equal exactly one attempt's asset");
    const auto& first = r.attempts.front().scores;
    for (int i = 0; i < VideoScoreVector::kComponents; ++i) {
        if (r.scores.component(i) < first.component(i)) {
            v.push_back("accepted scores must componentwise dominate first attempt");
            break;
        }
    }
    return v;
}

std::vector<std::string> validate(const VlogManifest& m) {
    std::vector<std::string> v;
    for (auto& s : validate(m.stylized_reference)) v.push_back("stylized_reference: " + s);
    double sum = 0.0;
    int expected = 1;
    for (const auto& c : m.clips) {
        if (c.index != expected) v.push_back("clips not ordered by index 1..k at position " + std::to_string(expected));
        ++expected;
        sum += c.clip_duration;
        if (c.video.kind != AssetKind::video) v.push_back("clip " + std::to_string(c.index) + ": not a video asset");
        if (c.speech.kind != AssetKind::audio) v.push_back("clip " + std::to_string(c.index) + ": speech not audio");
    }
    if (std::abs(sum - m.total_duration) > 1e-9) v.push_back("total_duration != sum of clip durations");
    if (m.bgm.kind != AssetKind::audio) v.push_back("bgm not audio");
    return v;
}

std::vector<std::string> validate(const StoryboardScore& s) {
    std::vector<std::string> v;
    if (s.dimensions.size() != 4) v.push_back("expected exactly 4 dimensions");
    std::set<std::string> names;
    for (const auto& d : s.dimensions) {
        bool known = false;
        for (const char* n : kStoryboardDimensions) {
            if (d.name == n) known = true;
        }
        if (!known) v.push_back("unknown dimension '" + d.name + "'");
        if (!names.insert(d.name).second) v.push_back("duplicate dimension '" + d.name + "'");
        if (d.score < 1 || d.score > 5) v.push_back("score out of [1,5]");
        if (d.reason.empty()) v.push_back("reason empty for '" + d.name + "'");
    }
    for (const char* n : kStoryboardDimensions) {
        if (s.dimensions.size() == 4 && !names.count(n)) v.push_back("missing dimension '" + std::string(n) + "'");
    }
    return v;
}

std::vector<std::string> validate(const EvalReport& r) {
    std::vector<std::string> v;
    // Aggregates must equal the mean of per-item values (scored items only).
    auto check_mean = [&](const char* name, std::optional<double> agg, auto getter) {
        double sum = 0.0;
        int n = 0;
        for (const auto& item : r.per_item) {
            auto val = getter(item);
            if (val) {
                sum += *val;
                ++n;
            }
        }
        if (n == 0) {
            if (agg) v.push_back(std::string(name) + " aggregate present with no scored items");
            return;
        }
        if (!agg) {
            v.push_back(std::string(name) + " aggregate missing");
            return;
        }
        if (std::abs(*agg - sum / n) > 1e-9) v.push_back(std::string(name) + " aggregate != mean of per-item");
    };
    check_mean("text_image_alignment", r.aggregate.text_image_alignment,
               [](const ItemReport& i) { return i.text_image_alignment; });
    check_mean("character_consistency", r.aggregate.character_consistency,
               [](const ItemReport& i) { return i.character_consistency; });
    for (const char* dim : kStoryboardDimensions) {
        auto it = r.aggregate.storyboard.find(dim);
        std::optional<double> agg =
            it == r.aggregate.storyboard.end() ? std::nullopt : std::optional<double>(it->second);
        check_mean(dim, agg, [dim](const ItemReport& i) -> std::optional<double> {
            if (!i.storyboard) return std::nullopt;
            auto s = i.storyboard->score_for(dim);
            if (!s) return std::nullopt;
            return static_cast<double>(*s);
        });
    }
    for (int c = 0; c < VideoScoreVector::kComponents; ++c) {
        std::optional<double> agg;
        if (r.aggregate.video) agg = r.aggregate.video->component(c);
        check_mean(VideoScoreVector::component_name(c), agg, [c](const ItemReport& i) -> std::optional<double> {
            if (!i.video) return std::nullopt;
            return i.video->component(c);
        });
    }
    return v;
}

std::vector<std::string> validate_document(const json& doc) {
    try {
        if (!doc.is_object() || !doc.contains("schema") || !doc["schema"].is_string()) {
            return {"document has no schema field"};
        }
        std::string schema = doc["schema"].get<std::string>();
        if (schema == kSchemaPlanBundle) return validate(PlanBundle::from_json(doc));
        if (schema == kSchemaKeyframeRecord) return validate(KeyframeRecord::from_json(doc));
        if (schema == kSchemaVideoRecord) return validate(VideoRecord::from_json(doc));
        if (schema == kSchemaVlogManifest) return validate(VlogManifest::from_json(doc));
        if (schema == kSchemaEvalReport) return validate(EvalReport::from_json(doc));
        if (schema == kSchemaThemeSpec) return validate(ThemeSpec::from_json(doc));
        if (schema == kSchemaStoryboardScore) return validate(StoryboardScore::from_json(doc));
        return {"unknown document schema '" + schema + "'"};
    } catch (const ParseError& e) {
        return {std::string("parse: ") + e.what()};
    }
}

} // namespace pvlog
