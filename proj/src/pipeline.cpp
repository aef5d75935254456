#include "pvlog/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>

#include "pvlog/errors.hpp"
#include "pvlog/util.hpp"

namespace pvlog::pipeline {

namespace fs = std::filesystem;

const std::vector<std::string> kStageOrder = {"stylize", "plan",     "keyframes",
                                              "videos",  "audio",    "assemble"};

namespace {

std::string now_iso_utc() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json parse_file(const fs::path& p, const std::string& what) {
    json doc = json::parse(read_file(p), nullptr, false);
    if (doc.is_discarded()) throw ConfigError(what + " is not valid JSON: " + p.string());
    return doc;
}

int stage_rank(const std::string& stage) {
    if (stage == "done") return static_cast<int>(kStageOrder.size());
    auto it = std::find(kStageOrder.begin(), kStageOrder.end(), stage);
    if (it == kStageOrder.end()) throw ConfigError("unknown stage '" + stage + "'");
    return static_cast<int>(it - kStageOrder.begin());
}

} // namespace

json PipelineConfig::to_json() const {
    return json{{"schema", kSchemaConfig},
                {"providers", providers},
                {"seed", seed},
                {"max_parallel", max_parallel},
                {"macf",
                 {{"max_rounds", macf.max_rounds},
                  {"k_min", macf.k_min},
                  {"k_max", macf.k_max},
                  {"abort_on_exhaustion", macf.abort_on_exhaustion}}},
                {"frm",
                 {{"image_feedback_iterations", frm.image_feedback_iterations},
                  {"video_feedback_iterations", frm.video_feedback_iterations},
                  {"strict_dominance", frm.strict_dominance}}},
                {"metrics",
                 {{"alpha", metrics.alpha},
                  {"embedding_dim", metrics.embedding_dim},
                  {"keypoint_count", metrics.keypoint_count},
                  {"dynamic_degree_flow_threshold", metrics.dynamic_degree_flow_threshold}}},
                {"bgm_gain_db", bgm_gain_db},
                {"muxer", muxer}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    StrictObject o(j, "config");
    if (o.require("schema").get<std::string>() != kSchemaConfig) {
        throw ConfigError("config: unexpected schema");
    }
    if (auto* v = o.optional("providers")) c.providers = v->get<std::string>();
    if (auto* v = o.optional("seed")) c.seed = v->get<std::uint64_t>();
    if (auto* v = o.optional("max_parallel")) c.max_parallel = v->get<int>();
    if (auto* v = o.optional("macf")) {
        StrictObject m(*v, "config.macf");
        if (auto* x = m.optional("max_rounds")) c.macf.max_rounds = x->get<int>();
        if (auto* x = m.optional("k_min")) c.macf.k_min = x->get<int>();
        if (auto* x = m.optional("k_max")) c.macf.k_max = x->get<int>();
        if (auto* x = m.optional("abort_on_exhaustion")) c.macf.abort_on_exhaustion = x->get<bool>();
        m.finish();
    }
    if (auto* v = o.optional("frm")) {
        StrictObject m(*v, "config.frm");
        if (auto* x = m.optional("image_feedback_iterations")) c.frm.image_feedback_iterations = x->get<int>();
        if (auto* x = m.optional("video_feedback_iterations")) c.frm.video_feedback_iterations = x->get<int>();
        if (auto* x = m.optional("strict_dominance")) c.frm.strict_dominance = x->get<bool>();
        m.finish();
    }
    if (auto* v = o.optional("metrics")) {
        StrictObject m(*v, "config.metrics");
        if (auto* x = m.optional("alpha")) c.metrics.alpha = x->get<double>();
        if (auto* x = m.optional("embedding_dim")) c.metrics.embedding_dim = x->get<int>();
        if (auto* x = m.optional("keypoint_count")) c.metrics.keypoint_count = x->get<int>();
        if (auto* x = m.optional("dynamic_degree_flow_threshold")) {
            c.metrics.dynamic_degree_flow_threshold = x->get<double>();
        }
        m.finish();
    }
    if (auto* v = o.optional("bgm_gain_db")) c.bgm_gain_db = v->get<double>();
    if (auto* v = o.optional("muxer")) c.muxer = v->get<std::string>();
    o.finish();
    if (auto violations = c.validate(); !violations.empty()) {
        throw ConfigError("config: " + violations.front());
    }
    return c;
}

PipelineConfig PipelineConfig::load(const fs::path& p) {
    if (!fs::exists(p)) throw ConfigError("config file missing: " + p.string());
    return from_json(parse_file(p, "config"));
}

std::string PipelineConfig::digest() const {
    return sha256_hex(dump_document(to_json()));
}

std::vector<std::string> PipelineConfig::validate() const {
    std::vector<std::string> v;
    if (providers != "mock" && providers != "http") v.push_back("providers must be 'mock' or 'http'");
    if (max_parallel < 1) v.push_back("max_parallel must be >= 1");
    for (auto& s : macf.validate()) v.push_back("macf: " + s);
    for (auto& s : frm.validate()) v.push_back("frm: " + s);
    for (auto& s : metrics.validate()) v.push_back("metrics: " + s);
    return v;
}

json RunState::to_json() const {
    return json{{"schema", kSchemaRunState}, {"run_id", run_id},   {"stage", stage},
                {"seed", seed},              {"config_digest", config_digest},
                {"k", k},                    {"created_at", created_at},
                {"updated_at", updated_at}};
}

RunState RunState::from_json(const json& j) {
    StrictObject o(j, "run_state");
    if (o.require("schema").get<std::string>() != kSchemaRunState) {
        throw ConfigError("run state: unexpected schema");
    }
    RunState s;
    s.run_id = o.require("run_id").get<std::string>();
    s.stage = o.require("stage").get<std::string>();
    s.seed = o.require("seed").get<std::uint64_t>();
    s.config_digest = o.require("config_digest").get<std::string>();
    s.k = o.require("k").get<int>();
    s.created_at = o.require("created_at").get<std::string>();
    s.updated_at = o.require("updated_at").get<std::string>();
    o.finish();
    stage_rank(s.stage); // rejects unknown stage names
    return s;
}

json AudioBundleDoc::to_json() const {
    json speeches_j = json::array();
    for (const auto& s : speeches) speeches_j.push_back(s.to_json());
    return json{{"schema", kSchemaAudioBundle},
                {"bgm", bgm.to_json()},
                {"speeches", speeches_j},
                {"used_default_voice", used_default_voice}};
}

AudioBundleDoc AudioBundleDoc::from_json(const json& j) {
    StrictObject o(j, "audio_bundle");
    if (o.require("schema").get<std::string>() != kSchemaAudioBundle) {
        throw ConfigError("audio bundle: unexpected schema");
    }
    AudioBundleDoc a;
    a.bgm = AssetRef::from_json(o.require("bgm"));
    for (const auto& s : o.require("speeches")) a.speeches.push_back(AssetRef::from_json(s));
    a.used_default_voice = o.require("used_default_voice").get<bool>();
    o.finish();
    return a;
}

Pipeline::Pipeline(PipelineConfig config, ProviderSet providers, TemplateLibrary templates,
                   fs::path out_root, PipelineOptions options)
    : config_(std::move(config)),
      providers_(std::move(providers)),
      templates_(std::move(templates)),
      root_(std::move(out_root)),
      options_(std::move(options)),
      store_(root_) {
    if (auto v = config_.validate(); !v.empty()) throw ConfigError("config: " + v.front());
}

fs::path Pipeline::run_dir(const std::string& run_id) const {
    return root_ / "runs" / run_id;
}

void Pipeline::save_state(const RunState& state) {
    atomic_write_file(run_dir(state.run_id) / "state.json", dump_document(state.to_json()));
}

RunState Pipeline::load_state(const std::string& run_id) const {
    fs::path p = run_dir(run_id) / "state.json";
    if (!fs::exists(p)) throw ConfigError("no run state for '" + run_id + "'");
    return RunState::from_json(parse_file(p, "run state"));
}

ThemeSpec Pipeline::load_theme(const std::string& run_id) const {
    return ThemeSpec::from_json(parse_file(run_dir(run_id) / "theme.json", "theme"));
}

PlanBundle Pipeline::load_plan(const std::string& run_id) const {
    return PlanBundle::from_json(parse_file(run_dir(run_id) / "plan.json", "plan"));
}

std::vector<KeyframeRecord> Pipeline::load_keyframes(const std::string& run_id, int k) const {
    std::vector<KeyframeRecord> out;
    for (int i = 1; i <= k; ++i) {
        fs::path p = run_dir(run_id) / ("idx_" + std::to_string(i)) / "keyframe.json";
        if (!fs::exists(p)) throw StageError("keyframes", "missing keyframe record for index " + std::to_string(i));
        out.push_back(KeyframeRecord::from_json(parse_file(p, "keyframe record")));
    }
    return out;
}

std::vector<VideoRecord> Pipeline::load_videos(const std::string& run_id, int k) const {
    std::vector<VideoRecord> out;
    for (int i = 1; i <= k; ++i) {
        fs::path p = run_dir(run_id) / ("idx_" + std::to_string(i)) / "video.json";
        if (!fs::exists(p)) throw StageError("videos", "missing video record for index " + std::to_string(i));
        out.push_back(VideoRecord::from_json(parse_file(p, "video record")));
    }
    return out;
}

AudioBundleDoc Pipeline::load_audio(const std::string& run_id) const {
    return AudioBundleDoc::from_json(parse_file(run_dir(run_id) / "audio.json", "audio bundle"));
}

AssetRef Pipeline::stylize_reference(const ThemeSpec& theme) {
    std::string prompt =
        templates_.get("pipeline/stylize").render({{"style", theme.style_text}});
    return providers_.image_editor->edit_image(prompt, theme.reference_image);
}

VlogManifest Pipeline::run(const ThemeSpec& theme, const std::string& run_id) {
    if (auto v = validate(theme); !v.empty()) throw ConfigError("theme: " + v.front());
    fs::path dir = run_dir(run_id);
    if (fs::exists(dir / "state.json")) return resume(run_id);
    fs::create_directories(dir);
    atomic_write_file(dir / "theme.json", dump_document(theme.to_json()));
    atomic_write_file(dir / "config.json", dump_document(config_.to_json()));
    RunState state;
    state.run_id = run_id;
    state.stage = kStageOrder.front();
    state.seed = config_.seed;
    state.config_digest = config_.digest();
    state.created_at = now_iso_utc();
    state.updated_at = state.created_at;
    save_state(state);
    return execute_from(run_id, state);
}

VlogManifest Pipeline::resume(const std::string& run_id) {
    RunState state = load_state(run_id);
    if (state.config_digest != config_.digest()) {
        throw ConfigError("run '" + run_id + "' was created with a different config");
    }
    verify_completed(state);
    if (state.stage == "done") {
        return VlogManifest::from_json(parse_file(run_dir(run_id) / "manifest.json", "manifest"));
    }
    return execute_from(run_id, state);
}

void Pipeline::verify_completed(const RunState& state) const {
    int rank = stage_rank(state.stage);
    const std::string& id = state.run_id;
    if (rank > stage_rank("stylize")) {
        json doc = parse_file(run_dir(id) / "stylized.json", "stylized reference");
        store_.verify(AssetRef::from_json(doc.at("stylized")));
    }
    if (rank > stage_rank("plan")) {
        PlanBundle plan = load_plan(id); // parse + invariants
        if (auto v = validate(plan); !v.empty()) {
            throw ValidationError("plan checkpoint invalid: " + v.front());
        }
    }
    if (rank > stage_rank("keyframes")) {
        for (const auto& r : load_keyframes(id, state.k)) {
            for (const auto& a : r.attempts) store_.verify(a.asset);
        }
    }
    if (rank > stage_rank("videos")) {
        for (const auto& r : load_videos(id, state.k)) {
            for (const auto& a : r.attempts) store_.verify(a.asset);
        }
    }
    if (rank > stage_rank("audio")) {
        AudioBundleDoc audio = load_audio(id);
        store_.verify(audio.bgm);
        for (const auto& s : audio.speeches) store_.verify(s);
    }
}

VlogManifest Pipeline::execute_from(const std::string& run_id, RunState state) {
    fs::path dir = run_dir(run_id);
    ThemeSpec theme = load_theme(run_id);

    auto advance = [&](const std::string& completed) {
        int next = stage_rank(completed) + 1;
        state.stage = next < static_cast<int>(kStageOrder.size()) ? kStageOrder[next] : "done";
        state.updated_at = now_iso_utc();
        save_state(state);
        if (options_.after_stage) options_.after_stage(completed);
    };

    if (state.stage == "stylize") {
        AssetRef stylized = stylize_reference(theme);
        atomic_write_file(dir / "stylized.json",
                          dump_document(json{{"stylized", stylized.to_json()}}));
        advance("stylize");
    }

    if (state.stage == "plan") {
        json doc = parse_file(dir / "stylized.json", "stylized reference");
        AssetRef stylized = AssetRef::from_json(doc.at("stylized"));
        PlanBundle plan;
        try {
            plan = macf::run_macf(*providers_.chat, templates_, config_.macf, theme, stylized);
        } catch (const macf::MacfStageError& e) {
            throw StageError("plan", e.what());
        }
        atomic_write_file(dir / "plan.json", dump_document(plan.to_json()));
        state.k = plan.k();
        advance("plan");
    }

    if (state.stage == "keyframes") {
        json doc = parse_file(dir / "stylized.json", "stylized reference");
        AssetRef stylized = AssetRef::from_json(doc.at("stylized"));
        PlanBundle plan = load_plan(run_id);
        parallel_for(plan.storyboards.size(), config_.max_parallel, [&](std::size_t i) {
            KeyframeRecord record = frm::run_image_frm(providers_, templates_, config_.frm,
                                                       plan.storyboards[i], plan.character, stylized);
            fs::path idx_dir = dir / ("idx_" + std::to_string(record.index));
            fs::create_directories(idx_dir);
            atomic_write_file(idx_dir / "keyframe.json", dump_document(record.to_json()));
        });
        advance("keyframes");
    }

    if (state.stage == "videos") {
        PlanBundle plan = load_plan(run_id);
        auto keyframes = load_keyframes(run_id, state.k);
        parallel_for(plan.video_prompts.size(), config_.max_parallel, [&](std::size_t i) {
            VideoRecord record =
                frm::run_video_frm(providers_, templates_, config_.frm, config_.metrics,
                                   plan.video_prompts[i], keyframes[i].accepted);
            fs::path idx_dir = dir / ("idx_" + std::to_string(record.index));
            atomic_write_file(idx_dir / "video.json", dump_document(record.to_json()));
        });
        advance("videos");
    }

    if (state.stage == "audio") {
        PlanBundle plan = load_plan(run_id);
        frm::AudioBundle audio =
            frm::generate_audio(*providers_.music, *providers_.speech, plan, theme.voice_reference);
        AudioBundleDoc doc;
        doc.bgm = audio.bgm;
        doc.speeches = audio.speeches;
        doc.used_default_voice = audio.used_default_voice;
        atomic_write_file(dir / "audio.json", dump_document(doc.to_json()));
        advance("audio");
    }

    if (state.stage == "assemble") {
        PlanBundle plan = load_plan(run_id);
        json stylized_doc = parse_file(dir / "stylized.json", "stylized reference");
        AssetRef stylized = AssetRef::from_json(stylized_doc.at("stylized"));
        VlogManifest manifest =
            assemble(theme, stylized, plan, load_keyframes(run_id, state.k),
                     load_videos(run_id, state.k), load_audio(run_id));
        if (auto v = validate(manifest); !v.empty()) {
            throw StageError("assemble", "manifest invalid: " + v.front());
        }
        atomic_write_file(dir / "manifest.json", dump_document(manifest.to_json()));
        advance("assemble");
    }

    return VlogManifest::from_json(parse_file(dir / "manifest.json", "manifest"));
}

VlogManifest Pipeline::assemble(const ThemeSpec& theme, const AssetRef& stylized,
                                const PlanBundle& plan,
                                const std::vector<KeyframeRecord>& keyframes,
                                const std::vector<VideoRecord>& videos,
                                const AudioBundleDoc& audio) {
    int k = plan.k();
    if (static_cast<int>(keyframes.size()) != k || static_cast<int>(videos.size()) != k ||
        static_cast<int>(audio.speeches.size()) != k) {
        throw StageError("assemble", "per-index artifact counts do not match k");
    }
    VlogManifest manifest;
    manifest.stylized_reference = stylized;
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        if (videos[i].index != i + 1) {
            throw StageError("assemble", "missing video record for index " + std::to_string(i + 1));
        }
        ClipEntry clip;
        clip.index = videos[i].index;
        clip.video = videos[i].accepted;
        clip.speech = audio.speeches[i];
        if (!clip.video.duration) {
            throw StageError("assemble", "clip " + std::to_string(clip.index) + " has no duration");
        }
        clip.clip_duration = *clip.video.duration;
        clip.speech_offset = 0.0; // speech is aligned to clip start
        if (clip.speech.duration && *clip.speech.duration > clip.clip_duration) {
            clip.speech_trimmed_to = clip.clip_duration; // recorded, asset untouched
        }
        total += clip.clip_duration;
        manifest.clips.push_back(std::move(clip));
    }
    manifest.bgm = audio.bgm; // generated from the music prompt alone; looped or
                              // trimmed to total_duration by the external muxer
    manifest.bgm_gain_db = config_.bgm_gain_db;
    manifest.total_duration = total;

    manifest.provenance.seed = config_.seed;
    manifest.provenance.providers = providers_.identities();
    manifest.provenance.config_digest = config_.digest();
    manifest.provenance.tts_voice = theme.voice_reference
                                        ? "reference:" + theme.voice_reference->content_hash
                                        : "default";
    manifest.provenance.mux_command = mux_command(config_.muxer, manifest);
    return manifest;
}

std::string mux_command(const std::string& muxer, const VlogManifest& manifest) {
    std::string cmd = muxer;
    for (const auto& c : manifest.clips) {
        cmd += " -i " + c.video.uri + " -i " + c.speech.uri;
    }
    cmd += " -i " + manifest.bgm.uri;
    cmd += " -filter:a \"volume=" + format_fixed(manifest.bgm_gain_db, 1) + "dB\"";
    cmd += " -t " + format_fixed(manifest.total_duration, 3);
    cmd += " vlog.mp4";
    return cmd;
}

} // namespace pvlog::pipeline
