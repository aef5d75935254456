#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pvlog/asset_store.hpp"
#include "pvlog/domain.hpp"
#include "pvlog/genfrm.hpp"
#include "pvlog/macf.hpp"
#include "pvlog/metrics.hpp"
#include "pvlog/prompt_template.hpp"
#include "pvlog/providers.hpp"

namespace pvlog::pipeline {

struct PipelineConfig {
    std::string providers = "mock"; // "mock" or "http"
    std::uint64_t seed = 0;
    int max_parallel = 4;
    macf::MacfConfig macf;
    frm::FrmConfig frm;
    metrics::MetricConfig metrics;
    double bgm_gain_db = -18.0;
    std::string muxer = "ffmpeg";

    json to_json() const;
    static PipelineConfig from_json(const json& j);
    static PipelineConfig load(const std::filesystem::path& p);
    /// sha-256 of the canonical config document; recorded in provenance.
    std::string digest() const;
    std::vector<std::string> validate() const;
};

/// Stage order; RunState.stage names the next stage to execute.
extern const std::vector<std::string> kStageOrder; // stylize..assemble, then done

struct RunState {
    std::string run_id;
    std::string stage = "stylize";
    std::uint64_t seed = 0;
    std::string config_digest;
    int k = 0; // storyboard count, known after the plan stage
    std::string created_at;
    std::string updated_at;

    json to_json() const;
    static RunState from_json(const json& j);
};

struct AudioBundleDoc {
    AssetRef bgm;
    std::vector<AssetRef> speeches;
    bool used_default_voice = false;

    json to_json() const;
    static AudioBundleDoc from_json(const json& j);
};

struct PipelineOptions {
    /// Called after each stage's checkpoint is durable; used by crash tests.
    std::function<void(const std::string& completed_stage)> after_stage;
};

class Pipeline {
public:
    /// out_root holds assets/ and runs/<id>/.
    Pipeline(PipelineConfig config, ProviderSet providers, TemplateLibrary templates,
             std::filesystem::path out_root, PipelineOptions options = {});

    VlogManifest run(const ThemeSpec& theme, const std::string& run_id);
    /// Continues from the first incomplete stage; completed stages are
    /// hash-verified and never re-invoke providers.
    VlogManifest resume(const std::string& run_id);

    AssetRef stylize_reference(const ThemeSpec& theme);

    VlogManifest assemble(const ThemeSpec& theme, const AssetRef& stylized,
                          const PlanBundle& plan, const std::vector<KeyframeRecord>& keyframes,
                          const std::vector<VideoRecord>& videos, const AudioBundleDoc& audio);

    AssetStore& store() { return store_; }
    std::filesystem::path run_dir(const std::string& run_id) const;

private:
    VlogManifest execute_from(const std::string& run_id, RunState state);
    void save_state(const RunState& state);
    RunState load_state(const std::string& run_id) const;
    void verify_completed(const RunState& state) const;

    ThemeSpec load_theme(const std::string& run_id) const;
    PlanBundle load_plan(const std::string& run_id) const;
    std::vector<KeyframeRecord> load_keyframes(const std::string& run_id, int k) const;
    std::vector<VideoRecord> load_videos(const std::string& run_id, int k) const;
    AudioBundleDoc load_audio(const std::string& run_id) const;

    PipelineConfig config_;
    ProviderSet providers_;
    TemplateLibrary templates_;
    std::filesystem::path root_;
    PipelineOptions options_;
    AssetStore store_;
};

/// Deterministic muxer command line recorded in provenance (not executed).
std::string mux_command(const std::string& muxer, const VlogManifest& manifest);

} // namespace pvlog::pipeline
