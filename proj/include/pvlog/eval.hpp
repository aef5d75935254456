#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pvlog/asset_store.hpp"
#include "pvlog/domain.hpp"
#include "pvlog/metrics.hpp"
#include "pvlog/prompt_template.hpp"
#include "pvlog/providers.hpp"

namespace pvlog::eval {

struct BenchmarkItem {
    std::string id;
    std::string theme_text;
    std::string style_id;
    std::string reference_id;
    std::string gender; // metadata only
    std::string age;    // metadata only
};

struct Benchmark {
    std::vector<BenchmarkItem> items;
    std::map<std::string, std::string> styles;  // style id -> style text
    std::map<std::string, AssetRef> references; // reference id -> ingested image
};

/// Loads `manifest.json` plus the referenced images into the store.
/// Duplicate item ids, unresolved style/reference ids, and missing image
/// files are errors naming the offending id.
Benchmark load_benchmark(const std::filesystem::path& manifest_path, AssetStore& store);

/// Scorable output of any system, one directory per item:
///   item_<id>/board_<i>.txt, key_<i>.<ext>, clip_<i>.<ext>   (i = 1..n)
struct SystemOutput {
    std::string item_id;
    std::vector<Storyboard> storyboards;
    std::vector<AssetRef> keyframes;
    std::vector<AssetRef> clips;
};

std::vector<SystemOutput> load_system_outputs(const std::filesystem::path& dir, AssetStore& store);

/// One judge call with a single repair re-ask. Empty result means the item is
/// unscored (judge failure is never reported as a zero score).
std::optional<StoryboardScore> score_storyboards(ChatModel& judge, const TemplateLibrary& templates,
                                                 const std::vector<Storyboard>& storyboards,
                                                 const std::string& theme);

struct ImageEvaluation {
    double text_image_alignment = 0.0;
    metrics::CharacterConsistency character_consistency;
    std::vector<double> per_image_i2i; // audit trail: per-keyframe reference similarity
};

ImageEvaluation evaluate_images(Embedder& embedder, PoseEstimator& pose,
                                const metrics::MetricConfig& config, const SystemOutput& output,
                                const AssetRef& reference);

VideoScoreVector evaluate_videos(VideoAnalyzer& analyzer, const metrics::MetricConfig& config,
                                 const std::vector<AssetRef>& clips);

ItemReport evaluate_item(const ProviderSet& providers, const TemplateLibrary& templates,
                         const metrics::MetricConfig& config, const BenchmarkItem& item,
                         const SystemOutput& output, const AssetRef& reference);

/// Arithmetic means across scored items; unscored items excluded with counts.
EvalReport aggregate(const std::vector<ItemReport>& per_item, const std::string& judge_identity);

struct EvalOptions {
    metrics::MetricConfig metric_config;
    int max_parallel = 4;
};

/// Full harness: match outputs to benchmark items, score each, aggregate.
EvalReport run_eval(const ProviderSet& providers, const TemplateLibrary& templates,
                    const Benchmark& benchmark, const std::vector<SystemOutput>& outputs,
                    const EvalOptions& options = {});

/// Human-readable table: storyboard dimensions and image metrics on their
/// native scales, video metrics scaled x100 with 2 decimals.
std::string render_report_table(const EvalReport& report);

/// Writes report.json (canonical document) and report.txt under dir.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

} // namespace pvlog::eval
