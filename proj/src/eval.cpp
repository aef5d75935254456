#include "pvlog/eval.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include "pvlog/errors.hpp"
#include "pvlog/macf.hpp"
#include "pvlog/schemas.hpp"
#include "pvlog/util.hpp"

namespace pvlog::eval {

namespace fs = std::filesystem;

namespace {

constexpr const char* kJudgeSystem =
    "You are an impartial judge of vlog storyboards. "
    "Reply with exactly one fenced JSON document in the requested shape.";
constexpr const char* kJudgeTemplateId = "eval/judge";
constexpr const char* kComparabilityNote =
    "Storyboard scores depend on the judge model; compare reports only when "
    "judge identity and judge template match.";

std::string item_err(const std::string& kind, const std::string& id, const std::string& msg) {
    return kind + " '" + id + "': " + msg;
}

/// Files named `<prefix><i>.<ext>` under dir, keyed by index.
std::map<int, fs::path> indexed_files(const fs::path& dir, const std::string& prefix) {
    std::map<int, fs::path> out;
    std::regex pattern(prefix + R"((\d+)\.[A-Za-z0-9]+$)");
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::smatch m;
        std::string name = entry.path().filename().string();
        if (std::regex_match(name, m, pattern)) {
            int idx = std::stoi(m[1].str());
            if (!out.emplace(idx, entry.path()).second) {
                throw ConfigError("duplicate index " + m[1].str() + " for " + prefix + "* in " +
                                  dir.string());
            }
        }
    }
    return out;
}

double mean(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) sum += x;
    return sum / static_cast<double>(xs.size());
}

} // namespace

Benchmark load_benchmark(const fs::path& manifest_path, AssetStore& store) {
    json doc = json::parse(read_file(manifest_path), nullptr, false);
    if (doc.is_discarded()) throw ConfigError("benchmark manifest is not valid JSON");
    StrictObject o(doc, "benchmark");
    if (o.require("schema").get<std::string>() != kSchemaBenchmark) {
        throw ConfigError("benchmark manifest: unexpected schema");
    }
    Benchmark b;
    fs::path base = manifest_path.parent_path();

    const json& styles = o.require("styles");
    for (auto it = styles.begin(); it != styles.end(); ++it) {
        b.styles[it.key()] = it.value().get<std::string>();
    }

    std::map<std::string, std::pair<std::string, std::string>> ref_tags;
    const json& refs = o.require("references");
    for (auto it = refs.begin(); it != refs.end(); ++it) {
        StrictObject r(it.value(), "reference '" + it.key() + "'");
        fs::path p = base / r.require("path").get<std::string>();
        std::string gender = r.require("gender").get<std::string>();
        std::string age = r.require("age").get<std::string>();
        r.finish();
        if (!fs::exists(p)) {
            throw ConfigError(item_err("reference", it.key(), "missing image file " + p.string()));
        }
        b.references[it.key()] = store.ingest_file(p, AssetKind::image);
        ref_tags[it.key()] = {gender, age};
    }

    std::set<std::string> seen;
    for (const json& e : o.require("items")) {
        StrictObject i(e, "benchmark item");
        BenchmarkItem item;
        item.id = i.require("id").get<std::string>();
        item.theme_text = i.require("theme").get<std::string>();
        item.style_id = i.require("style").get<std::string>();
        item.reference_id = i.require("reference").get<std::string>();
        i.finish();
        if (!seen.insert(item.id).second) {
            throw ConfigError(item_err("item", item.id, "duplicate id"));
        }
        if (!b.styles.count(item.style_id)) {
            throw ConfigError(item_err("item", item.id, "unknown style '" + item.style_id + "'"));
        }
        if (!b.references.count(item.reference_id)) {
            throw ConfigError(
                item_err("item", item.id, "unknown reference '" + item.reference_id + "'"));
        }
        auto tags = ref_tags.at(item.reference_id);
        item.gender = tags.first;
        item.age = tags.second;
        b.items.push_back(std::move(item));
    }
    o.finish();
    if (b.items.empty()) throw ConfigError("benchmark manifest: no items");
    return b;
}

std::vector<SystemOutput> load_system_outputs(const fs::path& dir, AssetStore& store) {
    if (!fs::is_directory(dir)) throw ConfigError("system output directory missing: " + dir.string());
    std::vector<fs::path> item_dirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && entry.path().filename().string().rfind("item_", 0) == 0) {
            item_dirs.push_back(entry.path());
        }
    }
    std::sort(item_dirs.begin(), item_dirs.end());

    std::vector<SystemOutput> outputs;
    for (const auto& item_dir : item_dirs) {
        SystemOutput out;
        out.item_id = item_dir.filename().string().substr(5);
        auto boards = indexed_files(item_dir, "board_");
        auto keys = indexed_files(item_dir, "key_");
        auto clips = indexed_files(item_dir, "clip_");
        if (boards.empty()) throw ConfigError(item_err("item", out.item_id, "no storyboards"));
        int n = static_cast<int>(boards.size());
        for (int i = 1; i <= n; ++i) {
            if (!boards.count(i)) {
                throw ConfigError(item_err("item", out.item_id,
                                           "storyboard indices must be contiguous from 1"));
            }
            if (!keys.count(i)) {
                throw ConfigError(item_err("item", out.item_id, "missing key_" + std::to_string(i)));
            }
            if (!clips.count(i)) {
                throw ConfigError(item_err("item", out.item_id, "missing clip_" + std::to_string(i)));
            }
        }
        if (static_cast<int>(keys.size()) != n || static_cast<int>(clips.size()) != n) {
            throw ConfigError(item_err("item", out.item_id, "index lists are not aligned"));
        }
        for (int i = 1; i <= n; ++i) {
            out.storyboards.push_back({i, read_file(boards.at(i))});
            out.keyframes.push_back(store.ingest_file(keys.at(i), AssetKind::image));
            out.clips.push_back(store.ingest_file(clips.at(i), AssetKind::video));
        }
        outputs.push_back(std::move(out));
    }
    return outputs;
}

std::optional<StoryboardScore> score_storyboards(ChatModel& judge, const TemplateLibrary& templates,
                                                 const std::vector<Storyboard>& storyboards,
                                                 const std::string& theme) {
    if (storyboards.empty()) throw ValidationError("score_storyboards: no storyboards");
    std::string prompt = templates.get(kJudgeTemplateId)
                             .render({{"theme", theme},
                                      {"storyboards", macf::format_storyboards(storyboards)}});
    json doc;
    try {
        doc = macf::chat_structured(judge, "eval", kJudgeSystem, {{prompt, std::nullopt}},
                                    schema::kStoryboardJudge);
    } catch (const StageError&) {
        return std::nullopt; // unscored, never zero
    }
    StoryboardScore score;
    // Canonical dimension order regardless of the judge's ordering.
    for (const char* name : kStoryboardDimensions) {
        for (const auto& d : doc.at("dimensions")) {
            if (d.at("name").get<std::string>() == name) {
                score.dimensions.push_back(
                    {name, d.at("score").get<int>(), d.at("reason").get<std::string>()});
            }
        }
    }
    return score;
}

ImageEvaluation evaluate_images(Embedder& embedder, PoseEstimator& pose,
                                const metrics::MetricConfig& config, const SystemOutput& output,
                                const AssetRef& reference) {
    if (output.keyframes.empty()) throw ValidationError("evaluate_images: no keyframes");
    std::vector<std::vector<double>> image_embeddings;
    std::vector<std::vector<double>> board_embeddings;
    for (std::size_t i = 0; i < output.keyframes.size(); ++i) {
        image_embeddings.push_back(embedder.embed_image(output.keyframes[i]));
        board_embeddings.push_back(embedder.embed_text(output.storyboards[i].text));
    }
    auto reference_embedding = embedder.embed_image(reference);

    std::vector<std::vector<Keypoint>> poses;
    for (const auto& key : output.keyframes) {
        auto kp = pose.estimate_pose(key);
        if (!kp.empty()) poses.push_back(std::move(kp));
    }

    ImageEvaluation out;
    out.text_image_alignment = metrics::text_image_alignment(image_embeddings, board_embeddings);
    out.character_consistency = metrics::character_consistency(
        image_embeddings, reference_embedding, metrics::pose_diversity(poses), config.alpha);
    for (const auto& e : image_embeddings) {
        out.per_image_i2i.push_back(metrics::cosine(e, reference_embedding));
    }
    return out;
}

VideoScoreVector evaluate_videos(VideoAnalyzer& analyzer, const metrics::MetricConfig& config,
                                 const std::vector<AssetRef>& clips) {
    if (clips.empty()) throw ValidationError("evaluate_videos: no clips");
    VideoScoreVector sum;
    for (const auto& clip : clips) {
        VideoScoreVector v = metrics::score_video(analyzer, config, clip);
        for (int i = 0; i < VideoScoreVector::kComponents; ++i) sum.component(i) += v.component(i);
    }
    for (int i = 0; i < VideoScoreVector::kComponents; ++i) {
        sum.component(i) /= static_cast<double>(clips.size());
    }
    return sum;
}

ItemReport evaluate_item(const ProviderSet& providers, const TemplateLibrary& templates,
                         const metrics::MetricConfig& config, const BenchmarkItem& item,
                         const SystemOutput& output, const AssetRef& reference) {
    ItemReport report;
    report.item_id = item.id;
    report.storyboard =
        score_storyboards(*providers.judge_chat, templates, output.storyboards, item.theme_text);
    auto images = evaluate_images(*providers.embedder, *providers.pose, config, output, reference);
    report.text_image_alignment = images.text_image_alignment;
    report.character_consistency = images.character_consistency.value;
    report.character_consistency_incomplete = images.character_consistency.incomplete;
    report.video = evaluate_videos(*providers.video_analyzer, config, output.clips);
    return report;
}

EvalReport aggregate(const std::vector<ItemReport>& per_item, const std::string& judge_identity) {
    if (per_item.empty()) throw ValidationError("aggregate: no items");
    EvalReport report;
    report.judge_identity = judge_identity;
    report.judge_template_id = kJudgeTemplateId;
    report.note = kComparabilityNote;
    report.per_item = per_item;
    report.items_total = static_cast<int>(per_item.size());

    for (const char* name : kStoryboardDimensions) {
        std::vector<double> scores;
        for (const auto& item : per_item) {
            if (!item.storyboard) continue;
            if (auto s = item.storyboard->score_for(name)) scores.push_back(*s);
        }
        if (!scores.empty()) report.aggregate.storyboard[name] = mean(scores);
    }
    for (const auto& item : per_item) {
        if (!item.storyboard) ++report.items_storyboard_unscored;
    }

    std::vector<double> tia, cc;
    std::vector<VideoScoreVector> videos;
    for (const auto& item : per_item) {
        if (item.text_image_alignment) tia.push_back(*item.text_image_alignment);
        if (item.character_consistency) cc.push_back(*item.character_consistency);
        if (item.video) videos.push_back(*item.video);
    }
    if (!tia.empty()) report.aggregate.text_image_alignment = mean(tia);
    if (!cc.empty()) report.aggregate.character_consistency = mean(cc);
    if (!videos.empty()) {
        VideoScoreVector v;
        for (const auto& x : videos) {
            for (int i = 0; i < VideoScoreVector::kComponents; ++i) v.component(i) += x.component(i);
        }
        for (int i = 0; i < VideoScoreVector::kComponents; ++i) {
            v.component(i) /= static_cast<double>(videos.size());
        }
        report.aggregate.video = v;
    }
    return report;
}

EvalReport run_eval(const ProviderSet& providers, const TemplateLibrary& templates,
                    const Benchmark& benchmark, const std::vector<SystemOutput>& outputs,
                    const EvalOptions& options) {
    std::map<std::string, const BenchmarkItem*> by_id;
    for (const auto& item : benchmark.items) by_id[item.id] = &item;

    std::vector<ItemReport> reports(outputs.size());
    parallel_for(outputs.size(), options.max_parallel, [&](std::size_t i) {
        auto it = by_id.find(outputs[i].item_id);
        if (it == by_id.end()) {
            throw ConfigError("output item '" + outputs[i].item_id + "' is not in the benchmark");
        }
        const BenchmarkItem& item = *it->second;
        reports[i] = evaluate_item(providers, templates, options.metric_config, item, outputs[i],
                                   benchmark.references.at(item.reference_id));
    });
    return aggregate(reports, providers.judge_chat->identity());
}

std::string render_report_table(const EvalReport& report) {
    std::ostringstream out;
    out << "ThemeVlogEval report\n";
    out << "Judge: " << report.judge_identity << " (template " << report.judge_template_id << ")\n";
    out << "Note: " << report.note << "\n";
    out << "Items: " << report.items_total << " total, " << report.items_storyboard_unscored
        << " storyboard-unscored\n\n";

    auto cell = [](const std::optional<double>& v, int decimals, double scale) {
        return v ? format_fixed(*v * scale, decimals) : std::string("-");
    };
    auto row = [&](const std::string& label, const std::optional<StoryboardScore>& sb,
                   std::optional<double> tia, std::optional<double> cc,
                   const std::optional<VideoScoreVector>& video,
                   const std::map<std::string, double>* sb_means) {
        out << label;
        if (label.size() < 22) out << std::string(22 - label.size(), ' ');
        for (const char* name : kStoryboardDimensions) {
            std::optional<double> v;
            if (sb) {
                if (auto s = sb->score_for(name)) v = *s;
            } else if (sb_means && sb_means->count(name)) {
                v = sb_means->at(name);
            }
            out << "  " << cell(v, 2, 1.0);
        }
        out << "  " << cell(tia, 4, 1.0) << "  " << cell(cc, 4, 1.0);
        for (int i = 0; i < VideoScoreVector::kComponents; ++i) {
            std::optional<double> v;
            if (video) v = video->component(i); // displayed x100, two decimals
            out << "  " << cell(v, 2, 100.0);
        }
        out << "\n";
    };

    out << "item                    SI    TC    BD    TH     TIA      CC"
           "   SC     BC     MS     DD     AQ     IQ\n";
    for (const auto& item : report.per_item) {
        row(item.item_id, item.storyboard, item.text_image_alignment, item.character_consistency,
            item.video, nullptr);
    }
    row("mean", std::nullopt, report.aggregate.text_image_alignment,
        report.aggregate.character_consistency, report.aggregate.video,
        &report.aggregate.storyboard);
    return out.str();
}

void write_report(const EvalReport& report, const fs::path& dir) {
    fs::create_directories(dir);
    atomic_write_file(dir / "report.json", dump_document(report.to_json()));
    atomic_write_file(dir / "report.txt", render_report_table(report));
}

} // namespace pvlog::eval
