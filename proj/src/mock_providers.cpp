#include "pvlog/mock_providers.hpp"

#include <cmath>
#include <regex>
#include <sstream>

#include "pvlog/mock_assets.hpp"
#include "pvlog/schemas.hpp"
#include "pvlog/util.hpp"

namespace pvlog {

namespace {

std::string hex_tag(std::uint64_t h) {
    std::ostringstream out;
    out << std::hex << (mix64(h) & 0xffffffffull);
    return out.str();
}

std::string fenced(const json& j) {
    return "```json\n" + j.dump() + "\n```";
}

std::uint64_t request_hash(std::uint64_t seed, const ChatRequest& req) {
    std::uint64_t h = mix64(seed, fnv1a64(req.system));
    h = mix64(h, fnv1a64(req.schema_id));
    for (const auto& p : req.parts) {
        h = mix64(h, fnv1a64(p.text));
        if (p.image) h = mix64(h, fnv1a64(p.image->content_hash));
    }
    return h;
}

int count_storyboards(const std::string& text) {
    static const std::regex re(R"(Storyboard (\d+):)");
    int max_index = 0;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        max_index = std::max(max_index, std::stoi((*it)[1].str()));
    }
    return max_index;
}

} // namespace

std::vector<double> seeded_unit_vector(std::uint64_t seed, int dimension) {
    std::vector<double> v(static_cast<std::size_t>(dimension));
    double norm_sq = 0.0;
    for (int i = 0; i < dimension; ++i) {
        double c = 2.0 * seeded_unit(mix64(seed, static_cast<std::uint64_t>(i) + 1)) - 1.0;
        v[static_cast<std::size_t>(i)] = c;
        norm_sq += c * c;
    }
    double norm = std::sqrt(norm_sq);
    for (auto& c : v) c /= norm;
    return v;
}

// --- MockChatModel ----------------------------------------------------------

MockChatModel::MockChatModel(std::uint64_t seed, MockOptions options, std::string identity)
    : seed_(seed), options_(std::move(options)), identity_(std::move(identity)) {}

ChatResponse MockChatModel::chat(const ChatRequest& request) {
    if (request.parts.empty()) throw ValidationError("chat request has no parts");
    calls_.fetch_add(1);
    auto scripted = options_.reply_table.find(request.schema_id);
    if (scripted != options_.reply_table.end()) {
        return ChatResponse{scripted->second, 0, 0, 0.0};
    }
    std::string user_text;
    for (const auto& p : request.parts) user_text += p.text;
    std::uint64_t h = request_hash(seed_, request);
    return ChatResponse{synthesize(request.schema_id, h, user_text),
                        static_cast<int>(user_text.size() / 4), 64, 0.0};
}

std::string MockChatModel::synthesize(const std::string& schema_id, std::uint64_t h,
                                      const std::string& user_text) const {
    std::string tag = hex_tag(h);
    if (schema_id == schema::kStory) {
        return fenced(json{{"character", "A wandering protagonist c" + tag},
                           {"story", "Story s" + tag + ": a day told in small scenes."}});
    }
    if (schema_id == schema::kStoryboards) {
        int span = options_.k_max - options_.k_min + 1;
        int k = options_.k_min + static_cast<int>(mix64(h, 77) % static_cast<std::uint64_t>(span));
        json boards = json::array();
        for (int i = 1; i <= k; ++i) {
            boards.push_back(json{{"index", i}, {"text", "Scene " + std::to_string(i) + " b" + hex_tag(mix64(h, static_cast<std::uint64_t>(i))) + " with character action."}});
        }
        return fenced(json{{"storyboards", boards}});
    }
    if (schema_id == schema::kVideoPrompts || schema_id == schema::kMonologues) {
        int k = count_storyboards(user_text);
        if (k == 0) k = 5;
        const char* field = schema_id == schema::kVideoPrompts ? "video_prompts" : "monologues";
        const char* stem = schema_id == schema::kVideoPrompts ? "Slow pan, warm light, v" : "I feel m";
        json entries = json::array();
        for (int i = 1; i <= k; ++i) {
            entries.push_back(json{{"index", i},
                                   {"text", std::string(stem) + hex_tag(mix64(h, static_cast<std::uint64_t>(i) + 31)) + "."}});
        }
        json out;
        out[field] = entries;
        return fenced(out);
    }
    if (schema_id == schema::kMusic) {
        return fenced(json{{"music", "Warm acoustic guitar, gentle percussion, m" + tag}});
    }
    if (schema_id == schema::kReviewVerdict) {
        bool fail = seeded_unit(mix64(h, 101)) < options_.review_fail_probability;
        if (fail) return fenced(json{{"passed", false}, {"feedback", "Tighten pacing in section " + tag}});
        return fenced(json{{"passed", true}, {"feedback", ""}});
    }
    if (schema_id == schema::kImageVerdict) {
        bool issue = seeded_unit(mix64(h, 103)) < options_.image_issue_probability;
        if (!issue) return fenced(json{{"qualified", true}, {"issues", json::array()}, {"suggestion", ""}});
        static const char* kIssues[] = {"limb_count", "abnormal_pose_or_expression",
                                        "abnormal_background_or_foreground", "unreasonable_clothing",
                                        "low_resolution", "description_misalignment"};
        json issues = json::array();
        issues.push_back(kIssues[mix64(h, 105) % 6]);
        return fenced(json{{"qualified", false},
                           {"issues", issues},
                           {"suggestion", "Adjust the flagged region, i" + tag}});
    }
    if (schema_id == schema::kEditPrompt) {
        return fenced(json{{"edit_prompt", "Refine the image: e" + tag}});
    }
    if (schema_id == schema::kVideoVerdict) {
        bool issue = seeded_unit(mix64(h, 107)) < options_.video_issue_probability;
        if (!issue) return fenced(json{{"qualified", true}, {"revised_prompt", ""}, {"reason", ""}});
        return fenced(json{{"qualified", false},
                           {"revised_prompt", "Revised motion prompt r" + tag},
                           {"reason", "Motion anomaly detected, n" + tag}});
    }
    if (schema_id == schema::kStoryboardJudge) {
        json dims = json::array();
        for (int i = 0; i < 4; ++i) {
            int score = 3 + static_cast<int>(mix64(h, static_cast<std::uint64_t>(200 + i)) % 3);
            dims.push_back(json{{"name", kStoryboardDimensions[i]},
                                {"score", score},
                                {"reason", std::string("Judged ") + kStoryboardDimensions[i] + " j" + hex_tag(mix64(h, static_cast<std::uint64_t>(i)))}});
        }
        return fenced(json{{"dimensions", dims}});
    }
    return "OK " + tag;
}

// --- ScriptedChatModel --------------------------------------------------------

ScriptedChatModel::ScriptedChatModel(std::vector<std::string> replies) {
    for (auto& r : replies) replies_.push_back(std::move(r));
}

void ScriptedChatModel::push_reply(const std::string& reply) {
    std::lock_guard<std::mutex> lock(mu_);
    replies_.push_back(reply);
}

void ScriptedChatModel::push_schema_reply(const std::string& schema_id, const std::string& reply) {
    std::lock_guard<std::mutex> lock(mu_);
    schema_replies_[schema_id].push_back(reply);
}

ChatResponse ScriptedChatModel::chat(const ChatRequest& request) {
    if (request.parts.empty()) throw ValidationError("chat request has no parts");
    std::lock_guard<std::mutex> lock(mu_);
    requests_.push_back(request);
    auto it = schema_replies_.find(request.schema_id);
    if (it != schema_replies_.end() && !it->second.empty()) {
        std::string reply = it->second.front();
        it->second.pop_front();
        return ChatResponse{reply, 0, 0, 0.0};
    }
    if (replies_.empty()) throw ProviderError("scripted chat exhausted", false);
    std::string reply = replies_.front();
    replies_.pop_front();
    return ChatResponse{reply, 0, 0, 0.0};
}

// --- Media mocks -----------------------------------------------------------------

MockImageEditor::MockImageEditor(std::uint64_t seed, AssetStore& store, MockOptions options)
    : seed_(seed), store_(store), options_(std::move(options)) {}

AssetRef MockImageEditor::edit_image(const std::string& prompt, const AssetRef& reference) {
    if (reference.kind != AssetKind::image) throw ValidationError("edit_image reference is not an image");
    int call = calls_.fetch_add(1);
    if (options_.image_edit_fail_after >= 0 && call >= options_.image_edit_fail_after) {
        throw ProviderError("scripted image-edit outage", false);
    }
    std::uint64_t s = mix64(mix64(fnv1a64(prompt), fnv1a64(reference.content_hash)), seed_);
    std::string bytes = mockfmt::make_image(s, options_.image_width, options_.image_height);
    return store_.put(bytes, AssetKind::image, options_.image_width, options_.image_height);
}

MockVideoGenerator::MockVideoGenerator(std::uint64_t seed, AssetStore& store, MockOptions options)
    : seed_(seed), store_(store), options_(std::move(options)) {}

AssetRef MockVideoGenerator::image_to_video(const std::string& prompt, const AssetRef& keyframe) {
    if (keyframe.kind != AssetKind::image) throw ValidationError("image_to_video keyframe is not an image");
    calls_.fetch_add(1);
    std::uint64_t base = mix64(mix64(fnv1a64(prompt), fnv1a64(keyframe.content_hash)), seed_);
    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(options_.video_frames));
    for (int i = 0; i < options_.video_frames; ++i) {
        seeds.push_back(mix64(base, static_cast<std::uint64_t>(i) + 1));
    }
    int w = keyframe.width.value_or(options_.image_width);
    int h = keyframe.height.value_or(options_.image_height);
    std::string bytes = mockfmt::make_video(options_.video_duration_s, w, h, seeds);
    return store_.put(bytes, AssetKind::video, w, h, options_.video_duration_s);
}

double mock_audio_duration(const std::string& text) {
    int words = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return std::max(1.0, 0.06 * words);
}

MockMusicGenerator::MockMusicGenerator(std::uint64_t seed, AssetStore& store)
    : seed_(seed), store_(store) {}

AssetRef MockMusicGenerator::text_to_music(const std::string& prompt) {
    if (prompt.empty()) throw ValidationError("text_to_music prompt empty");
    calls_.fetch_add(1);
    double d = mock_audio_duration(prompt);
    std::string bytes = mockfmt::make_audio(d, mix64(fnv1a64(prompt), seed_));
    return store_.put(bytes, AssetKind::audio, std::nullopt, std::nullopt, d);
}

MockSpeechSynthesizer::MockSpeechSynthesizer(std::uint64_t seed, AssetStore& store)
    : seed_(seed), store_(store) {}

AssetRef MockSpeechSynthesizer::text_to_speech(const std::string& text,
                                               const std::optional<AssetRef>& voice_reference) {
    if (text.empty()) throw ValidationError("text_to_speech text empty");
    calls_.fetch_add(1);
    std::uint64_t s = mix64(fnv1a64(text), seed_);
    if (voice_reference) s = mix64(s, fnv1a64(voice_reference->content_hash));
    double d = mock_audio_duration(text);
    std::string bytes = mockfmt::make_audio(d, s);
    return store_.put(bytes, AssetKind::audio, std::nullopt, std::nullopt, d);
}

// --- MockEmbedder ------------------------------------------------------------------

MockEmbedder::MockEmbedder(int dimension) : dim_(dimension) {}

std::vector<double> MockEmbedder::embed_image(const AssetRef& asset) {
    calls_.fetch_add(1);
    return seeded_unit_vector(mix64(fnv1a64(asset.content_hash), fnv1a64("img")), dim_);
}

std::vector<double> MockEmbedder::embed_text(const std::string& text) {
    calls_.fetch_add(1);
    return seeded_unit_vector(mix64(fnv1a64(text), fnv1a64("txt")), dim_);
}

ScriptedEmbedder::ScriptedEmbedder(int dimension) : dim_(dimension), fallback_(dimension) {}

void ScriptedEmbedder::set_image_embedding(const std::string& content_hash, std::vector<double> v) {
    by_hash_[content_hash] = std::move(v);
}

void ScriptedEmbedder::set_text_embedding(const std::string& text, std::vector<double> v) {
    by_text_[text] = std::move(v);
}

std::vector<double> ScriptedEmbedder::embed_image(const AssetRef& asset) {
    auto it = by_hash_.find(asset.content_hash);
    if (it != by_hash_.end()) return it->second;
    return fallback_.embed_image(asset);
}

std::vector<double> ScriptedEmbedder::embed_text(const std::string& text) {
    auto it = by_text_.find(text);
    if (it != by_text_.end()) return it->second;
    return fallback_.embed_text(text);
}

// --- MockPoseEstimator ---------------------------------------------------------------

MockPoseEstimator::MockPoseEstimator(int keypoint_count, std::set<std::string> unavailable_hashes)
    : count_(keypoint_count), unavailable_(std::move(unavailable_hashes)) {}

std::vector<Keypoint> MockPoseEstimator::estimate_pose(const AssetRef& image) {
    if (unavailable_.count(image.content_hash)) return {};
    std::uint64_t base = mix64(fnv1a64(image.content_hash), fnv1a64("pose"));
    std::vector<Keypoint> pts;
    pts.reserve(static_cast<std::size_t>(count_));
    for (int i = 0; i < count_; ++i) {
        Keypoint p;
        p.x = seeded_unit(mix64(base, static_cast<std::uint64_t>(2 * i + 1)));
        p.y = seeded_unit(mix64(base, static_cast<std::uint64_t>(2 * i + 2)));
        pts.push_back(p);
    }
    return pts;
}

// --- MockVideoAnalyzer -----------------------------------------------------------------

MockVideoAnalyzer::MockVideoAnalyzer(AssetStore& store, int embedding_dim,
                                     std::optional<double> motion_smoothness)
    : store_(store), dim_(embedding_dim), motion_smoothness_(motion_smoothness) {}

std::vector<std::uint64_t> MockVideoAnalyzer::frame_seeds(const AssetRef& video) const {
    auto parsed = mockfmt::parse_video(store_.get(video));
    if (!parsed) throw ProviderError("undecodable video " + video.content_hash, false);
    return parsed->frame_seeds;
}

std::vector<double> MockVideoAnalyzer::estimate_flow(const AssetRef& video) {
    auto seeds = frame_seeds(video);
    std::vector<double> flow;
    for (std::size_t i = 0; i + 1 < seeds.size(); ++i) {
        if (seeds[i] == seeds[i + 1]) {
            flow.push_back(0.0);
        } else {
            flow.push_back(0.01 + 0.19 * seeded_unit(mix64(seeds[i], seeds[i + 1])));
        }
    }
    return flow;
}

std::vector<double> MockVideoAnalyzer::score_frames(const AssetRef& video, FrameCriterion criterion) {
    auto seeds = frame_seeds(video);
    std::uint64_t salt = fnv1a64(criterion == FrameCriterion::aesthetic ? "aesthetic" : "imaging");
    std::vector<double> scores;
    scores.reserve(seeds.size());
    for (auto s : seeds) scores.push_back(seeded_unit(mix64(s, salt)));
    return scores;
}

std::vector<std::vector<double>> MockVideoAnalyzer::embed_frames(const AssetRef& video, FrameSpace space) {
    auto seeds = frame_seeds(video);
    std::uint64_t salt = fnv1a64(space == FrameSpace::subject ? "subject" : "background");
    std::vector<std::vector<double>> frames;
    frames.reserve(seeds.size());
    for (auto s : seeds) frames.push_back(seeded_unit_vector(mix64(s, salt), dim_));
    return frames;
}

std::optional<double> MockVideoAnalyzer::motion_smoothness_score(const AssetRef& video) {
    (void)video;
    return motion_smoothness_;
}

// --- Assembly -----------------------------------------------------------------------------

ProviderSet make_mock_providers(std::uint64_t seed, AssetStore& store, const MockOptions& options) {
    ProviderSet p;
    p.chat = std::make_shared<MockChatModel>(seed, options, "mock-chat");
    p.video_quality_chat = std::make_shared<MockChatModel>(mix64(seed, fnv1a64("vq")), options, "mock-chat-vq");
    p.judge_chat = std::make_shared<MockChatModel>(mix64(seed, fnv1a64("judge")), options, "mock-chat-judge");
    p.image_editor = std::make_shared<MockImageEditor>(seed, store, options);
    p.video_generator = std::make_shared<MockVideoGenerator>(seed, store, options);
    p.music = std::make_shared<MockMusicGenerator>(seed, store);
    p.speech = std::make_shared<MockSpeechSynthesizer>(seed, store);
    p.embedder = std::make_shared<MockEmbedder>(options.embedding_dim);
    p.pose = std::make_shared<MockPoseEstimator>(options.keypoint_count, options.pose_unavailable_hashes);
    p.video_analyzer = std::make_shared<MockVideoAnalyzer>(store, options.embedding_dim,
                                                           options.motion_smoothness_score);
    return p;
}

int mock_provider_calls(const ProviderSet& providers) {
    int total = 0;
    if (auto c = std::dynamic_pointer_cast<MockChatModel>(providers.chat)) total += c->calls();
    if (auto c = std::dynamic_pointer_cast<MockChatModel>(providers.video_quality_chat)) total += c->calls();
    if (auto c = std::dynamic_pointer_cast<MockChatModel>(providers.judge_chat)) total += c->calls();
    if (auto c = std::dynamic_pointer_cast<MockImageEditor>(providers.image_editor)) total += c->calls();
    if (auto c = std::dynamic_pointer_cast<MockVideoGenerator>(providers.video_generator)) total += c->calls();
    if (auto c = std::dynamic_pointer_cast<MockMusicGenerator>(providers.music)) total += c->calls();
    if (auto c = std::dynamic_pointer_cast<MockSpeechSynthesizer>(providers.speech)) total += c->calls();
    return total;
}

} // namespace pvlog
