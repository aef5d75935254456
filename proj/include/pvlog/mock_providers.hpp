#pragma once

#include <atomic>
#include <deque>
#include <map>
#include <set>

#include "pvlog/providers.hpp"

namespace pvlog {

/// Knobs shared by all mock providers. Every mock is a pure function of
/// (inputs, seed): repeated calls agree bit-for-bit.
struct MockOptions {
    int k_min = 4;
    int k_max = 8;
    double review_fail_probability = 0.0;
    double image_issue_probability = 0.0;
    double video_issue_probability = 0.0;
    std::map<std::string, std::string> reply_table; // schema id -> fixed scripted reply
    int embedding_dim = 64;
    int keypoint_count = 17;
    int video_frames = 8;
    double video_duration_s = 5.0;
    int image_width = 768;
    int image_height = 1360;
    int image_edit_fail_after = -1; // >= 0: edit calls beyond this throw ProviderError
    std::optional<double> motion_smoothness_score; // delegation hook for tests
    std::set<std::string> pose_unavailable_hashes;
};

class MockChatModel : public ChatModel {
public:
    MockChatModel(std::uint64_t seed, MockOptions options, std::string identity = "mock-chat");
    ChatResponse chat(const ChatRequest& request) override;
    std::string identity() const override { return identity_; }
    int calls() const { return calls_.load(); }

private:
    std::string synthesize(const std::string& schema_id, std::uint64_t h, const std::string& user_text) const;
    std::uint64_t seed_;
    MockOptions options_;
    std::string identity_;
    std::atomic<int> calls_{0};
};

/// Test double with canned replies and full request capture.
class ScriptedChatModel : public ChatModel {
public:
    explicit ScriptedChatModel(std::vector<std::string> replies = {});
    void push_reply(const std::string& reply);
    void push_schema_reply(const std::string& schema_id, const std::string& reply);
    ChatResponse chat(const ChatRequest& request) override;
    std::string identity() const override { return "scripted-chat"; }
    const std::vector<ChatRequest>& requests() const { return requests_; }
    int calls() const { return static_cast<int>(requests_.size()); }

private:
    std::deque<std::string> replies_;
    std::map<std::string, std::deque<std::string>> schema_replies_;
    std::vector<ChatRequest> requests_;
    std::mutex mu_;
};

class MockImageEditor : public ImageEditor {
public:
    MockImageEditor(std::uint64_t seed, AssetStore& store, MockOptions options);
    AssetRef edit_image(const std::string& prompt, const AssetRef& reference) override;
    std::string identity() const override { return "mock-image-edit"; }
    int calls() const { return calls_.load(); }

private:
    std::uint64_t seed_;
    AssetStore& store_;
    MockOptions options_;
    std::atomic<int> calls_{0};
};

class MockVideoGenerator : public VideoGenerator {
public:
    MockVideoGenerator(std::uint64_t seed, AssetStore& store, MockOptions options);
    AssetRef image_to_video(const std::string& prompt, const AssetRef& keyframe) override;
    std::string identity() const override { return "mock-i2v"; }
    int calls() const { return calls_.load(); }

private:
    std::uint64_t seed_;
    AssetStore& store_;
    MockOptions options_;
    std::atomic<int> calls_{0};
};

class MockMusicGenerator : public MusicGenerator {
public:
    MockMusicGenerator(std::uint64_t seed, AssetStore& store);
    AssetRef text_to_music(const std::string& prompt) override;
    std::string identity() const override { return "mock-t2m"; }
    int calls() const { return calls_.load(); }

private:
    std::uint64_t seed_;
    AssetStore& store_;
    std::atomic<int> calls_{0};
};

class MockSpeechSynthesizer : public SpeechSynthesizer {
public:
    MockSpeechSynthesizer(std::uint64_t seed, AssetStore& store);
    AssetRef text_to_speech(const std::string& text,
                            const std::optional<AssetRef>& voice_reference) override;
    std::string identity() const override { return "mock-tts"; }
    int calls() const { return calls_.load(); }

private:
    std::uint64_t seed_;
    AssetStore& store_;
    std::atomic<int> calls_{0};
};

/// Mock audio length, shared by music and speech mocks.
double mock_audio_duration(const std::string& text);

class MockEmbedder : public Embedder {
public:
    explicit MockEmbedder(int dimension = 64);
    int dimension() const override { return dim_; }
    std::vector<double> embed_image(const AssetRef& asset) override;
    std::vector<double> embed_text(const std::string& text) override;
    std::string identity() const override { return "mock-embed"; }
    int calls() const { return calls_.load(); }

private:
    int dim_;
    std::atomic<int> calls_{0};
};

/// Embedder with pinned vectors per content hash / text; unmapped inputs fall
/// back to the seeded mock construction.
class ScriptedEmbedder : public Embedder {
public:
    explicit ScriptedEmbedder(int dimension = 64);
    void set_image_embedding(const std::string& content_hash, std::vector<double> v);
    void set_text_embedding(const std::string& text, std::vector<double> v);
    int dimension() const override { return dim_; }
    std::vector<double> embed_image(const AssetRef& asset) override;
    std::vector<double> embed_text(const std::string& text) override;
    std::string identity() const override { return "scripted-embed"; }

private:
    int dim_;
    MockEmbedder fallback_;
    std::map<std::string, std::vector<double>> by_hash_;
    std::map<std::string, std::vector<double>> by_text_;
};

class MockPoseEstimator : public PoseEstimator {
public:
    MockPoseEstimator(int keypoint_count, std::set<std::string> unavailable_hashes = {});
    int keypoint_count() const override { return count_; }
    std::vector<Keypoint> estimate_pose(const AssetRef& image) override;
    std::string identity() const override { return "mock-pose"; }

private:
    int count_;
    std::set<std::string> unavailable_;
};

class MockVideoAnalyzer : public VideoAnalyzer {
public:
    MockVideoAnalyzer(AssetStore& store, int embedding_dim,
                      std::optional<double> motion_smoothness = std::nullopt);
    std::vector<double> estimate_flow(const AssetRef& video) override;
    std::vector<double> score_frames(const AssetRef& video, FrameCriterion criterion) override;
    std::vector<std::vector<double>> embed_frames(const AssetRef& video, FrameSpace space) override;
    std::optional<double> motion_smoothness_score(const AssetRef& video) override;
    std::string identity() const override { return "mock-video-analyzer"; }

private:
    std::vector<std::uint64_t> frame_seeds(const AssetRef& video) const;
    AssetStore& store_;
    int dim_;
    std::optional<double> motion_smoothness_;
};

/// Unit vector deterministically derived from a seed (used by all mocks).
std::vector<double> seeded_unit_vector(std::uint64_t seed, int dimension);

ProviderSet make_mock_providers(std::uint64_t seed, AssetStore& store, const MockOptions& options = {});

/// Total provider calls across all mocks in the set (0 for non-mock members).
int mock_provider_calls(const ProviderSet& providers);

} // namespace pvlog
