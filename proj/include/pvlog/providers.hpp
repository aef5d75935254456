#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "pvlog/asset_store.hpp"
#include "pvlog/domain.hpp"
#include "pvlog/errors.hpp"

namespace pvlog {

struct RetryPolicy {
    int max_attempts = 3;
    double backoff_s = 0.5; // doubled per retry
};

/// Runs f(), retrying only retryable ProviderErrors. Total attempts are
/// bounded by policy.max_attempts.
template <typename F>
auto with_retry(const RetryPolicy& policy, F&& f) {
    double delay = policy.backoff_s;
    for (int attempt = 1;; ++attempt) {
        try {
            return f();
        } catch (const ProviderError& e) {
            if (!e.retryable || attempt >= policy.max_attempts) throw;
            if (delay > 0.0) {
                std::this_thread::sleep_for(std::chrono::duration<double>(delay));
            }
            delay *= 2.0;
        }
    }
}

/// Per-provider rate limit.
class TokenBucket {
public:
    TokenBucket(double capacity, double refill_per_s);
    bool try_acquire(double tokens = 1.0);
    void acquire(double tokens = 1.0); // blocks

private:
    void refill();
    double capacity_;
    double refill_per_s_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mu_;
};

struct ImageEditKnobs {
    int inference_steps = 20;
    double guidance_scale = 3.5;
    int width = 768;
    int height = 1360;
};

struct ProviderConfig {
    std::string endpoint;
    std::string model_name;
    std::string auth_env; // env var holding the credential, PV_<PROVIDER>_KEY
    double timeout_s = 60.0;
    RetryPolicy retry;
    ImageEditKnobs image_edit;

    std::vector<std::string> validate() const;
};

struct ChatPart {
    std::string text;
    std::optional<AssetRef> image; // at most one image per part
};

struct ChatRequest {
    std::string system;
    std::vector<ChatPart> parts;
    std::string schema_id; // required output schema; parsing happens upstream
};

struct ChatResponse {
    std::string text;
    int prompt_tokens = 0;
    int completion_tokens = 0;
    double latency_s = 0.0;
};

class ChatModel {
public:
    virtual ~ChatModel() = default;
    /// pre: request.parts nonempty. Returns raw provider text; no parsing.
    virtual ChatResponse chat(const ChatRequest& request) = 0;
    virtual std::string identity() const = 0;
};

class ImageEditor {
public:
    virtual ~ImageEditor() = default;
    /// pre: reference is an image. Produces a new image at configured resolution.
    virtual AssetRef edit_image(const std::string& prompt, const AssetRef& reference) = 0;
    virtual std::string identity() const = 0;
};

class VideoGenerator {
public:
    virtual ~VideoGenerator() = default;
    virtual AssetRef image_to_video(const std::string& prompt, const AssetRef& keyframe) = 0;
    virtual std::string identity() const = 0;
};

class MusicGenerator {
public:
    virtual ~MusicGenerator() = default;
    virtual AssetRef text_to_music(const std::string& prompt) = 0;
    virtual std::string identity() const = 0;
};

class SpeechSynthesizer {
public:
    virtual ~SpeechSynthesizer() = default;
    virtual AssetRef text_to_speech(const std::string& text,
                                    const std::optional<AssetRef>& voice_reference) = 0;
    virtual std::string identity() const = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual int dimension() const = 0;
    /// post: unit Euclidean norm within 1e-9.
    virtual std::vector<double> embed_image(const AssetRef& asset) = 0;
    virtual std::vector<double> embed_text(const std::string& text) = 0;
    virtual std::string identity() const = 0;
};

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
};

class PoseEstimator {
public:
    virtual ~PoseEstimator() = default;
    virtual int keypoint_count() const = 0;
    /// Empty result means no person detected; the caller decides.
    virtual std::vector<Keypoint> estimate_pose(const AssetRef& image) = 0;
    virtual std::string identity() const = 0;
};

enum class FrameCriterion { aesthetic, imaging };
enum class FrameSpace { subject, background };

class VideoAnalyzer {
public:
    virtual ~VideoAnalyzer() = default;
    /// One mean flow magnitude per consecutive frame pair (normalized units).
    virtual std::vector<double> estimate_flow(const AssetRef& video) = 0;
    /// One score in [0,1] per frame.
    virtual std::vector<double> score_frames(const AssetRef& video, FrameCriterion criterion) = 0;
    /// One unit vector per frame in the requested feature space.
    virtual std::vector<std::vector<double>> embed_frames(const AssetRef& video, FrameSpace space) = 0;
    /// Reported verbatim when a frame-interpolation scorer is configured.
    virtual std::optional<double> motion_smoothness_score(const AssetRef& video) { (void)video; return std::nullopt; }
    virtual std::string identity() const = 0;
};

struct ProviderSet {
    std::shared_ptr<ChatModel> chat;               // MACF agents, FRM image agents
    std::shared_ptr<ChatModel> video_quality_chat; // may be a different backbone
    std::shared_ptr<ChatModel> judge_chat;         // eval storyboard judge
    std::shared_ptr<ImageEditor> image_editor;
    std::shared_ptr<VideoGenerator> video_generator;
    std::shared_ptr<MusicGenerator> music;
    std::shared_ptr<SpeechSynthesizer> speech;
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<PoseEstimator> pose;
    std::shared_ptr<VideoAnalyzer> video_analyzer;

    std::map<std::string, std::string> identities() const;
};

/// Secret lookup: PV_<PROVIDER>_KEY environment variables.
std::optional<std::string> provider_credential(const std::string& provider_name);

} // namespace pvlog
