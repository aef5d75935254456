#include "pvlog/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace pvlog {

TokenBucket::TokenBucket(double capacity, double refill_per_s)
    : capacity_(capacity), refill_per_s_(refill_per_s), tokens_(capacity),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::refill() {
    auto now = std::chrono::steady_clock::now();
    double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * refill_per_s_);
}

bool TokenBucket::try_acquire(double tokens) {
    std::lock_guard<std::mutex> lock(mu_);
    refill();
    if (tokens_ + 1e-12 < tokens) return false;
    tokens_ -= tokens;
    return true;
}

void TokenBucket::acquire(double tokens) {
    while (!try_acquire(tokens)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
}

std::vector<std::string> ProviderConfig::validate() const {
    std::vector<std::string> v;
    if (image_edit.inference_steps < 1) v.push_back("inference_steps must be >= 1");
    if (image_edit.guidance_scale <= 0.0) v.push_back("guidance_scale must be > 0");
    if (timeout_s <= 0.0) v.push_back("timeout must be > 0");
    if (retry.max_attempts < 1) v.push_back("retry.max_attempts must be >= 1");
    return v;
}

std::map<std::string, std::string> ProviderSet::identities() const {
    std::map<std::string, std::string> ids;
    if (chat) ids["chat"] = chat->identity();
    if (video_quality_chat) ids["video_quality_chat"] = video_quality_chat->identity();
    if (judge_chat) ids["judge_chat"] = judge_chat->identity();
    if (image_editor) ids["image_edit"] = image_editor->identity();
    if (video_generator) ids["image_to_video"] = video_generator->identity();
    if (music) ids["text_to_music"] = music->identity();
    if (speech) ids["text_to_speech"] = speech->identity();
    if (embedder) ids["embedder"] = embedder->identity();
    if (pose) ids["pose"] = pose->identity();
    if (video_analyzer) ids["video_analyzer"] = video_analyzer->identity();
    return ids;
}

std::optional<std::string> provider_credential(const std::string& provider_name) {
    std::string var = "PV_";
    for (char c : provider_name) {
        var.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    var += "_KEY";
    const char* val = std::getenv(var.c_str());
    if (!val || !*val) return std::nullopt;
    return std::string(val);
}

} // namespace pvlog
