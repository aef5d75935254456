#include "pvlog/http_providers.hpp"

#include <cmath>

#include <httplib.h>

#include "pvlog/util.hpp"

namespace pvlog {

namespace {

json post_json(const HttpTransport& transport, const RetryPolicy& retry, const std::string& path,
               const json& body) {
    return with_retry(retry, [&] {
        HttpResult res;
        try {
            res = transport(path, body.dump());
        } catch (const ProviderError&) {
            throw;
        } catch (const std::exception& e) {
            throw ProviderError(std::string("transport: ") + e.what(), true);
        }
        if (res.status != 200) throw classify_http_error(res.status, res.body);
        json doc = json::parse(res.body, nullptr, false);
        if (doc.is_discarded()) throw ProviderError("provider returned non-JSON body", false);
        return doc;
    });
}

} // namespace

ProviderError classify_http_error(int status, const std::string& body) {
    std::string msg = "http " + std::to_string(status) + ": " + body.substr(0, 200);
    if (status == 401 || status == 403) return ProviderError("auth: " + msg, false);
    if (status == 408 || status == 429 || status >= 500) return ProviderError(msg, true);
    return ProviderError(msg, false);
}

HttpTransport make_http_transport(const ProviderConfig& config, const std::string& provider_name) {
    auto credential = provider_credential(provider_name);
    std::string endpoint = config.endpoint;
    double timeout = config.timeout_s;
    return [endpoint, credential, timeout](const std::string& path, const std::string& body) {
        httplib::Client client(endpoint);
        client.set_read_timeout(std::chrono::duration<double>(timeout));
        client.set_connection_timeout(std::chrono::duration<double>(timeout));
        httplib::Headers headers;
        if (credential) headers.emplace("Authorization", "Bearer " + *credential);
        auto res = client.Post(path, headers, body, "application/json");
        if (!res) throw ProviderError("connection failed to " + endpoint, true);
        return HttpResult{res->status, res->body};
    };
}

// --- Chat ---------------------------------------------------------------------

HttpChatModel::HttpChatModel(ProviderConfig config, AssetStore& store, HttpTransport transport)
    : config_(std::move(config)), store_(store), transport_(std::move(transport)) {}

ChatResponse HttpChatModel::chat(const ChatRequest& request) {
    if (request.parts.empty()) throw ValidationError("chat request has no parts");
    json content = json::array();
    for (const auto& p : request.parts) {
        if (!p.text.empty()) content.push_back(json{{"type", "text"}, {"text", p.text}});
        if (p.image) {
            content.push_back(json{{"type", "image_base64"},
                                   {"data", base64_encode(store_.get(*p.image))}});
        }
    }
    json body{{"model", config_.model_name},
              {"messages", json::array({json{{"role", "system"}, {"content", request.system}},
                                        json{{"role", "user"}, {"content", content}}})}};
    json res = post_json(transport_, config_.retry, "/v1/chat", body);
    ChatResponse out;
    out.text = res.value("text", "");
    out.prompt_tokens = res.value("prompt_tokens", 0);
    out.completion_tokens = res.value("completion_tokens", 0);
    if (out.text.empty()) throw ProviderError("chat response missing text", false);
    return out;
}

// --- Media ---------------------------------------------------------------------

HttpImageEditor::HttpImageEditor(ProviderConfig config, AssetStore& store, HttpTransport transport)
    : config_(std::move(config)), store_(store), transport_(std::move(transport)) {}

AssetRef HttpImageEditor::edit_image(const std::string& prompt, const AssetRef& reference) {
    if (reference.kind != AssetKind::image) throw ValidationError("edit_image reference is not an image");
    const auto& knobs = config_.image_edit;
    json body{{"model", config_.model_name},
              {"prompt", prompt},
              {"reference_base64", base64_encode(store_.get(reference))},
              {"inference_steps", knobs.inference_steps},
              {"guidance_scale", knobs.guidance_scale},
              {"width", knobs.width},
              {"height", knobs.height}};
    json res = post_json(transport_, config_.retry, "/v1/images/edit", body);
    if (!res.contains("image_base64")) throw ProviderError("image edit response missing image", false);
    int w = res.value("width", 0);
    int h = res.value("height", 0);
    if (w != knobs.width || h != knobs.height) {
        throw ProviderError("image edit returned " + std::to_string(w) + "x" + std::to_string(h) +
                                ", configured " + std::to_string(knobs.width) + "x" +
                                std::to_string(knobs.height),
                            false);
    }
    return store_.put(base64_decode(res["image_base64"].get<std::string>()), AssetKind::image, w, h);
}

HttpVideoGenerator::HttpVideoGenerator(ProviderConfig config, AssetStore& store, HttpTransport transport)
    : config_(std::move(config)), store_(store), transport_(std::move(transport)) {}

AssetRef HttpVideoGenerator::image_to_video(const std::string& prompt, const AssetRef& keyframe) {
    if (keyframe.kind != AssetKind::image) throw ValidationError("image_to_video keyframe is not an image");
    json body{{"model", config_.model_name},
              {"prompt", prompt},
              {"keyframe_base64", base64_encode(store_.get(keyframe))}};
    json res = post_json(transport_, config_.retry, "/v1/videos/generate", body);
    if (!res.contains("video_base64")) throw ProviderError("video response missing video", false);
    double d = res.value("duration", 0.0);
    if (d <= 0.0) throw ProviderError("video response has nonpositive duration", false);
    return store_.put(base64_decode(res["video_base64"].get<std::string>()), AssetKind::video,
                      res.value("width", keyframe.width.value_or(0)),
                      res.value("height", keyframe.height.value_or(0)), d);
}

HttpMusicGenerator::HttpMusicGenerator(ProviderConfig config, AssetStore& store, HttpTransport transport)
    : config_(std::move(config)), store_(store), transport_(std::move(transport)) {}

AssetRef HttpMusicGenerator::text_to_music(const std::string& prompt) {
    if (prompt.empty()) throw ValidationError("text_to_music prompt empty");
    json body{{"model", config_.model_name}, {"prompt", prompt}};
    json res = post_json(transport_, config_.retry, "/v1/audio/music", body);
    if (!res.contains("audio_base64")) throw ProviderError("music response missing audio", false);
    double d = res.value("duration", 0.0);
    if (d <= 0.0) throw ProviderError("music response has nonpositive duration", false);
    return store_.put(base64_decode(res["audio_base64"].get<std::string>()), AssetKind::audio,
                      std::nullopt, std::nullopt, d);
}

HttpSpeechSynthesizer::HttpSpeechSynthesizer(ProviderConfig config, AssetStore& store,
                                             HttpTransport transport)
    : config_(std::move(config)), store_(store), transport_(std::move(transport)) {}

AssetRef HttpSpeechSynthesizer::text_to_speech(const std::string& text,
                                               const std::optional<AssetRef>& voice_reference) {
    if (text.empty()) throw ValidationError("text_to_speech text empty");
    json body{{"model", config_.model_name}, {"text", text}};
    if (voice_reference) body["voice_base64"] = base64_encode(store_.get(*voice_reference));
    json res = post_json(transport_, config_.retry, "/v1/audio/speech", body);
    if (!res.contains("audio_base64")) throw ProviderError("speech response missing audio", false);
    double d = res.value("duration", 0.0);
    if (d <= 0.0) throw ProviderError("speech response has nonpositive duration", false);
    return store_.put(base64_decode(res["audio_base64"].get<std::string>()), AssetKind::audio,
                      std::nullopt, std::nullopt, d);
}

HttpEmbedder::HttpEmbedder(ProviderConfig config, AssetStore& store, HttpTransport transport,
                           int dimension)
    : config_(std::move(config)), store_(store), transport_(std::move(transport)), dim_(dimension) {}

namespace {

std::vector<double> normalized_embedding(const json& res, int dim) {
    if (!res.contains("embedding") || !res["embedding"].is_array()) {
        throw ProviderError("embedding response missing vector", false);
    }
    std::vector<double> v = res["embedding"].get<std::vector<double>>();
    if (static_cast<int>(v.size()) != dim) {
        throw ProviderError("embedding dimension mismatch: got " + std::to_string(v.size()) +
                                ", configured " + std::to_string(dim),
                            false);
    }
    double norm = 0.0;
    for (double c : v) norm += c * c;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw ProviderError("embedding has zero norm", false);
    for (double& c : v) c /= norm;
    return v;
}

} // namespace

std::vector<double> HttpEmbedder::embed_image(const AssetRef& asset) {
    json body{{"model", config_.model_name}, {"image_base64", base64_encode(store_.get(asset))}};
    return normalized_embedding(post_json(transport_, config_.retry, "/v1/embed/image", body), dim_);
}

std::vector<double> HttpEmbedder::embed_text(const std::string& text) {
    json body{{"model", config_.model_name}, {"text", text}};
    return normalized_embedding(post_json(transport_, config_.retry, "/v1/embed/text", body), dim_);
}

} // namespace pvlog
