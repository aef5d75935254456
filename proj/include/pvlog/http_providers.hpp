#pragma once

#include <functional>

#include "pvlog/providers.hpp"

namespace pvlog {

struct HttpResult {
    int status = 0;
    std::string body;
};

/// POSTs a JSON body to a path on the provider endpoint. Injectable so retry
/// and parsing behavior are testable without a live service.
using HttpTransport = std::function<HttpResult(const std::string& path, const std::string& body)>;

/// Default transport backed by cpp-httplib against config.endpoint, with the
/// credential from PV_<provider>_KEY as a bearer token.
HttpTransport make_http_transport(const ProviderConfig& config, const std::string& provider_name);

/// Maps an HTTP status to the retry classification: 408/429/5xx retryable,
/// 401/403 fatal auth, other 4xx fatal.
ProviderError classify_http_error(int status, const std::string& body);

class HttpChatModel : public ChatModel {
public:
    HttpChatModel(ProviderConfig config, AssetStore& store, HttpTransport transport);
    ChatResponse chat(const ChatRequest& request) override;
    std::string identity() const override { return "http:" + config_.model_name; }

private:
    ProviderConfig config_;
    AssetStore& store_;
    HttpTransport transport_;
};

class HttpImageEditor : public ImageEditor {
public:
    HttpImageEditor(ProviderConfig config, AssetStore& store, HttpTransport transport);
    AssetRef edit_image(const std::string& prompt, const AssetRef& reference) override;
    std::string identity() const override { return "http:" + config_.model_name; }

private:
    ProviderConfig config_;
    AssetStore& store_;
    HttpTransport transport_;
};

class HttpVideoGenerator : public VideoGenerator {
public:
    HttpVideoGenerator(ProviderConfig config, AssetStore& store, HttpTransport transport);
    AssetRef image_to_video(const std::string& prompt, const AssetRef& keyframe) override;
    std::string identity() const override { return "http:" + config_.model_name; }

private:
    ProviderConfig config_;
    AssetStore& store_;
    HttpTransport transport_;
};

class HttpMusicGenerator : public MusicGenerator {
public:
    HttpMusicGenerator(ProviderConfig config, AssetStore& store, HttpTransport transport);
    AssetRef text_to_music(const std::string& prompt) override;
    std::string identity() const override { return "http:" + config_.model_name; }

private:
    ProviderConfig config_;
    AssetStore& store_;
    HttpTransport transport_;
};

class HttpSpeechSynthesizer : public SpeechSynthesizer {
public:
    HttpSpeechSynthesizer(ProviderConfig config, AssetStore& store, HttpTransport transport);
    AssetRef text_to_speech(const std::string& text,
                            const std::optional<AssetRef>& voice_reference) override;
    std::string identity() const override { return "http:" + config_.model_name; }

private:
    ProviderConfig config_;
    AssetStore& store_;
    HttpTransport transport_;
};

class HttpEmbedder : public Embedder {
public:
    HttpEmbedder(ProviderConfig config, AssetStore& store, HttpTransport transport, int dimension);
    int dimension() const override { return dim_; }
    std::vector<double> embed_image(const AssetRef& asset) override;
    std::vector<double> embed_text(const std::string& text) override;
    std::string identity() const override { return "http:" + config_.model_name; }

private:
    ProviderConfig config_;
    AssetStore& store_;
    HttpTransport transport_;
    int dim_;
};

} // namespace pvlog
