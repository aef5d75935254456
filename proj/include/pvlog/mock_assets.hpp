#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pvlog::mockfmt {

// Plain-text stand-in media used by the mock providers. Each asset carries
// its own feature seeds in-band, so embeddings, flow, and frame scores are
// computable without any ML runtime.

struct MockImage {
    std::uint64_t seed = 0;
    int width = 0;
    int height = 0;
};

struct MockVideo {
    double duration = 0.0;
    int width = 0;
    int height = 0;
    std::vector<std::uint64_t> frame_seeds;
};

struct MockAudio {
    double duration = 0.0;
    std::uint64_t seed = 0;
};

std::string make_image(std::uint64_t seed, int width, int height);
std::string make_video(double duration, int width, int height,
                       const std::vector<std::uint64_t>& frame_seeds);
std::string make_audio(double duration, std::uint64_t seed);

std::optional<MockImage> parse_image(std::string_view bytes);
std::optional<MockVideo> parse_video(std::string_view bytes);
std::optional<MockAudio> parse_audio(std::string_view bytes);

} // namespace pvlog::mockfmt
