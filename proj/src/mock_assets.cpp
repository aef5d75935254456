#include "pvlog/mock_assets.hpp"

#include <charconv>
#include <map>
#include <sstream>

#include "pvlog/util.hpp"

namespace pvlog::mockfmt {

namespace {

// key=value per line after the magic header line.
std::optional<std::map<std::string, std::string>> parse_kv(std::string_view bytes, std::string_view magic) {
    if (bytes.substr(0, magic.size()) != magic) return std::nullopt;
    std::map<std::string, std::string> kv;
    std::istringstream in{std::string(bytes.substr(magic.size()))};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) return std::nullopt;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

std::uint64_t to_u64(const std::string& s) {
    std::uint64_t v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

} // namespace

std::string make_image(std::uint64_t seed, int width, int height) {
    std::ostringstream out;
    out << "MOCKIMG v1\n"
        << "seed=" << seed << "\n"
        << "width=" << width << "\n"
        << "height=" << height << "\n";
    return out.str();
}

std::string make_video(double duration, int width, int height,
                       const std::vector<std::uint64_t>& frame_seeds) {
    std::ostringstream out;
    out << "MOCKVID v1\n"
        << "duration=" << format_fixed(duration, 6) << "\n"
        << "width=" << width << "\n"
        << "height=" << height << "\n"
        << "seeds=";
    for (std::size_t i = 0; i < frame_seeds.size(); ++i) {
        if (i) out << ",";
        out << frame_seeds[i];
    }
    out << "\n";
    return out.str();
}

std::string make_audio(double duration, std::uint64_t seed) {
    std::ostringstream out;
    out << "MOCKAUD v1\n"
        << "duration=" << format_fixed(duration, 6) << "\n"
        << "seed=" << seed << "\n";
    return out.str();
}

std::optional<MockImage> parse_image(std::string_view bytes) {
    auto kv = parse_kv(bytes, "MOCKIMG v1\n");
    if (!kv || !kv->count("seed") || !kv->count("width") || !kv->count("height")) return std::nullopt;
    MockImage m;
    m.seed = to_u64((*kv)["seed"]);
    m.width = static_cast<int>(to_u64((*kv)["width"]));
    m.height = static_cast<int>(to_u64((*kv)["height"]));
    return m;
}

std::optional<MockVideo> parse_video(std::string_view bytes) {
    auto kv = parse_kv(bytes, "MOCKVID v1\n");
    if (!kv || !kv->count("duration") || !kv->count("seeds")) return std::nullopt;
    MockVideo m;
    m.duration = std::stod((*kv)["duration"]);
    m.width = kv->count("width") ? static_cast<int>(to_u64((*kv)["width"])) : 0;
    m.height = kv->count("height") ? static_cast<int>(to_u64((*kv)["height"])) : 0;
    std::istringstream seeds{(*kv)["seeds"]};
    std::string tok;
    while (std::getline(seeds, tok, ',')) {
        if (!tok.empty()) m.frame_seeds.push_back(to_u64(tok));
    }
    return m;
}

std::optional<MockAudio> parse_audio(std::string_view bytes) {
    auto kv = parse_kv(bytes, "MOCKAUD v1\n");
    if (!kv || !kv->count("duration") || !kv->count("seed")) return std::nullopt;
    MockAudio m;
    m.duration = std::stod((*kv)["duration"]);
    m.seed = to_u64((*kv)["seed"]);
    return m;
}

} // namespace pvlog::mockfmt
