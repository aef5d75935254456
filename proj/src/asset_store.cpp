#include "pvlog/asset_store.hpp"

#include <cstdint>

#include "pvlog/errors.hpp"
#include "pvlog/mock_assets.hpp"
#include "pvlog/util.hpp"

namespace pvlog {

namespace {

std::optional<std::pair<int, int>> png_dimensions(const std::string& bytes) {
    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (bytes.size() < 24) return std::nullopt;
    for (int i = 0; i < 8; ++i) {
        if (static_cast<unsigned char>(bytes[i]) != sig[i]) return std::nullopt;
    }
    auto be32 = [&](std::size_t off) {
        return (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off])) << 24) |
               (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + 1])) << 16) |
               (static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + 2])) << 8) |
               static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + 3]));
    };
    return std::make_pair(static_cast<int>(be32(16)), static_cast<int>(be32(20)));
}

} // namespace

AssetStore::AssetStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_ / "assets");
}

std::filesystem::path AssetStore::path_for(const std::string& hash) const {
    return root_ / "assets" / hash.substr(0, 2) / hash;
}

AssetRef AssetStore::put(const std::string& bytes, AssetKind kind, std::optional<int> width,
                         std::optional<int> height, std::optional<double> duration) {
    AssetRef ref;
    ref.content_hash = sha256_hex(bytes);
    ref.kind = kind;
    ref.width = width;
    ref.height = height;
    ref.duration = duration;
    ref.uri = "assets/" + ref.content_hash.substr(0, 2) + "/" + ref.content_hash;
    if (auto v = validate(ref); !v.empty()) {
        throw ValidationError("asset metadata invalid: " + v.front());
    }
    std::lock_guard<std::mutex> lock(mu_);
    auto p = path_for(ref.content_hash);
    if (!std::filesystem::exists(p)) {
        atomic_write_file(p, bytes);
        json meta = ref.to_json();
        meta["schema"] = kSchemaAssetMeta;
        atomic_write_file(p.string() + ".meta.json", dump_document(meta));
    }
    return ref;
}

std::string AssetStore::get(const AssetRef& ref) const {
    std::string bytes;
    {
        std::lock_guard<std::mutex> lock(mu_);
        bytes = read_file(path_for(ref.content_hash));
    }
    if (sha256_hex(bytes) != ref.content_hash) {
        throw ValidationError("asset hash mismatch for " + ref.content_hash);
    }
    return bytes;
}

bool AssetStore::contains(const std::string& content_hash) const {
    std::lock_guard<std::mutex> lock(mu_);
    return std::filesystem::exists(path_for(content_hash));
}

void AssetStore::verify(const AssetRef& ref) const {
    (void)get(ref);
}

AssetRef AssetStore::ingest_file(const std::filesystem::path& p, AssetKind kind) {
    std::string bytes = read_file(p);
    std::optional<int> w, h;
    std::optional<double> d;
    if (kind == AssetKind::image) {
        if (auto m = mockfmt::parse_image(bytes)) {
            w = m->width;
            h = m->height;
        } else if (auto dims = png_dimensions(bytes)) {
            w = dims->first;
            h = dims->second;
        } else {
            throw ConfigError("unsupported image format (expected PNG or mock image): " + p.string());
        }
    } else if (kind == AssetKind::video) {
        auto m = mockfmt::parse_video(bytes);
        if (!m) throw ConfigError("unsupported video format (expected mock video): " + p.string());
        w = m->width;
        h = m->height;
        d = m->duration;
    } else {
        auto m = mockfmt::parse_audio(bytes);
        if (!m) throw ConfigError("unsupported audio format (expected mock audio): " + p.string());
        d = m->duration;
    }
    return put(bytes, kind, w, h, d);
}

} // namespace pvlog
