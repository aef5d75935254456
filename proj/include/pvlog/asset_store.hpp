#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "pvlog/domain.hpp"

namespace pvlog {

/// Content-addressed asset storage. Bytes live under
/// `assets/<first-2-hash-chars>/<hash>` with a `<hash>.meta.json` sidecar,
/// so superseded rollback attempts are retained without copies.
class AssetStore {
public:
    explicit AssetStore(std::filesystem::path root);

    AssetRef put(const std::string& bytes, AssetKind kind,
                 std::optional<int> width = std::nullopt,
                 std::optional<int> height = std::nullopt,
                 std::optional<double> duration = std::nullopt);

    /// Reads and verifies content against the ref's hash.
    std::string get(const AssetRef& ref) const;

    bool contains(const std::string& content_hash) const;

    /// Throws ValidationError when stored bytes no longer match the hash.
    void verify(const AssetRef& ref) const;

    /// Copies a file into the store. Kind-specific dimensions are parsed from
    /// the content (mock formats and PNG headers are understood).
    AssetRef ingest_file(const std::filesystem::path& p, AssetKind kind);

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path path_for(const std::string& hash) const;
    std::filesystem::path root_;
    mutable std::mutex mu_;
};

} // namespace pvlog
