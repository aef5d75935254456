#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace pvlog {

/// Text template with named `{{placeholder}}` slots. The placeholder set is
/// scanned at construction and closed: render() requires a value for every
/// declared placeholder and rejects leftovers.
class PromptTemplate {
public:
    PromptTemplate() = default;
    PromptTemplate(std::string id, std::string text);

    const std::string& id() const { return id_; }
    const std::vector<std::string>& placeholders() const { return placeholders_; }
    std::string render(const std::map<std::string, std::string>& vars) const;

private:
    std::string id_;
    std::string text_;
    std::vector<std::string> placeholders_;
};

/// Templates keyed by "<agent>/<role>" (e.g. "story/generator").
class TemplateLibrary {
public:
    /// Compiled-in copies of the files under templates/.
    static TemplateLibrary builtin();
    /// Loads `<dir>/manifest.json` mapping ids to relative paths.
    static TemplateLibrary load(const std::filesystem::path& dir);

    const PromptTemplate& get(const std::string& id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, PromptTemplate> templates_;
};

/// Generated from templates/ at configure time.
const std::vector<std::pair<std::string, std::string>>& builtin_template_table();

} // namespace pvlog
