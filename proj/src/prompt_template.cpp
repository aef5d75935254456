#include "pvlog/prompt_template.hpp"

#include <algorithm>
#include <regex>

#include <json.hpp>

#include "pvlog/errors.hpp"
#include "pvlog/util.hpp"

namespace pvlog {

PromptTemplate::PromptTemplate(std::string id, std::string text)
    : id_(std::move(id)), text_(std::move(text)) {
    static const std::regex re(R"(\{\{([A-Za-z0-9_]+)\}\})");
    for (auto it = std::sregex_iterator(text_.begin(), text_.end(), re); it != std::sregex_iterator(); ++it) {
        std::string name = (*it)[1].str();
        if (std::find(placeholders_.begin(), placeholders_.end(), name) == placeholders_.end()) {
            placeholders_.push_back(name);
        }
    }
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& vars) const {
    std::string out = text_;
    for (const auto& name : placeholders_) {
        auto it = vars.find(name);
        if (it == vars.end()) {
            throw ConfigError("template '" + id_ + "': unresolved placeholder '" + name + "'");
        }
        std::string token = "{{" + name + "}}";
        std::size_t pos = 0;
        while ((pos = out.find(token, pos)) != std::string::npos) {
            out.replace(pos, token.size(), it->second);
            pos += it->second.size();
        }
    }
    return out;
}

TemplateLibrary TemplateLibrary::builtin() {
    TemplateLibrary lib;
    for (const auto& [id, text] : builtin_template_table()) {
        lib.templates_.emplace(id, PromptTemplate(id, text));
    }
    return lib;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
    nlohmann::json manifest = nlohmann::json::parse(read_file(dir / "manifest.json"), nullptr, false);
    if (manifest.is_discarded() || !manifest.is_object() || !manifest.contains("templates")) {
        throw ConfigError("malformed template manifest in " + dir.string());
    }
    TemplateLibrary lib;
    for (auto it = manifest["templates"].begin(); it != manifest["templates"].end(); ++it) {
        std::string rel = it.value().get<std::string>();
        lib.templates_.emplace(it.key(), PromptTemplate(it.key(), read_file(dir / rel)));
    }
    return lib;
}

const PromptTemplate& TemplateLibrary::get(const std::string& id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw ConfigError("unknown template id '" + id + "'");
    return it->second;
}

std::vector<std::string> TemplateLibrary::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

} // namespace pvlog
