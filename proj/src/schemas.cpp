#include "pvlog/schemas.hpp"

#include <algorithm>
#include <set>

#include "pvlog/errors.hpp"

namespace pvlog::schema {

namespace {

std::string nonempty_string(const json& j, const std::string& ctx) {
    if (!j.is_string()) throw ParseError(ctx + ": expected string");
    auto s = j.get<std::string>();
    if (s.empty()) throw ParseError(ctx + ": must be nonempty");
    return s;
}

std::string any_string(const json& j, const std::string& ctx) {
    if (!j.is_string()) throw ParseError(ctx + ": expected string");
    return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& ctx) {
    if (!j.is_boolean()) throw ParseError(ctx + ": expected boolean");
    return j.get<bool>();
}

/// Checks an array of {index, text}: unique positive indices, nonempty text.
/// Returns a copy sorted by index.
json checked_indexed_list(const json& j, const std::string& ctx) {
    if (!j.is_array() || j.empty()) throw ParseError(ctx + ": expected nonempty array");
    std::vector<json> entries;
    std::set<int> seen;
    for (const auto& e : j) {
        StrictObject o(e, ctx + "[]");
        const json& idx = o.require("index");
        if (!idx.is_number_integer()) throw ParseError(ctx + "[].index: expected integer");
        int i = idx.get<int>();
        if (i < 1) throw ParseError(ctx + "[].index: must be >= 1");
        if (!seen.insert(i).second) throw ParseError(ctx + ": duplicate index " + std::to_string(i));
        nonempty_string(o.require("text"), ctx + "[].text");
        o.finish();
        entries.push_back(e);
    }
    std::sort(entries.begin(), entries.end(),
              [](const json& a, const json& b) { return a["index"].get<int>() < b["index"].get<int>(); });
    json out = json::array();
    for (auto& e : entries) out.push_back(std::move(e));
    return out;
}

json check_story(const json& doc) {
    StrictObject o(doc, "story");
    nonempty_string(o.require("character"), "story.character");
    nonempty_string(o.require("story"), "story.story");
    o.finish();
    return doc;
}

json check_list_doc(const json& doc, const char* field) {
    StrictObject o(doc, field);
    json sorted = checked_indexed_list(o.require(field), field);
    o.finish();
    json out;
    out[field] = sorted;
    return out;
}

json check_music(const json& doc) {
    StrictObject o(doc, "music");
    nonempty_string(o.require("music"), "music.music");
    o.finish();
    return doc;
}

json check_review_verdict(const json& doc) {
    StrictObject o(doc, "verdict");
    bool passed = get_bool(o.require("passed"), "verdict.passed");
    std::string feedback = any_string(o.require("feedback"), "verdict.feedback");
    o.finish();
    if (!passed && feedback.empty()) throw ParseError("verdict: feedback required when passed is false");
    if (passed && !feedback.empty()) throw ParseError("verdict: feedback must be empty when passed is true");
    return doc;
}

json check_image_verdict(const json& doc) {
    StrictObject o(doc, "image_verdict");
    bool qualified = get_bool(o.require("qualified"), "image_verdict.qualified");
    const json& issues = o.require("issues");
    if (!issues.is_array()) throw ParseError("image_verdict.issues: expected array");
    for (const auto& i : issues) {
        image_issue_from_string(any_string(i, "image_verdict.issues[]"));
    }
    std::string suggestion = any_string(o.require("suggestion"), "image_verdict.suggestion");
    o.finish();
    if (qualified && (!issues.empty() || !suggestion.empty())) {
        throw ParseError("image_verdict: qualified verdict must carry no issues or suggestion");
    }
    if (!qualified) {
        if (issues.empty()) throw ParseError("image_verdict: unqualified verdict requires issues");
        if (suggestion.empty()) throw ParseError("image_verdict: suggestion required when issues present");
    }
    return doc;
}

json check_edit_prompt(const json& doc) {
    StrictObject o(doc, "edit_prompt");
    nonempty_string(o.require("edit_prompt"), "edit_prompt.edit_prompt");
    o.finish();
    return doc;
}

json check_video_verdict(const json& doc) {
    StrictObject o(doc, "video_verdict");
    bool qualified = get_bool(o.require("qualified"), "video_verdict.qualified");
    std::string prompt = any_string(o.require("revised_prompt"), "video_verdict.revised_prompt");
    std::string reason = any_string(o.require("reason"), "video_verdict.reason");
    o.finish();
    if (qualified && (!prompt.empty() || !reason.empty())) {
        throw ParseError("video_verdict: qualified verdict must carry no revision");
    }
    if (!qualified && (prompt.empty() || reason.empty())) {
        throw ParseError("video_verdict: revised_prompt and reason required when unqualified");
    }
    return doc;
}

json check_storyboard_judge(const json& doc) {
    StrictObject o(doc, "judge");
    const json& dims = o.require("dimensions");
    if (!dims.is_array() || dims.size() != 4) throw ParseError("judge.dimensions: expected exactly 4 entries");
    std::set<std::string> names;
    for (const auto& d : dims) {
        StrictObject od(d, "judge.dimensions[]");
        std::string name = any_string(od.require("name"), "judge.dimensions[].name");
        bool known = false;
        for (const char* n : kStoryboardDimensions) {
            if (name == n) known = true;
        }
        if (!known) throw ParseError("judge: unknown dimension '" + name + "'");
        if (!names.insert(name).second) throw ParseError("judge: duplicate dimension '" + name + "'");
        const json& score = od.require("score");
        if (!score.is_number_integer()) throw ParseError("judge.dimensions[].score: expected integer");
        int s = score.get<int>();
        if (s < 1 || s > 5) throw ParseError("judge: score out of [1,5]");
        nonempty_string(od.require("reason"), "judge.dimensions[].reason");
        od.finish();
    }
    for (const char* n : kStoryboardDimensions) {
        if (!names.count(n)) throw ParseError("judge: missing dimension '" + std::string(n) + "'");
    }
    return doc;
}

} // namespace

json extract_document(const std::string& reply) {
    std::string body = reply;
    auto fence = reply.find("```json");
    if (fence != std::string::npos) {
        auto start = reply.find('\n', fence);
        if (start == std::string::npos) throw ParseError("malformed fenced block");
        auto end = reply.find("```", start);
        if (end == std::string::npos) throw ParseError("unterminated fenced block");
        body = reply.substr(start + 1, end - start - 1);
    }
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw ParseError("reply is not valid JSON");
    return doc;
}

json check(const json& doc, const std::string& schema_id) {
    if (schema_id == kStory) return check_story(doc);
    if (schema_id == kStoryboards) return check_list_doc(doc, "storyboards");
    if (schema_id == kVideoPrompts) return check_list_doc(doc, "video_prompts");
    if (schema_id == kMonologues) return check_list_doc(doc, "monologues");
    if (schema_id == kMusic) return check_music(doc);
    if (schema_id == kReviewVerdict) return check_review_verdict(doc);
    if (schema_id == kImageVerdict) return check_image_verdict(doc);
    if (schema_id == kEditPrompt) return check_edit_prompt(doc);
    if (schema_id == kVideoVerdict) return check_video_verdict(doc);
    if (schema_id == kStoryboardJudge) return check_storyboard_judge(doc);
    throw ParseError("unknown schema id '" + schema_id + "'");
}

json parse_structured(const std::string& reply, const std::string& schema_id) {
    return check(extract_document(reply), schema_id);
}

} // namespace pvlog::schema
