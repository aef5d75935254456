#pragma once

#include <string>

#include "pvlog/domain.hpp"

namespace pvlog::schema {

// Structured-output schema ids. Published copies live under schemas/.
inline constexpr const char* kStory = "macf/story";
inline constexpr const char* kStoryboards = "macf/storyboards";
inline constexpr const char* kVideoPrompts = "macf/video_prompts";
inline constexpr const char* kMonologues = "macf/monologues";
inline constexpr const char* kMusic = "macf/music";
inline constexpr const char* kReviewVerdict = "review/verdict";
inline constexpr const char* kImageVerdict = "frm/image_verdict";
inline constexpr const char* kEditPrompt = "frm/edit_prompt";
inline constexpr const char* kVideoVerdict = "frm/video_verdict";
inline constexpr const char* kStoryboardJudge = "eval/storyboard_judge";

/// Pulls the JSON document out of a chat reply: the first ```json fenced
/// block when present, otherwise the whole reply. Throws ParseError when the
/// result is not valid JSON.
json extract_document(const std::string& reply);

/// Parses a chat reply against a schema id and returns the normalized
/// document (indexed lists sorted by index). Throws ParseError on any schema
/// violation, with a message suitable for a repair re-ask.
json parse_structured(const std::string& reply, const std::string& schema_id);

/// Schema check on an already-extracted document.
json check(const json& doc, const std::string& schema_id);

} // namespace pvlog::schema
