#pragma once

#include <string>
#include <vector>

#include "prose/prompts.hpp"

namespace prose {

struct Extraction {
    std::string text;
    // True when no triple-quoted block was found and the whole response
    // was used instead; episode logs flag such exchanges.
    bool used_fallback = false;
};

// Content of the last well-formed """...""" block, trimmed. Without any
// block the whole response (trimmed) is returned with used_fallback set.
// A present-but-blank block is a ParseError.
Extraction parse_triple_quoted(const std::string& raw);

// Last line starting (case-insensitive, whitespace-tolerant) with
// "Verdict:"; the remainder is matched against the scale's labels
// case-insensitively, tolerating trailing punctuation.
LikertVerdict parse_verdict(const std::string& raw, const LikertScale& scale);

// Last line starting with "Preferences:". A bracketed JSON list of strings
// yields its elements in order; anything else is returned whole as a
// single-element list. Code-fence lines around the content are stripped.
std::vector<std::string> parse_preferences_line(const std::string& raw);

}  // namespace prose
