#include "prose/parsers.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "prose/errors.hpp"

namespace prose {

using json = nlohmann::json;

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

// Strip trailing '.', '!', ',', ';', ':' and quotes after trimming.
std::string fold_punctuation(std::string s) {
    s = trim(s);
    while (!s.empty()) {
        char c = s.back();
        if (c == '.' || c == '!' || c == ',' || c == ';' || c == ':' || c == '"' || c == '\'' ||
            c == '*') {
            s.pop_back();
        } else {
            break;
        }
    }
    // Leading decoration ("**Verdict**" style emphasis around the label).
    size_t b = 0;
    while (b < s.size() && (s[b] == '"' || s[b] == '\'' || s[b] == '*')) ++b;
    return trim(s.substr(b));
}

std::vector<std::string> split_lines(const std::string& raw) {
    std::vector<std::string> lines;
    std::stringstream ss(raw);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

bool is_code_fence(const std::string& line) {
    return trim(line).rfind("```", 0) == 0;
}

// If the trimmed line starts with `prefix` (case-insensitive), returns the
// remainder.
std::optional<std::string> strip_prefix_ci(const std::string& line, const std::string& prefix) {
    std::string t = trim(line);
    if (t.size() < prefix.size()) return std::nullopt;
    if (lower(t.substr(0, prefix.size())) != lower(prefix)) return std::nullopt;
    return t.substr(prefix.size());
}

}  // namespace

Extraction parse_triple_quoted(const std::string& raw) {
    static const std::string fence = "\"\"\"";
    std::vector<std::string> blocks;
    size_t pos = 0;
    while (true) {
        size_t open = raw.find(fence, pos);
        if (open == std::string::npos) break;
        size_t close = raw.find(fence, open + fence.size());
        if (close == std::string::npos) break;
        blocks.push_back(raw.substr(open + fence.size(), close - open - fence.size()));
        pos = close + fence.size();
    }
    if (blocks.empty()) {
        return {trim(raw), true};
    }
    std::string content = trim(blocks.back());
    if (content.empty()) {
        throw ParseError("triple-quoted block is empty", raw);
    }
    return {content, false};
}

LikertVerdict parse_verdict(const std::string& raw, const LikertScale& scale) {
    std::optional<std::string> remainder;
    for (const auto& line : split_lines(raw)) {
        std::string candidate = trim(line);
        // Tolerate markdown emphasis around the prefix itself.
        while (!candidate.empty() && (candidate.front() == '*' || candidate.front() == '#')) {
            candidate.erase(candidate.begin());
        }
        if (auto rest = strip_prefix_ci(candidate, "verdict:")) {
            remainder = *rest;
        }
    }
    if (!remainder) {
        throw ParseError("no Verdict line in response", raw);
    }
    const std::string folded = lower(fold_punctuation(*remainder));
    for (const auto& opt : scale.options()) {
        if (folded == lower(opt.label)) return opt;
    }
    throw ParseError("verdict '" + *remainder + "' matches no label of scale " + scale.name(),
                     raw);
}

std::vector<std::string> parse_preferences_line(const std::string& raw) {
    std::optional<std::string> remainder;
    for (const auto& line : split_lines(raw)) {
        if (is_code_fence(line)) continue;
        if (auto rest = strip_prefix_ci(line, "preferences:")) {
            remainder = *rest;
        }
    }
    if (!remainder) {
        throw ParseError("no Preferences line in response", raw);
    }
    std::string body = trim(*remainder);
    if (!body.empty() && body.front() == '[') {
        try {
            json arr = json::parse(body);
            if (arr.is_array()) {
                std::vector<std::string> out;
                for (const auto& item : arr) {
                    if (!item.is_string()) throw ParseError("non-string element in list", raw);
                    out.push_back(trim(item.get<std::string>()));
                }
                return out;
            }
        } catch (const json::exception&) {
            // Not valid JSON; fall through to free-text handling.
        }
    }
    return {body};
}

}  // namespace prose
