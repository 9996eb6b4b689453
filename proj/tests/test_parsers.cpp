#include <doctest.h>

#include <algorithm>
#include <cctype>

#include "prose/parsers.hpp"

using namespace prose;

namespace {

std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    return s;
}

std::string title(std::string s) {
    bool start = true;
    for (auto& c : s) {
        if (start && std::isalpha(static_cast<unsigned char>(c))) {
            c = std::toupper(static_cast<unsigned char>(c));
        }
        start = std::isspace(static_cast<unsigned char>(c));
    }
    return s;
}

}  // namespace

TEST_CASE("triple quoted extraction") {
    SUBCASE("single block") {
        auto e = parse_triple_quoted("preamble\n\"\"\"\nthe text\n\"\"\"\ntrailing");
        CHECK(e.text == "the text");
        CHECK_FALSE(e.used_fallback);
    }
    SUBCASE("last block wins") {
        auto e = parse_triple_quoted("\"\"\"first\"\"\" middle \"\"\"second\"\"\"");
        CHECK(e.text == "second");
    }
    SUBCASE("no block falls back to the whole response") {
        auto e = parse_triple_quoted("  just prose  ");
        CHECK(e.text == "just prose");
        CHECK(e.used_fallback);
    }
    SUBCASE("blank block is a parse error") {
        CHECK_THROWS_AS(parse_triple_quoted("\"\"\"   \"\"\""), ParseError);
    }
    SUBCASE("unterminated fence falls back") {
        auto e = parse_triple_quoted("\"\"\"never closed");
        CHECK(e.used_fallback);
    }
}

TEST_CASE("parse_verdict accepts every label in case and punctuation variants") {
    // Acceptance criterion: all 15 registered labels x case x punctuation.
    for (const auto* scale : LikertScale::all()) {
        for (const auto& opt : scale->options()) {
            std::vector<std::string> label_forms{opt.label, upper(opt.label), title(opt.label)};
            std::vector<std::string> suffixes{"", ".", "!", "...", "\"", ";"};
            std::vector<std::string> prefixes{"Verdict:", "verdict:", "VERDICT:", "  Verdict: ",
                                              "**Verdict:**"};
            for (const auto& form : label_forms) {
                for (const auto& suffix : suffixes) {
                    for (const auto& prefix : prefixes) {
                        std::string raw =
                            "Reasoning first.\n" + prefix + " " + form + suffix + "\n";
                        LikertVerdict v = parse_verdict(raw, *scale);
                        CHECK(v.score == opt.score);
                    }
                }
            }
        }
    }
}

TEST_CASE("parse_verdict takes the last verdict line") {
    auto v = parse_verdict("Verdict: somewhat exhibits\nVerdict: clearly exhibits",
                           LikertScale::ppcm());
    CHECK(v.score == 2);
}

TEST_CASE("parse_verdict rejects adversarial non-verdict fixtures") {
    const LikertScale& scale = LikertScale::ppcm();
    const std::vector<std::string> fixtures{
        "",
        "clearly exhibits",                       // label without the prefix
        "The verdict is clearly exhibits",        // prefix not at line start
        "Verdict clearly exhibits",               // missing colon
        "Verdict:",                               // empty remainder
        "Verdict: maybe",                         // unknown label
        "Verdict: clearly",                       // truncated label
        "Verdict: exhibits clearly",              // reordered words
        "Verdict: clearly  exhibits extra words",
        "Verdict: strongly confirms the preference",  // wrong scale's label
        "Verdict: 2",
        "Verdict: +2",
        "Verdict: clearly_exhibits",
        "Verdict: clearlyexhibits",
        "Score: clearly exhibits",
        "verdicts: clearly exhibits",
        "Verdict; clearly exhibits",
        "A long essay with no conclusion line at all.",
        "Verdict: neither exhibits",              // truncated middle label
        "Verdict: très clair",
    };
    CHECK(fixtures.size() == 20);
    for (const auto& raw : fixtures) {
        CHECK_THROWS_AS(parse_verdict(raw, scale), ParseError);
    }
}

TEST_CASE("preferences line parsing") {
    SUBCASE("bracketed JSON list") {
        auto out = parse_preferences_line("thinking...\nPreferences: [\"use emojis\", \"be terse\"]");
        REQUIRE(out.size() == 2);
        CHECK(out[0] == "use emojis");
        CHECK(out[1] == "be terse");
    }
    SUBCASE("free text becomes a single element") {
        auto out = parse_preferences_line("Preferences: write warmly and briefly");
        REQUIRE(out.size() == 1);
        CHECK(out[0] == "write warmly and briefly");
    }
    SUBCASE("last line wins over duplicates") {
        auto out = parse_preferences_line(
            "Preferences: [\"old\"]\nmore reasoning\nPreferences: [\"new\"]");
        REQUIRE(out.size() == 1);
        CHECK(out[0] == "new");
    }
    SUBCASE("code fences around the content are stripped") {
        auto out = parse_preferences_line("```\nPreferences: [\"fenced\"]\n```");
        REQUIRE(out.size() == 1);
        CHECK(out[0] == "fenced");
    }
    SUBCASE("malformed bracket content degrades to free text") {
        auto out = parse_preferences_line("Preferences: [unquoted, things]");
        REQUIRE(out.size() == 1);
        CHECK(out[0] == "[unquoted, things]");
    }
    SUBCASE("case-insensitive prefix") {
        auto out = parse_preferences_line("PREFERENCES: [\"caps\"]");
        CHECK(out[0] == "caps");
    }
    SUBCASE("missing line is a parse error") {
        CHECK_THROWS_AS(parse_preferences_line("no list here"), ParseError);
    }
    SUBCASE("non-string list element is a parse error") {
        CHECK_THROWS_AS(parse_preferences_line("Preferences: [1, 2]"), ParseError);
    }
}
