#pragma once

#include <string>
#include <vector>

#include "prose/errors.hpp"

namespace prose {

enum class TaskKind { summarize, email };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

// One writing task: summarize an article or write an email from notes.
struct TaskInstance {
    TaskKind kind = TaskKind::summarize;
    std::string topic_id;
    std::string content;
    std::string user_id;

    void validate() const;
};

// The user's own completion of a task.
struct Demonstration {
    TaskInstance task;
    std::string text;

    void validate() const;
};

// One atomic imperative preference clause, e.g. "use emojis".
struct PreferenceComponent {
    std::string text;
    int origin_step = 0;

    bool operator==(const PreferenceComponent& other) const { return text == other.text; }
};

// The natural-language description conditioning generation. Empty text
// means no preferences have been inferred.
struct PreferenceDescription {
    std::string text;
    int step = 0;

    bool empty() const { return text.empty(); }
};

// Agent output conditioned on a preference description.
struct AgentGeneration {
    std::string text;
    PreferenceDescription conditioned_on;
    int step = 0;
};

// (task, demonstration, verified components) tuple kept in interaction memory.
struct MemoryRecord {
    TaskInstance task;
    Demonstration demonstration;
    std::vector<PreferenceComponent> components;
    long sequence_no = 0;
    // Hex SHA-256 of the task content; kept so reloaded records can be
    // audited without duplicating corpora.
    std::string content_digest;

    void validate() const;
};

// Utility: strip leading/trailing ASCII whitespace.
std::string trim(std::string_view s);
// Strip only trailing whitespace (used by the exact-match stop rule).
std::string trim_trailing(std::string_view s);

}  // namespace prose
