#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "prose/types.hpp"

namespace prose {

// Per-(user, seed) store of observed demonstrations and their verified
// preference components. Single writer per episode; reads are safe to share.
//
// When a persistence path is configured every insert is appended to a
// JSON-lines file, one record per line. Note the file carries a digest of
// the task content, not the content itself.
class InteractionMemory {
public:
    InteractionMemory() = default;
    explicit InteractionMemory(std::filesystem::path persist_path);

    // Reload a previously persisted store; insertion numbering continues
    // from the highest sequence_no on disk.
    static InteractionMemory load(const std::filesystem::path& path);

    // Appends the record with the next sequence_no and persists it if a
    // path is configured. Returns the assigned sequence_no.
    long insert(MemoryRecord record);

    // The min(k, available) most recent records matching the task's
    // (kind, topic_id, user_id), ordered oldest-first.
    std::vector<MemoryRecord> retrieve_relevant(const TaskInstance& task, int k) const;

    const std::vector<MemoryRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }

private:
    std::vector<MemoryRecord> records_;
    std::optional<std::filesystem::path> persist_path_;
};

}  // namespace prose
