#include "prose/memory.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "prose/sha256.hpp"

namespace prose {

using json = nlohmann::json;

namespace {

json record_to_json(const MemoryRecord& r) {
    json comps = json::array();
    for (const auto& c : r.components) comps.push_back(c.text);
    return json{{"sequence_no", r.sequence_no},
                {"task_kind", to_string(r.task.kind)},
                {"topic_id", r.task.topic_id},
                {"user_id", r.task.user_id},
                {"content_digest", r.content_digest},
                {"demonstration_text", r.demonstration.text},
                {"components", comps}};
}

MemoryRecord record_from_json(const json& j) {
    MemoryRecord r;
    r.sequence_no = j.at("sequence_no").get<long>();
    r.task.kind = task_kind_from_string(j.at("task_kind").get<std::string>());
    r.task.topic_id = j.at("topic_id").get<std::string>();
    r.task.user_id = j.at("user_id").get<std::string>();
    r.content_digest = j.at("content_digest").get<std::string>();
    r.demonstration.text = j.at("demonstration_text").get<std::string>();
    r.demonstration.task = r.task;
    int step = 0;
    for (const auto& c : j.at("components")) {
        r.components.push_back({c.get<std::string>(), step});
    }
    return r;
}

}  // namespace

InteractionMemory::InteractionMemory(std::filesystem::path persist_path)
    : persist_path_(std::move(persist_path)) {}

InteractionMemory InteractionMemory::load(const std::filesystem::path& path) {
    InteractionMemory mem(path);
    std::ifstream in(path);
    if (!in) {
        // A not-yet-created file is an empty store, not an error.
        return mem;
    }
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            mem.records_.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw StorageError("corrupt memory file " + path.string() + " line " +
                               std::to_string(lineno) + ": " + e.what());
        }
    }
    return mem;
}

long InteractionMemory::insert(MemoryRecord record) {
    record.validate();
    long next = records_.empty() ? 1 : records_.back().sequence_no + 1;
    record.sequence_no = next;
    if (record.content_digest.empty()) {
        record.content_digest = sha256_hex(record.task.content);
    }
    if (persist_path_) {
        std::ofstream out(*persist_path_, std::ios::app);
        if (!out) throw StorageError("cannot open memory file " + persist_path_->string());
        out << record_to_json(record).dump() << "\n";
        if (!out) throw StorageError("write failed on " + persist_path_->string());
    }
    records_.push_back(std::move(record));
    return next;
}

std::vector<MemoryRecord> InteractionMemory::retrieve_relevant(const TaskInstance& task,
                                                               int k) const {
    std::vector<MemoryRecord> matching;
    for (const auto& r : records_) {
        if (r.task.kind == task.kind && r.task.topic_id == task.topic_id &&
            r.task.user_id == task.user_id) {
            matching.push_back(r);
        }
    }
    if (k < 0) k = 0;
    if (matching.size() > static_cast<size_t>(k)) {
        // Most recent k, oldest-first.
        matching.erase(matching.begin(), matching.end() - k);
    }
    return matching;
}

}  // namespace prose
