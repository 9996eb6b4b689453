#include "prose/types.hpp"

#include <cctype>

namespace prose {

std::string to_string(TaskKind kind) {
    return kind == TaskKind::summarize ? "summarize" : "email";
}

TaskKind task_kind_from_string(const std::string& s) {
    if (s == "summarize") return TaskKind::summarize;
    if (s == "email") return TaskKind::email;
    throw ValidationError("unknown task kind: " + s);
}

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string trim_trailing(std::string_view s) {
    size_t e = s.size();
    while (e > 0 && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(0, e));
}

void TaskInstance::validate() const {
    if (content.empty()) throw ValidationError("task content is empty");
    if (topic_id.empty()) throw ValidationError("task topic_id is empty");
}

void Demonstration::validate() const {
    task.validate();
    if (trim(text).empty()) throw ValidationError("demonstration text is empty");
}

void MemoryRecord::validate() const {
    task.validate();
    demonstration.validate();
    for (size_t i = 0; i < components.size(); ++i) {
        if (components[i].text.empty())
            throw ValidationError("preference component text is empty");
        for (size_t j = i + 1; j < components.size(); ++j) {
            if (components[i].text == components[j].text)
                throw ValidationError("duplicate preference component: " + components[i].text);
        }
    }
}

}  // namespace prose
