#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "prose/backend.hpp"
#include "prose/types.hpp"

namespace prose::testing {

inline std::filesystem::path source_dir() {
    return PROSE_SOURCE_DIR;
}

// Fresh directory under the system temp root, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path = std::filesystem::temp_directory_path() /
               (tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline TaskInstance sample_task(const std::string& topic = "news_articles",
                                TaskKind kind = TaskKind::summarize) {
    TaskInstance t;
    t.kind = kind;
    t.topic_id = topic;
    t.user_id = topic;
    t.content = "The harbor ferry schedule was extended through the winter months.";
    return t;
}

inline ChatRequest sample_request(const std::string& user = "hello",
                                  const std::string& system = "sys") {
    ChatRequest req;
    req.system = system;
    req.user = user;
    req.model_id = "test-model";
    req.temperature = 0.0;
    req.role = "test";
    return req;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace prose::testing
