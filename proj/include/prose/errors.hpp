#pragma once

#include <stdexcept>
#include <string>

namespace prose {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid domain object (empty content, bad topic id, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Reading or writing persisted state failed.
struct StorageError : Error {
    using Error::Error;
};

// Transport-level or terminal backend failure.
struct BackendError : Error {
    using Error::Error;
};

// A scripted backend received a request it has no answer for.
struct UnscriptedRequestError : BackendError {
    UnscriptedRequestError(const std::string& digest, const std::string& user_prompt)
        : BackendError("unscripted request, digest=" + digest),
          digest(digest),
          user_prompt(user_prompt) {}
    std::string digest;
    std::string user_prompt;
};

// A replay-cache entry could not be decoded.
struct CacheCorruptionError : BackendError {
    using BackendError::BackendError;
};

// A model response could not be parsed into the expected shape.
struct ParseError : Error {
    ParseError(const std::string& what, std::string raw = {})
        : Error(what), raw(std::move(raw)) {}
    std::string raw;
};

// Template rendering failed (missing placeholder, unknown template).
struct RenderError : Error {
    using Error::Error;
};

// Bad run configuration; message carries the field path.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace prose
