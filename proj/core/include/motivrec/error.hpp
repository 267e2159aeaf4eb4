#pragma once

#include <stdexcept>
#include <string>

namespace motivrec {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

/// Filtering or splitting left nothing usable.
class EmptyDatasetError : public Error {
public:
    using Error::Error;
};

/// Retryable backend failure (network, 5xx, rate limit).
class TransportError : public Error {
public:
    explicit TransportError(const std::string& what, bool rate_limited = false)
        : Error(what), rate_limited_(rate_limited) {}

    bool rate_limited() const noexcept { return rate_limited_; }

private:
    bool rate_limited_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// A user produced no usable signal (no motives and no query) or every query failed.
class PlanError : public Error {
public:
    using Error::Error;
};

/// A pipeline stage ran before its upstream artifact existed.
class MissingArtifactError : public Error {
public:
    MissingArtifactError(const std::string& stage, const std::string& path)
        : Error("missing artifact " + path + " (run `" + stage + "` first)"), stage_(stage) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace motivrec
