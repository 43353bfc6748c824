#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace narrbench {

// Base for every error the harness raises on purpose. Test-level failures in
// the sandbox and per-slot backend failures are values, not exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

// ---- dataset ----

class FileNotFound : public Error {
public:
    explicit FileNotFound(std::string path)
        : Error("file not found: " + path), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line, std::string reason)
        : Error("malformed record at line " + std::to_string(line) + ": " + reason),
          line_(line),
          reason_(std::move(reason)) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

class InsufficientPool : public Error {
public:
    InsufficientPool(std::size_t needed, std::size_t available)
        : Error("insufficient pool: needed " + std::to_string(needed) + ", available " +
                std::to_string(available)),
          needed_(needed),
          available_(available) {}
    std::size_t needed() const noexcept { return needed_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t needed_;
    std::size_t available_;
};

// ---- prompts ----

class StrategyNarrativeMismatch : public Error {
public:
    using Error::Error;
};

class InsufficientVariants : public Error {
public:
    InsufficientVariants(std::size_t needed, std::size_t available)
        : Error("insufficient variants: needed " + std::to_string(needed) + ", available " +
                std::to_string(available)),
          needed_(needed),
          available_(available) {}
    std::size_t needed() const noexcept { return needed_; }
    std::size_t available() const noexcept { return available_; }

private:
    std::size_t needed_;
    std::size_t available_;
};

// ---- backend ----

class ProviderError : public Error {
public:
    ProviderError(int status, std::string body)
        : Error("provider error (status " + std::to_string(status) + "): " + body),
          status_(status),
          body_(std::move(body)) {}
    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }
    // 429 and 5xx are retried; status 0 means the connection itself failed.
    bool transient() const noexcept { return status_ == 0 || status_ == 429 || status_ >= 500; }

private:
    int status_;
    std::string body_;
};

class RetriesExhausted : public Error {
public:
    RetriesExhausted(int attempts, const std::string& last_error)
        : Error("retries exhausted after " + std::to_string(attempts) +
                " attempts; last error: " + last_error),
          attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

class AuthMissing : public Error {
public:
    explicit AuthMissing(const std::string& env_var)
        : Error("credential environment variable not set: " + env_var) {}
};

// ---- sandbox ----

class InterpreterMissing : public Error {
public:
    explicit InterpreterMissing(const std::string& interpreter)
        : Error("interpreter not found: " + interpreter) {}
};

class SandboxSetupFailure : public Error {
public:
    using Error::Error;
};

// ---- metrics ----

class DomainError : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class NoCorrectSamples : public Error {
public:
    NoCorrectSamples() : Error("no correct samples") {}
};

class MissingBackTranslation : public Error {
public:
    explicit MissingBackTranslation(const std::string& sample)
        : Error("missing back-translation for sample " + sample) {}
};

// ---- astprobe ----

class ProbeError : public Error {
public:
    using Error::Error;
};

// ---- orchestrator ----

class MissingField : public Error {
public:
    MissingField(const std::string& analysis, const std::string& field)
        : Error("analysis " + analysis + " needs missing field: " + field),
          analysis_(analysis),
          field_(field) {}
    const std::string& analysis() const noexcept { return analysis_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::string analysis_;
    std::string field_;
};

}  // namespace narrbench
