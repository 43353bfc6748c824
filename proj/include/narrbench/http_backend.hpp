#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "narrbench/backend.hpp"

namespace narrbench {

// Provider config file entry.
struct ProviderConfig {
    std::string backend_id;
    std::string base_url;            // e.g. "https://api.openai.com/v1"
    std::string model_name;
    std::string credential_env_var;  // empty: no Authorization header
    double requests_per_minute = 0;  // 0 = unpaced
    int max_tokens = kDefaultMaxTokens;
    // "mock" routes to MockBackend with `mock_script`; anything else is HTTP.
    std::string kind = "openai-chat";
    std::string mock_script;
    RetryPolicy retry;
};

ProviderConfig provider_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProviderConfig& c);

/// OpenAI-style /chat/completions client.
///
/// Credentials are read from the configured environment variable at call
/// time; a missing variable raises AuthMissing before any network traffic.
/// 429, 5xx and connection failures are retried with exponential backoff up
/// to retry.max_attempts; any other non-2xx status fails immediately.
class HttpChatBackend final : public Backend {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    explicit HttpChatBackend(ProviderConfig config);

    const std::string& id() const override { return config_.backend_id; }
    const ProviderConfig& config() const noexcept { return config_; }

    /// Replaces the backoff sleep (tests).
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

    /// Request body for the wire; exposed for tests.
    nlohmann::json request_body(const GenerationRequest& request) const;

protected:
    GenerationResponse do_generate(const GenerationRequest& request, Exchange& exchange) override;

private:
    ProviderConfig config_;
    RateLimiter limiter_;
    Sleeper sleeper_;
};

/// Builds the backend a provider config names.
std::unique_ptr<Backend> make_backend(const ProviderConfig& config);

}  // namespace narrbench
