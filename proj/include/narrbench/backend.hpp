#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace narrbench {

enum class RoleTag { NarrativeGen, Solver, BackTranslator };

std::string_view to_string(RoleTag r);
std::optional<RoleTag> parse_role(std::string_view s);

inline constexpr double kNarrativeTemperature = 1.0;
inline constexpr double kSolverTemperature = 0.2;
inline constexpr int kDefaultMaxTokens = 4096;

/// NarrativeGen 1.0, everything else 0.2.
double default_temperature(RoleTag role);

struct GenerationRequest {
    std::string prompt;
    double temperature = kSolverTemperature;
    int max_tokens = kDefaultMaxTokens;
    std::optional<std::int64_t> seed;
    RoleTag role = RoleTag::Solver;
    // Stable identifier of the call within a run ("p3/solve/NarrativeOnly/v2/s0").
    // Used for record keys, resume and mock routing; never sent to providers.
    std::string tag;

    static GenerationRequest for_role(RoleTag role, std::string prompt, std::string tag = {});

    /// Throws DomainError unless temperature is in [0, 2] and max_tokens > 0.
    void validate() const;
};

struct GenerationResponse {
    std::string text;
    std::int64_t token_count = 0;
    std::string backend_id;
    std::int64_t latency_ms = 0;
    bool truncated = false;
};

nlohmann::json to_json(const GenerationRequest& r);
nlohmann::json to_json(const GenerationResponse& r);
GenerationResponse response_from_json(const nlohmann::json& j);

/// One provider exchange as handed to the persistence sink.
struct Exchange {
    GenerationRequest request;
    std::optional<GenerationResponse> response;
    std::string error;           // empty on success
    std::string raw_request;     // wire body, verbatim
    std::string raw_response;    // wire body, verbatim (last attempt)
    int attempts = 1;
};

using ExchangeSink = std::function<void(const Exchange&)>;

/// Chat-completion backend. Implementations are safe to call concurrently.
class Backend {
public:
    virtual ~Backend() = default;

    virtual const std::string& id() const = 0;

    /// Exactly one response or an exception. The sink, when set, receives the
    /// exchange before this returns or throws.
    GenerationResponse generate(const GenerationRequest& request);

    void set_sink(ExchangeSink sink);

protected:
    /// Fills `exchange` as far as it got, then returns or throws.
    virtual GenerationResponse do_generate(const GenerationRequest& request, Exchange& exchange) = 0;

private:
    std::mutex sink_mutex_;
    ExchangeSink sink_;
};

/// Per-slot batch result: exactly one of response / error is set.
struct SlotResult {
    std::optional<GenerationResponse> response;
    std::string error;

    bool ok() const noexcept { return response.has_value(); }
};

/// Runs `requests` with at most `max_in_flight` outstanding calls. Results are
/// positionally aligned; a failing slot never aborts the batch.
std::vector<SlotResult> generate_batch(Backend& backend, const std::vector<GenerationRequest>& requests,
                                       std::size_t max_in_flight);

/// Token bucket pacing calls to `requests_per_minute` (0 = unlimited).
class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;

    explicit RateLimiter(double requests_per_minute);

    /// Blocks until a token is available.
    void acquire();

    /// Non-blocking form, returns the wait needed (zero when a token was taken).
    Clock::duration try_acquire(Clock::time_point now);

private:
    std::mutex mutex_;
    double rate_per_sec_;
    double capacity_;
    double tokens_;
    Clock::time_point last_;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds base_delay{1000};
    std::chrono::milliseconds max_delay{30000};

    /// Delay before retry number `attempt` (1-based): base * 2^(attempt-1), capped.
    std::chrono::milliseconds delay_for(int attempt) const;
};

}  // namespace narrbench
