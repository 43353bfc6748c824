#include "narrbench/backend.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <fnmatch.h>

#include "narrbench/errors.hpp"
#include "narrbench/mock_backend.hpp"
#include "narrbench/text.hpp"

namespace narrbench {

using nlohmann::json;

std::string_view to_string(RoleTag r) {
    switch (r) {
        case RoleTag::NarrativeGen: return "NarrativeGen";
        case RoleTag::Solver: return "Solver";
        case RoleTag::BackTranslator: return "BackTranslator";
    }
    return "Solver";
}

std::optional<RoleTag> parse_role(std::string_view s) {
    for (auto r : {RoleTag::NarrativeGen, RoleTag::Solver, RoleTag::BackTranslator}) {
        if (s == to_string(r)) return r;
    }
    return std::nullopt;
}

double default_temperature(RoleTag role) {
    return role == RoleTag::NarrativeGen ? kNarrativeTemperature : kSolverTemperature;
}

GenerationRequest GenerationRequest::for_role(RoleTag role, std::string prompt, std::string tag) {
    GenerationRequest r;
    r.role = role;
    r.temperature = default_temperature(role);
    r.prompt = std::move(prompt);
    r.tag = std::move(tag);
    return r;
}

void GenerationRequest::validate() const {
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw DomainError("temperature must be in [0, 2], got " + std::to_string(temperature));
    if (max_tokens <= 0) throw DomainError("max_tokens must be > 0");
}

json to_json(const GenerationRequest& r) {
    json j{{"prompt", r.prompt},
           {"temperature", r.temperature},
           {"max_tokens", r.max_tokens},
           {"role", to_string(r.role)},
           {"tag", r.tag}};
    j["seed"] = r.seed ? json(*r.seed) : json();
    return j;
}

json to_json(const GenerationResponse& r) {
    return {{"text", r.text},
            {"token_count", r.token_count},
            {"backend_id", r.backend_id},
            {"latency_ms", r.latency_ms},
            {"truncated", r.truncated}};
}

GenerationResponse response_from_json(const json& j) {
    GenerationResponse r;
    r.text = j.at("text").get<std::string>();
    r.token_count = j.value("token_count", std::int64_t{0});
    r.backend_id = j.value("backend_id", std::string());
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.truncated = j.value("truncated", false);
    return r;
}

// ---------------------------------------------------------------------------

GenerationResponse Backend::generate(const GenerationRequest& request) {
    request.validate();
    Exchange exchange;
    exchange.request = request;
    auto deliver = [&] {
        std::lock_guard lock(sink_mutex_);
        if (sink_) sink_(exchange);
    };
    try {
        auto response = do_generate(request, exchange);
        exchange.response = response;
        deliver();
        return response;
    } catch (const std::exception& e) {
        exchange.error = e.what();
        deliver();
        throw;
    }
}

void Backend::set_sink(ExchangeSink sink) {
    std::lock_guard lock(sink_mutex_);
    sink_ = std::move(sink);
}

std::vector<SlotResult> generate_batch(Backend& backend, const std::vector<GenerationRequest>& requests,
                                       std::size_t max_in_flight) {
    if (max_in_flight < 1) throw DomainError("max_in_flight must be >= 1");
    std::vector<SlotResult> results(requests.size());
    if (requests.empty()) return results;

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= requests.size()) return;
            try {
                results[i].response = backend.generate(requests[i]);
            } catch (const std::exception& e) {
                results[i].error = e.what();
            }
        }
    };

    const auto workers = std::min(max_in_flight, requests.size());
    if (workers == 1) {
        worker();
        return results;
    }
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    return results;
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_minute)
    : rate_per_sec_(requests_per_minute / 60.0),
      capacity_(std::max(1.0, requests_per_minute / 60.0)),
      tokens_(capacity_),
      last_(Clock::now()) {}

RateLimiter::Clock::duration RateLimiter::try_acquire(Clock::time_point now) {
    if (rate_per_sec_ <= 0) return Clock::duration::zero();
    std::lock_guard lock(mutex_);
    if (now > last_) {
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_sec_);
        last_ = now;
    }
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return Clock::duration::zero();
    }
    const double wait_s = (1.0 - tokens_) / rate_per_sec_;
    return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(wait_s));
}

void RateLimiter::acquire() {
    for (;;) {
        const auto wait = try_acquire(Clock::now());
        if (wait == Clock::duration::zero()) return;
        std::this_thread::sleep_for(wait);
    }
}

std::chrono::milliseconds RetryPolicy::delay_for(int attempt) const {
    auto delay = base_delay;
    for (int i = 1; i < attempt && delay < max_delay; ++i) delay *= 2;
    return std::min(delay, max_delay);
}

// ---------------------------------------------------------------------------
// MockBackend
// ---------------------------------------------------------------------------

namespace {

MockBackend::Entry entry_from_json(const json& j) {
    MockBackend::Entry e;
    if (j.is_string()) {
        e.text = j.get<std::string>();
        return e;
    }
    if (!j.is_object()) throw ConfigError("mock script entry must be a string or object");
    e.text = j.value("text", std::string());
    e.delay_ms = j.value("delay_ms", 0);
    if (j.contains("error")) {
        e.error_status = j["error"].value("status", 500);
        e.error_body = j["error"].value("body", std::string("scripted failure"));
    }
    return e;
}

}  // namespace

MockBackend::MockBackend(json script, std::optional<std::string> backend_id) {
    if (!script.is_object()) throw ConfigError("mock script must be a JSON object");
    id_ = backend_id ? *backend_id : script.value("backend_id", std::string("mock"));
    if (script.contains("by_tag")) {
        for (const auto& [tag, e] : script["by_tag"].items()) by_tag_[tag] = entry_from_json(e);
    }
    if (script.contains("rules")) {
        for (const auto& r : script["rules"]) {
            rules_.emplace_back(r.at("match").get<std::string>(), entry_from_json(r.at("response")));
        }
    }
    if (script.contains("by_fingerprint")) {
        for (const auto& [fp, e] : script["by_fingerprint"].items()) by_fingerprint_[fp] = entry_from_json(e);
    }
    if (script.contains("sequence")) {
        for (const auto& [role_name, entries] : script["sequence"].items()) {
            const auto role = parse_role(role_name);
            if (!role) throw ConfigError("unknown role in mock sequence: " + role_name);
            auto& seq = sequence_[*role];
            for (const auto& e : entries) seq.push_back(entry_from_json(e));
        }
    }
}

std::unique_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path,
                                                    std::optional<std::string> backend_id) {
    std::ifstream in(path);
    if (!in) throw FileNotFound(path.string());
    json script;
    try {
        script = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid mock script " + path.string() + ": " + e.what());
    }
    return std::make_unique<MockBackend>(std::move(script), std::move(backend_id));
}

std::string MockBackend::fingerprint(std::string_view prompt) { return text::hex64(text::fnv1a64(prompt)); }

std::vector<MockBackend::Call> MockBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

std::size_t MockBackend::call_count() const {
    std::lock_guard lock(mutex_);
    return calls_.size();
}

const MockBackend::Entry* MockBackend::resolve(const GenerationRequest& request, const std::string& fingerprint) {
    if (!request.tag.empty()) {
        if (auto it = by_tag_.find(request.tag); it != by_tag_.end()) return &it->second;
        for (const auto& [pattern, entry] : rules_) {
            if (fnmatch(pattern.c_str(), request.tag.c_str(), 0) == 0) return &entry;
        }
    }
    if (auto it = by_fingerprint_.find(fingerprint); it != by_fingerprint_.end()) return &it->second;
    if (auto it = sequence_.find(request.role); it != sequence_.end()) {
        auto& next = next_in_sequence_[request.role];
        if (next < it->second.size()) return &it->second[next++];
    }
    return nullptr;
}

GenerationResponse MockBackend::do_generate(const GenerationRequest& request, Exchange& exchange) {
    const auto fp = fingerprint(request.prompt);
    const Entry* entry = nullptr;
    {
        std::lock_guard lock(mutex_);
        calls_.push_back({request.tag, request.role, fp});
        entry = resolve(request, fp);
    }
    exchange.raw_request = json{{"tag", request.tag}, {"role", to_string(request.role)}, {"fingerprint", fp}}.dump();

    struct InFlight {
        MockBackend& self;
        explicit InFlight(MockBackend& s) : self(s) {
            const int now = ++self.in_flight_;
            int prev = self.max_concurrency_.load();
            while (now > prev && !self.max_concurrency_.compare_exchange_weak(prev, now)) {
            }
        }
        ~InFlight() { --self.in_flight_; }
    } guard(*this);

    if (!entry) throw ProviderError(404, "mock script has no response for tag '" + request.tag + "'");
    if (entry->delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(entry->delay_ms));
    if (entry->error_status) {
        exchange.raw_response = entry->error_body;
        throw ProviderError(*entry->error_status, entry->error_body);
    }

    GenerationResponse r;
    r.text = entry->text;
    r.token_count = static_cast<std::int64_t>(text::count_whitespace_tokens(entry->text));
    r.backend_id = id_;
    r.latency_ms = 0;
    r.truncated = r.token_count >= request.max_tokens;
    exchange.raw_response = entry->text;
    return r;
}

}  // namespace narrbench
