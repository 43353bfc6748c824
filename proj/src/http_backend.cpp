#include "narrbench/http_backend.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "narrbench/errors.hpp"
#include "narrbench/mock_backend.hpp"
#include "narrbench/text.hpp"

namespace narrbench {

using nlohmann::json;

ProviderConfig provider_from_json(const json& j) {
    ProviderConfig c;
    c.backend_id = j.at("backend_id").get<std::string>();
    c.kind = j.value("kind", std::string("openai-chat"));
    c.base_url = j.value("base_url", std::string());
    c.model_name = j.value("model_name", std::string());
    c.credential_env_var = j.value("credential_env_var", std::string());
    c.requests_per_minute = j.value("requests_per_minute", 0.0);
    c.max_tokens = j.value("max_tokens", kDefaultMaxTokens);
    c.mock_script = j.value("mock_script", std::string());
    if (j.contains("retry")) {
        const auto& r = j["retry"];
        c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
        c.retry.base_delay = std::chrono::milliseconds(r.value("base_delay_ms", 1000));
        c.retry.max_delay = std::chrono::milliseconds(r.value("max_delay_ms", 30000));
    }
    if (c.kind != "mock" && c.base_url.empty())
        throw ConfigError("provider '" + c.backend_id + "' needs base_url");
    if (c.max_tokens <= 0) throw ConfigError("provider '" + c.backend_id + "' max_tokens must be > 0");
    if (c.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
    return c;
}

json to_json(const ProviderConfig& c) {
    return {{"backend_id", c.backend_id},
            {"kind", c.kind},
            {"base_url", c.base_url},
            {"model_name", c.model_name},
            {"credential_env_var", c.credential_env_var},
            {"requests_per_minute", c.requests_per_minute},
            {"max_tokens", c.max_tokens},
            {"mock_script", c.mock_script},
            {"retry",
             {{"max_attempts", c.retry.max_attempts},
              {"base_delay_ms", c.retry.base_delay.count()},
              {"max_delay_ms", c.retry.max_delay.count()}}}};
}

namespace {

// "https://host:port/v1" -> ("https://host:port", "/v1")
std::pair<std::string, std::string> split_base_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_start = url.find('/', host_start);
    if (path_start == std::string::npos) return {url, ""};
    std::string path = url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, path_start), path};
}

}  // namespace

HttpChatBackend::HttpChatBackend(ProviderConfig config)
    : config_(std::move(config)),
      limiter_(config_.requests_per_minute),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {}

json HttpChatBackend::request_body(const GenerationRequest& request) const {
    json body{{"model", config_.model_name},
              {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
              {"temperature", request.temperature},
              {"max_tokens", request.max_tokens}};
    if (request.seed) body["seed"] = *request.seed;
    return body;
}

GenerationResponse HttpChatBackend::do_generate(const GenerationRequest& request, Exchange& exchange) {
    std::string credential;
    if (!config_.credential_env_var.empty()) {
        const char* value = std::getenv(config_.credential_env_var.c_str());
        if (!value || !*value) throw AuthMissing(config_.credential_env_var);
        credential = value;
    }

    const auto body = request_body(request).dump();
    exchange.raw_request = body;
    const auto [host, prefix] = split_base_url(config_.base_url);

    httplib::Client client(host);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(600, 0);
    httplib::Headers headers;
    if (!credential.empty()) headers.emplace("Authorization", "Bearer " + credential);

    std::string last_error;
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
        exchange.attempts = attempt;
        if (attempt > 1) sleeper_(config_.retry.delay_for(attempt - 1));
        limiter_.acquire();

        const auto started = std::chrono::steady_clock::now();
        auto res = client.Post(prefix + "/chat/completions", headers, body, "application/json");
        const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - started)
                                 .count();

        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            exchange.raw_response.clear();
            continue;
        }
        exchange.raw_response = res->body;
        if (res->status >= 200 && res->status < 300) {
            json parsed;
            try {
                parsed = json::parse(res->body);
            } catch (const json::parse_error&) {
                throw ProviderError(res->status, "response body is not JSON");
            }
            if (!parsed.contains("choices") || parsed["choices"].empty())
                throw ProviderError(res->status, "response has no choices");
            const auto& choice = parsed["choices"][0];
            GenerationResponse out;
            const auto& content = choice["message"]["content"];
            out.text = content.is_string() ? content.get<std::string>() : std::string();
            out.backend_id = config_.backend_id;
            out.latency_ms = latency;
            if (parsed.contains("usage") && parsed["usage"].contains("completion_tokens"))
                out.token_count = parsed["usage"]["completion_tokens"].get<std::int64_t>();
            else
                out.token_count = static_cast<std::int64_t>(text::count_whitespace_tokens(out.text));
            out.truncated = choice.value("finish_reason", std::string()) == "length";
            // A length stop means the provider hit the request bound.
            if (out.truncated) out.token_count = std::max<std::int64_t>(out.token_count, request.max_tokens);
            return out;
        }
        ProviderError err(res->status, res->body);
        if (!err.transient()) throw err;
        last_error = err.what();
    }
    throw RetriesExhausted(config_.retry.max_attempts, last_error);
}

std::unique_ptr<Backend> make_backend(const ProviderConfig& config) {
    if (config.kind == "mock") {
        if (config.mock_script.empty()) throw ConfigError("mock provider '" + config.backend_id + "' needs mock_script");
        return MockBackend::from_file(config.mock_script, config.backend_id);
    }
    return std::make_unique<HttpChatBackend>(config);
}

}  // namespace narrbench
