#pragma once

// Client for chat-completion-style JSON-over-HTTP inference services. The
// request body is stable (golden-tested); failures map onto a small error
// hierarchy so the harness can distinguish retriable conditions from
// permanent ones.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "relooper/llm.hpp"

namespace relooper::remote {

struct RemoteConfig {
    std::string url;    // e.g. http://localhost:8080/v1/completions
    std::string model;  // model name passed through in the body
    std::string token;  // optional bearer token
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{100};
    std::chrono::seconds request_timeout{60};
    int max_in_flight = 4;
};

// Environment overrides; config-file values fill anything left empty.
inline RemoteConfig remote_config_from_env(RemoteConfig base = {}) {
    if (const char* v = std::getenv("RELOOPER_LLM_URL")) base.url = v;
    if (const char* v = std::getenv("RELOOPER_LLM_MODEL")) base.model = v;
    if (const char* v = std::getenv("RELOOPER_LLM_TOKEN")) base.token = v;
    return base;
}

class RemoteError : public std::runtime_error {
public:
    RemoteError(const std::string& what, bool retriable)
        : std::runtime_error(what), retriable_(retriable) {}
    bool retriable() const { return retriable_; }

private:
    bool retriable_;
};

// Connection refused, reset, DNS failure, request timeout.
class TransportError : public RemoteError {
public:
    explicit TransportError(const std::string& what) : RemoteError(what, /*retriable=*/true) {}
};

// Non-success HTTP status; 429 and 5xx are worth retrying, the rest are not.
class HttpStatusError : public RemoteError {
public:
    explicit HttpStatusError(int status)
        : RemoteError("http status " + std::to_string(status),
                      status == 429 || status >= 500),
          status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

// Body was not the JSON shape we asked for; retrying will not help.
class MalformedResponseError : public RemoteError {
public:
    explicit MalformedResponseError(const std::string& what) : RemoteError(what, /*retriable=*/false) {}
};

// The retry budget itself ran out while errors were still retriable.
class DeadlineExceededError : public RemoteError {
public:
    explicit DeadlineExceededError(const std::string& what) : RemoteError(what, /*retriable=*/false) {}
};

inline nlohmann::json build_request_body(const std::string& model, const std::string& prompt,
                                         const llm::DecodingParams& params) {
    return nlohmann::json{{"model", model},
                          {"prompt", prompt},
                          {"temperature", params.temperature},
                          {"max_tokens", params.max_new_tokens},
                          {"stop", params.stop_sequences}};
}

namespace detail_remote {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // /v1/... (at least "/")
};

inline SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw std::invalid_argument("remote url must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::string extract_completion_text(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedResponseError(std::string("response is not JSON: ") + e.what());
    }
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
        throw MalformedResponseError("response has no choices");
    const auto& choice = doc["choices"][0];
    if (choice.contains("text") && choice["text"].is_string())
        return choice["text"].get<std::string>();
    if (choice.contains("message") && choice["message"].is_object() &&
        choice["message"].contains("content") && choice["message"]["content"].is_string())
        return choice["message"]["content"].get<std::string>();
    throw MalformedResponseError("choice carries neither text nor message.content");
}

// Some servers echo the prompt ahead of the continuation; normalize that away
// here so the agent always sees a bare continuation.
inline std::string strip_echo(std::string text, const std::string& prompt) {
    if (!prompt.empty() && text.starts_with(prompt)) text.erase(0, prompt.size());
    return text;
}

}  // namespace detail_remote

class RemoteBackend : public llm::Backend {
public:
    explicit RemoteBackend(RemoteConfig config)
        : config_(std::move(config)),
          in_flight_(std::make_shared<std::counting_semaphore<>>(
              std::max(1, config_.max_in_flight))) {
        if (config_.url.empty()) throw std::invalid_argument("remote backend needs a url");
        if (config_.model.empty()) throw std::invalid_argument("remote backend needs a model name");
        if (config_.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
    }

    std::string complete(const std::string& prompt, const llm::DecodingParams& params) override {
        const auto [base, path] = detail_remote::split_url(config_.url);
        const std::string body = build_request_body(config_.model, prompt, params).dump();

        auto backoff = config_.initial_backoff;
        for (int attempt = 1;; ++attempt) {
            try {
                return request_once(base, path, body, prompt);
            } catch (const RemoteError& e) {
                if (!e.retriable()) throw;
                if (attempt >= config_.max_attempts)
                    throw DeadlineExceededError("gave up after " + std::to_string(attempt) +
                                                " attempts; last error: " + e.what());
                std::this_thread::sleep_for(backoff);
                backoff *= 2;
            }
        }
    }

    // Cursorless; sessions share the connection limit with the parent.
    std::unique_ptr<Backend> session() override { return nullptr; }

private:
    std::string request_once(const std::string& base, const std::string& path,
                             const std::string& body, const std::string& prompt) {
        in_flight_->acquire();
        struct Release {
            std::counting_semaphore<>* sem;
            ~Release() { sem->release(); }
        } release{in_flight_.get()};

        httplib::Client client(base);
        client.set_connection_timeout(config_.request_timeout);
        client.set_read_timeout(config_.request_timeout);
        httplib::Headers headers;
        if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

        auto res = client.Post(path, headers, body, "application/json");
        if (!res) throw TransportError(httplib::to_string(res.error()));
        if (res->status < 200 || res->status >= 300) throw HttpStatusError(res->status);
        return detail_remote::strip_echo(detail_remote::extract_completion_text(res->body), prompt);
    }

    RemoteConfig config_;
    std::shared_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace relooper::remote
