#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "helpers.hpp"
#include "relooper/remote.hpp"

using namespace relooper;
using namespace relooper::remote;

namespace {

// Stub inference server bound to an ephemeral loopback port.
class StubServer {
public:
    explicit StubServer(httplib::Server::Handler handler) {
        server_.Post("/v1/completions", std::move(handler));
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~StubServer() {
        server_.stop();
        thread_.join();
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/completions"; }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

RemoteConfig quick_config(const std::string& url) {
    RemoteConfig config;
    config.url = url;
    config.model = "stub-model";
    config.max_attempts = 2;
    config.initial_backoff = std::chrono::milliseconds(1);
    config.request_timeout = std::chrono::seconds(5);
    return config;
}

}  // namespace

TEST_CASE("request bodies carry model, prompt, and decoding controls") {
    llm::DecodingParams params;
    params.temperature = 0.0;
    params.max_new_tokens = 128;
    params.stop_sequences = {"\n"};
    const nlohmann::json body = build_request_body("m", "PROMPT\n> ", params);
    CHECK(body == nlohmann::json{{"model", "m"},
                                 {"prompt", "PROMPT\n> "},
                                 {"temperature", 0.0},
                                 {"max_tokens", 128},
                                 {"stop", {"\n"}}});
    // No-stop requests serialize an empty array, not null.
    params.stop_sequences.clear();
    CHECK(build_request_body("m", "p", params)["stop"] == nlohmann::json::array());
}

TEST_CASE("split_url separates the origin from the path") {
    auto [base, path] = detail_remote::split_url("http://localhost:8080/v1/completions");
    CHECK(base == "http://localhost:8080");
    CHECK(path == "/v1/completions");

    auto bare = detail_remote::split_url("https://api.example.com");
    CHECK(bare.base == "https://api.example.com");
    CHECK(bare.path == "/");

    CHECK_THROWS_AS(detail_remote::split_url("localhost:8080/v1"), std::invalid_argument);
}

TEST_CASE("responses may use the completion or the chat shape") {
    CHECK(detail_remote::extract_completion_text(R"({"choices": [{"text": "go north"}]})") ==
          "go north");
    CHECK(detail_remote::extract_completion_text(
              R"({"choices": [{"message": {"content": "go south"}}]})") == "go south");
    CHECK_THROWS_AS(detail_remote::extract_completion_text("not json"), MalformedResponseError);
    CHECK_THROWS_AS(detail_remote::extract_completion_text(R"({"choices": []})"),
                    MalformedResponseError);
    CHECK_THROWS_AS(detail_remote::extract_completion_text(R"({"choices": [{"index": 0}]})"),
                    MalformedResponseError);
}

TEST_CASE("strip_echo removes a leading copy of the prompt") {
    CHECK(detail_remote::strip_echo("PROMPT> next", "PROMPT> ") == "next");
    CHECK(detail_remote::strip_echo("unrelated", "PROMPT> ") == "unrelated");
    CHECK(detail_remote::strip_echo("text", "") == "text");
}

TEST_CASE("error taxonomy separates retriable from fatal") {
    CHECK(TransportError("refused").retriable());
    CHECK(HttpStatusError(429).retriable());
    CHECK(HttpStatusError(500).retriable());
    CHECK(HttpStatusError(503).retriable());
    CHECK_FALSE(HttpStatusError(400).retriable());
    CHECK_FALSE(HttpStatusError(404).retriable());
    CHECK_FALSE(MalformedResponseError("junk").retriable());
    CHECK_FALSE(DeadlineExceededError("late").retriable());
    CHECK(HttpStatusError(503).status() == 503);
}

TEST_CASE("environment variables override the configured endpoint") {
    RemoteConfig base;
    base.url = "http://file.example/v1";
    base.model = "file-model";
    setenv("RELOOPER_LLM_URL", "http://env.example/v1", 1);
    setenv("RELOOPER_LLM_MODEL", "env-model", 1);
    setenv("RELOOPER_LLM_TOKEN", "env-token", 1);
    const RemoteConfig merged = remote_config_from_env(base);
    unsetenv("RELOOPER_LLM_URL");
    unsetenv("RELOOPER_LLM_MODEL");
    unsetenv("RELOOPER_LLM_TOKEN");
    CHECK(merged.url == "http://env.example/v1");
    CHECK(merged.model == "env-model");
    CHECK(merged.token == "env-token");
    CHECK(remote_config_from_env(base).url == "http://file.example/v1");
}

TEST_CASE("backend construction validates its configuration") {
    CHECK_THROWS_AS(RemoteBackend(RemoteConfig{}), std::invalid_argument);
    RemoteConfig no_model;
    no_model.url = "http://localhost/v1";
    CHECK_THROWS_AS(RemoteBackend(no_model), std::invalid_argument);
    RemoteConfig bad_attempts = quick_config("http://localhost/v1");
    bad_attempts.max_attempts = 0;
    CHECK_THROWS_AS(RemoteBackend(bad_attempts), std::invalid_argument);
}

TEST_CASE("a greedy request round-trips against the stub server") {
    std::string seen_body;
    std::string seen_auth;
    StubServer server([&](const httplib::Request& req, httplib::Response& res) {
        seen_body = req.body;
        if (req.has_header("Authorization")) seen_auth = req.get_header_value("Authorization");
        res.set_content(R"({"choices": [{"text": "go to shelf 1"}]})", "application/json");
    });

    RemoteConfig config = quick_config(server.url());
    config.token = "sesame";
    RemoteBackend backend(config);
    llm::DecodingParams params;
    params.stop_sequences = {"\n"};
    CHECK(backend.complete("PROMPT\n> ", params) == "go to shelf 1");
    CHECK(seen_auth == "Bearer sesame");
    CHECK(nlohmann::json::parse(seen_body) ==
          build_request_body("stub-model", "PROMPT\n> ", params));
    CHECK(backend.session() == nullptr);
}

TEST_CASE("echoing servers are tolerated") {
    StubServer server([](const httplib::Request& req, httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json reply;
        reply["choices"][0]["text"] =
            body.at("prompt").get<std::string>() + "take mug 1 from shelf 1";
        res.set_content(reply.dump(), "application/json");
    });
    RemoteBackend backend(quick_config(server.url()));
    CHECK(backend.complete("PROMPT\n> ", llm::DecodingParams{}) == "take mug 1 from shelf 1");
}

TEST_CASE("retriable statuses are retried until the budget runs out") {
    std::atomic<int> hits{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 503;
    });
    RemoteConfig config = quick_config(server.url());
    config.max_attempts = 3;
    RemoteBackend backend(config);
    CHECK_THROWS_WITH(backend.complete("p", llm::DecodingParams{}),
                      Catch::Matchers::ContainsSubstring("gave up after 3 attempts"));
    CHECK(hits == 3);
}

TEST_CASE("a retriable failure can still recover within the budget") {
    std::atomic<int> hits{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        if (++hits == 1) {
            res.status = 500;
            return;
        }
        res.set_content(R"({"choices": [{"text": "ok"}]})", "application/json");
    });
    RemoteBackend backend(quick_config(server.url()));
    CHECK(backend.complete("p", llm::DecodingParams{}) == "ok");
    CHECK(hits == 2);
}

TEST_CASE("client errors fail immediately without retries") {
    std::atomic<int> hits{0};
    StubServer server([&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 400;
    });
    RemoteBackend backend(quick_config(server.url()));
    CHECK_THROWS_AS(backend.complete("p", llm::DecodingParams{}), HttpStatusError);
    CHECK(hits == 1);
}

TEST_CASE("malformed payloads fail immediately") {
    StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content("surprise!", "text/plain");
    });
    RemoteBackend backend(quick_config(server.url()));
    CHECK_THROWS_AS(backend.complete("p", llm::DecodingParams{}), MalformedResponseError);
}

TEST_CASE("a dead endpoint exhausts transport retries") {
    // Port 9 (discard) on loopback: nothing listens there in this sandbox.
    RemoteConfig config = quick_config("http://127.0.0.1:9/v1/completions");
    config.request_timeout = std::chrono::seconds(1);
    RemoteBackend backend(config);
    CHECK_THROWS_AS(backend.complete("p", llm::DecodingParams{}), DeadlineExceededError);
}
