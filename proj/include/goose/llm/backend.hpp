#pragma once

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace goose::llm {

struct ChatMessage {
    std::string role;
    std::string content;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const std::vector<ChatMessage>& messages) = 0;
    virtual std::string name() const = 0;
    // True when replies depend on request order, which forces one request at a time.
    virtual bool order_sensitive() const { return false; }
};

// Replays scripted replies in order. Blocks in the script file are separated
// by lines consisting of "---".
class MockBackend : public ChatBackend {
public:
    explicit MockBackend(std::vector<std::string> replies) : replies_(std::move(replies)) {}
    MockBackend(MockBackend&& other) noexcept
        : replies_(std::move(other.replies_)), next_(other.next_), requests_(std::move(other.requests_)) {}

    static MockBackend from_script(const std::string& text) {
        std::vector<std::string> blocks(1);
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line == "---") {
                blocks.emplace_back();
                continue;
            }
            blocks.back() += line + '\n';
        }
        std::vector<std::string> replies;
        for (auto& b : blocks) {
            if (b.find_first_not_of(" \t\n") != std::string::npos) replies.push_back(std::move(b));
        }
        return MockBackend(std::move(replies));
    }

    static MockBackend from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open mock script " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return from_script(ss.str());
    }

    std::string complete(const std::vector<ChatMessage>& messages) override {
        std::lock_guard lock(mu_);
        requests_.push_back(messages);
        if (next_ >= replies_.size()) throw TransportError("mock script exhausted");
        return replies_[next_++];
    }

    std::string name() const override { return "mock"; }
    bool order_sensitive() const override { return true; }

    std::vector<std::vector<ChatMessage>> requests() const {
        std::lock_guard lock(mu_);
        return requests_;
    }

private:
    std::vector<std::string> replies_;
    std::size_t next_ = 0;
    std::vector<std::vector<ChatMessage>> requests_;
    mutable std::mutex mu_;
};

struct HttpBackendConfig {
    std::string base_url = "http://127.0.0.1:8080";
    std::string path = "/v1/chat/completions";
    std::string model = "default";
    std::string token_env = "GOOSE_LLM_TOKEN";
    int timeout_seconds = 60;
    double temperature = 0.0;
};

// OpenAI-style chat-completions client.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {}

    std::string complete(const std::vector<ChatMessage>& messages) override {
        nlohmann::json body = {{"model", cfg_.model}, {"temperature", cfg_.temperature}};
        for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

        httplib::Client client(cfg_.base_url);
        client.set_connection_timeout(cfg_.timeout_seconds);
        client.set_read_timeout(cfg_.timeout_seconds);
        httplib::Headers headers;
        if (const char* token = std::getenv(cfg_.token_env.c_str()); token && *token)
            headers.emplace("Authorization", std::string("Bearer ") + token);

        auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
        if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
        if (res->status != 200) throw TransportError("HTTP status " + std::to_string(res->status));
        try {
            const auto j = nlohmann::json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw TransportError(std::string("unexpected response body: ") + e.what());
        }
    }

    std::string name() const override { return "http:" + cfg_.model; }

private:
    HttpBackendConfig cfg_;
};

}  // namespace goose::llm
