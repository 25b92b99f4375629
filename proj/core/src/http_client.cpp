#include "entail/http_client.hpp"

#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace entail {

void TokenBucket::acquire() {
    std::unique_lock lock(mutex_);
    while (true) {
        auto now = std::chrono::steady_clock::now();
        tokens_ = std::min(
            burst_, tokens_ + per_second_ *
                                  std::chrono::duration<double>(now - last_)
                                      .count());
        last_ = now;
        if (tokens_ >= 1.0) {
            tokens_ -= 1.0;
            return;
        }
        double wait_s = (1.0 - tokens_) / per_second_;
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
        lock.lock();
    }
}

HttpChatClient::HttpChatClient(HttpClientOptions options, TokenBucket* bucket)
    : options_(std::move(options)), bucket_(bucket) {}

namespace {

nlohmann::json request_body(const ChatExchange& x, int n) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : x.messages) {
        messages.push_back(
            {{"role", std::string(role_name(m.role))}, {"content", m.content}});
    }
    return {{"model", x.params.model},
            {"messages", std::move(messages)},
            {"temperature", x.params.temperature},
            {"max_tokens", x.params.max_tokens},
            {"n", n}};
}

}  // namespace

LlmReply HttpChatClient::complete_once(const ChatExchange& exchange) {
    httplib::Client http(options_.endpoint);
    http.set_connection_timeout(options_.timeout);
    http.set_read_timeout(options_.timeout);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + options_.api_key);
    }

    int attempts = options_.max_retries + 1;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(options_.base_backoff * (1 << (attempt - 1)));
        }
        if (bucket_) bucket_->acquire();
        auto res = http.Post(
            options_.path, headers,
            request_body(exchange, exchange.params.n_samples).dump(),
            "application/json");
        if (!res) continue;  // transport failure, retry
        if (res->status == 429 || res->status >= 500) {
            if (attempt + 1 == attempts && res->status == 429) {
                throw LlmError(LlmError::Code::RateLimited,
                               "rate limited after retries");
            }
            continue;
        }
        if (res->status != 200) {
            throw LlmError(LlmError::Code::BadResponse,
                           "http " + std::to_string(res->status) + ": " +
                               res->body.substr(0, 200));
        }
        nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") ||
            !j["choices"].is_array() || j["choices"].empty()) {
            throw LlmError(LlmError::Code::BadResponse,
                           "malformed completion payload");
        }
        LlmReply reply;
        for (const auto& choice : j["choices"]) {
            if (!choice.contains("message") ||
                !choice["message"].contains("content")) {
                throw LlmError(LlmError::Code::BadResponse,
                               "choice without message content");
            }
            reply.texts.push_back(choice["message"]["content"]);
        }
        if (j.contains("usage")) {
            reply.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
            reply.usage.completion_tokens =
                j["usage"].value("completion_tokens", 0L);
        }
        return reply;
    }
    throw LlmError(LlmError::Code::Transport,
                   "no response from " + options_.endpoint + " after " +
                       std::to_string(attempts) + " attempts");
}

LlmReply HttpChatClient::complete(const ChatExchange& exchange) {
    LlmReply reply = complete_once(exchange);
    // Some servers ignore n; top the reply up one sample at a time.
    while (static_cast<int>(reply.texts.size()) < exchange.params.n_samples) {
        ChatExchange one = exchange;
        one.params.n_samples = 1;
        LlmReply extra = complete_once(one);
        if (extra.texts.empty()) break;
        reply.texts.push_back(extra.texts.front());
        reply.usage.prompt_tokens += extra.usage.prompt_tokens;
        reply.usage.completion_tokens += extra.usage.completion_tokens;
    }
    return reply;
}

}  // namespace entail
