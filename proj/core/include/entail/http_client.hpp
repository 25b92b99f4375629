#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <string>

#include "entail/chat.hpp"

namespace entail {

/// Token-bucket rate limiter shared across concurrent callers.
class TokenBucket {
public:
    TokenBucket(double per_second, double burst)
        : per_second_(per_second), burst_(burst), tokens_(burst) {}

    /// Blocks until a token is available.
    void acquire();

private:
    double per_second_;
    double burst_;
    double tokens_;
    std::chrono::steady_clock::time_point last_ =
        std::chrono::steady_clock::now();
    std::mutex mutex_;
};

struct HttpClientOptions {
    std::string endpoint;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string api_key;
    int max_retries = 3;
    std::chrono::milliseconds base_backoff{250};
    std::chrono::milliseconds timeout{60000};
};

/// Chat-completion client for the common JSON wire shape (messages in,
/// choices out), covering hosted APIs and local servers alike. Transient
/// failures and 5xx/429 responses are retried with exponential backoff;
/// providers that return fewer choices than requested are topped up with
/// sequential single-sample calls.
class HttpChatClient : public LlmClient {
public:
    explicit HttpChatClient(HttpClientOptions options,
                            TokenBucket* bucket = nullptr);

    LlmReply complete(const ChatExchange& exchange) override;

private:
    LlmReply complete_once(const ChatExchange& exchange);

    HttpClientOptions options_;
    TokenBucket* bucket_;
};

}  // namespace entail
