#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "entail/chat.hpp"

namespace entail {

/// Content-addressed, append-only call cache persisted as a record log:
/// a versioned header line followed by one JSON record per completed call
/// {key, digest, texts, usage, ts}. The key hashes the full request
/// (messages and sampling params included), so a different temperature or
/// model never collides with an earlier call.
class CallCache {
public:
    /// In-memory only when path is empty.
    explicit CallCache(std::string path);

    static std::string request_key(const ChatExchange& exchange);
    static std::string request_digest(const ChatExchange& exchange);

    std::optional<LlmReply> lookup(const ChatExchange& exchange) const;
    void store(const ChatExchange& exchange, const LlmReply& reply);

    std::size_t size() const;

private:
    void load();
    void append_record(const std::string& key, const std::string& digest,
                       const LlmReply& reply);

    std::string path_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, std::string>, LlmReply> entries_;
};

/// Consults the cache before delegating; writes through on success.
/// Replayed replies come back byte-identical with `cached` set.
class CachingClient : public LlmClient {
public:
    CachingClient(LlmClient& inner, std::shared_ptr<CallCache> cache)
        : inner_(inner), cache_(std::move(cache)) {}

    LlmReply complete(const ChatExchange& exchange) override;

    /// Calls that reached the inner client (cache misses).
    int misses() const { return misses_; }

private:
    LlmClient& inner_;
    std::shared_ptr<CallCache> cache_;
    int misses_ = 0;
};

}  // namespace entail
