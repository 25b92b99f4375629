#include "entail/cache.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "entail/util.hpp"

namespace entail {

namespace {

constexpr std::string_view kFormat = "entail-llm-cache";
constexpr int kVersion = 1;

std::string canonical_request(const ChatExchange& x) {
    nlohmann::json j;
    j["model"] = x.params.model;
    j["temperature"] = x.params.temperature;
    j["max_tokens"] = x.params.max_tokens;
    j["n"] = x.params.n_samples;
    j["messages"] = nlohmann::json::array();
    for (const auto& m : x.messages) {
        j["messages"].push_back(
            {{"role", std::string(role_name(m.role))}, {"content", m.content}});
    }
    return j.dump();
}

}  // namespace

CallCache::CallCache(std::string path) : path_(std::move(path)) { load(); }

std::string CallCache::request_key(const ChatExchange& exchange) {
    return hex64(fnv1a(canonical_request(exchange)));
}

std::string CallCache::request_digest(const ChatExchange& exchange) {
    // Second hash with a shifted seed; a key collision alone cannot replay
    // the wrong record.
    return hex64(fnv1a(canonical_request(exchange), kFnvOffset ^ 0x9e3779b9));
}

void CallCache::load() {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) continue;
        if (first) {
            first = false;
            if (j.contains("format")) continue;  // header line
        }
        if (!j.contains("key") || !j.contains("texts")) continue;
        LlmReply reply;
        reply.cached = true;
        for (const auto& t : j["texts"]) reply.texts.push_back(t);
        if (j.contains("usage")) {
            reply.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0L);
            reply.usage.completion_tokens =
                j["usage"].value("completion_tokens", 0L);
        }
        entries_[{j["key"], j.value("digest", "")}] = std::move(reply);
    }
}

std::optional<LlmReply> CallCache::lookup(const ChatExchange& exchange) const {
    std::lock_guard lock(mutex_);
    auto it =
        entries_.find({request_key(exchange), request_digest(exchange)});
    if (it == entries_.end()) return std::nullopt;
    LlmReply reply = it->second;
    reply.cached = true;
    return reply;
}

void CallCache::store(const ChatExchange& exchange, const LlmReply& reply) {
    std::lock_guard lock(mutex_);
    std::string key = request_key(exchange);
    std::string digest = request_digest(exchange);
    LlmReply stored = reply;
    stored.cached = true;
    entries_[{key, digest}] = stored;
    append_record(key, digest, reply);
}

std::size_t CallCache::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

void CallCache::append_record(const std::string& key,
                              const std::string& digest,
                              const LlmReply& reply) {
    if (path_.empty()) return;
    bool fresh = !std::filesystem::exists(path_) ||
                 std::filesystem::file_size(path_) == 0;
    if (auto parent = std::filesystem::path(path_).parent_path();
        !parent.empty()) {
        std::filesystem::create_directories(parent);
    }
    std::ofstream out(path_, std::ios::app);
    if (fresh) {
        out << nlohmann::json{{"format", kFormat}, {"version", kVersion}}
            << "\n";
    }
    nlohmann::json j{
        {"key", key},
        {"digest", digest},
        {"texts", reply.texts},
        {"usage",
         {{"prompt_tokens", reply.usage.prompt_tokens},
          {"completion_tokens", reply.usage.completion_tokens}}},
        {"ts", std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count()}};
    out << j << "\n";
}

LlmReply CachingClient::complete(const ChatExchange& exchange) {
    if (cache_) {
        if (auto hit = cache_->lookup(exchange)) return *hit;
    }
    ++misses_;
    LlmReply reply = inner_.complete(exchange);
    reply.cached = false;
    if (cache_) cache_->store(exchange, reply);
    return reply;
}

}  // namespace entail
