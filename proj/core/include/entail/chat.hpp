#pragma once

#include <string>
#include <vector>

#include "entail/errors.hpp"

namespace entail {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatParams {
    std::string model = "mock";
    double temperature = 0.0;
    int max_tokens = 512;
    int n_samples = 1;

    friend bool operator==(const ChatParams&, const ChatParams&) = default;
};

/// The entire LLM wire contract: role-tagged messages in, text out.
struct ChatExchange {
    std::vector<ChatMessage> messages;
    ChatParams params;

    /// Single-document rendering: `System: <...>` then a blank line, then
    /// the remaining message contents. This is the byte format golden
    /// files and cache keys are computed over.
    std::string flatten() const;

    friend bool operator==(const ChatExchange&, const ChatExchange&) = default;
};

struct TokenUsage {
    long prompt_tokens = 0;
    long completion_tokens = 0;
};

struct LlmReply {
    std::vector<std::string> texts;  // length == params.n_samples on success
    TokenUsage usage;
    bool cached = false;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;

    /// Returns params.n_samples completions. Implementations throw
    /// LlmError (Transport / RateLimited / BadResponse).
    virtual LlmReply complete(const ChatExchange& exchange) = 0;
};

}  // namespace entail
