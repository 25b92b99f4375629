#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entail/chat.hpp"
#include "entail/instance.hpp"

namespace entail {

enum class PromptKind { GuessProof, Retrieve, Propose, Evaluate, Hint };

std::string_view prompt_kind_name(PromptKind kind);

/// Kind-specific inputs for render_prompt. Ids in `demo_premises` /
/// `demo_missing` override the derived defaults for individual
/// demonstrations (the defaults show a demonstration's gold leaves and a
/// hint derived from its gold proof).
struct PromptExtras {
    std::string hint;                          // Retrieve; empty = no line
    std::optional<std::vector<int>> retained;  // Propose/Evaluate target C_s
    std::vector<std::pair<int, std::string>> derived;  // available intN: text
    std::optional<ProofStep> candidate;        // Evaluate
    std::optional<std::string> conclusion;     // Hint, e.g. "int1: ..."
    bool whats_next = false;                   // Hint prompt variant

    std::map<std::string, std::vector<int>> demo_premises;
    std::map<std::string, std::string> demo_missing;
};

/// Renders one of the prompt templates with the given demonstrations and
/// target instance. Pure and byte-deterministic. Throws
/// LlmError(MissingExtra) when a kind-required field is absent.
ChatExchange render_prompt(PromptKind kind, const Instance& inst,
                           const std::vector<Demonstration>& demos,
                           const PromptExtras& extras,
                           const ChatParams& params = {});

/// Warms the lazily rendered demonstration block so read-only sharing
/// between concurrent searches never mutates the demonstration.
void prerender_demo_block(const Demonstration& demo);

}  // namespace entail
