#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "entail/chat.hpp"
#include "entail/instance.hpp"

namespace entail {

/// Strict scripted mock: replies are matched by substring rules against the
/// flattened prompt, in rule order. An unmatched prompt raises
/// LlmError(BadResponse) unless a default reply is installed.
class ScriptedClient : public LlmClient {
public:
    void add_rule(std::string substring, std::vector<std::string> texts);
    void set_default(std::vector<std::string> texts);

    LlmReply complete(const ChatExchange& exchange) override;

    int calls() const { return calls_; }

private:
    struct Rule {
        std::string substring;
        std::vector<std::string> texts;
    };
    std::vector<Rule> rules_;
    std::optional<std::vector<std::string>> default_texts_;
    int calls_ = 0;
};

/// What the oracle understood from a rendered prompt.
struct ParsedPrompt {
    enum class Kind { Guess, Retrieve, Propose, Evaluate, Hint, Unknown };
    Kind kind = Kind::Unknown;
    std::string hypothesis;
    std::set<int> sentences;                           // listed sentN ids
    std::vector<std::pair<int, std::string>> derived;  // listed intN lines
    std::optional<ProofStep> candidate;                // Evaluate target step
};

ParsedPrompt parse_prompt(const ChatExchange& exchange);

/// Answers every prompt from the gold proof of the instance it recognizes
/// by hypothesis text: reveals the gold evidence set, proposes gold steps
/// that are currently derivable, scores gold-consistent steps 99 and
/// everything else 10. Deterministic and stateless, so any search driven by
/// it reconstructs the gold graph exactly.
class OracleClient : public LlmClient {
public:
    explicit OracleClient(const std::vector<Instance>& instances);

    LlmReply complete(const ChatExchange& exchange) override;

    int calls() const { return calls_; }

protected:
    struct GoldView {
        ProofGraph gold;
        std::string sorted_leaves;  // "sent4, sent20, ..."
    };

    const GoldView& lookup(const std::string& hypothesis) const;

    /// Gold steps whose premises are all available given the prompt's
    /// sentence list and derived intermediates, serialized against the
    /// prompt's intermediate numbering. Empty means everything derivable is
    /// already derived.
    static std::vector<std::string> extendable_steps(const GoldView& view,
                                                     const ParsedPrompt& p);

    static bool gold_consistent(const GoldView& view, const ParsedPrompt& p);

    std::string answer(const ParsedPrompt& p, const GoldView& view,
                       std::size_t sample_index) const;

    std::map<std::string, GoldView> by_hypothesis_;
    std::atomic<int> calls_{0};  // shared across concurrent searches
};

/// Oracle that proposes the gold step with probability `p_gold` and an
/// off-proof distractor otherwise; retrieval and evaluation stay exact.
/// Seeded and single-threaded by design (one client per search).
class NoisyOracleClient : public OracleClient {
public:
    NoisyOracleClient(const std::vector<Instance>& instances,
                      std::uint64_t seed, double p_gold = 0.6);

    LlmReply complete(const ChatExchange& exchange) override;

private:
    /// An off-proof step: never structurally equal to a gold deduction.
    /// Falls back to the gold step when the context is too small to build
    /// one.
    std::string distractor(const ParsedPrompt& p, const GoldView& view,
                           const std::vector<std::string>& gold_steps);

    std::mt19937_64 rng_;
    double p_gold_;
};

}  // namespace entail
