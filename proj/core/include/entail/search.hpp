#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entail/chat.hpp"
#include "entail/demo.hpp"
#include "entail/instance.hpp"
#include "entail/prompts.hpp"

namespace entail {

enum class PruningMode { Div, ReuseIc, Off };
enum class HintMode { Hint, WhatsNext, Off };

std::string_view pruning_mode_name(PruningMode mode);
std::string_view hint_mode_name(HintMode mode);
PruningMode pruning_mode_from(std::string_view name);
HintMode hint_mode_from(std::string_view name);

struct SearchConfig {
    int beam = 3;               // candidates kept per expansion
    int proposals = 3;          // reasoning-step samples per node
    int retrieval_samples = 5;  // independent retrievals unioned
    int demos = 3;
    int max_iter_multiplier = 5;
    int max_depth = 4;
    PruningMode pruning = PruningMode::Div;
    HintMode hint_mode = HintMode::Hint;
    int default_score = 50;  // assigned when no score can be extracted
    std::string model = "mock";
    int max_tokens = 512;
    std::map<std::string, double> temperature;  // by prompt kind name
    bool content_channel = false;

    int max_iterations() const { return max_iter_multiplier * max_depth; }
    double temperature_for(PromptKind kind) const;
};

/// One frontier entry of the proof search.
struct SearchState {
    ProofGraph graph;
    std::string hint;
    std::optional<ProofStep> last_step;
    int score = 0;
    int iter = 0;
    std::set<int> retained_sentences;
    std::string trace_id;
};

struct TraceEvent {
    std::string event;
    std::string trace_id;
    int iter = 0;
    nlohmann::json data;

    nlohmann::json to_json() const;
};

struct SearchOutcome {
    std::optional<ProofGraph> proof;  // present iff the hypothesis was reached
    int explored_states = 0;          // states pushed onto the frontier
    int llm_calls = 0;
    std::vector<TraceEvent> trace;
};

/// Shared call budget for a batch; run_search throws
/// SearchError(BudgetExceeded) before any call that would cross either cap.
struct CallBudget {
    int per_instance = 1 << 30;
    int total = 1 << 30;
    std::shared_ptr<std::atomic<int>> total_used =
        std::make_shared<std::atomic<int>>(0);
};

struct ScoredStep {
    ProofStep step;
    int score = 0;
};

struct PruneOutcome {
    std::vector<ScoredStep> kept;
    /// (serialized step, rule) for each deleted candidate; rules are
    /// "top-k", "alg3-literal", "div", "reuse-ic".
    std::vector<std::pair<std::string, std::string>> dropped;
    bool guard_fired = false;
};

/// Candidate pruning: keep the top `beam` scores (ties broken by lower
/// premise-index sum, then input order); when the current graph has exactly
/// one step, delete candidates consuming an intermediate; then apply the
/// structure rule (Div discards candidates growing from the nodes concluded
/// in the previous iteration, ReuseIc discards the ones that do not). Any
/// stage that would empty a non-empty list instead keeps its single best
/// candidate.
PruneOutcome prune(const std::vector<ScoredStep>& candidates,
                   const ProofGraph& current,
                   const std::set<NodeId>& prev_new_nodes,
                   const SearchConfig& cfg);

/// Appends the step to the graph, renumbering the proposed intermediate
/// conclusion to the graph's next free index. Premise intermediates must
/// already exist (ProofError with UnknownPremise otherwise).
ProofGraph extend(const ProofGraph& graph, const ProofStep& step);

bool reached_hypothesis(const ProofStep& step);

/// The full proof-construction loop: demonstration search over the evolving
/// guessed graph, candidate retrieval, step proposal, evaluation, pruning
/// and breadth-first expansion with at most `beam` children per state,
/// until a step concludes the hypothesis or the frontier empties.
/// Deterministic given a deterministic client.
SearchOutcome run_search(const Instance& inst,
                         const std::vector<Demonstration>& db,
                         LlmClient& client, const SearchConfig& cfg,
                         CallBudget* budget = nullptr);

}  // namespace entail
