#pragma once

#include <optional>
#include <string>
#include <vector>

#include "entail/chat.hpp"
#include "entail/encode.hpp"
#include "entail/instance.hpp"

namespace entail {

enum class StepProvenance { Guessed, Constructed };

/// The engine's current estimate of the target proof's shape: the model's
/// initial guess, progressively overwritten by the steps the search has
/// actually constructed.
struct GuessedGraph {
    ProofGraph graph;
    std::vector<StepProvenance> provenance;  // one tag per step
};

/// First call (no prior): asks the model for a full proof guess in the
/// chain notation and parses it; if the reply does not parse, falls back
/// to a two-step balanced guess over the first four context sentences.
/// Later calls merge: constructed steps replace guessed steps with the
/// same conclusion id, and guessed steps whose premises are no longer
/// derivable are dropped. Never throws; degradation is silent by design.
GuessedGraph guess_graph(const std::optional<GuessedGraph>& prior,
                         const ProofGraph& constructed, LlmClient& llm,
                         const Instance& inst, const ChatParams& params = {});

/// Deterministic fallback guess (exposed for tests).
GuessedGraph fallback_guess(const Instance& inst);

struct RankedDemo {
    std::size_t db_index;
    double score;
};

/// Ranks the database against the guessed graph by cosine similarity of
/// the structural embeddings, descending, ties broken by ascending
/// demonstration id. Demonstrations with the target's own id are skipped.
std::vector<RankedDemo> rank_demonstrations(
    const Instance& inst, const std::vector<Demonstration>& db,
    const GuessedGraph& guessed,
    const GraphEncoder& encoder = default_encoder());

/// Top-k of rank_demonstrations, materialized (at most min(k, |db|)).
std::vector<Demonstration> search_demonstrations(
    const Instance& inst, const std::vector<Demonstration>& db,
    const GuessedGraph& guessed, int k,
    const GraphEncoder& encoder = default_encoder());

}  // namespace entail
