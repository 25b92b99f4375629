#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "entail/encode.hpp"
#include "entail/proof.hpp"

namespace entail {

/// One task: prove `hypothesis` from the numbered evidence sentences in
/// `context`, with the question kept for prompting. Sentence indices come
/// from the source data and may be sparse.
struct Instance {
    std::string id;
    std::string question;
    std::string hypothesis;
    std::map<int, std::string> context;
    std::optional<ProofGraph> gold;

    // Source metadata.
    std::string dataset;
    std::optional<int> depth;
    std::optional<bool> sequential;

    std::vector<int> context_indices() const {
        std::vector<int> out;
        out.reserve(context.size());
        for (const auto& [i, _] : context) out.push_back(i);
        return out;
    }
};

/// A solved example used for in-context learning; gold is required.
struct Demonstration {
    Instance instance;
    /// Gold-graph embedding, filled in by build_demo_db so ranking never
    /// re-encodes the database.
    std::optional<GraphEmbedding> embedding;
    /// Lazily rendered prompt block (the full-context retrieval layout).
    mutable std::string rendered_block;

    const std::string& id() const { return instance.id; }
    const ProofGraph& gold() const { return *instance.gold; }
};

}  // namespace entail
