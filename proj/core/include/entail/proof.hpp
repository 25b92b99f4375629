#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "entail/errors.hpp"

namespace entail {

enum class NodeKind { Sentence, Intermediate, Hypothesis };

/// Identity of a proof-graph node. Renders as `sentN`, `intN` or
/// `hypothesis` (lowercase, no spaces); the hypothesis carries no index.
struct NodeId {
    NodeKind kind = NodeKind::Sentence;
    int index = 0;  // >= 1 for Sentence/Intermediate, 0 for Hypothesis

    static NodeId sentence(int i) { return {NodeKind::Sentence, i}; }
    static NodeId intermediate(int i) { return {NodeKind::Intermediate, i}; }
    static NodeId hypothesis() { return {NodeKind::Hypothesis, 0}; }

    bool is_sentence() const { return kind == NodeKind::Sentence; }
    bool is_intermediate() const { return kind == NodeKind::Intermediate; }
    bool is_hypothesis() const { return kind == NodeKind::Hypothesis; }

    std::string str() const;

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

/// One deduction `premises -> conclusion`. The conclusion text is free-form
/// natural language and never participates in equality.
struct ProofStep {
    std::vector<NodeId> premises;
    NodeId conclusion;
    std::string conclusion_text;

    std::set<NodeId> premise_set() const {
        return {premises.begin(), premises.end()};
    }

    /// Order-insensitive on premises; ignores conclusion_text.
    bool same_deduction(const ProofStep& other) const {
        return conclusion == other.conclusion &&
               premise_set() == other.premise_set();
    }
};

/// Throws ProofError unless the step is well formed on its own: at least
/// one premise, no duplicates, conclusion not a sentence, conclusion not
/// among the premises, hypothesis never used as a premise.
void validate_step(const ProofStep& step);

/// A DAG of evidence sentences (leaves), intermediate conclusions and an
/// optional hypothesis root. Steps are kept in insertion order, which is
/// always a valid topological order: a step may only reference
/// intermediates concluded by earlier steps. Immutable after construction.
class ProofGraph {
public:
    ProofGraph() = default;

    /// Validates every graph invariant; throws ProofError.
    static ProofGraph from_steps(std::vector<ProofStep> steps);

    /// Returns a copy with `step` appended. Throws ProofError with
    /// UnknownPremise if the step references an intermediate this graph has
    /// not concluded, or any step/graph invariant fails.
    ProofGraph extended(const ProofStep& step) const;

    const std::vector<ProofStep>& steps() const { return steps_; }
    bool empty() const { return steps_.empty(); }
    std::size_t size() const { return steps_.size(); }

    /// Number of directed premise->conclusion edges.
    std::size_t edge_count() const;

    /// All nodes: sentences ascending, then conclusions in step order.
    std::vector<NodeId> nodes() const;
    std::size_t node_count() const { return nodes().size(); }

    std::set<NodeId> sentence_leaves() const;
    std::set<int> sentence_indices() const;

    bool concludes(const NodeId& id) const;
    bool concludes_hypothesis() const;
    const ProofStep* step_concluding(const NodeId& id) const;

    int max_intermediate_index() const;

    /// Longest leaf-to-node distance in steps; sentences are at depth 0.
    int node_depth(const NodeId& id) const;
    int max_depth() const;

    /// Structural equality: same step sequence with set-equal premises and
    /// identical conclusion ids. Conclusion text is ignored.
    friend bool operator==(const ProofGraph& a, const ProofGraph& b);

private:
    std::vector<ProofStep> steps_;
};

/// The set of sentence ancestors of `n` (n itself when it is a sentence).
/// Throws ProofError with UnknownNode when `n` is not in the graph.
std::set<NodeId> leaf_closure(const ProofGraph& g, const NodeId& n);

}  // namespace entail
