#include "entail/proof.hpp"

#include <algorithm>
#include <map>

namespace entail {

std::string NodeId::str() const {
    switch (kind) {
        case NodeKind::Sentence:
            return "sent" + std::to_string(index);
        case NodeKind::Intermediate:
            return "int" + std::to_string(index);
        case NodeKind::Hypothesis:
            return "hypothesis";
    }
    return "?";
}

void validate_step(const ProofStep& step) {
    if (step.premises.empty()) {
        throw ProofError(ProofError::Code::EmptyPremises,
                         "step has no premises");
    }
    if (step.conclusion.is_sentence()) {
        throw ProofError(ProofError::Code::SentenceConclusion,
                         "conclusion cannot be a sentence: " +
                             step.conclusion.str());
    }
    std::set<NodeId> seen;
    for (const auto& p : step.premises) {
        if (p.is_hypothesis()) {
            throw ProofError(ProofError::Code::HypothesisPremise,
                             "hypothesis cannot be a premise");
        }
        if (!seen.insert(p).second) {
            throw ProofError(ProofError::Code::DuplicatePremise,
                             "duplicate premise " + p.str());
        }
        if (p == step.conclusion) {
            throw ProofError(ProofError::Code::SelfConclusion,
                             p.str() + " used as its own premise");
        }
    }
}

ProofGraph ProofGraph::from_steps(std::vector<ProofStep> steps) {
    std::set<NodeId> concluded;
    for (const auto& step : steps) {
        validate_step(step);
        for (const auto& p : step.premises) {
            if (p.is_intermediate() && !concluded.count(p)) {
                throw ProofError(ProofError::Code::ForwardReference,
                                 "premise " + p.str() +
                                     " is not concluded by an earlier step");
            }
        }
        if (!concluded.insert(step.conclusion).second) {
            throw ProofError(ProofError::Code::DuplicateConclusion,
                             step.conclusion.str() +
                                 " concluded by more than one step");
        }
    }
    // Insertion order plus the forward-reference rule already forces a
    // topological order; walk the edges once anyway so a corrupted caller
    // can never hand out a cyclic graph.
    std::map<NodeId, std::set<NodeId>> out_edges;
    for (const auto& step : steps) {
        for (const auto& p : step.premises) {
            out_edges[p].insert(step.conclusion);
        }
    }
    std::map<NodeId, int> mark;  // 0 unseen, 1 on stack, 2 done
    std::vector<NodeId> stack;
    for (const auto& [node, _] : out_edges) {
        if (mark[node] != 0) continue;
        stack.push_back(node);
        std::vector<std::pair<NodeId, bool>> dfs{{node, false}};
        while (!dfs.empty()) {
            auto [cur, expanded] = dfs.back();
            dfs.pop_back();
            if (expanded) {
                mark[cur] = 2;
                continue;
            }
            if (mark[cur] == 1) continue;
            mark[cur] = 1;
            dfs.push_back({cur, true});
            for (const auto& next : out_edges[cur]) {
                if (mark[next] == 1) {
                    throw ProofError(ProofError::Code::CycleDetected,
                                     "cycle through " + next.str());
                }
                if (mark[next] == 0) dfs.push_back({next, false});
            }
        }
    }
    ProofGraph g;
    g.steps_ = std::move(steps);
    return g;
}

ProofGraph ProofGraph::extended(const ProofStep& step) const {
    validate_step(step);
    for (const auto& p : step.premises) {
        if (p.is_intermediate() && !concludes(p)) {
            throw ProofError(ProofError::Code::UnknownPremise,
                             "premise " + p.str() + " is not in the graph");
        }
    }
    if (concludes(step.conclusion)) {
        throw ProofError(ProofError::Code::DuplicateConclusion,
                         step.conclusion.str() + " already concluded");
    }
    ProofGraph g;
    g.steps_ = steps_;
    g.steps_.push_back(step);
    return g;
}

std::size_t ProofGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& step : steps_) n += step.premises.size();
    return n;
}

std::vector<NodeId> ProofGraph::nodes() const {
    std::vector<NodeId> out;
    for (const auto& s : sentence_leaves()) out.push_back(s);
    for (const auto& step : steps_) out.push_back(step.conclusion);
    return out;
}

std::set<NodeId> ProofGraph::sentence_leaves() const {
    std::set<NodeId> out;
    for (const auto& step : steps_) {
        for (const auto& p : step.premises) {
            if (p.is_sentence()) out.insert(p);
        }
    }
    return out;
}

std::set<int> ProofGraph::sentence_indices() const {
    std::set<int> out;
    for (const auto& n : sentence_leaves()) out.insert(n.index);
    return out;
}

bool ProofGraph::concludes(const NodeId& id) const {
    return step_concluding(id) != nullptr;
}

bool ProofGraph::concludes_hypothesis() const {
    return concludes(NodeId::hypothesis());
}

const ProofStep* ProofGraph::step_concluding(const NodeId& id) const {
    for (const auto& step : steps_) {
        if (step.conclusion == id) return &step;
    }
    return nullptr;
}

int ProofGraph::max_intermediate_index() const {
    int best = 0;
    for (const auto& step : steps_) {
        if (step.conclusion.is_intermediate()) {
            best = std::max(best, step.conclusion.index);
        }
    }
    return best;
}

int ProofGraph::node_depth(const NodeId& id) const {
    if (id.is_sentence()) return 0;
    const ProofStep* step = step_concluding(id);
    if (!step) {
        throw ProofError(ProofError::Code::UnknownNode,
                         id.str() + " is not in the graph");
    }
    int depth = 0;
    for (const auto& p : step->premises) {
        depth = std::max(depth, node_depth(p));
    }
    return depth + 1;
}

int ProofGraph::max_depth() const {
    int best = 0;
    for (const auto& step : steps_) {
        best = std::max(best, node_depth(step.conclusion));
    }
    return best;
}

bool operator==(const ProofGraph& a, const ProofGraph& b) {
    if (a.steps_.size() != b.steps_.size()) return false;
    for (std::size_t i = 0; i < a.steps_.size(); ++i) {
        if (!a.steps_[i].same_deduction(b.steps_[i])) return false;
    }
    return true;
}

std::set<NodeId> leaf_closure(const ProofGraph& g, const NodeId& n) {
    if (n.is_sentence()) {
        if (!g.sentence_leaves().count(n)) {
            throw ProofError(ProofError::Code::UnknownNode,
                             n.str() + " is not in the graph");
        }
        return {n};
    }
    const ProofStep* step = g.step_concluding(n);
    if (!step) {
        throw ProofError(ProofError::Code::UnknownNode,
                         n.str() + " is not in the graph");
    }
    std::set<NodeId> out;
    for (const auto& p : step->premises) {
        if (p.is_sentence()) {
            out.insert(p);
        } else {
            auto sub = leaf_closure(g, p);
            out.insert(sub.begin(), sub.end());
        }
    }
    return out;
}

}  // namespace entail
