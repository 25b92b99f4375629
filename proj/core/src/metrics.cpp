#include "entail/metrics.hpp"

#include <algorithm>
#include <map>
#include <queue>

#include "entail/errors.hpp"

namespace entail {

namespace {

Prf set_prf(std::size_t pred_size, std::size_t gold_size,
            std::size_t matched) {
    Prf out;
    if (pred_size == 0 && gold_size == 0) return {1.0, 1.0, 1.0};
    out.p = pred_size == 0 ? 0.0
                           : static_cast<double>(matched) /
                                 static_cast<double>(pred_size);
    out.r = gold_size == 0 ? 0.0
                           : static_cast<double>(matched) /
                                 static_cast<double>(gold_size);
    out.f = (out.p + out.r) == 0.0 ? 0.0
                                   : 2.0 * out.p * out.r / (out.p + out.r);
    return out;
}

}  // namespace

Prf evidence_scores(const ProofGraph& pred, const ProofGraph& gold) {
    std::set<int> e_pred = pred.sentence_indices();
    std::set<int> e_gold = gold.sentence_indices();
    std::size_t matched = 0;
    for (int i : e_pred) matched += e_gold.count(i);
    return set_prf(e_pred.size(), e_gold.size(), matched);
}

namespace {

// Canonical identity of a step: the set of its premises' leaf closures
// (closures as sentence-index sets).
using StepKey = std::set<std::set<int>>;

std::vector<StepKey> step_keys(const ProofGraph& g) {
    std::vector<StepKey> out;
    for (const auto& step : g.steps()) {
        StepKey key;
        for (const auto& premise : step.premises) {
            std::set<int> closure;
            for (const auto& leaf : leaf_closure(g, premise)) {
                closure.insert(leaf.index);
            }
            key.insert(std::move(closure));
        }
        out.push_back(std::move(key));
    }
    return out;
}

}  // namespace

Prf proof_scores(const ProofGraph& pred, const ProofGraph& gold) {
    std::vector<StepKey> pred_keys = step_keys(pred);
    std::vector<StepKey> gold_keys = step_keys(gold);
    std::vector<bool> used(pred_keys.size(), false);
    std::size_t matched = 0;
    for (const auto& gk : gold_keys) {
        for (std::size_t i = 0; i < pred_keys.size(); ++i) {
            if (!used[i] && pred_keys[i] == gk) {
                used[i] = true;
                ++matched;
                break;
            }
        }
    }
    return set_prf(pred_keys.size(), gold_keys.size(), matched);
}

namespace {

struct NodeLabel {
    NodeKind kind;
    int sentence = 0;
    std::set<int> closure;  // intermediates only

    friend bool operator==(const NodeLabel& a, const NodeLabel& b) {
        if (a.kind != b.kind) return false;
        switch (a.kind) {
            case NodeKind::Sentence:
                return a.sentence == b.sentence;
            case NodeKind::Intermediate:
                return a.closure == b.closure;
            case NodeKind::Hypothesis:
                return true;
        }
        return false;
    }
};

struct GedGraph {
    std::vector<NodeLabel> labels;
    std::vector<std::vector<bool>> edge;  // edge[u][v]: u premise of v
    int n = 0;
    int edges = 0;

    explicit GedGraph(const ProofGraph& g) {
        std::vector<NodeId> ids = g.nodes();
        n = static_cast<int>(ids.size());
        std::map<NodeId, int> index;
        for (int i = 0; i < n; ++i) {
            index[ids[i]] = i;
            NodeLabel label;
            label.kind = ids[i].kind;
            if (ids[i].is_sentence()) {
                label.sentence = ids[i].index;
            } else if (ids[i].is_intermediate()) {
                for (const auto& leaf : leaf_closure(g, ids[i])) {
                    label.closure.insert(leaf.index);
                }
            }
            labels.push_back(std::move(label));
        }
        edge.assign(n, std::vector<bool>(n, false));
        for (const auto& step : g.steps()) {
            int v = index.at(step.conclusion);
            for (const auto& premise : step.premises) {
                edge[index.at(premise)][v] = true;
                ++edges;
            }
        }
    }

    int units() const { return n + edges; }
};

constexpr int kEps = -1;

// Cost of fixing node i of A to `target` (a B index or kEps), given the
// earlier assignments. Counts node substitution/deletion plus every edge
// between i and an already-assigned A node, in both directions, and the
// matching B edge insertions.
int incremental_cost(const GedGraph& a, const GedGraph& b,
                     const std::vector<int>& assign, int i, int target) {
    int cost = 0;
    if (target == kEps) {
        cost += 1;  // node deletion
    } else if (!(a.labels[i] == b.labels[target])) {
        cost += 1;  // substitution across labels
    }
    for (int k = 0; k < i; ++k) {
        int fk = assign[k];
        bool a_ik = a.edge[i][k];
        bool a_ki = a.edge[k][i];
        bool b_ik = target != kEps && fk != kEps && b.edge[target][fk];
        bool b_ki = target != kEps && fk != kEps && b.edge[fk][target];
        cost += (a_ik != b_ik) + (a_ki != b_ki);
    }
    return cost;
}

// Cost of everything in B untouched by the (complete) mapping.
int completion_cost(const GedGraph& b, const std::vector<int>& assign) {
    std::vector<bool> used(b.n, false);
    for (int t : assign) {
        if (t != kEps) used[t] = true;
    }
    int cost = 0;
    for (int j = 0; j < b.n; ++j) {
        if (!used[j]) ++cost;
    }
    for (int x = 0; x < b.n; ++x) {
        for (int y = 0; y < b.n; ++y) {
            if (b.edge[x][y] && (!used[x] || !used[y])) ++cost;
        }
    }
    return cost;
}

// Admissible lower bound: unmatched node and edge counts for the part of
// both graphs not yet touched by the partial assignment.
int lower_bound(const GedGraph& a, const GedGraph& b, int i,
                const std::vector<bool>& used, int used_count) {
    int rem_a = a.n - i;
    int avail_b = b.n - used_count;
    int bound = std::abs(rem_a - avail_b);
    int ea = 0;
    for (int u = i; u < a.n; ++u) {
        for (int v = i; v < a.n; ++v) {
            if (a.edge[u][v]) ++ea;
        }
    }
    int eb = 0;
    for (int x = 0; x < b.n; ++x) {
        for (int y = 0; y < b.n; ++y) {
            if (b.edge[x][y] && !used[x] && !used[y]) ++eb;
        }
    }
    return bound + std::abs(ea - eb);
}

int exact_ged(const GedGraph& a, const GedGraph& b) {
    if (a.n == 0) return b.units();  // insert everything
    struct State {
        int f;
        int g;
        int i;
        std::vector<int> assign;
        std::vector<bool> used;
        int used_count;
    };
    auto cmp = [](const State& x, const State& y) { return x.f > y.f; };
    std::priority_queue<State, std::vector<State>, decltype(cmp)> open(cmp);
    open.push({lower_bound(a, b, 0, std::vector<bool>(b.n, false), 0), 0, 0,
               {}, std::vector<bool>(b.n, false), 0});
    while (!open.empty()) {
        State s = open.top();
        open.pop();
        if (s.i == a.n) {
            return s.g;  // completion cost already folded in below
        }
        // No dominance pruning: states with the same used-set but different
        // assignments price future edges differently.
        for (int target = kEps; target < b.n; ++target) {
            if (target != kEps && s.used[target]) continue;
            State next = s;
            next.i = s.i + 1;
            next.g = s.g + incremental_cost(a, b, s.assign, s.i, target);
            next.assign.push_back(target);
            if (target != kEps) {
                next.used[target] = true;
                ++next.used_count;
            }
            if (next.i == a.n) {
                next.g += completion_cost(b, next.assign);
                next.f = next.g;
            } else {
                next.f = next.g + lower_bound(a, b, next.i, next.used,
                                              next.used_count);
            }
            open.push(std::move(next));
        }
    }
    // Unreachable: assigning everything to eps always completes.
    return a.units() + b.units();
}

int greedy_ged(const GedGraph& a, const GedGraph& b) {
    std::vector<int> assign;
    std::vector<bool> used(b.n, false);
    int g = 0;
    for (int i = 0; i < a.n; ++i) {
        int best_target = kEps;
        int best_cost = incremental_cost(a, b, assign, i, kEps);
        for (int target = 0; target < b.n; ++target) {
            if (used[target]) continue;
            int c = incremental_cost(a, b, assign, i, target);
            if (c < best_cost) {
                best_cost = c;
                best_target = target;
            }
        }
        g += best_cost;
        assign.push_back(best_target);
        if (best_target != kEps) used[best_target] = true;
    }
    return g + completion_cost(b, assign);
}

}  // namespace

GedResult graph_edit_distance(const ProofGraph& a, const ProofGraph& b,
                              const GedOptions& options) {
    GedGraph ga(a);
    GedGraph gb(b);
    if (ga.units() > options.exact_limit ||
        gb.units() > options.exact_limit) {
        if (!options.allow_approximate) {
            throw MetricError(
                MetricError::Code::TooLarge,
                "graph exceeds the exact edit-distance limit of " +
                    std::to_string(options.exact_limit) + " units");
        }
        return {greedy_ged(ga, gb), true};
    }
    return {exact_ged(ga, gb), false};
}

double graph_similarity(const ProofGraph& pred, const ProofGraph& gold,
                        const GedOptions& options) {
    GedResult ged = graph_edit_distance(pred, gold, options);
    double denom = static_cast<double>(
        std::max(pred.node_count() + pred.edge_count(),
                 gold.node_count() + gold.edge_count()));
    if (denom == 0.0) return 1.0;
    return std::clamp(1.0 - ged.cost / denom, 0.0, 1.0);
}

MetricReport score_graphs(const ProofGraph& pred, const ProofGraph& gold,
                          const GedOptions& options) {
    MetricReport out;
    Prf ev = evidence_scores(pred, gold);
    Prf pr = proof_scores(pred, gold);
    out.ev_p = ev.p;
    out.ev_r = ev.r;
    out.ev_f = ev.f;
    out.pr_p = pr.p;
    out.pr_r = pr.r;
    out.pr_f = pr.f;
    GedResult ged = graph_edit_distance(pred, gold, options);
    double denom = static_cast<double>(
        std::max(pred.node_count() + pred.edge_count(),
                 gold.node_count() + gold.edge_count()));
    out.g_sim = denom == 0.0
                    ? 1.0
                    : std::clamp(1.0 - ged.cost / denom, 0.0, 1.0);
    out.g_sim_approximate = ged.approximate;
    out.pr_recall_is_1 = pr.r == 1.0 ? 1.0 : 0.0;
    return out;
}

MetricReport aggregate(const std::vector<MetricReport>& reports) {
    if (reports.empty()) {
        throw MetricError(MetricError::Code::EmptyList,
                          "cannot aggregate zero reports");
    }
    MetricReport out;
    for (const auto& r : reports) {
        out.ev_p += r.ev_p;
        out.ev_r += r.ev_r;
        out.ev_f += r.ev_f;
        out.pr_p += r.pr_p;
        out.pr_r += r.pr_r;
        out.pr_f += r.pr_f;
        out.g_sim += r.g_sim;
        out.pr_recall_is_1 += r.pr_recall_is_1;
        out.g_sim_approximate = out.g_sim_approximate || r.g_sim_approximate;
    }
    double n = static_cast<double>(reports.size());
    out.ev_p /= n;
    out.ev_r /= n;
    out.ev_f /= n;
    out.pr_p /= n;
    out.pr_r /= n;
    out.pr_f /= n;
    out.g_sim /= n;
    out.pr_recall_is_1 /= n;
    return out;
}

}  // namespace entail
