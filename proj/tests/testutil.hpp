#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "entail/dataset.hpp"
#include "entail/parse.hpp"
#include "entail/proof.hpp"

namespace entail::testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(ENTAIL_FIXTURE_DIR) + "/" + name;
}

inline std::string golden_path(const std::string& name) {
    return std::string(ENTAIL_GOLDEN_DIR) + "/" + name;
}

inline std::vector<Instance> load_fixtures() {
    return load_instances(fixture_path("fixtures.jsonl"));
}

inline const Instance& fixture(const std::vector<Instance>& all,
                               const std::string& id) {
    for (const auto& inst : all) {
        if (inst.id == id) return inst;
    }
    throw std::runtime_error("no fixture " + id);
}

/// The running example: sent20 & sent4 -> int1; sent21 & sent23 -> int2;
/// int1 & int2 -> hypothesis.
inline ProofGraph mars_graph() {
    return parse_proof_chain(
        "sent20 & sent4 -> int1: gravity causes the planets in the solar "
        "system to orbit the sun; "
        "sent21 & sent23 -> int2: mars is a planet in the solar system; "
        "int1 & int2 -> hypothesis;");
}

inline ProofGraph chain_graph(int steps) {
    std::string text;
    for (int i = 1; i <= steps; ++i) {
        std::string conclusion = i == steps ? "hypothesis"
                                            : "int" + std::to_string(i);
        if (i == 1) {
            text += "sent1 & sent2 -> " + conclusion + "; ";
        } else {
            text += "int" + std::to_string(i - 1) + " & sent" +
                    std::to_string(i + 1) + " -> " + conclusion + "; ";
        }
    }
    return parse_proof_chain(text);
}

/// Valid-by-construction random DAG in the chain notation's value space.
inline ProofGraph random_graph(std::mt19937_64& rng, int max_steps = 8) {
    static const char* words[] = {"water", "orbits", "planet", "energy",
                                  "animal", "rock",   "light",  "cause"};
    std::uniform_int_distribution<int> step_count(1, max_steps);
    int n_steps = step_count(rng);
    std::vector<NodeId> pool;
    for (int i = 1; i <= 12; ++i) pool.push_back(NodeId::sentence(i));
    std::vector<ProofStep> steps;
    int next_int = 1;
    for (int s = 0; s < n_steps; ++s) {
        std::uniform_int_distribution<int> arity_dist(1, 3);
        int arity = std::min<int>(arity_dist(rng),
                                  static_cast<int>(pool.size()));
        ProofStep step;
        std::set<std::size_t> chosen;
        while (static_cast<int>(chosen.size()) < arity) {
            chosen.insert(rng() % pool.size());
        }
        for (std::size_t index : chosen) step.premises.push_back(pool[index]);
        bool last = s == n_steps - 1;
        if (last && rng() % 2 == 0) {
            step.conclusion = NodeId::hypothesis();
        } else {
            step.conclusion = NodeId::intermediate(next_int++);
            pool.push_back(step.conclusion);
        }
        int n_words = static_cast<int>(rng() % 4);
        for (int w = 0; w < n_words; ++w) {
            if (w > 0) step.conclusion_text += " ";
            step.conclusion_text += words[rng() % 8];
        }
        steps.push_back(std::move(step));
    }
    return ProofGraph::from_steps(std::move(steps));
}

/// One random mutation of a serialized chain.
inline std::string corrupt(const std::string& text, std::mt19937_64& rng) {
    if (text.empty()) return "int1 & sent2 -> int1";
    std::string out = text;
    switch (rng() % 6) {
        case 0: {  // drop an arrow
            std::size_t pos = out.find("->");
            if (pos != std::string::npos) out.erase(pos, 2);
            break;
        }
        case 1:  // garbage token
            out.insert(rng() % out.size(), " bogus7 &");
            break;
        case 2: {  // duplicate everything (duplicate conclusions)
            out = out + " " + text;
            break;
        }
        case 3:  // forward reference
            out += " int97 & sent1 -> int98;";
            break;
        case 4:  // random byte noise
            for (int i = 0; i < 3; ++i) {
                out[rng() % out.size()] =
                    static_cast<char>('!' + rng() % 90);
            }
            break;
        case 5:  // self premise
            out += " int99 & sent1 -> int99;";
            break;
    }
    return out;
}

/// Independent edit-distance oracle: enumerates every injective mapping of
/// a-nodes onto b-nodes-or-nothing and prices the whole edit script from
/// scratch. Exponential, fine for the small fixture pairs.
struct BruteGraph {
    std::vector<NodeId> nodes;
    std::vector<std::set<int>> closures;  // by node index
    std::set<std::pair<int, int>> edges;  // (premise idx, conclusion idx)

    explicit BruteGraph(const ProofGraph& g) {
        nodes = g.nodes();
        std::map<NodeId, int> index;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            index[nodes[i]] = static_cast<int>(i);
            std::set<int> closure;
            if (!nodes[i].is_sentence()) {
                for (const auto& leaf : leaf_closure(g, nodes[i])) {
                    closure.insert(leaf.index);
                }
            }
            closures.push_back(std::move(closure));
        }
        for (const auto& step : g.steps()) {
            for (const auto& premise : step.premises) {
                edges.insert({index[premise], index[step.conclusion]});
            }
        }
    }

    bool label_equal(int i, const BruteGraph& other, int j) const {
        const NodeId& a = nodes[static_cast<std::size_t>(i)];
        const NodeId& b = other.nodes[static_cast<std::size_t>(j)];
        if (a.kind != b.kind) return false;
        if (a.is_sentence()) return a.index == b.index;
        if (a.is_intermediate()) {
            return closures[static_cast<std::size_t>(i)] ==
                   other.closures[static_cast<std::size_t>(j)];
        }
        return true;
    }
};

inline int brute_cost(const BruteGraph& a, const BruteGraph& b,
                      const std::vector<int>& mapping) {
    int cost = 0;
    std::vector<bool> used(b.nodes.size(), false);
    for (std::size_t i = 0; i < mapping.size(); ++i) {
        if (mapping[i] < 0) {
            cost += 1;  // deletion
        } else {
            used[static_cast<std::size_t>(mapping[i])] = true;
            if (!a.label_equal(static_cast<int>(i), b, mapping[i])) cost += 1;
        }
    }
    for (std::size_t j = 0; j < b.nodes.size(); ++j) {
        if (!used[j]) cost += 1;  // insertion
    }
    for (const auto& [u, v] : a.edges) {
        int fu = mapping[static_cast<std::size_t>(u)];
        int fv = mapping[static_cast<std::size_t>(v)];
        if (fu < 0 || fv < 0 || !b.edges.count({fu, fv})) cost += 1;
    }
    for (const auto& [x, y] : b.edges) {
        bool imaged = false;
        for (const auto& [u, v] : a.edges) {
            if (mapping[static_cast<std::size_t>(u)] == x &&
                mapping[static_cast<std::size_t>(v)] == y) {
                imaged = true;
                break;
            }
        }
        if (!imaged) cost += 1;  // inserted b-edge
    }
    return cost;
}

inline void brute_enumerate(const BruteGraph& a, const BruteGraph& b,
                            std::vector<int>& mapping,
                            std::vector<bool>& used, int& best) {
    std::size_t i = mapping.size();
    if (i == a.nodes.size()) {
        best = std::min(best, brute_cost(a, b, mapping));
        return;
    }
    mapping.push_back(-1);
    brute_enumerate(a, b, mapping, used, best);
    mapping.pop_back();
    for (std::size_t j = 0; j < b.nodes.size(); ++j) {
        if (used[j]) continue;
        used[j] = true;
        mapping.push_back(static_cast<int>(j));
        brute_enumerate(a, b, mapping, used, best);
        mapping.pop_back();
        used[j] = false;
    }
}

inline int brute_force_ged(const ProofGraph& ga, const ProofGraph& gb) {
    BruteGraph a(ga);
    BruteGraph b(gb);
    std::vector<int> mapping;
    std::vector<bool> used(b.nodes.size(), false);
    int best = 1 << 28;
    brute_enumerate(a, b, mapping, used, best);
    return best;
}

/// Consistent random renumbering of the intermediates.
inline ProofGraph renumber_intermediates(const ProofGraph& g,
                                         std::mt19937_64& rng) {
    int max_index = g.max_intermediate_index();
    std::vector<int> perm(static_cast<std::size_t>(max_index));
    for (int i = 0; i < max_index; ++i) perm[static_cast<std::size_t>(i)] = i + 1;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ProofStep> steps = g.steps();
    auto rename = [&](NodeId& id) {
        if (id.is_intermediate()) {
            id = NodeId::intermediate(perm[static_cast<std::size_t>(id.index - 1)]);
        }
    };
    for (auto& step : steps) {
        for (auto& premise : step.premises) rename(premise);
        rename(step.conclusion);
    }
    return ProofGraph::from_steps(std::move(steps));
}

}  // namespace entail::testutil
