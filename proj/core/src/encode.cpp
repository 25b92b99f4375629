#include "entail/encode.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "entail/errors.hpp"
#include "entail/util.hpp"

namespace entail {

double similarity(const GraphEmbedding& a, const GraphEmbedding& b) {
    if (a.dim() != b.dim()) {
        throw MetricError(MetricError::Code::DimensionMismatch,
                          "embedding dims differ: " + std::to_string(a.dim()) +
                              " vs " + std::to_string(b.dim()));
    }
    if (a.norm == 0.0 || b.norm == 0.0) return 0.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
    }
    return std::clamp(dot / (a.norm * b.norm), -1.0, 1.0);
}

namespace {

double scaled_count(int x) { return std::min(x, 16) / 16.0; }

std::uint64_t wl_combine(std::uint64_t own,
                         const std::vector<std::uint64_t>& premises) {
    std::uint64_t h = fnv1a_u64(own);
    std::vector<std::uint64_t> sorted = premises;
    std::sort(sorted.begin(), sorted.end());
    for (std::uint64_t p : sorted) h = fnv1a_u64(p, h);
    return h;
}

double finish(GraphEmbedding& e) {
    double sq = 0.0;
    for (double v : e.values) sq += v * v;
    e.norm = std::sqrt(sq);
    return e.norm;
}

}  // namespace

GraphEmbedding StructuralEncoder::encode(const ProofGraph& g,
                                         std::string_view hypothesis) const {
    GraphEmbedding e;
    e.values.assign(dim(), 0.0);
    if (g.empty()) {
        if (!opts_.content_channel) return e;
        // Content dims are still populated for an empty graph.
    } else {
        int max_indegree = 0;
        for (const auto& step : g.steps()) {
            max_indegree =
                std::max(max_indegree, static_cast<int>(step.premises.size()));
        }
        const double n_steps = static_cast<double>(g.size());
        e.values[0] = scaled_count(static_cast<int>(g.sentence_leaves().size()));
        e.values[1] = scaled_count(static_cast<int>(g.size()));
        e.values[2] = scaled_count(g.max_depth());
        e.values[3] = scaled_count(max_indegree);
        for (const auto& step : g.steps()) {
            int depth = std::min(g.node_depth(step.conclusion), 8);
            e.values[4 + static_cast<std::size_t>(depth - 1)] += 1.0 / n_steps;
            int arity =
                std::min(static_cast<int>(step.premises.size()), 4);
            e.values[12 + static_cast<std::size_t>(arity - 1)] += 1.0 / n_steps;
        }
        // Weisfeiler-Lehman over the skeleton: every node starts with the
        // same label, then repeatedly absorbs its premises' labels.
        std::map<NodeId, std::uint64_t> label;
        for (const auto& node : g.nodes()) label[node] = 0;
        for (int it = 0; it < kWlIterations; ++it) {
            std::map<NodeId, std::uint64_t> next;
            for (const auto& [node, own] : label) {
                std::vector<std::uint64_t> premise_labels;
                if (const ProofStep* step = g.step_concluding(node)) {
                    for (const auto& p : step->premises) {
                        premise_labels.push_back(label.at(p));
                    }
                }
                next[node] = wl_combine(own, premise_labels);
            }
            label = std::move(next);
        }
        const double n_nodes = static_cast<double>(label.size());
        for (const auto& [node, l] : label) {
            e.values[16 + l % kWlBuckets] += 1.0 / n_nodes;
        }
    }
    if (opts_.content_channel) {
        // Hashed unigram bag of the hypothesis text.
        std::string word;
        std::map<std::size_t, double> bag;
        auto flush = [&] {
            if (word.empty()) return;
            bag[fnv1a(word) % kContentDim] += 1.0;
            word.clear();
        };
        for (char c : lower(hypothesis)) {
            if (std::isalnum(static_cast<unsigned char>(c))) {
                word += c;
            } else {
                flush();
            }
        }
        flush();
        double total = 0.0;
        for (const auto& [_, n] : bag) total += n;
        for (const auto& [bucket, n] : bag) {
            e.values[kStructureDim + bucket] = opts_.content_weight * n / total;
        }
    }
    finish(e);
    return e;
}

const StructuralEncoder& default_encoder() {
    static const StructuralEncoder encoder;
    return encoder;
}

}  // namespace entail
