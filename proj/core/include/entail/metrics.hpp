#pragma once

#include <vector>

#include "entail/proof.hpp"

namespace entail {

struct Prf {
    double p = 0.0;
    double r = 0.0;
    double f = 0.0;
};

/// One scored instance; aggregate() averages every field, so the
/// recall-is-1 indicator (0 or 1 here) becomes the proportion of instances
/// whose predicted steps cover the whole gold proof.
struct MetricReport {
    double ev_p = 0.0, ev_r = 0.0, ev_f = 0.0;
    double pr_p = 0.0, pr_r = 0.0, pr_f = 0.0;
    double g_sim = 0.0;
    double pr_recall_is_1 = 0.0;
    bool g_sim_approximate = false;
};

/// Precision/recall/F1 over the evidence leaves. Empty-vs-empty scores 1;
/// an empty prediction against a non-empty gold scores 0.
Prf evidence_scores(const ProofGraph& pred, const ProofGraph& gold);

/// Precision/recall/F1 over reasoning steps. A step's canonical form is
/// the set of its premises' leaf closures, so intermediate numbering and
/// premise order never matter; matching is one-to-one.
Prf proof_scores(const ProofGraph& pred, const ProofGraph& gold);

struct GedOptions {
    /// Max |N|+|E| per graph for the exact search.
    int exact_limit = 30;
    bool allow_approximate = false;
};

struct GedResult {
    int cost = 0;
    bool approximate = false;
};

/// Minimal edit cost between the two graphs under unit-cost node
/// insert/delete/substitute and edge insert/delete. Substituting a node is
/// free only between equal labels: equal sentence ids, hypothesis against
/// hypothesis, or intermediates with the same leaf closure. Exact via
/// best-first search over partial node assignments; above the size limit
/// either throws MetricError(TooLarge) or, when allowed, falls back to a
/// greedy upper bound flagged approximate.
GedResult graph_edit_distance(const ProofGraph& a, const ProofGraph& b,
                              const GedOptions& options = {});

/// 1 - delta / max(|N_p|+|E_p|, |N_g|+|E_g|), clamped to [0, 1]; two empty
/// graphs are identical (1.0).
double graph_similarity(const ProofGraph& pred, const ProofGraph& gold,
                        const GedOptions& options = {});

/// All metrics for one instance.
MetricReport score_graphs(const ProofGraph& pred, const ProofGraph& gold,
                          const GedOptions& options = {});

/// Field-wise arithmetic mean. Throws MetricError(EmptyList).
MetricReport aggregate(const std::vector<MetricReport>& reports);

}  // namespace entail
