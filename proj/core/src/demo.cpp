#include "entail/demo.hpp"

#include <algorithm>

#include "entail/parse.hpp"
#include "entail/prompts.hpp"

namespace entail {

GuessedGraph fallback_guess(const Instance& inst) {
    std::vector<int> ids = inst.context_indices();
    if (ids.size() > 4) ids.resize(4);
    std::vector<ProofStep> steps;
    int next_int = 1;
    for (std::size_t i = 0; i < ids.size(); i += 2) {
        ProofStep step;
        step.premises.push_back(NodeId::sentence(ids[i]));
        if (i + 1 < ids.size()) {
            step.premises.push_back(NodeId::sentence(ids[i + 1]));
        }
        step.conclusion = NodeId::intermediate(next_int++);
        steps.push_back(std::move(step));
    }
    GuessedGraph out;
    out.graph = ProofGraph::from_steps(std::move(steps));
    out.provenance.assign(out.graph.size(), StepProvenance::Guessed);
    return out;
}

namespace {

GuessedGraph initial_guess(LlmClient& llm, const Instance& inst,
                           const ChatParams& params) {
    try {
        ChatExchange x = render_prompt(PromptKind::GuessProof, inst, {},
                                       PromptExtras{}, params);
        LlmReply reply = llm.complete(x);
        if (reply.texts.empty()) return fallback_guess(inst);
        std::string_view text = reply.texts.front();
        std::size_t marker = text.rfind("Proof:");
        if (marker != std::string_view::npos) {
            text = text.substr(marker + 6);
        }
        GuessedGraph out;
        out.graph = parse_proof_chain(text);
        if (out.graph.empty()) return fallback_guess(inst);
        out.provenance.assign(out.graph.size(), StepProvenance::Guessed);
        return out;
    } catch (const ProofError&) {
        return fallback_guess(inst);
    } catch (const LlmError&) {
        return fallback_guess(inst);
    }
}

GuessedGraph merge_guess(const GuessedGraph& prior,
                         const ProofGraph& constructed) {
    GuessedGraph out;
    std::vector<ProofStep> steps = constructed.steps();
    out.provenance.assign(steps.size(), StepProvenance::Constructed);

    std::set<NodeId> concluded;
    std::vector<std::set<NodeId>> built_premises;
    for (const auto& step : steps) {
        concluded.insert(step.conclusion);
        built_premises.push_back(step.premise_set());
    }
    for (const auto& step : prior.graph.steps()) {
        // A constructed step supersedes the guess for the same conclusion,
        // or for the same deduction under a different numbering.
        if (concluded.count(step.conclusion)) continue;
        if (std::find(built_premises.begin(), built_premises.end(),
                      step.premise_set()) != built_premises.end()) {
            continue;
        }
        bool derivable = true;
        for (const auto& premise : step.premises) {
            if (!premise.is_sentence() && !concluded.count(premise)) {
                derivable = false;
                break;
            }
        }
        if (!derivable) continue;
        steps.push_back(step);
        concluded.insert(step.conclusion);
        out.provenance.push_back(StepProvenance::Guessed);
    }
    try {
        out.graph = ProofGraph::from_steps(std::move(steps));
    } catch (const ProofError&) {
        out.graph = constructed;
        out.provenance.assign(constructed.size(),
                              StepProvenance::Constructed);
    }
    return out;
}

}  // namespace

GuessedGraph guess_graph(const std::optional<GuessedGraph>& prior,
                         const ProofGraph& constructed, LlmClient& llm,
                         const Instance& inst, const ChatParams& params) {
    if (!prior) return initial_guess(llm, inst, params);
    return merge_guess(*prior, constructed);
}

std::vector<RankedDemo> rank_demonstrations(const Instance& inst,
                                            const std::vector<Demonstration>& db,
                                            const GuessedGraph& guessed,
                                            const GraphEncoder& encoder) {
    GraphEmbedding target = encoder.encode(guessed.graph, inst.hypothesis);
    std::vector<RankedDemo> ranked;
    for (std::size_t i = 0; i < db.size(); ++i) {
        if (db[i].id() == inst.id) continue;  // no self-retrieval
        GraphEmbedding emb =
            db[i].embedding ? *db[i].embedding
                            : encoder.encode(db[i].gold(),
                                             db[i].instance.hypothesis);
        ranked.push_back({i, similarity(target, emb)});
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](const RankedDemo& a, const RankedDemo& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return db[a.db_index].id() < db[b.db_index].id();
                     });
    return ranked;
}

std::vector<Demonstration> search_demonstrations(
    const Instance& inst, const std::vector<Demonstration>& db,
    const GuessedGraph& guessed, int k, const GraphEncoder& encoder) {
    auto ranked = rank_demonstrations(inst, db, guessed, encoder);
    std::vector<Demonstration> out;
    for (const auto& r : ranked) {
        if (static_cast<int>(out.size()) >= k) break;
        out.push_back(db[r.db_index]);
    }
    return out;
}

}  // namespace entail
