#include "entail/search.hpp"

#include <algorithm>
#include <deque>

#include "entail/extract.hpp"
#include "entail/parse.hpp"

namespace entail {

std::string_view pruning_mode_name(PruningMode mode) {
    switch (mode) {
        case PruningMode::Div:
            return "div";
        case PruningMode::ReuseIc:
            return "reuse_ic";
        case PruningMode::Off:
            return "off";
    }
    return "?";
}

std::string_view hint_mode_name(HintMode mode) {
    switch (mode) {
        case HintMode::Hint:
            return "hint";
        case HintMode::WhatsNext:
            return "whats_next";
        case HintMode::Off:
            return "off";
    }
    return "?";
}

PruningMode pruning_mode_from(std::string_view name) {
    if (name == "div") return PruningMode::Div;
    if (name == "reuse_ic") return PruningMode::ReuseIc;
    if (name == "off") return PruningMode::Off;
    throw std::invalid_argument("unknown pruning mode: " + std::string(name));
}

HintMode hint_mode_from(std::string_view name) {
    if (name == "hint") return HintMode::Hint;
    if (name == "whats_next") return HintMode::WhatsNext;
    if (name == "off") return HintMode::Off;
    throw std::invalid_argument("unknown hint mode: " + std::string(name));
}

double SearchConfig::temperature_for(PromptKind kind) const {
    auto it = temperature.find(std::string(prompt_kind_name(kind)));
    if (it != temperature.end()) return it->second;
    return kind == PromptKind::Evaluate ? 0.0 : 0.7;
}

nlohmann::json TraceEvent::to_json() const {
    nlohmann::json j{{"event", event}, {"trace_id", trace_id}, {"iter", iter}};
    if (!data.is_null()) j["data"] = data;
    return j;
}

namespace {

int premise_index_sum(const ProofStep& step) {
    int sum = 0;
    for (const auto& p : step.premises) sum += p.index;
    return sum;
}

bool uses_intermediate(const ProofStep& step) {
    return std::any_of(step.premises.begin(), step.premises.end(),
                       [](const NodeId& p) { return p.is_intermediate(); });
}

bool touches(const ProofStep& step, const std::set<NodeId>& nodes) {
    return std::any_of(step.premises.begin(), step.premises.end(),
                       [&](const NodeId& p) { return nodes.count(p) > 0; });
}

}  // namespace

PruneOutcome prune(const std::vector<ScoredStep>& candidates,
                   const ProofGraph& current,
                   const std::set<NodeId>& prev_new_nodes,
                   const SearchConfig& cfg) {
    PruneOutcome out;
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         if (candidates[a].score != candidates[b].score) {
                             return candidates[a].score > candidates[b].score;
                         }
                         return premise_index_sum(candidates[a].step) <
                                premise_index_sum(candidates[b].step);
                     });

    std::vector<ScoredStep> kept;
    const std::size_t beam = static_cast<std::size_t>(std::max(1, cfg.beam));
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const ScoredStep& c = candidates[order[rank]];
        if (rank < beam) {
            kept.push_back(c);
        } else {
            out.dropped.emplace_back(serialize_step_line(c.step), "top-k");
        }
    }

    // Stages below never empty a non-empty list; the best survivor of the
    // stage's input is retained instead.
    auto apply_stage = [&](auto predicate_delete, const char* rule) {
        if (kept.empty()) return;
        std::vector<ScoredStep> next;
        std::vector<std::string> deleted;
        for (const auto& c : kept) {
            if (predicate_delete(c.step)) {
                deleted.push_back(serialize_step_line(c.step));
            } else {
                next.push_back(c);
            }
        }
        if (next.empty()) {
            out.guard_fired = true;
            next.push_back(kept.front());
            deleted.erase(
                std::find(deleted.begin(), deleted.end(),
                          serialize_step_line(kept.front().step)));
        }
        for (auto& d : deleted) out.dropped.emplace_back(std::move(d), rule);
        kept = std::move(next);
    };

    if (current.size() == 1) {
        apply_stage([](const ProofStep& s) { return uses_intermediate(s); },
                    "alg3-literal");
    }
    switch (cfg.pruning) {
        case PruningMode::Div:
            apply_stage(
                [&](const ProofStep& s) { return touches(s, prev_new_nodes); },
                "div");
            break;
        case PruningMode::ReuseIc:
            apply_stage(
                [&](const ProofStep& s) { return !touches(s, prev_new_nodes); },
                "reuse-ic");
            break;
        case PruningMode::Off:
            break;
    }
    out.kept = std::move(kept);
    return out;
}

ProofGraph extend(const ProofGraph& graph, const ProofStep& step) {
    ProofStep adjusted = step;
    if (adjusted.conclusion.is_intermediate()) {
        adjusted.conclusion =
            NodeId::intermediate(graph.max_intermediate_index() + 1);
    }
    return graph.extended(adjusted);
}

bool reached_hypothesis(const ProofStep& step) {
    return step.conclusion.is_hypothesis();
}

namespace {

// Budget- and trace-aware wrapper; all engine calls go through here.
class EngineClient : public LlmClient {
public:
    EngineClient(LlmClient& inner, CallBudget* budget)
        : inner_(inner), budget_(budget) {}

    LlmReply complete(const ChatExchange& exchange) override {
        if (budget_) {
            if (calls_ >= budget_->per_instance) {
                throw SearchError(SearchError::Code::BudgetExceeded,
                                  "per-instance LLM call budget exhausted");
            }
            int used = budget_->total_used->fetch_add(1);
            if (used >= budget_->total) {
                throw SearchError(SearchError::Code::BudgetExceeded,
                                  "total LLM call budget exhausted");
            }
        }
        ++calls_;
        return inner_.complete(exchange);
    }

    int calls() const { return calls_; }

private:
    LlmClient& inner_;
    CallBudget* budget_;
    int calls_ = 0;
};

struct Engine {
    const Instance& inst;
    const std::vector<Demonstration>& db;
    const SearchConfig& cfg;
    EngineClient& client;
    StructuralEncoder encoder;
    std::vector<TraceEvent>& trace;

    ChatParams params(PromptKind kind, int n) const {
        return {cfg.model, cfg.temperature_for(kind), cfg.max_tokens, n};
    }

    void log(std::string event, const std::string& trace_id, int iter,
             nlohmann::json data = {}) {
        trace.push_back(
            {std::move(event), trace_id, iter, std::move(data)});
    }

    std::vector<Demonstration> demonstrations(const GuessedGraph& merged,
                                              const SearchState& state) {
        auto ranked = rank_demonstrations(inst, db, merged, encoder);
        std::vector<Demonstration> out;
        nlohmann::json chosen = nlohmann::json::array();
        for (const auto& r : ranked) {
            if (static_cast<int>(out.size()) >= cfg.demos) break;
            out.push_back(db[r.db_index]);
            chosen.push_back(
                {{"id", db[r.db_index].id()}, {"sim", r.score}});
        }
        log("demo-selected", state.trace_id, state.iter,
            {{"demos", std::move(chosen)}});
        return out;
    }

    std::set<int> retrieve(const SearchState& state,
                           const std::vector<Demonstration>& demos) {
        PromptExtras extras;
        extras.hint = state.hint;
        ChatExchange x =
            render_prompt(PromptKind::Retrieve, inst, demos, extras,
                          params(PromptKind::Retrieve, cfg.retrieval_samples));
        LlmReply reply = client.complete(x);
        std::set<int> retained;
        for (const auto& text : reply.texts) {
            try {
                auto ids = extract_retrieval(text, inst.context);
                retained.insert(ids.begin(), ids.end());
            } catch (const LlmError&) {
                // failed sample; the union of the others still counts
            }
        }
        bool fallback = retained.empty();
        if (fallback) {
            for (const auto& [i, _] : inst.context) retained.insert(i);
        }
        log("retrieved", state.trace_id, state.iter,
            {{"sentences", retained}, {"fallback", fallback}});
        return retained;
    }

    std::vector<std::pair<int, std::string>> derived_list(
        const ProofGraph& graph) const {
        std::vector<std::pair<int, std::string>> out;
        for (const auto& step : graph.steps()) {
            if (step.conclusion.is_intermediate()) {
                out.emplace_back(step.conclusion.index, step.conclusion_text);
            }
        }
        return out;
    }

    bool valid_candidate(const ProofStep& step, const ProofGraph& graph,
                         const SearchState& state) {
        for (const auto& p : step.premises) {
            if (p.is_sentence() && !inst.context.count(p.index)) {
                log("proposal-rejected", state.trace_id, state.iter,
                    {{"step", serialize_step_line(step)},
                     {"reason", "unknown sentence"}});
                return false;
            }
            if (p.is_intermediate() && !graph.concludes(p)) {
                log("proposal-rejected", state.trace_id, state.iter,
                    {{"step", serialize_step_line(step)},
                     {"reason", "unknown intermediate"}});
                return false;
            }
        }
        for (const auto& existing : graph.steps()) {
            if (existing.premise_set() == step.premise_set()) {
                log("proposal-rejected", state.trace_id, state.iter,
                    {{"step", serialize_step_line(step)},
                     {"reason", "already derived"}});
                return false;
            }
        }
        return true;
    }

    std::pair<std::vector<ProofStep>, bool> propose(
        const SearchState& state, const std::set<int>& retained,
        const std::vector<Demonstration>& demos) {
        PromptExtras extras;
        extras.retained = std::vector<int>(retained.begin(), retained.end());
        extras.derived = derived_list(state.graph);
        ChatExchange x =
            render_prompt(PromptKind::Propose, inst, demos, extras,
                          params(PromptKind::Propose, cfg.proposals));
        LlmReply reply = client.complete(x);
        std::vector<ProofStep> candidates;
        bool finish = false;
        nlohmann::json proposed = nlohmann::json::array();
        for (const auto& text : reply.texts) {
            ExtractedSteps extracted = extract_steps(text);
            finish = finish || extracted.finish;
            for (auto& step : extracted.steps) {
                proposed.push_back(serialize_step_line(step));
                bool duplicate = std::any_of(
                    candidates.begin(), candidates.end(),
                    [&](const ProofStep& c) {
                        return c.premise_set() == step.premise_set() &&
                               c.conclusion.kind == step.conclusion.kind;
                    });
                if (!duplicate && valid_candidate(step, state.graph, state)) {
                    candidates.push_back(std::move(step));
                }
            }
        }
        log("proposed", state.trace_id, state.iter,
            {{"steps", std::move(proposed)}, {"finish", finish}});
        return {std::move(candidates), finish};
    }

    int evaluate(const SearchState& state, const ProofStep& candidate,
                 const std::set<int>& retained,
                 const std::vector<Demonstration>& demos) {
        PromptExtras extras;
        extras.retained = std::vector<int>(retained.begin(), retained.end());
        extras.derived = derived_list(state.graph);
        extras.candidate = candidate;
        ChatExchange x = render_prompt(PromptKind::Evaluate, inst, demos,
                                       extras, params(PromptKind::Evaluate, 1));
        LlmReply reply = client.complete(x);
        int score = cfg.default_score;
        if (!reply.texts.empty()) {
            try {
                score = extract_score(reply.texts.front());
            } catch (const LlmError&) {
                // unscorable reply; fall through to the neutral default
            }
        }
        log("evaluated", state.trace_id, state.iter,
            {{"step", serialize_step_line(candidate)}, {"score", score}});
        return score;
    }

    std::string hint_for(const SearchState& state, const ProofStep& step,
                         const std::vector<Demonstration>& demos) {
        if (cfg.hint_mode == HintMode::Off) return "";
        PromptExtras extras;
        extras.whats_next = cfg.hint_mode == HintMode::WhatsNext;
        NodeId conclusion =
            step.conclusion.is_intermediate()
                ? NodeId::intermediate(state.graph.max_intermediate_index() + 1)
                : step.conclusion;
        extras.conclusion = conclusion.str() + ": " + step.conclusion_text;
        ChatExchange x = render_prompt(PromptKind::Hint, inst, demos, extras,
                                       params(PromptKind::Hint, 1));
        LlmReply reply = client.complete(x);
        std::string hint =
            reply.texts.empty() ? "" : extract_hint(reply.texts.front());
        log("hint", state.trace_id, state.iter, {{"hint", hint}});
        return hint;
    }
};

}  // namespace

SearchOutcome run_search(const Instance& inst,
                         const std::vector<Demonstration>& db,
                         LlmClient& client, const SearchConfig& cfg,
                         CallBudget* budget) {
    SearchOutcome out;
    EngineClient counted(client, budget);
    Engine engine{inst,
                  db,
                  cfg,
                  counted,
                  StructuralEncoder({cfg.content_channel}),
                  out.trace};
    engine.log("search-start", "s0", 0,
               {{"instance", inst.id},
                {"pruning", std::string(pruning_mode_name(cfg.pruning))},
                {"max_iterations", cfg.max_iterations()}});

    GuessedGraph initial =
        guess_graph(std::nullopt, ProofGraph{}, counted, inst,
                    engine.params(PromptKind::GuessProof, 1));
    engine.log("guessed", "s0", 0,
               {{"proof", serialize_chain(initial.graph)}});

    std::deque<SearchState> frontier;
    SearchState cur;
    cur.trace_id = "s0";
    int next_state = 1;
    int selected_level = 0;

    for (;;) {
        GuessedGraph merged =
            guess_graph(initial, cur.graph, counted, inst, {});
        auto demos = engine.demonstrations(merged, cur);
        std::set<int> retained = engine.retrieve(cur, demos);
        auto [candidates, finish] = engine.propose(cur, retained, demos);

        if (candidates.empty() && finish && cur.last_step) {
            // A bare "Finish" claims the previous conclusion proves the
            // hypothesis; close the graph with that step.
            ProofStep closing;
            closing.premises = {cur.last_step->conclusion};
            closing.conclusion = NodeId::hypothesis();
            ProofGraph done = cur.graph.extended(closing);
            engine.log("terminated", cur.trace_id, cur.iter,
                       {{"reason", "finish-claim"},
                        {"proof", serialize_chain(done)}});
            out.proof = std::move(done);
            break;
        }

        std::vector<ScoredStep> scored;
        for (const auto& candidate : candidates) {
            scored.push_back(
                {candidate,
                 engine.evaluate(cur, candidate, retained, demos)});
        }
        std::set<NodeId> prev_new;
        if (cur.last_step) prev_new.insert(cur.last_step->conclusion);
        PruneOutcome pruned = prune(scored, cur.graph, prev_new, cfg);
        {
            nlohmann::json dropped = nlohmann::json::array();
            for (const auto& [step, rule] : pruned.dropped) {
                dropped.push_back({{"step", step}, {"rule", rule}});
            }
            nlohmann::json kept = nlohmann::json::array();
            for (const auto& k : pruned.kept) {
                kept.push_back(serialize_step_line(k.step));
            }
            engine.log("pruned", cur.trace_id, cur.iter,
                       {{"kept", std::move(kept)},
                        {"dropped", std::move(dropped)},
                        {"guard", pruned.guard_fired}});
        }

        cur.iter += 1;
        bool finished = false;
        for (const auto& survivor : pruned.kept) {
            std::string hint = engine.hint_for(cur, survivor.step, demos);
            ProofGraph grown;
            try {
                grown = extend(cur.graph, survivor.step);
            } catch (const ProofError& e) {
                engine.log("extend-failed", cur.trace_id, cur.iter,
                           {{"step", serialize_step_line(survivor.step)},
                            {"error", e.what()}});
                continue;
            }
            engine.log(
                "extended", cur.trace_id, cur.iter,
                {{"step", serialize_step_line(grown.steps().back())},
                 {"proposed_as", serialize_step_line(survivor.step)}});
            if (reached_hypothesis(grown.steps().back())) {
                engine.log("terminated", cur.trace_id, cur.iter,
                           {{"reason", "hypothesis-reached"},
                            {"proof", serialize_chain(grown)}});
                out.proof = std::move(grown);
                finished = true;
                break;
            }
            if (cur.iter > cfg.max_iterations()) {
                engine.log("state-dropped", cur.trace_id, cur.iter,
                           {{"reason", "iteration-cap"}});
                continue;
            }
            SearchState child;
            child.graph = std::move(grown);
            child.hint = std::move(hint);
            child.last_step = child.graph.steps().back();
            child.score = survivor.score;
            child.iter = cur.iter;
            child.retained_sentences = retained;
            child.trace_id = "s" + std::to_string(next_state++);
            engine.log("state-enqueued", child.trace_id, child.iter,
                       {{"parent", cur.trace_id},
                        {"score", child.score}});
            frontier.push_back(std::move(child));
            ++out.explored_states;
        }
        if (finished) break;
        if (frontier.empty()) {
            engine.log("terminated", cur.trace_id, cur.iter,
                       {{"reason", "frontier-exhausted"}});
            break;
        }
        // Entering a new iteration level: only the `beam` most promising
        // states of the level are expanded. By BFS order the frontier holds
        // exactly that level's cohort at this point.
        if (frontier.front().iter > selected_level) {
            selected_level = frontier.front().iter;
            if (static_cast<int>(frontier.size()) > cfg.beam) {
                std::vector<std::size_t> order(frontier.size());
                for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
                std::stable_sort(order.begin(), order.end(),
                                 [&](std::size_t a, std::size_t b) {
                                     return frontier[a].score >
                                            frontier[b].score;
                                 });
                std::set<std::size_t> keep(
                    order.begin(),
                    order.begin() + static_cast<std::size_t>(cfg.beam));
                std::deque<SearchState> next;
                for (std::size_t i = 0; i < frontier.size(); ++i) {
                    if (keep.count(i)) {
                        next.push_back(std::move(frontier[i]));
                    } else {
                        engine.log("state-dropped", frontier[i].trace_id,
                                   frontier[i].iter,
                                   {{"reason", "level-cap"},
                                    {"score", frontier[i].score}});
                    }
                }
                frontier = std::move(next);
            }
        }
        cur = std::move(frontier.front());
        frontier.pop_front();
    }
    out.llm_calls = counted.calls();
    return out;
}

}  // namespace entail
