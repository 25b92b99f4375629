#include "entail/mock.hpp"

#include <algorithm>

#include "entail/parse.hpp"
#include "entail/util.hpp"

namespace entail {

void ScriptedClient::add_rule(std::string substring,
                              std::vector<std::string> texts) {
    rules_.push_back({std::move(substring), std::move(texts)});
}

void ScriptedClient::set_default(std::vector<std::string> texts) {
    default_texts_ = std::move(texts);
}

LlmReply ScriptedClient::complete(const ChatExchange& exchange) {
    ++calls_;
    std::string flat = exchange.flatten();
    const std::vector<std::string>* texts = nullptr;
    for (const auto& rule : rules_) {
        if (flat.find(rule.substring) != std::string::npos) {
            texts = &rule.texts;
            break;
        }
    }
    if (!texts && default_texts_) texts = &*default_texts_;
    if (!texts) {
        throw LlmError(LlmError::Code::BadResponse,
                       "no scripted reply matches the prompt");
    }
    LlmReply reply;
    for (int i = 0; i < exchange.params.n_samples; ++i) {
        reply.texts.push_back((*texts)[i % texts->size()]);
    }
    return reply;
}

namespace {

std::string_view first_line(std::string_view text) {
    return text.substr(0, text.find('\n'));
}

std::string_view after_prefix(std::string_view line, std::string_view prefix) {
    return line.substr(prefix.size());
}

}  // namespace

ParsedPrompt parse_prompt(const ChatExchange& exchange) {
    ParsedPrompt out;
    std::string flat = exchange.flatten();
    std::string_view system = first_line(flat);
    if (system.find("select a small set of candidates") != std::string::npos) {
        out.kind = ParsedPrompt::Kind::Retrieve;
    } else if (system.find("Provide me several sentences") !=
               std::string::npos) {
        out.kind = ParsedPrompt::Kind::Propose;
    } else if (system.find("Evaluate whether") != std::string::npos) {
        out.kind = ParsedPrompt::Kind::Evaluate;
    } else if (system.find("still missing") != std::string::npos ||
               system.find("next step of the reasoning") != std::string::npos) {
        out.kind = ParsedPrompt::Kind::Hint;
    } else if (system.find("complete proof") != std::string::npos) {
        out.kind = ParsedPrompt::Kind::Guess;
    }

    // Only the target block after the last [Question] marker matters; the
    // demonstration blocks above it belong to other instances.
    std::size_t target = flat.rfind("[Question]");
    std::string_view body =
        target == std::string::npos ? std::string_view(flat)
                                    : std::string_view(flat).substr(target);
    for (std::string_view raw : split(body, '\n')) {
        std::string_view line = trim(raw);
        if (line.rfind("Hypothesis: ", 0) == 0) {
            out.hypothesis = std::string(after_prefix(line, "Hypothesis: "));
        } else if (line.rfind("Possible Next Reasoning: ", 0) == 0) {
            try {
                out.candidate = parse_step_line(
                    after_prefix(line, "Possible Next Reasoning: "));
            } catch (const ProofError&) {
            }
        } else if (line.rfind("sent", 0) == 0 || line.rfind("int", 0) == 0) {
            std::size_t colon = line.find(':');
            if (colon == std::string_view::npos) continue;
            NodeId id;
            try {
                id = parse_node(line.substr(0, colon));
            } catch (const ProofError&) {
                continue;
            }
            if (id.is_sentence()) {
                out.sentences.insert(id.index);
            } else if (id.is_intermediate()) {
                out.derived.emplace_back(
                    id.index, std::string(trim(line.substr(colon + 1))));
            }
        }
    }
    return out;
}

OracleClient::OracleClient(const std::vector<Instance>& instances) {
    for (const auto& inst : instances) {
        if (!inst.gold) continue;
        GoldView view;
        view.gold = *inst.gold;
        std::string leaves;
        for (int i : view.gold.sentence_indices()) {
            if (!leaves.empty()) leaves += ", ";
            leaves += "sent" + std::to_string(i);
        }
        view.sorted_leaves = std::move(leaves);
        by_hypothesis_.emplace(inst.hypothesis, std::move(view));
    }
}

const OracleClient::GoldView& OracleClient::lookup(
    const std::string& hypothesis) const {
    auto it = by_hypothesis_.find(hypothesis);
    if (it == by_hypothesis_.end()) {
        throw LlmError(LlmError::Code::BadResponse,
                       "oracle has no gold proof for: " + hypothesis);
    }
    return it->second;
}

std::vector<std::string> OracleClient::extendable_steps(
    const GoldView& view, const ParsedPrompt& p) {
    // Map prompt intermediates back to gold nodes by conclusion text; the
    // oracle's own proposals carry gold texts verbatim, so this resolves
    // every intermediate it previously revealed.
    std::map<NodeId, int> gold_to_prompt;
    std::set<NodeId> derived_gold;
    int max_prompt_index = 0;
    for (const auto& [index, text] : p.derived) {
        max_prompt_index = std::max(max_prompt_index, index);
        for (const auto& step : view.gold.steps()) {
            if (!step.conclusion.is_intermediate()) continue;
            if (step.conclusion_text == text) {
                gold_to_prompt[step.conclusion] = index;
                derived_gold.insert(step.conclusion);
                break;
            }
        }
    }
    std::vector<std::string> out;
    for (const auto& step : view.gold.steps()) {
        if (derived_gold.count(step.conclusion)) continue;
        bool available = true;
        for (const auto& premise : step.premises) {
            if (premise.is_sentence()) {
                available = available && p.sentences.count(premise.index) > 0;
            } else {
                available = available && derived_gold.count(premise) > 0;
            }
        }
        if (!available) continue;
        ProofStep renamed = step;
        for (auto& premise : renamed.premises) {
            if (premise.is_intermediate()) {
                premise = NodeId::intermediate(gold_to_prompt.at(premise));
            }
        }
        if (renamed.conclusion.is_intermediate()) {
            renamed.conclusion = NodeId::intermediate(max_prompt_index + 1);
        }
        out.push_back(serialize_step_line(renamed));
    }
    return out;
}

bool OracleClient::gold_consistent(const GoldView& view,
                                   const ParsedPrompt& p) {
    if (!p.candidate) return false;
    std::map<int, NodeId> prompt_to_gold;
    for (const auto& [index, text] : p.derived) {
        for (const auto& step : view.gold.steps()) {
            if (step.conclusion.is_intermediate() &&
                step.conclusion_text == text) {
                prompt_to_gold[index] = step.conclusion;
                break;
            }
        }
    }
    std::set<NodeId> premises;
    for (const auto& premise : p.candidate->premises) {
        if (premise.is_sentence()) {
            premises.insert(premise);
        } else {
            auto it = prompt_to_gold.find(premise.index);
            if (it == prompt_to_gold.end()) return false;
            premises.insert(it->second);
        }
    }
    for (const auto& step : view.gold.steps()) {
        if (step.conclusion.kind == p.candidate->conclusion.kind &&
            step.premise_set() == premises) {
            return true;
        }
    }
    return false;
}

std::string OracleClient::answer(const ParsedPrompt& p, const GoldView& view,
                                 std::size_t sample_index) const {
    switch (p.kind) {
        case ParsedPrompt::Kind::Guess:
            return serialize_chain(view.gold);
        case ParsedPrompt::Kind::Retrieve:
            return "Retrieval sentences (at least 3): " + view.sorted_leaves;
        case ParsedPrompt::Kind::Propose: {
            auto steps = extendable_steps(view, p);
            if (steps.empty()) return "Finish";
            return steps[sample_index % steps.size()];
        }
        case ParsedPrompt::Kind::Evaluate:
            return gold_consistent(view, p) ? "Evaluate: 99" : "Evaluate: 10";
        case ParsedPrompt::Kind::Hint:
            return "Missing: What is missing is the remaining part of the "
                   "proof of the hypothesis.";
        case ParsedPrompt::Kind::Unknown:
            break;
    }
    throw LlmError(LlmError::Code::BadResponse, "unrecognized prompt");
}

LlmReply OracleClient::complete(const ChatExchange& exchange) {
    ++calls_;
    ParsedPrompt p = parse_prompt(exchange);
    const GoldView& view = lookup(p.hypothesis);
    LlmReply reply;
    for (int i = 0; i < exchange.params.n_samples; ++i) {
        reply.texts.push_back(answer(p, view, static_cast<std::size_t>(i)));
    }
    return reply;
}

NoisyOracleClient::NoisyOracleClient(const std::vector<Instance>& instances,
                                     std::uint64_t seed, double p_gold)
    : OracleClient(instances), rng_(seed), p_gold_(p_gold) {}

std::string NoisyOracleClient::distractor(
    const ParsedPrompt& p, const GoldView& view,
    const std::vector<std::string>& gold_steps) {
    std::vector<int> pool(p.sentences.begin(), p.sentences.end());
    int max_prompt_index = 0;
    std::map<int, NodeId> prompt_to_gold;
    for (const auto& [index, text] : p.derived) {
        max_prompt_index = std::max(max_prompt_index, index);
        for (const auto& step : view.gold.steps()) {
            if (step.conclusion.is_intermediate() &&
                step.conclusion_text == text) {
                prompt_to_gold[index] = step.conclusion;
            }
        }
    }
    std::set<std::set<NodeId>> gold_sets;
    for (const auto& step : view.gold.steps()) {
        gold_sets.insert(step.premise_set());
    }
    // A twin of a gold deduction would not distract anyone; redraw until
    // the step is structurally off-proof.
    for (int attempt = 0; attempt < 8 && !pool.empty(); ++attempt) {
        ProofStep step;
        int pick = pool[rng_() % pool.size()];
        if (!p.derived.empty()) {
            // Prefer growing from the newest intermediate: exactly the
            // proposals structure-aware pruning is meant to push back on.
            step.premises = {NodeId::intermediate(p.derived.back().first),
                             NodeId::sentence(pick)};
        } else {
            int second = pool[rng_() % pool.size()];
            if (second == pick) continue;
            step.premises = {NodeId::sentence(pick), NodeId::sentence(second)};
        }
        std::set<NodeId> resolved;
        bool fully_resolved = true;
        for (const auto& premise : step.premises) {
            if (premise.is_sentence()) {
                resolved.insert(premise);
            } else if (auto it = prompt_to_gold.find(premise.index);
                       it != prompt_to_gold.end()) {
                resolved.insert(it->second);
            } else {
                fully_resolved = false;  // hangs off a junk node: off-proof
            }
        }
        if (fully_resolved && gold_sets.count(resolved)) continue;
        step.conclusion = NodeId::intermediate(max_prompt_index + 1);
        step.conclusion_text = "an unrelated intermediate conclusion";
        return serialize_step_line(step);
    }
    // Too few sentences to stray from the proof.
    return gold_steps.empty() ? "Finish" : gold_steps.front();
}

LlmReply NoisyOracleClient::complete(const ChatExchange& exchange) {
    ++calls_;
    ParsedPrompt p = parse_prompt(exchange);
    const GoldView& view = lookup(p.hypothesis);
    LlmReply reply;
    // Explicit 53-bit draw; distribution adaptors differ across standard
    // libraries and these streams must replay identically everywhere.
    auto draw = [this] { return (rng_() >> 11) * 0x1.0p-53; };
    if (p.kind == ParsedPrompt::Kind::Evaluate) {
        // A noisy judge: gold steps stay in the Surely band, off-proof
        // steps land anywhere up to it instead of being found out. A step
        // that concludes the hypothesis is the one call that is easy.
        for (int i = 0; i < exchange.params.n_samples; ++i) {
            int score;
            if (gold_consistent(view, p)) {
                bool closing =
                    p.candidate && p.candidate->conclusion.is_hypothesis();
                score = closing ? 99 : 85 + static_cast<int>(rng_() % 15);
            } else {
                score = 55 + static_cast<int>(rng_() % 45);
            }
            reply.texts.push_back("Evaluate: " + std::to_string(score));
        }
        return reply;
    }
    if (p.kind != ParsedPrompt::Kind::Propose) {
        for (int i = 0; i < exchange.params.n_samples; ++i) {
            reply.texts.push_back(answer(p, view, static_cast<std::size_t>(i)));
        }
        return reply;
    }
    auto gold_steps = extendable_steps(view, p);
    std::size_t next_gold = 0;
    for (int i = 0; i < exchange.params.n_samples; ++i) {
        if (!gold_steps.empty() && draw() < p_gold_) {
            reply.texts.push_back(gold_steps[next_gold++ % gold_steps.size()]);
        } else {
            reply.texts.push_back(distractor(p, view, gold_steps));
        }
    }
    return reply;
}

}  // namespace entail
