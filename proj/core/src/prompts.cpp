#include "entail/prompts.hpp"

#include <algorithm>

#include "entail/parse.hpp"
#include "prompts_data.hpp"

namespace entail {

namespace {

std::string substitute(std::string_view tmpl,
                       const std::map<std::string, std::string>& fields) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        std::size_t open = tmpl.find('{', pos);
        if (open == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        std::size_t close = tmpl.find('}', open);
        auto it = close == std::string_view::npos
                      ? fields.end()
                      : fields.find(std::string(
                            tmpl.substr(open + 1, close - open - 1)));
        if (it == fields.end()) {
            out.append(tmpl.substr(pos, open + 1 - pos));
            pos = open + 1;
            continue;
        }
        out.append(tmpl.substr(pos, open - pos));
        out.append(it->second);
        pos = close + 1;
    }
    return out;
}

std::string sentence_lines(const Instance& inst,
                           const std::vector<int>& indices) {
    std::string out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i > 0) out += "\n";
        out += "sent" + std::to_string(indices[i]) + ": ";
        auto it = inst.context.find(indices[i]);
        if (it != inst.context.end()) out += it->second;
    }
    return out;
}

std::string premise_block(const Instance& inst, const std::vector<int>& ids,
                          const std::vector<std::pair<int, std::string>>&
                              derived) {
    std::string out = sentence_lines(inst, ids);
    for (const auto& [index, text] : derived) {
        if (!out.empty()) out += "\n";
        out += "int" + std::to_string(index) + ": " + text;
    }
    return out;
}

std::vector<int> gold_leaf_indices(const Demonstration& demo) {
    std::vector<int> out;
    for (int i : demo.gold().sentence_indices()) out.push_back(i);
    return out;
}

std::string retrieved_list(const std::vector<int>& indices) {
    std::string out;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (i > 0) out += ", ";
        out += "sent" + std::to_string(indices[i]);
    }
    return out;
}

std::string demo_conclusion_line(const Demonstration& demo) {
    const ProofStep& first = demo.gold().steps().front();
    return first.conclusion.str() + ": " + first.conclusion_text;
}

std::string demo_missing_text(const Demonstration& demo,
                              const PromptExtras& extras) {
    auto it = extras.demo_missing.find(demo.id());
    if (it != extras.demo_missing.end()) return it->second;
    const auto& steps = demo.gold().steps();
    if (steps.size() >= 2 && !steps[1].conclusion_text.empty()) {
        return "What is missing is to specifically state that " +
               steps[1].conclusion_text + ".";
    }
    return "What is missing is the link from the intermediate conclusion to "
           "the hypothesis.";
}

std::vector<int> demo_premise_indices(const Demonstration& demo,
                                      const PromptExtras& extras) {
    auto it = extras.demo_premises.find(demo.id());
    if (it != extras.demo_premises.end()) {
        std::vector<int> ids = it->second;
        std::sort(ids.begin(), ids.end());
        return ids;
    }
    return gold_leaf_indices(demo);
}

std::string render_demo(PromptKind kind, const Demonstration& demo,
                        const PromptExtras& extras) {
    const Instance& di = demo.instance;
    std::map<std::string, std::string> f{{"question", di.question},
                                         {"hypothesis", di.hypothesis}};
    switch (kind) {
        case PromptKind::Retrieve: {
            bool plain = !extras.demo_premises.count(demo.id());
            if (plain && !demo.rendered_block.empty()) {
                return demo.rendered_block;
            }
            f["premises"] = sentence_lines(di, di.context_indices());
            f["retrieved"] = retrieved_list(gold_leaf_indices(demo));
            f["proof"] = serialize_chain(demo.gold());
            std::string block = substitute(prompt_assets::k_retrieve_demo, f);
            if (plain) demo.rendered_block = block;
            return block;
        }
        case PromptKind::GuessProof:
            f["premises"] = sentence_lines(di, di.context_indices());
            f["proof"] = serialize_chain(demo.gold());
            return substitute(prompt_assets::k_guess_demo, f);
        case PromptKind::Propose:
            f["premises"] =
                sentence_lines(di, demo_premise_indices(demo, extras));
            f["step"] = serialize_step_line(demo.gold().steps().front());
            return substitute(prompt_assets::k_propose_demo, f);
        case PromptKind::Evaluate:
            f["premises"] =
                sentence_lines(di, demo_premise_indices(demo, extras));
            f["step"] = serialize_step_line(demo.gold().steps().front());
            return substitute(prompt_assets::k_evaluate_demo, f);
        case PromptKind::Hint:
            f["conclusion"] = demo_conclusion_line(demo);
            f["missing"] = demo_missing_text(demo, extras);
            return substitute(extras.whats_next
                                  ? prompt_assets::k_whats_next_demo
                                  : prompt_assets::k_hint_demo,
                              f);
    }
    return {};
}

[[noreturn]] void missing_extra(PromptKind kind, std::string_view field) {
    throw LlmError(LlmError::Code::MissingExtra,
                   std::string(prompt_kind_name(kind)) +
                       " prompt needs extras." + std::string(field));
}

ChatExchange to_exchange(std::string flat, const ChatParams& params) {
    ChatExchange x;
    x.params = params;
    constexpr std::string_view kPrefix = "System: ";
    std::size_t gap = flat.find("\n\n");
    if (flat.rfind(kPrefix, 0) == 0 && gap != std::string::npos) {
        x.messages.push_back(
            {Role::System, flat.substr(kPrefix.size(), gap - kPrefix.size())});
        x.messages.push_back({Role::User, flat.substr(gap + 2)});
    } else {
        x.messages.push_back({Role::User, std::move(flat)});
    }
    return x;
}

}  // namespace

std::string_view prompt_kind_name(PromptKind kind) {
    switch (kind) {
        case PromptKind::GuessProof:
            return "guess";
        case PromptKind::Retrieve:
            return "retrieve";
        case PromptKind::Propose:
            return "propose";
        case PromptKind::Evaluate:
            return "evaluate";
        case PromptKind::Hint:
            return "hint";
    }
    return "?";
}

ChatExchange render_prompt(PromptKind kind, const Instance& inst,
                           const std::vector<Demonstration>& demos,
                           const PromptExtras& extras,
                           const ChatParams& params) {
    std::map<std::string, std::string> f{{"question", inst.question},
                                         {"hypothesis", inst.hypothesis}};
    std::string blocks;
    for (const auto& demo : demos) blocks += render_demo(kind, demo, extras);
    f["demonstrations"] = blocks;

    std::string_view tmpl;
    switch (kind) {
        case PromptKind::Retrieve:
            tmpl = prompt_assets::k_retrieve;
            f["premises"] = sentence_lines(inst, inst.context_indices());
            f["hint"] = extras.hint.empty() ? "" : "Hint: " + extras.hint + "\n";
            break;
        case PromptKind::GuessProof:
            tmpl = prompt_assets::k_guess;
            f["premises"] = sentence_lines(inst, inst.context_indices());
            break;
        case PromptKind::Propose:
            tmpl = prompt_assets::k_propose;
            if (!extras.retained) missing_extra(kind, "retained");
            f["premises"] =
                premise_block(inst, *extras.retained, extras.derived);
            break;
        case PromptKind::Evaluate:
            tmpl = prompt_assets::k_evaluate;
            if (!extras.retained) missing_extra(kind, "retained");
            if (!extras.candidate) missing_extra(kind, "candidate");
            f["premises"] =
                premise_block(inst, *extras.retained, extras.derived);
            f["step"] = serialize_step_line(*extras.candidate);
            break;
        case PromptKind::Hint:
            tmpl = extras.whats_next ? prompt_assets::k_whats_next
                                     : prompt_assets::k_hint;
            if (!extras.conclusion) missing_extra(kind, "conclusion");
            f["conclusion"] = *extras.conclusion;
            break;
    }
    return to_exchange(substitute(tmpl, f), params);
}

void prerender_demo_block(const Demonstration& demo) {
    render_demo(PromptKind::Retrieve, demo, PromptExtras{});
}

}  // namespace entail
