#include "entail/parse.hpp"

#include <cctype>
#include <cstddef>
#include <memory>
#include <vector>

#include "entail/util.hpp"

namespace entail {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

[[noreturn]] void bad_node(std::string_view token) {
    throw ProofError(ProofError::Code::BadNode,
                     "not a node token: '" + std::string(token) + "'");
}

}  // namespace

NodeId parse_node(std::string_view token) {
    std::string t = lower(trim(token));
    if (t == "hypothesis") return NodeId::hypothesis();
    std::string_view digits;
    NodeKind kind;
    if (t.rfind("sent", 0) == 0) {
        digits = std::string_view(t).substr(4);
        kind = NodeKind::Sentence;
    } else if (t.rfind("int", 0) == 0) {
        digits = std::string_view(t).substr(3);
        kind = NodeKind::Intermediate;
    } else {
        bad_node(token);
    }
    if (!all_digits(digits) || digits.size() > 8) bad_node(token);
    int index = 0;
    for (char c : digits) index = index * 10 + (c - '0');
    if (index < 1) bad_node(token);
    return {kind, index};
}

ProofStep parse_step_line(std::string_view text) {
    std::size_t arrow = text.find("->");
    if (arrow == std::string_view::npos) {
        throw ProofError(ProofError::Code::MissingArrow,
                         "no '->' in step line: '" + std::string(trim(text)) +
                             "'");
    }
    ProofStep step;
    for (std::string_view piece : split(text.substr(0, arrow), '&')) {
        step.premises.push_back(parse_node(piece));
    }
    std::string_view rhs = trim(text.substr(arrow + 2));
    std::size_t colon = rhs.find(':');
    if (colon == std::string_view::npos) {
        step.conclusion = parse_node(rhs);
    } else {
        step.conclusion = parse_node(rhs.substr(0, colon));
        step.conclusion_text = std::string(trim(rhs.substr(colon + 1)));
    }
    validate_step(step);
    return step;
}

ProofGraph parse_proof_chain(std::string_view text) {
    std::vector<ProofStep> steps;
    for (std::string_view segment : split(text, ';')) {
        if (trim(segment).empty()) continue;
        steps.push_back(parse_step_line(segment));
    }
    return ProofGraph::from_steps(std::move(steps));
}

namespace {

// Expression tree for the parenthesized evidence notation.
struct EvidenceNode {
    std::optional<NodeId> leaf;  // set for sentN leaves
    std::vector<std::unique_ptr<EvidenceNode>> children;

    bool is_leaf() const { return leaf.has_value(); }
};

using NodePtr = std::unique_ptr<EvidenceNode>;

struct NestedParser {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() &&
               std::isspace(static_cast<unsigned char>(text[pos]))) {
            ++pos;
        }
    }

    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    NodePtr parse_term() {
        skip_ws();
        if (peek() == '(') {
            ++pos;
            NodePtr inner = parse_expr();
            if (peek() != ')') {
                throw ProofError(ProofError::Code::UnbalancedParens,
                                 "missing ')'");
            }
            ++pos;
            return inner;
        }
        if (peek() == ')') {
            throw ProofError(ProofError::Code::UnbalancedParens,
                             "unexpected ')'");
        }
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != '(' && text[pos] != ')' &&
               text[pos] != '&') {
            ++pos;
        }
        std::string_view token = trim(text.substr(start, pos - start));
        if (token.empty()) {
            throw ProofError(ProofError::Code::EmptyExpression,
                             "empty operand");
        }
        NodeId id = parse_node(token);
        if (!id.is_sentence()) bad_node(token);
        auto node = std::make_unique<EvidenceNode>();
        node->leaf = id;
        return node;
    }

    // A single term collapses to itself, so redundant parentheses do not
    // create extra groups.
    NodePtr parse_expr() {
        std::vector<NodePtr> parts;
        parts.push_back(parse_term());
        while (peek() == '&') {
            ++pos;
            parts.push_back(parse_term());
        }
        if (parts.size() == 1) return std::move(parts.front());
        auto node = std::make_unique<EvidenceNode>();
        node->children = std::move(parts);
        return node;
    }
};

void emit_steps(const EvidenceNode& node, std::vector<ProofStep>& steps,
                int& next_index, bool is_root) {
    std::vector<NodeId> premises;
    for (const auto& child : node.children) {
        if (child->is_leaf()) {
            premises.push_back(*child->leaf);
        } else {
            emit_steps(*child, steps, next_index, false);
            premises.push_back(steps.back().conclusion);
        }
    }
    ProofStep step;
    step.premises = std::move(premises);
    step.conclusion =
        is_root ? NodeId::hypothesis() : NodeId::intermediate(next_index++);
    steps.push_back(std::move(step));
}

}  // namespace

ProofGraph parse_nested_proof(std::string_view text) {
    std::string_view body = trim(text);
    // Accept an optional "-> hypothesis" suffix.
    std::size_t arrow = body.rfind("->");
    if (arrow != std::string_view::npos &&
        lower(trim(body.substr(arrow + 2))) == "hypothesis") {
        body = trim(body.substr(0, arrow));
    }
    if (body.empty()) {
        throw ProofError(ProofError::Code::EmptyExpression,
                         "empty evidence expression");
    }
    NestedParser parser{body};
    NodePtr root = parser.parse_expr();
    if (!parser.at_end()) {
        if (parser.peek() == ')') {
            throw ProofError(ProofError::Code::UnbalancedParens,
                             "unexpected ')'");
        }
        bad_node(body.substr(parser.pos));
    }
    if (root->is_leaf()) {
        // A bare sentence still proves the hypothesis with one step.
        auto group = std::make_unique<EvidenceNode>();
        group->children.push_back(std::move(root));
        root = std::move(group);
    }
    std::vector<ProofStep> steps;
    int next_index = 1;
    emit_steps(*root, steps, next_index, true);
    return ProofGraph::from_steps(std::move(steps));
}

std::string serialize_step_line(const ProofStep& step) {
    std::string out;
    for (std::size_t i = 0; i < step.premises.size(); ++i) {
        if (i > 0) out += " & ";
        out += step.premises[i].str();
    }
    out += " -> ";
    out += step.conclusion.str();
    if (!step.conclusion_text.empty()) {
        out += ": ";
        out += step.conclusion_text;
    }
    return out;
}

std::string serialize_chain(const ProofGraph& g) {
    std::string out;
    for (const auto& step : g.steps()) {
        if (!out.empty()) out += " ";
        out += serialize_step_line(step);
        out += ";";
    }
    return out;
}

}  // namespace entail
