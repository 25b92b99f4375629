#pragma once

#include <string>
#include <string_view>

#include "entail/proof.hpp"

namespace entail {

/// Parses a node token: `sentN`, `intN` or `hypothesis`, case-insensitive,
/// surrounding whitespace ignored. Throws ProofError(BadNode).
NodeId parse_node(std::string_view token);

/// Parses one step line of the form
///   `sent7 & sent4 -> int1: some conclusion text`
/// The conclusion text after the first `:` is optional and kept verbatim
/// (trimmed). Throws ProofError: MissingArrow, BadNode, SentenceConclusion,
/// plus the per-step invariants from validate_step.
ProofStep parse_step_line(std::string_view text);

/// Parses a `;`-separated chain of step lines into a validated graph. A
/// trailing `;` is allowed; empty input yields the empty graph.
ProofGraph parse_proof_chain(std::string_view text);

/// Parses the parenthesized evidence notation, e.g.
///   `((sent19 & sent23) & sent17) & ((sent7 & sent8) & sent3)`
/// Each parenthesized group becomes one step concluding a fresh
/// intermediate, numbered in left-to-right postorder starting at 1; the
/// outermost expression concludes the hypothesis. An optional trailing
/// `-> hypothesis` is accepted. Throws ProofError: UnbalancedParens,
/// BadNode, EmptyExpression.
ProofGraph parse_nested_proof(std::string_view text);

/// `sent1 & sent2 -> int1: text` (no text part when conclusion_text is
/// empty). Premise order is preserved.
std::string serialize_step_line(const ProofStep& step);

/// Steps joined with `; ` and terminated with `;`; empty graph -> "".
/// parse_proof_chain(serialize_chain(g)) reproduces g as long as no
/// conclusion text contains `;`.
std::string serialize_chain(const ProofGraph& g);

}  // namespace entail
