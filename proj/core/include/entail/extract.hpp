#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "entail/proof.hpp"

namespace entail {

/// Collects the `sentN` tokens present in `context` from free-form model
/// output. Throws LlmError(EmptyExtraction) if none survive; callers treat
/// that as one failed sample, not a fatal error.
std::set<int> extract_retrieval(std::string_view text,
                                const std::map<int, std::string>& context);

struct ExtractedSteps {
    std::vector<ProofStep> steps;
    bool finish = false;
};

/// Scans every line and `;`-segment for parseable step lines; unparseable
/// segments are skipped. `finish` is set when the word "Finish" appears
/// (case-insensitive) or any step concludes the hypothesis. Total over
/// arbitrary text; an empty step list is a legal result.
ExtractedSteps extract_steps(std::string_view text);

/// The last standalone integer in the text, clamped to [0, 99];
/// `clamped`, when given, reports whether clamping fired. Throws
/// LlmError(NoScore) when no integer occurs.
int extract_score(std::string_view text, bool* clamped = nullptr);

/// Text after the first "Missing:" marker, else the whole trimmed text.
std::string extract_hint(std::string_view text);

}  // namespace entail
