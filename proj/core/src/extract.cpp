#include "entail/extract.hpp"

#include <algorithm>
#include <cctype>

#include "entail/errors.hpp"
#include "entail/parse.hpp"
#include "entail/util.hpp"

namespace entail {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Finds the next occurrence of `word` at word boundaries, case-insensitive.
bool contains_word(std::string_view text, std::string_view word) {
    std::string hay = lower(text);
    std::string needle = lower(word);
    std::size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
        std::size_t end = pos + needle.size();
        bool right_ok = end >= hay.size() || !is_word_char(hay[end]);
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

}  // namespace

std::set<int> extract_retrieval(std::string_view text,
                                const std::map<int, std::string>& context) {
    std::set<int> out;
    std::string hay = lower(text);
    std::size_t pos = 0;
    while ((pos = hay.find("sent", pos)) != std::string::npos) {
        if (pos > 0 && is_word_char(hay[pos - 1])) {
            pos += 4;
            continue;
        }
        std::size_t digits = pos + 4;
        int index = 0;
        std::size_t end = digits;
        while (end < hay.size() &&
               std::isdigit(static_cast<unsigned char>(hay[end])) &&
               end - digits < 8) {
            index = index * 10 + (hay[end] - '0');
            ++end;
        }
        if (end > digits && (end >= hay.size() || !is_word_char(hay[end])) &&
            context.count(index)) {
            out.insert(index);
        }
        pos = end > digits ? end : pos + 4;
    }
    if (out.empty()) {
        throw LlmError(LlmError::Code::EmptyExtraction,
                       "no in-context sentence ids in model output");
    }
    return out;
}

ExtractedSteps extract_steps(std::string_view text) {
    ExtractedSteps out;
    out.finish = contains_word(text, "finish");
    for (std::string_view line : split(text, '\n')) {
        for (std::string_view segment : split(line, ';')) {
            // Chatty output prefixes the step ("Possible Next Reasoning:",
            // "The intermediate conclusion ..."); try every node-token
            // position until one parses.
            std::string hay = lower(segment);
            std::vector<std::size_t> starts;
            for (std::string_view tok : {"sent", "int", "hypothesis"}) {
                std::size_t p = hay.find(tok);
                while (p != std::string::npos) {
                    if (p == 0 || !is_word_char(hay[p - 1])) {
                        starts.push_back(p);
                    }
                    p = hay.find(tok, p + 1);
                }
            }
            std::sort(starts.begin(), starts.end());
            for (std::size_t start : starts) {
                try {
                    out.steps.push_back(
                        parse_step_line(segment.substr(start)));
                    break;
                } catch (const ProofError&) {
                    continue;  // not a step from here; try the next token
                }
            }
        }
    }
    for (const auto& step : out.steps) {
        if (step.conclusion.is_hypothesis()) out.finish = true;
    }
    return out;
}

int extract_score(std::string_view text, bool* clamped) {
    if (clamped) *clamped = false;
    long value = 0;
    bool found = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
        std::size_t start = i;
        bool negative = start > 0 && text[start - 1] == '-' &&
                        (start == 1 || !is_word_char(text[start - 2]));
        if (start > 0 && !negative && is_word_char(text[start - 1])) {
            while (i < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[i]))) {
                ++i;
            }
            continue;  // part of an identifier like sent12
        }
        long v = 0;
        while (i < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[i]))) {
            v = std::min<long>(v * 10 + (text[i] - '0'), 1000000);
            ++i;
        }
        if (i < text.size() && is_word_char(text[i])) continue;
        value = negative ? -v : v;
        found = true;
    }
    if (!found) {
        throw LlmError(LlmError::Code::NoScore, "no integer in model output");
    }
    if (value < 0 || value > 99) {
        if (clamped) *clamped = true;
        value = std::clamp<long>(value, 0, 99);
    }
    return static_cast<int>(value);
}

std::string extract_hint(std::string_view text) {
    constexpr std::string_view kMarker = "Missing:";
    std::size_t pos = text.find(kMarker);
    if (pos != std::string_view::npos) {
        return std::string(trim(text.substr(pos + kMarker.size())));
    }
    return std::string(trim(text));
}

}  // namespace entail
