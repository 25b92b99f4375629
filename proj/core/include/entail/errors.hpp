#pragma once

#include <stdexcept>
#include <string>

namespace entail {

/// Parse and graph-validation failures. Every parser is total: any input
/// either produces a valid graph or one of these codes, never a malformed
/// graph.
class ProofError : public std::runtime_error {
public:
    enum class Code {
        MissingArrow,
        BadNode,
        SentenceConclusion,
        EmptyPremises,
        DuplicatePremise,
        SelfConclusion,
        HypothesisPremise,
        UnbalancedParens,
        EmptyExpression,
        DuplicateConclusion,
        ForwardReference,
        CycleDetected,
        UnknownNode,
        UnknownPremise,
    };

    ProofError(Code code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

/// LLM transport, prompt and extraction failures.
class LlmError : public std::runtime_error {
public:
    enum class Code {
        MissingExtra,
        Transport,
        RateLimited,
        BadResponse,
        EmptyExtraction,
        NoScore,
    };

    LlmError(Code code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

class SearchError : public std::runtime_error {
public:
    enum class Code {
        BudgetExceeded,
    };

    SearchError(Code code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

class MetricError : public std::runtime_error {
public:
    enum class Code {
        DimensionMismatch,
        TooLarge,
        EmptyList,
    };

    MetricError(Code code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

/// Dataset loading failures; `line` is 1-based when it applies.
class DataError : public std::runtime_error {
public:
    enum class Code {
        Io,
        MalformedRecord,
        InvalidGold,
        NoGold,
        MalformedTrace,
    };

    DataError(Code code, std::string message, long line = 0)
        : std::runtime_error(std::move(message)), code_(code), line_(line) {}

    Code code() const noexcept { return code_; }
    long line() const noexcept { return line_; }

private:
    Code code_;
    long line_;
};

}  // namespace entail
