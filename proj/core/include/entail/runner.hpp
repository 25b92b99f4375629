#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "entail/dataset.hpp"
#include "entail/metrics.hpp"
#include "entail/search.hpp"

namespace entail {

struct ModelConfig {
    std::string name = "mock:oracle";  // mock:oracle | mock:noisy | http
    std::string endpoint;
    std::string api_key_env = "ENTAIL_API_KEY";
    int max_tokens = 512;
    std::map<std::string, double> temperature;  // by prompt kind name
    double rate_per_second = 0.0;               // 0 = unlimited
};

struct BudgetOptions {
    int max_calls_per_instance = 1 << 20;
    int max_total_calls = 1 << 26;
};

struct RunConfig {
    DatasetSpec dataset;
    SearchConfig search;
    ModelConfig model;
    std::string cache_path;
    BudgetOptions budget;
    int concurrency = 1;
    std::uint64_t seed = 7;
    std::string out_dir = "runs";
    std::string demo_split;  // defaults to the split being run

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
};

struct BatchSummary {
    int total = 0;
    int completed = 0;   // instances with a proof
    int skipped = 0;     // resumed from an earlier run
    int failed = 0;      // budget or transport failures
    int llm_calls = 0;   // calls made by this invocation
    std::string results_path;
};

/// Runs the search over every instance of the split, writing one result
/// record per instance plus a per-instance trace file under
/// out_dir/traces/. Instances already present in the results file are
/// skipped, so an interrupted batch resumes where it stopped. Budget and
/// transport failures are recorded per instance, never fatal to the batch.
BatchSummary run_batch(const RunConfig& config, const std::string& split);

struct ScoreSummary {
    MetricReport aggregate;
    int scored = 0;
    int missing_gold = 0;
    std::string report_path;
};

/// Scores a results file against the split's gold proofs: per-instance
/// rows, the aggregate row, and the depth x sequential/non-sequential
/// breakdown, emitted as TSV and JSON next to the results file.
ScoreSummary score_results(const RunConfig& config,
                           const std::string& results_path,
                           const std::string& split);

/// Replays a trace file in human-readable form. Throws
/// DataError(MalformedTrace) with the byte offset of the first bad record.
void inspect_trace(const std::string& trace_path, std::ostream& out);

/// Converts a native dataset release into the normalized JSONL schema.
/// `from` currently supports "entailmentbank" (the STREET/AR-LSAT and
/// PrOntoQA releases need per-dataset mappings that are documented but not
/// bundled) and "normalized" (validating passthrough).
int convert_dataset(const std::string& from, const std::string& input_path,
                    const std::string& output_path,
                    const std::string& dataset_name, std::ostream& log);

}  // namespace entail
