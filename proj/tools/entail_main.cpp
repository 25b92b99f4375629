#include <iostream>

#include <CLI11.hpp>

#include "entail/runner.hpp"

using namespace entail;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string split = "dev";
    std::string data_path;
    std::string model;
    std::string pruning;
    std::string hint_mode;
    std::string out_dir;
    std::string cache_path;
    int beam = -1;
    int demos = -1;
    int proposals = -1;
    int retrieval_samples = -1;
    int max_depth = -1;
    int concurrency = -1;
    int max_calls_per_instance = -1;
    int max_total_calls = -1;
    long seed = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--split", args.split, "dataset split name");
    cmd->add_option("--data", args.data_path,
                    "dataset file for the split (overrides the config)");
    cmd->add_option("--model", args.model,
                    "model name (mock:oracle, mock:noisy[:p], or provider)");
    cmd->add_option("--pruning", args.pruning, "div | reuse_ic | off");
    cmd->add_option("--hint-mode", args.hint_mode, "hint | whats_next | off");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--cache", args.cache_path, "LLM call cache file");
    cmd->add_option("--beam", args.beam, "beam width");
    cmd->add_option("--demos", args.demos, "demonstrations per prompt");
    cmd->add_option("--proposals", args.proposals, "step proposals per node");
    cmd->add_option("--retrieval-samples", args.retrieval_samples,
                    "independent retrieval samples");
    cmd->add_option("--max-depth", args.max_depth, "dataset max proof depth");
    cmd->add_option("--concurrency", args.concurrency, "worker threads");
    cmd->add_option("--max-calls-per-instance", args.max_calls_per_instance,
                    "per-instance LLM call budget");
    cmd->add_option("--max-total-calls", args.max_total_calls,
                    "whole-batch LLM call budget");
    cmd->add_option("--seed", args.seed, "engine tie-break / mock seed");
}

RunConfig resolve(const CommonArgs& args) {
    RunConfig config;
    if (!args.config_path.empty()) {
        config = RunConfig::load(args.config_path);
    }
    if (!args.data_path.empty()) {
        config.dataset.splits[args.split] = args.data_path;
    }
    if (!args.model.empty()) config.model.name = args.model;
    if (!args.pruning.empty()) {
        config.search.pruning = pruning_mode_from(args.pruning);
    }
    if (!args.hint_mode.empty()) {
        config.search.hint_mode = hint_mode_from(args.hint_mode);
    }
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    if (!args.cache_path.empty()) config.cache_path = args.cache_path;
    if (args.beam >= 0) config.search.beam = args.beam;
    if (args.demos >= 0) config.search.demos = args.demos;
    if (args.proposals >= 0) config.search.proposals = args.proposals;
    if (args.retrieval_samples >= 0) {
        config.search.retrieval_samples = args.retrieval_samples;
    }
    if (args.max_depth >= 0) {
        config.dataset.max_depth = args.max_depth;
        config.search.max_depth = args.max_depth;
    }
    if (args.concurrency >= 0) config.concurrency = args.concurrency;
    if (args.max_calls_per_instance >= 0) {
        config.budget.max_calls_per_instance = args.max_calls_per_instance;
    }
    if (args.max_total_calls >= 0) {
        config.budget.max_total_calls = args.max_total_calls;
    }
    if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
    config.search.model = config.model.name;
    config.search.max_depth = config.dataset.max_depth;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proof-graph construction over chat models: search, score "
                 "and inspect entailment proofs"};
    app.require_subcommand(1);

    CommonArgs run_args;
    auto* run_cmd =
        app.add_subcommand("run", "search proofs for every instance");
    add_common(run_cmd, run_args);

    CommonArgs score_args;
    std::string results_path;
    auto* score_cmd =
        app.add_subcommand("score", "score a results file against gold");
    add_common(score_cmd, score_args);
    score_cmd->add_option("--results", results_path, "results JSONL file");

    std::string trace_path;
    auto* inspect_cmd =
        app.add_subcommand("inspect", "human-readable replay of a trace");
    inspect_cmd->add_option("trace", trace_path, "trace JSONL file")
        ->required();

    std::string convert_from = "entailmentbank";
    std::string convert_in;
    std::string convert_out;
    std::string convert_name = "entailmentbank";
    auto* convert_cmd = app.add_subcommand(
        "convert", "convert a native dataset release to the normalized JSONL");
    convert_cmd->add_option("--from", convert_from,
                            "source format (entailmentbank | normalized)");
    convert_cmd->add_option("--in", convert_in, "input file")->required();
    convert_cmd->add_option("--out", convert_out, "output file")->required();
    convert_cmd->add_option("--dataset-name", convert_name,
                            "dataset tag written into meta");

    CommonArgs print_args;
    auto* print_cmd =
        app.add_subcommand("print-config", "dump the fully resolved config");
    add_common(print_cmd, print_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // exit 1 on any usage error
    }

    try {
        if (run_cmd->parsed()) {
            RunConfig config = resolve(run_args);
            BatchSummary summary = run_batch(config, run_args.split);
            std::cout << "instances: " << summary.total
                      << "  proved: " << summary.completed
                      << "  resumed: " << summary.skipped
                      << "  failed: " << summary.failed
                      << "  llm calls: " << summary.llm_calls << "\n"
                      << "results: " << summary.results_path << "\n";
            return summary.failed > 0 ? 3 : 0;
        }
        if (score_cmd->parsed()) {
            RunConfig config = resolve(score_args);
            if (results_path.empty()) {
                results_path = config.out_dir + "/results-" +
                               score_args.split + ".jsonl";
            }
            ScoreSummary summary =
                score_results(config, results_path, score_args.split);
            const MetricReport& a = summary.aggregate;
            std::cout << "scored " << summary.scored << " instances ("
                      << summary.missing_gold << " without gold)\n"
                      << "Ev-P " << a.ev_p << "  Ev-R " << a.ev_r << "  Ev-F "
                      << a.ev_f << "\n"
                      << "Pr-P " << a.pr_p << "  Pr-R " << a.pr_r << "  Pr-F "
                      << a.pr_f << "\n"
                      << "G-Sim " << a.g_sim << "  recall-is-1 "
                      << a.pr_recall_is_1 << "\n"
                      << "report: " << summary.report_path << "\n";
            return 0;
        }
        if (inspect_cmd->parsed()) {
            inspect_trace(trace_path, std::cout);
            return 0;
        }
        if (convert_cmd->parsed()) {
            return convert_dataset(convert_from, convert_in, convert_out,
                                   convert_name, std::cout);
        }
        if (print_cmd->parsed()) {
            std::cout << resolve(print_args).to_json().dump(2) << "\n";
            return 0;
        }
    } catch (const SearchError& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return 3;
    } catch (const LlmError& e) {
        std::cerr << "llm error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
