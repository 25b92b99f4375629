#include "entail/runner.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "entail/cache.hpp"
#include "entail/http_client.hpp"
#include "entail/mock.hpp"
#include "entail/parse.hpp"
#include "entail/util.hpp"

namespace entail {

namespace fs = std::filesystem;

nlohmann::json RunConfig::to_json() const {
    nlohmann::json splits = nlohmann::json::object();
    for (const auto& [name, path] : dataset.splits) splits[name] = path;
    return {
        {"dataset",
         {{"name", dataset.name},
          {"max_depth", dataset.max_depth},
          {"splits", std::move(splits)}}},
        {"search",
         {{"beam", search.beam},
          {"proposals", search.proposals},
          {"retrieval_samples", search.retrieval_samples},
          {"demos", search.demos},
          {"max_iter_multiplier", search.max_iter_multiplier},
          {"pruning", std::string(pruning_mode_name(search.pruning))},
          {"hint_mode", std::string(hint_mode_name(search.hint_mode))},
          {"default_score", search.default_score},
          {"content_channel", search.content_channel}}},
        {"model",
         {{"name", model.name},
          {"endpoint", model.endpoint},
          {"api_key_env", model.api_key_env},
          {"max_tokens", model.max_tokens},
          {"temperature", model.temperature},
          {"rate_per_second", model.rate_per_second}}},
        {"cache_path", cache_path},
        {"budget",
         {{"max_calls_per_instance", budget.max_calls_per_instance},
          {"max_total_calls", budget.max_total_calls}}},
        {"concurrency", concurrency},
        {"seed", seed},
        {"out_dir", out_dir},
        {"demo_split", demo_split},
    };
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    RunConfig c;
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        c.dataset.name = d.value("name", c.dataset.name);
        c.dataset.max_depth = d.value("max_depth", c.dataset.max_depth);
        if (d.contains("splits")) {
            for (const auto& [name, path] : d.at("splits").items()) {
                c.dataset.splits[name] = path.get<std::string>();
            }
        }
    }
    if (j.contains("search")) {
        const auto& s = j.at("search");
        c.search.beam = s.value("beam", c.search.beam);
        c.search.proposals = s.value("proposals", c.search.proposals);
        c.search.retrieval_samples =
            s.value("retrieval_samples", c.search.retrieval_samples);
        c.search.demos = s.value("demos", c.search.demos);
        c.search.max_iter_multiplier =
            s.value("max_iter_multiplier", c.search.max_iter_multiplier);
        if (s.contains("pruning")) {
            c.search.pruning =
                pruning_mode_from(s.at("pruning").get<std::string>());
        }
        if (s.contains("hint_mode")) {
            c.search.hint_mode =
                hint_mode_from(s.at("hint_mode").get<std::string>());
        }
        c.search.default_score =
            s.value("default_score", c.search.default_score);
        c.search.content_channel =
            s.value("content_channel", c.search.content_channel);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        c.model.name = m.value("name", c.model.name);
        c.model.endpoint = m.value("endpoint", c.model.endpoint);
        c.model.api_key_env = m.value("api_key_env", c.model.api_key_env);
        c.model.max_tokens = m.value("max_tokens", c.model.max_tokens);
        c.model.rate_per_second =
            m.value("rate_per_second", c.model.rate_per_second);
        if (m.contains("temperature")) {
            for (const auto& [kind, temp] : m.at("temperature").items()) {
                c.model.temperature[kind] = temp.get<double>();
            }
        }
    }
    c.cache_path = j.value("cache_path", c.cache_path);
    if (j.contains("budget")) {
        c.budget.max_calls_per_instance = j.at("budget").value(
            "max_calls_per_instance", c.budget.max_calls_per_instance);
        c.budget.max_total_calls =
            j.at("budget").value("max_total_calls", c.budget.max_total_calls);
    }
    c.concurrency = std::max(1, j.value("concurrency", c.concurrency));
    c.budget.max_calls_per_instance =
        std::max(1, c.budget.max_calls_per_instance);
    c.budget.max_total_calls = std::max(1, c.budget.max_total_calls);
    c.search.beam = std::max(1, c.search.beam);
    c.search.proposals = std::max(1, c.search.proposals);
    c.search.retrieval_samples = std::max(1, c.search.retrieval_samples);
    c.search.demos = std::max(0, c.search.demos);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out_dir", c.out_dir);
    c.demo_split = j.value("demo_split", c.demo_split);

    // Search settings that mirror other sections.
    c.search.max_depth = c.dataset.max_depth;
    c.search.model = c.model.name;
    c.search.max_tokens = c.model.max_tokens;
    c.search.temperature = c.model.temperature;
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(DataError::Code::Io, "cannot open config " + path);
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw DataError(DataError::Code::MalformedRecord,
                        "config is not valid JSON: " + path);
    }
    return from_json(j);
}

namespace {

const std::string& split_path(const RunConfig& config,
                              const std::string& split) {
    auto it = config.dataset.splits.find(split);
    if (it == config.dataset.splits.end()) {
        throw DataError(DataError::Code::Io,
                        "split '" + split + "' is not configured");
    }
    return it->second;
}

struct ResultRecord {
    std::string id;
    std::optional<std::string> proof;
    int llm_calls = 0;
    std::string trace_path;
    std::string error;

    nlohmann::json to_json() const {
        nlohmann::json j{{"id", id},
                         {"llm_calls", llm_calls},
                         {"trace", trace_path}};
        if (proof) {
            j["proof"] = *proof;
        } else {
            j["proof"] = nullptr;
        }
        if (!error.empty()) j["error"] = error;
        return j;
    }
};

std::vector<ResultRecord> read_results(const std::string& path) {
    std::vector<ResultRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("id")) continue;
        ResultRecord r;
        r.id = j.at("id").get<std::string>();
        if (j.contains("proof") && !j.at("proof").is_null()) {
            r.proof = j.at("proof").get<std::string>();
        }
        r.llm_calls = j.value("llm_calls", 0);
        r.trace_path = j.value("trace", "");
        r.error = j.value("error", "");
        out.push_back(std::move(r));
    }
    return out;
}

void write_trace(const std::string& path,
                 const std::vector<TraceEvent>& trace) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty()) {
        fs::create_directories(parent);
    }
    std::ofstream out(path);
    for (const auto& event : trace) out << event.to_json() << "\n";
}

// One client per instance keeps seeded mocks deterministic under
// concurrency; the oracle and http clients are shared.
struct ClientFactory {
    const RunConfig& config;
    const std::vector<Instance>& oracle_source;
    std::shared_ptr<CallCache> cache;
    std::unique_ptr<OracleClient> oracle;
    std::unique_ptr<HttpChatClient> http;
    std::unique_ptr<TokenBucket> bucket;

    explicit ClientFactory(const RunConfig& cfg,
                           const std::vector<Instance>& instances)
        : config(cfg), oracle_source(instances) {
        if (config.model.name == "mock:oracle") {
            oracle = std::make_unique<OracleClient>(instances);
        } else if (config.model.name.rfind("mock:noisy", 0) == 0) {
            // per-instance construction below
        } else {
            HttpClientOptions options;
            options.endpoint = config.model.endpoint;
            if (const char* key =
                    std::getenv(config.model.api_key_env.c_str())) {
                options.api_key = key;
            }
            if (config.model.rate_per_second > 0) {
                bucket = std::make_unique<TokenBucket>(
                    config.model.rate_per_second,
                    config.model.rate_per_second);
            }
            http = std::make_unique<HttpChatClient>(std::move(options),
                                                    bucket.get());
            if (!config.cache_path.empty()) {
                cache = std::make_shared<CallCache>(config.cache_path);
            }
        }
    }

    std::unique_ptr<LlmClient> for_instance(const Instance& inst) {
        if (oracle) return nullptr;  // shared
        if (config.model.name.rfind("mock:noisy", 0) == 0) {
            double p_gold = 0.6;
            if (auto colon = config.model.name.find(':', 5);
                colon != std::string::npos) {
                std::string tail = config.model.name.substr(colon + 1);
                if (!tail.empty()) p_gold = std::stod(tail);
            }
            return std::make_unique<NoisyOracleClient>(
                oracle_source, config.seed ^ fnv1a(inst.id), p_gold);
        }
        if (http) {
            if (cache) return std::make_unique<CachingClient>(*http, cache);
            return nullptr;  // shared http without cache
        }
        return nullptr;
    }

    LlmClient* shared() {
        if (oracle) return oracle.get();
        return http.get();
    }
};

}  // namespace

BatchSummary run_batch(const RunConfig& config, const std::string& split) {
    std::vector<Instance> instances =
        load_instances(split_path(config, split));
    std::string demo_split =
        config.demo_split.empty() ? split : config.demo_split;
    std::vector<Instance> demo_source =
        demo_split == split ? instances
                            : load_instances(split_path(config, demo_split));
    StructuralEncoder encoder({config.search.content_channel});
    std::vector<Demonstration> db = build_demo_db(demo_source, encoder);

    fs::create_directories(config.out_dir);
    BatchSummary summary;
    summary.total = static_cast<int>(instances.size());
    summary.results_path =
        (fs::path(config.out_dir) / ("results-" + split + ".jsonl")).string();

    std::vector<ResultRecord> records = read_results(summary.results_path);
    std::set<std::string> done;
    for (const auto& r : records) done.insert(r.id);

    std::vector<const Instance*> todo;
    for (const auto& inst : instances) {
        if (done.count(inst.id)) {
            ++summary.skipped;
        } else {
            todo.push_back(&inst);
        }
    }

    ClientFactory factory(config, instances);
    CallBudget budget;
    budget.per_instance = config.budget.max_calls_per_instance;
    budget.total = config.budget.max_total_calls;

    std::mutex mutex;
    std::ofstream append(summary.results_path, std::ios::app);
    std::atomic<std::size_t> cursor{0};

    auto worker = [&] {
        while (true) {
            std::size_t index = cursor.fetch_add(1);
            if (index >= todo.size()) return;
            const Instance& inst = *todo[index];
            std::unique_ptr<LlmClient> owned = factory.for_instance(inst);
            LlmClient* client = owned ? owned.get() : factory.shared();

            ResultRecord record;
            record.id = inst.id;
            record.trace_path =
                (fs::path(config.out_dir) / "traces" / (inst.id + ".jsonl"))
                    .string();
            std::vector<TraceEvent> trace;
            try {
                SearchOutcome outcome =
                    run_search(inst, db, *client, config.search, &budget);
                record.llm_calls = outcome.llm_calls;
                trace = std::move(outcome.trace);
                if (outcome.proof) {
                    record.proof = serialize_chain(*outcome.proof);
                }
            } catch (const SearchError&) {
                record.error = "BudgetExceeded";
            } catch (const LlmError& e) {
                record.error = e.code() == LlmError::Code::RateLimited
                                   ? "RateLimited"
                                   : "Transport";
            }
            write_trace(record.trace_path, trace);
            std::lock_guard lock(mutex);
            append << record.to_json() << "\n";
            append.flush();
            records.push_back(record);
            summary.llm_calls += record.llm_calls;
            if (record.proof) ++summary.completed;
            if (!record.error.empty()) ++summary.failed;
        }
    };

    int workers = std::max(1, config.concurrency);
    std::vector<std::thread> pool;
    for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    append.close();

    // Canonical order so a finished batch is byte-stable regardless of
    // worker interleaving.
    std::sort(records.begin(), records.end(),
              [](const ResultRecord& a, const ResultRecord& b) {
                  return a.id < b.id;
              });
    std::ofstream rewrite(summary.results_path, std::ios::trunc);
    for (const auto& r : records) rewrite << r.to_json() << "\n";
    return summary;
}

namespace {

std::string tsv_row(const std::string& id, const MetricReport& r) {
    std::ostringstream out;
    out << id << std::fixed << std::setprecision(6);
    for (double v : {r.ev_p, r.ev_r, r.ev_f, r.pr_p, r.pr_r, r.pr_f, r.g_sim,
                     r.pr_recall_is_1}) {
        out << "\t" << v;
    }
    out << "\t" << (r.g_sim_approximate ? 1 : 0);
    return out.str();
}

constexpr std::string_view kTsvHeader =
    "id\tev_p\tev_r\tev_f\tpr_p\tpr_r\tpr_f\tg_sim\tpr_recall_is_1\tapprox";

nlohmann::json report_json(const MetricReport& r) {
    return {{"ev_p", r.ev_p},
            {"ev_r", r.ev_r},
            {"ev_f", r.ev_f},
            {"pr_p", r.pr_p},
            {"pr_r", r.pr_r},
            {"pr_f", r.pr_f},
            {"g_sim", r.g_sim},
            {"pr_recall_is_1", r.pr_recall_is_1},
            {"approx", r.g_sim_approximate}};
}

}  // namespace

ScoreSummary score_results(const RunConfig& config,
                           const std::string& results_path,
                           const std::string& split) {
    std::vector<Instance> instances =
        load_instances(split_path(config, split));
    std::map<std::string, const Instance*> by_id;
    for (const auto& inst : instances) by_id[inst.id] = &inst;

    std::vector<ResultRecord> records = read_results(results_path);
    if (records.empty()) {
        throw DataError(DataError::Code::Io,
                        "no result records in " + results_path);
    }

    GedOptions ged;
    ged.allow_approximate = true;

    ScoreSummary summary;
    std::vector<std::pair<std::string, MetricReport>> rows;
    // (sequential, depth) -> reports
    std::map<std::pair<bool, int>, std::vector<MetricReport>> groups;
    for (const auto& record : records) {
        auto it = by_id.find(record.id);
        if (it == by_id.end() || !it->second->gold) {
            ++summary.missing_gold;
            continue;
        }
        const Instance& inst = *it->second;
        ProofGraph pred;
        if (record.proof) pred = parse_proof_chain(*record.proof);
        MetricReport report = score_graphs(pred, *inst.gold, ged);
        rows.emplace_back(record.id, report);
        groups[{classify(inst).sequential, classify(inst).depth}].push_back(
            report);
        ++summary.scored;
    }
    if (rows.empty()) {
        throw DataError(DataError::Code::NoGold,
                        "no scorable records in " + results_path);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<MetricReport> all;
    for (const auto& [_, r] : rows) all.push_back(r);
    summary.aggregate = aggregate(all);

    fs::path base = fs::path(results_path).parent_path();
    std::string stem = fs::path(results_path).stem().string();
    auto out_path = [&](const std::string& suffix) {
        return (base / (stem + suffix)).string();
    };

    {
        std::ofstream tsv(out_path("-instances.tsv"));
        tsv << kTsvHeader << "\n";
        for (const auto& [id, r] : rows) tsv << tsv_row(id, r) << "\n";
    }
    {
        std::ofstream tsv(out_path("-aggregate.tsv"));
        tsv << kTsvHeader << "\n"
            << tsv_row("aggregate", summary.aggregate) << "\n";
    }
    nlohmann::json breakdown = nlohmann::json::array();
    {
        std::ofstream tsv(out_path("-breakdown.tsv"));
        tsv << "depth\tclass\tn" << "\tev_f\tpr_f\tg_sim\n";
        std::map<std::pair<int, bool>, std::vector<MetricReport>> ordered;
        for (auto& [key, reports] : groups) {
            ordered[{key.second, !key.first}] = std::move(reports);
        }
        for (const auto& [key, reports] : ordered) {
            MetricReport mean = aggregate(reports);
            std::string cls = key.second ? "non-sequential" : "sequential";
            tsv << key.first << "\t" << cls << "\t" << reports.size() << "\t"
                << std::fixed << std::setprecision(6) << mean.ev_f << "\t"
                << mean.pr_f << "\t" << mean.g_sim << "\n";
            breakdown.push_back({{"depth", key.first},
                                 {"class", cls},
                                 {"n", reports.size()},
                                 {"report", report_json(mean)}});
        }
    }
    {
        nlohmann::json per_instance = nlohmann::json::array();
        for (const auto& [id, r] : rows) {
            nlohmann::json row = report_json(r);
            row["id"] = id;
            per_instance.push_back(std::move(row));
        }
        nlohmann::json j{{"aggregate", report_json(summary.aggregate)},
                         {"instances", std::move(per_instance)},
                         {"breakdown", std::move(breakdown)},
                         {"scored", summary.scored},
                         {"missing_gold", summary.missing_gold}};
        std::ofstream json_out(out_path("-score.json"));
        json_out << j.dump(2) << "\n";
        summary.report_path = out_path("-score.json");
    }
    return summary;
}

void inspect_trace(const std::string& trace_path, std::ostream& out) {
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) {
        throw DataError(DataError::Code::Io, "cannot open " + trace_path);
    }
    std::string line;
    long offset = 0;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded() || !j.contains("event")) {
                throw DataError(DataError::Code::MalformedTrace,
                                "malformed trace record at byte offset " +
                                    std::to_string(offset),
                                offset);
            }
            const std::string event = j.at("event");
            out << "[" << j.value("iter", 0) << "] " << j.value("trace_id", "")
                << " " << event;
            const nlohmann::json data =
                j.contains("data") ? j.at("data") : nlohmann::json::object();
            if (event == "demo-selected") {
                out << ":";
                for (const auto& d : data.value("demos",
                                                nlohmann::json::array())) {
                    out << " " << d.value("id", "") << " (sim "
                        << d.value("sim", 0.0) << ")";
                }
            } else if (event == "retrieved") {
                out << ": {";
                bool first = true;
                for (const auto& s :
                     data.value("sentences", nlohmann::json::array())) {
                    out << (first ? "" : ", ") << "sent" << s.get<int>();
                    first = false;
                }
                out << "}";
                if (data.value("fallback", false)) out << " (fallback)";
            } else if (event == "proposed") {
                out << ":";
                for (const auto& s :
                     data.value("steps", nlohmann::json::array())) {
                    out << "\n      " << s.get<std::string>();
                }
                if (data.value("finish", false)) out << "\n      [finish]";
            } else if (event == "evaluated") {
                out << ": " << data.value("step", "") << " => "
                    << data.value("score", 0);
            } else if (event == "pruned") {
                for (const auto& d :
                     data.value("dropped", nlohmann::json::array())) {
                    out << "\n      - " << d.value("step", "") << " ["
                        << d.value("rule", "") << "]";
                }
                if (data.value("guard", false)) {
                    out << "\n      (non-empty guard kept the best candidate)";
                }
            } else if (event == "extended") {
                out << ": " << data.value("step", "");
            } else if (event == "hint") {
                out << ": " << data.value("hint", "");
            } else if (event == "terminated") {
                out << ": " << data.value("reason", "");
                if (data.contains("proof")) {
                    out << "\n      proof: " << data.value("proof", "");
                }
            } else if (!data.is_null() && !data.empty()) {
                out << ": " << data.dump();
            }
            out << "\n";
        }
        offset += static_cast<long>(line.size()) + 1;
    }
    if (in.bad()) {
        throw DataError(DataError::Code::MalformedTrace,
                        "read failure at byte offset " + std::to_string(offset),
                        offset);
    }
}

namespace {

// EntailmentBank task JSONL: context lives in meta.triples and the proof
// already uses the chain notation.
std::optional<nlohmann::json> convert_entailmentbank_record(
    const nlohmann::json& j, const std::string& dataset_name,
    std::string& error) {
    try {
        Instance inst;
        inst.id = j.at("id").get<std::string>();
        inst.question = j.value("question", "");
        inst.hypothesis = j.at("hypothesis").get<std::string>();
        inst.dataset = dataset_name;
        const auto& meta = j.at("meta");
        for (const auto& [key, value] : meta.at("triples").items()) {
            NodeId id = parse_node(key);
            inst.context[id.index] = value.get<std::string>();
        }
        if (meta.contains("depth_of_proof")) {
            inst.depth = meta.at("depth_of_proof").get<int>();
        }
        if (j.contains("proof") && j.at("proof").is_string()) {
            inst.gold = parse_proof_chain(j.at("proof").get<std::string>());
        }
        return instance_to_json(inst);
    } catch (const std::exception& e) {
        error = e.what();
        return std::nullopt;
    }
}

}  // namespace

int convert_dataset(const std::string& from, const std::string& input_path,
                    const std::string& output_path,
                    const std::string& dataset_name, std::ostream& log) {
    if (from != "entailmentbank" && from != "normalized") {
        log << "unsupported source format '" << from
            << "'; supported: entailmentbank, normalized\n"
            << "(the STREET AR-LSAT and PrOntoQA releases use bespoke step "
               "encodings; map them to the normalized schema with your own "
               "script)\n";
        return 1;
    }
    std::ifstream in(input_path);
    if (!in) {
        log << "cannot open " << input_path << "\n";
        return 2;
    }
    std::ofstream out(output_path);
    if (!out) {
        log << "cannot write " << output_path << "\n";
        return 2;
    }
    std::string line;
    long line_no = 0;
    long written = 0;
    long skipped = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            log << "line " << line_no << ": invalid JSON, skipped\n";
            ++skipped;
            continue;
        }
        std::string error;
        std::optional<nlohmann::json> record;
        if (from == "entailmentbank") {
            record = convert_entailmentbank_record(j, dataset_name, error);
        } else {
            try {
                record = instance_to_json(instance_from_json(j, line_no));
            } catch (const std::exception& e) {
                error = e.what();
            }
        }
        if (!record) {
            log << "line " << line_no << ": " << error << ", skipped\n";
            ++skipped;
            continue;
        }
        out << *record << "\n";
        ++written;
    }
    log << "converted " << written << " records (" << skipped
        << " skipped) -> " << output_path << "\n";
    return written > 0 ? 0 : 2;
}

}  // namespace entail
