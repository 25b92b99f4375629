#include <benchmark/benchmark.h>

#include <random>

#include "entail/dataset.hpp"
#include "entail/demo.hpp"
#include "entail/encode.hpp"
#include "entail/metrics.hpp"
#include "entail/mock.hpp"
#include "entail/parse.hpp"
#include "entail/search.hpp"

using namespace entail;

namespace {

const std::vector<Instance>& fixtures() {
    static std::vector<Instance> all =
        load_instances(std::string(ENTAIL_FIXTURE_DIR) + "/fixtures.jsonl");
    return all;
}

const Instance& mars() {
    for (const auto& inst : fixtures()) {
        if (inst.id == "eb-mars-orbit") return inst;
    }
    throw std::runtime_error("missing fixture");
}

void bench_parse_chain(benchmark::State& state) {
    std::string text = serialize_chain(*mars().gold);
    for (auto _ : state) {
        benchmark::DoNotOptimize(parse_proof_chain(text));
    }
}
BENCHMARK(bench_parse_chain);

void bench_serialize_chain(benchmark::State& state) {
    ProofGraph g = *mars().gold;
    for (auto _ : state) {
        benchmark::DoNotOptimize(serialize_chain(g));
    }
}
BENCHMARK(bench_serialize_chain);

void bench_encode_graph(benchmark::State& state) {
    ProofGraph g = *mars().gold;
    for (auto _ : state) {
        benchmark::DoNotOptimize(default_encoder().encode(g));
    }
}
BENCHMARK(bench_encode_graph);

void bench_rank_demonstrations(benchmark::State& state) {
    auto all = fixtures();
    std::vector<Demonstration> db = build_demo_db(all);
    GuessedGraph guess{*mars().gold, {}};
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            rank_demonstrations(mars(), db, guess));
    }
}
BENCHMARK(bench_rank_demonstrations);

void bench_exact_ged(benchmark::State& state) {
    ProofGraph a = *mars().gold;
    ProofGraph b = parse_proof_chain(
        "sent20 & sent4 -> int1; sent21 & sent23 -> int2;");
    for (auto _ : state) {
        benchmark::DoNotOptimize(graph_edit_distance(a, b));
    }
}
BENCHMARK(bench_exact_ged);

void bench_proof_scores(benchmark::State& state) {
    ProofGraph gold = *mars().gold;
    for (auto _ : state) {
        benchmark::DoNotOptimize(proof_scores(gold, gold));
    }
}
BENCHMARK(bench_proof_scores);

void bench_oracle_search(benchmark::State& state) {
    auto all = fixtures();
    std::vector<Demonstration> db = build_demo_db(all);
    OracleClient oracle(all);
    SearchConfig cfg;
    cfg.max_depth = 2;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_search(mars(), db, oracle, cfg));
    }
}
BENCHMARK(bench_oracle_search);

}  // namespace

BENCHMARK_MAIN();
