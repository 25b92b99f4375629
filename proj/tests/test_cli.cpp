// Drives the installed command-line surface as a user would, via
// subprocesses against the bundled fixtures.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "testutil.hpp"

namespace {

namespace fs = std::filesystem;

struct CliRun {
    int exit_code = -1;
    std::string output;
};

CliRun run_cli(const std::string& args) {
    fs::path out_file =
        fs::temp_directory_path() / "entail-cli-test-output.txt";
    std::string command = std::string(ENTAIL_CLI_BIN) + " " + args + " > " +
                          out_file.string() + " 2>&1";
    int status = std::system(command.c_str());
    CliRun result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::ostringstream text;
    text << in.rdbuf();
    result.output = text.str();
    fs::remove(out_file);
    return result;
}

std::string write_config(const fs::path& dir) {
    nlohmann::json config{
        {"dataset",
         {{"name", "fixtures"},
          {"max_depth", 4},
          {"splits",
           {{"dev", entail::testutil::fixture_path("fixtures.jsonl")}}}}},
        {"model", {{"name", "mock:oracle"}}},
        {"out_dir", (dir / "runs").string()},
    };
    fs::path path = dir / "config.json";
    std::ofstream out(path);
    out << config.dump(2);
    return path.string();
}

}  // namespace

TEST_CASE("the CLI runs, scores and inspects the fixture batch") {
    fs::path dir = fs::temp_directory_path() / "entail-cli-e2e";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string config = write_config(dir);

    CliRun run = run_cli("run --config " + config);
    CHECK(run.exit_code == 0);
    CHECK(run.output.find("proved: 13") != std::string::npos);

    CliRun score = run_cli("score --config " + config);
    CHECK(score.exit_code == 0);
    CHECK(score.output.find("Ev-F 1") != std::string::npos);
    CHECK(score.output.find("Pr-F 1") != std::string::npos);

    CliRun inspect = run_cli(
        "inspect " + (dir / "runs" / "traces" / "eb-mars-orbit.jsonl").string());
    CHECK(inspect.exit_code == 0);
    CHECK(inspect.output.find("hypothesis-reached") != std::string::npos);

    CliRun print = run_cli("print-config --config " + config);
    CHECK(print.exit_code == 0);
    CHECK(nlohmann::json::parse(print.output).contains("search"));

    // resume makes no new calls
    CliRun rerun = run_cli("run --config " + config);
    CHECK(rerun.exit_code == 0);
    CHECK(rerun.output.find("resumed: 13") != std::string::npos);
    CHECK(rerun.output.find("llm calls: 0") != std::string::npos);

    fs::remove_all(dir);
}

TEST_CASE("CLI exit codes: usage 1, data 2, budget 3") {
    CHECK(run_cli("--definitely-not-a-flag").exit_code == 1);
    CHECK(run_cli("").exit_code == 1);  // a subcommand is required
    CHECK(run_cli("inspect /no/such/trace.jsonl").exit_code == 2);

    fs::path dir = fs::temp_directory_path() / "entail-cli-budget";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string config = write_config(dir);
    CliRun budget =
        run_cli("run --config " + config + " --max-calls-per-instance 1");
    CHECK(budget.exit_code == 3);
    fs::remove_all(dir);
}

TEST_CASE("the converter round-trips an entailmentbank-shaped record") {
    fs::path dir = fs::temp_directory_path() / "entail-cli-convert";
    fs::remove_all(dir);
    fs::create_directories(dir);
    {
        std::ofstream out(dir / "native.jsonl");
        out << nlohmann::json{
                   {"id", "eb-x"},
                   {"question", "why?"},
                   {"hypothesis", "h"},
                   {"proof",
                    "sent1 & sent2 -> int1: mid; int1 & sent3 -> hypothesis; "},
                   {"meta",
                    {{"triples",
                      {{"sent1", "a"}, {"sent2", "b"}, {"sent3", "c"}}},
                     {"depth_of_proof", 2}}}}
            << "\n";
    }
    CliRun convert = run_cli("convert --from entailmentbank --in " +
                             (dir / "native.jsonl").string() + " --out " +
                             (dir / "norm.jsonl").string());
    CHECK(convert.exit_code == 0);
    auto loaded = entail::load_instances((dir / "norm.jsonl").string());
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].gold->size() == 2);
    fs::remove_all(dir);
}
