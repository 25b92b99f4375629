#include <doctest.h>

#include "entail/demo.hpp"
#include "entail/mock.hpp"
#include "entail/parse.hpp"
#include "testutil.hpp"

using namespace entail;
using namespace entail::testutil;

namespace {

Demonstration make_demo(std::string id, const char* proof) {
    Demonstration d;
    d.instance.id = std::move(id);
    d.instance.hypothesis = "h of " + d.instance.id;
    d.instance.gold = parse_proof_chain(proof);
    for (int i : d.instance.gold->sentence_indices()) {
        d.instance.context[i] = "sentence " + std::to_string(i);
    }
    return d;
}

}  // namespace

TEST_CASE("isomorphic gold ranks first") {
    std::vector<Instance> fixtures = load_fixtures();
    const Instance& mars = fixture(fixtures, "eb-mars-orbit");

    std::vector<Demonstration> db;
    db.push_back(make_demo("chain", "sent1 & sent2 -> int1; int1 & sent3 -> "
                                    "int2; int2 & sent4 -> hypothesis;"));
    // renumbered copy of the mars shape
    db.push_back(make_demo("mars-copy",
                           "sent21 & sent23 -> int2; sent20 & sent4 -> int1; "
                           "int2 & int1 -> hypothesis;"));
    db.push_back(make_demo("wide", "sent1 & sent2 & sent3 -> int1; int1 & "
                                   "sent4 -> hypothesis;"));

    GuessedGraph guess{*mars.gold, {}};
    auto picked = search_demonstrations(mars, db, guess, 1);
    REQUIRE(picked.size() == 1);
    CHECK(picked[0].id() == "mars-copy");

    auto ranked = rank_demonstrations(mars, db, guess);
    CHECK(ranked[0].score == doctest::Approx(1.0));
}

TEST_CASE("selection is deterministic and caps at the database size") {
    std::vector<Instance> fixtures = load_fixtures();
    const Instance& mars = fixture(fixtures, "eb-mars-orbit");
    std::vector<Demonstration> db;
    db.push_back(make_demo("a", "sent1 & sent2 -> hypothesis;"));
    db.push_back(make_demo("b", "sent1 & sent2 -> int1; int1 & sent3 -> "
                                "hypothesis;"));
    GuessedGraph guess{*mars.gold, {}};

    auto first = search_demonstrations(mars, db, guess, 3);
    REQUIRE(first.size() == 2);  // min(k, |db|)
    for (int i = 0; i < 5; ++i) {
        auto again = search_demonstrations(mars, db, guess, 3);
        REQUIRE(again.size() == first.size());
        for (std::size_t j = 0; j < first.size(); ++j) {
            CHECK(again[j].id() == first[j].id());
        }
    }
}

TEST_CASE("no self-retrieval") {
    std::vector<Instance> fixtures = load_fixtures();
    const Instance& mars = fixture(fixtures, "eb-mars-orbit");
    std::vector<Demonstration> db = build_demo_db(fixtures);
    GuessedGraph guess{*mars.gold, {}};
    for (const auto& demo :
         search_demonstrations(mars, db, guess, static_cast<int>(db.size()))) {
        CHECK(demo.id() != mars.id);
    }
}

TEST_CASE("chain-shaped guess prefers the chain-shaped demonstration") {
    std::vector<Instance> fixtures = load_fixtures();
    const Instance& mars = fixture(fixtures, "eb-mars-orbit");
    std::vector<Demonstration> db;
    db.push_back(make_demo("star", "sent1 & sent2 -> int1; sent3 & sent4 -> "
                                   "int2; sent5 & sent6 -> int3; int1 & int2 "
                                   "& int3 -> hypothesis;"));
    db.push_back(make_demo("deep-chain",
                           "sent1 & sent2 -> int1; int1 & sent3 -> int2; "
                           "int2 & sent4 -> int3; int3 & sent5 -> "
                           "hypothesis;"));
    GuessedGraph guess{chain_graph(4), {}};
    auto picked = search_demonstrations(mars, db, guess, 2);
    REQUIRE(picked.size() == 2);
    CHECK(picked[0].id() == "deep-chain");

    auto ranked = rank_demonstrations(mars, db, guess);
    CHECK(ranked[0].score > ranked[1].score);
}

TEST_CASE("guess_graph initial call parses the model's proof") {
    std::vector<Instance> fixtures = load_fixtures();
    const Instance& mars = fixture(fixtures, "eb-mars-orbit");
    ScriptedClient client;
    client.set_default({serialize_chain(*mars.gold)});
    GuessedGraph guess = guess_graph(std::nullopt, ProofGraph{}, client, mars);
    CHECK(guess.graph == *mars.gold);
    REQUIRE(guess.provenance.size() == 3);
    for (auto tag : guess.provenance) CHECK(tag == StepProvenance::Guessed);
}

TEST_CASE("guess_graph falls back on garbage") {
    std::vector<Instance> fixtures = load_fixtures();
    const Instance& mars = fixture(fixtures, "eb-mars-orbit");
    ScriptedClient client;
    client.set_default({"I am not sure about this one."});
    GuessedGraph guess = guess_graph(std::nullopt, ProofGraph{}, client, mars);
    REQUIRE(guess.graph.size() == 2);  // two steps over sent1..sent4
    CHECK(guess.graph.steps()[0].premises ==
          std::vector<NodeId>{NodeId::sentence(1), NodeId::sentence(2)});
    CHECK(guess.graph.steps()[1].premises ==
          std::vector<NodeId>{NodeId::sentence(3), NodeId::sentence(4)});
}

TEST_CASE("guess_graph merge replaces guessed steps with constructed ones") {
    std::vector<Instance> fixtures = load_fixtures();
    const Instance& mars = fixture(fixtures, "eb-mars-orbit");
    GuessedGraph prior;
    prior.graph = parse_proof_chain(
        "sent9 & sent10 -> int1: guessed; sent21 & sent23 -> int2; int1 & "
        "int2 -> hypothesis;");
    prior.provenance.assign(3, StepProvenance::Guessed);

    ProofGraph constructed =
        parse_proof_chain("sent1 & sent2 -> int1: constructed;");
    ScriptedClient unused;  // the merge path never calls the model
    GuessedGraph merged =
        guess_graph(prior, constructed, unused, mars);

    REQUIRE(merged.graph.size() == 3);
    CHECK(merged.graph.steps()[0].conclusion_text == "constructed");
    CHECK(merged.provenance[0] == StepProvenance::Constructed);
    CHECK(merged.provenance[1] == StepProvenance::Guessed);
    // int1's guessed derivation was replaced, the rest still derivable
    CHECK(merged.graph.steps()[1].conclusion == NodeId::intermediate(2));
    CHECK(merged.graph.steps()[2].conclusion == NodeId::hypothesis());
    CHECK(unused.calls() == 0);
}

TEST_CASE("guess_graph merge drops guessed steps with broken premises") {
    std::vector<Instance> fixtures = load_fixtures();
    const Instance& mars = fixture(fixtures, "eb-mars-orbit");
    GuessedGraph prior;
    prior.graph = parse_proof_chain(
        "sent9 & sent10 -> int1; int1 & sent3 -> int2; int2 & sent4 -> "
        "hypothesis;");
    prior.provenance.assign(3, StepProvenance::Guessed);

    // constructed concludes int1 differently; guessed int2 now depends on a
    // replaced conclusion and stays derivable; nothing breaks
    ProofGraph constructed = parse_proof_chain("sent20 & sent4 -> int1;");
    ScriptedClient unused;
    GuessedGraph merged = guess_graph(prior, constructed, unused, mars);
    CHECK(merged.graph.size() == 3);

    // a guessed deduction realized under another number is absorbed, and
    // everything that hung off the guessed numbering drops out
    GuessedGraph prior2;
    prior2.graph = parse_proof_chain(
        "sent20 & sent4 -> int5; int5 & sent3 -> int6; int6 & sent7 -> "
        "hypothesis;");
    prior2.provenance.assign(3, StepProvenance::Guessed);
    ProofGraph constructed2 = parse_proof_chain("sent20 & sent4 -> int1;");
    GuessedGraph merged2 = guess_graph(prior2, constructed2, unused, mars);
    REQUIRE(merged2.graph.size() == 1);
    CHECK(merged2.provenance[0] == StepProvenance::Constructed);
}

TEST_CASE("embedding cache on demonstrations matches direct encoding") {
    std::vector<Instance> fixtures = load_fixtures();
    std::vector<Demonstration> db = build_demo_db(fixtures);
    for (const auto& demo : db) {
        REQUIRE(demo.embedding.has_value());
        GraphEmbedding direct = default_encoder().encode(
            demo.gold(), demo.instance.hypothesis);
        CHECK(demo.embedding->values == direct.values);
    }
    CHECK(db.size() == fixtures.size());  // every fixture carries gold
}
