#include <doctest.h>

#include "entail/parse.hpp"
#include "entail/proof.hpp"
#include "testutil.hpp"

using namespace entail;
using namespace entail::testutil;

TEST_CASE("node ids render canonically") {
    CHECK(NodeId::sentence(7).str() == "sent7");
    CHECK(NodeId::intermediate(1).str() == "int1");
    CHECK(NodeId::hypothesis().str() == "hypothesis");
    CHECK(NodeId::sentence(4) == parse_node(" SENT4 "));
    CHECK(NodeId::hypothesis() == parse_node("Hypothesis"));
    CHECK_THROWS_AS(parse_node("sent0"), ProofError);
    CHECK_THROWS_AS(parse_node("sentx"), ProofError);
}

TEST_CASE("step validation catches malformed deductions") {
    ProofStep ok{{NodeId::sentence(1), NodeId::sentence(2)},
                 NodeId::intermediate(1),
                 ""};
    CHECK_NOTHROW(validate_step(ok));

    ProofStep sentence_conclusion = ok;
    sentence_conclusion.conclusion = NodeId::sentence(3);
    CHECK_THROWS_AS(validate_step(sentence_conclusion), ProofError);

    ProofStep duplicate = ok;
    duplicate.premises = {NodeId::sentence(1), NodeId::sentence(1)};
    CHECK_THROWS_AS(validate_step(duplicate), ProofError);

    ProofStep self_premise = ok;
    self_premise.premises = {NodeId::intermediate(1), NodeId::sentence(2)};
    CHECK_THROWS_AS(validate_step(self_premise), ProofError);

    ProofStep hyp_premise = ok;
    hyp_premise.premises = {NodeId::hypothesis(), NodeId::sentence(2)};
    CHECK_THROWS_AS(validate_step(hyp_premise), ProofError);

    ProofStep empty = ok;
    empty.premises.clear();
    CHECK_THROWS_AS(validate_step(empty), ProofError);
}

TEST_CASE("graph invariants") {
    ProofGraph mars = mars_graph();
    CHECK(mars.size() == 3);
    CHECK(mars.edge_count() == 6);
    CHECK(mars.sentence_leaves().size() == 4);
    CHECK(mars.node_count() == 7);
    CHECK(mars.concludes_hypothesis());
    CHECK(mars.max_depth() == 2);

    SUBCASE("duplicate conclusion") {
        auto steps = mars.steps();
        steps.push_back(
            {{NodeId::sentence(5), NodeId::sentence(6)},
             NodeId::intermediate(1),
             ""});
        CHECK_THROWS_WITH_AS(ProofGraph::from_steps(steps),
                             doctest::Contains("int1"), ProofError);
    }
    SUBCASE("forward reference") {
        auto steps = mars.steps();
        steps[0].premises[0] = NodeId::intermediate(9);
        CHECK_THROWS_AS(ProofGraph::from_steps(steps), ProofError);
    }
    SUBCASE("intermediate indices need not be dense or ordered") {
        CHECK_NOTHROW(parse_proof_chain(
            "sent1 & sent2 -> int7; sent3 & int7 -> int2; int2 -> "
            "hypothesis;"));
    }
}

TEST_CASE("extend appends without touching the original") {
    ProofGraph empty;
    ProofStep first{{NodeId::sentence(1), NodeId::sentence(2)},
                    NodeId::intermediate(1),
                    "a"};
    ProofGraph one = empty.extended(first);
    CHECK(empty.empty());
    CHECK(one.size() == 1);

    ProofStep second{{NodeId::intermediate(1), NodeId::sentence(3)},
                     NodeId::intermediate(2),
                     "b"};
    CHECK(one.extended(second).size() == 2);

    CHECK_THROWS_AS(empty.extended(second), ProofError);  // unknown premise
}

TEST_CASE("leaf closure") {
    ProofGraph mars = mars_graph();
    std::set<NodeId> int1_closure{NodeId::sentence(20), NodeId::sentence(4)};
    CHECK(leaf_closure(mars, NodeId::intermediate(1)) == int1_closure);

    std::set<NodeId> all{NodeId::sentence(4), NodeId::sentence(20),
                         NodeId::sentence(21), NodeId::sentence(23)};
    CHECK(leaf_closure(mars, NodeId::hypothesis()) == all);
    CHECK(leaf_closure(mars, NodeId::sentence(4)) ==
          std::set<NodeId>{NodeId::sentence(4)});
    CHECK_THROWS_AS(leaf_closure(mars, NodeId::intermediate(9)), ProofError);

    SUBCASE("single root closure covers every leaf") {
        std::mt19937_64 rng(11);
        for (int i = 0; i < 50; ++i) {
            ProofGraph g = random_graph(rng);
            if (!g.concludes_hypothesis()) continue;
            // only graphs whose hypothesis sits above everything
            auto closure = leaf_closure(g, NodeId::hypothesis());
            bool single_root = true;
            std::set<NodeId> consumed;
            for (const auto& step : g.steps()) {
                for (const auto& p : step.premises) consumed.insert(p);
            }
            for (const auto& step : g.steps()) {
                if (!step.conclusion.is_hypothesis() &&
                    !consumed.count(step.conclusion)) {
                    single_root = false;
                }
            }
            if (single_root) {
                CHECK(closure == g.sentence_leaves());
            }
        }
    }
}

TEST_CASE("graph equality ignores premise order and text") {
    ProofGraph a = parse_proof_chain("sent4 & sent7 -> int1: one; int1 & sent2 -> hypothesis;");
    ProofGraph b = parse_proof_chain("sent7 & sent4 -> int1: two; int1 & sent2 -> hypothesis;");
    CHECK(a == b);
    ProofGraph c = parse_proof_chain("sent4 & sent8 -> int1; int1 & sent2 -> hypothesis;");
    CHECK_FALSE(a == c);
}
