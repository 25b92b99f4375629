#include "entail/dataset.hpp"

#include <fstream>

#include "entail/parse.hpp"
#include "entail/prompts.hpp"

namespace entail {

namespace {

constexpr int kFormatVersion = 1;

[[noreturn]] void malformed(long line, const std::string& why) {
    throw DataError(DataError::Code::MalformedRecord,
                    "line " + std::to_string(line) + ": " + why, line);
}

}  // namespace

Instance instance_from_json(const nlohmann::json& j, long line) {
    if (!j.is_object()) malformed(line, "record is not an object");
    if (j.value("format_version", kFormatVersion) != kFormatVersion) {
        malformed(line, "unsupported format_version");
    }
    for (const char* field : {"id", "question", "hypothesis", "context"}) {
        if (!j.contains(field)) {
            malformed(line, std::string("missing field '") + field + "'");
        }
    }
    Instance inst;
    try {
        inst.id = j.at("id").get<std::string>();
        inst.question = j.at("question").get<std::string>();
        inst.hypothesis = j.at("hypothesis").get<std::string>();
        for (const auto& [key, value] : j.at("context").items()) {
            NodeId id = parse_node(key);
            if (!id.is_sentence()) {
                malformed(line, "context key is not a sentence: " + key);
            }
            inst.context[id.index] = value.get<std::string>();
        }
        if (j.contains("meta") && j.at("meta").is_object()) {
            const auto& meta = j.at("meta");
            inst.dataset = meta.value("dataset", "");
            if (meta.contains("depth")) inst.depth = meta.at("depth").get<int>();
            if (meta.contains("sequential")) {
                inst.sequential = meta.at("sequential").get<bool>();
            }
        }
    } catch (const ProofError& e) {
        malformed(line, e.what());
    } catch (const nlohmann::json::exception& e) {
        malformed(line, e.what());
    }
    if (j.contains("proof") && !j.at("proof").is_null()) {
        try {
            ProofGraph gold =
                parse_proof_chain(j.at("proof").get<std::string>());
            for (int idx : gold.sentence_indices()) {
                if (!inst.context.count(idx)) {
                    throw ProofError(ProofError::Code::UnknownNode,
                                     "gold references sent" +
                                         std::to_string(idx) +
                                         " absent from context");
                }
            }
            inst.gold = std::move(gold);
        } catch (const ProofError& e) {
            throw DataError(DataError::Code::InvalidGold,
                            "line " + std::to_string(line) + ": " + e.what(),
                            line);
        }
    }
    return inst;
}

nlohmann::json instance_to_json(const Instance& inst) {
    nlohmann::json context = nlohmann::json::object();
    for (const auto& [index, text] : inst.context) {
        context["sent" + std::to_string(index)] = text;
    }
    nlohmann::json meta = nlohmann::json::object();
    if (!inst.dataset.empty()) meta["dataset"] = inst.dataset;
    if (inst.depth) meta["depth"] = *inst.depth;
    if (inst.sequential) meta["sequential"] = *inst.sequential;
    nlohmann::json j{{"format_version", kFormatVersion},
                     {"id", inst.id},
                     {"question", inst.question},
                     {"hypothesis", inst.hypothesis},
                     {"context", std::move(context)}};
    if (inst.gold) {
        j["proof"] = serialize_chain(*inst.gold);
    } else {
        j["proof"] = nullptr;
    }
    if (!meta.empty()) j["meta"] = std::move(meta);
    return j;
}

std::vector<Instance> load_instances(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(DataError::Code::Io, "cannot open " + path);
    }
    std::vector<Instance> out;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) malformed(line_no, "invalid JSON");
        Instance inst = instance_from_json(j, line_no);
        // EntailmentBank evaluation skips single-step proofs.
        if (inst.dataset == "entailmentbank" && inst.gold &&
            classify(inst).depth == 1) {
            continue;
        }
        out.push_back(std::move(inst));
    }
    return out;
}

void dump_instances(const std::vector<Instance>& instances,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw DataError(DataError::Code::Io, "cannot write " + path);
    }
    for (const auto& inst : instances) {
        out << instance_to_json(inst) << "\n";
    }
}

Classification classify(const Instance& inst) {
    if (!inst.gold) {
        throw DataError(DataError::Code::NoGold,
                        "instance " + inst.id + " has no gold proof");
    }
    const auto& steps = inst.gold->steps();
    bool sequential = true;
    for (std::size_t i = 1; i < steps.size(); ++i) {
        std::vector<NodeId> ints;
        for (const auto& p : steps[i].premises) {
            if (p.is_intermediate()) ints.push_back(p);
        }
        if (ints.size() != 1 || ints.front() != steps[i - 1].conclusion) {
            sequential = false;
            break;
        }
    }
    return {sequential, inst.gold->max_depth()};
}

std::vector<Demonstration> build_demo_db(
    const std::vector<Instance>& instances, const GraphEncoder& encoder) {
    std::vector<Demonstration> db;
    for (const auto& inst : instances) {
        if (!inst.gold) continue;
        Demonstration demo;
        demo.instance = inst;
        demo.embedding = encoder.encode(*inst.gold, inst.hypothesis);
        db.push_back(std::move(demo));
        prerender_demo_block(db.back());
    }
    return db;
}

}  // namespace entail
