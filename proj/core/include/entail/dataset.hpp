#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "entail/encode.hpp"
#include "entail/instance.hpp"

namespace entail {

struct DatasetSpec {
    std::string name;
    int max_depth = 4;
    std::map<std::string, std::string> splits;  // split name -> file path
};

/// Loads the normalized JSONL format: one record per line with
///   {"format_version":1, "id", "question", "hypothesis",
///    "context": {"sent1": "...", ...}, "proof": "<chain>"|null,
///    "meta": {"dataset", "depth", "sequential"}}
/// Gold proofs are parsed and validated against the record's context;
/// failures carry the line number. EntailmentBank records whose gold needs
/// a single reasoning step are excluded.
std::vector<Instance> load_instances(const std::string& path);

/// Inverse of load_instances for the same schema (modulo the records the
/// loader excludes).
void dump_instances(const std::vector<Instance>& instances,
                    const std::string& path);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j, long line = 0);

struct Classification {
    bool sequential = false;
    int depth = 0;
};

/// `sequential` means the gold proof is a chain: every step after the
/// first consumes exactly the previous step's conclusion as its only
/// intermediate premise. `depth` is the longest leaf-to-root path in
/// steps. Throws DataError(NoGold) without a gold proof.
Classification classify(const Instance& inst);

/// Keeps the instances that carry gold proofs, precomputing embeddings and
/// prompt blocks so the database can be shared read-only.
std::vector<Demonstration> build_demo_db(
    const std::vector<Instance>& instances,
    const GraphEncoder& encoder = default_encoder());

}  // namespace entail
