#pragma once

#include <string_view>
#include <vector>

#include "entail/proof.hpp"

namespace entail {

struct GraphEmbedding {
    std::vector<double> values;
    double norm = 0.0;

    std::size_t dim() const { return values.size(); }
};

/// Cosine similarity in [-1, 1]; 0 when either embedding has zero norm.
/// Throws MetricError(DimensionMismatch) on different dimensions.
double similarity(const GraphEmbedding& a, const GraphEmbedding& b);

class GraphEncoder {
public:
    virtual ~GraphEncoder() = default;
    virtual GraphEmbedding encode(const ProofGraph& g,
                                  std::string_view hypothesis = "") const = 0;
    virtual std::size_t dim() const = 0;
};

/// Deterministic structural encoder used in place of a learned graph
/// network. The 64-dim vector is, in order:
///   [0..3]   scaled counts: leaves, steps, max depth, max in-degree
///            (min(x,16)/16 each)
///   [4..11]  histogram of step-conclusion depths, bins 1..8 (clipped),
///            normalized by step count
///   [12..15] histogram of premise arity, bins 1..4 (clipped), normalized
///            by step count
///   [16..63] 48-bucket hashed bag of Weisfeiler-Lehman labels after two
///            refinement sweeps over the unlabeled skeleton (labels hash
///            a node's previous label with its premises' labels),
///            normalized by node count
/// The empty graph encodes to the zero vector. Only the skeleton is used,
/// so consistently renumbering intermediates cannot change the result.
///
/// With `content_channel` on, 16 extra dims carry a hashed unigram bag of
/// the hypothesis text, weighted by `content_weight`.
class StructuralEncoder : public GraphEncoder {
public:
    struct Options {
        bool content_channel = false;
        double content_weight = 0.25;
    };

    StructuralEncoder() = default;
    explicit StructuralEncoder(Options opts) : opts_(opts) {}

    GraphEmbedding encode(const ProofGraph& g,
                          std::string_view hypothesis = "") const override;
    std::size_t dim() const override {
        return kStructureDim + (opts_.content_channel ? kContentDim : 0);
    }

    static constexpr std::size_t kStructureDim = 64;
    static constexpr std::size_t kContentDim = 16;
    static constexpr std::size_t kWlBuckets = 48;
    static constexpr int kWlIterations = 2;

private:
    Options opts_;
};

const StructuralEncoder& default_encoder();

}  // namespace entail
