#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "gossip/model.hpp"
#include "gossip/rng.hpp"

namespace gossip {

// Undirected simple graph for a single round, stored as compressed
// adjacency rows. Every row is sorted; the graph is symmetric and has no
// self-loops or repeated entries.
class RoundGraph {
public:
    RoundGraph() = default;
    explicit RoundGraph(std::uint32_t n) : offsets_(n + 1, 0) {}

    // Builds from an explicit edge list. Throws std::invalid_argument on
    // self-loops, duplicates or out-of-range endpoints.
    static RoundGraph from_edges(std::uint32_t n,
                                 std::span<const std::pair<node_id, node_id>> edges);

    std::uint32_t size() const
    {
        return offsets_.empty() ? 0 : static_cast<std::uint32_t>(offsets_.size() - 1);
    }
    std::uint32_t degree(node_id v) const { return offsets_[v + 1] - offsets_[v]; }
    std::span<const node_id> neighbors(node_id v) const
    {
        return {adjacency_.data() + offsets_[v], degree(v)};
    }
    std::size_t edge_count() const { return adjacency_.size() / 2; }
    bool has_edge(node_id u, node_id v) const;

private:
    friend class RoundGraphSampler;

    // Fills rows from edges listed in increasing linear pair order
    // (i, j) with j < i, which leaves every row sorted without a sort pass.
    void assign_ordered(std::uint32_t n, std::span<const std::pair<node_id, node_id>> edges);

    std::vector<std::uint32_t> offsets_;
    std::vector<node_id> adjacency_;
};

// Draws G(n, p) by skipping geometrically distributed gaps over the
// linearized index of the C(n,2) unordered pairs, so expected work is
// O(n + number of edges). Keeps a scratch buffer between calls; one sampler
// per worker.
class RoundGraphSampler {
public:
    RoundGraphSampler(std::uint32_t n, double p);
    explicit RoundGraphSampler(const ModelParams& params)
        : RoundGraphSampler(params.n(), params.p()) {}

    void sample(Engine& rng, RoundGraph& out);
    RoundGraph sample(Engine& rng);

    std::uint32_t n() const { return n_; }
    double p() const { return p_; }

private:
    std::uint32_t n_;
    double p_;
    double log_q_;
    std::vector<std::pair<node_id, node_id>> edges_;
};

RoundGraph sample_round_graph(const ModelParams& params, Engine& rng);

// Raw (n, p) form; p may be 0, which ModelParams does not allow.
RoundGraph sample_round_graph(std::uint32_t n, double p, Engine& rng);

// Uniform neighbour of v, or nothing when v is isolated.
std::optional<node_id> choose_uniform_neighbor(const RoundGraph& g, node_id v, Engine& rng);

} // namespace gossip
