#include "gossip/round_graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gossip {

namespace {

std::uint64_t pair_count(std::uint32_t n)
{
    return static_cast<std::uint64_t>(n) * (n - 1) / 2;
}

} // namespace

RoundGraph RoundGraph::from_edges(std::uint32_t n,
                                  std::span<const std::pair<node_id, node_id>> edges)
{
    std::vector<std::pair<node_id, node_id>> ordered;
    ordered.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u >= n || v >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (u == v)
            throw std::invalid_argument("self-loop in edge list");
        ordered.emplace_back(std::max(u, v), std::min(u, v));
    }
    std::sort(ordered.begin(), ordered.end());
    if (std::adjacent_find(ordered.begin(), ordered.end()) != ordered.end())
        throw std::invalid_argument("duplicate edge in edge list");

    RoundGraph g;
    g.assign_ordered(n, ordered);
    return g;
}

bool RoundGraph::has_edge(node_id u, node_id v) const
{
    const auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
}

void RoundGraph::assign_ordered(std::uint32_t n,
                                std::span<const std::pair<node_id, node_id>> edges)
{
    offsets_.assign(n + 1, 0);
    for (auto [i, j] : edges) {
        ++offsets_[i + 1];
        ++offsets_[j + 1];
    }
    for (std::uint32_t v = 0; v < n; ++v)
        offsets_[v + 1] += offsets_[v];

    adjacency_.resize(offsets_[n]);
    // For node v, edges (v, j<v) all precede edges (i>v, v) in linear
    // order, and each group is ascending, so appending keeps rows sorted.
    std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (auto [i, j] : edges) {
        adjacency_[cursor[i]++] = j;
        adjacency_[cursor[j]++] = i;
    }
}

RoundGraphSampler::RoundGraphSampler(std::uint32_t n, double p)
    : n_(n), p_(p), log_q_(0.0)
{
    if (n < 1)
        throw std::invalid_argument("graph needs at least one node");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("edge probability must lie in [0, 1]");
    if (p > 0.0 && p < 1.0)
        log_q_ = std::log1p(-p);
}

void RoundGraphSampler::sample(Engine& rng, RoundGraph& out)
{
    edges_.clear();
    const std::uint64_t total = pair_count(n_);

    if (p_ >= 1.0) {
        edges_.reserve(total);
        for (node_id i = 1; i < n_; ++i)
            for (node_id j = 0; j < i; ++j)
                edges_.emplace_back(i, j);
    } else if (p_ > 0.0) {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        // Pair index e maps to (i, j), j < i, with e = i(i-1)/2 + j.
        std::uint64_t e = 0;
        std::uint64_t row_start = 0;
        node_id row = 1;
        bool first = true;
        for (;;) {
            const double u = 1.0 - unit(rng); // (0, 1]
            const double skip = std::floor(std::log(u) / log_q_);
            const double remaining = static_cast<double>(total - e);
            if (skip >= remaining)
                break;
            const auto step = static_cast<std::uint64_t>(skip);
            e += first ? step : step + 1;
            first = false;
            if (e >= total)
                break;
            while (e >= row_start + row) {
                row_start += row;
                ++row;
            }
            edges_.emplace_back(row, static_cast<node_id>(e - row_start));
        }
    }
    out.assign_ordered(n_, edges_);
}

RoundGraph RoundGraphSampler::sample(Engine& rng)
{
    RoundGraph g;
    sample(rng, g);
    return g;
}

RoundGraph sample_round_graph(const ModelParams& params, Engine& rng)
{
    return RoundGraphSampler(params).sample(rng);
}

RoundGraph sample_round_graph(std::uint32_t n, double p, Engine& rng)
{
    return RoundGraphSampler(n, p).sample(rng);
}

std::optional<node_id> choose_uniform_neighbor(const RoundGraph& g, node_id v, Engine& rng)
{
    const auto row = g.neighbors(v);
    if (row.empty())
        return std::nullopt;
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(row.size() - 1));
    return row[pick(rng)];
}

} // namespace gossip
