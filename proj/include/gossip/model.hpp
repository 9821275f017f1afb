#pragma once

#include <cstdint>

namespace gossip {

using node_id = std::uint32_t;

// Experiment universe: n nodes, each round a fresh G(n, p) with p = a/n.
class ModelParams {
public:
    // Throws std::invalid_argument unless n >= 2, a > 0 and a <= n.
    ModelParams(std::uint32_t n, double a);

    // Convenience for tests and the oracle: a = p * n.
    static ModelParams from_edge_probability(std::uint32_t n, double p);

    std::uint32_t n() const { return n_; }
    double a() const { return a_; }
    double p() const { return p_; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    std::uint32_t n_;
    double a_;
    double p_;
};

} // namespace gossip
