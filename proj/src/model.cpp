#include "gossip/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gossip {

ModelParams::ModelParams(std::uint32_t n, double a) : n_(n), a_(a), p_(0.0)
{
    if (n < 2)
        throw std::invalid_argument("n must be at least 2 (got " + std::to_string(n) + ")");
    if (!std::isfinite(a) || a <= 0.0)
        throw std::invalid_argument("a must be a positive finite number");
    if (a > static_cast<double>(n))
        throw std::invalid_argument("a must not exceed n (edge probability a/n > 1)");
    p_ = a / static_cast<double>(n);
    if (p_ > 1.0)
        p_ = 1.0;
}

ModelParams ModelParams::from_edge_probability(std::uint32_t n, double p)
{
    ModelParams params(n, p * static_cast<double>(n));
    params.p_ = p;
    return params;
}

} // namespace gossip
