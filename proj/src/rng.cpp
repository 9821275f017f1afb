#include "gossip/rng.hpp"

namespace gossip {

Engine make_engine(const SeedSpec& seed)
{
    const auto lo = [](std::uint64_t x) { return static_cast<std::uint32_t>(x & 0xffffffffu); };
    const auto hi = [](std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); };
    std::seed_seq seq{lo(seed.master_seed), hi(seed.master_seed),
                      lo(seed.stream_id), hi(seed.stream_id)};
    return Engine(seq);
}

} // namespace gossip
