#pragma once

#include <cstdint>
#include <random>

namespace gossip {

// One reproducible random stream: the experiment seed plus a stream index
// (usually the trial number).
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

using Engine = std::mt19937_64;

// Both 64-bit fields are split into 32-bit words and fed through
// std::seed_seq, so adjacent stream ids yield unrelated engine states.
// Reproducible for a given standard library; not promised across them.
Engine make_engine(const SeedSpec& seed);

// Stream `index` of an experiment whose base seed is `base`. Trial i of an
// experiment runs on {master_seed, base.stream_id + i}, so a single trial
// can be replayed from the stream id recorded in its trace.
inline SeedSpec substream(const SeedSpec& base, std::uint64_t index)
{
    return {base.master_seed, base.stream_id + index};
}

} // namespace gossip
