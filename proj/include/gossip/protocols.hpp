#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gossip/model.hpp"
#include "gossip/rng.hpp"
#include "gossip/round_graph.hpp"

namespace gossip {

enum class ProtocolKind { push, pull, push_pull };

inline constexpr ProtocolKind all_protocols[] = {ProtocolKind::push, ProtocolKind::pull,
                                                 ProtocolKind::push_pull};

std::string_view to_string(ProtocolKind kind);

// Accepts "push", "pull", "pushpull" (also "push_pull", "push&pull").
ProtocolKind parse_protocol(std::string_view name);

// Informed set at a round boundary.
struct SpreadState {
    std::vector<std::uint8_t> informed;
    std::uint32_t count = 0;
    std::uint32_t round = 0;

    // Nodes 0..k-1 informed, round 0.
    static SpreadState initial(std::uint32_t n, std::uint32_t k = 1);
    static SpreadState with_informed(std::uint32_t n, std::span<const node_id> informed_nodes);

    std::uint32_t size() const { return static_cast<std::uint32_t>(informed.size()); }
    bool complete() const { return count == size(); }
};

// Per-node events of one round. Flags only carry meaning for nodes that
// were uninformed when the round started.
struct RoundOutcome {
    std::vector<node_id> newly_informed; // ascending
    std::vector<std::uint8_t> pushed;    // some round-start-informed node chose y
    std::vector<std::uint8_t> pulled;    // y chose a round-start-informed node
};

// choices[v] is v's contacted neighbour, or no_choice when v did not act
// (isolated, or not a participant under the protocol).
inline constexpr node_id no_choice = std::numeric_limits<node_id>::max();
using ChoiceVector = std::vector<node_id>;

// Draws choices for the nodes that act under `kind`: informed nodes for
// Push, uninformed for Pull, everyone for Push&Pull. Nodes are visited in
// id order; isolated nodes consume no randomness.
void draw_choices(const SpreadState& state, ProtocolKind kind, const RoundGraph& g, Engine& rng,
                  ChoiceVector& choices);

// Every non-isolated node draws, regardless of protocol.
ChoiceVector draw_all_choices(const RoundGraph& g, Engine& rng);

// Applies the protocol rule to fixed choices against the round-start
// informed set. Choices of nodes that do not act under `kind` are ignored.
void resolve_round(const SpreadState& start, ProtocolKind kind, const RoundGraph& g,
                   const ChoiceVector& choices, RoundOutcome& out);

// Marks the outcome's newly informed nodes and advances the round counter.
void apply_outcome(SpreadState& state, const RoundOutcome& outcome);

// One synchronous round. Throws std::logic_error if everyone is already
// informed.
std::pair<SpreadState, RoundOutcome> run_round(SpreadState state, ProtocolKind kind,
                                               const RoundGraph& g, Engine& rng);

struct SpreadTrace {
    ProtocolKind protocol = ProtocolKind::push;
    ModelParams params{2, 1.0};
    SeedSpec seed;
    std::vector<std::uint32_t> counts; // I_0 = 1, ..., I_T = n

    std::uint32_t rounds() const { return static_cast<std::uint32_t>(counts.size() - 1); }
};

class RoundLimitExceeded : public std::runtime_error {
public:
    RoundLimitExceeded(SeedSpec seed, std::uint64_t max_rounds, std::uint32_t informed);

    SeedSpec seed;
    std::uint64_t max_rounds;
    std::uint32_t informed;
};

// 10^4 * (log2 n + ln(n)/a + 10).
std::uint64_t default_max_rounds(const ModelParams& params);

SpreadTrace run_to_completion(const ModelParams& params, ProtocolKind kind, const SeedSpec& seed,
                              std::uint64_t max_rounds);
SpreadTrace run_to_completion(const ModelParams& params, ProtocolKind kind, const SeedSpec& seed);

// Rounds from the first time at least k nodes are informed until the first
// time at least m are. Requires 1 <= k <= m <= n.
std::uint32_t phase_time(const SpreadTrace& trace, std::uint32_t k, std::uint32_t m);

} // namespace gossip
