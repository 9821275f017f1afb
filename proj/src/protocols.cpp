#include "gossip/protocols.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace gossip {

namespace {

bool pushes(ProtocolKind kind) { return kind != ProtocolKind::pull; }
bool pulls(ProtocolKind kind) { return kind != ProtocolKind::push; }

} // namespace

std::string_view to_string(ProtocolKind kind)
{
    switch (kind) {
    case ProtocolKind::push:
        return "push";
    case ProtocolKind::pull:
        return "pull";
    case ProtocolKind::push_pull:
        return "pushpull";
    }
    return "unknown";
}

ProtocolKind parse_protocol(std::string_view name)
{
    std::string lowered;
    for (char c : name)
        lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lowered == "push")
        return ProtocolKind::push;
    if (lowered == "pull")
        return ProtocolKind::pull;
    if (lowered == "pushpull" || lowered == "push_pull" || lowered == "push&pull" ||
        lowered == "push-pull")
        return ProtocolKind::push_pull;
    throw std::invalid_argument("unknown protocol '" + std::string(name) +
                                "' (expected push, pull or pushpull)");
}

SpreadState SpreadState::initial(std::uint32_t n, std::uint32_t k)
{
    if (k < 1 || k > n)
        throw std::invalid_argument("initial informed count must lie in [1, n]");
    SpreadState s;
    s.informed.assign(n, 0);
    std::fill_n(s.informed.begin(), k, std::uint8_t{1});
    s.count = k;
    return s;
}

SpreadState SpreadState::with_informed(std::uint32_t n, std::span<const node_id> informed_nodes)
{
    SpreadState s;
    s.informed.assign(n, 0);
    for (node_id v : informed_nodes) {
        if (v >= n)
            throw std::invalid_argument("informed node out of range");
        if (!s.informed[v]) {
            s.informed[v] = 1;
            ++s.count;
        }
    }
    if (s.count == 0)
        throw std::invalid_argument("at least one node must be informed");
    return s;
}

void draw_choices(const SpreadState& state, ProtocolKind kind, const RoundGraph& g, Engine& rng,
                  ChoiceVector& choices)
{
    const std::uint32_t n = g.size();
    choices.assign(n, no_choice);
    for (node_id v = 0; v < n; ++v) {
        const bool acts = state.informed[v] ? pushes(kind) : pulls(kind);
        if (!acts)
            continue;
        if (auto c = choose_uniform_neighbor(g, v, rng))
            choices[v] = *c;
    }
}

ChoiceVector draw_all_choices(const RoundGraph& g, Engine& rng)
{
    ChoiceVector choices(g.size(), no_choice);
    for (node_id v = 0; v < g.size(); ++v)
        if (auto c = choose_uniform_neighbor(g, v, rng))
            choices[v] = *c;
    return choices;
}

void resolve_round(const SpreadState& start, ProtocolKind kind, const RoundGraph& g,
                   const ChoiceVector& choices, RoundOutcome& out)
{
    const std::uint32_t n = g.size();
    out.pushed.assign(n, 0);
    out.pulled.assign(n, 0);
    out.newly_informed.clear();

    for (node_id v = 0; v < n; ++v) {
        const node_id c = choices[v];
        if (c == no_choice)
            continue;
        if (start.informed[v]) {
            if (pushes(kind) && !start.informed[c])
                out.pushed[c] = 1;
        } else if (pulls(kind) && start.informed[c]) {
            out.pulled[v] = 1;
        }
    }
    for (node_id y = 0; y < n; ++y)
        if (!start.informed[y] && (out.pushed[y] || out.pulled[y]))
            out.newly_informed.push_back(y);
}

void apply_outcome(SpreadState& state, const RoundOutcome& outcome)
{
    for (node_id y : outcome.newly_informed) {
        if (!state.informed[y]) {
            state.informed[y] = 1;
            ++state.count;
        }
    }
    ++state.round;
}

std::pair<SpreadState, RoundOutcome> run_round(SpreadState state, ProtocolKind kind,
                                               const RoundGraph& g, Engine& rng)
{
    if (state.complete())
        throw std::logic_error("run_round called with every node already informed");
    if (g.size() != state.size())
        throw std::invalid_argument("graph size does not match spread state");
    ChoiceVector choices;
    draw_choices(state, kind, g, rng, choices);
    RoundOutcome outcome;
    resolve_round(state, kind, g, choices, outcome);
    apply_outcome(state, outcome);
    return {std::move(state), std::move(outcome)};
}

RoundLimitExceeded::RoundLimitExceeded(SeedSpec seed_, std::uint64_t max_rounds_,
                                       std::uint32_t informed_)
    : std::runtime_error("round limit " + std::to_string(max_rounds_) +
                         " exceeded with " + std::to_string(informed_) +
                         " nodes informed (master_seed=" + std::to_string(seed_.master_seed) +
                         ", stream_id=" + std::to_string(seed_.stream_id) + ")"),
      seed(seed_), max_rounds(max_rounds_), informed(informed_)
{
}

std::uint64_t default_max_rounds(const ModelParams& params)
{
    const double n = params.n();
    const double bound = 1e4 * (std::log2(n) + std::log(n) / params.a() + 10.0);
    return static_cast<std::uint64_t>(std::ceil(bound));
}

SpreadTrace run_to_completion(const ModelParams& params, ProtocolKind kind, const SeedSpec& seed,
                              std::uint64_t max_rounds)
{
    if (max_rounds < 1)
        throw std::invalid_argument("max_rounds must be positive");

    Engine rng = make_engine(seed);
    RoundGraphSampler sampler(params);
    RoundGraph g;
    ChoiceVector choices;
    RoundOutcome outcome;
    SpreadState state = SpreadState::initial(params.n());

    SpreadTrace trace{kind, params, seed, {state.count}};
    while (!state.complete()) {
        if (state.round >= max_rounds)
            throw RoundLimitExceeded(seed, max_rounds, state.count);
        sampler.sample(rng, g);
        draw_choices(state, kind, g, rng, choices);
        resolve_round(state, kind, g, choices, outcome);
        apply_outcome(state, outcome);
        trace.counts.push_back(state.count);
    }
    return trace;
}

SpreadTrace run_to_completion(const ModelParams& params, ProtocolKind kind, const SeedSpec& seed)
{
    return run_to_completion(params, kind, seed, default_max_rounds(params));
}

std::uint32_t phase_time(const SpreadTrace& trace, std::uint32_t k, std::uint32_t m)
{
    const std::uint32_t n = trace.params.n();
    if (k < 1 || k > m || m > n)
        throw std::invalid_argument("phase_time requires 1 <= k <= m <= n");
    const auto first_at_least = [&](std::uint32_t threshold) {
        const auto it = std::find_if(trace.counts.begin(), trace.counts.end(),
                                     [&](std::uint32_t c) { return c >= threshold; });
        if (it == trace.counts.end())
            throw std::invalid_argument("trace never reaches the requested count");
        return static_cast<std::uint32_t>(it - trace.counts.begin());
    };
    return first_at_least(m) - first_at_least(k);
}

} // namespace gossip
