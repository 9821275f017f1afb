#include <catch_amalgamated.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gossip/analytics.hpp"
#include "gossip/protocols.hpp"

using namespace gossip;

namespace {

// P[node 1 pulls the rumour from node 0] on G(3, p), by listing all eight
// graphs. Node 1 picks a uniform neighbour; success iff it picks node 0.
double pull_three_nodes_by_hand(double p)
{
    double total = 0.0;
    for (int mask = 0; mask < 8; ++mask) {
        const bool e01 = mask & 1, e02 = mask & 2, e12 = mask & 4;
        double weight = 1.0;
        for (bool e : {e01, e02, e12})
            weight *= e ? p : 1.0 - p;
        const int deg1 = int(e01) + int(e12);
        if (e01)
            total += weight / deg1;
    }
    return total;
}

} // namespace

TEST_CASE("protocol names round-trip", "[protocols]")
{
    for (auto kind : all_protocols)
        REQUIRE(parse_protocol(to_string(kind)) == kind);
    REQUIRE(parse_protocol("push&pull") == ProtocolKind::push_pull);
    REQUIRE_THROWS_AS(parse_protocol("gossip"), std::invalid_argument);
}

TEST_CASE("a finished process cannot run another round", "[protocols]")
{
    Engine rng = make_engine({1, 0});
    const RoundGraph g = sample_round_graph(3, 1.0, rng);
    const auto full = SpreadState::initial(3, 3);
    REQUIRE(full.complete());
    REQUIRE_THROWS_AS(run_round(full, ProtocolKind::push, g, rng), std::logic_error);
    REQUIRE_THROWS_AS(run_round(SpreadState::initial(4), ProtocolKind::push, g, rng),
                      std::invalid_argument);
}

TEST_CASE("two nodes joined by an edge finish in one round", "[protocols]")
{
    const std::pair<node_id, node_id> edge{0, 1};
    const RoundGraph g = RoundGraph::from_edges(2, std::span(&edge, 1));
    Engine rng = make_engine({3, 0});
    for (auto kind : all_protocols) {
        const auto [next, outcome] = run_round(SpreadState::initial(2), kind, g, rng);
        REQUIRE(next.complete());
        REQUIRE(next.round == 1);
        REQUIRE(outcome.newly_informed == std::vector<node_id>{1});
    }
}

TEST_CASE("pull on three nodes at p = 1/2", "[protocols][statistical]")
{
    const double by_hand = pull_three_nodes_by_hand(0.5);
    REQUIRE(by_hand == Catch::Approx(0.375).epsilon(1e-15));
    REQUIRE(pull_success_probability_exact(ModelParams::from_edge_probability(3, 0.5), 1) ==
            Catch::Approx(by_hand).epsilon(1e-14));

    Engine rng = make_engine({11, 0});
    RoundGraphSampler sampler(3, 0.5);
    RoundGraph g;
    const int rounds = 100000;
    int hits = 0;
    for (int i = 0; i < rounds; ++i) {
        sampler.sample(rng, g);
        const auto [next, outcome] = run_round(SpreadState::initial(3), ProtocolKind::pull, g, rng);
        hits += next.informed[1];
    }
    const double freq = double(hits) / rounds;
    const double se = std::sqrt(by_hand * (1 - by_hand) / rounds);
    CHECK(std::abs(freq - by_hand) <= 4 * se);
}

TEST_CASE("run_to_completion edge cases on two nodes", "[protocols][statistical]")
{
    for (int i = 0; i < 50; ++i) {
        const auto trace = run_to_completion(ModelParams(2, 2.0), ProtocolKind::push,
                                             {5, static_cast<std::uint64_t>(i)});
        REQUIRE(trace.rounds() == 1);
    }

    // T is geometric with success probability 1/2: mean 2, variance 2.
    const int trials = 100000;
    double sum = 0.0;
    for (int i = 0; i < trials; ++i)
        sum += run_to_completion(ModelParams(2, 1.0), ProtocolKind::pull,
                                 {6, static_cast<std::uint64_t>(i)})
                   .rounds();
    const double mean = sum / trials;
    CHECK(std::abs(mean - 2.0) <= 3 * std::sqrt(2.0 / trials));
}

TEST_CASE("informed sets only grow", "[protocols][property]")
{
    for (auto kind : all_protocols) {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto trace = run_to_completion(ModelParams(200, 1.0), kind, {17, s});
            REQUIRE(trace.counts.front() == 1);
            REQUIRE(trace.counts.back() == 200);
            REQUIRE(std::is_sorted(trace.counts.begin(), trace.counts.end()));
        }
    }

    Engine rng = make_engine({18, 0});
    RoundGraphSampler sampler(ModelParams(100, 2.0));
    RoundGraph g;
    for (auto kind : all_protocols) {
        SpreadState state = SpreadState::initial(100, 5);
        while (!state.complete()) {
            sampler.sample(rng, g);
            auto [next, outcome] = run_round(state, kind, g, rng);
            for (node_id v = 0; v < 100; ++v)
                REQUIRE(next.informed[v] >= state.informed[v]);
            for (node_id v : outcome.newly_informed)
                REQUIRE(!state.informed[v]);
            REQUIRE(next.count == state.count + outcome.newly_informed.size());
            state = std::move(next);
        }
    }
}

TEST_CASE("push-pull newly informed set is the union of push and pull", "[protocols][property]")
{
    Engine rng = make_engine({19, 0});
    RoundGraphSampler sampler(ModelParams(300, 1.5));
    RoundGraph g;
    RoundOutcome push, pull, both;
    for (int round = 0; round < 300; ++round) {
        const auto k = static_cast<std::uint32_t>(1 + round % 299);
        const auto start = SpreadState::initial(300, k);
        sampler.sample(rng, g);
        const ChoiceVector choices = draw_all_choices(g, rng);
        resolve_round(start, ProtocolKind::push, g, choices, push);
        resolve_round(start, ProtocolKind::pull, g, choices, pull);
        resolve_round(start, ProtocolKind::push_pull, g, choices, both);
        std::vector<node_id> merged;
        std::set_union(push.newly_informed.begin(), push.newly_informed.end(),
                       pull.newly_informed.begin(), pull.newly_informed.end(),
                       std::back_inserter(merged));
        REQUIRE(both.newly_informed == merged);
    }
}

TEST_CASE("the starting node's label does not matter", "[protocols][statistical]")
{
    // Distribution of I_1 from node 0 versus node n-1, compared with a
    // chi-square test of homogeneity.
    const std::uint32_t n = 16;
    const int rounds = 100000;
    RoundGraphSampler sampler(ModelParams(n, 1.5));
    RoundGraph g;
    for (auto kind : all_protocols) {
        std::vector<std::vector<double>> table(2, std::vector<double>(n + 1, 0.0));
        for (int side = 0; side < 2; ++side) {
            const node_id start = side == 0 ? 0 : n - 1;
            Engine rng = make_engine({20 + static_cast<std::uint64_t>(side), 0});
            const auto initial = SpreadState::with_informed(n, std::span(&start, 1));
            for (int i = 0; i < rounds; ++i) {
                sampler.sample(rng, g);
                table[side][run_round(initial, kind, g, rng).first.count] += 1;
            }
        }
        double chi2 = 0.0;
        int cells = 0;
        for (std::uint32_t c = 0; c <= n; ++c) {
            const double col = table[0][c] + table[1][c];
            if (col < 10)
                continue;
            ++cells;
            for (int side = 0; side < 2; ++side) {
                const double expected = col / 2;
                chi2 += (table[side][c] - expected) * (table[side][c] - expected) / expected;
            }
        }
        REQUIRE(cells >= 2);
        const boost::math::chi_squared_distribution<double> ref(cells - 1);
        CHECK(boost::math::cdf(boost::math::complement(ref, chi2)) > 0.001);
    }
}

TEST_CASE("round limit names the failing seed", "[protocols]")
{
    const SeedSpec seed{21, 4};
    try {
        run_to_completion(ModelParams(64, 1.0), ProtocolKind::pull, seed, 1);
        FAIL("expected RoundLimitExceeded");
    } catch (const RoundLimitExceeded& e) {
        REQUIRE(e.seed == seed);
        REQUIRE(e.max_rounds == 1);
        REQUIRE(e.informed < 64);
    }
    REQUIRE(default_max_rounds(ModelParams(1024, 1.0)) > 1000);
}

TEST_CASE("phase times use first passage", "[protocols]")
{
    SpreadTrace trace;
    trace.params = ModelParams(8, 1.0);
    trace.counts = {1, 1, 3, 7, 8};
    REQUIRE(phase_time(trace, 1, 1) == 0);
    REQUIRE(phase_time(trace, 1, 8) == trace.rounds());
    REQUIRE(phase_time(trace, 2, 8) == 2);
    REQUIRE(phase_time(trace, 3, 7) == 1);
    REQUIRE_THROWS_AS(phase_time(trace, 0, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(phase_time(trace, 5, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(phase_time(trace, 1, 9), std::invalid_argument);
}

TEST_CASE("identical seeds give identical traces", "[protocols]")
{
    for (auto kind : all_protocols) {
        const auto a = run_to_completion(ModelParams(500, 0.7), kind, {22, 9});
        const auto b = run_to_completion(ModelParams(500, 0.7), kind, {22, 9});
        REQUIRE(a.counts == b.counts);
    }
}
