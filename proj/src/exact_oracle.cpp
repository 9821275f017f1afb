#include "gossip/exact_oracle.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "gossip/parallel.hpp"

namespace gossip {

namespace {

constexpr std::uint32_t max_nodes = OracleLimits::hard_cap;
constexpr std::size_t block_count = 64;

struct SmallGraph {
    std::array<std::uint32_t, max_nodes> degree{};
    std::array<std::array<node_id, max_nodes>, max_nodes> nbr{};
};

struct Accumulator {
    std::array<double, max_nodes + 1> next_count{};
    double probe_a = 0.0;
    double probe_b = 0.0;
    double probe_joint = 0.0;
};

struct Setup {
    std::uint32_t n;
    ProtocolKind kind;
    std::array<std::uint8_t, max_nodes> informed{};
    std::uint32_t k = 0;
    std::vector<node_id> uninformed;
    std::vector<std::pair<node_id, node_id>> pairs;
    std::vector<double> weight_by_edges; // p^m (1-p)^(E-m)
};

void build_graph(const Setup& s, std::uint64_t mask, SmallGraph& g)
{
    g.degree.fill(0);
    for (std::size_t e = 0; e < s.pairs.size(); ++e) {
        if (!(mask >> e & 1u))
            continue;
        auto [i, j] = s.pairs[e];
        g.nbr[i][g.degree[i]++] = j;
        g.nbr[j][g.degree[j]++] = i;
    }
}

// Adds the contribution of one graph (already weighted) to acc.
void enumerate_graph(const Setup& s, const SmallGraph& g, double graph_weight, Accumulator& acc)
{
    const bool push_active = s.kind != ProtocolKind::pull;
    const bool pull_active = s.kind != ProtocolKind::push;
    const std::size_t u = s.uninformed.size();

    // Pull success of each uninformed node given the graph.
    std::array<double, max_nodes> pull_success{};
    if (pull_active) {
        for (node_id y : s.uninformed) {
            const std::uint32_t d = g.degree[y];
            if (d == 0)
                continue;
            std::uint32_t hits = 0;
            for (std::uint32_t i = 0; i < d; ++i)
                hits += s.informed[g.nbr[y][i]];
            pull_success[y] = static_cast<double>(hits) / d;
        }
    }

    // Pushers are informed nodes with at least one neighbour; each choice
    // vector is a mixed-radix number over their degrees.
    std::array<node_id, max_nodes> pushers{};
    std::size_t pusher_count = 0;
    double choice_weight = 1.0;
    if (push_active) {
        for (node_id v = 0; v < s.n; ++v) {
            if (s.informed[v] && g.degree[v] > 0) {
                pushers[pusher_count++] = v;
                choice_weight /= g.degree[v];
            }
        }
    }
    const double w = graph_weight * choice_weight;

    std::array<std::uint32_t, max_nodes> digit{};
    std::array<double, max_nodes + 1> dp{};
    for (;;) {
        std::array<std::uint8_t, max_nodes> pushed{};
        for (std::size_t i = 0; i < pusher_count; ++i)
            pushed[g.nbr[pushers[i]][digit[i]]] = 1;

        // Poisson-binomial law of the number of newly informed nodes.
        dp.fill(0.0);
        dp[0] = 1.0;
        for (std::size_t idx = 0; idx < u; ++idx) {
            const node_id y = s.uninformed[idx];
            const double q = pushed[y] ? 1.0 : pull_success[y];
            for (std::size_t j = idx + 1; j > 0; --j)
                dp[j] = dp[j] * (1.0 - q) + dp[j - 1] * q;
            dp[0] *= 1.0 - q;
        }
        for (std::size_t j = 0; j <= u; ++j)
            acc.next_count[s.k + j] += w * dp[j];

        const node_id ya = s.uninformed[0];
        const double qa = pushed[ya] ? 1.0 : pull_success[ya];
        acc.probe_a += w * qa;
        if (u >= 2) {
            const node_id yb = s.uninformed[1];
            const double qb = pushed[yb] ? 1.0 : pull_success[yb];
            acc.probe_b += w * qb;
            // Uninformed nodes choose independently given graph and pushes.
            acc.probe_joint += w * qa * qb;
        }

        std::size_t i = 0;
        for (; i < pusher_count; ++i) {
            if (++digit[i] < g.degree[pushers[i]])
                break;
            digit[i] = 0;
        }
        if (i == pusher_count)
            break;
    }
}

void check_limits(std::uint32_t n, const OracleLimits& limits)
{
    limits.validate();
    if (n > limits.max_n)
        throw OracleTooLarge(n, limits.max_n);
}

} // namespace

void OracleLimits::validate() const
{
    if (max_n > hard_cap)
        throw std::invalid_argument("oracle max_n must not exceed " + std::to_string(hard_cap));
}

OracleTooLarge::OracleTooLarge(std::uint32_t n, std::uint32_t max_n)
    : std::invalid_argument("exact oracle limited to n <= " + std::to_string(max_n) +
                            " (requested n = " + std::to_string(n) + ")")
{
}

NonProgressing::NonProgressing(std::uint32_t k)
    : std::runtime_error("informed-count chain cannot leave state k = " + std::to_string(k))
{
}

RoundLaw exact_round_law(const ModelParams& params, std::span<const node_id> informed,
                         ProtocolKind kind, const OracleLimits& limits, unsigned workers)
{
    const std::uint32_t n = params.n();
    check_limits(n, limits);

    Setup s{n, kind, {}, 0, {}, {}, {}};
    for (node_id v : informed) {
        if (v >= n)
            throw std::invalid_argument("informed node out of range");
        s.informed[v] = 1;
    }
    for (node_id v = 0; v < n; ++v) {
        if (s.informed[v])
            ++s.k;
        else
            s.uninformed.push_back(v);
    }
    if (s.k == 0)
        throw std::invalid_argument("at least one node must be informed");

    RoundLaw law;
    law.n = n;
    law.k = s.k;
    law.next_count.assign(n + 1, 0.0);
    if (s.uninformed.empty()) {
        law.next_count[n] = 1.0;
        return law;
    }

    for (node_id i = 1; i < n; ++i)
        for (node_id j = 0; j < i; ++j)
            s.pairs.emplace_back(i, j);
    const std::size_t edges = s.pairs.size();
    const double p = params.p();
    for (std::size_t m = 0; m <= edges; ++m)
        s.weight_by_edges.push_back(std::pow(p, static_cast<double>(m)) *
                                    std::pow(1.0 - p, static_cast<double>(edges - m)));

    const std::uint64_t graphs = std::uint64_t{1} << edges;
    const std::size_t blocks = static_cast<std::size_t>(std::min<std::uint64_t>(block_count, graphs));
    std::vector<Accumulator> partial(blocks);
    parallel_for(blocks, workers, [&](std::size_t b) {
        const std::uint64_t begin = graphs * b / blocks;
        const std::uint64_t end = graphs * (b + 1) / blocks;
        SmallGraph g;
        for (std::uint64_t mask = begin; mask < end; ++mask) {
            const double w = s.weight_by_edges[static_cast<std::size_t>(std::popcount(mask))];
            if (w == 0.0)
                continue;
            build_graph(s, mask, g);
            enumerate_graph(s, g, w, partial[b]);
        }
    });

    for (const auto& acc : partial) {
        for (std::uint32_t c = 0; c <= n; ++c)
            law.next_count[c] += acc.next_count[c];
        law.probe_a += acc.probe_a;
        law.probe_b += acc.probe_b;
        law.probe_joint += acc.probe_joint;
    }
    return law;
}

RoundLaw exact_round_law(const ModelParams& params, std::uint32_t k, ProtocolKind kind,
                         const OracleLimits& limits, unsigned workers)
{
    if (k < 1 || k > params.n())
        throw std::invalid_argument("informed count must lie in [1, n]");
    std::vector<node_id> informed(k);
    for (node_id v = 0; v < k; ++v)
        informed[v] = v;
    return exact_round_law(params, informed, kind, limits, workers);
}

std::vector<double> exact_transition_row(const ModelParams& params, std::uint32_t k,
                                         ProtocolKind kind, const OracleLimits& limits)
{
    return exact_round_law(params, k, kind, limits).next_count;
}

TransitionMatrix exact_transition_matrix(const ModelParams& params, ProtocolKind kind,
                                         const OracleLimits& limits, unsigned workers)
{
    const std::uint32_t n = params.n();
    check_limits(n, limits);
    TransitionMatrix m{n, params.p(), kind, {}};
    m.rows.assign(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::uint32_t k = 1; k <= n; ++k)
        m.rows[k] = exact_round_law(params, k, kind, limits, workers).next_count;
    return m;
}

double exact_expected_time(const TransitionMatrix& matrix)
{
    const std::uint32_t n = matrix.n;
    std::vector<double> expected(n + 1, 0.0);
    for (std::uint32_t k = n - 1; k >= 1; --k) {
        double leave = 0.0;
        double onward = 1.0;
        for (std::uint32_t next = k + 1; next <= n; ++next) {
            leave += matrix(k, next);
            onward += matrix(k, next) * expected[next];
        }
        if (!(leave > 0.0))
            throw NonProgressing(k);
        expected[k] = onward / leave;
    }
    return expected[1];
}

double exact_expected_time(const ModelParams& params, ProtocolKind kind,
                           const OracleLimits& limits)
{
    return exact_expected_time(exact_transition_matrix(params, kind, limits));
}

std::vector<double> exact_time_distribution(const TransitionMatrix& matrix,
                                            std::uint32_t max_rounds)
{
    const std::uint32_t n = matrix.n;
    std::vector<double> state(n + 1, 0.0);
    state[1] = 1.0;
    std::vector<double> hit(max_rounds + 1, 0.0);
    hit[0] = state[n];
    state[n] = 0.0;
    for (std::uint32_t t = 1; t <= max_rounds; ++t) {
        std::vector<double> next(n + 1, 0.0);
        for (std::uint32_t k = 1; k < n; ++k)
            for (std::uint32_t to = k; to <= n; ++to)
                next[to] += state[k] * matrix(k, to);
        hit[t] = next[n];
        next[n] = 0.0;
        state = std::move(next);
    }
    return hit;
}

double exact_pk(const ModelParams& params, std::uint32_t k, ProtocolKind kind,
                const OracleLimits& limits)
{
    if (k < 1 || k >= params.n())
        throw std::invalid_argument("exact_pk needs 1 <= k <= n-1");
    return exact_round_law(params, k, kind, limits).probe_a;
}

double exact_pair_covariance(const ModelParams& params, std::uint32_t k, ProtocolKind kind,
                             const OracleLimits& limits)
{
    if (k < 1 || k + 2 > params.n())
        throw std::invalid_argument("exact_pair_covariance needs 1 <= k <= n-2");
    return exact_round_law(params, k, kind, limits).covariance();
}

} // namespace gossip
