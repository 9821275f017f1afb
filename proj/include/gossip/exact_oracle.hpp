#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "gossip/model.hpp"
#include "gossip/protocols.hpp"

namespace gossip {

// Exhaustive enumeration over all 2^C(n,2) labelled graphs and all contact
// choices. Cost grows as 2^C(n,2) * (n-1)^k, so n is capped.
struct OracleLimits {
    static constexpr std::uint32_t hard_cap = 6;
    std::uint32_t max_n = 5;

    void validate() const;
};

class OracleTooLarge : public std::invalid_argument {
public:
    OracleTooLarge(std::uint32_t n, std::uint32_t max_n);
};

class NonProgressing : public std::runtime_error {
public:
    explicit NonProgressing(std::uint32_t k);
};

// Everything one enumeration pass yields for a round started from a given
// informed set. `probe_a` and `probe_b` are the two lowest-numbered
// uninformed nodes.
struct RoundLaw {
    std::uint32_t n = 0;
    std::uint32_t k = 0;
    std::vector<double> next_count; // index k'; zero below k
    double probe_a = 0.0;           // P[first uninformed node informed]
    double probe_b = 0.0;           // P[second uninformed node informed]
    double probe_joint = 0.0;       // P[both informed]

    double covariance() const { return probe_joint - probe_a * probe_b; }
};

// Worker count only changes wall time: graphs are split into a fixed number
// of blocks whose partial sums are combined in block order.
RoundLaw exact_round_law(const ModelParams& params, std::span<const node_id> informed,
                         ProtocolKind kind, const OracleLimits& limits = {},
                         unsigned workers = 1);

// Informed set {0..k-1}.
RoundLaw exact_round_law(const ModelParams& params, std::uint32_t k, ProtocolKind kind,
                         const OracleLimits& limits = {}, unsigned workers = 1);

// Row of P(k -> k'), indexed by k' in [0, n].
std::vector<double> exact_transition_row(const ModelParams& params, std::uint32_t k,
                                         ProtocolKind kind, const OracleLimits& limits = {});

struct TransitionMatrix {
    std::uint32_t n = 0;
    double p = 0.0;
    ProtocolKind kind = ProtocolKind::push;
    std::vector<std::vector<double>> rows; // rows[k][k'], k, k' in [0, n]; row 0 unused

    double operator()(std::uint32_t from, std::uint32_t to) const { return rows[from][to]; }
};

TransitionMatrix exact_transition_matrix(const ModelParams& params, ProtocolKind kind,
                                         const OracleLimits& limits = {}, unsigned workers = 1);

// E[T(1, n)] by back-substitution on the upper-triangular chain.
double exact_expected_time(const TransitionMatrix& matrix);
double exact_expected_time(const ModelParams& params, ProtocolKind kind,
                           const OracleLimits& limits = {});

// P[T(1, n) = t] for t = 0..max_rounds, by forward propagation.
std::vector<double> exact_time_distribution(const TransitionMatrix& matrix,
                                            std::uint32_t max_rounds);

double exact_pk(const ModelParams& params, std::uint32_t k, ProtocolKind kind,
                const OracleLimits& limits = {});

// Requires k <= n-2.
double exact_pair_covariance(const ModelParams& params, std::uint32_t k, ProtocolKind kind,
                             const OracleLimits& limits = {});

} // namespace gossip
