#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gossip/model.hpp"
#include "gossip/protocols.hpp"

namespace gossip {

// Per-round summary of a homogeneous process at k informed nodes.
struct HomogeneousRoundStats {
    std::uint32_t n = 0;
    std::uint32_t k = 0;
    double p_k = 0.0; // success probability of one uninformed node
    double c_k = 0.0; // covariance bound for two uninformed nodes

    double mu() const { return static_cast<double>(k) / n; }
    std::uint32_t uninformed() const { return n - k; }
};

// (1 - p)^(n-1): a fixed node has no neighbour in G(n, p).
double isolation_probability_exact(std::uint32_t n, double p);

// e^{-a}, the n -> infinity limit of the above at p = a/n.
double isolation_probability_asymptotic(double a);

struct ReciprocalSum {
    double value = 0.0;
    bool continuous_extension = false; // q == 0, value is the limit 1
};

// Closed form (1 - (1-q)^M) / (M q) of
//   sum_{i=0}^{M-1} C(M-1, i) q^i (1-q)^(M-1-i) / (i+1),
// i.e. E[1/(1+X)] for X ~ Bin(M-1, q).
ReciprocalSum binomial_reciprocal_sum(std::uint64_t m, double q);

// Term-by-term evaluation of the same sum with compensated summation.
double binomial_reciprocal_sum_direct(std::uint64_t m, double q);

// Exact Pull success probability (1 - (1-p)^(n-1)) * k / (n-1). A
// non-isolated node's contact is uniform over the other n-1 nodes. k = 0
// returns 0.
double pull_success_probability_exact(const ModelParams& params, std::uint32_t k);

// Upper bound p_k^2 * p / (1 - p) on the Pull covariance of two uninformed
// nodes, from conditioning on the two nodes not being adjacent. Infinite at
// p = 1.
double pull_covariance_bound(const ModelParams& params, std::uint32_t k);

// P[pull | exactly one informed neighbour] =
//   (1 - (1 - a/n)^((1-mu) n)) / (a (1 - mu)).
// mu * n must be an integer in [1, n-1].
double pull_given_single_informed_neighbor(const ModelParams& params, double mu);

// (1 - e^{-a}) / a, the small-mu limit of P[pull | pushed].
double conditional_pull_given_push_limit(double a);

// Slack constants for the Push success-probability bracket. c1 defaults to
// a^2 + a when unset.
struct PushBoundConstants {
    double c0 = 2.0;
    std::optional<double> c1;
};

struct ProbabilityBracket {
    double lower = 0.0;
    double upper = 1.0;
};

// lower = mu (1-e^{-a}) (1 - (k + c0)/(2n) (1-e^{-a}))
// upper = mu (1-e^{-a} + c1/n)
// Both clamped to [0, 1].
ProbabilityBracket push_success_probability_bounds(const ModelParams& params, std::uint32_t k,
                                                   const PushBoundConstants& constants = {});

struct Rates {
    double gamma = 0.0; // growth rate
    double rho = 0.0;   // shrink rate
};

enum class RateVariant {
    asymptotic, // e^{-a} forms
    finite_n,   // exact isolation probability and k/(n-1) factors
};

std::string_view to_string(RateVariant variant);

Rates rates(ProtocolKind kind, double a);

// Finite-n rates: gamma equals n * p_1 exactly for all three protocols,
// rho uses the exact isolation probability.
Rates rates_finite_n(ProtocolKind kind, const ModelParams& params);

struct PredictorResult {
    ProtocolKind protocol = ProtocolKind::push;
    std::uint32_t n = 0;
    double a = 0.0;
    RateVariant variant = RateVariant::asymptotic;
    double growth_rate = 0.0;
    double shrink_rate = 0.0;
    double growth_term = 0.0; // ln(n) / ln(1 + gamma)
    double shrink_term = 0.0; // ln(n) / rho
    double total_leading = 0.0;
    // The additive O(1) constant is not part of total_leading; it has to be
    // measured (see fit_leading_constant).
    static constexpr bool excludes_constant_term = true;
};

// Requires n >= 3.
PredictorResult predict_expected_time(ProtocolKind kind, const ModelParams& params,
                                      RateVariant variant = RateVariant::asymptotic);

// f, g are phase fractions; a_cond, b_cond, c_cond are the constants of the
// growth and shrink conditions (distinct from the edge parameter a).
struct ConditionParams {
    double f = 0.5;
    double g = 0.5;
    double a_cond = 1.0;
    double b_cond = 1.0;
    double c_cond = 1.0;

    void validate() const;
};

enum class BoundSide { upper, lower };

std::string_view to_string(BoundSide side);

struct ConditionViolation {
    std::uint32_t k = 0;
    std::string condition; // "success" or "covariance"
    double observed = 0.0;
    double bound = 0.0;
};

struct ConditionReport {
    std::string phase; // "growth" or "shrink"
    BoundSide side = BoundSide::upper;
    double rate = 0.0;
    ConditionParams params;
    std::size_t points_checked = 0;
    std::optional<ConditionViolation> first_violation;
    std::vector<std::string> warnings;

    bool passed() const { return !first_violation.has_value(); }
};

// For every k < f n:
//   upper: p_k >= gamma (k/n)(1 - a_cond k/n - b_cond/ln n)
//   lower: p_k <= gamma (k/n)(1 + a_cond k/n + b_cond/ln n)
// and c_k <= c_cond k/n^2. Upper side requires a_cond f < 1.
ConditionReport check_growth_conditions(std::span<const HomogeneousRoundStats> stats, double gamma,
                                        const ConditionParams& cond, BoundSide side);

// For every u = n - k <= g n:
//   upper: 1 - p_k <= e^{-rho} + a_cond u/n
//   lower: 1 - p_k >= e^{-rho} - a_cond u/n
// and c_k <= c_cond / u. Upper side requires e^{-rho} + a_cond g < 1.
ConditionReport check_shrink_conditions(std::span<const HomogeneousRoundStats> stats, double rho,
                                        const ConditionParams& cond, BoundSide side);

// Exact Pull p_k with the covariance bound as c_k, for k = 1..n-1.
std::vector<HomogeneousRoundStats> pull_round_stats(const ModelParams& params);

} // namespace gossip
