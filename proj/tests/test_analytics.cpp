#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "gossip/analytics.hpp"

using namespace gossip;
using Catch::Approx;

// Reference values below were evaluated with 30-digit arithmetic.

TEST_CASE("isolation probability", "[analytics]")
{
    REQUIRE(isolation_probability_exact(10, 0.0) == 1.0);
    REQUIRE(isolation_probability_exact(10, 1.0) == 0.0);
    REQUIRE(isolation_probability_exact(100, 0.01) == Approx(0.369729637649726772).epsilon(1e-14));
    REQUIRE(isolation_probability_asymptotic(1.0) == Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("binomial reciprocal sum", "[analytics]")
{
    for (double q : {1e-6, 0.2, 0.7, 1.0})
        REQUIRE(binomial_reciprocal_sum(1, q).value == Approx(1.0).epsilon(1e-15));
    REQUIRE(binomial_reciprocal_sum(2, 0.5).value == Approx(0.75).epsilon(1e-15));
    REQUIRE(binomial_reciprocal_sum_direct(2, 0.5) == Approx(0.75).epsilon(1e-15));

    const auto at_zero = binomial_reciprocal_sum(7, 0.0);
    REQUIRE(at_zero.value == 1.0);
    REQUIRE(at_zero.continuous_extension);
    REQUIRE_FALSE(binomial_reciprocal_sum(7, 0.1).continuous_extension);

    const double closed = binomial_reciprocal_sum(150, 0.013).value;
    REQUIRE(std::abs(binomial_reciprocal_sum_direct(150, 0.013) - closed) <= 1e-12 * closed);
}

TEST_CASE("closed form agrees with direct summation on a grid", "[analytics][property]")
{
    for (std::uint64_t m = 1; m <= 200; ++m) {
        for (double q : {1e-4, 1e-3, 0.01, 0.1, 0.3, 0.5, 0.9}) {
            const double closed = binomial_reciprocal_sum(m, q).value;
            const double direct = binomial_reciprocal_sum_direct(m, q);
            REQUIRE(std::abs(direct - closed) <= 1e-12 * std::max(1.0, closed));
        }
    }
    // Large M, where the lower terms underflow.
    const double closed = binomial_reciprocal_sum(100000, 0.5).value;
    REQUIRE(binomial_reciprocal_sum_direct(100000, 0.5) == Approx(closed).epsilon(1e-12));
}

TEST_CASE("exact pull success probability", "[analytics]")
{
    REQUIRE(pull_success_probability_exact(ModelParams::from_edge_probability(3, 0.5), 1) ==
            Approx(0.375).epsilon(1e-15));
    REQUIRE(pull_success_probability_exact(ModelParams(10, 1.0), 0) == 0.0);
    // Complete graph: the single uninformed node can only contact informed ones.
    REQUIRE(pull_success_probability_exact(ModelParams(5, 5.0), 4) == Approx(1.0).epsilon(1e-15));
    REQUIRE(std::isinf(pull_covariance_bound(ModelParams(5, 5.0), 2)));
    REQUIRE(pull_covariance_bound(ModelParams(5, 1.0), 2) > 0.0);
}

TEST_CASE("pull with one informed neighbour", "[analytics]")
{
    REQUIRE(pull_given_single_informed_neighbor(ModelParams(2, 2.0), 0.5) ==
            Approx(1.0).epsilon(1e-15));
    REQUIRE(pull_given_single_informed_neighbor(ModelParams(10000, 1.0), 0.01) ==
            Approx(0.634789598783003908).epsilon(1e-12));

    const ModelParams params(100, 1.0);
    const double value = pull_given_single_informed_neighbor(params, 0.1);
    REQUIRE(std::abs(value - binomial_reciprocal_sum(90, 0.01).value) <= 1e-12);
    REQUIRE(std::abs(value - binomial_reciprocal_sum_direct(90, 0.01)) <= 1e-12);

    REQUIRE_THROWS_AS(pull_given_single_informed_neighbor(params, 0.105), std::invalid_argument);
    REQUIRE_THROWS_AS(pull_given_single_informed_neighbor(params, 0.0), std::invalid_argument);
}

TEST_CASE("conditional pull limit", "[analytics]")
{
    REQUIRE(conditional_pull_given_push_limit(1.0) == Approx(0.632120558828557678).epsilon(1e-14));
    REQUIRE(conditional_pull_given_push_limit(std::log(2.0)) ==
            Approx(0.721347520444481704).epsilon(1e-14));
    REQUIRE(conditional_pull_given_push_limit(1e-12) == Approx(1.0).epsilon(1e-11));
    REQUIRE_THROWS_AS(conditional_pull_given_push_limit(0.0), std::invalid_argument);
}

TEST_CASE("push success bracket", "[analytics]")
{
    for (double a : {0.5, 1.0, 3.0}) {
        for (std::uint32_t n : {10u, 1000u, 1000000u}) {
            const ModelParams params(n, a);
            for (std::uint32_t k : {1u, n / 2, n - 1}) {
                const auto b = push_success_probability_bounds(params, k);
                REQUIRE(0.0 <= b.lower);
                REQUIRE(b.lower <= b.upper);
                REQUIRE(b.upper <= 1.0);
            }
        }
    }
    // For small mu both sides approach mu (1 - e^{-a}).
    const ModelParams params(1000000, 1.0);
    const double leading = 1e-6 * (1.0 - std::exp(-1.0));
    const auto b = push_success_probability_bounds(params, 1);
    REQUIRE(b.lower == Approx(leading).epsilon(1e-5));
    REQUIRE(b.upper == Approx(leading).epsilon(1e-5));

    PushBoundConstants wide;
    wide.c0 = 10;
    wide.c1 = 50;
    const auto w = push_success_probability_bounds(ModelParams(100, 1.0), 5, wide);
    const auto d = push_success_probability_bounds(ModelParams(100, 1.0), 5);
    REQUIRE(w.lower < d.lower);
    REQUIRE(w.upper > d.upper);
}

TEST_CASE("growth and shrink rates", "[analytics]")
{
    const double s = 1.0 - std::exp(-1.0);
    auto push = rates(ProtocolKind::push, 1.0);
    REQUIRE(push.gamma == Approx(s).epsilon(1e-15));
    REQUIRE(push.rho == Approx(s).epsilon(1e-15));
    auto pull = rates(ProtocolKind::pull, 1.0);
    REQUIRE(pull.gamma == Approx(0.632120558828557678).epsilon(1e-15));
    REQUIRE(pull.rho == 1.0);
    REQUIRE(rates(ProtocolKind::push_pull, std::log(2.0)).gamma ==
            Approx(0.639326239777759148).epsilon(1e-14));
    REQUIRE(rates(ProtocolKind::push_pull, 1.0).gamma == Approx(0.864664716763387308).epsilon(1e-14));

    for (double a : {0.01, 0.3, 1.0, 2.0, 8.0}) {
        const double sa = -std::expm1(-a);
        REQUIRE(rates(ProtocolKind::push_pull, a).gamma < 2.0 * sa);
        REQUIRE(rates(ProtocolKind::push_pull, a).gamma > rates(ProtocolKind::pull, a).gamma);
    }
}

TEST_CASE("finite-n rates", "[analytics]")
{
    for (std::uint32_t n : {5u, 100u, 10000u}) {
        const ModelParams params(n, 1.0);
        const double exact = n * pull_success_probability_exact(params, 1);
        REQUIRE(rates_finite_n(ProtocolKind::pull, params).gamma == Approx(exact).epsilon(1e-14));
    }
    // They approach the asymptotic rates.
    for (auto kind : all_protocols) {
        const auto fin = rates_finite_n(kind, ModelParams(1000000, 1.0));
        const auto lim = rates(kind, 1.0);
        REQUIRE(fin.gamma == Approx(lim.gamma).epsilon(1e-5));
        REQUIRE(fin.rho == Approx(lim.rho).epsilon(1e-5));
    }
}

TEST_CASE("leading-term predictor", "[analytics]")
{
    const ModelParams params(1024, 1.0);
    const auto pull = predict_expected_time(ProtocolKind::pull, params);
    REQUIRE(pull.growth_term == Approx(14.1493223397799163).epsilon(1e-12));
    REQUIRE(pull.shrink_term == Approx(6.93147180559945309).epsilon(1e-12));
    REQUIRE(pull.total_leading == Approx(21.0807941453793693).epsilon(1e-12));
    REQUIRE(PredictorResult::excludes_constant_term);

    const auto push = predict_expected_time(ProtocolKind::push, params);
    REQUIRE(push.shrink_term == Approx(10.9654269407798068).epsilon(1e-12));
    REQUIRE(push.total_leading == Approx(25.1147492805597230).epsilon(1e-12));

    for (std::uint32_t n : {3u, 50u, 1024u, 1u << 20}) {
        for (double a : {0.3, 1.0, 2.5}) {
            const ModelParams p(n, a);
            REQUIRE(predict_expected_time(ProtocolKind::push_pull, p).total_leading <
                    predict_expected_time(ProtocolKind::pull, p).total_leading);
        }
    }

    double previous = 0.0;
    for (std::uint32_t n = 3; n < 100000; n *= 3) {
        const double t = predict_expected_time(ProtocolKind::push, ModelParams(n, 1.0)).total_leading;
        REQUIRE(t > previous);
        previous = t;
    }
    REQUIRE_THROWS_AS(predict_expected_time(ProtocolKind::push, ModelParams(2, 1.0)),
                      std::invalid_argument);
    const auto fin = predict_expected_time(ProtocolKind::pull, params, RateVariant::finite_n);
    REQUIRE(fin.variant == RateVariant::finite_n);
    REQUIRE(fin.total_leading == Approx(pull.total_leading).epsilon(1e-2));
}

TEST_CASE("growth conditions on exact pull statistics", "[analytics]")
{
    const ModelParams params(1000, 1.0);
    const auto stats = pull_round_stats(params);
    REQUIRE(stats.size() == 999);
    const double gamma = rates(ProtocolKind::pull, 1.0).gamma;
    const ConditionParams cond;
    for (auto side : {BoundSide::upper, BoundSide::lower}) {
        const auto report = check_growth_conditions(stats, gamma, cond, side);
        INFO(to_string(side));
        REQUIRE(report.passed());
        REQUIRE(report.points_checked == 499);
    }

    auto broken = stats;
    broken[1].p_k = 0.0; // k = 2
    const auto report = check_growth_conditions(broken, gamma, cond, BoundSide::upper);
    REQUIRE_FALSE(report.passed());
    REQUIRE(report.first_violation->k == 2);
    REQUIRE(report.first_violation->condition == "success");

    const auto empty = check_growth_conditions({}, gamma, cond, BoundSide::upper);
    REQUIRE(empty.passed());
    REQUIRE_FALSE(empty.warnings.empty());

    ConditionParams bad;
    bad.a_cond = 3.0;
    REQUIRE_THROWS_AS(check_growth_conditions(stats, gamma, bad, BoundSide::upper),
                      std::invalid_argument);
}

TEST_CASE("shrink conditions on exact pull statistics", "[analytics]")
{
    const ModelParams params(1000, 1.0);
    const auto stats = pull_round_stats(params);
    const double rho = rates(ProtocolKind::pull, 1.0).rho;
    const ConditionParams cond;
    for (auto side : {BoundSide::upper, BoundSide::lower}) {
        const auto report = check_shrink_conditions(stats, rho, cond, side);
        INFO(to_string(side));
        REQUIRE(report.passed());
        REQUIRE(report.points_checked == 500);
    }

    // Claiming the faster Push&Pull-style shrink for Pull is not supported
    // near the end of the process.
    auto tight = cond;
    tight.a_cond = 0.01;
    REQUIRE_FALSE(check_shrink_conditions(stats, 2.0, tight, BoundSide::upper).passed());
}

TEST_CASE("model parameters", "[analytics]")
{
    REQUIRE_THROWS_AS(ModelParams(1, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ModelParams(10, 0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ModelParams(10, 11.0), std::invalid_argument);
    REQUIRE_THROWS_AS(ModelParams(10, std::numeric_limits<double>::quiet_NaN()),
                      std::invalid_argument);
    REQUIRE(ModelParams(100, 1.0).p() == Approx(0.01));
    REQUIRE(ModelParams::from_edge_probability(4, 0.25) == ModelParams(4, 1.0));
}
