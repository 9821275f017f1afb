#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "gossip/analytics.hpp"
#include "gossip/exact_oracle.hpp"
#include "gossip/mc_harness.hpp"
#include "gossip/serialization.hpp"

using namespace gossip;

namespace {

bool within(const EstimateReport& r, double target, double sigmas, double slack = 0.0)
{
    return std::abs(r.point - target) <= sigmas * r.std_error + slack;
}

HarnessOptions with_workers(unsigned w)
{
    HarnessOptions o;
    o.workers = w;
    return o;
}

} // namespace

TEST_CASE("spreading time on two nodes is geometric", "[mc_harness][statistical]")
{
    const auto res = estimate_spreading_time(ModelParams(2, 1.0), ProtocolKind::push, 100000,
                                             {41, 0}, with_workers(2));
    CHECK(std::abs(res.report.point - 2.0) <= 3 * std::sqrt(2.0 / 100000));
    REQUIRE(res.report.samples == 100000);
    REQUIRE(res.report.ci_lo <= res.report.point);
    REQUIRE(res.report.point <= res.report.ci_hi);
    REQUIRE(res.times.size() == 100000);
    REQUIRE_THROWS_AS(estimate_spreading_time(ModelParams(2, 1.0), ProtocolKind::push, 99, {1, 0}),
                      std::invalid_argument);
}

TEST_CASE("simulation matches the oracle at n = 5", "[mc_harness][statistical]")
{
    const ModelParams params(5, 1.0);
    for (auto kind : all_protocols) {
        INFO(to_string(kind));
        const auto res = estimate_spreading_time(params, kind, 100000, {42, 0});
        CHECK(within(res.report, exact_expected_time(params, kind), 4));
    }
}

TEST_CASE("reports do not depend on the worker count", "[mc_harness]")
{
    const ModelParams params(300, 1.0);
    auto keep = with_workers(1);
    keep.keep_traces = true;
    const auto one = estimate_spreading_time(params, ProtocolKind::pull, 200, {43, 5}, keep);
    keep.workers = 3;
    const auto three = estimate_spreading_time(params, ProtocolKind::pull, 200, {43, 5}, keep);
    REQUIRE(one.times == three.times);
    REQUIRE(json(one.report).dump() == json(three.report).dump());
    REQUIRE(json(one.tail).dump() == json(three.tail).dump());
    REQUIRE(one.traces.size() == 200);
    REQUIRE(one.traces[7].seed == SeedSpec{43, 12});

    const ModelParams small(50, 1.0);
    for (auto kind : all_protocols) {
        REQUIRE(json(estimate_pk(small, kind, 5, 3000, {44, 0}, 1)).dump() ==
                json(estimate_pk(small, kind, 5, 3000, {44, 0}, 4)).dump());
        REQUIRE(json(estimate_pair_covariance(small, kind, 5, 3000, {45, 0}, 1)).dump() ==
                json(estimate_pair_covariance(small, kind, 5, 3000, {45, 0}, 4)).dump());
    }
    REQUIRE(json(estimate_push_pull_overlap(small, 3, 3000, {46, 0}, 1)).dump() ==
            json(estimate_push_pull_overlap(small, 3, 3000, {46, 0}, 4)).dump());
}

TEST_CASE("tail table by hand", "[mc_harness]")
{
    // Mean 3. r = 1: {4, 5} above, {1, 2} below. r = 2: {5} and {1}.
    const auto t = build_tail_table({1, 2, 3, 4, 5});
    REQUIRE(t.mean_T == 3.0);
    REQUIRE(t.rows.size() == 2);
    REQUIRE(t.rows[0].upper_freq == Catch::Approx(0.4));
    REQUIRE(t.rows[0].lower_freq == Catch::Approx(0.4));
    REQUIRE(t.rows[0].two_sided_freq == Catch::Approx(0.8));
    REQUIRE(t.rows[1].two_sided_hits == 2);
    REQUIRE(t.fit_points == 0);
    REQUIRE(std::isnan(t.fitted_decay_rate));
}

TEST_CASE("tails decay", "[mc_harness][statistical]")
{
    const auto res = estimate_spreading_time(ModelParams(512, 1.0), ProtocolKind::push_pull, 3000,
                                             {47, 0});
    const auto& t = res.tail;
    REQUIRE_FALSE(t.rows.empty());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        REQUIRE(t.rows[i].r == i + 1);
        REQUIRE(t.rows[i].two_sided_freq <= 1.0);
        if (i > 0) {
            REQUIRE(t.rows[i].upper_freq <= t.rows[i - 1].upper_freq);
            REQUIRE(t.rows[i].lower_freq <= t.rows[i - 1].lower_freq);
        }
    }
    REQUIRE(t.fit_points >= 2);
    REQUIRE(t.fitted_decay_rate > 0.0);
}

TEST_CASE("single-round success probability", "[mc_harness][statistical]")
{
    const ModelParams params(100, 1.0);
    const auto est = estimate_pk(params, ProtocolKind::pull, 10, 100000, {48, 0});
    CHECK(within(est, pull_success_probability_exact(params, 10), 4));

    const ModelParams complete(4, 4.0);
    const auto pp = estimate_pk(complete, ProtocolKind::push_pull, 1, 100000, {49, 0});
    CHECK(within(pp, exact_pk(complete, 1, ProtocolKind::push_pull), 4));

    const ModelParams five(5, 1.0);
    for (auto kind : all_protocols) {
        INFO(to_string(kind));
        CHECK(within(estimate_pk(five, kind, 2, 200000, {50, 0}), exact_pk(five, 2, kind), 4));
    }
    REQUIRE_THROWS_AS(estimate_pk(five, ProtocolKind::pull, 5, 100, {1, 0}), std::invalid_argument);
}

TEST_CASE("round clustering never shrinks the SE under positive correlation", "[mc_harness]")
{
    // Pull indicators are positively correlated (see the oracle covariance).
    for (std::uint32_t n : {5u, 100u}) {
        const ModelParams params(n, 1.0);
        const auto est = estimate_pk(params, ProtocolKind::pull, 2, 100000, {51, n});
        REQUIRE(est.pooled_std_error.has_value());
        CHECK(est.std_error >= *est.pooled_std_error);
    }
    REQUIRE(exact_pair_covariance(ModelParams(5, 1.0), 2, ProtocolKind::pull) > 0.0);
}

TEST_CASE("pair covariance estimates", "[mc_harness][statistical]")
{
    const ModelParams five(5, 1.0);
    const auto pull = estimate_pair_covariance(five, ProtocolKind::pull, 2, 1000000, {52, 0});
    CHECK(within(pull, exact_pair_covariance(five, 2, ProtocolKind::pull), 4));

    const auto complete =
        estimate_pair_covariance(ModelParams(10, 10.0), ProtocolKind::pull, 3, 100000, {53, 0});
    CHECK(within(complete, 0.0, 4));

    const auto pp =
        estimate_pair_covariance(ModelParams(100, 1.0), ProtocolKind::push_pull, 10, 1000000, {54, 0});
    CHECK(pp.point <= 10.0 * 10 / (100.0 * 100) + 4 * pp.std_error);

    REQUIRE_THROWS_AS(estimate_pair_covariance(five, ProtocolKind::pull, 4, 100, {1, 0}),
                      std::invalid_argument);
}

TEST_CASE("conditional pull given push", "[mc_harness][statistical]")
{
    // Complete graph on three nodes: a pushed node picks the informed node
    // with probability 1/2.
    const auto three = estimate_conditional_pull_given_push(ModelParams(3, 3.0), 1, 20000, {55, 0});
    CHECK(within(three, 0.5, 4));
    REQUIRE(three.events.value_or(0) == 20000);

    // Same mu at n and 2n.
    const auto small = estimate_conditional_pull_given_push(ModelParams(2000, 1.0), 20, 8000, {56, 0});
    const auto large = estimate_conditional_pull_given_push(ModelParams(4000, 1.0), 40, 8000, {57, 0});
    const double combined = std::hypot(small.std_error, large.std_error);
    CHECK(std::abs(small.point - large.point) <= 4 * combined + 0.01);

    try {
        estimate_conditional_pull_given_push(ModelParams(1000, 1.0), 1, 10, {58, 0});
        FAIL("expected InsufficientConditioningEvents");
    } catch (const InsufficientConditioningEvents& e) {
        REQUIRE(e.observed < 1000);
        REQUIRE(e.required == 1000);
    }
}

TEST_CASE("push-pull overlap", "[mc_harness][statistical]")
{
    const auto complete = estimate_push_pull_overlap(ModelParams(1000, 1000.0), 1, 2000, {59, 0});
    CHECK(complete.overlap.point <= 0.01);

    const auto sparse = estimate_push_pull_overlap(ModelParams(1000, 1.0), 1, 100000, {60, 0});
    CHECK(within(sparse.pulled_given_pushed, 0.6321, 3, 0.02));
    CHECK(sparse.overlap.point > 0.1);

    const auto last = estimate_push_pull_overlap(ModelParams(10, 1.0), 9, 2000, {61, 0});
    REQUIRE(last.overlap.point >= 0.0);
    REQUIRE(last.overlap.point <= 1.0);
}

TEST_CASE("leading constant fit", "[mc_harness]")
{
    const std::vector<std::uint32_t> grid{64, 256, 1024};
    const auto rep = fit_leading_constant(ProtocolKind::pull, 1.0, grid, 300, {62, 0});
    REQUIRE(rep.points.size() == 3);
    REQUIRE(rep.predictor == ProtocolKind::pull);
    for (const auto& pt : rep.points)
        REQUIRE(pt.gap == Catch::Approx(pt.mean_T - pt.predicted));
    REQUIRE(rep.spread >= std::abs(rep.drift));

    const auto control = rescore_gaps(rep, ProtocolKind::push);
    REQUIRE(control.predictor == ProtocolKind::push);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        REQUIRE(control.points[i].mean_T == rep.points[i].mean_T);
        REQUIRE(control.points[i].predicted > rep.points[i].predicted);
    }

    REQUIRE_THROWS_AS(fit_leading_constant(ProtocolKind::pull, 1.0, {64, 1024}, 100, {1, 0}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(fit_leading_constant(ProtocolKind::pull, 1.0, {256, 64, 1024}, 100, {1, 0}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(fit_leading_constant(ProtocolKind::pull, 1.0, {64, 100, 200}, 100, {1, 0}),
                      std::invalid_argument);
}
