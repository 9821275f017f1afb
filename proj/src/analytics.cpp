#include "gossip/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gossip {

namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

// 1 - (1-q)^m without cancellation for small q.
double one_minus_power(double q, double m)
{
    return -std::expm1(m * std::log1p(-q));
}

double mu_of(const ModelParams& params, std::uint32_t k)
{
    return static_cast<double>(k) / params.n();
}

} // namespace

double isolation_probability_exact(std::uint32_t n, double p)
{
    if (n < 2)
        throw std::invalid_argument("isolation probability needs n >= 2");
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("edge probability must lie in [0, 1]");
    return std::exp(static_cast<double>(n - 1) * std::log1p(-p));
}

double isolation_probability_asymptotic(double a)
{
    return std::exp(-a);
}

ReciprocalSum binomial_reciprocal_sum(std::uint64_t m, double q)
{
    if (m < 1)
        throw std::invalid_argument("binomial_reciprocal_sum needs M >= 1");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("q must lie in [0, 1]");
    if (q == 0.0)
        return {1.0, true};
    const double md = static_cast<double>(m);
    return {one_minus_power(q, md) / (md * q), false};
}

double binomial_reciprocal_sum_direct(std::uint64_t m, double q)
{
    if (m < 1)
        throw std::invalid_argument("binomial_reciprocal_sum needs M >= 1");
    if (!(q >= 0.0 && q <= 1.0))
        throw std::invalid_argument("q must lie in [0, 1]");
    const std::uint64_t trials = m - 1;
    if (trials == 0 || q == 0.0)
        return 1.0;
    if (q == 1.0)
        return 1.0 / static_cast<double>(m);

    const double nd = static_cast<double>(trials);
    const double ratio = q / (1.0 - q);
    CompensatedSum sum;

    const double log_first = nd * std::log1p(-q);
    if (log_first > -700.0) {
        // Upward recurrence from i = 0 keeps every term to a few ulps.
        double pmf = std::exp(log_first);
        for (std::uint64_t i = 0; i <= trials; ++i) {
            sum.add(pmf / static_cast<double>(i + 1));
            pmf *= (nd - static_cast<double>(i)) / static_cast<double>(i + 1) * ratio;
        }
        return sum.value();
    }

    // Start at the mode with weight 1 so nothing underflows, walk both
    // ways, and normalize by the total weight. The pmf sums to one, so this
    // avoids evaluating the mode probability itself.
    const auto mode = std::min<std::uint64_t>(
        trials, static_cast<std::uint64_t>(std::floor((nd + 1.0) * q)));
    CompensatedSum total;
    double w = 1.0;
    for (std::uint64_t i = mode; i <= trials && w > 0.0; ++i) {
        sum.add(w / static_cast<double>(i + 1));
        total.add(w);
        w *= (nd - static_cast<double>(i)) / static_cast<double>(i + 1) * ratio;
    }
    w = 1.0;
    for (std::uint64_t i = mode; i > 0 && w > 0.0; --i) {
        w *= static_cast<double>(i) / (nd - static_cast<double>(i) + 1.0) / ratio;
        sum.add(w / static_cast<double>(i));
        total.add(w);
    }
    return sum.value() / total.value();
}

double pull_success_probability_exact(const ModelParams& params, std::uint32_t k)
{
    const std::uint32_t n = params.n();
    if (k == 0)
        return 0.0;
    if (k > n - 1)
        throw std::invalid_argument("pull success probability needs k <= n-1");
    const double reachable = 1.0 - isolation_probability_exact(n, params.p());
    return reachable * static_cast<double>(k) / static_cast<double>(n - 1);
}

double pull_covariance_bound(const ModelParams& params, std::uint32_t k)
{
    const double pk = pull_success_probability_exact(params, k);
    const double p = params.p();
    if (p >= 1.0)
        return std::numeric_limits<double>::infinity();
    return pk * pk * p / (1.0 - p);
}

double pull_given_single_informed_neighbor(const ModelParams& params, double mu)
{
    const double n = params.n();
    if (!(mu > 0.0 && mu < 1.0))
        throw std::invalid_argument("mu must lie in (0, 1)");
    const double k = mu * n;
    if (std::abs(k - std::round(k)) > 1e-9 * n)
        throw std::invalid_argument("mu * n must be an integer");
    const double uninformed = n - std::round(k);
    return one_minus_power(params.a() / n, uninformed) / (params.a() * (1.0 - mu));
}

double conditional_pull_given_push_limit(double a)
{
    if (!(a > 0.0))
        throw std::invalid_argument("a must be positive");
    return -std::expm1(-a) / a;
}

ProbabilityBracket push_success_probability_bounds(const ModelParams& params, std::uint32_t k,
                                                   const PushBoundConstants& constants)
{
    const std::uint32_t n = params.n();
    if (k < 1 || k > n - 1)
        throw std::invalid_argument("push bounds need 1 <= k <= n-1");
    const double a = params.a();
    const double c1 = constants.c1.value_or(a * a + a);
    const double mu = mu_of(params, k);
    const double reach = -std::expm1(-a);
    const double nd = n;

    ProbabilityBracket bracket;
    bracket.lower = mu * reach * (1.0 - (k + constants.c0) / (2.0 * nd) * reach);
    bracket.upper = mu * (reach + c1 / nd);
    bracket.lower = std::clamp(bracket.lower, 0.0, 1.0);
    bracket.upper = std::clamp(bracket.upper, 0.0, 1.0);
    return bracket;
}

std::string_view to_string(RateVariant variant)
{
    return variant == RateVariant::asymptotic ? "asymptotic" : "finite_n";
}

Rates rates(ProtocolKind kind, double a)
{
    if (!(a > 0.0))
        throw std::invalid_argument("a must be positive");
    const double reach = -std::expm1(-a);
    switch (kind) {
    case ProtocolKind::push:
        return {reach, reach};
    case ProtocolKind::pull:
        return {reach, a};
    case ProtocolKind::push_pull:
        return {reach * (2.0 - reach / a), a};
    }
    throw std::invalid_argument("unknown protocol");
}

Rates rates_finite_n(ProtocolKind kind, const ModelParams& params)
{
    const double n = params.n();
    const double p = params.p();
    const double iso = isolation_probability_exact(params.n(), p);
    const double reach = 1.0 - iso;
    const double scale = n / (n - 1.0);
    // -ln(iso) = -(n-1) ln(1-p); tends to a.
    const double rho_iso = p >= 1.0 ? std::numeric_limits<double>::infinity()
                                    : -(n - 1.0) * std::log1p(-p);
    switch (kind) {
    case ProtocolKind::push: {
        // Shrink: each of ~n-1 pushers hits a fixed node w.p. reach/(n-1).
        const double per_pusher = reach / (n - 1.0);
        const double rho = per_pusher >= 1.0 ? std::numeric_limits<double>::infinity()
                                             : -(n - 1.0) * std::log1p(-per_pusher);
        return {reach * scale, rho};
    }
    case ProtocolKind::pull:
        return {reach * scale, rho_iso};
    case ProtocolKind::push_pull:
        // n * p_1 = n/(n-1) * (2 reach - reach^2 / ((n-1) p)).
        return {scale * (2.0 * reach - reach * reach / ((n - 1.0) * p)), rho_iso};
    }
    throw std::invalid_argument("unknown protocol");
}

PredictorResult predict_expected_time(ProtocolKind kind, const ModelParams& params,
                                      RateVariant variant)
{
    if (params.n() < 3)
        throw std::invalid_argument("predictor needs n >= 3");
    const Rates r = variant == RateVariant::asymptotic ? rates(kind, params.a())
                                                       : rates_finite_n(kind, params);
    const double log_n = std::log(static_cast<double>(params.n()));

    PredictorResult result;
    result.protocol = kind;
    result.n = params.n();
    result.a = params.a();
    result.variant = variant;
    result.growth_rate = r.gamma;
    result.shrink_rate = r.rho;
    result.growth_term = log_n / std::log1p(r.gamma);
    result.shrink_term = log_n / r.rho;
    result.total_leading = result.growth_term + result.shrink_term;
    return result;
}

void ConditionParams::validate() const
{
    if (!(f > 0.0 && f < 1.0))
        throw std::invalid_argument("growth fraction f must lie in (0, 1)");
    if (!(g > 0.0 && g < 1.0))
        throw std::invalid_argument("shrink fraction g must lie in (0, 1)");
    if (a_cond < 0.0 || b_cond < 0.0 || c_cond < 0.0)
        throw std::invalid_argument("condition constants must be nonnegative");
}

std::string_view to_string(BoundSide side)
{
    return side == BoundSide::upper ? "upper" : "lower";
}

ConditionReport check_growth_conditions(std::span<const HomogeneousRoundStats> stats, double gamma,
                                        const ConditionParams& cond, BoundSide side)
{
    cond.validate();
    if (side == BoundSide::upper && cond.a_cond * cond.f >= 1.0)
        throw std::invalid_argument("upper growth conditions require a_cond * f < 1");

    ConditionReport report{"growth", side, gamma, cond, 0, std::nullopt, {}};
    if (stats.empty()) {
        report.warnings.emplace_back("no statistics supplied; passing trivially");
        return report;
    }
    for (const auto& s : stats) {
        const double n = s.n;
        if (!(s.k < cond.f * n))
            continue;
        ++report.points_checked;
        const double mu = s.mu();
        const double slack = cond.a_cond * mu + cond.b_cond / std::log(n);
        if (side == BoundSide::upper) {
            const double bound = gamma * mu * (1.0 - slack);
            if (!(s.p_k >= bound)) {
                report.first_violation = ConditionViolation{s.k, "success", s.p_k, bound};
                return report;
            }
        } else {
            const double bound = gamma * mu * (1.0 + slack);
            if (!(s.p_k <= bound)) {
                report.first_violation = ConditionViolation{s.k, "success", s.p_k, bound};
                return report;
            }
        }
        const double cov_bound = cond.c_cond * s.k / (n * n);
        if (!(s.c_k <= cov_bound)) {
            report.first_violation = ConditionViolation{s.k, "covariance", s.c_k, cov_bound};
            return report;
        }
    }
    if (report.points_checked == 0)
        report.warnings.emplace_back("no statistics with k < f n; passing trivially");
    return report;
}

ConditionReport check_shrink_conditions(std::span<const HomogeneousRoundStats> stats, double rho,
                                        const ConditionParams& cond, BoundSide side)
{
    cond.validate();
    const double floor_prob = std::exp(-rho);
    if (side == BoundSide::upper && floor_prob + cond.a_cond * cond.g >= 1.0)
        throw std::invalid_argument("upper shrink conditions require e^{-rho} + a_cond * g < 1");

    ConditionReport report{"shrink", side, rho, cond, 0, std::nullopt, {}};
    if (stats.empty()) {
        report.warnings.emplace_back("no statistics supplied; passing trivially");
        return report;
    }
    for (const auto& s : stats) {
        const double n = s.n;
        const double u = s.uninformed();
        if (u < 1 || u > cond.g * n)
            continue;
        ++report.points_checked;
        const double fail = 1.0 - s.p_k;
        if (side == BoundSide::upper) {
            const double bound = floor_prob + cond.a_cond * u / n;
            if (!(fail <= bound)) {
                report.first_violation = ConditionViolation{s.k, "success", fail, bound};
                return report;
            }
        } else {
            const double bound = floor_prob - cond.a_cond * u / n;
            if (!(fail >= bound)) {
                report.first_violation = ConditionViolation{s.k, "success", fail, bound};
                return report;
            }
        }
        const double cov_bound = cond.c_cond / u;
        if (!(s.c_k <= cov_bound)) {
            report.first_violation = ConditionViolation{s.k, "covariance", s.c_k, cov_bound};
            return report;
        }
    }
    if (report.points_checked == 0)
        report.warnings.emplace_back("no statistics with n - k <= g n; passing trivially");
    return report;
}

std::vector<HomogeneousRoundStats> pull_round_stats(const ModelParams& params)
{
    std::vector<HomogeneousRoundStats> stats;
    stats.reserve(params.n() - 1);
    for (std::uint32_t k = 1; k < params.n(); ++k)
        stats.push_back({params.n(), k, pull_success_probability_exact(params, k),
                         pull_covariance_bound(params, k)});
    return stats;
}

} // namespace gossip
