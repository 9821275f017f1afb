#include "gossip/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gossip/parallel.hpp"

namespace gossip {

namespace {

EstimateReport make_report(double point, double se, std::uint64_t samples, const SeedSpec& seed)
{
    EstimateReport r;
    r.point = point;
    r.std_error = se;
    r.ci_lo = point - z95 * se;
    r.ci_hi = point + z95 * se;
    r.samples = samples;
    r.seed = seed;
    return r;
}

// Mean and standard error of the mean, summed in index order.
std::pair<double, double> mean_and_se(const std::vector<double>& xs)
{
    const double count = static_cast<double>(xs.size());
    double sum = 0.0;
    for (double x : xs)
        sum += x;
    const double mean = sum / count;
    if (xs.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (count - 1.0) / count)};
}

struct RoundTally {
    std::uint32_t newly = 0;
    std::uint32_t pushed = 0; // uninformed nodes pushed
    std::uint32_t both = 0;   // uninformed nodes pushed and pulled
    std::uint8_t probe_a = 0; // node k informed
    std::uint8_t probe_b = 0; // node k+1 informed
};

std::vector<RoundTally> run_single_rounds(const ModelParams& params, ProtocolKind kind,
                                          std::uint32_t k, std::uint64_t samples,
                                          const SeedSpec& seed, unsigned workers)
{
    const std::uint32_t n = params.n();
    if (k < 1 || k >= n)
        throw std::invalid_argument("single-round estimators need 1 <= k <= n-1");
    if (samples < 1)
        throw std::invalid_argument("at least one sample is required");

    std::vector<RoundTally> tallies(samples);
    const std::uint64_t blocks = (samples + rounds_per_stream - 1) / rounds_per_stream;
    const SpreadState start = SpreadState::initial(n, k);

    parallel_for(blocks, workers, [&](std::size_t b) {
        Engine rng = make_engine(substream(seed, b));
        RoundGraphSampler sampler(params);
        RoundGraph g;
        ChoiceVector choices;
        RoundOutcome out;
        const std::uint64_t begin = b * rounds_per_stream;
        const std::uint64_t end = std::min(samples, begin + rounds_per_stream);
        for (std::uint64_t i = begin; i < end; ++i) {
            sampler.sample(rng, g);
            draw_choices(start, kind, g, rng, choices);
            resolve_round(start, kind, g, choices, out);
            RoundTally t;
            t.newly = static_cast<std::uint32_t>(out.newly_informed.size());
            for (node_id y = k; y < n; ++y) {
                t.pushed += out.pushed[y];
                t.both += out.pushed[y] & out.pulled[y];
            }
            t.probe_a = out.pushed[k] | out.pulled[k];
            if (k + 1 < n)
                t.probe_b = out.pushed[k + 1] | out.pulled[k + 1];
            tallies[i] = t;
        }
    });
    return tallies;
}

// Ratio of sums with a round-clustered (linearized) standard error.
EstimateReport ratio_estimate(const std::vector<double>& numer, const std::vector<double>& denom,
                              const SeedSpec& seed)
{
    double sum_num = 0.0;
    double sum_den = 0.0;
    for (std::size_t i = 0; i < numer.size(); ++i) {
        sum_num += numer[i];
        sum_den += denom[i];
    }
    const double rounds = static_cast<double>(numer.size());
    const double ratio = sum_den > 0.0 ? sum_num / sum_den : 0.0;
    double se = 0.0;
    double pooled = 0.0;
    if (sum_den > 0.0 && numer.size() > 1) {
        double ss = 0.0;
        for (std::size_t i = 0; i < numer.size(); ++i) {
            const double resid = numer[i] - ratio * denom[i];
            ss += resid * resid;
        }
        se = std::sqrt(rounds / (rounds - 1.0) * ss) / sum_den;
        pooled = std::sqrt(ratio * (1.0 - ratio) / sum_den);
    }
    EstimateReport r = make_report(ratio, se, numer.size(), seed);
    r.events = static_cast<std::uint64_t>(sum_den);
    r.pooled_std_error = pooled;
    return r;
}

} // namespace

TailTable build_tail_table(const std::vector<std::uint32_t>& times)
{
    TailTable table;
    if (times.empty())
        return table;
    const double count = static_cast<double>(times.size());
    double sum = 0.0;
    for (auto t : times)
        sum += t;
    table.mean_T = sum / count;

    for (std::uint32_t r = 1;; ++r) {
        std::uint64_t upper = 0;
        std::uint64_t lower = 0;
        std::uint64_t either = 0;
        for (auto t : times) {
            const double dev = static_cast<double>(t) - table.mean_T;
            upper += dev >= r;
            lower += dev <= -static_cast<double>(r);
            either += std::abs(dev) >= r;
        }
        if (either == 0)
            break;
        table.rows.push_back({r, upper / count, lower / count, either / count, either});
    }

    std::vector<std::pair<double, double>> pts;
    for (const auto& row : table.rows)
        if (row.two_sided_hits >= TailTable::min_fit_hits)
            pts.emplace_back(row.r, std::log(row.two_sided_freq));
    table.fit_points = static_cast<std::uint32_t>(pts.size());
    if (pts.size() < 2) {
        table.fitted_decay_rate = std::numeric_limits<double>::quiet_NaN();
        table.fit_r_squared = std::numeric_limits<double>::quiet_NaN();
        return table;
    }
    double mx = 0.0, my = 0.0;
    for (auto [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= pts.size();
    my /= pts.size();
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (auto [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    const double slope = sxy / sxx;
    table.fitted_decay_rate = -slope;
    table.fit_r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return table;
}

SpreadingTimeResult estimate_spreading_time(const ModelParams& params, ProtocolKind kind,
                                            std::uint64_t trials, const SeedSpec& seed,
                                            const HarnessOptions& options)
{
    if (trials < 100)
        throw std::invalid_argument("estimate_spreading_time needs at least 100 trials");
    const std::uint64_t max_rounds =
        options.max_rounds ? options.max_rounds : default_max_rounds(params);

    SpreadingTimeResult result;
    result.times.assign(trials, 0);
    if (options.keep_traces)
        result.traces.resize(trials);

    parallel_for(trials, options.workers, [&](std::size_t i) {
        SpreadTrace trace = run_to_completion(params, kind, substream(seed, i), max_rounds);
        result.times[i] = trace.rounds();
        if (options.keep_traces)
            result.traces[i] = std::move(trace);
    });

    std::vector<double> xs(result.times.begin(), result.times.end());
    auto [mean, se] = mean_and_se(xs);
    result.report = make_report(mean, se, trials, seed);
    result.tail = build_tail_table(result.times);
    return result;
}

EstimateReport estimate_pk(const ModelParams& params, ProtocolKind kind, std::uint32_t k,
                           std::uint64_t samples, const SeedSpec& seed, unsigned workers)
{
    const auto tallies = run_single_rounds(params, kind, k, samples, seed, workers);
    const double u = params.n() - k;
    std::vector<double> xs;
    xs.reserve(tallies.size());
    for (const auto& t : tallies)
        xs.push_back(t.newly / u);
    auto [mean, se] = mean_and_se(xs);
    EstimateReport r = make_report(mean, se, samples, seed);
    r.pooled_std_error = std::sqrt(std::max(0.0, mean * (1.0 - mean)) / (u * samples));
    return r;
}

EstimateReport estimate_pair_covariance(const ModelParams& params, ProtocolKind kind,
                                        std::uint32_t k, std::uint64_t samples,
                                        const SeedSpec& seed, unsigned workers)
{
    if (k < 1 || k + 2 > params.n())
        throw std::invalid_argument("pair covariance needs 1 <= k <= n-2");
    if (samples < 2)
        throw std::invalid_argument("pair covariance needs at least two samples");
    const auto tallies = run_single_rounds(params, kind, k, samples, seed, workers);
    const double count = static_cast<double>(samples);

    double sa = 0.0, sb = 0.0;
    for (const auto& t : tallies) {
        sa += t.probe_a;
        sb += t.probe_b;
    }
    const double ma = sa / count;
    const double mb = sb / count;
    double cross = 0.0;
    for (const auto& t : tallies)
        cross += (t.probe_a - ma) * (t.probe_b - mb);
    const double cov = cross / (count - 1.0);

    // Influence-function SE of the product-moment estimator.
    double ss = 0.0;
    for (const auto& t : tallies) {
        const double psi = (t.probe_a - ma) * (t.probe_b - mb) - cov;
        ss += psi * psi;
    }
    const double se = std::sqrt(ss / (count - 1.0) / count);
    return make_report(cov, se, samples, seed);
}

InsufficientConditioningEvents::InsufficientConditioningEvents(std::uint64_t observed_,
                                                               std::uint64_t required_)
    : std::runtime_error("only " + std::to_string(observed_) + " pushed events observed, " +
                         std::to_string(required_) + " required; increase k or samples"),
      observed(observed_), required(required_)
{
}

EstimateReport estimate_conditional_pull_given_push(const ModelParams& params, std::uint32_t k,
                                                    std::uint64_t samples, const SeedSpec& seed,
                                                    unsigned workers, std::uint64_t min_events)
{
    const auto tallies =
        run_single_rounds(params, ProtocolKind::push_pull, k, samples, seed, workers);
    std::vector<double> both, pushed;
    both.reserve(tallies.size());
    pushed.reserve(tallies.size());
    std::uint64_t events = 0;
    for (const auto& t : tallies) {
        both.push_back(t.both);
        pushed.push_back(t.pushed);
        events += t.pushed;
    }
    if (events < min_events)
        throw InsufficientConditioningEvents(events, min_events);
    return ratio_estimate(both, pushed, seed);
}

OverlapReport estimate_push_pull_overlap(const ModelParams& params, std::uint32_t k,
                                         std::uint64_t samples, const SeedSpec& seed,
                                         unsigned workers)
{
    const auto tallies =
        run_single_rounds(params, ProtocolKind::push_pull, k, samples, seed, workers);
    std::vector<double> both, newly, pushed;
    for (const auto& t : tallies) {
        both.push_back(t.both);
        newly.push_back(t.newly);
        pushed.push_back(t.pushed);
    }
    return {ratio_estimate(both, newly, seed), ratio_estimate(both, pushed, seed)};
}

GapReport fit_leading_constant(ProtocolKind kind, double a, const std::vector<std::uint32_t>& n_grid,
                               std::uint64_t trials, const SeedSpec& seed,
                               std::optional<ProtocolKind> predictor,
                               const HarnessOptions& options)
{
    if (n_grid.size() < 3)
        throw std::invalid_argument("n_grid needs at least three points");
    if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
        std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end())
        throw std::invalid_argument("n_grid must be strictly increasing");
    if (static_cast<double>(n_grid.back()) < 4.0 * n_grid.front())
        throw std::invalid_argument("n_grid must span at least two octaves");

    GapReport report;
    report.protocol = kind;
    report.predictor = kind;
    report.a = a;
    report.trials = trials;
    report.seed = seed;

    for (std::size_t j = 0; j < n_grid.size(); ++j) {
        const ModelParams params(n_grid[j], a);
        HarnessOptions opts = options;
        opts.keep_traces = false;
        const auto sim =
            estimate_spreading_time(params, kind, trials, substream(seed, j * trials), opts);
        report.points.push_back({n_grid[j], sim.report.point, sim.report.std_error, 0.0, 0.0});
    }
    return rescore_gaps(report, predictor.value_or(kind));
}

GapReport rescore_gaps(const GapReport& data, ProtocolKind predictor)
{
    if (data.points.empty())
        throw std::invalid_argument("gap report has no points");
    GapReport report = data;
    report.predictor = predictor;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto& pt : report.points) {
        pt.predicted = predict_expected_time(predictor, ModelParams(pt.n, data.a)).total_leading;
        pt.gap = pt.mean_T - pt.predicted;
        lo = std::min(lo, pt.gap);
        hi = std::max(hi, pt.gap);
    }
    report.spread = hi - lo;
    report.drift = report.points.back().gap - report.points.front().gap;
    return report;
}

} // namespace gossip
