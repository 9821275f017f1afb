#include "gossip/serialization.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace gossip {

void to_json(json& j, const SeedSpec& seed)
{
    j = json{{"master_seed", seed.master_seed}, {"stream_id", seed.stream_id}};
}

void to_json(json& j, const EstimateReport& r)
{
    j = json{{"point", r.point},
             {"std_error", r.std_error},
             {"ci95", {r.ci_lo, r.ci_hi}},
             {"samples", r.samples},
             {"seed", r.seed}};
    if (r.events)
        j["events"] = *r.events;
    if (r.pooled_std_error)
        j["pooled_std_error"] = *r.pooled_std_error;
}

void to_json(json& j, const TailTable& t)
{
    json rows = json::array();
    for (const auto& row : t.rows)
        rows.push_back({{"r", row.r},
                        {"upper_freq", row.upper_freq},
                        {"lower_freq", row.lower_freq},
                        {"two_sided_freq", row.two_sided_freq},
                        {"two_sided_hits", row.two_sided_hits}});
    j = json{{"mean_T", t.mean_T},
             {"rows", rows},
             {"fitted_decay_rate", t.fitted_decay_rate},
             {"fit_r_squared", t.fit_r_squared},
             {"fit_points", t.fit_points},
             {"min_fit_hits", TailTable::min_fit_hits}};
}

void to_json(json& j, const PredictorResult& r)
{
    j = json{{"protocol", to_string(r.protocol)},
             {"n", r.n},
             {"a", r.a},
             {"variant", to_string(r.variant)},
             {"growth_rate", r.growth_rate},
             {"shrink_rate", r.shrink_rate},
             {"growth_term", r.growth_term},
             {"shrink_term", r.shrink_term},
             {"total_leading", r.total_leading},
             {"excludes_constant_term", PredictorResult::excludes_constant_term}};
}

void to_json(json& j, const ConditionReport& r)
{
    j = json{{"phase", r.phase},
             {"side", to_string(r.side)},
             {"rate", r.rate},
             {"f", r.params.f},
             {"g", r.params.g},
             {"a_cond", r.params.a_cond},
             {"b_cond", r.params.b_cond},
             {"c_cond", r.params.c_cond},
             {"points_checked", r.points_checked},
             {"passed", r.passed()},
             {"warnings", r.warnings}};
    if (r.first_violation) {
        const auto& v = *r.first_violation;
        j["first_violation"] = {{"k", v.k},
                                {"condition", v.condition},
                                {"observed", v.observed},
                                {"bound", v.bound}};
    } else {
        j["first_violation"] = nullptr;
    }
}

void to_json(json& j, const GapReport& r)
{
    json points = json::array();
    for (const auto& p : r.points)
        points.push_back({{"n", p.n},
                          {"mean_T", p.mean_T},
                          {"std_error", p.std_error},
                          {"predicted", p.predicted},
                          {"gap", p.gap}});
    j = json{{"protocol", to_string(r.protocol)},
             {"predictor", to_string(r.predictor)},
             {"a", r.a},
             {"trials", r.trials},
             {"seed", r.seed},
             {"points", points},
             {"spread", r.spread},
             {"drift", r.drift}};
}

void to_json(json& j, const TransitionMatrix& m)
{
    json rows = json::object();
    for (std::uint32_t k = 1; k <= m.n; ++k) {
        json row = json::object();
        for (std::uint32_t to = k; to <= m.n; ++to)
            if (m(k, to) != 0.0)
                row[std::to_string(to)] = m(k, to);
        rows[std::to_string(k)] = row;
    }
    j = json{{"n", m.n}, {"p", m.p}, {"protocol", to_string(m.kind)}, {"rows", rows}};
}

void to_json(json& j, const OverlapReport& r)
{
    j = json{{"overlap", r.overlap}, {"pulled_given_pushed", r.pulled_given_pushed}};
}

json trace_to_json(const SpreadTrace& trace, bool run_length)
{
    json counts = json::array();
    if (run_length) {
        for (std::size_t i = 0; i < trace.counts.size();) {
            std::size_t j = i;
            while (j < trace.counts.size() && trace.counts[j] == trace.counts[i])
                ++j;
            counts.push_back({trace.counts[i], j - i});
            i = j;
        }
    } else {
        counts = trace.counts;
    }
    return json{{"protocol", to_string(trace.protocol)},
                {"n", trace.params.n()},
                {"a", trace.params.a()},
                {"master_seed", trace.seed.master_seed},
                {"stream_id", trace.seed.stream_id},
                {"T", trace.rounds()},
                {"counts", counts}};
}

SpreadTrace trace_from_json(const json& j)
{
    try {
        SpreadTrace trace{parse_protocol(j.at("protocol").get<std::string>()),
                          ModelParams(j.at("n").get<std::uint32_t>(), j.at("a").get<double>()),
                          SeedSpec{j.at("master_seed").get<std::uint64_t>(),
                                   j.at("stream_id").get<std::uint64_t>()},
                          {}};
        for (const auto& entry : j.at("counts")) {
            if (entry.is_array()) {
                const auto value = entry.at(0).get<std::uint32_t>();
                const auto repeat = entry.at(1).get<std::uint64_t>();
                if (repeat == 0)
                    throw std::invalid_argument("zero repeat in run-length counts");
                const std::uint64_t cap = default_max_rounds(trace.params) + 1;
                if (repeat > cap || trace.counts.size() + repeat > cap)
                    throw std::invalid_argument("trace longer than the round limit");
                trace.counts.insert(trace.counts.end(), repeat, value);
            } else {
                trace.counts.push_back(entry.get<std::uint32_t>());
            }
        }
        const auto& c = trace.counts;
        if (c.empty() || c.front() != 1)
            throw std::invalid_argument("trace counts must start at 1");
        if (c.back() != trace.params.n())
            throw std::invalid_argument("trace counts must end at n");
        if (!std::is_sorted(c.begin(), c.end()))
            throw std::invalid_argument("trace counts must be nondecreasing");
        if (j.at("T").get<std::uint64_t>() != trace.rounds())
            throw std::invalid_argument("trace T does not match its counts");
        return trace;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed trace record: ") + e.what());
    }
}

json oracle_summary(const ModelParams& params, ProtocolKind kind, const OracleLimits& limits,
                    unsigned workers)
{
    const TransitionMatrix matrix = exact_transition_matrix(params, kind, limits, workers);
    json pk = json::object();
    json cov = json::object();
    for (std::uint32_t k = 1; k < params.n(); ++k) {
        const RoundLaw law = exact_round_law(params, k, kind, limits, workers);
        pk[std::to_string(k)] = law.probe_a;
        if (k + 2 <= params.n())
            cov[std::to_string(k)] = law.covariance();
    }
    return json{{"n", params.n()},
                {"a", params.a()},
                {"p", params.p()},
                {"protocol", to_string(kind)},
                {"expected_time", exact_expected_time(matrix)},
                {"transition_matrix", matrix},
                {"p_k", pk},
                {"pair_covariance", cov}};
}

std::string tail_table_csv(const TailTable& t)
{
    std::ostringstream out;
    out.precision(17);
    out << "r,upper_freq,lower_freq,two_sided_freq,two_sided_hits\n";
    for (const auto& row : t.rows)
        out << row.r << ',' << row.upper_freq << ',' << row.lower_freq << ','
            << row.two_sided_freq << ',' << row.two_sided_hits << '\n';
    return out.str();
}

std::string gap_report_csv(const GapReport& r)
{
    std::ostringstream out;
    out.precision(17);
    out << "n,mean_T,std_error,predicted,gap\n";
    for (const auto& p : r.points)
        out << p.n << ',' << p.mean_T << ',' << p.std_error << ',' << p.predicted << ','
            << p.gap << '\n';
    return out.str();
}

} // namespace gossip
