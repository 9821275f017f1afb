// Batch front end: simulate, predict, oracle, estimate, verify.
//
// Exit codes: 0 ok, 1 verification failure, 2 config error, 3 runtime limit.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gossip/acceptance.hpp"
#include "gossip/analytics.hpp"
#include "gossip/exact_oracle.hpp"
#include "gossip/mc_harness.hpp"
#include "gossip/parallel.hpp"
#include "gossip/serialization.hpp"

using namespace gossip;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_verify_failed = 1;
constexpr int exit_config = 2;
constexpr int exit_runtime_limit = 3;

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    std::string command;
    std::string protocol = "push";
    std::optional<std::uint32_t> n;
    std::vector<std::uint32_t> n_grid;
    std::optional<double> a;
    std::uint32_t k = 1;
    std::uint64_t trials = 1000;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    bool seed_given = false;
    unsigned workers = 0;
    std::string out;
    std::string format = "jsonl";
    std::uint32_t max_oracle_n = OracleLimits{}.max_n;
    std::uint64_t max_rounds = 0;
    std::uint64_t min_events = 1000;
    std::string estimator = "time";
    std::string variant = "asymptotic";
    bool run_length = false;
    bool quick = false;
};

json config_json(const ExperimentConfig& c)
{
    json j = {
        {"command", c.command},
        {"protocol", c.protocol},
        {"k", c.k},
        {"trials", c.trials},
        {"samples", c.samples},
        {"master_seed", c.seed},
        {"workers", resolve_workers(c.workers)},
        {"format", c.format},
        {"max_oracle_n", c.max_oracle_n},
        {"max_rounds", c.max_rounds},
        {"estimator", c.estimator},
        {"variant", c.variant},
        {"min_events", c.min_events},
        {"quick", c.quick},
    };
    j["n"] = c.n ? json(*c.n) : json(nullptr);
    j["a"] = c.a ? json(*c.a) : json(nullptr);
    if (!c.n_grid.empty())
        j["n_grid"] = c.n_grid;
    if (!c.out.empty())
        j["out"] = c.out;
    return j;
}

ModelParams require_params(const ExperimentConfig& c)
{
    if (!c.n)
        throw ConfigError("--n is required for " + c.command);
    if (!c.a)
        throw ConfigError("--a is required for " + c.command);
    return ModelParams(*c.n, *c.a);
}

ProtocolKind protocol_of(const ExperimentConfig& c)
{
    try {
        return parse_protocol(c.protocol);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--protocol: ") + e.what());
    }
}

void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
    if (!f)
        throw std::runtime_error("write failed for " + path);
}

// Summaries go to <out>.<suffix> when --out is set, else to stdout.
void emit(const ExperimentConfig& c, const std::string& suffix, const std::string& text)
{
    if (c.out.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n')
            std::cout << '\n';
        return;
    }
    const std::string path = c.out + "." + suffix;
    write_file(path, text + (text.empty() || text.back() == '\n' ? "" : "\n"));
    std::cerr << "wrote " << path << '\n';
}

int cmd_simulate(const ExperimentConfig& c)
{
    const auto params = require_params(c);
    const auto kind = protocol_of(c);
    HarnessOptions opts;
    opts.workers = c.workers;
    opts.keep_traces = !c.out.empty();
    opts.max_rounds = c.max_rounds;
    const SeedSpec seed{c.seed, 0};
    const auto res = estimate_spreading_time(params, kind, c.trials, seed, opts);

    json summary = {{"config", config_json(c)}, {"seed", seed},
                    {"T", res.report},          {"tail", res.tail}};
    if (!c.out.empty()) {
        std::string lines;
        for (const auto& trace : res.traces)
            lines += trace_to_json(trace, c.run_length).dump() + '\n';
        write_file(c.out + ".trials.jsonl", lines);
        std::cerr << "wrote " << c.out << ".trials.jsonl\n";
    }
    if (c.format == "csv")
        emit(c, "tail.csv", tail_table_csv(res.tail));
    emit(c, "summary.json", summary.dump(2));
    std::cerr << "seed " << c.seed << '\n';
    return exit_ok;
}

int cmd_predict(const ExperimentConfig& c)
{
    const auto params = require_params(c);
    const auto kind = protocol_of(c);
    RateVariant variant;
    if (c.variant == "asymptotic")
        variant = RateVariant::asymptotic;
    else if (c.variant == "finite_n")
        variant = RateVariant::finite_n;
    else
        throw ConfigError("--variant must be asymptotic or finite_n");
    json j = predict_expected_time(kind, params, variant);
    j["config"] = config_json(c);
    emit(c, "json", j.dump(2));
    return exit_ok;
}

int cmd_oracle(const ExperimentConfig& c)
{
    const auto params = require_params(c);
    const auto kind = protocol_of(c);
    OracleLimits limits;
    limits.max_n = c.max_oracle_n;
    limits.validate();
    json j = oracle_summary(params, kind, limits, c.workers);
    j["config"] = config_json(c);
    emit(c, "json", j.dump(2));
    return exit_ok;
}

int cmd_estimate(const ExperimentConfig& c)
{
    const auto kind = protocol_of(c);
    const SeedSpec seed{c.seed, 0};
    json j = {{"config", config_json(c)}, {"seed", seed}};

    if (c.estimator == "gap") {
        if (!c.a)
            throw ConfigError("--a is required for estimate");
        if (c.n_grid.empty())
            throw ConfigError("--n-grid is required for the gap estimator");
        HarnessOptions opts;
        opts.workers = c.workers;
        opts.max_rounds = c.max_rounds;
        const auto rep = fit_leading_constant(kind, *c.a, c.n_grid, c.trials, seed, kind, opts);
        if (c.format == "csv") {
            emit(c, "gap.csv", gap_report_csv(rep));
            return exit_ok;
        }
        j["gap"] = rep;
        emit(c, "json", j.dump(2));
        return exit_ok;
    }

    const auto params = require_params(c);
    if (c.estimator == "time") {
        HarnessOptions opts;
        opts.workers = c.workers;
        opts.max_rounds = c.max_rounds;
        const auto res = estimate_spreading_time(params, kind, c.trials, seed, opts);
        if (c.format == "csv") {
            emit(c, "tail.csv", tail_table_csv(res.tail));
            return exit_ok;
        }
        j["T"] = res.report;
        j["tail"] = res.tail;
    } else if (c.estimator == "pk") {
        j["p_k"] = estimate_pk(params, kind, c.k, c.samples, seed, c.workers);
    } else if (c.estimator == "covariance") {
        j["covariance"] = estimate_pair_covariance(params, kind, c.k, c.samples, seed, c.workers);
    } else if (c.estimator == "conditional") {
        j["pulled_given_pushed"] = estimate_conditional_pull_given_push(
            params, c.k, c.samples, seed, c.workers, c.min_events);
        j["limit"] = conditional_pull_given_push_limit(params.a());
    } else if (c.estimator == "overlap") {
        j["overlap"] = estimate_push_pull_overlap(params, c.k, c.samples, seed, c.workers);
    } else {
        throw ConfigError("unknown --estimator " + c.estimator);
    }
    emit(c, "json", j.dump(2));
    return exit_ok;
}

int cmd_verify(const ExperimentConfig& c)
{
    AcceptanceOptions opts;
    opts.quick = c.quick;
    opts.workers = c.workers;
    if (c.seed_given)
        opts.master_seed = c.seed;
    opts.on_result = [](const CriterionResult& r) {
        std::cout << format_result_line(r) << std::endl;
    };
    const auto results = run_acceptance(opts);
    std::string failed;
    for (const auto& r : results) {
        if (!r.passed)
            failed += (failed.empty() ? "" : ", ") + std::to_string(r.id);
    }
    if (!failed.empty()) {
        std::cout << "failed criteria: " << failed << std::endl;
        return exit_verify_failed;
    }
    std::cout << "all " << results.size() << " criteria passed" << std::endl;
    return exit_ok;
}

void add_common_options(CLI::App& app, ExperimentConfig& c)
{
    app.add_option("--protocol", c.protocol, "push | pull | pushpull");
    app.add_option("--n", c.n, "number of nodes");
    app.add_option("--n-grid", c.n_grid, "sizes for the gap estimator")->delimiter(',');
    app.add_option("--a", c.a, "edge parameter, p = a/n");
    app.add_option("--k", c.k, "informed count for single-round estimators");
    app.add_option("--trials", c.trials, "spreading runs");
    app.add_option("--samples", c.samples, "single rounds for round estimators");
    app.add_option("--seed", c.seed, "master seed");
    app.add_option("--workers", c.workers, "threads, 0 = all cores");
    app.add_option("--out", c.out, "output path prefix");
    app.add_option("--format", c.format, "jsonl | csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    app.add_option("--max-oracle-n", c.max_oracle_n, "largest n the oracle accepts")
        ->check(CLI::Range(2u, OracleLimits::hard_cap));
    app.add_option("--max-rounds", c.max_rounds, "round limit per run, 0 = default");
    app.add_option("--min-events", c.min_events, "conditioning events required");
    app.add_option("--estimator", c.estimator, "time | pk | covariance | conditional | overlap | gap")
        ->check(CLI::IsMember({"time", "pk", "covariance", "conditional", "overlap", "gap"}));
    app.add_option("--variant", c.variant, "predictor rates: asymptotic | finite_n");
    app.add_flag("--run-length", c.run_length, "run-length encode trace counts");
    app.add_flag("--quick", c.quick, "reduced acceptance trial counts");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"gossip spreading on evolving random graphs"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key=value file; flags override it");

    ExperimentConfig config;
    add_common_options(app, config);
    for (const char* name : {"simulate", "predict", "oracle", "estimate", "verify"})
        app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    config.command = app.get_subcommands().front()->get_name();
    config.seed_given = app.count("--seed") > 0;

    try {
        if (config.command == "simulate")
            return cmd_simulate(config);
        if (config.command == "predict")
            return cmd_predict(config);
        if (config.command == "oracle")
            return cmd_oracle(config);
        if (config.command == "estimate")
            return cmd_estimate(config);
        return cmd_verify(config);
    } catch (const RoundLimitExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime_limit;
    } catch (const InsufficientConditioningEvents& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime_limit;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_verify_failed;
    }
}
