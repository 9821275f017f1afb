#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gossip/analytics.hpp"
#include "gossip/model.hpp"
#include "gossip/protocols.hpp"
#include "gossip/rng.hpp"

namespace gossip {

inline constexpr double z95 = 1.959963984540054;

struct EstimateReport {
    double point = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t samples = 0; // trials or single rounds
    SeedSpec seed;
    // Ratio estimators: number of conditioning events (denominator).
    std::optional<std::uint64_t> events;
    // Node-level SE that ignores within-round correlation, for comparison.
    std::optional<double> pooled_std_error;
};

struct TailRow {
    std::uint32_t r = 0;
    double upper_freq = 0.0;      // P[T >= mean + r]
    double lower_freq = 0.0;      // P[T <= mean - r]
    double two_sided_freq = 0.0;  // P[|T - mean| >= r]
    std::uint64_t two_sided_hits = 0;
};

struct TailTable {
    double mean_T = 0.0;
    std::vector<TailRow> rows; // r = 1, 2, ... until no trial deviates by r
    // Least squares of ln(two_sided_freq) against r over rows with at least
    // min_fit_hits hits; decay rate is minus the slope. NaN when fewer than
    // two rows qualify.
    double fitted_decay_rate = 0.0;
    double fit_r_squared = 0.0;
    std::uint32_t fit_points = 0;

    static constexpr std::uint64_t min_fit_hits = 30;
};

struct HarnessOptions {
    unsigned workers = 0; // 0 = hardware concurrency
    bool keep_traces = false;
    std::uint64_t max_rounds = 0; // 0 = default_max_rounds(params)
};

struct SpreadingTimeResult {
    EstimateReport report;
    TailTable tail;
    std::vector<std::uint32_t> times; // per trial, in trial order
    std::vector<SpreadTrace> traces;  // only with keep_traces
};

// Trial i runs on substream(seed, i). Requires trials >= 100. A trial that
// hits the round limit rethrows RoundLimitExceeded naming its seed.
SpreadingTimeResult estimate_spreading_time(const ModelParams& params, ProtocolKind kind,
                                            std::uint64_t trials, const SeedSpec& seed,
                                            const HarnessOptions& options = {});

TailTable build_tail_table(const std::vector<std::uint32_t>& times);

// Single-round experiments start from informed set {0..k-1}; they are cut
// into blocks of this many rounds, block b drawing from substream(seed, b).
inline constexpr std::uint64_t rounds_per_stream = 1024;

// Mean over rounds of (newly informed)/(n-k). SE from per-round values.
EstimateReport estimate_pk(const ModelParams& params, ProtocolKind kind, std::uint32_t k,
                           std::uint64_t samples, const SeedSpec& seed, unsigned workers = 0);

// Covariance of the indicators of nodes k and k+1. Requires k <= n-2.
EstimateReport estimate_pair_covariance(const ModelParams& params, ProtocolKind kind,
                                        std::uint32_t k, std::uint64_t samples,
                                        const SeedSpec& seed, unsigned workers = 0);

class InsufficientConditioningEvents : public std::runtime_error {
public:
    InsufficientConditioningEvents(std::uint64_t observed, std::uint64_t required);
    std::uint64_t observed;
    std::uint64_t required;
};

// Push&Pull rounds; among uninformed nodes that were pushed, the fraction
// that also pulled. SE clustered by round.
EstimateReport estimate_conditional_pull_given_push(const ModelParams& params, std::uint32_t k,
                                                    std::uint64_t samples, const SeedSpec& seed,
                                                    unsigned workers = 0,
                                                    std::uint64_t min_events = 1000);

struct OverlapReport {
    // Fraction of newly informed nodes that were both pushed and pulled.
    EstimateReport overlap;
    // Fraction of pushed nodes that also pulled.
    EstimateReport pulled_given_pushed;
};

OverlapReport estimate_push_pull_overlap(const ModelParams& params, std::uint32_t k,
                                         std::uint64_t samples, const SeedSpec& seed,
                                         unsigned workers = 0);

struct GapPoint {
    std::uint32_t n = 0;
    double mean_T = 0.0;
    double std_error = 0.0;
    double predicted = 0.0; // leading terms
    double gap = 0.0;       // mean_T - predicted
};

struct GapReport {
    ProtocolKind protocol = ProtocolKind::push;
    ProtocolKind predictor = ProtocolKind::push;
    double a = 0.0;
    std::uint64_t trials = 0;
    SeedSpec seed;
    std::vector<GapPoint> points;
    double spread = 0.0; // max gap - min gap
    double drift = 0.0;  // last gap - first gap
};

// Simulates `kind` on each grid size and subtracts the leading-term
// predictor of `predictor` (defaults to kind; a different one gives a
// negative control). Grid point j uses streams starting at
// seed.stream_id + j * trials. n_grid must be sorted, have at least three
// points and span at least two octaves.
GapReport fit_leading_constant(ProtocolKind kind, double a, const std::vector<std::uint32_t>& n_grid,
                               std::uint64_t trials, const SeedSpec& seed,
                               std::optional<ProtocolKind> predictor = std::nullopt,
                               const HarnessOptions& options = {});

// Same simulated means scored against another protocol's predictor.
GapReport rescore_gaps(const GapReport& data, ProtocolKind predictor);

} // namespace gossip
