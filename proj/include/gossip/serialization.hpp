#pragma once

#include <string>

#include "json.hpp"

#include "gossip/analytics.hpp"
#include "gossip/exact_oracle.hpp"
#include "gossip/mc_harness.hpp"
#include "gossip/protocols.hpp"

namespace gossip {

using json = nlohmann::json;

void to_json(json& j, const SeedSpec& seed);
void to_json(json& j, const EstimateReport& report);
void to_json(json& j, const TailTable& table);
void to_json(json& j, const PredictorResult& result);
void to_json(json& j, const ConditionReport& report);
void to_json(json& j, const GapReport& report);
void to_json(json& j, const TransitionMatrix& matrix);
void to_json(json& j, const OverlapReport& report);

// {protocol, n, a, master_seed, stream_id, T, counts}. With run_length the
// counts are written as [value, repeat] pairs.
json trace_to_json(const SpreadTrace& trace, bool run_length = false);

// Accepts both count encodings. Throws std::invalid_argument on malformed
// records (bad protocol, counts not starting at 1, not ending at n,
// decreasing, or T inconsistent with counts).
SpreadTrace trace_from_json(const json& j);

// Oracle outputs for one (n, a, kind): transition matrix, E[T], p_k for
// k = 1..n-1 and pair covariances for k = 1..n-2.
json oracle_summary(const ModelParams& params, ProtocolKind kind, const OracleLimits& limits,
                    unsigned workers);

std::string tail_table_csv(const TailTable& table);
std::string gap_report_csv(const GapReport& report);

} // namespace gossip
