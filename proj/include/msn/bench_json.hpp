#pragma once

// JSON form of configurations and result records. Non-finite numbers are
// written as the strings "inf", "-inf" and "nan".

#include "msn/bench.hpp"

#include <json.hpp>

namespace msn {

using Json = nlohmann::ordered_json;

Json to_json(const ProblemSpec& p);
ProblemSpec problem_from_json(const Json& j);

Json to_json(const Instance& inst);
Instance instance_from_json(const Json& j);

Json to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected with the key path.
ExperimentConfig config_from_json(const Json& j);

Json to_json(const RunRecord& r);
RunRecord run_from_json(const Json& j);

Json to_json(const Stats& s);
Json aggregates_json(const BenchSummary& s);

/// {format, config, runs, aggregates}
Json result_record(const BenchSummary& s);
/// Config and runs from a result record, aggregates recomputed.
BenchSummary summary_from_record(const Json& j);

}  // namespace msn
