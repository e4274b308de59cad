#pragma once

#include <map>
#include <string>
#include <vector>

#include "zql/aggregate.hpp"
#include "zql/plan.hpp"
#include "zql/primitives.hpp"
#include "zql/process_eval.hpp"
#include "zql/validate.hpp"
#include "zql/viscollection.hpp"

namespace zql {

struct TraceRequest {
    int phase = 0;
    std::vector<std::string> nodes;   // owning c-node labels, one per member
    std::size_t group_values = 0;     // distinct group-by values actually returned
    std::size_t est_group_values = 0; // planner estimate used for combining
    std::string sql;
};

struct TraceCompletion {
    std::string node;
    int phase = 0;
};

struct ExecutionTrace {
    std::vector<TraceRequest> requests;
    std::vector<TraceCompletion> completions;
    BatchPlan plan;
    int phase_count = 0;
    double predicted_ms = 0;
    double measured_ms = 0;

    std::size_t request_count() const { return requests.size(); }
    // line-delimited: phase, node, requests, group_values, predicted_ms
    std::string to_csv(const CostModel& cost) const;
};

struct ResultSet {
    std::vector<std::pair<std::string, VisCollection>> outputs;
};

bool operator==(const ResultSet& a, const ResultSet& b);

struct RunOutput {
    ResultSet results;
    ExecutionTrace trace;
};

struct EngineOptions {
    CostModel cost;
    bool cache_aware = false;     // evaluate p-nodes with blocked iteration
    std::size_t block_bytes = 0;  // 0 = ZQL_L3_BYTES or the built-in default
    bool concurrent_requests = true;
};

class Engine {
public:
    Engine(const ColumnTable& table, PrimitiveRegistry registry = PrimitiveRegistry::builtin(),
           EngineOptions options = {});

    RunOutput run(const ValidatedQuery& vq, ExecStrategy strategy) const;

    const ColumnTable& table() const { return *table_; }
    const PrimitiveRegistry& registry() const { return registry_; }
    const EngineOptions& options() const { return options_; }

private:
    const ColumnTable* table_;
    PrimitiveRegistry registry_;
    EngineOptions options_;
};

}  // namespace zql
