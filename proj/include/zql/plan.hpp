#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "zql/aggregate.hpp"
#include "zql/validate.hpp"

namespace zql {

enum class ExecStrategy { NoOpt, Parallel, Speculate, SmartFuse };

const char* to_string(ExecStrategy s);
std::optional<ExecStrategy> strategy_from_string(const std::string& s);

// Fitted backend latency model: per-batch fixed cost, per-concurrent-query
// cost, and cost per 100 group-by values, plus the combined-cardinality cap.
struct CostModel {
    double fixed_ms = 1635.0;
    double per_query_ms = 908.0;
    double per_100_group_values_ms = 1.22;
    std::size_t max_groupby = 100000;  // M_G

    // Weight of one query against one group-by value in the abstract
    // combination objective; defaults so that objective and fitted model
    // agree on merge decisions.
    double alpha() const { return per_query_ms / (per_100_group_values_ms / 100.0); }
};

struct PlanNode {
    enum class Kind { Collection, Process };
    Kind kind = Kind::Collection;
    int row = -1;
    int proc_index = -1;
    std::string label;
};

struct PlanDag {
    std::vector<PlanNode> nodes;
    std::vector<std::vector<int>> parents;
    std::vector<std::vector<int>> children;
    std::map<int, int> cnode_of_row;
    std::map<std::pair<int, int>, int> pnode_of;

    int node_count() const { return static_cast<int>(nodes.size()); }
};

// c-node / p-node graph per the four construction rules, extended with
// edges from operand collections into name-derived collections.
PlanDag build_dag(const ValidatedQuery& vq);

std::string to_dot(const PlanDag& dag);

// ---- combination accounting ----

// The group-by attribute signature of a request: x attribute plus group
// dimensions, each with its binning.
struct GroupSig {
    std::map<std::string, std::optional<Binning>> attrs;

    void add(const std::string& attr, const std::optional<Binning>& b) {
        auto it = attrs.find(attr);
        if (it == attrs.end()) attrs.emplace(attr, b);
    }
    void merge(const GroupSig& o) {
        for (const auto& [a, b] : o.attrs) add(a, b);
    }
};

GroupSig request_sig(const AggregateRequest& req);

// Product of per-attribute cardinalities; the planner's estimate of a
// request's unique group-by values.
std::size_t sig_cardinality(const GroupSig& sig, const ColumnTable& table);

// Effective increase in group-by values when q' joins q: the product of the
// cardinalities of q' attributes not already grouped by q.
double efgv(const GroupSig& q, const GroupSig& q_prime, const ColumnTable& table);
double efgv(const AggregateRequest& q, const AggregateRequest& q_prime, const ColumnTable& table);

// ---- batch plans ----

struct PlannedRequest {
    AggregateRequest request;
    GroupSig sig;
    std::size_t est_card = 0;
    int node = -1;  // owning c-node
};

struct CombinedGroup {
    std::vector<int> members;  // indices into the phase's request list
    GroupSig sig;
    std::size_t est_card = 0;
};

// Greedy agglomerative combination of one phase's ready requests: repeatedly
// merge the pair with the least effective group-value growth while the
// merge lowers the predicted phase cost and stays under the cap.
// Deterministic: ties resolve to the lowest member indices.
std::vector<CombinedGroup> combine_phase(const std::vector<PlannedRequest>& requests,
                                         const CostModel& cost, const ColumnTable& table);

struct BatchPlan {
    struct Phase {
        std::vector<CombinedGroup> groups;
    };
    std::vector<Phase> phases;
};

// Sum over request-bearing phases of
// fixed + per_query * #groups + per_100_group_values * total_values / 100.
double predict_cost(const BatchPlan& plan, const CostModel& cost);

// Test oracle: exhaustive partition search minimizing the same phase cost,
// usable for small request lists only.
std::vector<CombinedGroup> optimal_combination(const std::vector<PlannedRequest>& requests,
                                               const CostModel& cost, const ColumnTable& table);

}  // namespace zql
