#pragma once

#include <random>
#include <string>
#include <vector>

#include "zql/executor.hpp"
#include "zql/vea.hpp"

namespace zql {

// Mechanically replays the algebra-to-ZQL constructions: encodes operand
// groups as singleton rows plus a concatenation, appends the operator's
// construction rows, runs the full pipeline, and compares the resulting
// collection with direct algebra evaluation as ordered bags.
class CompletenessHarness {
public:
    CompletenessHarness(const ColumnTable& table, AttributeCatalog catalog,
                        ExecStrategy strategy = ExecStrategy::NoOpt);

    struct Outcome {
        std::string op;
        bool pass = false;
        std::string detail;  // first mismatch or error
        std::string query;   // generated ZQL text
    };

    Outcome check_sel(const VisualGroup& v, const SelCond& theta) const;
    Outcome check_sort(const VisualGroup& v, bool negate = false) const;
    Outcome check_limit_k(const VisualGroup& v, int64_t k) const;
    Outcome check_limit_slice(const VisualGroup& v, int64_t from, int64_t to) const;
    Outcome check_dedup(const VisualGroup& v) const;
    Outcome check_union(const VisualGroup& v, const VisualGroup& u) const;
    Outcome check_diff(const VisualGroup& v, const VisualGroup& u) const;
    Outcome check_intersect(const VisualGroup& v, const VisualGroup& u) const;
    Outcome check_swap(const VisualGroup& v, const VisualGroup& u, const std::string& attr) const;
    Outcome check_dist(const VisualGroup& v, const VisualGroup& u,
                       const std::vector<std::string>& match_attrs) const;
    Outcome check_find(const VisualGroup& v, const VisualGroup& u) const;

    // Runs every operator on generated groups; one outcome per application.
    std::vector<Outcome> run_all(std::mt19937_64& rng, int rounds = 1) const;

    const VeaContext& context() const { return ctx_; }

    // Random operand generation (used by run_all and the acceptance suite).
    VisualGroup random_group(std::mt19937_64& rng, std::size_t size, bool materializable) const;

private:
    const ColumnTable* table_;
    AttributeCatalog catalog_;
    VeaContext ctx_;
    ExecStrategy strategy_;

    Outcome compare(const std::string& op, const std::string& query,
                    const VisualGroup& expected) const;
    VisualGroup run_query(const std::string& text) const;
};

// Small dense random relations for the completeness replay: up to three
// dimensions of up to five values each and up to two measures.
ColumnTable random_small_relation(std::mt19937_64& rng);
AttributeCatalog catalog_for_small_relation(const ColumnTable& table);

}  // namespace zql
