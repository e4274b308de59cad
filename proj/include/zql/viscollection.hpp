#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "zql/predicate.hpp"
#include "zql/validate.hpp"
#include "zql/value.hpp"
#include "zql/zql_ast.hpp"

namespace zql {

// Data behind one visualization: x/y attributes, the bindings that select
// its data subset, and the aggregated series. Star-valued bindings are
// dropped at construction; an absent binding means "no constraint".
struct UnitViz {
    std::string x_attr, y_attr;
    std::vector<std::pair<std::string, Value>> bindings;  // sorted by attribute
    Predicate extra_where;                                 // refinements beyond the bindings
    VizSpec viz;
    std::vector<std::pair<Value, double>> series;          // x ascending
    std::vector<std::tuple<double, double, double>> bins2d;  // (x bucket, y bucket, count)
    bool is_bin2d = false;
    bool materialized = false;

    void set_binding(const std::string& attr, const Value& v);
    // Canonical identity: what dedup, set operations, and visual-source
    // conversion compare.
    std::string identity() const;
};

struct CollectionAxis {
    int group = -1;                  // VarGroup id in the ValidatedQuery
    std::vector<ValueTuple> tuples;  // resolved domain, one entry per position
};

// An n-dimensional array of unit visualizations; one dimension per lockstep
// group, outer-to-inner, cells in row-major order.
struct VisCollection {
    std::vector<CollectionAxis> axes;
    std::vector<UnitViz> cells;

    std::size_t axis_size(std::size_t i) const { return axes[i].tuples.size(); }
    std::size_t cell_count() const { return cells.size(); }

    // Flat index from per-axis positions.
    std::size_t flat_index(const std::vector<std::size_t>& pos) const;
};

bool operator==(const UnitViz& a, const UnitViz& b);
bool operator==(const VisCollection& a, const VisCollection& b);

}  // namespace zql
