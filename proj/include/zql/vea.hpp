#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zql/aggregate.hpp"
#include "zql/column_table.hpp"
#include "zql/ordered_bag.hpp"
#include "zql/primitives.hpp"
#include "zql/viscollection.hpp"

namespace zql {

// One tuple of the visual universe X x Y x (values-or-star per attribute).
// Selector slots follow the relation's column order; Star places no
// constraint on that attribute.
struct VisualSource {
    std::string x, y;
    std::vector<Value> selectors;  // one per relation attribute, Star allowed

    friend bool operator==(const VisualSource& a, const VisualSource& b) {
        if (a.x != b.x || a.y != b.y || a.selectors.size() != b.selectors.size()) return false;
        for (std::size_t i = 0; i < a.selectors.size(); ++i)
            if (!value_eq(a.selectors[i], b.selectors[i])) return false;
        return true;
    }
};

struct VisualGroup {
    std::vector<VisualSource> sources;  // ordered bag

    std::size_t size() const { return sources.size(); }
};

bool operator==(const VisualGroup& a, const VisualGroup& b);

// Selection conditions: =/!= atoms over X, Y, or the attributes, combined
// with and/or. Attributes not mentioned anywhere in the condition are
// implicitly required to equal Star.
struct SelCond {
    enum class Kind { Atom, And, Or };
    Kind kind = Kind::Atom;
    // Atom
    std::string attr;  // "X", "Y", or a relation attribute
    bool negated = false;
    Value value;  // may be Star
    // And/Or
    std::shared_ptr<SelCond> a, b;

    static SelCond atom(std::string attr, bool negated, Value v) {
        SelCond c;
        c.attr = std::move(attr);
        c.negated = negated;
        c.value = std::move(v);
        return c;
    }
    static SelCond conj(SelCond x, SelCond y);
    static SelCond disj(SelCond x, SelCond y);
};

// Evaluation context: the relation plus its x/y-eligible attributes.
class VeaContext {
public:
    VeaContext(const ColumnTable& table, AttributeCatalog catalog,
               PrimitiveRegistry registry = PrimitiveRegistry::builtin(),
               std::size_t universe_limit = 2'000'000);

    const ColumnTable& table() const { return *table_; }
    const AttributeCatalog& catalog() const { return catalog_; }
    const std::vector<std::string>& attributes() const { return attrs_; }
    const PrimitiveRegistry& registry() const { return registry_; }

    // Enumerates the visual universe X x Y x prod(values U {*}); fails with
    // UniverseTooLarge beyond the configured limit.
    VisualGroup universe() const;

    // Aggregated series behind a source: SUM of y grouped by x under the
    // source's non-star selectors.
    UnitViz materialize(const VisualSource& s) const;

    // ----- the operators -----

    // Strict mode applies the draft's rule that conditions on X or Y may not
    // test for the wildcard.
    VisualGroup sel_v(const VisualGroup& v, const SelCond& cond, bool strict = false) const;

    using TrendScore = std::function<double(double)>;  // F applied to T
    VisualGroup sort_v(const VisualGroup& v, const TrendScore& f = nullptr) const;

    VisualGroup limit_v(const VisualGroup& v, int64_t k) const;
    VisualGroup limit_v(const VisualGroup& v, int64_t from, int64_t to) const;
    VisualGroup dedup_v(const VisualGroup& v) const;
    VisualGroup union_v(const VisualGroup& v, const VisualGroup& u) const;
    VisualGroup diff_v(const VisualGroup& v, const VisualGroup& u) const;
    VisualGroup intersect_v(const VisualGroup& v, const VisualGroup& u) const;

    // beta: replace attribute `attr` ("X", "Y", or a relation attribute) of
    // every source in v with the values it takes in u.
    VisualGroup swap_v(const VisualGroup& v, const VisualGroup& u, const std::string& attr) const;

    // phi: reorder v by the distance between matching sources of v and u;
    // every match-attribute combination must select exactly one source on
    // each side.
    VisualGroup dist_v(const VisualGroup& v, const VisualGroup& u,
                       const std::vector<std::string>& match_attrs,
                       const TrendScore& f = nullptr) const;

    // eta: reorder v by distance to the single reference source in u.
    VisualGroup find_v(const VisualGroup& v, const VisualGroup& u,
                       const TrendScore& f = nullptr) const;

private:
    const ColumnTable* table_;
    AttributeCatalog catalog_;
    PrimitiveRegistry registry_;
    std::size_t universe_limit_;
    std::vector<std::string> attrs_;

    int attr_slot(const std::string& attr) const;  // -1 for X/Y
    bool matches(const VisualSource& s, const SelCond& cond,
                 const std::vector<std::string>& mentioned) const;
};

}  // namespace zql
