#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "zql/column_table.hpp"
#include "zql/zql_ast.hpp"

namespace zql {

// Role a lockstep-group component plays: an attribute name iterated on the
// x axis or y axis, an attribute name in a Z cell, or a value of a fixed
// attribute in a Z cell.
enum class CompRole { XAttr, YAttr, ZAttr, ZValue };

struct GroupComponent {
    CompRole role = CompRole::ZValue;
    std::string attr;         // ZValue: owning attribute; paired comps leave it empty
    int paired_with = -1;     // ZValue paired with the ZAttr component at this index
};

// One lockstep iteration unit. Every axis variable belongs to exactly one
// group; variables of the same group always iterate together, which is what
// keeps shared iteration "in the same order" across rows.
struct VarGroup {
    enum class Source {
        Static,        // value/attr domain known from the table alone
        PairStatic,    // (attribute, value) pairs, e.g. z1.v1 <-- (*-{..}).*
        Process,       // output tuples of a process declaration
        DerivedCells,  // per-cell tuples of a derived collection (via `_`)
        Expr,          // expression over other variables (v6 ^ v7, x1 - {'a'})
    };
    Source source = Source::Static;
    std::vector<std::string> vars;  // component names; "" for anonymous components
    std::vector<GroupComponent> components;
    int def_row = -1;
    int def_col = 0;      // first column position (x=0, y=1, z_i=2+i); axis-order key
    int priority = 0;     // ^n superscript; 0 = positional default
    int proc_index = -1;  // Source::Process
    DomainExprPtr static_expr;          // Static: the domain expression
    DomainExprPtr attr_expr, val_expr;  // PairStatic
    DomainExprPtr var_expr;             // Expr
};

struct VarBinding {
    int group = -1;
    int comp = -1;
};

// Plug functions known at validation time; unknown names fail here rather
// than at execution.
struct PlugCatalog {
    std::set<std::string> scalar_fns;    // usable inside process bodies
    std::set<std::string> selector_fns;  // usable as a whole process (R)
    static PlugCatalog builtin();
};

struct ValidatedQuery {
    ZqlQuery query;
    AttributeCatalog catalog;
    std::vector<VarGroup> groups;
    std::map<std::string, VarBinding> vars;
    std::map<std::string, int> collections;  // name -> defining row
    std::vector<int> output_rows;
    // Iteration axes per row, outer-to-inner (superscripts first, then
    // column order).
    std::vector<std::vector<int>> row_axes;
    // Groups carrying a --> marker per row, column order.
    std::vector<std::vector<int>> row_reorder_groups;
    // Rows each variable appears in (definition + reuses): the recorded
    // lockstep sharing.
    std::map<std::string, std::vector<int>> var_use_rows;
    // Product of statically-declared axis sizes; nullopt when any axis size
    // needs data or process results.
    std::vector<std::optional<std::size_t>> declared_counts;
    // Group id backing each cell, -1 for fixed cells; the executor uses this
    // to map cells to iteration axes.
    struct CellGroups {
        int x = -1, y = -1;
        std::vector<int> z;
    };
    std::vector<CellGroups> row_cell_groups;

    int row_of(const std::string& collection) const {
        auto it = collections.find(collection);
        return it == collections.end() ? -1 : it->second;
    }
};

// The catalog must describe the table the query will run against; column
// kinds are taken from it for attribute checks.
struct SchemaInfo {
    std::vector<std::pair<std::string, ColumnKind>> columns;
    static SchemaInfo from_table(const ColumnTable& table);
    std::optional<ColumnKind> kind_of(const std::string& attr) const;
};

ValidatedQuery validate(const ZqlQuery& q, const AttributeCatalog& catalog,
                        const SchemaInfo& schema,
                        const PlugCatalog& plugs = PlugCatalog::builtin());

}  // namespace zql
