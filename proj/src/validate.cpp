#include "zql/validate.hpp"

#include <algorithm>

#include "zql/errors.hpp"

namespace zql {

namespace {

[[noreturn]] void verr(ErrorKind kind, const std::string& msg) {
    throw ZqlError(ErrorStage::Validate, kind, msg);
}

bool expr_references_vars(const DomainExpr& e) {
    if (e.kind == DomainExpr::Kind::VarRef) return true;
    if (e.a && expr_references_vars(*e.a)) return true;
    if (e.b && expr_references_vars(*e.b)) return true;
    return false;
}

bool expr_has_placeholder(const DomainExpr& e) {
    if (e.kind == DomainExpr::Kind::Placeholder) return true;
    if (e.a && expr_has_placeholder(*e.a)) return true;
    if (e.b && expr_has_placeholder(*e.b)) return true;
    return false;
}

void collect_var_refs(const DomainExpr& e, std::vector<std::string>& out) {
    if (e.kind == DomainExpr::Kind::VarRef) out.push_back(e.var);
    if (e.a) collect_var_refs(*e.a, out);
    if (e.b) collect_var_refs(*e.b, out);
}

// Static size of a domain expression: known for literals and explicit sets,
// unknown (*) otherwise.
std::optional<std::size_t> static_size(const DomainExpr& e) {
    switch (e.kind) {
        case DomainExpr::Kind::Literal: return 1;
        case DomainExpr::Kind::Set: return e.set_values.size();
        case DomainExpr::Kind::Cross: {
            auto a = static_size(*e.a), b = static_size(*e.b);
            if (a && b) return *a * *b;
            return std::nullopt;
        }
        default: return std::nullopt;
    }
}

struct Validator {
    const ZqlQuery& q;
    const AttributeCatalog& catalog;
    const SchemaInfo& schema;
    const PlugCatalog& plugs;
    ValidatedQuery out;

    Validator(const ZqlQuery& q_, const AttributeCatalog& c, const SchemaInfo& s,
              const PlugCatalog& p)
        : q(q_), catalog(c), schema(s), plugs(p) {}

    // per-row scratch
    int derived_group = -1;  // the row's single `_` group

    void use_var(const std::string& var, int row) {
        auto& rows = out.var_use_rows[var];
        if (rows.empty() || rows.back() != row) rows.push_back(row);
    }

    VarBinding lookup(const std::string& var, int row) {
        auto it = out.vars.find(var);
        if (it == out.vars.end())
            verr(ErrorKind::UndefinedVariable, "variable '" + var + "' used before binding (row " +
                                                   std::to_string(row + 1) + ")");
        use_var(var, row);
        return it->second;
    }

    void bind_var(const std::string& var, int group, int comp, int row) {
        if (out.vars.count(var))
            verr(ErrorKind::DoubleBinding, "variable '" + var + "' bound more than once (row " +
                                               std::to_string(row + 1) + ")");
        out.vars[var] = {group, comp};
        use_var(var, row);
    }

    void check_attr_exists(const std::string& attr, int row) {
        if (!schema.kind_of(attr))
            verr(ErrorKind::UnknownAttribute,
                 "unknown attribute '" + attr + "' (row " + std::to_string(row + 1) + ")");
    }

    // Validates the attribute names appearing literally in a domain
    // expression against an eligibility list.
    void check_attr_domain(const DomainExpr& e, CompRole role, int row) {
        if (e.kind == DomainExpr::Kind::Literal) {
            const std::string attr = value_to_string(e.literal);
            // composite attrs like 'a*b' arrive via Cross nodes, not literals
            check_attr_exists(attr, row);
            if (role == CompRole::XAttr && !catalog.x_ok(attr))
                verr(ErrorKind::UnknownAttribute,
                     "attribute '" + attr + "' is not x-eligible (row " + std::to_string(row + 1) + ")");
            if (role == CompRole::YAttr && !catalog.y_ok(attr))
                verr(ErrorKind::UnknownAttribute,
                     "attribute '" + attr + "' is not y-eligible (row " + std::to_string(row + 1) + ")");
        }
        if (e.kind == DomainExpr::Kind::Set)
            for (const auto& v : e.set_values) {
                DomainExpr lit;
                lit.kind = DomainExpr::Kind::Literal;
                lit.literal = v;
                check_attr_domain(lit, role, row);
            }
        if (e.a) check_attr_domain(*e.a, role, row);
        if (e.b) check_attr_domain(*e.b, role, row);
    }

    int new_group(VarGroup g) {
        out.groups.push_back(std::move(g));
        return static_cast<int>(out.groups.size()) - 1;
    }

    int derived_cells_group(int row, int col) {
        if (derived_group < 0) {
            VarGroup g;
            g.source = VarGroup::Source::DerivedCells;
            g.def_row = row;
            g.def_col = col;
            derived_group = new_group(g);
        }
        return derived_group;
    }

    void note_axis(std::vector<int>& axes, int group) {
        if (std::find(axes.begin(), axes.end(), group) == axes.end()) axes.push_back(group);
    }

    void apply_cell_priority(int group, int priority) {
        if (priority > 0 && out.groups[group].priority == 0) out.groups[group].priority = priority;
    }

    // ----- axis (X/Y) cells -----

    int visit_axis_cell(const AxisCell& cell, CompRole role, int row, int col, bool derived,
                        std::vector<int>& axes, std::vector<int>& reorders) {
        if (cell.empty()) {
            if (!derived)
                verr(ErrorKind::XYOnDerivedRow,
                     std::string(role == CompRole::XAttr ? "X" : "Y") +
                         " column is required on non-derived rows (row " + std::to_string(row + 1) +
                         ")");
            return -1;
        }
        if (cell.kind == AxisCell::Kind::Bind) {
            if (cell.expr->kind == DomainExpr::Kind::Placeholder) {
                if (!derived)
                    verr(ErrorKind::XYOnDerivedRow,
                         "'_' binds are only valid on derived rows (row " + std::to_string(row + 1) +
                             ")");
                const int g = derived_cells_group(row, col);
                out.groups[g].vars.push_back(cell.var);
                out.groups[g].components.push_back({role, "", -1});
                bind_var(cell.var, g, static_cast<int>(out.groups[g].components.size()) - 1, row);
                note_axis(axes, g);
                return g;
            } else if (expr_references_vars(*cell.expr)) {
                std::vector<std::string> refs;
                collect_var_refs(*cell.expr, refs);
                VarGroup g;
                g.source = VarGroup::Source::Expr;
                g.def_row = row;
                g.def_col = col;
                g.var_expr = cell.expr;
                // the component role follows the first referenced variable
                const VarBinding src = lookup(refs.front(), row);
                GroupComponent comp = out.groups[src.group].components[src.comp];
                if (comp.role != role)
                    verr(ErrorKind::UnknownAttribute,
                         "variable '" + refs.front() + "' cannot be used in this column (row " +
                             std::to_string(row + 1) + ")");
                for (std::size_t i = 1; i < refs.size(); ++i) lookup(refs[i], row);
                g.vars.push_back(cell.var);
                g.components.push_back(comp);
                const int gi = new_group(std::move(g));
                bind_var(cell.var, gi, 0, row);
                note_axis(axes, gi);
                return gi;
            } else {
                if (derived)
                    verr(ErrorKind::XYOnDerivedRow,
                         "derived rows may not introduce fresh X/Y domains (row " +
                             std::to_string(row + 1) + ")");
                check_attr_domain(*cell.expr, role, row);
                VarGroup g;
                g.source = VarGroup::Source::Static;
                g.def_row = row;
                g.def_col = col;
                g.static_expr = cell.expr;
                g.vars.push_back(cell.var);
                g.components.push_back({role, "", -1});
                const int gi = new_group(std::move(g));
                bind_var(cell.var, gi, 0, row);
                note_axis(axes, gi);
                return gi;
            }
        } else {
            // expression cell: reuse or anonymous static collection
            if (cell.expr->kind == DomainExpr::Kind::VarRef) {
                const VarBinding b = lookup(cell.expr->var, row);
                if (out.groups[b.group].components[b.comp].role != role)
                    verr(ErrorKind::UnknownAttribute,
                         "variable '" + cell.expr->var + "' cannot supply this axis (row " +
                             std::to_string(row + 1) + ")");
                note_axis(axes, b.group);
                apply_cell_priority(b.group, cell.priority);
                if (cell.reorder) note_axis(reorders, b.group);
                return b.group;
            } else if (expr_references_vars(*cell.expr)) {
                std::vector<std::string> refs;
                collect_var_refs(*cell.expr, refs);
                VarGroup g;
                g.source = VarGroup::Source::Expr;
                g.def_row = row;
                g.def_col = col;
                g.var_expr = cell.expr;
                const VarBinding src = lookup(refs.front(), row);
                g.components.push_back(out.groups[src.group].components[src.comp]);
                for (std::size_t i = 1; i < refs.size(); ++i) lookup(refs[i], row);
                g.vars.push_back("");
                const int gi = new_group(std::move(g));
                note_axis(axes, gi);
                return gi;
            } else {
                if (derived)
                    verr(ErrorKind::XYOnDerivedRow,
                         "derived rows may not introduce fresh X/Y domains (row " +
                             std::to_string(row + 1) + ")");
                check_attr_domain(*cell.expr, role, row);
                VarGroup g;
                g.source = VarGroup::Source::Static;
                g.def_row = row;
                g.def_col = col;
                g.static_expr = cell.expr;
                g.vars.push_back("");
                g.components.push_back({role, "", -1});
                const int gi = new_group(std::move(g));
                note_axis(axes, gi);
                apply_cell_priority(gi, cell.priority);
                return gi;
            }
        }
    }

    // ----- Z cells -----

    int visit_z_cell(const ZCell& cell, int row, int zi, bool derived, std::vector<int>& axes,
                     std::vector<int>& reorders) {
        if (cell.empty()) return -1;
        const int col = 2 + zi;

        // attribute literal, when present and literal
        std::optional<std::string> attr_lit;
        if (cell.attr && cell.attr->kind == DomainExpr::Kind::Literal) {
            attr_lit = value_to_string(cell.attr->literal);
            check_attr_exists(*attr_lit, row);
        }

        if (cell.constraint) {
            if (!attr_lit)
                verr(ErrorKind::UnknownAttribute,
                     "predicate constraints need a literal attribute (row " +
                         std::to_string(row + 1) + ")");
            if (cell.constraint->references_var()) {
                const VarBinding b = lookup(cell.constraint->in_var, row);
                if (out.groups[b.group].components[b.comp].role != CompRole::ZValue)
                    verr(ErrorKind::UnknownAttribute,
                         "[? IN " + cell.constraint->in_var + "] needs a value variable (row " +
                             std::to_string(row + 1) + ")");
            }
            return -1;
        }

        // both-part binder
        if (!cell.attr_var.empty()) {
            if (!cell.attr || !cell.val)
                verr(ErrorKind::UndefinedVariable, "pair binder needs attribute and value parts");
            if (expr_has_placeholder(*cell.attr) || expr_has_placeholder(*cell.val))
                verr(ErrorKind::NotSupported, "pair binds over derived collections");
            VarGroup g;
            g.source = VarGroup::Source::PairStatic;
            g.def_row = row;
            g.def_col = col;
            g.attr_expr = cell.attr;
            g.val_expr = cell.val;
            check_attr_domain(*cell.attr, CompRole::ZAttr, row);
            g.vars = {cell.attr_var, cell.val_var};
            g.components.push_back({CompRole::ZAttr, "", -1});
            g.components.push_back({CompRole::ZValue, "", 0});
            const int gi = new_group(std::move(g));
            bind_var(cell.attr_var, gi, 0, row);
            bind_var(cell.val_var, gi, 1, row);
            note_axis(axes, gi);
            apply_cell_priority(gi, cell.priority);
            return gi;
        }

        // value binder
        if (!cell.val_var.empty()) {
            if (cell.val && cell.val->kind == DomainExpr::Kind::Placeholder) {
                if (!derived)
                    verr(ErrorKind::XYOnDerivedRow,
                         "'_' binds are only valid on derived rows (row " + std::to_string(row + 1) +
                             ")");
                if (!attr_lit)
                    verr(ErrorKind::UnknownAttribute,
                         "derived value binds need a literal attribute (row " +
                             std::to_string(row + 1) + ")");
                const int g = derived_cells_group(row, col);
                out.groups[g].vars.push_back(cell.val_var);
                out.groups[g].components.push_back({CompRole::ZValue, *attr_lit, -1});
                bind_var(cell.val_var, g, static_cast<int>(out.groups[g].components.size()) - 1, row);
                note_axis(axes, g);
                return g;
            }
            if (cell.val && expr_references_vars(*cell.val)) {
                std::vector<std::string> refs;
                collect_var_refs(*cell.val, refs);
                VarGroup g;
                g.source = VarGroup::Source::Expr;
                g.def_row = row;
                g.def_col = col;
                g.var_expr = cell.val;
                const VarBinding src = lookup(refs.front(), row);
                GroupComponent comp = out.groups[src.group].components[src.comp];
                if (comp.role != CompRole::ZValue)
                    verr(ErrorKind::UnknownAttribute,
                         "variable '" + refs.front() + "' cannot supply z values (row " +
                             std::to_string(row + 1) + ")");
                if (attr_lit) comp.attr = *attr_lit;
                for (std::size_t i = 1; i < refs.size(); ++i) lookup(refs[i], row);
                g.vars.push_back(cell.val_var);
                g.components.push_back(comp);
                const int gi = new_group(std::move(g));
                bind_var(cell.val_var, gi, 0, row);
                note_axis(axes, gi);
                apply_cell_priority(gi, cell.priority);
                return gi;
            }
            if (!attr_lit)
                verr(ErrorKind::UnknownAttribute,
                     "value binds need a literal attribute (row " + std::to_string(row + 1) + ")");
            VarGroup g;
            g.source = VarGroup::Source::Static;
            g.def_row = row;
            g.def_col = col;
            g.static_expr = cell.val;
            g.vars.push_back(cell.val_var);
            g.components.push_back({CompRole::ZValue, *attr_lit, -1});
            const int gi = new_group(std::move(g));
            bind_var(cell.val_var, gi, 0, row);
            note_axis(axes, gi);
            apply_cell_priority(gi, cell.priority);
            return gi;
        }

        // no binder
        if (cell.attr && cell.val) {
            if (attr_lit && cell.val->kind == DomainExpr::Kind::Literal) return -1;  // fixed binding
            if (attr_lit && cell.val->kind == DomainExpr::Kind::VarRef) {
                const VarBinding b = lookup(cell.val->var, row);
                if (out.groups[b.group].components[b.comp].role != CompRole::ZValue)
                    verr(ErrorKind::UnknownAttribute,
                         "variable '" + cell.val->var + "' cannot supply z values (row " +
                             std::to_string(row + 1) + ")");
                note_axis(axes, b.group);
                apply_cell_priority(b.group, cell.priority);
                if (cell.reorder) note_axis(reorders, b.group);
                return b.group;
            }
            if (attr_lit) {
                // anonymous value collection over a fixed attribute
                VarGroup g;
                g.source = VarGroup::Source::Static;
                g.def_row = row;
                g.def_col = col;
                g.static_expr = cell.val;
                g.vars.push_back("");
                g.components.push_back({CompRole::ZValue, *attr_lit, -1});
                const int gi = new_group(std::move(g));
                note_axis(axes, gi);
                apply_cell_priority(gi, cell.priority);
                return gi;
            }
            // anonymous pair collection
            VarGroup g;
            g.source = VarGroup::Source::PairStatic;
            g.def_row = row;
            g.def_col = col;
            g.attr_expr = cell.attr;
            g.val_expr = cell.val;
            check_attr_domain(*cell.attr, CompRole::ZAttr, row);
            g.vars = {"", ""};
            g.components.push_back({CompRole::ZAttr, "", -1});
            g.components.push_back({CompRole::ZValue, "", 0});
            const int gi = new_group(std::move(g));
            note_axis(axes, gi);
            return gi;
        }
        if (cell.val) {
            // bare value expression: reuse or expression over variables
            if (cell.val->kind == DomainExpr::Kind::VarRef) {
                const VarBinding b = lookup(cell.val->var, row);
                if (out.groups[b.group].components[b.comp].role != CompRole::ZValue)
                    verr(ErrorKind::UnknownAttribute,
                         "variable '" + cell.val->var + "' cannot supply z values (row " +
                             std::to_string(row + 1) + ")");
                note_axis(axes, b.group);
                apply_cell_priority(b.group, cell.priority);
                if (cell.reorder) note_axis(reorders, b.group);
                return b.group;
            }
            if (expr_references_vars(*cell.val)) {
                std::vector<std::string> refs;
                collect_var_refs(*cell.val, refs);
                VarGroup g;
                g.source = VarGroup::Source::Expr;
                g.def_row = row;
                g.def_col = col;
                g.var_expr = cell.val;
                const VarBinding src = lookup(refs.front(), row);
                GroupComponent comp = out.groups[src.group].components[src.comp];
                if (comp.role != CompRole::ZValue)
                    verr(ErrorKind::UnknownAttribute,
                         "variable '" + refs.front() + "' cannot supply z values (row " +
                             std::to_string(row + 1) + ")");
                for (std::size_t i = 1; i < refs.size(); ++i) lookup(refs[i], row);
                g.vars.push_back("");
                g.components.push_back(comp);
                const int gi = new_group(std::move(g));
                note_axis(axes, gi);
                return gi;
            }
            verr(ErrorKind::UnknownAttribute,
                 "z cell needs an attribute (row " + std::to_string(row + 1) + ")");
        }
        return -1;
    }

    // ----- processes -----

    void check_body(const ProcExpr& e, const std::set<std::string>& iter_vars, int row,
                    std::set<std::string>* reduce_seen) {
        switch (e.kind) {
            case ProcExpr::Kind::Reduce: {
                const VarBinding b = lookup(e.reduce_var, row);
                const VarGroup& g = out.groups[b.group];
                if (g.components.size() != 1)
                    verr(ErrorKind::ProcessArityMismatch,
                         "reduce variable '" + e.reduce_var + "' must cover its whole group (row " +
                             std::to_string(row + 1) + ")");
                reduce_seen->insert(e.reduce_var);
                check_body(*e.a, iter_vars, row, reduce_seen);
                break;
            }
            case ProcExpr::Kind::Arith:
                check_body(*e.a, iter_vars, row, reduce_seen);
                check_body(*e.b, iter_vars, row, reduce_seen);
                break;
            case ProcExpr::Kind::T:
                if (!out.collections.count(e.name1))
                    verr(ErrorKind::UndefinedVariable,
                         "unknown collection '" + e.name1 + "' (row " + std::to_string(row + 1) + ")");
                break;
            case ProcExpr::Kind::D:
                for (const auto& n : {e.name1, e.name2})
                    if (!out.collections.count(n))
                        verr(ErrorKind::UndefinedVariable,
                             "unknown collection '" + n + "' (row " + std::to_string(row + 1) + ")");
                break;
            case ProcExpr::Kind::Plug: {
                if (!plugs.scalar_fns.count(e.fn))
                    verr(ErrorKind::UnknownPrimitive,
                         "unknown function '" + e.fn + "' (row " + std::to_string(row + 1) + ")");
                for (const auto& a : e.args) {
                    if (a.kind == PlugArg::Kind::Expr)
                        check_body(*a.expr, iter_vars, row, reduce_seen);
                    else if (a.kind == PlugArg::Kind::Ident && !out.collections.count(a.ident))
                        lookup(a.ident, row);
                }
                break;
            }
        }
    }

    void visit_process(const ProcessDecl& p, int row, int index) {
        if (p.is_plug_form) {
            if (!plugs.selector_fns.count(p.plug_fn))
                verr(ErrorKind::UnknownPrimitive,
                     "unknown selector function '" + p.plug_fn + "' (row " + std::to_string(row + 1) +
                         ")");
            // R(k, var, collection): the output inherits the var's component
            if (p.plug_fn == "R") {
                if (p.plug_args.size() != 3 || p.plug_args[0].kind != PlugArg::Kind::Number ||
                    p.plug_args[1].kind != PlugArg::Kind::Ident ||
                    p.plug_args[2].kind != PlugArg::Kind::Ident)
                    verr(ErrorKind::ProcessArityMismatch,
                         "R takes (k, variable, collection) (row " + std::to_string(row + 1) + ")");
                if (p.outputs.size() != 1)
                    verr(ErrorKind::ProcessArityMismatch,
                         "R produces one output variable (row " + std::to_string(row + 1) + ")");
                const VarBinding src = lookup(p.plug_args[1].ident, row);
                if (!out.collections.count(p.plug_args[2].ident))
                    verr(ErrorKind::UndefinedVariable,
                         "unknown collection '" + p.plug_args[2].ident + "' (row " +
                             std::to_string(row + 1) + ")");
                VarGroup g;
                g.source = VarGroup::Source::Process;
                g.def_row = row;
                g.def_col = 1000;
                g.proc_index = index;
                g.vars = p.outputs;
                g.components.push_back(out.groups[src.group].components[src.comp]);
                const int gi = new_group(std::move(g));
                bind_var(p.outputs[0], gi, 0, row);
            }
            return;
        }

        // optimization form: opt vars must exist and cover whole groups
        std::set<int> opt_groups;
        std::vector<GroupComponent> inherited;
        for (const auto& v : p.opt_vars) {
            const VarBinding b = lookup(v, row);
            opt_groups.insert(b.group);
            inherited.push_back(out.groups[b.group].components[b.comp]);
        }
        for (int gi : opt_groups) {
            const VarGroup& g = out.groups[gi];
            for (std::size_t c = 0; c < g.components.size(); ++c) {
                const std::string& var = g.vars[c];
                if (var.empty() ||
                    std::find(p.opt_vars.begin(), p.opt_vars.end(), var) == p.opt_vars.end())
                    verr(ErrorKind::ProcessArityMismatch,
                         "process must optimize over whole lockstep groups (row " +
                             std::to_string(row + 1) + ")");
            }
        }
        if (p.outputs.size() != p.opt_vars.size())
            verr(ErrorKind::ProcessArityMismatch,
                 "process lists " + std::to_string(p.outputs.size()) + " outputs for " +
                     std::to_string(p.opt_vars.size()) + " optimized variables (row " +
                     std::to_string(row + 1) + ")");

        if (p.limiter.kind == Limiter::Kind::K && p.limiter.k && *p.limiter.k < 0)
            verr(ErrorKind::ProcessArityMismatch, "k must be non-negative");
        if (p.limiter.kind == Limiter::Kind::Percentile &&
            (p.limiter.percentile <= 0 || p.limiter.percentile > 100))
            verr(ErrorKind::ProcessArityMismatch, "percentile must be in (0, 100]");

        std::set<std::string> iter(p.opt_vars.begin(), p.opt_vars.end());
        std::set<std::string> reduce_seen;
        check_body(*p.body, iter, row, &reduce_seen);

        VarGroup g;
        g.source = VarGroup::Source::Process;
        g.def_row = row;
        g.def_col = 1000;
        g.proc_index = index;
        g.vars = p.outputs;
        g.components = inherited;
        const int gi = new_group(std::move(g));
        for (std::size_t i = 0; i < p.outputs.size(); ++i)
            bind_var(p.outputs[i], gi, static_cast<int>(i), row);
    }

    // ----- rows -----

    void run() {
        out.query = q;
        out.catalog = catalog;
        out.row_axes.resize(q.rows.size());
        out.row_reorder_groups.resize(q.rows.size());
        out.declared_counts.resize(q.rows.size());
        out.row_cell_groups.resize(q.rows.size());

        for (int r = 0; r < static_cast<int>(q.rows.size()); ++r) {
            const ZqlRow& row = q.rows[r];
            derived_group = -1;
            const bool derived = row.name.derivation != nullptr;

            if (out.collections.count(row.name.var))
                verr(ErrorKind::DoubleBinding,
                     "collection '" + row.name.var + "' defined more than once");
            if (derived) check_name_expr(*row.name.derivation, r);

            auto& axes = out.row_axes[r];
            auto& reorders = out.row_reorder_groups[r];
            auto& cg = out.row_cell_groups[r];
            cg.x = visit_axis_cell(row.x, CompRole::XAttr, r, 0, derived, axes, reorders);
            cg.y = visit_axis_cell(row.y, CompRole::YAttr, r, 1, derived, axes, reorders);
            for (std::size_t zi = 0; zi < row.z.size(); ++zi)
                cg.z.push_back(
                    visit_z_cell(row.z[zi], r, static_cast<int>(zi), derived, axes, reorders));

            if (!reorders.empty() && !row_has_order_derivation(row))
                verr(ErrorKind::NotSupported,
                     "--> markers are only legal in rows derived via .order (row " +
                         std::to_string(r + 1) + ")");
            if (row_has_order_derivation(row) && reorders.empty())
                verr(ErrorKind::NotSupported,
                     ".order rows need --> markers naming the ordering variables (row " +
                         std::to_string(r + 1) + ")");

            check_viz(row.viz, r);

            out.collections[row.name.var] = r;
            if (row.name.output) out.output_rows.push_back(r);

            for (std::size_t pi = 0; pi < row.processes.size(); ++pi)
                visit_process(row.processes[pi], r, static_cast<int>(pi));

            // axis order: superscripted groups first by superscript, then
            // positional order
            std::stable_sort(axes.begin(), axes.end(), [&](int a, int b) {
                const VarGroup& ga = out.groups[a];
                const VarGroup& gb = out.groups[b];
                const int pa = ga.priority > 0 ? ga.priority : 1000 + ga.def_col;
                const int pb = gb.priority > 0 ? gb.priority : 1000 + gb.def_col;
                if (pa != pb) return pa < pb;
                return ga.def_col < gb.def_col;
            });

            // statically-declared visualization count
            std::optional<std::size_t> count = 1;
            for (int gi : axes) {
                const VarGroup& g = out.groups[gi];
                std::optional<std::size_t> sz;
                if (g.source == VarGroup::Source::Static && g.static_expr)
                    sz = static_size(*g.static_expr);
                if (!sz) { count = std::nullopt; break; }
                *count *= *sz;
            }
            out.declared_counts[r] = count;
        }

        if (out.output_rows.empty())
            verr(ErrorKind::NotSupported, "query has no output row (mark one with *)");
    }

    bool row_has_order_derivation(const ZqlRow& row) const {
        const NameExpr* e = row.name.derivation.get();
        while (e) {
            if (e->op == NameExpr::Op::Order) return true;
            e = e->a.get();
        }
        return false;
    }

    void check_name_expr(const NameExpr& e, int row) {
        if (e.op == NameExpr::Op::Ref) {
            if (!out.collections.count(e.ref))
                verr(ErrorKind::UndefinedVariable,
                     "unknown collection '" + e.ref + "' (row " + std::to_string(row + 1) + ")");
            return;
        }
        if (e.a) check_name_expr(*e.a, row);
        if (e.b) check_name_expr(*e.b, row);
        if (e.op == NameExpr::Op::Index && e.index < 1)
            verr(ErrorKind::IndexOutOfRange, "collection indexing is 1-based");
        if (e.op == NameExpr::Op::Slice) {
            if ((e.from && *e.from < 1) || (e.to && *e.to < 1))
                verr(ErrorKind::IndexOutOfRange, "collection slices are 1-based");
        }
    }

    void check_viz(const VizSpec& viz, int row) {
        if (viz.type == VizSpec::Type::Bin2d) {
            if (!viz.x_binning || !viz.y_binning)
                verr(ErrorKind::BinningOnCategorical,
                     "bin2d requires binning on both axes (row " + std::to_string(row + 1) + ")");
            if (viz.y_agg)
                verr(ErrorKind::NotSupported,
                     "bin2d bins the y axis instead of aggregating it (row " +
                         std::to_string(row + 1) + ")");
        } else if (viz.y_binning) {
            verr(ErrorKind::NotSupported,
                 "y binning is only available with bin2d (row " + std::to_string(row + 1) + ")");
        }
    }
};

}  // namespace

PlugCatalog PlugCatalog::builtin() {
    PlugCatalog c;
    c.scalar_fns = {"neg", "abs"};
    c.selector_fns = {"R"};
    return c;
}

SchemaInfo SchemaInfo::from_table(const ColumnTable& table) {
    SchemaInfo s;
    for (const auto& c : table.columns()) s.columns.emplace_back(c.name, c.kind);
    return s;
}

std::optional<ColumnKind> SchemaInfo::kind_of(const std::string& attr) const {
    for (const auto& [name, kind] : columns)
        if (name == attr) return kind;
    return std::nullopt;
}

ValidatedQuery validate(const ZqlQuery& q, const AttributeCatalog& catalog,
                        const SchemaInfo& schema, const PlugCatalog& plugs) {
    Validator v(q, catalog, schema, plugs);
    v.run();
    return std::move(v.out);
}

}  // namespace zql
