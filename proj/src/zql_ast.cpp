#include "zql/zql_ast.hpp"

namespace zql {

namespace {

bool eq(const NameExprPtr& a, const NameExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->op != b->op || a->ref != b->ref || a->index != b->index || a->from != b->from ||
        a->to != b->to)
        return false;
    return eq(a->a, b->a) && eq(a->b, b->b);
}

bool eq(const DomainExprPtr& a, const DomainExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind || a->var != b->var) return false;
    if (a->kind == DomainExpr::Kind::Literal && !value_eq(a->literal, b->literal)) return false;
    if (a->set_values.size() != b->set_values.size()) return false;
    for (std::size_t i = 0; i < a->set_values.size(); ++i)
        if (!value_eq(a->set_values[i], b->set_values[i])) return false;
    return eq(a->a, b->a) && eq(a->b, b->b);
}

bool eq(const AxisCell& a, const AxisCell& b) {
    return a.kind == b.kind && a.var == b.var && a.priority == b.priority &&
           a.reorder == b.reorder && eq(a.expr, b.expr);
}

bool eq(const ZCell& a, const ZCell& b) {
    if (a.attr_var != b.attr_var || a.val_var != b.val_var || a.priority != b.priority ||
        a.reorder != b.reorder)
        return false;
    if (a.constraint.has_value() != b.constraint.has_value()) return false;
    if (a.constraint) {
        if (a.constraint->op != b.constraint->op || a.constraint->in_var != b.constraint->in_var ||
            !value_eq(a.constraint->literal, b.constraint->literal))
            return false;
    }
    return eq(a.attr, b.attr) && eq(a.val, b.val);
}

bool eq(const VizSpec& a, const VizSpec& b) {
    return a.type == b.type && a.x_binning == b.x_binning && a.y_agg == b.y_agg &&
           a.y_binning == b.y_binning;
}

bool eq(const ProcExprPtr& a, const ProcExprPtr& b);

bool eq(const PlugArg& a, const PlugArg& b) {
    if (a.kind != b.kind || a.ident != b.ident || a.number != b.number) return false;
    return eq(a.expr, b.expr);
}

bool eq(const ProcExprPtr& a, const ProcExprPtr& b) {
    if (!a || !b) return !a && !b;
    if (a->kind != b->kind || a->rop != b->rop || a->reduce_var != b->reduce_var ||
        a->arith != b->arith || a->name1 != b->name1 || a->name2 != b->name2 || a->fn != b->fn)
        return false;
    if (a->args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!eq(a->args[i], b->args[i])) return false;
    return eq(a->a, b->a) && eq(a->b, b->b);
}

bool eq(const Limiter& a, const Limiter& b) {
    return a.kind == b.kind && a.k == b.k && a.cmp == b.cmp && a.threshold == b.threshold &&
           a.percentile == b.percentile;
}

bool eq(const ProcessDecl& a, const ProcessDecl& b) {
    if (a.outputs != b.outputs || a.is_plug_form != b.is_plug_form || a.argopt != b.argopt ||
        a.opt_vars != b.opt_vars || a.plug_fn != b.plug_fn)
        return false;
    if (!eq(a.limiter, b.limiter)) return false;
    if (a.plug_args.size() != b.plug_args.size()) return false;
    for (std::size_t i = 0; i < a.plug_args.size(); ++i)
        if (!eq(a.plug_args[i], b.plug_args[i])) return false;
    return eq(a.body, b.body);
}

}  // namespace

bool operator==(const ZqlRow& a, const ZqlRow& b) {
    if (a.name.var != b.name.var || a.name.output != b.name.output) return false;
    if (!eq(a.name.derivation, b.name.derivation)) return false;
    if (!eq(a.x, b.x) || !eq(a.y, b.y) || !eq(a.viz, b.viz)) return false;
    if (a.z.size() != b.z.size() || a.processes.size() != b.processes.size()) return false;
    for (std::size_t i = 0; i < a.z.size(); ++i)
        if (!eq(a.z[i], b.z[i])) return false;
    for (std::size_t i = 0; i < a.processes.size(); ++i)
        if (!eq(a.processes[i], b.processes[i])) return false;
    return true;
}

bool operator==(const ZqlQuery& a, const ZqlQuery& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i)
        if (!(a.rows[i] == b.rows[i])) return false;
    return true;
}

}  // namespace zql
