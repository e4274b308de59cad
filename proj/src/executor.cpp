#include "zql/executor.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <future>
#include <set>
#include <sstream>

#include "zql/errors.hpp"
#include "zql/parser.hpp"
#include "zql/sql_emit.hpp"

namespace zql {

std::string ExecutionTrace::to_csv(const CostModel& cost) const {
    std::ostringstream os;
    os << "phase,node,requests,group_values,predicted_ms\n";
    std::map<int, std::pair<std::size_t, std::size_t>> by_phase;  // phase -> (#groups, values)
    for (const auto& r : requests) {
        auto& p = by_phase[r.phase];
        p.first += 1;
        p.second += r.est_group_values;
    }
    auto phase_ms = [&](int phase) {
        auto it = by_phase.find(phase);
        if (it == by_phase.end()) return 0.0;
        return cost.fixed_ms + cost.per_query_ms * static_cast<double>(it->second.first) +
               cost.per_100_group_values_ms * static_cast<double>(it->second.second) / 100.0;
    };
    for (const auto& r : requests) {
        os << r.phase << ",";
        for (std::size_t i = 0; i < r.nodes.size(); ++i) os << (i ? "+" : "") << r.nodes[i];
        os << ",1," << r.group_values << "," << phase_ms(r.phase) << "\n";
    }
    for (const auto& c : completions) os << c.phase << "," << c.node << ",0,0,0\n";
    return os.str();
}

bool operator==(const ResultSet& a, const ResultSet& b) {
    if (a.outputs.size() != b.outputs.size()) return false;
    for (std::size_t i = 0; i < a.outputs.size(); ++i) {
        if (a.outputs[i].first != b.outputs[i].first) return false;
        if (!(a.outputs[i].second == b.outputs[i].second)) return false;
    }
    return true;
}

namespace {

[[noreturn]] void xerr(ErrorKind kind, const std::string& msg) {
    throw ZqlError(ErrorStage::Execute, kind, msg);
}

Value coerce_to_column(const ColumnTable& table, const std::string& attr, const Value& v) {
    if (!table.has_column(attr) || is_star(v)) return v;
    switch (table.column(attr).kind) {
        case ColumnKind::Ordinal:
            if (const auto* s = std::get_if<std::string>(&v)) {
                try {
                    return Value{static_cast<int64_t>(std::stoll(*s))};
                } catch (...) {
                    return v;
                }
            }
            if (const auto* d = std::get_if<double>(&v)) return Value{static_cast<int64_t>(*d)};
            return v;
        case ColumnKind::Measure:
            if (const auto* i = std::get_if<int64_t>(&v)) return Value{static_cast<double>(*i)};
            return v;
        case ColumnKind::Categorical:
            return v;
    }
    return v;
}

std::vector<Value> dedup_values(const std::vector<Value>& in) {
    std::vector<Value> out;
    for (const auto& v : in) {
        bool seen = false;
        for (const auto& u : out)
            if (value_eq(u, v)) {
                seen = true;
                break;
            }
        if (!seen) out.push_back(v);
    }
    return out;
}

// How one component of an axis group is used by a row.
struct CompUse {
    int comp = -1;
    enum class Use { X, Y, ZValue, ZPairAttr } use = Use::ZValue;
    int pair_val_comp = -1;  // ZPairAttr: the value component it names
};

struct AxisShape {
    int group = -1;
    std::vector<CompUse> uses;
    enum class Class { Hom, YAxis, Het } cls = Class::Het;
    std::string hom_attr;  // Class::Hom
    int hom_comp = -1;
    int y_comp = -1;  // Class::YAxis
};

struct RowShape {
    std::vector<AxisShape> axes;  // in row_axes order
    std::vector<std::pair<std::string, Value>> fixed_bindings;
    Predicate fixed_where;
    struct InConstraint {
        std::string attr;
        int group = -1, comp = -1;
    };
    std::vector<InConstraint> in_constraints;
    VizSpec viz;  // resolved (Auto -> bar + SUM)
    AggFn agg = AggFn::Sum;
};

// One backend request of a c-node plus everything needed to slice cells out
// of its result.
struct ReqPlan {
    AggregateRequest request;
    GroupSig sig;
    std::size_t est_card = 0;
    // positions of the het axes (axis index -> position) this request covers
    std::vector<std::pair<int, std::size_t>> het_positions;
    std::vector<std::string> promoted;  // attrs appended to dims for IN promotion
    std::vector<std::string> x_parts;   // composite-x trailing attrs
    bool has_ybucket = false;
    detail::AggTable raw;
    bool executed = false;
};

struct NodeState {
    bool fetched = false;
    bool done = false;
    bool speculative = false;  // fetched with superset domains
    std::vector<ReqPlan> reqs;
    std::vector<std::vector<ValueTuple>> fetch_domains;  // per axis, as fetched
    RowShape shape;  // as classified at fetch time
};

struct Runtime {
    const ValidatedQuery& vq;
    const ColumnTable& table;
    const Backend backend;
    const PrimitiveRegistry& registry;
    const EngineOptions& options;
    const ExecStrategy strategy;
    const PlanDag dag;

    std::vector<std::optional<std::vector<ValueTuple>>> domains;  // per group
    std::map<std::string, VisCollection> collections;
    std::vector<NodeState> nodes;
    ExecutionTrace trace;
    int phase = 0;

    Runtime(const ValidatedQuery& v, const ColumnTable& t, const PrimitiveRegistry& reg,
            const EngineOptions& opt, ExecStrategy strat)
        : vq(v),
          table(t),
          backend(t),
          registry(reg),
          options(opt),
          strategy(strat),
          dag(build_dag(v)) {
        domains.resize(vq.groups.size());
        nodes.resize(dag.nodes.size());
    }

    // ----- domain resolution -----

    const Column* column_of(const std::string& attr) const {
        return table.has_column(attr) ? &table.column(attr) : nullptr;
    }

    std::vector<Value> eval_domain_values(const DomainExpr& e, CompRole role,
                                          const std::string& attr) {
        switch (e.kind) {
            case DomainExpr::Kind::Literal:
                return {role == CompRole::ZValue ? coerce_to_column(table, attr, e.literal)
                                                 : e.literal};
            case DomainExpr::Kind::Set: {
                std::vector<Value> vals;
                for (const auto& v : e.set_values)
                    vals.push_back(role == CompRole::ZValue ? coerce_to_column(table, attr, v) : v);
                return dedup_values(vals);
            }
            case DomainExpr::Kind::All: {
                std::vector<Value> vals;
                if (role == CompRole::XAttr) {
                    for (const auto& a : vq.catalog.x_eligible) vals.push_back(Value{a});
                } else if (role == CompRole::YAttr) {
                    for (const auto& a : vq.catalog.y_eligible) vals.push_back(Value{a});
                } else if (role == CompRole::ZAttr) {
                    for (const auto& c : table.columns())
                        if (c.is_dimension()) vals.push_back(Value{c.name});
                } else {
                    if (!table.has_column(attr))
                        xerr(ErrorKind::UnknownAttribute, "unknown attribute '" + attr + "'");
                    vals = table.distinct_values(attr);
                }
                return vals;
            }
            case DomainExpr::Kind::Diff: {
                auto a = eval_domain_values(*e.a, role, attr);
                auto b = eval_domain_values(*e.b, role, attr);
                std::vector<Value> out;
                for (const auto& v : a) {
                    bool drop = false;
                    for (const auto& u : b)
                        if (value_eq(u, v)) {
                            drop = true;
                            break;
                        }
                    if (!drop) out.push_back(v);
                }
                return out;
            }
            case DomainExpr::Kind::Union: {
                auto a = eval_domain_values(*e.a, role, attr);
                auto b = eval_domain_values(*e.b, role, attr);
                a.insert(a.end(), b.begin(), b.end());
                return dedup_values(a);
            }
            case DomainExpr::Kind::Intersect: {
                auto a = eval_domain_values(*e.a, role, attr);
                auto b = eval_domain_values(*e.b, role, attr);
                std::vector<Value> out;
                for (const auto& v : a)
                    for (const auto& u : b)
                        if (value_eq(u, v)) {
                            out.push_back(v);
                            break;
                        }
                return dedup_values(out);
            }
            case DomainExpr::Kind::Cross: {
                auto a = eval_domain_values(*e.a, role, attr);
                auto b = eval_domain_values(*e.b, role, attr);
                std::vector<Value> out;
                for (const auto& va : a)
                    for (const auto& vb : b)
                        out.push_back(Value{value_to_string(va) + "*" + value_to_string(vb)});
                return out;
            }
            case DomainExpr::Kind::Plus:
            case DomainExpr::Kind::Div:
                throw ZqlError(ErrorStage::Plan, ErrorKind::NotSupported,
                               "table algebra + and / parse but cannot be executed");
            case DomainExpr::Kind::VarRef: {
                const VarBinding b = vq.vars.at(e.var);
                const auto& dom = resolved_domain(b.group);
                std::vector<Value> vals;
                for (const auto& t : dom) vals.push_back(t[b.comp]);
                return dedup_values(vals);
            }
            case DomainExpr::Kind::Placeholder:
                xerr(ErrorKind::Internal, "placeholder domain cannot be evaluated directly");
        }
        return {};
    }

    const std::vector<ValueTuple>& resolved_domain(int group) {
        if (!domains[group]) resolve_group(group);
        if (!domains[group])
            xerr(ErrorKind::Internal,
                 "domain for group " + std::to_string(group) + " unavailable");
        return *domains[group];
    }

    bool group_resolved(int group) {
        if (domains[group]) return true;
        const VarGroup& g = vq.groups[group];
        if (g.source == VarGroup::Source::Static || g.source == VarGroup::Source::PairStatic)
            return true;  // resolvable on demand
        if (g.source == VarGroup::Source::Expr) {
            std::vector<std::string> refs;
            collect_refs(*g.var_expr, refs);
            for (const auto& r : refs)
                if (!group_resolved(vq.vars.at(r).group)) return false;
            return true;
        }
        return false;
    }

    static void collect_refs(const DomainExpr& e, std::vector<std::string>& refs) {
        if (e.kind == DomainExpr::Kind::VarRef) refs.push_back(e.var);
        if (e.a) collect_refs(*e.a, refs);
        if (e.b) collect_refs(*e.b, refs);
    }

    void resolve_group(int group) {
        const VarGroup& g = vq.groups[group];
        switch (g.source) {
            case VarGroup::Source::Static: {
                const CompRole role = g.components[0].role;
                const std::string& attr = g.components[0].attr;
                auto vals = eval_domain_values(*g.static_expr, role, attr);
                std::vector<ValueTuple> dom;
                for (auto& v : vals) dom.push_back({std::move(v)});
                domains[group] = std::move(dom);
                return;
            }
            case VarGroup::Source::PairStatic: {
                auto attrs = eval_domain_values(*g.attr_expr, CompRole::ZAttr, "");
                std::vector<ValueTuple> dom;
                for (const auto& a : attrs) {
                    const std::string attr = value_to_string(a);
                    auto vals = eval_domain_values(*g.val_expr, CompRole::ZValue, attr);
                    for (auto& v : vals) dom.push_back({a, std::move(v)});
                }
                domains[group] = std::move(dom);
                return;
            }
            case VarGroup::Source::Expr: {
                const CompRole role = g.components[0].role;
                const std::string& attr = g.components[0].attr;
                auto vals = eval_domain_values(*g.var_expr, role, attr);
                std::vector<ValueTuple> dom;
                for (auto& v : vals) dom.push_back({std::move(v)});
                domains[group] = std::move(dom);
                return;
            }
            default:
                return;  // process/derived domains come from node completion
        }
    }

    // superset values of a component by provenance (speculation)
    std::optional<std::vector<Value>> provenance_values(int group, int comp) {
        const VarGroup& g = vq.groups[group];
        switch (g.source) {
            case VarGroup::Source::Static:
            case VarGroup::Source::PairStatic: {
                const auto& dom = resolved_domain(group);
                std::vector<Value> vals;
                for (const auto& t : dom) vals.push_back(t[comp]);
                return dedup_values(vals);
            }
            case VarGroup::Source::Process: {
                const ProcessDecl& decl = vq.query.rows[g.def_row].processes[g.proc_index];
                const std::string& src_var =
                    decl.is_plug_form ? decl.plug_args[1].ident : decl.opt_vars[comp];
                const VarBinding b = vq.vars.at(src_var);
                return provenance_values(b.group, b.comp);
            }
            case VarGroup::Source::Expr:
                return provenance_expr(*g.var_expr);
            case VarGroup::Source::DerivedCells:
                return std::nullopt;
        }
        return std::nullopt;
    }

    std::optional<std::vector<Value>> provenance_expr(const DomainExpr& e) {
        switch (e.kind) {
            case DomainExpr::Kind::VarRef: {
                const VarBinding b = vq.vars.at(e.var);
                return provenance_values(b.group, b.comp);
            }
            case DomainExpr::Kind::Diff:
                return provenance_expr(*e.a);  // superset: drop the subtraction
            case DomainExpr::Kind::Union:
            case DomainExpr::Kind::Intersect: {
                auto a = provenance_expr(*e.a);
                auto b = provenance_expr(*e.b);
                if (!a || !b) return std::nullopt;
                if (e.kind == DomainExpr::Kind::Intersect) return a;  // superset of ∩
                a->insert(a->end(), b->begin(), b->end());
                return dedup_values(*a);
            }
            case DomainExpr::Kind::Literal:
            case DomainExpr::Kind::Set:
                return eval_domain_values(const_cast<DomainExpr&>(e), CompRole::ZValue, "");
            default:
                return std::nullopt;
        }
    }

    // ----- row shapes -----

    RowShape row_shape(int r) {
        const ZqlRow& row = vq.query.rows[r];
        const auto& cg = vq.row_cell_groups[r];
        RowShape shape;

        std::map<int, AxisShape> by_group;
        for (int g : vq.row_axes[r]) {
            AxisShape a;
            a.group = g;
            by_group[g] = a;
        }
        auto use_comp = [&](int group, int comp, CompUse::Use use, int pair_val = -1) {
            auto it = by_group.find(group);
            if (it == by_group.end()) return;
            for (auto& u : it->second.uses)
                if (u.comp == comp) return;
            it->second.uses.push_back({comp, use, pair_val});
        };

        // x / y cells
        if (cg.x >= 0) {
            int comp = 0;
            if (row.x.kind == AxisCell::Kind::Bind) comp = vq.vars.at(row.x.var).comp;
            else if (row.x.expr && row.x.expr->kind == DomainExpr::Kind::VarRef)
                comp = vq.vars.at(row.x.expr->var).comp;
            use_comp(cg.x, comp, CompUse::Use::X);
        }
        if (cg.y >= 0) {
            int comp = 0;
            if (row.y.kind == AxisCell::Kind::Bind) comp = vq.vars.at(row.y.var).comp;
            else if (row.y.expr && row.y.expr->kind == DomainExpr::Kind::VarRef)
                comp = vq.vars.at(row.y.expr->var).comp;
            use_comp(cg.y, comp, CompUse::Use::Y);
        }

        // z cells
        for (std::size_t zi = 0; zi < row.z.size(); ++zi) {
            const ZCell& z = row.z[zi];
            if (z.empty()) continue;
            const int g = zi < cg.z.size() ? cg.z[zi] : -1;
            if (z.constraint) {
                const std::string attr = value_to_string(z.attr->literal);
                if (z.constraint->references_var()) {
                    const VarBinding b = vq.vars.at(z.constraint->in_var);
                    shape.in_constraints.push_back({attr, b.group, b.comp});
                } else {
                    PredAtom atom{attr, z.constraint->op,
                                  {coerce_to_column(table, attr, z.constraint->literal)}};
                    shape.fixed_where = shape.fixed_where.and_with(Predicate::single(atom));
                }
                continue;
            }
            if (g < 0) {
                // fixed binding: literal attribute and value
                const std::string attr = value_to_string(z.attr->literal);
                shape.fixed_bindings.emplace_back(attr,
                                                  coerce_to_column(table, attr, z.val->literal));
                continue;
            }
            const VarGroup& grp = vq.groups[g];
            if (!z.attr_var.empty()) {
                use_comp(g, vq.vars.at(z.attr_var).comp, CompUse::Use::ZPairAttr,
                         vq.vars.at(z.val_var).comp);
                use_comp(g, vq.vars.at(z.val_var).comp, CompUse::Use::ZValue);
            } else if (!z.val_var.empty()) {
                use_comp(g, vq.vars.at(z.val_var).comp, CompUse::Use::ZValue);
            } else if (z.val && z.val->kind == DomainExpr::Kind::VarRef) {
                use_comp(g, vq.vars.at(z.val->var).comp, CompUse::Use::ZValue);
            } else if (grp.source == VarGroup::Source::PairStatic) {
                use_comp(g, 0, CompUse::Use::ZPairAttr, 1);
                use_comp(g, 1, CompUse::Use::ZValue);
            } else {
                // anonymous single-component group defined by this cell
                use_comp(g, 0, CompUse::Use::ZValue);
            }
        }

        // classify axes in row_axes order
        for (int g : vq.row_axes[r]) {
            AxisShape a = by_group.at(g);
            const VarGroup& grp = vq.groups[g];
            if (a.uses.size() == 1) {
                const CompUse& u = a.uses[0];
                const GroupComponent& comp = grp.components[u.comp];
                if (u.use == CompUse::Use::Y && grp.components.size() == 1) {
                    a.cls = AxisShape::Class::YAxis;
                    a.y_comp = u.comp;
                } else if (u.use == CompUse::Use::ZValue && !comp.attr.empty()) {
                    a.cls = AxisShape::Class::Hom;
                    a.hom_attr = comp.attr;
                    a.hom_comp = u.comp;
                } else {
                    a.cls = AxisShape::Class::Het;
                }
            } else {
                a.cls = AxisShape::Class::Het;
            }
            shape.axes.push_back(std::move(a));
        }

        // resolved viz defaults; cells carry the fully resolved spec so
        // identity comparisons ignore whether defaults were spelled out
        shape.viz = row.viz;
        if (shape.viz.type == VizSpec::Type::Auto) shape.viz.type = VizSpec::Type::Bar;
        shape.agg = shape.viz.y_agg.value_or(AggFn::Sum);
        if (shape.viz.type != VizSpec::Type::Bin2d && !shape.viz.y_agg)
            shape.viz.y_agg = shape.agg;
        std::sort(shape.fixed_bindings.begin(), shape.fixed_bindings.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        return shape;
    }

    // ----- request building -----

    bool axis_domain_full(const std::string& attr, const std::vector<ValueTuple>& dom, int comp) {
        const auto& all = table.distinct_values(attr);
        if (dom.size() != all.size()) return false;
        for (std::size_t i = 0; i < dom.size(); ++i)
            if (!value_eq(dom[i][comp], all[i])) return false;
        return true;
    }

    // Builds the fetch plan for a regular c-node. With `speculate`, pending
    // hom/y-axis domains and IN constraints fall back to provenance
    // supersets. Returns false when some needed domain is not available.
    bool build_regular_fetch(int node, bool speculate) {
        NodeState& st = nodes[node];
        const int r = dag.nodes[node].row;
        RowShape shape = row_shape(r);
        const ZqlRow& row = vq.query.rows[r];

        // resolve per-axis fetch domains
        std::vector<std::vector<ValueTuple>> fetch_domains(shape.axes.size());
        bool speculative_any = false;
        for (std::size_t ai = 0; ai < shape.axes.size(); ++ai) {
            AxisShape& axis = shape.axes[ai];
            if (group_resolved(axis.group)) {
                fetch_domains[ai] = resolved_domain(axis.group);
                continue;
            }
            if (!speculate) return false;
            if (axis.cls == AxisShape::Class::Het) return false;
            const int comp = axis.cls == AxisShape::Class::Hom ? axis.hom_comp : axis.y_comp;
            auto sup = provenance_values(axis.group, comp);
            if (!sup) return false;
            std::vector<ValueTuple> dom;
            for (auto& v : *sup) {
                ValueTuple t(vq.groups[axis.group].components.size(), Value{Star{}});
                t[comp] = std::move(v);
                dom.push_back(std::move(t));
            }
            fetch_domains[ai] = std::move(dom);
            speculative_any = true;
        }

        // a hom axis whose domain carries wildcards cannot group; treat as het
        for (std::size_t ai = 0; ai < shape.axes.size(); ++ai) {
            AxisShape& axis = shape.axes[ai];
            if (axis.cls != AxisShape::Class::Hom) continue;
            for (const auto& t : fetch_domains[ai])
                if (is_star(t[axis.hom_comp])) {
                    axis.cls = AxisShape::Class::Het;
                    break;
                }
        }

        // grouping by the x attribute itself cannot share one GROUP BY; fall
        // back to per-value requests for such axes
        {
            std::set<std::string> x_candidates;
            for (std::size_t ai = 0; ai < shape.axes.size(); ++ai)
                for (const CompUse& u : shape.axes[ai].uses)
                    if (u.use == CompUse::Use::X)
                        for (const auto& t : fetch_domains[ai]) {
                            if (is_star(t[u.comp])) continue;
                            std::istringstream xs(value_to_string(t[u.comp]));
                            std::string part;
                            while (std::getline(xs, part, '*')) x_candidates.insert(part);
                        }
            for (auto& axis : shape.axes)
                if (axis.cls == AxisShape::Class::Hom && x_candidates.count(axis.hom_attr))
                    axis.cls = AxisShape::Class::Het;
        }

        // measures cannot be group dimensions; iterate their values with
        // per-value requests instead
        for (auto& axis : shape.axes)
            if (axis.cls == AxisShape::Class::Hom &&
                table.column(axis.hom_attr).kind == ColumnKind::Measure)
                axis.cls = AxisShape::Class::Het;

        // IN constraints: resolved -> WHERE, pending -> promoted dims
        std::vector<std::pair<std::string, std::vector<Value>>> in_where;
        std::vector<std::string> promoted;
        for (const auto& c : shape.in_constraints) {
            if (group_resolved(c.group)) {
                const auto& dom = resolved_domain(c.group);
                std::vector<Value> vals;
                for (const auto& t : dom) vals.push_back(t[c.comp]);
                in_where.emplace_back(c.attr, dedup_values(vals));
            } else {
                if (!speculate) return false;
                auto sup = provenance_values(c.group, c.comp);
                if (!sup) return false;
                promoted.push_back(c.attr);
                speculative_any = true;
            }
        }

        // enumerate het combinations
        std::vector<int> het_axes;
        for (std::size_t ai = 0; ai < shape.axes.size(); ++ai)
            if (shape.axes[ai].cls == AxisShape::Class::Het) het_axes.push_back(static_cast<int>(ai));
        std::size_t het_total = 1;
        for (int ai : het_axes) {
            if (fetch_domains[ai].empty()) het_total = 0;
            else het_total *= fetch_domains[ai].size();
        }

        // y attributes (widened from y axes; het y handled per combination)
        std::vector<std::string> wide_y;
        for (std::size_t ai = 0; ai < shape.axes.size(); ++ai)
            if (shape.axes[ai].cls == AxisShape::Class::YAxis)
                for (const auto& t : fetch_domains[ai])
                    wide_y.push_back(value_to_string(t[shape.axes[ai].y_comp]));

        st.reqs.clear();
        std::vector<std::size_t> het_pos(het_axes.size(), 0);
        for (std::size_t combo = 0; combo < het_total; ++combo) {
            std::size_t rem = combo;
            for (std::size_t i = het_axes.size(); i-- > 0;) {
                het_pos[i] = rem % fetch_domains[het_axes[i]].size();
                rem /= fetch_domains[het_axes[i]].size();
            }

            // per-combination x attr, y attr, bindings
            std::optional<std::string> x_attr;
            std::optional<std::string> het_y;
            std::vector<std::pair<std::string, Value>> het_bindings;
            for (std::size_t i = 0; i < het_axes.size(); ++i) {
                const AxisShape& axis = shape.axes[het_axes[i]];
                const ValueTuple& t = fetch_domains[het_axes[i]][het_pos[i]];
                for (const CompUse& u : axis.uses) {
                    const Value& v = t[u.comp];
                    switch (u.use) {
                        case CompUse::Use::X:
                            if (!is_star(v)) x_attr = value_to_string(v);
                            break;
                        case CompUse::Use::Y:
                            if (!is_star(v)) het_y = value_to_string(v);
                            break;
                        case CompUse::Use::ZValue: {
                            const GroupComponent& comp = vq.groups[axis.group].components[u.comp];
                            if (!comp.attr.empty() && !is_star(v))
                                het_bindings.emplace_back(comp.attr,
                                                          coerce_to_column(table, comp.attr, v));
                            break;
                        }
                        case CompUse::Use::ZPairAttr: {
                            const Value& val = t[u.pair_val_comp];
                            if (!is_star(v) && !is_star(val)) {
                                const std::string attr = value_to_string(v);
                                het_bindings.emplace_back(attr,
                                                          coerce_to_column(table, attr, val));
                            }
                            break;
                        }
                    }
                }
            }

            // x attr from a dedicated X axis (het axes already covered above)
            std::vector<std::string> x_candidates;
            if (x_attr) {
                x_candidates.push_back(*x_attr);
            } else if (cgx_axis(r, shape) >= 0) {
                const int ai = cgx_axis(r, shape);
                for (const auto& t : fetch_domains[ai])
                    x_candidates.push_back(value_to_string(t[shape.axes[ai].uses[0].comp]));
            } else {
                xerr(ErrorKind::Internal, "row has no x attribute source");
            }

            std::vector<std::string> y_attrs = wide_y;
            if (het_y) y_attrs.push_back(*het_y);
            if (y_attrs.empty()) xerr(ErrorKind::Internal, "row has no y attribute source");

            for (const auto& xa : x_candidates) {
                ReqPlan rp;
                // composite x from the Polaris cross operator
                std::vector<std::string> parts;
                std::istringstream xs(xa);
                std::string part;
                while (std::getline(xs, part, '*')) parts.push_back(part);
                rp.request.x_attr = parts.front();
                for (std::size_t pi = 1; pi < parts.size(); ++pi) rp.x_parts.push_back(parts[pi]);
                rp.request.x_binning = shape.viz.x_binning;

                if (shape.viz.type == VizSpec::Type::Bin2d) {
                    rp.request.y_terms = {{y_attrs.front(), AggFn::Count}};
                } else {
                    for (const auto& ya : y_attrs) rp.request.y_terms.push_back({ya, shape.agg});
                }

                Predicate where = shape.fixed_where;
                for (const auto& [attr, v] : shape.fixed_bindings)
                    where = where.and_with(Predicate::single(PredAtom{attr, CmpOp::Eq, {v}}));
                for (const auto& [attr, v] : het_bindings)
                    where = where.and_with(Predicate::single(PredAtom{attr, CmpOp::Eq, {v}}));

                // hom axes: group dims (+ IN subset constraint when needed)
                for (std::size_t ai = 0; ai < shape.axes.size(); ++ai) {
                    const AxisShape& axis = shape.axes[ai];
                    if (axis.cls != AxisShape::Class::Hom) continue;
                    rp.request.group_dims.push_back(GroupDim{axis.hom_attr});
                    if (!axis_domain_full(axis.hom_attr, fetch_domains[ai], axis.hom_comp)) {
                        std::vector<Value> vals;
                        for (const auto& t : fetch_domains[ai]) vals.push_back(t[axis.hom_comp]);
                        where = where.and_with(
                            Predicate::single(PredAtom{axis.hom_attr, CmpOp::In, dedup_values(vals)}));
                    }
                }
                if (shape.viz.type == VizSpec::Type::Bin2d) {
                    rp.request.group_dims.push_back(
                        GroupDim{y_attrs.front(), *shape.viz.y_binning});
                    rp.has_ybucket = true;
                }
                for (const auto& xp : rp.x_parts) rp.request.group_dims.push_back(GroupDim{xp});
                for (const auto& [attr, vals] : in_where)
                    where = where.and_with(Predicate::single(PredAtom{attr, CmpOp::In, vals}));
                for (const auto& attr : promoted) rp.request.group_dims.push_back(GroupDim{attr});
                rp.promoted = promoted;
                rp.request.where = std::move(where);

                for (std::size_t i = 0; i < het_axes.size(); ++i)
                    rp.het_positions.emplace_back(het_axes[i], het_pos[i]);

                rp.sig = request_sig(rp.request);
                rp.est_card = sig_cardinality(rp.sig, table);
                st.reqs.push_back(std::move(rp));
            }
        }

        if (speculate && speculative_any) {
            // enforce the cap: fall back to non-speculative execution
            for (const auto& rp : st.reqs)
                if (rp.est_card > options.cost.max_groupby) return false;
        }
        st.speculative = speculative_any;
        st.fetch_domains = std::move(fetch_domains);
        st.shape = std::move(shape);
        return true;
    }

    int cgx_axis(int r, const RowShape& shape) const {
        const int gx = vq.row_cell_groups[r].x;
        if (gx < 0) return -1;
        for (std::size_t ai = 0; ai < shape.axes.size(); ++ai)
            if (shape.axes[ai].group == gx && shape.axes[ai].cls != AxisShape::Class::Het)
                return static_cast<int>(ai);
        return -1;
    }

    // ----- assembly -----

    void complete_regular(int node) {
        NodeState& st = nodes[node];
        const int r = dag.nodes[node].row;
        const RowShape& shape = st.shape;

        // final per-axis domains
        std::vector<std::vector<ValueTuple>> final_domains(shape.axes.size());
        // map final position -> fetch position for speculated axes
        std::vector<std::vector<std::size_t>> pos_map(shape.axes.size());
        for (std::size_t ai = 0; ai < shape.axes.size(); ++ai) {
            const AxisShape& axis = shape.axes[ai];
            final_domains[ai] = resolved_domain(axis.group);
            auto& map = pos_map[ai];
            const auto& fetched = st.fetch_domains[ai];
            map.resize(final_domains[ai].size());
            for (std::size_t p = 0; p < final_domains[ai].size(); ++p) {
                const int comp = axis.cls == AxisShape::Class::Hom  ? axis.hom_comp
                                 : axis.cls == AxisShape::Class::YAxis ? axis.y_comp
                                                                       : -1;
                if (!st.speculative) {
                    map[p] = p;
                    continue;
                }
                // locate by the identifying component (exact tuple match for het)
                std::size_t found = fetched.size();
                for (std::size_t q = 0; q < fetched.size(); ++q) {
                    if (comp >= 0 ? value_eq(fetched[q][comp], final_domains[ai][p][comp])
                                  : tuple_eq(fetched[q], final_domains[ai][p])) {
                        found = q;
                        break;
                    }
                }
                if (found == fetched.size())
                    xerr(ErrorKind::UnboundedDomain,
                         "resolved value missing from the speculative superset of '" +
                             dag.nodes[node].label + "'");
                map[p] = found;
            }
        }

        // resolved IN-constraint value lists (for identity + promoted merge)
        std::vector<std::pair<std::string, std::vector<Value>>> in_lists;
        for (const auto& c : shape.in_constraints) {
            const auto& dom = resolved_domain(c.group);
            std::vector<Value> vals;
            for (const auto& t : dom) vals.push_back(t[c.comp]);
            in_lists.emplace_back(c.attr, dedup_values(vals));
        }

        // merge promoted dims out of each executed request
        for (ReqPlan& rp : st.reqs) {
            if (rp.promoted.empty()) continue;
            const std::size_t nd = rp.request.group_dims.size();
            const std::size_t keep = nd - rp.promoted.size();
            detail::AggTable merged;
            merged.y_count = rp.raw.y_count;
            for (std::size_t d = 0; d < keep; ++d) merged.dim_names.push_back(rp.raw.dim_names[d]);
            for (const auto& [key, states] : rp.raw.cells) {
                bool ok = true;
                for (std::size_t pi = 0; pi < rp.promoted.size(); ++pi) {
                    const Value& v = key[keep + pi];
                    const auto& lst = *std::find_if(in_lists.begin(), in_lists.end(),
                                                    [&](const auto& e) {
                                                        return e.first == rp.promoted[pi];
                                                    });
                    bool member = false;
                    for (const auto& allowed : lst.second)
                        if (value_eq(allowed, v)) {
                            member = true;
                            break;
                        }
                    if (!member) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) continue;
                ValueTuple nk;
                nk.reserve(keep + 1);
                for (std::size_t d = 0; d < keep; ++d) nk.push_back(key[d]);
                nk.push_back(key.back());
                auto [it, fresh] = merged.cells.try_emplace(std::move(nk));
                if (fresh) it->second.resize(states.size());
                for (std::size_t y = 0; y < states.size(); ++y) it->second[y].merge(states[y]);
            }
            rp.raw = std::move(merged);
            rp.promoted.clear();
        }

        // request lookup by het positions (in fetch coordinates)
        std::map<std::vector<std::size_t>, std::vector<const ReqPlan*>> by_het;
        std::vector<int> het_axes;
        for (std::size_t ai = 0; ai < shape.axes.size(); ++ai)
            if (shape.axes[ai].cls == AxisShape::Class::Het) het_axes.push_back(static_cast<int>(ai));
        for (const ReqPlan& rp : st.reqs) {
            std::vector<std::size_t> key;
            for (const auto& [ai, p] : rp.het_positions) key.push_back(p);
            by_het[key].push_back(&rp);
        }

        // y attr per cell: from the y axis position or the het tuple
        const int y_axis = [&] {
            for (std::size_t ai = 0; ai < shape.axes.size(); ++ai)
                if (shape.axes[ai].cls == AxisShape::Class::YAxis) return static_cast<int>(ai);
            return -1;
        }();
        const int x_axis = cgx_axis(r, shape);

        VisCollection coll;
        for (std::size_t ai = 0; ai < shape.axes.size(); ++ai) {
            CollectionAxis axis;
            axis.group = shape.axes[ai].group;
            axis.tuples = final_domains[ai];
            coll.axes.push_back(std::move(axis));
        }

        std::size_t total = 1;
        for (const auto& d : final_domains) total *= d.size();
        std::vector<std::size_t> pos(shape.axes.size(), 0);
        for (std::size_t flat = 0; flat < total && total > 0; ++flat) {
            std::size_t rem = flat;
            for (std::size_t ai = shape.axes.size(); ai-- > 0;) {
                pos[ai] = rem % final_domains[ai].size();
                rem /= final_domains[ai].size();
            }

            UnitViz cell;
            cell.viz = shape.viz;
            cell.is_bin2d = shape.viz.type == VizSpec::Type::Bin2d;
            for (const auto& [attr, v] : shape.fixed_bindings) cell.set_binding(attr, v);
            cell.extra_where = shape.fixed_where;
            for (const auto& [attr, vals] : in_lists)
                cell.extra_where =
                    cell.extra_where.and_with(Predicate::single(PredAtom{attr, CmpOp::In, vals}));

            std::optional<std::string> het_y;
            for (std::size_t ai = 0; ai < shape.axes.size(); ++ai) {
                const AxisShape& axis = shape.axes[ai];
                const ValueTuple& t = final_domains[ai][pos[ai]];
                for (const CompUse& u : axis.uses) {
                    const Value& v = t[u.comp];
                    switch (u.use) {
                        case CompUse::Use::X:
                            if (!is_star(v)) cell.x_attr = value_to_string(v);
                            break;
                        case CompUse::Use::Y:
                            if (!is_star(v)) {
                                cell.y_attr = value_to_string(v);
                                het_y = cell.y_attr;
                            }
                            break;
                        case CompUse::Use::ZValue: {
                            const GroupComponent& comp = vq.groups[axis.group].components[u.comp];
                            if (!comp.attr.empty())
                                cell.set_binding(comp.attr, coerce_to_column(table, comp.attr, v));
                            break;
                        }
                        case CompUse::Use::ZPairAttr:
                            if (!is_star(v)) {
                                const std::string attr = value_to_string(v);
                                cell.set_binding(attr,
                                                 coerce_to_column(table, attr, t[u.pair_val_comp]));
                            }
                            break;
                    }
                }
            }

            // find the owning request
            std::vector<std::size_t> het_key;
            for (int ai : het_axes) het_key.push_back(pos_map[ai][pos[ai]]);
            const auto& candidates = by_het.at(het_key);
            const ReqPlan* rp = candidates.front();
            if (x_axis >= 0 && candidates.size() > 1) {
                // one request per x attribute: pick by position
                rp = candidates[pos_map[x_axis][pos[x_axis]] % candidates.size()];
            }
            if (x_axis >= 0) {
                const ValueTuple& xt = final_domains[x_axis][pos[x_axis]];
                cell.x_attr = value_to_string(xt[shape.axes[x_axis].uses[0].comp]);
            }
            if (cell.y_attr.empty() && y_axis >= 0) {
                const ValueTuple& yt = final_domains[y_axis][pos[y_axis]];
                cell.y_attr = value_to_string(yt[shape.axes[y_axis].y_comp]);
            }
            if (cell.x_attr.empty() || cell.y_attr.empty())
                xerr(ErrorKind::Internal, "cell missing x or y attribute");

            // group key: hom axis values in dim order
            ValueTuple key;
            for (std::size_t ai = 0; ai < shape.axes.size(); ++ai)
                if (shape.axes[ai].cls == AxisShape::Class::Hom)
                    key.push_back(coerce_to_column(
                        table, shape.axes[ai].hom_attr,
                        final_domains[ai][pos[ai]][shape.axes[ai].hom_comp]));

            // y column index within the request
            std::size_t y_index = 0;
            if (!rp->has_ybucket) {
                for (std::size_t yi = 0; yi < rp->request.y_terms.size(); ++yi)
                    if (rp->request.y_terms[yi].attr == cell.y_attr) {
                        y_index = yi;
                        break;
                    }
            }

            assemble_series(*rp, key, y_index, cell);
            cell.materialized = true;
            coll.cells.push_back(std::move(cell));
        }

        collections[vq.query.rows[r].name.var] = std::move(coll);
        st.done = true;
    }

    // Reads the (dims..., x) entries with the given hom prefix out of a
    // request's raw table and fills the cell's series.
    void assemble_series(const ReqPlan& rp, const ValueTuple& hom_key, std::size_t y_index,
                         UnitViz& cell) const {
        const std::size_t extra = (rp.has_ybucket ? 1 : 0) + rp.x_parts.size();
        struct Point {
            ValueTuple order_key;
            Value x;
            double y;
            double ybucket = 0, count = 0;
        };
        std::vector<Point> points;

        auto it = rp.raw.cells.lower_bound(hom_key);
        for (; it != rp.raw.cells.end(); ++it) {
            const ValueTuple& key = it->first;
            bool prefix = key.size() >= hom_key.size();
            for (std::size_t i = 0; prefix && i < hom_key.size(); ++i)
                prefix = value_eq(key[i], hom_key[i]);
            if (!prefix) break;
            const std::size_t base = hom_key.size();
            if (key.size() != base + extra + 1)
                xerr(ErrorKind::Internal, "unexpected raw key arity");

            Point p;
            if (rp.has_ybucket) {
                p.ybucket = as_double(key[base]);
                p.count = it->second[0].finalize(AggFn::Count);
                p.x = key.back();
                p.order_key = {key.back(), key[base]};
            } else if (!rp.x_parts.empty()) {
                // composite x: order by (x, parts...) and label accordingly
                ValueTuple ok;
                ok.push_back(key.back());
                for (std::size_t i = 0; i < rp.x_parts.size(); ++i) ok.push_back(key[base + i]);
                std::string label = value_to_string(key.back());
                for (std::size_t i = 0; i < rp.x_parts.size(); ++i)
                    label += "|" + value_to_string(key[base + i]);
                p.x = Value{label};
                p.order_key = std::move(ok);
                p.y = it->second[y_index].finalize(rp.request.y_terms[y_index].fn);
            } else {
                p.x = key.back();
                p.order_key = {key.back()};
                p.y = it->second[y_index].finalize(rp.request.y_terms[y_index].fn);
            }
            points.push_back(std::move(p));
        }
        std::stable_sort(points.begin(), points.end(),
                         [](const Point& a, const Point& b) {
                             return tuple_less(a.order_key, b.order_key);
                         });
        for (auto& p : points) {
            if (cell.is_bin2d) cell.bins2d.emplace_back(as_double(p.x), p.ybucket, p.count);
            else cell.series.emplace_back(std::move(p.x), p.y);
        }
    }

    // ----- derived rows -----

    std::vector<UnitViz> eval_name_expr(const NameExpr& e, int row) {
        switch (e.op) {
            case NameExpr::Op::Ref: {
                const VisCollection& c = collections.at(e.ref);
                return c.cells;
            }
            case NameExpr::Op::Concat: {
                auto a = eval_name_expr(*e.a, row);
                auto b = eval_name_expr(*e.b, row);
                a.insert(a.end(), b.begin(), b.end());
                return a;
            }
            case NameExpr::Op::Diff: {
                auto a = eval_name_expr(*e.a, row);
                auto b = eval_name_expr(*e.b, row);
                std::set<std::string> drop;
                for (const auto& cell : b) drop.insert(cell.identity());
                std::vector<UnitViz> out;
                for (auto& cell : a)
                    if (!drop.count(cell.identity())) out.push_back(std::move(cell));
                return out;
            }
            case NameExpr::Op::Intersect: {
                auto a = eval_name_expr(*e.a, row);
                auto b = eval_name_expr(*e.b, row);
                std::set<std::string> keep;
                for (const auto& cell : b) keep.insert(cell.identity());
                std::vector<UnitViz> out;
                for (auto& cell : a)
                    if (keep.count(cell.identity())) out.push_back(std::move(cell));
                return out;
            }
            case NameExpr::Op::Index: {
                auto a = eval_name_expr(*e.a, row);
                if (e.index < 1 || e.index > static_cast<int64_t>(a.size()))
                    xerr(ErrorKind::IndexOutOfRange,
                         "index " + std::to_string(e.index) + " outside 1.." +
                             std::to_string(a.size()));
                return {a[static_cast<std::size_t>(e.index - 1)]};
            }
            case NameExpr::Op::Slice: {
                auto a = eval_name_expr(*e.a, row);
                int64_t from = e.from.value_or(1);
                int64_t to = e.to.value_or(static_cast<int64_t>(a.size()));
                from = std::max<int64_t>(1, from);
                to = std::min<int64_t>(to, static_cast<int64_t>(a.size()));
                std::vector<UnitViz> out;
                for (int64_t i = from; i <= to; ++i)
                    out.push_back(a[static_cast<std::size_t>(i - 1)]);
                return out;
            }
            case NameExpr::Op::Uniq: {
                auto a = eval_name_expr(*e.a, row);
                std::set<std::string> seen;
                std::vector<UnitViz> out;
                for (auto& cell : a)
                    if (seen.insert(cell.identity()).second) out.push_back(std::move(cell));
                return out;
            }
            case NameExpr::Op::Order: {
                auto a = eval_name_expr(*e.a, row);
                // reorder by the --> marked groups of this row
                std::vector<UnitViz> out;
                for (int g : vq.row_reorder_groups[row]) {
                    const auto& dom = resolved_domain(g);
                    const VarGroup& grp = vq.groups[g];
                    for (const auto& t : dom) {
                        for (const auto& cell : a) {
                            bool match = true;
                            for (std::size_t c = 0; match && c < grp.components.size(); ++c) {
                                const GroupComponent& comp = grp.components[c];
                                const Value& v = t[c];
                                switch (comp.role) {
                                    case CompRole::XAttr:
                                        match = !is_star(v) && cell.x_attr == value_to_string(v);
                                        break;
                                    case CompRole::YAttr:
                                        match = !is_star(v) && cell.y_attr == value_to_string(v);
                                        break;
                                    case CompRole::ZValue: {
                                        const std::string& attr = comp.attr;
                                        auto bit = std::find_if(
                                            cell.bindings.begin(), cell.bindings.end(),
                                            [&](const auto& b) { return b.first == attr; });
                                        if (is_star(v)) match = bit == cell.bindings.end();
                                        else
                                            match = bit != cell.bindings.end() &&
                                                    value_eq(bit->second,
                                                             coerce_to_column(table, attr, v));
                                        break;
                                    }
                                    case CompRole::ZAttr:
                                        match = true;  // paired value comps carry the test
                                        break;
                                }
                            }
                            if (match) out.push_back(cell);
                        }
                    }
                }
                return out;
            }
        }
        return {};
    }

    // constraint refetch requests for derived rows
    void build_derived_fetch(int node) {
        NodeState& st = nodes[node];
        const int r = dag.nodes[node].row;
        RowShape shape = row_shape(r);
        st.reqs.clear();
        if (shape.fixed_where.is_true() && shape.in_constraints.empty()) {
            st.fetched = true;
            return;
        }

        Predicate extra = shape.fixed_where;
        for (const auto& c : shape.in_constraints) {
            const auto& dom = resolved_domain(c.group);
            std::vector<Value> vals;
            for (const auto& t : dom) vals.push_back(t[c.comp]);
            extra = extra.and_with(Predicate::single(PredAtom{c.attr, CmpOp::In, dedup_values(vals)}));
        }

        auto cells = eval_name_expr(*vq.query.rows[r].name.derivation, r);
        for (const UnitViz& cell : cells) {
            ReqPlan rp;
            rp.request.x_attr = cell.x_attr;
            rp.request.x_binning = cell.viz.x_binning;
            rp.request.y_terms = {{cell.y_attr, cell.viz.y_agg.value_or(AggFn::Sum)}};
            Predicate where = cell.extra_where.and_with(extra);
            for (const auto& [attr, v] : cell.bindings)
                where = where.and_with(Predicate::single(PredAtom{attr, CmpOp::Eq, {v}}));
            rp.request.where = std::move(where);
            rp.sig = request_sig(rp.request);
            rp.est_card = sig_cardinality(rp.sig, table);
            st.reqs.push_back(std::move(rp));
        }
    }

    void complete_derived(int node) {
        NodeState& st = nodes[node];
        const int r = dag.nodes[node].row;
        RowShape shape = row_shape(r);
        const ZqlRow& row = vq.query.rows[r];

        auto cells = eval_name_expr(*row.name.derivation, r);

        if (!st.reqs.empty()) {
            // refreshed data under the added constraints
            Predicate extra = shape.fixed_where;
            for (const auto& c : shape.in_constraints) {
                const auto& dom = resolved_domain(c.group);
                std::vector<Value> vals;
                for (const auto& t : dom) vals.push_back(t[c.comp]);
                extra = extra.and_with(
                    Predicate::single(PredAtom{c.attr, CmpOp::In, dedup_values(vals)}));
            }
            for (std::size_t i = 0; i < cells.size(); ++i) {
                UnitViz& cell = cells[i];
                const ReqPlan& rp = st.reqs[i];
                cell.series.clear();
                cell.bins2d.clear();
                for (const auto& [key, states] : rp.raw.cells)
                    cell.series.emplace_back(key.back(),
                                             states[0].finalize(rp.request.y_terms[0].fn));
                cell.extra_where = cell.extra_where.and_with(extra);
            }
        }

        // expose `_`-bound components as the row's derived group domain
        int derived_group = -1;
        for (int g : vq.row_axes[r])
            if (vq.groups[g].source == VarGroup::Source::DerivedCells &&
                vq.groups[g].def_row == r)
                derived_group = g;
        if (derived_group >= 0) {
            const VarGroup& g = vq.groups[derived_group];
            std::vector<ValueTuple> dom;
            for (const UnitViz& cell : cells) {
                ValueTuple t;
                for (const auto& comp : g.components) {
                    switch (comp.role) {
                        case CompRole::XAttr: t.push_back(Value{cell.x_attr}); break;
                        case CompRole::YAttr: t.push_back(Value{cell.y_attr}); break;
                        case CompRole::ZValue: {
                            auto it = std::find_if(cell.bindings.begin(), cell.bindings.end(),
                                                   [&](const auto& b) {
                                                       return b.first == comp.attr;
                                                   });
                            t.push_back(it == cell.bindings.end() ? Value{Star{}} : it->second);
                            break;
                        }
                        case CompRole::ZAttr: t.push_back(Value{Star{}}); break;
                    }
                }
                dom.push_back(std::move(t));
            }
            domains[derived_group] = std::move(dom);
        }

        VisCollection coll;
        CollectionAxis axis;
        axis.group = derived_group;
        if (derived_group >= 0) {
            axis.tuples = *domains[derived_group];
        } else if (vq.row_reorder_groups[r].size() == 1 &&
                   cells.size() == resolved_domain(vq.row_reorder_groups[r][0]).size()) {
            // .order rows align one-to-one with the ordering group, so later
            // processes can iterate this collection in lockstep with it
            axis.group = vq.row_reorder_groups[r][0];
            axis.tuples = resolved_domain(axis.group);
        } else {
            for (std::size_t i = 0; i < cells.size(); ++i)
                axis.tuples.push_back({Value{static_cast<int64_t>(i)}});
        }
        coll.axes.push_back(std::move(axis));
        coll.cells = std::move(cells);
        collections[row.name.var] = std::move(coll);
        st.done = true;
    }

    // ----- processes -----

    void run_process(int node) {
        const PlanNode& pn = dag.nodes[node];
        const ProcessDecl& decl = vq.query.rows[pn.row].processes[pn.proc_index];

        ProcessEnv env;
        env.vq = &vq;
        env.registry = &registry;
        for (const auto& [name, coll] : collections) env.collections[name] = &coll;
        for (std::size_t g = 0; g < vq.groups.size(); ++g) {
            if (!domains[g] && (vq.groups[g].source == VarGroup::Source::Static ||
                                vq.groups[g].source == VarGroup::Source::PairStatic))
                resolve_group(static_cast<int>(g));
            if (!domains[g] && vq.groups[g].source == VarGroup::Source::Expr &&
                group_resolved(static_cast<int>(g)))
                resolve_group(static_cast<int>(g));
            if (domains[g]) env.group_domains[static_cast<int>(g)] = *domains[g];
        }

        ProcessOutputs out;
        try {
            if (options.cache_aware && !decl.is_plug_form) {
                const std::size_t block =
                    options.block_bytes ? options.block_bytes : default_block_bytes();
                out = cache_aware_eval(decl, env, block);
            } else {
                out = eval_process(decl, env);
            }
        } catch (ZqlError& e) {
            throw ZqlError(e.stage(), e.kind(),
                           std::string(e.what()) + " (node " + pn.label + ")");
        }

        // register the output group domain
        for (const auto& [var, binding] : vq.vars) {
            const VarGroup& g = vq.groups[binding.group];
            if (g.source == VarGroup::Source::Process && g.def_row == pn.row &&
                g.proc_index == pn.proc_index) {
                domains[binding.group] = out.tuples;
                break;
            }
        }
        nodes[node].done = true;
    }

    // ----- scheduling -----

    bool ready(int node) const {
        for (int p : dag.parents[node])
            if (!nodes[p].done) return false;
        return true;
    }

    void execute_requests(std::vector<std::pair<int, int>> owners,  // (node, req index)
                          const std::vector<CombinedGroup>& groups,
                          const std::vector<PlannedRequest>& planned) {
        auto run_group = [&](const CombinedGroup& g) {
            std::vector<AggregateRequest> reqs;
            for (int m : g.members) reqs.push_back(planned[m].request);
            if (reqs.size() == 1) {
                auto raw = backend.execute_raw(reqs[0]);
                Backend::CombinedRaw out;
                out.combined_group_count = raw.cells.size();
                out.per_request.push_back(std::move(raw));
                return out;
            }
            return backend.execute_combined_raw(reqs);
        };

        std::vector<Backend::CombinedRaw> results(groups.size());
        if (options.concurrent_requests && groups.size() > 1) {
            std::vector<std::future<Backend::CombinedRaw>> futures;
            for (const auto& g : groups)
                futures.push_back(std::async(std::launch::async, run_group, std::cref(g)));
            for (std::size_t i = 0; i < futures.size(); ++i) results[i] = futures[i].get();
        } else {
            for (std::size_t i = 0; i < groups.size(); ++i) results[i] = run_group(groups[i]);
        }

        BatchPlan::Phase plan_phase;
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const CombinedGroup& g = groups[gi];
            TraceRequest tr;
            tr.phase = phase;
            std::size_t actual = results[gi].combined_group_count;
            std::vector<AggregateRequest> reqs;
            for (std::size_t mi = 0; mi < g.members.size(); ++mi) {
                const int m = g.members[mi];
                const auto [node, ri] = owners[m];
                nodes[node].reqs[ri].raw = std::move(results[gi].per_request[mi]);
                nodes[node].reqs[ri].executed = true;
                tr.nodes.push_back(dag.nodes[node].label);
                reqs.push_back(planned[m].request);
            }
            tr.group_values = actual;
            tr.est_group_values = g.est_card;
            tr.sql = reqs.size() == 1 ? emit_sql(reqs[0], table.name())
                                      : emit_sql_combined(reqs, table.name());
            trace.requests.push_back(std::move(tr));
            plan_phase.groups.push_back(g);
        }
        if (!plan_phase.groups.empty()) trace.plan.phases.push_back(std::move(plan_phase));
    }

    void fetch_nodes(const std::vector<int>& fetch_set) {
        std::vector<PlannedRequest> planned;
        std::vector<std::pair<int, int>> owners;
        for (int n : fetch_set) {
            NodeState& st = nodes[n];
            for (std::size_t ri = 0; ri < st.reqs.size(); ++ri) {
                PlannedRequest pr;
                pr.request = st.reqs[ri].request;
                pr.sig = st.reqs[ri].sig;
                pr.est_card = st.reqs[ri].est_card;
                pr.node = n;
                planned.push_back(std::move(pr));
                owners.emplace_back(n, static_cast<int>(ri));
            }
            st.fetched = true;
        }
        if (planned.empty()) return;

        std::vector<CombinedGroup> groups;
        if (strategy == ExecStrategy::SmartFuse) {
            groups = combine_phase(planned, options.cost, table);
        } else {
            for (std::size_t i = 0; i < planned.size(); ++i) {
                CombinedGroup g;
                g.members = {static_cast<int>(i)};
                g.sig = planned[i].sig;
                g.est_card = planned[i].est_card;
                groups.push_back(std::move(g));
            }
        }
        execute_requests(std::move(owners), groups, planned);
    }

    void complete_node(int node) {
        const PlanNode& pn = dag.nodes[node];
        if (pn.kind == PlanNode::Kind::Process) {
            run_process(node);
        } else if (vq.query.rows[pn.row].name.derivation) {
            complete_derived(node);
        } else {
            complete_regular(node);
        }
        trace.completions.push_back({pn.label, phase});
    }

    bool node_fetchable(int node) {
        const PlanNode& pn = dag.nodes[node];
        if (pn.kind != PlanNode::Kind::Collection || nodes[node].fetched || nodes[node].done)
            return false;
        const bool is_derived = vq.query.rows[pn.row].name.derivation != nullptr;
        if (ready(node)) {
            if (is_derived) build_derived_fetch(node);
            else if (!build_regular_fetch(node, false))
                xerr(ErrorKind::UnboundedDomain,
                     "domains of ready node " + pn.label + " failed to resolve");
            return true;
        }
        if (strategy != ExecStrategy::Speculate && strategy != ExecStrategy::SmartFuse)
            return false;
        if (is_derived) return false;
        return build_regular_fetch(node, true);
    }

    void run_all() {
        // resolve all static iteration domains up front
        for (std::size_t g = 0; g < vq.groups.size(); ++g)
            if (vq.groups[g].source == VarGroup::Source::Static ||
                vq.groups[g].source == VarGroup::Source::PairStatic)
                resolve_group(static_cast<int>(g));

        const int n = dag.node_count();
        if (strategy == ExecStrategy::NoOpt) {
            int done = 0;
            while (done < n) {
                int next = -1;
                for (int i = 0; i < n; ++i)
                    if (!nodes[i].done && ready(i)) {
                        next = i;
                        break;
                    }
                if (next < 0) xerr(ErrorKind::CycleDetected, "no runnable node");
                const PlanNode& pn = dag.nodes[next];
                if (pn.kind == PlanNode::Kind::Collection) {
                    if (vq.query.rows[pn.row].name.derivation) build_derived_fetch(next);
                    else build_regular_fetch(next, false);
                    NodeState& st = nodes[next];
                    if (st.reqs.empty()) ++phase;
                    // sequential: every request is its own phase
                    for (std::size_t ri = 0; ri < st.reqs.size(); ++ri) {
                        ++phase;
                        PlannedRequest pr;
                        pr.request = st.reqs[ri].request;
                        pr.sig = st.reqs[ri].sig;
                        pr.est_card = st.reqs[ri].est_card;
                        pr.node = next;
                        CombinedGroup g;
                        g.members = {0};
                        g.sig = pr.sig;
                        g.est_card = pr.est_card;
                        execute_requests({{next, static_cast<int>(ri)}}, {g}, {pr});
                    }
                    st.fetched = true;
                } else {
                    ++phase;
                }
                complete_node(next);
                ++done;
            }
        } else {
            int done = 0;
            while (done < n) {
                ++phase;
                std::vector<int> to_fetch;
                for (int i = 0; i < n; ++i)
                    if (node_fetchable(i)) to_fetch.push_back(i);
                std::vector<int> to_complete;
                for (int i = 0; i < n; ++i) {
                    if (nodes[i].done || !ready(i)) continue;
                    if (dag.nodes[i].kind == PlanNode::Kind::Collection &&
                        !nodes[i].fetched &&
                        std::find(to_fetch.begin(), to_fetch.end(), i) == to_fetch.end())
                        continue;
                    to_complete.push_back(i);
                }
                if (to_fetch.empty() && to_complete.empty())
                    xerr(ErrorKind::CycleDetected, "scheduler made no progress");
                fetch_nodes(to_fetch);
                for (int i : to_complete) {
                    complete_node(i);
                    ++done;
                }
            }
        }
        trace.phase_count = phase;
        trace.predicted_ms = predict_cost(trace.plan, options.cost);
    }
};

}  // namespace

Engine::Engine(const ColumnTable& table, PrimitiveRegistry registry, EngineOptions options)
    : table_(&table), registry_(std::move(registry)), options_(std::move(options)) {}

RunOutput Engine::run(const ValidatedQuery& vq, ExecStrategy strategy) const {
    const auto start = std::chrono::steady_clock::now();
    Runtime rt(vq, *table_, registry_, options_, strategy);
    rt.run_all();

    RunOutput out;
    for (int r : vq.output_rows) {
        const std::string& name = vq.query.rows[r].name.var;
        out.results.outputs.emplace_back(name, rt.collections.at(name));
    }
    out.trace = std::move(rt.trace);
    out.trace.measured_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return out;
}

}  // namespace zql
