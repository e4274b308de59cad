#include "zql/plan.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "zql/errors.hpp"

namespace zql {

const char* to_string(ExecStrategy s) {
    switch (s) {
        case ExecStrategy::NoOpt: return "noopt";
        case ExecStrategy::Parallel: return "parallel";
        case ExecStrategy::Speculate: return "speculate";
        case ExecStrategy::SmartFuse: return "smartfuse";
    }
    return "?";
}

std::optional<ExecStrategy> strategy_from_string(const std::string& s) {
    if (s == "noopt" || s == "no-opt") return ExecStrategy::NoOpt;
    if (s == "parallel") return ExecStrategy::Parallel;
    if (s == "speculate") return ExecStrategy::Speculate;
    if (s == "smartfuse") return ExecStrategy::SmartFuse;
    return std::nullopt;
}

namespace {

// c-node of the row where a group's domain gets resolved, or the p-node for
// process outputs; -1 for static groups.
void resolver_nodes(const ValidatedQuery& vq, const PlanDag& dag, int group,
                    std::set<int>& out_nodes) {
    const VarGroup& g = vq.groups[group];
    switch (g.source) {
        case VarGroup::Source::Static:
        case VarGroup::Source::PairStatic:
            return;
        case VarGroup::Source::Process:
            out_nodes.insert(dag.pnode_of.at({g.def_row, g.proc_index}));
            return;
        case VarGroup::Source::DerivedCells:
            out_nodes.insert(dag.cnode_of_row.at(g.def_row));
            return;
        case VarGroup::Source::Expr: {
            std::vector<std::string> refs;
            std::function<void(const DomainExpr&)> walk = [&](const DomainExpr& e) {
                if (e.kind == DomainExpr::Kind::VarRef) refs.push_back(e.var);
                if (e.a) walk(*e.a);
                if (e.b) walk(*e.b);
            };
            walk(*g.var_expr);
            for (const auto& v : refs)
                resolver_nodes(vq, dag, vq.vars.at(v).group, out_nodes);
            return;
        }
    }
}

void collect_body_names(const ProcExpr& e, std::set<std::string>& names) {
    if (e.kind == ProcExpr::Kind::T) names.insert(e.name1);
    if (e.kind == ProcExpr::Kind::D) {
        names.insert(e.name1);
        names.insert(e.name2);
    }
    if (e.kind == ProcExpr::Kind::Plug)
        for (const auto& a : e.args)
            if (a.kind == PlugArg::Kind::Expr) collect_body_names(*a.expr, names);
    if (e.a) collect_body_names(*e.a, names);
    if (e.b) collect_body_names(*e.b, names);
}

void collect_body_vars(const ProcExpr& e, std::set<std::string>& vars) {
    if (e.kind == ProcExpr::Kind::Reduce) vars.insert(e.reduce_var);
    if (e.kind == ProcExpr::Kind::Plug)
        for (const auto& a : e.args)
            if (a.kind == PlugArg::Kind::Expr) collect_body_vars(*a.expr, vars);
    if (e.a) collect_body_vars(*e.a, vars);
    if (e.b) collect_body_vars(*e.b, vars);
}

void collect_name_refs(const NameExpr& e, std::set<std::string>& refs) {
    if (e.op == NameExpr::Op::Ref) refs.insert(e.ref);
    if (e.a) collect_name_refs(*e.a, refs);
    if (e.b) collect_name_refs(*e.b, refs);
}

}  // namespace

PlanDag build_dag(const ValidatedQuery& vq) {
    PlanDag dag;
    const int rows = static_cast<int>(vq.query.rows.size());
    for (int r = 0; r < rows; ++r) {
        PlanNode n;
        n.kind = PlanNode::Kind::Collection;
        n.row = r;
        n.label = vq.query.rows[r].name.var;
        dag.cnode_of_row[r] = dag.node_count();
        dag.nodes.push_back(std::move(n));
    }
    int pcount = 0;
    for (int r = 0; r < rows; ++r)
        for (int pi = 0; pi < static_cast<int>(vq.query.rows[r].processes.size()); ++pi) {
            PlanNode n;
            n.kind = PlanNode::Kind::Process;
            n.row = r;
            n.proc_index = pi;
            n.label = "p" + std::to_string(++pcount);
            dag.pnode_of[{r, pi}] = dag.node_count();
            dag.nodes.push_back(std::move(n));
        }

    dag.parents.assign(dag.nodes.size(), {});
    dag.children.assign(dag.nodes.size(), {});
    auto edge = [&](int from, int to) {
        if (from == to) return;
        auto& ps = dag.parents[to];
        if (std::find(ps.begin(), ps.end(), from) == ps.end()) {
            ps.push_back(from);
            dag.children[from].push_back(to);
        }
    };

    for (int r = 0; r < rows; ++r) {
        const ZqlRow& row = vq.query.rows[r];
        const int cnode = dag.cnode_of_row.at(r);

        // axis variables derived from processes (or other collections)
        std::set<int> deps;
        for (int g : vq.row_axes[r]) resolver_nodes(vq, dag, g, deps);
        // constraint variables
        for (const auto& z : row.z)
            if (z.constraint && z.constraint->references_var())
                resolver_nodes(vq, dag, vq.vars.at(z.constraint->in_var).group, deps);
        // name-derived rows read their operand collections
        if (row.name.derivation) {
            std::set<std::string> refs;
            collect_name_refs(*row.name.derivation, refs);
            for (const auto& ref : refs) deps.insert(dag.cnode_of_row.at(vq.row_of(ref)));
        }
        for (int d : deps) edge(d, cnode);

        for (int pi = 0; pi < static_cast<int>(row.processes.size()); ++pi) {
            const ProcessDecl& p = row.processes[pi];
            const int pnode = dag.pnode_of.at({r, pi});
            std::set<std::string> names;
            std::set<std::string> body_vars(p.opt_vars.begin(), p.opt_vars.end());
            if (p.is_plug_form) {
                for (const auto& a : p.plug_args)
                    if (a.kind == PlugArg::Kind::Ident && vq.collections.count(a.ident))
                        names.insert(a.ident);
            } else {
                collect_body_names(*p.body, names);
                collect_body_vars(*p.body, body_vars);
            }
            std::set<int> pdeps;
            for (const auto& n : names) pdeps.insert(dag.cnode_of_row.at(vq.row_of(n)));
            for (const auto& v : body_vars)
                if (vq.vars.count(v)) resolver_nodes(vq, dag, vq.vars.at(v).group, pdeps);
            for (int d : pdeps) edge(d, pnode);
        }
    }

    // cycle check via Kahn's algorithm
    std::vector<int> indeg(dag.nodes.size(), 0);
    for (std::size_t i = 0; i < dag.nodes.size(); ++i)
        indeg[i] = static_cast<int>(dag.parents[i].size());
    std::vector<int> queue;
    for (std::size_t i = 0; i < dag.nodes.size(); ++i)
        if (indeg[i] == 0) queue.push_back(static_cast<int>(i));
    std::size_t seen = 0;
    while (!queue.empty()) {
        const int n = queue.back();
        queue.pop_back();
        ++seen;
        for (int c : dag.children[n])
            if (--indeg[c] == 0) queue.push_back(c);
    }
    if (seen != dag.nodes.size())
        throw ZqlError(ErrorStage::Plan, ErrorKind::CycleDetected,
                       "query plan contains a dependency cycle");
    return dag;
}

std::string to_dot(const PlanDag& dag) {
    std::ostringstream os;
    os << "digraph plan {\n  rankdir=TB;\n";
    for (int i = 0; i < dag.node_count(); ++i) {
        const PlanNode& n = dag.nodes[i];
        os << "  n" << i << " [label=\"" << n.label << "\", shape="
           << (n.kind == PlanNode::Kind::Collection ? "box" : "ellipse") << "];\n";
    }
    for (int i = 0; i < dag.node_count(); ++i)
        for (int c : dag.children[i]) os << "  n" << i << " -> n" << c << ";\n";
    os << "}\n";
    return os.str();
}

GroupSig request_sig(const AggregateRequest& req) {
    GroupSig sig;
    sig.add(req.x_attr, req.x_binning);
    for (const auto& d : req.group_dims) sig.add(d.attr, d.binning);
    return sig;
}

std::size_t sig_cardinality(const GroupSig& sig, const ColumnTable& table) {
    std::size_t card = 1;
    for (const auto& [attr, binning] : sig.attrs) card *= attr_cardinality(table, attr, binning);
    return card;
}

double efgv(const GroupSig& q, const GroupSig& q_prime, const ColumnTable& table) {
    double growth = 1.0;
    for (const auto& [attr, binning] : q_prime.attrs)
        if (!q.attrs.count(attr))
            growth *= static_cast<double>(attr_cardinality(table, attr, binning));
    return growth;
}

double efgv(const AggregateRequest& q, const AggregateRequest& q_prime, const ColumnTable& table) {
    return efgv(request_sig(q), request_sig(q_prime), table);
}

namespace {

double phase_cost(std::size_t n_groups, std::size_t total_values, const CostModel& cost) {
    if (n_groups == 0) return 0.0;
    return cost.fixed_ms + cost.per_query_ms * static_cast<double>(n_groups) +
           cost.per_100_group_values_ms * static_cast<double>(total_values) / 100.0;
}

}  // namespace

std::vector<CombinedGroup> combine_phase(const std::vector<PlannedRequest>& requests,
                                         const CostModel& cost, const ColumnTable& table) {
    std::vector<CombinedGroup> clusters;
    for (std::size_t i = 0; i < requests.size(); ++i) {
        CombinedGroup g;
        g.members = {static_cast<int>(i)};
        g.sig = requests[i].sig;
        g.est_card = requests[i].est_card;
        clusters.push_back(std::move(g));
    }

    while (clusters.size() > 1) {
        // pick the pair with the least effective group-value growth
        std::size_t best_i = 0, best_j = 0;
        double best_growth = -1;
        std::size_t best_card = 0;
        GroupSig best_sig;
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            for (std::size_t j = i + 1; j < clusters.size(); ++j) {
                GroupSig merged = clusters[i].sig;
                merged.merge(clusters[j].sig);
                const std::size_t card = sig_cardinality(merged, table);
                if (card > cost.max_groupby) continue;
                const double growth =
                    static_cast<double>(card) /
                    static_cast<double>(std::max(clusters[i].est_card, clusters[j].est_card));
                if (best_growth < 0 || growth < best_growth) {
                    best_growth = growth;
                    best_i = i;
                    best_j = j;
                    best_card = card;
                    best_sig = merged;
                }
            }
        }
        if (best_growth < 0) break;  // nothing mergeable under the cap

        // accept only if the merge strictly lowers the predicted phase cost
        const double delta =
            -cost.per_query_ms +
            cost.per_100_group_values_ms *
                (static_cast<double>(best_card) - static_cast<double>(clusters[best_i].est_card) -
                 static_cast<double>(clusters[best_j].est_card)) /
                100.0;
        if (delta >= 0) break;

        clusters[best_i].members.insert(clusters[best_i].members.end(),
                                        clusters[best_j].members.begin(),
                                        clusters[best_j].members.end());
        std::sort(clusters[best_i].members.begin(), clusters[best_i].members.end());
        clusters[best_i].sig = best_sig;
        clusters[best_i].est_card = best_card;
        clusters.erase(clusters.begin() + static_cast<long>(best_j));
    }
    return clusters;
}

double predict_cost(const BatchPlan& plan, const CostModel& cost) {
    double total = 0;
    for (const auto& phase : plan.phases) {
        std::size_t values = 0;
        for (const auto& g : phase.groups) values += g.est_card;
        total += phase_cost(phase.groups.size(), values, cost);
    }
    return total;
}

std::vector<CombinedGroup> optimal_combination(const std::vector<PlannedRequest>& requests,
                                               const CostModel& cost, const ColumnTable& table) {
    const std::size_t n = requests.size();
    if (n == 0) return {};
    if (n > 8)
        throw ZqlError(ErrorStage::Plan, ErrorKind::Internal,
                       "exhaustive combiner is a small-input test oracle");

    std::vector<int> assign(n, 0);
    std::vector<CombinedGroup> best;
    double best_cost = -1;

    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int max_used) {
        if (i == n) {
            std::map<int, CombinedGroup> groups;
            for (std::size_t r = 0; r < n; ++r) {
                auto& g = groups[assign[r]];
                g.members.push_back(static_cast<int>(r));
                g.sig.merge(requests[r].sig);
            }
            std::size_t values = 0;
            for (auto& [_, g] : groups) {
                g.est_card = sig_cardinality(g.sig, table);
                if (g.members.size() > 1 && g.est_card > cost.max_groupby) return;
                values += g.est_card;
            }
            const double c = phase_cost(groups.size(), values, cost);
            if (best_cost < 0 || c < best_cost) {
                best_cost = c;
                best.clear();
                for (auto& [_, g] : groups) best.push_back(g);
            }
            return;
        }
        for (int b = 0; b <= max_used + 1; ++b) {
            assign[i] = b;
            rec(i + 1, std::max(max_used, b));
        }
    };
    rec(0, -1);
    return best;
}

}  // namespace zql
