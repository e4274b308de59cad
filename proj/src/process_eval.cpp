#include "zql/process_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "zql/errors.hpp"
#include "zql/exact_sum.hpp"

namespace zql {

void CacheSim::touch(const void* coll, std::size_t index, std::size_t bytes) {
    const Key key{coll, index};
    auto it = index_.find(key);
    if (it != index_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second);
        return;
    }
    ++loads_;
    while (used_ + bytes > capacity_ && !lru_.empty()) {
        auto& back = lru_.back();
        used_ -= back.second;
        index_.erase(back.first);
        lru_.pop_back();
    }
    lru_.emplace_front(key, bytes);
    index_[key] = lru_.begin();
    used_ += bytes;
}

namespace {

// Combinations absent from the backend result are not iterated: touching an
// empty materialized cell skips the enclosing candidate instead of failing.
struct EmptyCellSkip {};

std::size_t cell_bytes(const UnitViz& cell) {
    return sizeof(UnitViz) + cell.series.size() * (sizeof(Value) + sizeof(double)) +
           cell.bins2d.size() * sizeof(std::tuple<double, double, double>);
}

struct Evaluator {
    const ProcessDecl& decl;
    ProcessEnv& env;
    // current position per group id
    std::map<int, std::size_t> positions;

    const VisCollection& collection(const std::string& name) const {
        auto it = env.collections.find(name);
        if (it == env.collections.end() || !it->second)
            throw ZqlError(ErrorStage::Execute, ErrorKind::UndefinedVariable,
                           "collection '" + name + "' is not materialized");
        return *it->second;
    }

    const std::vector<ValueTuple>& domain(int group) const {
        auto it = env.group_domains.find(group);
        if (it == env.group_domains.end())
            throw ZqlError(ErrorStage::Execute, ErrorKind::MisalignedAxes,
                           "iteration domain for group " + std::to_string(group) +
                               " is not resolved");
        return it->second;
    }

    int group_of(const std::string& var) const {
        auto it = env.vq->vars.find(var);
        if (it == env.vq->vars.end())
            throw ZqlError(ErrorStage::Execute, ErrorKind::UndefinedVariable,
                           "unknown variable '" + var + "'");
        return it->second.group;
    }

    const UnitViz& cell(const std::string& name) const {
        const VisCollection& coll = collection(name);
        std::size_t idx = 0;
        for (const auto& axis : coll.axes) {
            std::size_t pos = 0;
            auto it = positions.find(axis.group);
            if (it != positions.end()) {
                pos = it->second;
            } else if (axis.tuples.size() != 1) {
                throw ZqlError(ErrorStage::Execute, ErrorKind::MisalignedAxes,
                               "axis of '" + name + "' is not iterated and not a singleton");
            }
            idx = idx * axis.tuples.size() + pos;
        }
        const UnitViz& c = coll.cells[idx];
        if (env.cache) env.cache->touch(&coll, idx, cell_bytes(c));
        if (c.materialized && c.series.empty() && c.bins2d.empty()) throw EmptyCellSkip{};
        return c;
    }

    std::string loop_context() const {
        std::ostringstream os;
        bool first = true;
        for (const auto& [group, pos] : positions) {
            const VarGroup& g = env.vq->groups[group];
            const auto& dom = domain(group);
            for (std::size_t c = 0; c < g.vars.size(); ++c) {
                if (g.vars[c].empty()) continue;
                os << (first ? "" : ", ") << g.vars[c] << "=" << value_to_string(dom[pos][c]);
                first = false;
            }
        }
        return os.str();
    }

    double eval(const ProcExpr& e) {
        switch (e.kind) {
            case ProcExpr::Kind::T:
                return env.registry->trend()(cell(e.name1));
            case ProcExpr::Kind::D:
                return env.registry->distance()(cell(e.name1), cell(e.name2));
            case ProcExpr::Kind::Arith: {
                const double a = eval(*e.a);
                const double b = eval(*e.b);
                switch (e.arith) {
                    case '+': return a + b;
                    case '-': return a - b;
                    case '*': return a * b;
                    default: return a / b;
                }
            }
            case ProcExpr::Kind::Plug: {
                std::vector<double> args;
                for (const auto& a : e.args) {
                    if (a.kind == PlugArg::Kind::Number) args.push_back(a.number);
                    else if (a.kind == PlugArg::Kind::Expr) args.push_back(eval(*a.expr));
                    else {
                        const int g = group_of(a.ident);
                        const VarBinding b = env.vq->vars.at(a.ident);
                        const Value& v = domain(g)[positions.at(g)][b.comp];
                        if (!is_numeric(v))
                            throw ZqlError(ErrorStage::Execute, ErrorKind::UnknownPrimitive,
                                           "argument '" + a.ident + "' is not numeric");
                        args.push_back(as_double(v));
                    }
                }
                return env.registry->scalar(e.fn)(args);
            }
            case ProcExpr::Kind::Reduce: {
                const int g = group_of(e.reduce_var);
                const auto& dom = domain(g);
                if (dom.empty()) {
                    if (e.rop == ReduceOp::Sum) return 0.0;
                    if (e.rop == ReduceOp::Prod) return 1.0;
                    throw ZqlError(ErrorStage::Execute, ErrorKind::MisalignedAxes,
                                   "max/min over the empty domain of '" + e.reduce_var + "'");
                }
                ExactSum sum;
                double acc = 0;
                bool first = true;
                std::size_t contributed = 0;
                for (std::size_t i = 0; i < dom.size(); ++i) {
                    positions[g] = i;
                    double v;
                    try {
                        v = eval(*e.a);
                    } catch (const EmptyCellSkip&) {
                        continue;  // combination absent from the data
                    }
                    switch (e.rop) {
                        case ReduceOp::Sum: sum.add(v); break;
                        case ReduceOp::Prod: acc = first ? v : acc * v; break;
                        case ReduceOp::Max: acc = first ? v : std::max(acc, v); break;
                        case ReduceOp::Min: acc = first ? v : std::min(acc, v); break;
                    }
                    first = false;
                    ++contributed;
                }
                positions.erase(g);
                if (contributed == 0) throw EmptyCellSkip{};
                return e.rop == ReduceOp::Sum ? sum.value() : acc;
            }
        }
        return 0;
    }
};

// Distinct groups of the optimized variables, in first-listed order, plus
// the flattened (group, component) source of each output slot.
struct OptLayout {
    std::vector<int> groups;
    std::vector<std::pair<int, int>> slots;  // per output: (group, comp)
};

OptLayout opt_layout(const ProcessDecl& decl, const ValidatedQuery& vq) {
    OptLayout layout;
    for (const auto& var : decl.opt_vars) {
        const VarBinding b = vq.vars.at(var);
        if (std::find(layout.groups.begin(), layout.groups.end(), b.group) == layout.groups.end())
            layout.groups.push_back(b.group);
        layout.slots.emplace_back(b.group, b.comp);
    }
    return layout;
}

ValueTuple flatten(const OptLayout& layout, const std::map<int, std::size_t>& positions,
                   const ProcessEnv& env) {
    ValueTuple out;
    out.reserve(layout.slots.size());
    for (const auto& [group, comp] : layout.slots)
        out.push_back(env.group_domains.at(group)[positions.at(group)][comp]);
    return out;
}

ProcessOutputs eval_selector_plug(const ProcessDecl& decl, ProcessEnv& env) {
    // R(k, var, collection)
    const std::size_t k = static_cast<std::size_t>(decl.plug_args[0].number);
    const std::string& var = decl.plug_args[1].ident;
    const std::string& coll_name = decl.plug_args[2].ident;
    const VisCollection& coll = *env.collections.at(coll_name);
    const VarBinding b = env.vq->vars.at(var);
    const auto& dom = env.group_domains.at(b.group);

    // the var's axis must be the only non-singleton dimension
    int var_axis = -1;
    for (std::size_t ai = 0; ai < coll.axes.size(); ++ai) {
        if (coll.axes[ai].group == b.group) var_axis = static_cast<int>(ai);
        else if (coll.axes[ai].tuples.size() != 1)
            throw ZqlError(ErrorStage::Execute, ErrorKind::MisalignedAxes,
                           "R needs a collection iterated over '" + var + "' alone");
    }
    if (var_axis < 0)
        throw ZqlError(ErrorStage::Execute, ErrorKind::MisalignedAxes,
                       "collection does not iterate over '" + var + "'");

    std::vector<const UnitViz*> cells;
    std::vector<std::size_t> positions;
    for (std::size_t p = 0; p < coll.axes[var_axis].tuples.size(); ++p) {
        std::vector<std::size_t> pos(coll.axes.size(), 0);
        pos[static_cast<std::size_t>(var_axis)] = p;
        const std::size_t i = coll.flat_index(pos);
        const UnitViz& c = coll.cells[i];
        if (env.cache) env.cache->touch(&coll, i, cell_bytes(c));
        if (c.materialized && c.series.empty() && c.bins2d.empty()) continue;
        cells.push_back(&c);
        positions.push_back(p);
    }
    auto picked = r_representatives(k, cells, env.registry->distance());
    ProcessOutputs out;
    for (std::size_t idx : picked) out.tuples.push_back({dom[positions[idx]][b.comp]});
    return out;
}

}  // namespace

std::vector<std::pair<ValueTuple, double>> score_process(const ProcessDecl& decl,
                                                         ProcessEnv& env) {
    Evaluator ev{decl, env, {}};
    const OptLayout layout = opt_layout(decl, *env.vq);

    std::vector<std::pair<ValueTuple, double>> scored;
    std::vector<std::size_t> sizes;
    std::size_t total = 1;
    for (int g : layout.groups) {
        sizes.push_back(ev.domain(g).size());
        total *= sizes.back();
    }
    if (total == 0) return scored;
    scored.reserve(total);

    std::vector<std::size_t> pos(layout.groups.size(), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (std::size_t gi = layout.groups.size(); gi-- > 0;) {
            pos[gi] = rem % sizes[gi];
            rem /= sizes[gi];
        }
        ev.positions.clear();
        for (std::size_t gi = 0; gi < layout.groups.size(); ++gi)
            ev.positions[layout.groups[gi]] = pos[gi];
        double score;
        try {
            score = ev.eval(*decl.body);
        } catch (const EmptyCellSkip&) {
            continue;  // candidate has no data behind it
        } catch (const ZqlError& e) {
            if (e.kind() == ErrorKind::SeriesTooShort || e.kind() == ErrorKind::InsufficientOverlap)
                throw ZqlError(e.stage(), e.kind(),
                               std::string(e.what()) + " [at " + ev.loop_context() + "]");
            throw;
        }
        scored.emplace_back(flatten(layout, ev.positions, env), score);
    }
    return scored;
}

std::vector<ValueTuple> apply_limiter(std::vector<std::pair<ValueTuple, double>> scored,
                                      ArgOpt argopt, const Limiter& limiter) {
    if (argopt != ArgOpt::ArgAny) {
        const bool desc = argopt == ArgOpt::ArgMax;
        std::stable_sort(scored.begin(), scored.end(), [desc](const auto& a, const auto& b) {
            return desc ? a.second > b.second : a.second < b.second;
        });
    }
    std::vector<ValueTuple> out;
    switch (limiter.kind) {
        case Limiter::Kind::K: {
            std::size_t k = limiter.k ? static_cast<std::size_t>(*limiter.k) : scored.size();
            k = std::min(k, scored.size());
            for (std::size_t i = 0; i < k; ++i) out.push_back(std::move(scored[i].first));
            break;
        }
        case Limiter::Kind::Threshold: {
            PredAtom atom{"", limiter.cmp, {Value{limiter.threshold}}};
            for (auto& [tuple, score] : scored)
                if (atom_matches(atom, Value{score})) out.push_back(std::move(tuple));
            break;
        }
        case Limiter::Kind::Percentile: {
            const std::size_t k = static_cast<std::size_t>(
                std::ceil(limiter.percentile / 100.0 * static_cast<double>(scored.size())));
            for (std::size_t i = 0; i < std::min(k, scored.size()); ++i)
                out.push_back(std::move(scored[i].first));
            break;
        }
    }
    return out;
}

ProcessOutputs eval_process(const ProcessDecl& decl, ProcessEnv& env) {
    if (decl.is_plug_form) return eval_selector_plug(decl, env);
    ProcessOutputs out;
    out.tuples = apply_limiter(score_process(decl, env), decl.argopt, decl.limiter);
    return out;
}

std::size_t default_block_bytes() {
    if (const char* e = std::getenv("ZQL_L3_BYTES")) {
        const long long v = std::atoll(e);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 8u << 20;  // 8 MiB
}

ProcessOutputs cache_aware_eval(const ProcessDecl& decl, ProcessEnv& env,
                                std::size_t block_bytes) {
    if (block_bytes == 0)
        throw ZqlError(ErrorStage::Execute, ErrorKind::BadK, "block size must be positive");
    if (decl.is_plug_form) return eval_selector_plug(decl, env);

    // Tile the outer opt loop against the outermost reduce loop; everything
    // else evaluates in natural order inside the tile. Without a reduce loop
    // there is one pass over the data and nothing to tile.
    const OptLayout layout = opt_layout(decl, *env.vq);
    const ProcExpr* body = decl.body.get();
    if (layout.groups.size() != 1 || body->kind != ProcExpr::Kind::Reduce) {
        Evaluator probe{decl, env, {}};
        return eval_process(decl, env);
    }

    const int outer_g = layout.groups[0];
    Evaluator ev{decl, env, {}};
    const auto& outer_dom = ev.domain(outer_g);
    const int inner_g = ev.group_of(body->reduce_var);
    const auto& inner_dom = ev.domain(inner_g);
    if (inner_dom.empty() || outer_dom.empty()) return eval_process(decl, env);

    // Block length: half the cells that fit in block_bytes per side, at
    // least 1.
    std::size_t bytes_per_cell = 64;
    for (const auto& [name, coll] : env.collections)
        if (coll && !coll->cells.empty()) {
            bytes_per_cell = std::max(bytes_per_cell, cell_bytes(coll->cells.front()));
        }
    std::size_t block = std::max<std::size_t>(1, block_bytes / bytes_per_cell / 2);

    const std::size_t n = outer_dom.size();
    const std::size_t m = inner_dom.size();

    struct Acc {
        ExactSum sum;
        double acc = 0;
        bool first = true;
        std::size_t contributed = 0;
    };
    std::vector<Acc> accs(n);

    for (std::size_t bi = 0; bi < n; bi += block) {
        const std::size_t ei = std::min(n, bi + block);
        for (std::size_t bj = 0; bj < m; bj += block) {
            const std::size_t ej = std::min(m, bj + block);
            for (std::size_t i = bi; i < ei; ++i) {
                for (std::size_t j = bj; j < ej; ++j) {
                    ev.positions.clear();
                    ev.positions[outer_g] = i;
                    ev.positions[inner_g] = j;
                    double v;
                    try {
                        v = ev.eval(*body->a);
                    } catch (const EmptyCellSkip&) {
                        continue;
                    }
                    Acc& a = accs[i];
                    switch (body->rop) {
                        case ReduceOp::Sum: a.sum.add(v); break;
                        case ReduceOp::Prod: a.acc = a.first ? v : a.acc * v; break;
                        case ReduceOp::Max: a.acc = a.first ? v : std::max(a.acc, v); break;
                        case ReduceOp::Min: a.acc = a.first ? v : std::min(a.acc, v); break;
                    }
                    a.first = false;
                    ++a.contributed;
                }
            }
        }
    }

    std::vector<std::pair<ValueTuple, double>> scored;
    scored.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (accs[i].contributed == 0 && !inner_dom.empty()) continue;
        std::map<int, std::size_t> positions{{outer_g, i}};
        scored.emplace_back(flatten(layout, positions, env),
                            body->rop == ReduceOp::Sum ? accs[i].sum.value() : accs[i].acc);
    }
    ProcessOutputs out;
    out.tuples = apply_limiter(std::move(scored), decl.argopt, decl.limiter);
    return out;
}

}  // namespace zql
