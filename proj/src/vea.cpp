#include "zql/vea.hpp"

#include <algorithm>
#include <set>

#include "zql/errors.hpp"

namespace zql {

bool operator==(const VisualGroup& a, const VisualGroup& b) {
    if (a.sources.size() != b.sources.size()) return false;
    for (std::size_t i = 0; i < a.sources.size(); ++i)
        if (!(a.sources[i] == b.sources[i])) return false;
    return true;
}

SelCond SelCond::conj(SelCond x, SelCond y) {
    SelCond c;
    c.kind = Kind::And;
    c.a = std::make_shared<SelCond>(std::move(x));
    c.b = std::make_shared<SelCond>(std::move(y));
    return c;
}

SelCond SelCond::disj(SelCond x, SelCond y) {
    SelCond c;
    c.kind = Kind::Or;
    c.a = std::make_shared<SelCond>(std::move(x));
    c.b = std::make_shared<SelCond>(std::move(y));
    return c;
}

VeaContext::VeaContext(const ColumnTable& table, AttributeCatalog catalog,
                       PrimitiveRegistry registry, std::size_t universe_limit)
    : table_(&table),
      catalog_(std::move(catalog)),
      registry_(std::move(registry)),
      universe_limit_(universe_limit) {
    for (const auto& c : table.columns()) attrs_.push_back(c.name);
}

int VeaContext::attr_slot(const std::string& attr) const {
    for (std::size_t i = 0; i < attrs_.size(); ++i)
        if (attrs_[i] == attr) return static_cast<int>(i);
    return -1;
}

VisualGroup VeaContext::universe() const {
    std::size_t total = catalog_.x_eligible.size() * catalog_.y_eligible.size();
    std::vector<std::vector<Value>> domains;
    for (const auto& a : attrs_) {
        std::vector<Value> d = table_->distinct_values(a);
        d.push_back(Value{Star{}});
        total *= d.size();
        if (total > universe_limit_)
            throw ZqlError(ErrorStage::Execute, ErrorKind::UniverseTooLarge,
                           "visual universe exceeds " + std::to_string(universe_limit_) +
                               " sources; select with a bounding condition instead");
        domains.push_back(std::move(d));
    }

    VisualGroup out;
    out.sources.reserve(total);
    for (const auto& x : catalog_.x_eligible)
        for (const auto& y : catalog_.y_eligible) {
            std::vector<std::size_t> pos(domains.size(), 0);
            const std::size_t cells = [&] {
                std::size_t c = 1;
                for (const auto& d : domains) c *= d.size();
                return c;
            }();
            for (std::size_t flat = 0; flat < cells; ++flat) {
                std::size_t rem = flat;
                for (std::size_t i = domains.size(); i-- > 0;) {
                    pos[i] = rem % domains[i].size();
                    rem /= domains[i].size();
                }
                VisualSource s;
                s.x = x;
                s.y = y;
                for (std::size_t i = 0; i < domains.size(); ++i)
                    s.selectors.push_back(domains[i][pos[i]]);
                out.sources.push_back(std::move(s));
            }
        }
    return out;
}

UnitViz VeaContext::materialize(const VisualSource& s) const {
    UnitViz v;
    v.x_attr = s.x;
    v.y_attr = s.y;
    AggregateRequest req;
    req.x_attr = s.x;
    req.y_terms = {{s.y, AggFn::Sum}};
    Conjunction conj;
    for (std::size_t i = 0; i < attrs_.size(); ++i) {
        if (is_star(s.selectors[i])) continue;
        conj.push_back(PredAtom{attrs_[i], CmpOp::Eq, {s.selectors[i]}});
        v.set_binding(attrs_[i], s.selectors[i]);
    }
    if (!conj.empty()) req.where = Predicate::conjunction(conj);
    Backend backend(*table_);
    GroupedResult r = backend.execute(req);
    if (!r.groups.empty())
        for (const auto& pt : r.groups[0].second) v.series.emplace_back(pt.x, pt.ys[0]);
    v.materialized = true;
    return v;
}

namespace {

void mentioned_attrs(const SelCond& c, std::vector<std::string>& out) {
    if (c.kind == SelCond::Kind::Atom) {
        if (std::find(out.begin(), out.end(), c.attr) == out.end()) out.push_back(c.attr);
        return;
    }
    mentioned_attrs(*c.a, out);
    mentioned_attrs(*c.b, out);
}

void check_strict(const SelCond& c) {
    if (c.kind == SelCond::Kind::Atom) {
        if ((c.attr == "X" || c.attr == "Y") && is_star(c.value))
            throw ZqlError(ErrorStage::Execute, ErrorKind::IllegalOperator,
                           "strict mode: conditions on X/Y may not test the wildcard");
        return;
    }
    check_strict(*c.a);
    check_strict(*c.b);
}

}  // namespace

bool VeaContext::matches(const VisualSource& s, const SelCond& cond,
                         const std::vector<std::string>& mentioned) const {
    std::function<bool(const SelCond&)> eval = [&](const SelCond& c) -> bool {
        switch (c.kind) {
            case SelCond::Kind::And: return eval(*c.a) && eval(*c.b);
            case SelCond::Kind::Or: return eval(*c.a) || eval(*c.b);
            case SelCond::Kind::Atom: {
                Value actual;
                if (c.attr == "X") actual = Value{s.x};
                else if (c.attr == "Y") actual = Value{s.y};
                else {
                    const int slot = attr_slot(c.attr);
                    if (slot < 0)
                        throw ZqlError(ErrorStage::Execute, ErrorKind::UnknownAttribute,
                                       "no attribute named '" + c.attr + "'");
                    actual = s.selectors[static_cast<std::size_t>(slot)];
                }
                const bool eq = value_eq(actual, c.value);
                return c.negated ? !eq : eq;
            }
        }
        return false;
    };
    if (!eval(cond)) return false;
    // unmentioned attributes are implicitly = *
    for (std::size_t i = 0; i < attrs_.size(); ++i) {
        if (std::find(mentioned.begin(), mentioned.end(), attrs_[i]) != mentioned.end()) continue;
        if (!is_star(s.selectors[i])) return false;
    }
    return true;
}

VisualGroup VeaContext::sel_v(const VisualGroup& v, const SelCond& cond, bool strict) const {
    if (strict) check_strict(cond);
    std::vector<std::string> mentioned;
    mentioned_attrs(cond, mentioned);
    VisualGroup out;
    out.sources = bag::select<VisualSource>(
        v.sources, [&](const VisualSource& s) { return matches(s, cond, mentioned); });
    return out;
}

VisualGroup VeaContext::sort_v(const VisualGroup& v, const TrendScore& f) const {
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t i = 0; i < v.sources.size(); ++i) {
        const double t = registry_.trend()(materialize(v.sources[i]));
        keyed.emplace_back(f ? f(t) : t, i);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    VisualGroup out;
    for (const auto& [score, i] : keyed) out.sources.push_back(v.sources[i]);
    return out;
}

VisualGroup VeaContext::limit_v(const VisualGroup& v, int64_t k) const {
    VisualGroup out;
    out.sources = bag::slice(v.sources, 1, k);
    return out;
}

VisualGroup VeaContext::limit_v(const VisualGroup& v, int64_t from, int64_t to) const {
    VisualGroup out;
    out.sources = bag::slice(v.sources, from, to);
    return out;
}

namespace {
const bag::Eq<VisualSource> kSourceEq = [](const VisualSource& a, const VisualSource& b) {
    return a == b;
};
}  // namespace

VisualGroup VeaContext::dedup_v(const VisualGroup& v) const {
    VisualGroup out;
    out.sources = bag::dedup(v.sources, kSourceEq);
    return out;
}

VisualGroup VeaContext::union_v(const VisualGroup& v, const VisualGroup& u) const {
    VisualGroup out;
    out.sources = bag::unite(v.sources, u.sources);
    return out;
}

VisualGroup VeaContext::diff_v(const VisualGroup& v, const VisualGroup& u) const {
    VisualGroup out;
    out.sources = bag::diff(v.sources, u.sources, kSourceEq);
    return out;
}

VisualGroup VeaContext::intersect_v(const VisualGroup& v, const VisualGroup& u) const {
    VisualGroup out;
    out.sources = bag::intersect(v.sources, u.sources, kSourceEq);
    return out;
}

VisualGroup VeaContext::swap_v(const VisualGroup& v, const VisualGroup& u,
                               const std::string& attr) const {
    const int slot = attr == "X" ? -1 : attr == "Y" ? -2 : attr_slot(attr);
    if (attr != "X" && attr != "Y" && slot < 0)
        throw ZqlError(ErrorStage::Execute, ErrorKind::UnknownAttribute,
                       "no attribute named '" + attr + "'");
    // pi_{all but attr}(V) x pi_attr(U), nested left-major
    VisualGroup out;
    out.sources.reserve(v.sources.size() * u.sources.size());
    for (const auto& base : v.sources)
        for (const auto& donor : u.sources) {
            VisualSource s = base;
            if (attr == "X") s.x = donor.x;
            else if (attr == "Y") s.y = donor.y;
            else s.selectors[static_cast<std::size_t>(slot)] =
                     donor.selectors[static_cast<std::size_t>(slot)];
            out.sources.push_back(std::move(s));
        }
    return out;
}

VisualGroup VeaContext::dist_v(const VisualGroup& v, const VisualGroup& u,
                               const std::vector<std::string>& match_attrs,
                               const TrendScore& f) const {
    // distinct match combinations, in v's order
    std::vector<std::vector<Value>> combos;
    auto combo_of = [&](const VisualSource& s) {
        std::vector<Value> key;
        for (const auto& a : match_attrs) {
            if (a == "X") key.push_back(Value{s.x});
            else if (a == "Y") key.push_back(Value{s.y});
            else key.push_back(s.selectors[static_cast<std::size_t>(attr_slot(a))]);
        }
        return key;
    };
    for (const auto& s : v.sources) {
        auto key = combo_of(s);
        bool seen = false;
        for (const auto& c : combos)
            if (tuple_eq(c, key)) {
                seen = true;
                break;
            }
        if (!seen) combos.push_back(std::move(key));
    }

    std::vector<std::pair<double, std::size_t>> keyed;  // score, index into v
    for (const auto& combo : combos) {
        std::vector<std::size_t> vs, us;
        for (std::size_t i = 0; i < v.sources.size(); ++i)
            if (tuple_eq(combo_of(v.sources[i]), combo)) vs.push_back(i);
        for (std::size_t i = 0; i < u.sources.size(); ++i)
            if (tuple_eq(combo_of(u.sources[i]), combo)) us.push_back(i);
        if (vs.size() != 1 || us.size() != 1)
            throw ZqlError(ErrorStage::Execute, ErrorKind::UndefinedMatch,
                           "match combination selects " + std::to_string(vs.size()) + "/" +
                               std::to_string(us.size()) + " sources; need exactly one of each");
        const double d =
            registry_.distance()(materialize(v.sources[vs[0]]), materialize(u.sources[us[0]]));
        keyed.emplace_back(f ? f(d) : d, vs[0]);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    VisualGroup out;
    for (const auto& [score, i] : keyed) out.sources.push_back(v.sources[i]);
    return out;
}

VisualGroup VeaContext::find_v(const VisualGroup& v, const VisualGroup& u,
                               const TrendScore& f) const {
    if (u.sources.size() != 1)
        throw ZqlError(ErrorStage::Execute, ErrorKind::NonSingletonReference,
                       "reference group has " + std::to_string(u.sources.size()) +
                           " sources; need exactly one");
    const UnitViz ref = materialize(u.sources[0]);
    std::vector<std::pair<double, std::size_t>> keyed;
    for (std::size_t i = 0; i < v.sources.size(); ++i) {
        const double d = registry_.distance()(materialize(v.sources[i]), ref);
        keyed.emplace_back(f ? f(d) : d, i);
    }
    std::stable_sort(keyed.begin(), keyed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    VisualGroup out;
    for (const auto& [score, i] : keyed) out.sources.push_back(v.sources[i]);
    return out;
}

}  // namespace zql
