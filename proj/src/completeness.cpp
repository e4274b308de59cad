#include "zql/completeness.hpp"

#include <algorithm>
#include <sstream>

#include "zql/errors.hpp"
#include "zql/parser.hpp"

namespace zql {

namespace {

std::string quote(const Value& v) {
    if (is_numeric(v)) return value_to_string(v);
    return "'" + value_to_string(v) + "'";
}

// Builds the pipe-delimited query text row by row.
class QueryBuilder {
public:
    explicit QueryBuilder(const std::vector<std::string>& attrs) : attrs_(attrs) {
        std::ostringstream os;
        os << "name | x | y";
        for (std::size_t i = 0; i < attrs.size(); ++i) os << " | z" << (i + 1);
        os << " | viz | process";
        header_ = os.str();
    }

    std::string fresh(const std::string& stem) { return stem + std::to_string(++counter_); }

    struct Row {
        std::string name, x, y, viz, process;
        std::vector<std::string> z;
    };

    void add(Row row) {
        row.z.resize(attrs_.size());
        rows_.push_back(std::move(row));
    }

    std::size_t attr_count() const { return attrs_.size(); }
    int slot(const std::string& attr) const {
        for (std::size_t i = 0; i < attrs_.size(); ++i)
            if (attrs_[i] == attr) return static_cast<int>(i);
        return -1;
    }
    const std::string& attr(int slot) const { return attrs_[static_cast<std::size_t>(slot)]; }

    std::string text() const {
        std::ostringstream os;
        os << header_ << "\n";
        for (const auto& r : rows_) {
            os << r.name << " | " << r.x << " | " << r.y;
            for (const auto& z : r.z) os << " | " << z;
            os << " | " << r.viz << " | " << r.process << "\n";
        }
        return os.str();
    }

    // Encodes a visual group: one row per source plus the concatenation.
    std::string encode_group(const VisualGroup& g, const std::string& stem) {
        std::vector<std::string> parts;
        for (const auto& s : g.sources) {
            Row row;
            row.name = fresh(stem);
            row.x = quote(Value{s.x});
            row.y = quote(Value{s.y});
            row.z.resize(attrs_.size());
            for (std::size_t i = 0; i < attrs_.size(); ++i)
                if (!is_star(s.selectors[i]))
                    row.z[i] = quote(Value{attrs_[i]}) + "." + quote(s.selectors[i]);
            parts.push_back(row.name);
            add(std::move(row));
        }
        Row concat;
        concat.name = fresh(stem);
        std::string expr = parts.front();
        for (std::size_t i = 1; i < parts.size(); ++i) expr += "+" + parts[i];
        const std::string name = concat.name;
        concat.name = name + " <-- " + expr;
        add(std::move(concat));
        return name;
    }

    // Rebind row: derives `from` and binds fresh variables to the requested
    // components ("X", "Y", or attribute names). Returns the new collection
    // name and the bound variable per component.
    std::pair<std::string, std::map<std::string, std::string>> rebind(
        const std::string& from, const std::vector<std::string>& components) {
        Row row;
        const std::string name = fresh("h");
        row.name = name + " <-- " + from;
        std::map<std::string, std::string> vars;
        for (const auto& c : components) {
            const std::string v = fresh("w");
            vars[c] = v;
            if (c == "X") row.x = v + " <-- _";
            else if (c == "Y") row.y = v + " <-- _";
            else {
                row.z.resize(attrs_.size());
                const int s = slot(c);
                row.z[static_cast<std::size_t>(s)] = v + " <-- " + quote(Value{c}) + "._";
            }
        }
        row.z.resize(attrs_.size());
        for (const auto& c : components) {
            if (c == "X" || c == "Y") continue;
            const int s = slot(c);
            row.z[static_cast<std::size_t>(s)] = vars[c] + " <-- " + quote(Value{c}) + "._";
        }
        add(std::move(row));
        return {name, vars};
    }

private:
    std::vector<std::string> attrs_;
    std::string header_;
    std::vector<Row> rows_;
    int counter_ = 0;
};

std::vector<std::string> all_components(const std::vector<std::string>& attrs) {
    std::vector<std::string> comps = {"X", "Y"};
    comps.insert(comps.end(), attrs.begin(), attrs.end());
    return comps;
}

}  // namespace

CompletenessHarness::CompletenessHarness(const ColumnTable& table, AttributeCatalog catalog,
                                         ExecStrategy strategy)
    : table_(&table), catalog_(catalog), ctx_(table, catalog), strategy_(strategy) {}

VisualGroup CompletenessHarness::run_query(const std::string& text) const {
    ZqlQuery q = parse_query(text);
    ValidatedQuery vq = validate(q, catalog_, SchemaInfo::from_table(*table_));
    Engine engine(*table_);
    RunOutput out = engine.run(vq, strategy_);
    const VisCollection& coll = out.results.outputs.back().second;

    VisualGroup g;
    for (const UnitViz& cell : coll.cells) {
        VisualSource s;
        s.x = cell.x_attr;
        s.y = cell.y_attr;
        s.selectors.assign(ctx_.attributes().size(), Value{Star{}});
        for (const auto& [attr, v] : cell.bindings)
            for (std::size_t i = 0; i < ctx_.attributes().size(); ++i)
                if (ctx_.attributes()[i] == attr) s.selectors[i] = v;
        g.sources.push_back(std::move(s));
    }
    return g;
}

CompletenessHarness::Outcome CompletenessHarness::compare(const std::string& op,
                                                          const std::string& query,
                                                          const VisualGroup& expected) const {
    Outcome o;
    o.op = op;
    o.query = query;
    VisualGroup got;
    try {
        got = run_query(query);
    } catch (const std::exception& e) {
        o.detail = std::string("execution failed: ") + e.what();
        return o;
    }
    if (got.size() != expected.size()) {
        o.detail = "size mismatch: got " + std::to_string(got.size()) + ", expected " +
                   std::to_string(expected.size());
        return o;
    }
    for (std::size_t i = 0; i < got.sources.size(); ++i) {
        if (!(got.sources[i] == expected.sources[i])) {
            o.detail = "first mismatch at position " + std::to_string(i + 1);
            return o;
        }
    }
    o.pass = true;
    return o;
}

// ---------- individual constructions ----------

CompletenessHarness::Outcome CompletenessHarness::check_sel(const VisualGroup& v,
                                                            const SelCond& theta) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");

    // recursively build the filtering collection for theta
    std::function<std::string(const SelCond&)> filter = [&](const SelCond& c) -> std::string {
        if (c.kind == SelCond::Kind::And || c.kind == SelCond::Kind::Or) {
            const std::string fa = filter(*c.a);
            const std::string fb = filter(*c.b);
            QueryBuilder::Row row;
            const std::string name = qb.fresh("h");
            row.name = name + " <-- " + fa + (c.kind == SelCond::Kind::And ? "^" : "+") + fb;
            qb.add(std::move(row));
            return name;
        }
        // atoms: rebind the operand, then build the filter row
        const std::vector<std::string> attrs = ctx_.attributes();
        if (c.attr == "X" || c.attr == "Y") {
            auto comps = all_components(attrs);
            if (!c.negated)
                comps.erase(std::find(comps.begin(), comps.end(), c.attr));
            auto [h, vars] = qb.rebind(g1, comps);
            QueryBuilder::Row row;
            row.name = qb.fresh("h");
            row.z.resize(attrs.size());
            for (const auto& a : attrs)
                row.z[static_cast<std::size_t>(qb.slot(a))] = vars[a];
            if (c.attr == "X") {
                row.y = vars["Y"];
                row.x = c.negated ? qb.fresh("w") + " <-- " + vars["X"] + " - {" + quote(c.value) + "}"
                                  : quote(c.value);
            } else {
                row.x = vars["X"];
                row.y = c.negated ? qb.fresh("w") + " <-- " + vars["Y"] + " - {" + quote(c.value) + "}"
                                  : quote(c.value);
            }
            const std::string name = row.name;
            qb.add(std::move(row));
            return name;
        }
        // attribute atom
        const int s = qb.slot(c.attr);
        auto comps = all_components(attrs);
        const bool star = is_star(c.value);
        if (!c.negated || star) {
            // =B2', =*, and !=* all leave the attribute out of the rebind
            comps.erase(std::find(comps.begin(), comps.end(), c.attr));
        }
        auto [h, vars] = qb.rebind(g1, comps);
        QueryBuilder::Row row;
        row.name = qb.fresh("h");
        row.x = vars["X"];
        row.y = vars["Y"];
        row.z.resize(attrs.size());
        for (const auto& a : attrs)
            if (vars.count(a)) row.z[static_cast<std::size_t>(qb.slot(a))] = vars[a];
        if (!c.negated && !star) {
            row.z[static_cast<std::size_t>(s)] = quote(Value{c.attr}) + "." + quote(c.value);
        } else if (!c.negated && star) {
            row.z[static_cast<std::size_t>(s)] = "";  // explicitly unconstrained
        } else if (c.negated && star) {
            row.z[static_cast<std::size_t>(s)] =
                qb.fresh("w") + " <-- " + quote(Value{c.attr}) + ".*";
        } else {
            row.z[static_cast<std::size_t>(s)] =
                qb.fresh("w") + " <-- " + vars[c.attr] + " - {" + quote(c.value) + "}";
        }
        const std::string name = row.name;
        qb.add(std::move(row));
        return name;
    };

    const std::string f = filter(theta);
    QueryBuilder::Row out;
    out.name = "*out <-- " + g1 + "^" + f;
    qb.add(std::move(out));
    return compare("sel", qb.text(), ctx_.sel_v(v, theta));
}

CompletenessHarness::Outcome CompletenessHarness::check_sort(const VisualGroup& v,
                                                             bool negate) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    auto comps = all_components(ctx_.attributes());
    auto [h, vars] = qb.rebind(g1, comps);
    // attach the sorting process to the rebind row
    std::vector<std::string> opt, outs;
    for (const auto& c : comps) opt.push_back(vars[c]);
    for (std::size_t i = 0; i < comps.size(); ++i) outs.push_back("o" + std::to_string(i + 1));
    {
        // rewrite the process cell of the last row added (the rebind row)
        std::ostringstream proc;
        for (std::size_t i = 0; i < outs.size(); ++i) proc << (i ? ", " : "") << outs[i];
        proc << " <-- argmin_{";
        for (std::size_t i = 0; i < opt.size(); ++i) proc << (i ? ", " : "") << opt[i];
        proc << "}[k=inf] " << (negate ? "neg(T(" + h + "))" : "T(" + h + ")");
        QueryBuilder::Row row;
        row.name = qb.fresh("h") + " <-- " + h;
        row.process = proc.str();
        qb.add(std::move(row));
    }
    QueryBuilder::Row out;
    out.name = "*out";
    out.x = outs[0];
    out.y = outs[1];
    out.z.resize(ctx_.attributes().size());
    for (std::size_t i = 0; i < ctx_.attributes().size(); ++i) out.z[i] = outs[2 + i];
    qb.add(std::move(out));

    VeaContext::TrendScore f = negate ? VeaContext::TrendScore([](double t) { return -t; })
                                      : VeaContext::TrendScore();
    return compare("sort", qb.text(), ctx_.sort_v(v, f));
}

CompletenessHarness::Outcome CompletenessHarness::check_limit_k(const VisualGroup& v,
                                                                int64_t k) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    QueryBuilder::Row out;
    out.name = "*out <-- " + g1 + "[1:" + std::to_string(k) + "]";
    qb.add(std::move(out));
    return compare("limit", qb.text(), ctx_.limit_v(v, k));
}

CompletenessHarness::Outcome CompletenessHarness::check_limit_slice(const VisualGroup& v,
                                                                    int64_t from,
                                                                    int64_t to) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    QueryBuilder::Row out;
    out.name = "*out <-- " + g1 + "[" + std::to_string(from) + ":" + std::to_string(to) + "]";
    qb.add(std::move(out));
    return compare("limit-slice", qb.text(), ctx_.limit_v(v, from, to));
}

CompletenessHarness::Outcome CompletenessHarness::check_dedup(const VisualGroup& v) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    QueryBuilder::Row out;
    out.name = "*out <-- " + g1 + ".uniq";
    qb.add(std::move(out));
    return compare("dedup", qb.text(), ctx_.dedup_v(v));
}

CompletenessHarness::Outcome CompletenessHarness::check_union(const VisualGroup& v,
                                                              const VisualGroup& u) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    const std::string g2 = qb.encode_group(u, "gb");
    QueryBuilder::Row out;
    out.name = "*out <-- " + g1 + "+" + g2;
    qb.add(std::move(out));
    return compare("union", qb.text(), ctx_.union_v(v, u));
}

CompletenessHarness::Outcome CompletenessHarness::check_diff(const VisualGroup& v,
                                                             const VisualGroup& u) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    const std::string g2 = qb.encode_group(u, "gb");
    QueryBuilder::Row out;
    out.name = "*out <-- " + g1 + "-" + g2;
    qb.add(std::move(out));
    return compare("diff", qb.text(), ctx_.diff_v(v, u));
}

CompletenessHarness::Outcome CompletenessHarness::check_intersect(const VisualGroup& v,
                                                                  const VisualGroup& u) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    const std::string g2 = qb.encode_group(u, "gb");
    QueryBuilder::Row out;
    out.name = "*out <-- " + g1 + "^" + g2;
    qb.add(std::move(out));
    return compare("intersect", qb.text(), ctx_.intersect_v(v, u));
}

CompletenessHarness::Outcome CompletenessHarness::check_swap(const VisualGroup& v,
                                                             const VisualGroup& u,
                                                             const std::string& attr) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    const std::string g2 = qb.encode_group(u, "gb");

    auto comps = all_components(ctx_.attributes());
    comps.erase(std::find(comps.begin(), comps.end(), attr));
    auto [h1, vars1] = qb.rebind(g1, comps);
    auto [h2, vars2] = qb.rebind(g2, {attr});

    QueryBuilder::Row out;
    out.name = "*out";
    out.z.resize(ctx_.attributes().size());
    const std::string donor = vars2[attr] + "^2";
    if (attr == "X") out.x = donor;
    else out.x = vars1["X"] + "^1";
    if (attr == "Y") out.y = donor;
    else out.y = vars1["Y"] + "^1";
    for (const auto& a : ctx_.attributes()) {
        const auto s = static_cast<std::size_t>(qb.slot(a));
        out.z[s] = a == attr ? donor : vars1[a] + "^1";
    }
    qb.add(std::move(out));
    return compare("swap", qb.text(), ctx_.swap_v(v, u, attr));
}

CompletenessHarness::Outcome CompletenessHarness::check_dist(
    const VisualGroup& v, const VisualGroup& u, const std::vector<std::string>& match) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    const std::string g2 = qb.encode_group(u, "gb");

    auto [h1, vars] = qb.rebind(g1, match);

    // reorder g2 to h1's match order, then score the aligned pairs
    QueryBuilder::Row r2;
    const std::string h2 = qb.fresh("h");
    r2.name = h2 + " <-- " + g2 + ".order";
    r2.z.resize(ctx_.attributes().size());
    std::vector<std::string> outs;
    for (std::size_t i = 0; i < match.size(); ++i) outs.push_back("o" + std::to_string(i + 1));
    for (const auto& a : match)
        r2.z[static_cast<std::size_t>(qb.slot(a))] = vars[a] + " -->";
    {
        std::ostringstream proc;
        for (std::size_t i = 0; i < outs.size(); ++i) proc << (i ? ", " : "") << outs[i];
        proc << " <-- argmin_{";
        for (std::size_t i = 0; i < match.size(); ++i) proc << (i ? ", " : "") << vars[match[i]];
        proc << "}[k=inf] D(" << h1 << ", " << h2 << ")";
        r2.process = proc.str();
    }
    qb.add(std::move(r2));

    QueryBuilder::Row out;
    out.name = "*out <-- " + g1 + ".order";
    out.z.resize(ctx_.attributes().size());
    for (std::size_t i = 0; i < match.size(); ++i)
        out.z[static_cast<std::size_t>(qb.slot(match[i]))] = outs[i] + " -->";
    qb.add(std::move(out));
    return compare("dist", qb.text(), ctx_.dist_v(v, u, match));
}

CompletenessHarness::Outcome CompletenessHarness::check_find(const VisualGroup& v,
                                                             const VisualGroup& u) const {
    QueryBuilder qb(ctx_.attributes());
    const std::string g1 = qb.encode_group(v, "ga");
    const std::string g2 = qb.encode_group(u, "gb");

    auto comps = all_components(ctx_.attributes());
    auto [h1, vars] = qb.rebind(g1, comps);
    std::vector<std::string> outs;
    for (std::size_t i = 0; i < comps.size(); ++i) outs.push_back("o" + std::to_string(i + 1));
    {
        std::ostringstream proc;
        for (std::size_t i = 0; i < outs.size(); ++i) proc << (i ? ", " : "") << outs[i];
        proc << " <-- argmin_{";
        for (std::size_t i = 0; i < comps.size(); ++i) proc << (i ? ", " : "") << vars[comps[i]];
        proc << "}[k=inf] D(" << h1 << ", " << g2 << ")";
        QueryBuilder::Row row;
        row.name = qb.fresh("h") + " <-- " + h1;
        row.process = proc.str();
        qb.add(std::move(row));
    }
    QueryBuilder::Row out;
    out.name = "*out";
    out.x = outs[0];
    out.y = outs[1];
    out.z.resize(ctx_.attributes().size());
    for (std::size_t i = 0; i < ctx_.attributes().size(); ++i) out.z[i] = outs[2 + i];
    qb.add(std::move(out));
    return compare("find", qb.text(), ctx_.find_v(v, u));
}

// ---------- generation ----------

ColumnTable random_small_relation(std::mt19937_64& rng) {
    const int n_dims = 2 + static_cast<int>(rng() % 2);   // 2..3
    const int n_meas = 1 + static_cast<int>(rng() % 2);   // 1..2
    std::vector<Column> cols;
    std::vector<int> dim_sizes;
    for (int d = 0; d < n_dims; ++d) {
        Column c{"d" + std::to_string(d + 1), ColumnKind::Categorical, {}, {}, {}};
        dim_sizes.push_back(2 + static_cast<int>(rng() % 4));  // 2..5 values
        cols.push_back(std::move(c));
    }
    for (int m = 0; m < n_meas; ++m)
        cols.push_back(Column{"m" + std::to_string(m + 1), ColumnKind::Measure, {}, {}, {}});

    // dense cross product of dimension values
    std::size_t rows = 1;
    for (int s : dim_sizes) rows *= static_cast<std::size_t>(s);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t rem = r;
        for (int d = 0; d < n_dims; ++d) {
            cols[static_cast<std::size_t>(d)].cat.push_back(
                "v" + std::to_string(rem % static_cast<std::size_t>(dim_sizes[d])));
            rem /= static_cast<std::size_t>(dim_sizes[d]);
        }
        for (int m = 0; m < n_meas; ++m)
            cols[static_cast<std::size_t>(n_dims + m)].num.push_back(
                static_cast<double>(1 + (rng() % 97)));
    }
    return ColumnTable("rel", std::move(cols));
}

AttributeCatalog catalog_for_small_relation(const ColumnTable& table) {
    AttributeCatalog cat;
    for (const auto& c : table.columns())
        if (c.is_dimension()) cat.x_eligible.push_back(c.name);
        else cat.y_eligible.push_back(c.name);
    return cat;
}

VisualGroup CompletenessHarness::random_group(std::mt19937_64& rng, std::size_t size,
                                              bool materializable) const {
    const auto& attrs = ctx_.attributes();
    VisualGroup g;
    const std::string x = catalog_.x_eligible[rng() % catalog_.x_eligible.size()];
    for (std::size_t i = 0; i < size; ++i) {
        VisualSource s;
        // materializable sources share one x attribute and keep it
        // unconstrained so every series has the full x extent
        s.x = materializable ? x : catalog_.x_eligible[rng() % catalog_.x_eligible.size()];
        s.y = catalog_.y_eligible[rng() % catalog_.y_eligible.size()];
        for (const auto& a : attrs) {
            const Column& col = table_->column(a);
            const bool is_x = a == s.x;
            const bool allow_value = !(materializable && (is_x || !col.is_dimension()));
            if (allow_value && rng() % 2 == 0) {
                const auto& vals = table_->distinct_values(a);
                s.selectors.push_back(vals[rng() % vals.size()]);
            } else {
                s.selectors.push_back(Value{Star{}});
            }
        }
        if (materializable) {
            // functional dependencies between dimensions can shrink a series
            // below the two points the primitives need; fall back to the
            // unconstrained slice in that case
            UnitViz probe = ctx_.materialize(s);
            if (probe.series.size() < 2)
                for (auto& sel : s.selectors) sel = Value{Star{}};
        }
        // occasional duplicates keep the bag semantics honest
        if (!g.sources.empty() && rng() % 5 == 0 && !materializable) {
            g.sources.push_back(g.sources[rng() % g.sources.size()]);
        } else {
            g.sources.push_back(std::move(s));
        }
    }
    return g;
}

std::vector<CompletenessHarness::Outcome> CompletenessHarness::run_all(std::mt19937_64& rng,
                                                                       int rounds) const {
    std::vector<Outcome> outcomes;
    const auto& attrs = ctx_.attributes();
    for (int round = 0; round < rounds; ++round) {
        VisualGroup v = random_group(rng, 3 + rng() % 4, false);
        VisualGroup u = random_group(rng, 2 + rng() % 3, false);
        VisualGroup mv = random_group(rng, 3 + rng() % 3, true);

        // selection: a full-mention conjunction, optionally disjoined with a
        // second one (the documented example shape)
        auto full_conjunction = [&]() {
            SelCond cond = SelCond::atom("X", false, Value{v.sources[0].x});
            cond = SelCond::conj(std::move(cond), SelCond::atom("Y", false, Value{v.sources[0].y}));
            for (std::size_t i = 0; i < attrs.size(); ++i) {
                const auto& vals = table_->distinct_values(attrs[i]);
                const int pick = static_cast<int>(rng() % 4);
                Value val = pick < 2 ? v.sources[rng() % v.sources.size()].selectors[i]
                            : pick == 2 ? Value{Star{}}
                                        : vals[rng() % vals.size()];
                cond = SelCond::conj(std::move(cond),
                                     SelCond::atom(attrs[i], rng() % 3 == 0, std::move(val)));
            }
            return cond;
        };
        SelCond theta = full_conjunction();
        if (rng() % 2) theta = SelCond::disj(std::move(theta), full_conjunction());
        outcomes.push_back(check_sel(v, theta));

        outcomes.push_back(check_sort(mv, round % 2 == 1));
        outcomes.push_back(check_limit_k(v, 1 + static_cast<int64_t>(rng() % v.size())));
        outcomes.push_back(check_limit_slice(v, 2, static_cast<int64_t>(v.size())));
        outcomes.push_back(check_dedup(v));
        outcomes.push_back(check_union(v, u));
        outcomes.push_back(check_diff(v, u));
        outcomes.push_back(check_intersect(v, u));

        const auto comps = all_components(attrs);
        outcomes.push_back(check_swap(v, u, comps[rng() % comps.size()]));

        // dist needs exactly-one-source-per-combination on both sides: use
        // one source per value of a dimension, matched on that dimension
        {
            const std::string d = attrs[0];
            const auto& vals = table_->distinct_values(d);
            VisualGroup mv2, mu2;
            for (const auto& val : vals) {
                VisualSource s;
                s.x = catalog_.x_eligible[1 % catalog_.x_eligible.size()];
                s.y = catalog_.y_eligible[0];
                s.selectors.assign(attrs.size(), Value{Star{}});
                s.selectors[0] = val;
                VisualSource t = s;
                t.y = catalog_.y_eligible[catalog_.y_eligible.size() - 1];
                mv2.sources.push_back(std::move(s));
                mu2.sources.push_back(std::move(t));
            }
            // shuffle u's order; matching is by attribute value
            for (std::size_t i = mu2.sources.size(); i > 1; --i)
                std::swap(mu2.sources[i - 1], mu2.sources[rng() % i]);
            outcomes.push_back(check_dist(mv2, mu2, {d}));
        }

        VisualGroup ref;
        ref.sources = {mv.sources[rng() % mv.sources.size()]};
        outcomes.push_back(check_find(mv, ref));
    }
    return outcomes;
}

}  // namespace zql
