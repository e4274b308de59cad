#include "zql/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "zql/errors.hpp"

namespace zql {

const char* to_string(AggFn f) {
    switch (f) {
        case AggFn::Sum: return "SUM";
        case AggFn::Avg: return "AVG";
        case AggFn::Count: return "COUNT";
        case AggFn::Max: return "MAX";
        case AggFn::Min: return "MIN";
    }
    return "?";
}

std::optional<AggFn> agg_fn_from_string(const std::string& s) {
    std::string u;
    for (char c : s) u.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (u == "sum") return AggFn::Sum;
    if (u == "avg" || u == "mean") return AggFn::Avg;
    if (u == "count") return AggFn::Count;
    if (u == "max") return AggFn::Max;
    if (u == "min") return AggFn::Min;
    return std::nullopt;
}

Value bin_value(const Value& x, const std::optional<Binning>& binning, double lo, double hi) {
    if (!binning) return x;
    const double v = as_double(x);
    if (binning->mode == Binning::Mode::Width) {
        const double w = binning->width;
        return std::floor(v / w) * w;
    }
    const int n = binning->count;
    if (hi <= lo) return lo;
    const double w = (hi - lo) / n;
    int k = static_cast<int>(std::floor((v - lo) / w));
    if (k >= n) k = n - 1;  // the max lands in the last bucket
    if (k < 0) k = 0;
    return lo + k * w;
}

std::size_t attr_cardinality(const ColumnTable& table, const std::string& attr,
                             const std::optional<Binning>& binning) {
    if (binning && binning->mode == Binning::Mode::Count)
        return static_cast<std::size_t>(binning->count);
    if (binning) {
        std::set<Value, ValueLess> buckets;
        for (const Value& v : table.distinct_values(attr))
            buckets.insert(bin_value(v, binning, 0, 0));
        return buckets.size();
    }
    return table.distinct_values(attr).size();
}

const std::vector<SeriesPoint>* GroupedResult::find(const ValueTuple& key) const {
    auto it = std::lower_bound(groups.begin(), groups.end(), key,
                               [](const auto& g, const ValueTuple& k) { return tuple_less(g.first, k); });
    if (it != groups.end() && tuple_eq(it->first, key)) return &it->second;
    return nullptr;
}

bool operator==(const GroupedResult& a, const GroupedResult& b) {
    if (a.group_dims != b.group_dims || a.group_key_count != b.group_key_count ||
        a.group_value_count != b.group_value_count || a.groups.size() != b.groups.size())
        return false;
    for (std::size_t i = 0; i < a.groups.size(); ++i) {
        if (!tuple_eq(a.groups[i].first, b.groups[i].first)) return false;
        const auto& sa = a.groups[i].second;
        const auto& sb = b.groups[i].second;
        if (sa.size() != sb.size()) return false;
        for (std::size_t j = 0; j < sa.size(); ++j) {
            if (!value_eq(sa[j].x, sb[j].x) || sa[j].ys.size() != sb[j].ys.size()) return false;
            for (std::size_t t = 0; t < sa[j].ys.size(); ++t)
                if (sa[j].ys[t] != sb[j].ys[t]) return false;  // bit-for-bit
        }
    }
    return true;
}

void Backend::check_request(const AggregateRequest& req) const {
    const ColumnTable& t = *table_;
    if (!t.has_column(req.x_attr))
        throw ZqlError(ErrorStage::Execute, ErrorKind::UnknownAttribute,
                       "unknown x attribute '" + req.x_attr + "'");
    if (req.y_terms.empty())
        throw ZqlError(ErrorStage::Execute, ErrorKind::Internal, "request has no y terms");
    for (const auto& yt : req.y_terms) {
        const Column& c = t.column(yt.attr);
        if (yt.fn != AggFn::Count && c.kind == ColumnKind::Categorical)
            throw ZqlError(ErrorStage::Execute, ErrorKind::UnknownAttribute,
                           "aggregate " + std::string(to_string(yt.fn)) +
                               " needs a numeric column, got categorical '" + yt.attr + "'");
    }
    for (const auto& d : req.group_dims) {
        const Column& c = t.column(d.attr);
        if (d.attr == req.x_attr)
            throw ZqlError(ErrorStage::Execute, ErrorKind::Internal,
                           "x attribute repeated in group dims");
        if (d.binning && c.kind == ColumnKind::Categorical)
            throw ZqlError(ErrorStage::Execute, ErrorKind::BinningOnCategorical,
                           "cannot bin categorical column '" + d.attr + "'");
        if (!d.binning && c.kind == ColumnKind::Measure)
            throw ZqlError(ErrorStage::Execute, ErrorKind::Internal,
                           "grouping on measure '" + d.attr + "' requires binning");
    }
    if (req.x_binning && t.column(req.x_attr).kind == ColumnKind::Categorical)
        throw ZqlError(ErrorStage::Execute, ErrorKind::BinningOnCategorical,
                       "cannot bin categorical column '" + req.x_attr + "'");
    check_predicate(req.where, t);
}

namespace {

// [lo, hi] of an attribute over rows matching pred; nullopt when none match.
std::optional<std::pair<double, double>> matching_range(const ColumnTable& t,
                                                        const std::string& attr,
                                                        const Predicate& pred) {
    const Column& c = t.column(attr);
    bool any = false;
    double lo = 0, hi = 0;
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        if (!predicate_matches(pred, t, r)) continue;
        const double v = as_double(c.at(r));
        if (!any) { lo = hi = v; any = true; }
        else { lo = std::min(lo, v); hi = std::max(hi, v); }
    }
    if (!any) return std::nullopt;
    return std::make_pair(lo, hi);
}

}  // namespace

detail::AggTable Backend::execute_raw(const AggregateRequest& req) const {
    check_request(req);
    const ColumnTable& t = *table_;

    double xlo = 0, xhi = 0;
    if (req.x_binning && req.x_binning->mode == Binning::Mode::Count) {
        auto range = matching_range(t, req.x_attr, req.where);
        if (range) { xlo = range->first; xhi = range->second; }
    }

    detail::AggTable raw;
    raw.y_count = req.y_terms.size();
    for (const auto& d : req.group_dims) raw.dim_names.push_back(d.attr);

    const Column& xcol = t.column(req.x_attr);
    std::vector<const Column*> dim_cols;
    for (const auto& d : req.group_dims) dim_cols.push_back(&t.column(d.attr));
    std::vector<const Column*> y_cols;
    for (const auto& yt : req.y_terms) y_cols.push_back(&t.column(yt.attr));

    ValueTuple key(req.group_dims.size() + 1);
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        if (!predicate_matches(req.where, t, r)) continue;
        for (std::size_t d = 0; d < dim_cols.size(); ++d)
            key[d] = bin_value(dim_cols[d]->at(r), req.group_dims[d].binning, 0, 0);
        key.back() = bin_value(xcol.at(r), req.x_binning, xlo, xhi);
        auto [it, fresh] = raw.cells.try_emplace(key);
        if (fresh) it->second.resize(req.y_terms.size());
        for (std::size_t y = 0; y < y_cols.size(); ++y) {
            const Column& yc = *y_cols[y];
            const double v = yc.kind == ColumnKind::Categorical ? 0.0 : as_double(yc.at(r));
            it->second[y].add(v);
        }
    }
    return raw;
}

namespace detail {

GroupedResult finalize(const AggTable& raw, const AggregateRequest& req) {
    GroupedResult out;
    out.group_dims = raw.dim_names;
    out.group_value_count = raw.cells.size();

    const std::size_t nd = raw.dim_names.size();
    ValueTuple cur_key;
    for (const auto& [key, states] : raw.cells) {
        ValueTuple gk(key.begin(), key.begin() + nd);
        if (out.groups.empty() || !tuple_eq(out.groups.back().first, gk))
            out.groups.emplace_back(std::move(gk), std::vector<SeriesPoint>{});
        SeriesPoint p;
        p.x = key.back();
        p.ys.reserve(req.y_terms.size());
        for (std::size_t y = 0; y < req.y_terms.size(); ++y)
            p.ys.push_back(states[y].finalize(req.y_terms[y].fn));
        out.groups.back().second.push_back(std::move(p));
    }
    out.group_key_count = out.groups.size();
    return out;
}

}  // namespace detail

GroupedResult Backend::execute(const AggregateRequest& req) const {
    return detail::finalize(execute_raw(req), req);
}

std::vector<GroupedResult> Backend::execute_combined(
    const std::vector<AggregateRequest>& reqs) const {
    CombinedRaw raw = execute_combined_raw(reqs);
    std::vector<GroupedResult> out;
    out.reserve(reqs.size());
    for (std::size_t i = 0; i < reqs.size(); ++i)
        out.push_back(detail::finalize(raw.per_request[i], reqs[i]));
    return out;
}

Backend::CombinedRaw Backend::execute_combined_raw(
    const std::vector<AggregateRequest>& reqs) const {
    if (reqs.empty())
        throw ZqlError(ErrorStage::Execute, ErrorKind::Internal, "no requests to combine");
    for (const auto& r : reqs) check_request(r);
    const ColumnTable& t = *table_;

    // Union of raw grouping attributes: every request's x plus its group dims.
    std::vector<std::string> combined_dims;
    auto add_dim = [&](const std::string& a) {
        if (std::find(combined_dims.begin(), combined_dims.end(), a) == combined_dims.end())
            combined_dims.push_back(a);
    };
    for (const auto& r : reqs) {
        add_dim(r.x_attr);
        for (const auto& d : r.group_dims) add_dim(d.attr);
    }
    // Union of measures that any request aggregates.
    std::vector<std::string> measures;
    auto measure_index = [&](const std::string& a) {
        auto it = std::find(measures.begin(), measures.end(), a);
        if (it == measures.end()) { measures.push_back(a); return measures.size() - 1; }
        return static_cast<std::size_t>(it - measures.begin());
    };
    std::vector<std::vector<std::size_t>> y_map(reqs.size());
    for (std::size_t i = 0; i < reqs.size(); ++i)
        for (const auto& yt : reqs[i].y_terms) y_map[i].push_back(measure_index(yt.attr));

    std::vector<const Column*> dim_cols;
    for (const auto& a : combined_dims) dim_cols.push_back(&t.column(a));
    std::vector<const Column*> m_cols;
    for (const auto& a : measures) m_cols.push_back(&t.column(a));

    // Shared scan: key = raw dim values + one 0/1 flag per request predicate.
    std::map<ValueTuple, std::vector<detail::AggState>, TupleLess> combined;
    ValueTuple key(combined_dims.size() + reqs.size());
    std::vector<char> flags(reqs.size());
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        bool any = false;
        for (std::size_t i = 0; i < reqs.size(); ++i) {
            flags[i] = predicate_matches(reqs[i].where, t, r) ? 1 : 0;
            any = any || flags[i];
        }
        if (!any) continue;
        for (std::size_t d = 0; d < dim_cols.size(); ++d) key[d] = dim_cols[d]->at(r);
        for (std::size_t i = 0; i < reqs.size(); ++i)
            key[combined_dims.size() + i] = static_cast<int64_t>(flags[i]);
        auto [it, fresh] = combined.try_emplace(key);
        if (fresh) it->second.resize(measures.size());
        for (std::size_t m = 0; m < m_cols.size(); ++m) {
            const Column& mc = *m_cols[m];
            const double v = mc.kind == ColumnKind::Categorical ? 0.0 : as_double(mc.at(r));
            it->second[m].add(v);
        }
    }

    // Regenerate each request's raw table from the combined grouping.
    CombinedRaw out;
    out.combined_group_count = combined.size();
    out.per_request.reserve(reqs.size());
    std::vector<std::size_t> dim_pos(combined_dims.size());
    for (std::size_t i = 0; i < reqs.size(); ++i) {
        const AggregateRequest& req = reqs[i];
        const std::size_t flag_at = combined_dims.size() + i;
        auto pos_of = [&](const std::string& a) {
            return static_cast<std::size_t>(
                std::find(combined_dims.begin(), combined_dims.end(), a) - combined_dims.begin());
        };
        const std::size_t x_pos = pos_of(req.x_attr);
        std::vector<std::size_t> d_pos;
        for (const auto& d : req.group_dims) d_pos.push_back(pos_of(d.attr));

        double xlo = 0, xhi = 0;
        if (req.x_binning && req.x_binning->mode == Binning::Mode::Count) {
            bool any = false;
            for (const auto& [k, _] : combined) {
                if (std::get<int64_t>(k[flag_at]) != 1) continue;
                const double v = as_double(k[x_pos]);
                if (!any) { xlo = xhi = v; any = true; }
                else { xlo = std::min(xlo, v); xhi = std::max(xhi, v); }
            }
        }

        detail::AggTable raw;
        raw.y_count = req.y_terms.size();
        for (const auto& d : req.group_dims) raw.dim_names.push_back(d.attr);
        ValueTuple rkey(req.group_dims.size() + 1);
        for (const auto& [k, states] : combined) {
            if (std::get<int64_t>(k[flag_at]) != 1) continue;
            for (std::size_t d = 0; d < d_pos.size(); ++d)
                rkey[d] = bin_value(k[d_pos[d]], req.group_dims[d].binning, 0, 0);
            rkey.back() = bin_value(k[x_pos], req.x_binning, xlo, xhi);
            auto [it, fresh] = raw.cells.try_emplace(rkey);
            if (fresh) it->second.resize(req.y_terms.size());
            for (std::size_t y = 0; y < y_map[i].size(); ++y)
                it->second[y].merge(states[y_map[i][y]]);
        }
        out.per_request.push_back(std::move(raw));
    }
    return out;
}

std::size_t Backend::groupby_cardinality(const std::vector<std::string>& dims) const {
    if (dims.empty()) return 1;
    const ColumnTable& t = *table_;
    std::vector<const Column*> cols;
    for (const auto& a : dims) cols.push_back(&t.column(a));
    std::set<ValueTuple, TupleLess> keys;
    ValueTuple key(dims.size());
    for (std::size_t r = 0; r < t.row_count(); ++r) {
        for (std::size_t d = 0; d < cols.size(); ++d) key[d] = cols[d]->at(r);
        keys.insert(key);
    }
    return keys.size();
}

std::size_t Backend::request_group_values(const AggregateRequest& req) const {
    return execute_raw(req).cells.size();
}

}  // namespace zql
