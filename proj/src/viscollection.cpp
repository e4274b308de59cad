#include "zql/viscollection.hpp"

#include <algorithm>
#include <sstream>

#include "zql/errors.hpp"
#include "zql/sql_emit.hpp"

namespace zql {

void UnitViz::set_binding(const std::string& attr, const Value& v) {
    if (is_star(v)) return;
    auto it = std::lower_bound(bindings.begin(), bindings.end(), attr,
                               [](const auto& b, const std::string& a) { return b.first < a; });
    if (it != bindings.end() && it->first == attr) it->second = v;
    else bindings.insert(it, {attr, v});
}

std::string UnitViz::identity() const {
    std::ostringstream os;
    os << x_attr << '\x1f' << y_attr << '\x1f';
    switch (viz.type) {
        case VizSpec::Type::Auto: os << "auto"; break;
        case VizSpec::Type::Bar: os << "bar"; break;
        case VizSpec::Type::Point: os << "point"; break;
        case VizSpec::Type::Bin2d: os << "bin2d"; break;
    }
    auto binning = [&os](const std::optional<Binning>& b) {
        if (!b) { os << "-"; return; }
        if (b->mode == Binning::Mode::Width) os << "w" << b->width;
        else os << "n" << b->count;
    };
    os << '\x1f';
    binning(viz.x_binning);
    os << '\x1f';
    if (viz.y_agg) os << to_string(*viz.y_agg);
    os << '\x1f';
    binning(viz.y_binning);
    for (const auto& [attr, v] : bindings) os << '\x1f' << attr << '=' << value_to_string(v);
    const std::string where = predicate_to_sql(extra_where);
    if (!where.empty()) os << '\x1f' << where;
    return os.str();
}

std::size_t VisCollection::flat_index(const std::vector<std::size_t>& pos) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < axes.size(); ++i) idx = idx * axes[i].tuples.size() + pos[i];
    return idx;
}

bool operator==(const UnitViz& a, const UnitViz& b) {
    if (a.identity() != b.identity()) return false;
    if (a.materialized != b.materialized || a.is_bin2d != b.is_bin2d) return false;
    if (a.series.size() != b.series.size() || a.bins2d.size() != b.bins2d.size()) return false;
    for (std::size_t i = 0; i < a.series.size(); ++i)
        if (!value_eq(a.series[i].first, b.series[i].first) ||
            a.series[i].second != b.series[i].second)
            return false;
    for (std::size_t i = 0; i < a.bins2d.size(); ++i)
        if (a.bins2d[i] != b.bins2d[i]) return false;
    return true;
}

bool operator==(const VisCollection& a, const VisCollection& b) {
    if (a.axes.size() != b.axes.size() || a.cells.size() != b.cells.size()) return false;
    for (std::size_t i = 0; i < a.axes.size(); ++i) {
        if (a.axes[i].tuples.size() != b.axes[i].tuples.size()) return false;
        for (std::size_t j = 0; j < a.axes[i].tuples.size(); ++j)
            if (!tuple_eq(a.axes[i].tuples[j], b.axes[i].tuples[j])) return false;
    }
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        if (!(a.cells[i] == b.cells[i])) return false;
    return true;
}

}  // namespace zql
