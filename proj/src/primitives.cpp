#include "zql/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "zql/errors.hpp"
#include "zql/exact_sum.hpp"

namespace zql {

double t_slope(const UnitViz& v) {
    if (v.is_bin2d)
        throw ZqlError(ErrorStage::Execute, ErrorKind::SeriesTooShort,
                       "T is undefined on 2-d histogram cells");
    const std::size_t n = v.series.size();
    if (n < 2)
        throw ZqlError(ErrorStage::Execute, ErrorKind::SeriesTooShort,
                       "trend needs at least 2 points, got " + std::to_string(n));
    const double xbar = (static_cast<double>(n) - 1.0) / 2.0;
    double ybar = 0;
    for (const auto& [x, y] : v.series) ybar += y;
    ybar /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - xbar;
        sxy += dx * (v.series[i].second - ybar);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

std::vector<std::pair<double, double>> joined_ys(const UnitViz& a, const UnitViz& b) {
    std::vector<std::pair<double, double>> joined;
    // both series are x-ascending; merge join
    std::size_t i = 0, j = 0;
    while (i < a.series.size() && j < b.series.size()) {
        if (value_less(a.series[i].first, b.series[j].first)) ++i;
        else if (value_less(b.series[j].first, a.series[i].first)) ++j;
        else {
            joined.emplace_back(a.series[i].second, b.series[j].second);
            ++i;
            ++j;
        }
    }
    return joined;
}

void z_normalize(std::vector<double>& ys) {
    const double n = static_cast<double>(ys.size());
    double mean = 0;
    for (double y : ys) mean += y;
    mean /= n;
    double var = 0;
    for (double y : ys) var += (y - mean) * (y - mean);
    const double sd = std::sqrt(var / n);
    for (double& y : ys) y = sd > 0 ? (y - mean) / sd : 0.0;
}

}  // namespace

double d_euclidean(const UnitViz& a, const UnitViz& b, bool z_norm) {
    if (a.is_bin2d || b.is_bin2d)
        throw ZqlError(ErrorStage::Execute, ErrorKind::InsufficientOverlap,
                       "D is undefined on 2-d histogram cells");
    auto joined = joined_ys(a, b);
    if (joined.size() < 2)
        throw ZqlError(ErrorStage::Execute, ErrorKind::InsufficientOverlap,
                       "series share " + std::to_string(joined.size()) +
                           " x values; need at least 2");
    std::vector<double> ya, yb;
    ya.reserve(joined.size());
    yb.reserve(joined.size());
    for (const auto& [u, v] : joined) {
        ya.push_back(u);
        yb.push_back(v);
    }
    if (z_norm) {
        z_normalize(ya);
        z_normalize(yb);
    }
    double sum = 0;
    for (std::size_t i = 0; i < ya.size(); ++i) sum += (ya[i] - yb[i]) * (ya[i] - yb[i]);
    return std::sqrt(sum);
}

std::vector<std::size_t> r_representatives(std::size_t k, const std::vector<const UnitViz*>& cells,
                                           const DistanceFn& dist) {
    const std::size_t n = cells.size();
    if (k < 1 || k > n)
        throw ZqlError(ErrorStage::Execute, ErrorKind::BadK,
                       "k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
    if (k == n) {
        std::vector<std::size_t> all(n);
        for (std::size_t i = 0; i < n; ++i) all[i] = i;
        return all;
    }

    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = dist(*cells[i], *cells[j]);

    // farthest-first seeding from the first cell
    std::vector<bool> chosen(n, false);
    std::vector<std::size_t> medoids = {0};
    chosen[0] = true;
    while (medoids.size() < k) {
        std::size_t best = n;
        double best_min = -1;
        for (std::size_t i = 0; i < n; ++i) {
            if (chosen[i]) continue;
            double mind = std::numeric_limits<double>::infinity();
            for (std::size_t m : medoids) mind = std::min(mind, d[i][m]);
            if (mind > best_min) {
                best_min = mind;
                best = i;
            }
        }
        medoids.push_back(best);
        chosen[best] = true;
    }

    auto total_cost = [&](const std::vector<bool>& sel) {
        double cost = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double mind = std::numeric_limits<double>::infinity();
            for (std::size_t m = 0; m < n; ++m)
                if (sel[m]) mind = std::min(mind, d[i][m]);
            cost += mind;
        }
        return cost;
    };

    // best-improvement swaps until no swap lowers the cost
    double cost = total_cost(chosen);
    while (true) {
        double best_cost = cost;
        std::size_t best_out = n, best_in = n;
        for (std::size_t m = 0; m < n; ++m) {
            if (!chosen[m]) continue;
            for (std::size_t c = 0; c < n; ++c) {
                if (chosen[c]) continue;
                chosen[m] = false;
                chosen[c] = true;
                const double trial = total_cost(chosen);
                chosen[m] = true;
                chosen[c] = false;
                if (trial < best_cost) {
                    best_cost = trial;
                    best_out = m;
                    best_in = c;
                }
            }
        }
        if (best_out == n) break;
        chosen[best_out] = false;
        chosen[best_in] = true;
        cost = best_cost;
    }

    std::vector<std::size_t> result;
    for (std::size_t i = 0; i < n; ++i)
        if (chosen[i]) result.push_back(i);
    return result;
}

PrimitiveRegistry PrimitiveRegistry::builtin() {
    PrimitiveRegistry r;
    r.register_trend("slope", [](const UnitViz& v) { return t_slope(v); });
    r.register_distance("euclidean",
                        [](const UnitViz& a, const UnitViz& b) { return d_euclidean(a, b); });
    r.register_distance("euclidean-znorm",
                        [](const UnitViz& a, const UnitViz& b) { return d_euclidean(a, b, true); });
    r.register_scalar("neg", [](const std::vector<double>& a) { return -a.at(0); });
    r.register_scalar("abs", [](const std::vector<double>& a) { return std::fabs(a.at(0)); });
    return r;
}

void PrimitiveRegistry::select_trend(const std::string& name) {
    if (!trends_.count(name))
        throw ZqlError(ErrorStage::Validate, ErrorKind::UnknownPrimitive,
                       "no trend primitive named '" + name + "'");
    trend_name_ = name;
}

void PrimitiveRegistry::select_distance(const std::string& name) {
    if (!distances_.count(name))
        throw ZqlError(ErrorStage::Validate, ErrorKind::UnknownPrimitive,
                       "no distance primitive named '" + name + "'");
    distance_name_ = name;
}

const TrendFn& PrimitiveRegistry::trend() const { return trends_.at(trend_name_); }
const DistanceFn& PrimitiveRegistry::distance() const { return distances_.at(distance_name_); }

const ScalarFn& PrimitiveRegistry::scalar(const std::string& name) const {
    auto it = scalars_.find(name);
    if (it == scalars_.end())
        throw ZqlError(ErrorStage::Validate, ErrorKind::UnknownPrimitive,
                       "no function named '" + name + "'");
    return it->second;
}

PlugCatalog PrimitiveRegistry::plug_catalog() const {
    PlugCatalog c;
    for (const auto& [name, _] : scalars_) c.scalar_fns.insert(name);
    c.selector_fns.insert("R");
    return c;
}

}  // namespace zql
