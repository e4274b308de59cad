#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "zql/validate.hpp"
#include "zql/viscollection.hpp"

namespace zql {

using TrendFn = std::function<double(const UnitViz&)>;
using DistanceFn = std::function<double(const UnitViz&, const UnitViz&)>;
using ScalarFn = std::function<double(const std::vector<double>&)>;

// Least-squares slope of y against series position (categorical x maps to
// its rank, numeric x likewise uses the rank so gaps do not reweight the fit).
double t_slope(const UnitViz& v);

// Pointwise Euclidean distance over the inner join of the two series' x
// keys; needs at least two shared keys. Optional z-normalization of each
// joined series first.
double d_euclidean(const UnitViz& a, const UnitViz& b, bool z_normalize = false);

// k medoids of the given cells under `dist`, deterministic: farthest-first
// seeding from the first cell, then best-improvement medoid swaps until a
// fixpoint. Returns selected indices in ascending order.
std::vector<std::size_t> r_representatives(std::size_t k, const std::vector<const UnitViz*>& cells,
                                           const DistanceFn& dist);

class PrimitiveRegistry {
public:
    static PrimitiveRegistry builtin();

    void register_trend(const std::string& name, TrendFn fn) { trends_[name] = std::move(fn); }
    void register_distance(const std::string& name, DistanceFn fn) {
        distances_[name] = std::move(fn);
    }
    void register_scalar(const std::string& name, ScalarFn fn) { scalars_[name] = std::move(fn); }

    void select_trend(const std::string& name);
    void select_distance(const std::string& name);

    const TrendFn& trend() const;
    const DistanceFn& distance() const;
    const ScalarFn& scalar(const std::string& name) const;
    bool has_scalar(const std::string& name) const { return scalars_.count(name) > 0; }

    PlugCatalog plug_catalog() const;

private:
    std::map<std::string, TrendFn> trends_;
    std::map<std::string, DistanceFn> distances_;
    std::map<std::string, ScalarFn> scalars_;
    std::string trend_name_ = "slope";
    std::string distance_name_ = "euclidean";
};

}  // namespace zql
