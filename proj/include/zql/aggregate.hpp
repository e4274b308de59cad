#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zql/column_table.hpp"
#include "zql/exact_sum.hpp"
#include "zql/predicate.hpp"
#include "zql/value.hpp"

namespace zql {

enum class AggFn { Sum, Avg, Count, Max, Min };

const char* to_string(AggFn f);
std::optional<AggFn> agg_fn_from_string(const std::string& s);

struct Binning {
    enum class Mode { Width, Count } mode = Mode::Width;
    double width = 1.0;  // Width mode
    int count = 1;       // Count mode

    static Binning by_width(double w) { return {Mode::Width, w, 1}; }
    static Binning by_count(int n) { return {Mode::Count, 1.0, n}; }
    friend bool operator==(const Binning& a, const Binning& b) {
        return a.mode == b.mode && a.width == b.width && a.count == b.count;
    }
};

struct YTerm {
    std::string attr;
    AggFn fn = AggFn::Sum;
};

// A grouping dimension; binned dimensions let 2-D histograms group by a
// bucketed measure.
struct GroupDim {
    std::string attr;
    std::optional<Binning> binning;

    GroupDim() = default;
    GroupDim(std::string a) : attr(std::move(a)) {}
    GroupDim(std::string a, Binning b) : attr(std::move(a)), binning(b) {}
};

// One backend group-by request: the in-memory counterpart of
// SELECT x, agg(y).. WHERE .. GROUP BY x, dims ORDER BY x, dims.
struct AggregateRequest {
    std::string x_attr;
    std::vector<YTerm> y_terms;
    std::vector<GroupDim> group_dims;
    Predicate where;
    std::optional<Binning> x_binning;
};

struct SeriesPoint {
    Value x;
    std::vector<double> ys;  // one per y term
};

struct GroupedResult {
    std::vector<std::string> group_dims;  // names, declaration order
    // group key -> series, keys in lexicographic order, x ascending within
    // each series; groups with no matching rows are absent.
    std::vector<std::pair<ValueTuple, std::vector<SeriesPoint>>> groups;
    std::size_t group_key_count = 0;   // distinct group-dim combinations
    std::size_t group_value_count = 0; // distinct (x, dims) combinations = result rows

    const std::vector<SeriesPoint>* find(const ValueTuple& key) const;
};

bool operator==(const GroupedResult& a, const GroupedResult& b);

namespace detail {

// Mergeable per-cell aggregation state; enough to reconstruct every AggFn
// exactly after regrouping.
struct AggState {
    ExactSum sum;
    std::size_t count = 0;
    double mn = 0, mx = 0;

    void add(double v) {
        sum.add(v);
        if (count == 0) { mn = mx = v; }
        else { if (v < mn) mn = v; if (v > mx) mx = v; }
        ++count;
    }
    void merge(const AggState& o) {
        if (o.count == 0) return;
        sum.merge(o.sum);
        if (count == 0) { mn = o.mn; mx = o.mx; }
        else { if (o.mn < mn) mn = o.mn; if (o.mx > mx) mx = o.mx; }
        count += o.count;
    }
    double finalize(AggFn f) const {
        switch (f) {
            case AggFn::Sum: return sum.value();
            case AggFn::Avg: return sum.value() / static_cast<double>(count);
            case AggFn::Count: return static_cast<double>(count);
            case AggFn::Max: return mx;
            case AggFn::Min: return mn;
        }
        return 0;
    }
};

// Raw grouped accumulation keyed by (dims..., x); the building block shared
// by direct, combined, and speculative execution paths.
struct AggTable {
    std::vector<std::string> dim_names;  // without x
    std::map<ValueTuple, std::vector<AggState>, TupleLess> cells;  // key = dims + [x]
    std::size_t y_count = 0;
};

GroupedResult finalize(const AggTable& raw, const AggregateRequest& req);

}  // namespace detail

class Backend {
public:
    explicit Backend(const ColumnTable& table) : table_(&table) {}

    const ColumnTable& table() const { return *table_; }

    GroupedResult execute(const AggregateRequest& req) const;

    // Single shared pass over the data with the disjunction of the requests'
    // predicates; per-request results are regenerated from the combined
    // grouping and are identical to individual execute() calls.
    std::vector<GroupedResult> execute_combined(const std::vector<AggregateRequest>& reqs) const;

    std::size_t groupby_cardinality(const std::vector<std::string>& dims) const;

    // Distinct combinations actually present for a request's full group-by
    // key (x bucket + dims); the trace's "group values" number.
    std::size_t request_group_values(const AggregateRequest& req) const;

    detail::AggTable execute_raw(const AggregateRequest& req) const;

    struct CombinedRaw {
        std::vector<detail::AggTable> per_request;
        std::size_t combined_group_count = 0;  // keys of the shared grouping
    };
    CombinedRaw execute_combined_raw(const std::vector<AggregateRequest>& reqs) const;

private:
    const ColumnTable* table_;
    void check_request(const AggregateRequest& req) const;
};

// Value of the x bucket a row falls into (identity when no binning).
Value bin_value(const Value& x, const std::optional<Binning>& binning, double lo, double hi);

// Per-attribute bucket/value count used by the planner's cardinality
// accounting: bucket count for binned attributes, distinct-value count
// otherwise.
std::size_t attr_cardinality(const ColumnTable& table, const std::string& attr,
                             const std::optional<Binning>& binning);

}  // namespace zql
