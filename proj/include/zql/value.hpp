#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace zql {

// Wildcard slot; a selector with Star places no constraint on its attribute.
struct Star {
    friend bool operator==(Star, Star) { return true; }
    friend bool operator<(Star, Star) { return false; }
};

// A single cell value. Categorical columns hold strings, ordinal columns
// int64, measure columns double. Star only ever appears in domains built by
// the visual-exploration layer.
using Value = std::variant<Star, int64_t, double, std::string>;

inline bool is_star(const Value& v) { return std::holds_alternative<Star>(v); }

inline bool is_numeric(const Value& v) {
    return std::holds_alternative<int64_t>(v) || std::holds_alternative<double>(v);
}

inline double as_double(const Value& v) {
    if (const auto* i = std::get_if<int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

// Total order used for group keys and domain sorting. Numeric values compare
// numerically across int64/double; Star sorts after every concrete value,
// matching the "values ∪ {*}" domain construction where the wildcard comes
// last.
bool value_less(const Value& a, const Value& b);
bool value_eq(const Value& a, const Value& b);

std::string value_to_string(const Value& v);

using ValueTuple = std::vector<Value>;

bool tuple_less(const ValueTuple& a, const ValueTuple& b);
bool tuple_eq(const ValueTuple& a, const ValueTuple& b);

struct ValueLess {
    bool operator()(const Value& a, const Value& b) const { return value_less(a, b); }
};
struct TupleLess {
    bool operator()(const ValueTuple& a, const ValueTuple& b) const { return tuple_less(a, b); }
};

}  // namespace zql
