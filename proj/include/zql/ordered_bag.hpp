#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "zql/errors.hpp"

namespace zql {

// Ordered-bag primitives: sequences with duplicates where every operator
// preserves order. Indexing is 1-based and slices are inclusive on both
// ends. Equality of elements is injected so the same ops serve raw tuples
// and visual sources.
namespace bag {

template <typename T>
using Eq = std::function<bool(const T&, const T&)>;

template <typename T>
const T& index(const std::vector<T>& r, int64_t i) {
    if (i < 1 || i > static_cast<int64_t>(r.size()))
        throw ZqlError(ErrorStage::Execute, ErrorKind::IndexOutOfRange,
                       "index " + std::to_string(i) + " outside 1.." + std::to_string(r.size()));
    return r[static_cast<std::size_t>(i - 1)];
}

template <typename T>
std::vector<T> slice(const std::vector<T>& r, int64_t from, int64_t to) {
    const auto n = static_cast<int64_t>(r.size());
    if (from < 1) from = 1;
    if (to > n) to = n;
    std::vector<T> out;
    for (int64_t i = from; i <= to; ++i) out.push_back(r[static_cast<std::size_t>(i - 1)]);
    return out;
}

// union is concatenation
template <typename T>
std::vector<T> unite(std::vector<T> r, const std::vector<T>& s) {
    r.insert(r.end(), s.begin(), s.end());
    return r;
}

template <typename T>
bool contains(const std::vector<T>& s, const T& t, const Eq<T>& eq) {
    for (const auto& u : s)
        if (eq(u, t)) return true;
    return false;
}

// difference removes every occurrence of tuples found in s
template <typename T>
std::vector<T> diff(const std::vector<T>& r, const std::vector<T>& s, const Eq<T>& eq) {
    std::vector<T> out;
    for (const auto& t : r)
        if (!contains(s, t, eq)) out.push_back(t);
    return out;
}

template <typename T>
std::vector<T> intersect(const std::vector<T>& r, const std::vector<T>& s, const Eq<T>& eq) {
    std::vector<T> out;
    for (const auto& t : r)
        if (contains(s, t, eq)) out.push_back(t);
    return out;
}

// duplicate elimination keeps the first copy in place
template <typename T>
std::vector<T> dedup(const std::vector<T>& r, const Eq<T>& eq) {
    std::vector<T> out;
    for (const auto& t : r)
        if (!contains(out, t, eq)) out.push_back(t);
    return out;
}

template <typename T>
std::vector<T> select(const std::vector<T>& r, const std::function<bool(const T&)>& pred) {
    std::vector<T> out;
    for (const auto& t : r)
        if (pred(t)) out.push_back(t);
    return out;
}

template <typename T, typename U>
std::vector<U> project(const std::vector<T>& r, const std::function<U(const T&)>& fn) {
    std::vector<U> out;
    out.reserve(r.size());
    for (const auto& t : r) out.push_back(fn(t));
    return out;
}

// cross product in nested left-major order
template <typename T, typename U, typename V>
std::vector<V> cross(const std::vector<T>& r, const std::vector<U>& s,
                     const std::function<V(const T&, const U&)>& combine) {
    std::vector<V> out;
    out.reserve(r.size() * s.size());
    for (const auto& t : r)
        for (const auto& u : s) out.push_back(combine(t, u));
    return out;
}

}  // namespace bag
}  // namespace zql
