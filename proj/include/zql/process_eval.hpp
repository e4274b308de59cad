#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "zql/primitives.hpp"
#include "zql/validate.hpp"
#include "zql/viscollection.hpp"

namespace zql {

// Byte-capacity LRU over cells; counts loads (misses) so blocked and naive
// iteration orders can be compared.
class CacheSim {
public:
    explicit CacheSim(std::size_t capacity_bytes) : capacity_(capacity_bytes) {}

    void touch(const void* coll, std::size_t index, std::size_t bytes);
    std::size_t loads() const { return loads_; }

private:
    using Key = std::pair<const void*, std::size_t>;
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<const void*>()(k.first) * 1000003u ^ std::hash<std::size_t>()(k.second);
        }
    };
    std::size_t capacity_;
    std::size_t used_ = 0;
    std::size_t loads_ = 0;
    std::list<std::pair<Key, std::size_t>> lru_;  // front = most recent
    std::unordered_map<Key, std::list<std::pair<Key, std::size_t>>::iterator, KeyHash> index_;
};

struct ProcessEnv {
    const ValidatedQuery* vq = nullptr;
    const PrimitiveRegistry* registry = nullptr;
    std::map<std::string, const VisCollection*> collections;
    // Resolved domain per group id (opt and reduce loops draw from these).
    std::map<int, std::vector<ValueTuple>> group_domains;
    CacheSim* cache = nullptr;  // optional instrumentation
};

struct ProcessOutputs {
    // Selected tuples in limiter rank order; component i corresponds to
    // outputs[i] of the declaration.
    std::vector<ValueTuple> tuples;
};

// Nested-loop evaluation: one loop per optimized group, reduce loops inside
// the expression tree, then the limiter.
ProcessOutputs eval_process(const ProcessDecl& decl, ProcessEnv& env);

// Scores every opt tuple; exposed for the brute-force comparison tests.
std::vector<std::pair<ValueTuple, double>> score_process(const ProcessDecl& decl, ProcessEnv& env);

// Identical outputs to eval_process; the outer opt loop and the outermost
// reduce loop are tiled into blocks sized to fit `block_bytes`.
ProcessOutputs cache_aware_eval(const ProcessDecl& decl, ProcessEnv& env, std::size_t block_bytes);

// Rank-and-truncate step shared by every process form.
std::vector<ValueTuple> apply_limiter(std::vector<std::pair<ValueTuple, double>> scored,
                                      ArgOpt argopt, const Limiter& limiter);

// Default block size for cache-aware execution (ZQL_L3_BYTES overrides).
std::size_t default_block_bytes();

}  // namespace zql
