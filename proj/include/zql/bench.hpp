#pragma once

#include <random>
#include <string>
#include <vector>

#include "zql/executor.hpp"

namespace zql {

// Synthetic chain workload: every row's collection is constrained by the
// previous row's process output and carries a one- or two-loop process.
struct ChainBenchSpec {
    std::size_t n_visualizations = 100;
    std::size_t chain_length = 5;
    std::size_t n_chains = 1;
    int process_loops = 1;  // 1 = trend filter, 2 = summed pairwise distance
    double selectivity = 0.5;
    std::uint64_t seed = 42;

    void check() const;
};

// Chain dataset: one ordinal x column, one key dimension per chain, one
// measure whose per-key drift sign realizes the selectivity.
ColumnTable make_chain_table(const ChainBenchSpec& spec);
std::string make_chain_query(const ChainBenchSpec& spec);

// Fixed product-style dataset behind the realistic benchmark queries:
// year(10) x month(12) x product(20) x location(10), category derived from
// the product, sales/profit with deterministic drifts.
ColumnTable make_bench_table(std::uint64_t seed = 7);

// The three realistic benchmark query shapes. Under No-Opt they issue 6, 4,
// and 8 backend requests; SmartFuse reduces them to 1, 1, and 2.
std::string benchmark_query_b1();
std::string benchmark_query_b2();
std::string benchmark_query_b3();

struct StrategyStats {
    ExecStrategy strategy = ExecStrategy::NoOpt;
    std::size_t requests = 0;
    int phases = 0;
    std::size_t group_values = 0;
    double predicted_ms = 0;
    double measured_ms = 0;
};

struct BenchReport {
    ChainBenchSpec spec;
    std::vector<StrategyStats> per_strategy;
    bool results_identical = false;

    std::string to_text() const;
};

BenchReport run_chain_bench(const ChainBenchSpec& spec, const EngineOptions& options = {});

// Seeded random queries over a bench-style table for the strategy
// equivalence suite: depth <= 5 rows, bounded visualization counts.
std::string random_equivalence_query(std::mt19937_64& rng);

// Table the random queries run against.
ColumnTable make_equivalence_table(std::uint64_t seed = 11);

}  // namespace zql
