#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "zql/bench.hpp"
#include "zql/completeness.hpp"
#include "zql/errors.hpp"
#include "zql/io.hpp"
#include "zql/parser.hpp"

using namespace zql;

namespace {

int exit_code_for(ErrorStage stage) {
    switch (stage) {
        case ErrorStage::Io: return 1;
        case ErrorStage::Parse:
        case ErrorStage::Validate: return 2;
        case ErrorStage::Plan: return 3;
        case ErrorStage::Execute: return 4;
    }
    return 1;
}

struct CommonOpts {
    std::string trend = "slope";
    std::string distance = "euclidean";
    double cost_fixed_ms = 1635.0;
    double cost_per_query_ms = 908.0;
    double cost_per_100gv_ms = 1.22;
    std::size_t max_groupby = 100000;
    bool cache_aware = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--trend", trend, "trend primitive name");
        cmd->add_option("--distance", distance, "distance primitive name");
        cmd->add_option("--cost-fixed-ms", cost_fixed_ms, "cost model: fixed ms per batch");
        cmd->add_option("--cost-per-query-ms", cost_per_query_ms,
                        "cost model: ms per concurrent query");
        cmd->add_option("--cost-per-100gv-ms", cost_per_100gv_ms,
                        "cost model: ms per 100 group-by values");
        cmd->add_option("--max-groupby", max_groupby,
                        "largest combined group-by cardinality (M_G)");
        cmd->add_flag("--cache-aware", cache_aware,
                      "evaluate processes with cache-blocked iteration (ZQL_L3_BYTES sets the "
                      "block size)");
    }

    EngineOptions engine_options() const {
        EngineOptions opt;
        opt.cost.fixed_ms = cost_fixed_ms;
        opt.cost.per_query_ms = cost_per_query_ms;
        opt.cost.per_100_group_values_ms = cost_per_100gv_ms;
        opt.cost.max_groupby = max_groupby;
        opt.cache_aware = cache_aware;
        return opt;
    }

    PrimitiveRegistry registry() const {
        PrimitiveRegistry reg = PrimitiveRegistry::builtin();
        reg.select_trend(trend);
        reg.select_distance(distance);
        return reg;
    }
};

std::string read_file_or_die(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ZqlError(ErrorStage::Io, ErrorKind::ParseError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"zql: collection-oriented visual exploration queries over columnar data"};
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "execute a .zql query file against a dataset");
    std::string data_path, schema_path, query_path, out_dir = "out", dot_path, trace_path;
    std::vector<std::string> strategies = {"smartfuse"};
    std::uint64_t seed = 42;
    CommonOpts opts;
    run->add_option("--data", data_path, "delimited data file")->required();
    run->add_option("--schema", schema_path, "schema file (name:kind lines)")->required();
    run->add_option("--query", query_path, ".zql query file")->required();
    run->add_option("--strategy", strategies,
                    "noopt | parallel | speculate | smartfuse (repeatable)");
    run->add_option("--out", out_dir, "output directory for result files");
    run->add_option("--seed", seed, "seed for any randomized generation");
    run->add_option("--dot", dot_path, "write the query plan as DOT");
    run->add_option("--trace", trace_path, "write the execution trace as CSV");
    opts.attach(run);

    // ---- bench ----
    auto* bench = app.add_subcommand("bench", "run the synthetic chain benchmark");
    ChainBenchSpec spec;
    bench->add_option("--visualizations", spec.n_visualizations, "visualizations per chain");
    bench->add_option("--length", spec.chain_length, "c-nodes per chain");
    bench->add_option("--chains", spec.n_chains, "independent chains");
    bench->add_option("--loops", spec.process_loops, "process loops (1 or 2)");
    bench->add_option("--selectivity", spec.selectivity, "fraction kept per process");
    bench->add_option("--seed", spec.seed, "dataset seed");
    CommonOpts bench_opts;
    bench_opts.attach(bench);

    // ---- realistic benchmark queries ----
    auto* realistic =
        app.add_subcommand("realistic", "run the three realistic benchmark queries (B1-B3)");
    CommonOpts real_opts;
    real_opts.attach(realistic);

    // ---- completeness ----
    auto* complete = app.add_subcommand(
        "completeness",
        "replay the algebra operator constructions and report per-operator results");
    std::uint64_t comp_seed = 7;
    int comp_relations = 20;
    complete->add_option("--seed", comp_seed, "generator seed");
    complete->add_option("--relations", comp_relations, "number of random relations");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            TableSchema schema = load_schema(schema_path);
            ColumnTable table = load_table(data_path, schema);
            ZqlQuery q = parse_query(read_file_or_die(query_path));
            AttributeCatalog catalog = AttributeCatalog::defaults_for(table);
            PrimitiveRegistry registry = opts.registry();
            ValidatedQuery vq =
                validate(q, catalog, SchemaInfo::from_table(table), registry.plug_catalog());
            Engine engine(table, std::move(registry), opts.engine_options());

            for (const auto& sname : strategies) {
                auto strategy = strategy_from_string(sname);
                if (!strategy)
                    throw ZqlError(ErrorStage::Plan, ErrorKind::NotSupported,
                                   "unknown strategy '" + sname + "'");
                RunOutput out = engine.run(vq, *strategy);
                const std::string dir = strategies.size() == 1 ? out_dir : out_dir + "/" + sname;
                auto files = write_results(out.results, vq, dir);
                std::cout << "strategy " << sname << ": " << out.trace.request_count()
                          << " backend requests over " << out.trace.phase_count
                          << " phases; predicted " << out.trace.predicted_ms << " ms, measured "
                          << out.trace.measured_ms << " ms\n";
                for (const auto& f : files) std::cout << "  wrote " << f << "\n";
                if (!dot_path.empty()) write_text_file(dot_path, to_dot(build_dag(vq)));
                if (!trace_path.empty())
                    write_text_file(trace_path, out.trace.to_csv(engine.options().cost));
            }
            return 0;
        }

        if (*bench) {
            BenchReport report = run_chain_bench(spec, bench_opts.engine_options());
            std::cout << report.to_text();
            return report.results_identical ? 0 : 4;
        }

        if (*realistic) {
            ColumnTable table = make_bench_table();
            struct Case {
                const char* name;
                std::string text;
            } cases[] = {{"B1", benchmark_query_b1()},
                         {"B2", benchmark_query_b2()},
                         {"B3", benchmark_query_b3()}};
            AttributeCatalog catalog = AttributeCatalog::defaults_for(table);
            Engine engine(table, real_opts.registry(), real_opts.engine_options());
            std::cout << "query  strategy    requests  phases  predicted_ms\n";
            for (const auto& c : cases) {
                ValidatedQuery vq =
                    validate(parse_query(c.text), catalog, SchemaInfo::from_table(table));
                for (ExecStrategy s : {ExecStrategy::NoOpt, ExecStrategy::Parallel,
                                       ExecStrategy::Speculate, ExecStrategy::SmartFuse}) {
                    RunOutput out = engine.run(vq, s);
                    std::cout << c.name << "     " << to_string(s);
                    for (std::size_t i = std::string(to_string(s)).size(); i < 12; ++i)
                        std::cout << ' ';
                    std::cout << out.trace.request_count() << "  " << out.trace.phase_count << "  "
                              << out.trace.predicted_ms << "\n";
                }
            }
            return 0;
        }

        if (*complete) {
            std::mt19937_64 rng(comp_seed);
            std::map<std::string, std::pair<int, int>> tally;  // op -> (pass, total)
            {
                ColumnTable table = make_equivalence_table();
                CompletenessHarness harness(table, AttributeCatalog::defaults_for(table));
                for (const auto& o : harness.run_all(rng, 1)) {
                    auto& t = tally[o.op];
                    t.first += o.pass ? 1 : 0;
                    t.second += 1;
                }
            }
            for (int i = 0; i < comp_relations; ++i) {
                ColumnTable table = random_small_relation(rng);
                CompletenessHarness harness(table, catalog_for_small_relation(table));
                for (const auto& o : harness.run_all(rng, 1)) {
                    auto& t = tally[o.op];
                    t.first += o.pass ? 1 : 0;
                    t.second += 1;
                }
            }
            bool all = true;
            std::cout << "operator      pass/total\n";
            for (const auto& [op, t] : tally) {
                std::cout << op;
                for (std::size_t i = op.size(); i < 14; ++i) std::cout << ' ';
                std::cout << t.first << "/" << t.second
                          << (t.first == t.second ? "  PASS" : "  FAIL") << "\n";
                all = all && t.first == t.second;
            }
            return all ? 0 : 4;
        }
    } catch (const ZqlError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.stage());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
