#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>

#include "zql/bench.hpp"
#include "zql/completeness.hpp"
#include "zql/errors.hpp"
#include "zql/io.hpp"
#include "zql/parser.hpp"

namespace py = pybind11;
using namespace zql;

namespace {

py::object value_to_py(const Value& v) {
    if (is_star(v)) return py::none();
    if (const auto* i = std::get_if<int64_t>(&v)) return py::int_(*i);
    if (const auto* d = std::get_if<double>(&v)) return py::float_(*d);
    return py::str(std::get<std::string>(v));
}

py::dict cell_to_py(const UnitViz& cell) {
    py::dict d;
    d["x_attr"] = cell.x_attr;
    d["y_attr"] = cell.y_attr;
    py::dict bindings;
    for (const auto& [attr, v] : cell.bindings) bindings[py::str(attr)] = value_to_py(v);
    d["bindings"] = bindings;
    if (cell.is_bin2d) {
        py::list pts;
        for (const auto& [x, y, c] : cell.bins2d) pts.append(py::make_tuple(x, y, c));
        d["bins2d"] = pts;
    } else {
        py::list pts;
        for (const auto& [x, y] : cell.series) pts.append(py::make_tuple(value_to_py(x), y));
        d["series"] = pts;
    }
    return d;
}

py::dict run_output_to_py(const RunOutput& out) {
    py::dict d;
    py::list outputs;
    for (const auto& [name, coll] : out.results.outputs) {
        py::dict o;
        o["name"] = name;
        py::list cells;
        for (const auto& cell : coll.cells) cells.append(cell_to_py(cell));
        o["cells"] = cells;
        outputs.append(o);
    }
    d["outputs"] = outputs;
    py::dict trace;
    trace["requests"] = out.trace.request_count();
    trace["phases"] = out.trace.phase_count;
    trace["predicted_ms"] = out.trace.predicted_ms;
    trace["measured_ms"] = out.trace.measured_ms;
    py::list reqs;
    for (const auto& r : out.trace.requests) {
        py::dict rr;
        rr["phase"] = r.phase;
        rr["nodes"] = r.nodes;
        rr["group_values"] = r.group_values;
        rr["sql"] = r.sql;
        reqs.append(rr);
    }
    trace["request_list"] = reqs;
    d["trace"] = trace;
    return d;
}

UnitViz series_to_viz(const std::vector<std::pair<double, double>>& pts) {
    UnitViz v;
    for (const auto& [x, y] : pts) v.series.emplace_back(Value{x}, y);
    v.materialized = true;
    return v;
}

class PyEngine {
public:
    PyEngine(std::shared_ptr<ColumnTable> table, const std::string& trend,
             const std::string& distance, bool cache_aware)
        : table_(std::move(table)) {
        PrimitiveRegistry reg = PrimitiveRegistry::builtin();
        reg.select_trend(trend);
        reg.select_distance(distance);
        EngineOptions opt;
        opt.cache_aware = cache_aware;
        engine_ = std::make_unique<Engine>(*table_, std::move(reg), opt);
    }

    py::dict run(const std::string& query_text, const std::string& strategy) {
        auto s = strategy_from_string(strategy);
        if (!s)
            throw ZqlError(ErrorStage::Plan, ErrorKind::NotSupported,
                           "unknown strategy '" + strategy + "'");
        ZqlQuery q = parse_query(query_text);
        AttributeCatalog catalog = AttributeCatalog::defaults_for(*table_);
        ValidatedQuery vq = validate(q, catalog, SchemaInfo::from_table(*table_),
                                     engine_->registry().plug_catalog());
        return run_output_to_py(engine_->run(vq, *s));
    }

    std::string plan_dot(const std::string& query_text) {
        ZqlQuery q = parse_query(query_text);
        AttributeCatalog catalog = AttributeCatalog::defaults_for(*table_);
        ValidatedQuery vq = validate(q, catalog, SchemaInfo::from_table(*table_),
                                     engine_->registry().plug_catalog());
        return to_dot(build_dag(vq));
    }

private:
    std::shared_ptr<ColumnTable> table_;
    std::unique_ptr<Engine> engine_;
};

}  // namespace

PYBIND11_MODULE(_zqlengine, m) {
    m.doc() = "collection-oriented visual exploration queries over columnar data";

    py::register_exception<ZqlError>(m, "ZqlError");

    py::class_<ColumnTable, std::shared_ptr<ColumnTable>>(m, "Table")
        .def_property_readonly("name", &ColumnTable::name)
        .def_property_readonly("row_count", &ColumnTable::row_count)
        .def_property_readonly("columns", [](const ColumnTable& t) {
            py::list cols;
            for (const auto& c : t.columns())
                cols.append(py::make_tuple(c.name, to_string(c.kind)));
            return cols;
        });

    m.def(
        "load_table",
        [](const std::string& data_path, const std::string& schema_path) {
            return std::make_shared<ColumnTable>(load_table(data_path, load_schema(schema_path)));
        },
        py::arg("data_path"), py::arg("schema_path"),
        "Load a delimited text file with a name:kind schema file.");

    m.def("bench_table",
          [] { return std::make_shared<ColumnTable>(make_bench_table()); },
          "The synthetic dataset behind the realistic benchmark queries.");
    m.def("equivalence_table",
          [] { return std::make_shared<ColumnTable>(make_equivalence_table()); },
          "Small dataset used by the strategy-equivalence suite.");

    py::class_<PyEngine>(m, "Engine")
        .def(py::init<std::shared_ptr<ColumnTable>, const std::string&, const std::string&,
                      bool>(),
             py::arg("table"), py::arg("trend") = "slope", py::arg("distance") = "euclidean",
             py::arg("cache_aware") = false)
        .def("run", &PyEngine::run, py::arg("query"), py::arg("strategy") = "smartfuse",
             "Parse, validate, plan, and execute a query; returns outputs and the trace.")
        .def("plan_dot", &PyEngine::plan_dot, py::arg("query"),
             "DOT rendering of the query plan.");

    m.def(
        "reprint",
        [](const std::string& text) { return print_query(parse_query(text)); },
        "Parse a query and reprint it canonically.");

    m.def(
        "t_slope",
        [](const std::vector<std::pair<double, double>>& series) {
            return t_slope(series_to_viz(series));
        },
        "Least-squares slope of a series of (x, y) points.");

    m.def(
        "d_euclidean",
        [](const std::vector<std::pair<double, double>>& a,
           const std::vector<std::pair<double, double>>& b, bool z_normalize) {
            return d_euclidean(series_to_viz(a), series_to_viz(b), z_normalize);
        },
        py::arg("a"), py::arg("b"), py::arg("z_normalize") = false,
        "Pointwise Euclidean distance over the shared x keys of two series.");

    m.def("benchmark_queries", [] {
        py::dict d;
        d["B1"] = benchmark_query_b1();
        d["B2"] = benchmark_query_b2();
        d["B3"] = benchmark_query_b3();
        return d;
    });

    m.def(
        "run_chain_bench",
        [](std::size_t visualizations, std::size_t length, std::size_t chains, int loops,
           double selectivity, std::uint64_t seed) {
            ChainBenchSpec spec;
            spec.n_visualizations = visualizations;
            spec.chain_length = length;
            spec.n_chains = chains;
            spec.process_loops = loops;
            spec.selectivity = selectivity;
            spec.seed = seed;
            BenchReport r = run_chain_bench(spec);
            py::dict d;
            d["identical"] = r.results_identical;
            py::list stats;
            for (const auto& s : r.per_strategy) {
                py::dict sd;
                sd["strategy"] = to_string(s.strategy);
                sd["requests"] = s.requests;
                sd["phases"] = s.phases;
                sd["predicted_ms"] = s.predicted_ms;
                stats.append(sd);
            }
            d["strategies"] = stats;
            d["report"] = r.to_text();
            return d;
        },
        py::arg("visualizations") = 100, py::arg("length") = 5, py::arg("chains") = 1,
        py::arg("loops") = 1, py::arg("selectivity") = 0.5, py::arg("seed") = 42);

    m.def(
        "run_completeness",
        [](std::uint64_t seed, int relations) {
            std::mt19937_64 rng(seed);
            py::list results;
            auto record = [&](const CompletenessHarness::Outcome& o) {
                py::dict d;
                d["op"] = o.op;
                d["pass"] = o.pass;
                if (!o.pass) d["detail"] = o.detail;
                results.append(d);
            };
            {
                ColumnTable table = make_equivalence_table();
                CompletenessHarness h(table, AttributeCatalog::defaults_for(table));
                for (const auto& o : h.run_all(rng, 1)) record(o);
            }
            for (int i = 0; i < relations; ++i) {
                ColumnTable table = random_small_relation(rng);
                CompletenessHarness h(table, catalog_for_small_relation(table));
                for (const auto& o : h.run_all(rng, 1)) record(o);
            }
            return results;
        },
        py::arg("seed") = 7, py::arg("relations") = 5,
        "Replay the algebra operator constructions; one record per application.");
}
