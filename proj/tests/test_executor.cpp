#include "doctest.h"
#include "test_data.hpp"
#include "zql/errors.hpp"
#include "zql/executor.hpp"
#include "zql/parser.hpp"

using namespace zql;

namespace {

struct Ctx {
    ColumnTable table = test_products_table();
    Engine engine{table};

    ValidatedQuery validated(const std::string& text) const {
        return validate(parse_query(text), test_products_catalog(table),
                        SchemaInfo::from_table(table));
    }

    RunOutput run(const std::string& text, ExecStrategy s) const {
        return engine.run(validated(text), s);
    }
};

const ExecStrategy kAll[] = {ExecStrategy::NoOpt, ExecStrategy::Parallel, ExecStrategy::Speculate,
                             ExecStrategy::SmartFuse};

// documentation queries exercised under every strategy
const char* kDocQueries[] = {
    // single bar chart for one product
    "*f1 | 'year' | 'sales' | 'product'.'prod1' | bar.(y=agg('sum')) |\n",
    // one chart per product
    "*f1 | 'year' | 'sales' | 'product'.* | bar.(y=agg('sum')) |\n",
    // x/y collections: cartesian product of axes
    "name | x | y | z\n"
    "*f1 | {'year', 'month'} | {'sales', 'profit'} | 'product'.'prod2'\n",
    // multiple z columns
    "name | x | y | z | z2\n"
    "*f1 | 'year' | 'sales' | 'product'.'prod1' | 'location'.'loc0'\n",
    // top-10 most different profit/sales visualizations
    "name | x | y | z | process\n"
    "f1 | 'year' | 'profit' | v1 <-- 'product'.* | \n"
    "f2 | 'year' | 'sales' | v1 | v2 <-- argmax_v1[k=3] D(f1, f2)\n"
    "*f3 | 'year' | 'profit' | v2 | \n",
    // negative-trend filter
    "name | x | y | z | process\n"
    "f1 | 'year' | 'sales' | v1 <-- 'product'.* | v2 <-- argany_v1[t<0] T(f1)\n"
    "*f2 | 'year' | 'sales' | v2 | \n",
    // similarity to a reference, excluding it
    "name | x | y | z | process\n"
    "f1 | 'year' | 'sales' | 'product'.'prod0' | \n"
    "f2 | 'year' | 'sales' | v1 <-- 'product'.(* - 'prod0') | v2 <-- argmin_v1[k=3] D(f1, f2)\n"
    "*f3 | 'year' | 'sales' | v2 | \n",
    // outliers by summed distance
    "name | x | y | z | process\n"
    "f1 | 'year' | 'sales' | v1 <-- 'product'.* | \n"
    "f2 | 'year' | 'sales' | v2 <-- 'product'.* | v3 <-- argmax_v1[k=3] sum_v2 D(f1, f2)\n"
    "*f3 | 'year' | 'sales' | v3 | \n",
    // name-column concatenation with a data constraint
    "name | x | y | z\n"
    "f1 | 'year' | 'sales' | 'product'.'prod1'\n"
    "f2 | 'year' | 'profit' | 'location'.'loc0'\n"
    "*f3 <-- f1+f2 | | | 'month'.[? < 3]\n",
    // heat map with binning on both axes
    "name | x | y | z | viz\n"
    "*f1 | 'sales' | 'profit' | | bin2d.(x=nbin(5), y=nbin(5))\n",
    // derived collections with slicing, dedup, reorder
    "name | x | y | z | process\n"
    "f1 | 'year' | 'sales' | v1 <-- 'product'.* | u1 <-- argmin_v1[k=inf] T(f1)\n"
    "*f2 <-- f1[1:4] | | | |\n"
    "*f3 <-- (f1+f1).uniq | | | |\n"
    "*f4 <-- f1.order | | | u1 --> |\n",
    // realistic five-row query with IN constraints
    "name | x | y | z | z2 | z3 | process\n"
    "f1 | 'year' | 'sales' | v1 <-- 'location'.* | | | v2 <-- argany_v1[t<0] T(f1)\n"
    "f2 | 'year' | 'profit' | v3 <-- 'category'.* | | | v4 <-- argany_v3[t<0] T(f2)\n"
    "f3 | 'year' | 'profit' | v5 <-- 'product'.* | 'location'.[? IN v2] | 'category'.[? IN v4] | "
    "v6 <-- argany_v5[t>0] T(f3)\n"
    "f4 | 'year' | 'sales' | v5 | 'location'.[? IN v2] | 'category'.[? IN v4] | "
    "v7 <-- argany_v5[t>0] T(f4)\n"
    "*f5 | 'year' | {'profit', 'sales'} | v6 ^ v7 | | |\n",
    // representative selection downstream of a similarity filter
    "name | x | y | z | process\n"
    "f1 | 'year' | 'profit' | 'product'.'prod3' | \n"
    "f2 | 'year' | 'profit' | v1 <-- 'product'.(* - 'prod3') | v2 <-- argmin_v1[k=5] D(f1, f2)\n"
    "f3 | 'year' | 'sales' | v2 | v3 <-- R(2, v2, f3)\n"
    "*f4 | 'year' | 'sales' | v3 | \n",
    // two processes on one row
    "name | x | y | z | process\n"
    "f1 | 'year' | 'sales' | 'product'.'prod0' | \n"
    "f2 | 'year' | 'sales' | v1 <-- 'product'.* | (v2 <-- argmax_v1[k=1] D(f1, f2)), "
    "(v3 <-- argmin_v1[k=1] D(f1, f2))\n"
    "*f3 | 'year' | 'sales' | v2 | \n"
    "*f4 | 'year' | 'sales' | v3 | \n",
    // percentile limiter
    "name | x | y | z | process\n"
    "f1 | 'year' | 'sales' | v1 <-- 'product'.* | v2 <-- argmax_v1[p=25] T(f1)\n"
    "*f2 | 'year' | 'sales' | v2 | \n",
};

}  // namespace

TEST_CASE("all four strategies produce identical results on documentation queries") {
    Ctx ctx;
    for (const char* text : kDocQueries) {
        CAPTURE(text);
        RunOutput base = ctx.run(text, ExecStrategy::NoOpt);
        for (ExecStrategy s : {ExecStrategy::Parallel, ExecStrategy::Speculate,
                               ExecStrategy::SmartFuse}) {
            CAPTURE(to_string(s));
            RunOutput other = ctx.run(text, s);
            CHECK(base.results == other.results);
        }
    }
}

TEST_CASE("request counts are monotone across strategies") {
    Ctx ctx;
    for (const char* text : kDocQueries) {
        CAPTURE(text);
        const auto noopt = ctx.run(text, ExecStrategy::NoOpt);
        const auto parallel = ctx.run(text, ExecStrategy::Parallel);
        const auto speculate = ctx.run(text, ExecStrategy::Speculate);
        const auto smartfuse = ctx.run(text, ExecStrategy::SmartFuse);
        CHECK(parallel.trace.request_count() == noopt.trace.request_count());
        CHECK(parallel.trace.phase_count <= noopt.trace.phase_count);
        CHECK(speculate.trace.request_count() <= noopt.trace.request_count());
        CHECK(smartfuse.trace.request_count() <= speculate.trace.request_count());
    }
}

TEST_CASE("the overview query returns the aggregated series") {
    Ctx ctx;
    RunOutput out = ctx.run("*f1 | 'year' | 'sales' | 'product'.'prod1' | bar.(y=agg('sum')) |\n",
                            ExecStrategy::NoOpt);
    REQUIRE(out.results.outputs.size() == 1);
    const VisCollection& coll = out.results.outputs[0].second;
    REQUIRE(coll.cells.size() == 1);
    const UnitViz& cell = coll.cells[0];
    REQUIRE(cell.series.size() == 3);  // three years

    // oracle: the backend computes the same series directly
    Backend backend(ctx.table);
    AggregateRequest req;
    req.x_attr = "year";
    req.y_terms = {{"sales", AggFn::Sum}};
    req.where = Predicate::single(PredAtom{"product", CmpOp::Eq, {Value{std::string("prod1")}}});
    GroupedResult r = backend.execute(req);
    REQUIRE(r.groups.size() == 1);
    for (std::size_t i = 0; i < cell.series.size(); ++i) {
        CHECK(value_eq(cell.series[i].first, r.groups[0].second[i].x));
        CHECK(cell.series[i].second == r.groups[0].second[i].ys[0]);
    }
}

TEST_CASE("speculation fetches the provenance superset and slices locally") {
    Ctx ctx;
    const char* text =
        "name | x | y | z | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'product'.* | v2 <-- argmax_v1[k=2] T(f1)\n"
        "*f2 | 'year' | 'sales' | v2 | \n";

    RunOutput spec = ctx.run(text, ExecStrategy::Speculate);
    // both c-nodes fetch in phase 1
    REQUIRE(spec.trace.request_count() == 2);
    CHECK(spec.trace.requests[0].phase == 1);
    CHECK(spec.trace.requests[1].phase == 1);
    // the speculative request for f2 groups by the full product domain
    CHECK(spec.trace.requests[1].sql.find("GROUP BY") != std::string::npos);
    CHECK(spec.trace.requests[1].sql.find("IN") == std::string::npos);

    RunOutput noopt = ctx.run(text, ExecStrategy::NoOpt);
    CHECK(spec.results == noopt.results);
    // f2 holds exactly the two selected products
    CHECK(spec.results.outputs[0].second.cells.size() == 2);
}

TEST_CASE("speculation promotes IN constraints to group dimensions") {
    Ctx ctx;
    const char* text =
        "name | x | y | z | z2 | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'location'.* | | v2 <-- argany_v1[t<0] T(f1)\n"
        "*f2 | 'year' | 'sales' | v3 <-- 'product'.* | 'location'.[? IN v2] | \n";
    RunOutput spec = ctx.run(text, ExecStrategy::Speculate);
    RunOutput noopt = ctx.run(text, ExecStrategy::NoOpt);
    CHECK(spec.results == noopt.results);
    REQUIRE(spec.trace.request_count() == 2);
    // the superset request groups by location as well
    CHECK(spec.trace.requests[1].sql.find("\"location\"") != std::string::npos);
    CHECK(spec.trace.requests[1].sql.find("GROUP BY") != std::string::npos);
}

TEST_CASE("smartfuse combines compatible requests into one backend call") {
    Ctx ctx;
    const char* text =
        "name | x | y | z | process\n"
        "f1 | 'year' | 'profit' | v1 <-- 'product'.* | \n"
        "f2 | 'year' | 'sales' | v1 | v2 <-- argmax_v1[k=3] D(f1, f2)\n"
        "*f3 | 'year' | 'profit' | v2 | \n";
    RunOutput fused = ctx.run(text, ExecStrategy::SmartFuse);
    CHECK(fused.trace.request_count() == 1);
    REQUIRE(fused.trace.requests.size() == 1);
    CHECK(fused.trace.requests[0].nodes.size() == 3);
    // the combined statement carries one condition flag per member
    CHECK(fused.trace.requests[0].sql.find("CASE WHEN") != std::string::npos);

    RunOutput noopt = ctx.run(text, ExecStrategy::NoOpt);
    CHECK(noopt.trace.request_count() == 3);
    CHECK(fused.results == noopt.results);
}

TEST_CASE("every combined smartfuse group stays under the cardinality cap") {
    Ctx ctx;
    for (const char* text : kDocQueries) {
        RunOutput out = ctx.run(text, ExecStrategy::SmartFuse);
        for (const auto& r : out.trace.requests) {
            if (r.nodes.size() > 1) CHECK(r.est_group_values <= 100000);
        }
    }
}

TEST_CASE("nodes complete only after their parents") {
    Ctx ctx;
    const char* text =
        "name | x | y | z | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'product'.* | v2 <-- argany_v1[t>0] T(f1)\n"
        "f2 | 'year' | 'sales' | v2 | v3 <-- argmax_v2[k=2] T(f2)\n"
        "*f3 | 'year' | 'sales' | v3 | \n";
    for (ExecStrategy s : kAll) {
        RunOutput out = ctx.run(text, s);
        std::map<std::string, int> done;
        for (const auto& c : out.trace.completions) done[c.node] = c.phase;
        CHECK(done.at("f1") <= done.at("p1"));
        CHECK(done.at("p1") <= done.at("f2"));
        CHECK(done.at("f2") <= done.at("p2"));
        CHECK(done.at("p2") <= done.at("f3"));
        // under any strategy the final collection waits for the whole chain
        CHECK(done.at("f3") >= done.at("p2"));
    }
}

TEST_CASE("predicted cost ordering holds on the chain query") {
    Ctx ctx;
    const char* text =
        "name | x | y | z | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'product'.* | u1 <-- argmax_v1[k=4] T(f1)\n"
        "f2 | 'year' | 'sales' | u1 | u2 <-- argmax_u1[k=2] T(f2)\n"
        "*f3 | 'year' | 'sales' | u2 | \n";
    const double noopt = ctx.run(text, ExecStrategy::NoOpt).trace.predicted_ms;
    const double parallel = ctx.run(text, ExecStrategy::Parallel).trace.predicted_ms;
    const double smartfuse = ctx.run(text, ExecStrategy::SmartFuse).trace.predicted_ms;
    CHECK(smartfuse <= parallel + 1e-9);
    CHECK(parallel <= noopt + 1e-9);
}

TEST_CASE("trace exports line-delimited phase records") {
    Ctx ctx;
    RunOutput out = ctx.run(kDocQueries[4], ExecStrategy::SmartFuse);
    const std::string csv = out.trace.to_csv(ctx.engine.options().cost);
    CHECK(csv.find("phase,node,requests,group_values,predicted_ms") == 0);
    CHECK(csv.find("f1") != std::string::npos);
}

TEST_CASE("execution errors carry the owning node") {
    Ctx ctx;
    // D over series with a single shared x key: f1 is a single point
    const char* text =
        "name | x | y | z | z2 | process\n"
        "f1 | 'month' | 'sales' | 'product'.'prod0' | 'month'.[? = 1] | \n"
        "f2 | 'month' | 'sales' | v1 <-- 'product'.* | | v2 <-- argmin_v1[k=1] D(f1, f2)\n"
        "*f3 | 'month' | 'sales' | v2 | | \n";
    try {
        ctx.run(text, ExecStrategy::NoOpt);
        FAIL("expected an execution error");
    } catch (const ZqlError& e) {
        CHECK(e.kind() == ErrorKind::InsufficientOverlap);
        CHECK(std::string(e.what()).find("p1") != std::string::npos);
    }
}

TEST_CASE("polaris plus and division are rejected at planning") {
    Ctx ctx;
    CHECK_THROWS_AS(ctx.run("*f1 | 'month' | 'profit' + 'sales' | 'location'.'loc0' |\n",
                            ExecStrategy::NoOpt),
                    ZqlError);
}

TEST_CASE("polaris cross builds composite x keys") {
    Ctx ctx;
    RunOutput out = ctx.run("*f1 | 'year' * {'month'} | 'sales' | 'product'.'prod0' |\n",
                            ExecStrategy::NoOpt);
    const UnitViz& cell = out.results.outputs[0].second.cells[0];
    REQUIRE(!cell.series.empty());
    CHECK(cell.series.size() == 12);  // 3 years x 4 months
    CHECK(value_to_string(cell.series[0].first).find("|") != std::string::npos);
}

TEST_CASE("speculation leaves static-only requests unchanged") {
    Ctx ctx;
    const char* text = "*f1 | 'year' | 'sales' | 'product'.* | |\n";
    RunOutput noopt = ctx.run(text, ExecStrategy::NoOpt);
    RunOutput spec = ctx.run(text, ExecStrategy::Speculate);
    REQUIRE(noopt.trace.requests.size() == 1);
    REQUIRE(spec.trace.requests.size() == 1);
    CHECK(noopt.trace.requests[0].sql == spec.trace.requests[0].sql);
}

TEST_CASE("parsing is insensitive to cell whitespace") {
    Ctx ctx;
    ZqlQuery tight = parse_query("*f1|'year'|'sales'|v1<--'product'.*|bar.(y=agg('sum'))|\n");
    ZqlQuery spaced = parse_query(
        "*f1  |  'year' |   'sales' | v1   <--   'product' . *  |  bar.( y = agg( 'sum' ) ) | \n");
    CHECK(tight == spaced);
}
