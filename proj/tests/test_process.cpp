#include <functional>
#include <random>

#include "doctest.h"
#include "zql/errors.hpp"
#include "zql/parser.hpp"
#include "zql/process_eval.hpp"

using namespace zql;

namespace {

SchemaInfo schema() {
    SchemaInfo s;
    s.columns = {{"year", ColumnKind::Ordinal},
                 {"product", ColumnKind::Categorical},
                 {"sales", ColumnKind::Measure},
                 {"profit", ColumnKind::Measure}};
    return s;
}

AttributeCatalog catalog() {
    AttributeCatalog c;
    c.x_eligible = {"year"};
    c.y_eligible = {"sales", "profit"};
    return c;
}

struct Fixture {
    ValidatedQuery vq;
    PrimitiveRegistry registry = PrimitiveRegistry::builtin();
    std::map<std::string, VisCollection> colls;
    ProcessEnv env;

    explicit Fixture(const std::string& text) : vq(validate(parse_query(text), catalog(), schema())) {
        env.vq = &vq;
        env.registry = &registry;
    }

    int group_of(const std::string& var) const { return vq.vars.at(var).group; }

    // one-dimensional collection over `var` with the given per-position series
    void add_collection(const std::string& name, const std::string& var,
                        const std::vector<std::string>& domain,
                        const std::function<std::vector<double>(std::size_t)>& series_for) {
        VisCollection coll;
        CollectionAxis axis;
        axis.group = group_of(var);
        std::vector<ValueTuple> dom;
        for (const auto& d : domain) dom.push_back({Value{d}});
        axis.tuples = dom;
        coll.axes.push_back(axis);
        for (std::size_t i = 0; i < domain.size(); ++i) {
            UnitViz cell;
            cell.x_attr = "year";
            cell.y_attr = name;
            cell.set_binding("product", Value{domain[i]});
            auto ys = series_for(i);
            for (std::size_t t = 0; t < ys.size(); ++t)
                cell.series.emplace_back(Value{static_cast<int64_t>(2000 + t)}, ys[t]);
            cell.materialized = true;
            coll.cells.push_back(std::move(cell));
        }
        colls[name] = std::move(coll);
        env.collections[name] = &colls[name];
        env.group_domains[axis.group] = dom;
    }

    ProcessOutputs run(int row = 0, int proc = 0) {
        return eval_process(vq.query.rows[row].processes[proc], env);
    }
};

std::vector<std::string> names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("p" + std::to_string(100 + i));
    return out;
}

std::vector<std::string> first_components(const ProcessOutputs& out) {
    std::vector<std::string> vals;
    for (const auto& t : out.tuples) vals.push_back(value_to_string(t[0]));
    return vals;
}

}  // namespace

TEST_CASE("apply_limiter ranks and truncates") {
    auto scored = [] {
        return std::vector<std::pair<ValueTuple, double>>{
            {{Value{std::string("a")}}, 3.0},
            {{Value{std::string("b")}}, 5.0},
            {{Value{std::string("c")}}, 4.0},
        };
    };
    Limiter k2{Limiter::Kind::K, 2, CmpOp::Lt, 0, 0};
    auto out = apply_limiter(scored(), ArgOpt::ArgMax, k2);
    REQUIRE(out.size() == 2);
    CHECK(value_to_string(out[0][0]) == "b");
    CHECK(value_to_string(out[1][0]) == "c");

    Limiter lt4{Limiter::Kind::Threshold, std::nullopt, CmpOp::Lt, 4.0, 0};
    auto filtered = apply_limiter(scored(), ArgOpt::ArgMin, lt4);
    REQUIRE(filtered.size() == 1);
    CHECK(value_to_string(filtered[0][0]) == "a");

    Limiter k9{Limiter::Kind::K, 9, CmpOp::Lt, 0, 0};
    CHECK(apply_limiter(scored(), ArgOpt::ArgMax, k9).size() == 3);

    SUBCASE("argany preserves domain order") {
        Limiter gt3{Limiter::Kind::Threshold, std::nullopt, CmpOp::Gt, 3.5, 0};
        auto any = apply_limiter(scored(), ArgOpt::ArgAny, gt3);
        REQUIRE(any.size() == 2);
        CHECK(value_to_string(any[0][0]) == "b");
        CHECK(value_to_string(any[1][0]) == "c");
    }
    SUBCASE("K(n) output is a prefix of K(n+1)") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> sc(0, 10);
        std::vector<std::pair<ValueTuple, double>> s;
        for (int i = 0; i < 12; ++i)
            s.push_back({{Value{static_cast<int64_t>(i)}}, sc(rng)});
        for (std::size_t n = 0; n + 1 < s.size(); ++n) {
            Limiter kn{Limiter::Kind::K, static_cast<int64_t>(n), CmpOp::Lt, 0, 0};
            Limiter kn1{Limiter::Kind::K, static_cast<int64_t>(n + 1), CmpOp::Lt, 0, 0};
            auto a = apply_limiter(s, ArgOpt::ArgMax, kn);
            auto b = apply_limiter(s, ArgOpt::ArgMax, kn1);
            REQUIRE(a.size() == n);
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(tuple_eq(a[i], b[i]));
        }
    }
    SUBCASE("percentile takes the top ceil(p% of n)") {
        Limiter p50{Limiter::Kind::Percentile, std::nullopt, CmpOp::Lt, 0, 50.0};
        auto top = apply_limiter(scored(), ArgOpt::ArgMax, p50);
        REQUIRE(top.size() == 2);  // ceil(0.5 * 3)
        CHECK(value_to_string(top[0][0]) == "b");
    }
}

TEST_CASE("top-k distance process matches brute force over 100 products") {
    Fixture fx(
        "name | x | y | z | process\n"
        "f1 | 'year' | 'profit' | v1 <-- 'product'.* | \n"
        "f2 | 'year' | 'sales' | v1 | v2 <-- argmax_v1[k=10] D(f1, f2)\n"
        "*f3 | 'year' | 'profit' | v2 | \n");
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> y(0, 50);
    auto domain = names(100);
    std::vector<std::vector<double>> profit(100), sales(100);
    for (int i = 0; i < 100; ++i)
        for (int t = 0; t < 5; ++t) {
            profit[i].push_back(y(rng));
            sales[i].push_back(y(rng));
        }
    fx.add_collection("f1", "v1", domain, [&](std::size_t i) { return profit[i]; });
    fx.add_collection("f2", "v1", domain, [&](std::size_t i) { return sales[i]; });

    auto out = fx.run(1);
    REQUIRE(out.tuples.size() == 10);

    // independent brute force
    std::vector<std::pair<double, std::size_t>> scores;
    for (std::size_t i = 0; i < 100; ++i) {
        double s = 0;
        for (int t = 0; t < 5; ++t) s += (profit[i][t] - sales[i][t]) * (profit[i][t] - sales[i][t]);
        scores.push_back({std::sqrt(s), i});
    }
    std::stable_sort(scores.begin(), scores.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int i = 0; i < 10; ++i)
        CHECK(value_to_string(out.tuples[i][0]) == domain[scores[i].second]);
}

TEST_CASE("argany threshold process keeps domain order") {
    Fixture fx(
        "name | x | y | z | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'product'.* | v2 <-- argany_v1[t<0] T(f1)\n"
        "*f2 | 'year' | 'sales' | v2 | \n");
    auto domain = names(20);
    // even positions slope +1, odd positions slope -1
    fx.add_collection("f1", "v1", domain, [&](std::size_t i) {
        std::vector<double> ys;
        for (int t = 0; t < 4; ++t)
            ys.push_back(i % 2 == 0 ? static_cast<double>(t) : -static_cast<double>(t));
        return ys;
    });
    auto out = fx.run(0);
    std::vector<std::string> expect;
    for (std::size_t i = 1; i < 20; i += 2) expect.push_back(domain[i]);
    CHECK(first_components(out) == expect);
}

TEST_CASE("outlier process with a sum reduce matches the double loop") {
    Fixture fx(
        "name | x | y | z | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'product'.* | \n"
        "f2 | 'year' | 'sales' | v2 <-- 'product'.* | v3 <-- argmax_v1[k=10] sum_v2 D(f1, f2)\n"
        "*f3 | 'year' | 'sales' | v3 | \n");
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> y(0, 20);
    auto domain = names(30);
    std::vector<std::vector<double>> sales(30);
    for (auto& s : sales)
        for (int t = 0; t < 4; ++t) s.push_back(y(rng));
    fx.add_collection("f1", "v1", domain, [&](std::size_t i) { return sales[i]; });
    fx.add_collection("f2", "v2", domain, [&](std::size_t i) { return sales[i]; });

    auto out = fx.run(1);
    // brute-force double loop
    std::vector<std::pair<double, std::size_t>> scores;
    for (std::size_t i = 0; i < 30; ++i) {
        double total = 0;
        for (std::size_t j = 0; j < 30; ++j) {
            double s = 0;
            for (int t = 0; t < 4; ++t) s += (sales[i][t] - sales[j][t]) * (sales[i][t] - sales[j][t]);
            total += std::sqrt(s);
        }
        scores.push_back({total, i});
    }
    std::stable_sort(scores.begin(), scores.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    REQUIRE(out.tuples.size() == 10);
    for (int i = 0; i < 10; ++i)
        CHECK(value_to_string(out.tuples[i][0]) == domain[scores[i].second]);
}

TEST_CASE("primitive errors carry loop context") {
    Fixture fx(
        "name | x | y | z | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'product'.* | v2 <-- argany_v1[t<0] T(f1)\n"
        "*f2 | 'year' | 'sales' | v2 | \n");
    auto domain = names(3);
    fx.add_collection("f1", "v1", domain, [&](std::size_t i) {
        return std::vector<double>(i == 1 ? 1 : 4, 1.0);  // p101 has a 1-point series
    });
    CHECK_THROWS_WITH_AS(fx.run(0), doctest::Contains("v1=p101"), ZqlError);
}

TEST_CASE("cache-aware evaluation equals the naive evaluator") {
    Fixture fx(
        "name | x | y | z | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'product'.* | \n"
        "f2 | 'year' | 'sales' | v2 <-- 'product'.* | v3 <-- argmax_v1[k=25] sum_v2 D(f1, f2)\n"
        "*f3 | 'year' | 'sales' | v3 | \n");
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> y(0, 30);
    auto domain = names(60);
    std::vector<std::vector<double>> sales(60);
    for (auto& s : sales)
        for (int t = 0; t < 6; ++t) s.push_back(y(rng));
    fx.add_collection("f1", "v1", domain, [&](std::size_t i) { return sales[i]; });
    fx.add_collection("f2", "v2", domain, [&](std::size_t i) { return sales[i]; });
    const ProcessDecl& decl = fx.vq.query.rows[1].processes[0];

    auto naive = eval_process(decl, fx.env);
    for (std::size_t block : {256u, 1024u, 4096u, 16384u, 65536u, 1u << 20, 8u << 20}) {
        CAPTURE(block);
        auto blocked = cache_aware_eval(decl, fx.env, block);
        REQUIRE(blocked.tuples.size() == naive.tuples.size());
        for (std::size_t i = 0; i < naive.tuples.size(); ++i)
            CHECK(tuple_eq(blocked.tuples[i], naive.tuples[i]));
    }

    SUBCASE("blocked iteration loads regions no more often than naive") {
        const std::size_t per_cell = 300;  // rough upper bound for these cells
        const std::size_t cache_bytes = per_cell * 20;

        CacheSim naive_sim(cache_bytes);
        fx.env.cache = &naive_sim;
        eval_process(decl, fx.env);

        CacheSim blocked_sim(cache_bytes);
        fx.env.cache = &blocked_sim;
        cache_aware_eval(decl, fx.env, cache_bytes);
        fx.env.cache = nullptr;

        CHECK(blocked_sim.loads() <= naive_sim.loads());
        CHECK(blocked_sim.loads() < naive_sim.loads());
    }
    SUBCASE("a block larger than the data degenerates to the naive order") {
        CacheSim a(1u << 30), b(1u << 30);
        fx.env.cache = &a;
        eval_process(decl, fx.env);
        fx.env.cache = &b;
        cache_aware_eval(decl, fx.env, 1u << 30);
        fx.env.cache = nullptr;
        CHECK(a.loads() == b.loads());
    }
}

TEST_CASE("representative selection through the process interface") {
    Fixture fx(
        "name | x | y | z | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'product'.* | v2 <-- R(2, v1, f1)\n"
        "*f2 | 'year' | 'sales' | v2 | \n");
    auto domain = names(6);
    fx.add_collection("f1", "v1", domain, [&](std::size_t i) {
        double base = i < 3 ? 0.0 : 50.0;
        return std::vector<double>{base, base + static_cast<double>(i) * 0.01};
    });
    auto out = fx.run(0);
    REQUIRE(out.tuples.size() == 2);
    CHECK(value_to_string(out.tuples[0][0]).substr(0, 2) == "p1");
}
