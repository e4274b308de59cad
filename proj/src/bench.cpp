#include "zql/bench.hpp"

#include <algorithm>
#include <sstream>

#include "zql/errors.hpp"
#include "zql/parser.hpp"

namespace zql {

namespace {

double hash01(std::uint64_t v) {
    v *= 0x9E3779B97F4A7C15ull;
    v ^= v >> 29;
    v *= 0xBF58476D1CE4E5B9ull;
    v ^= v >> 32;
    return static_cast<double>(v % 100000) / 100000.0;
}

}  // namespace

void ChainBenchSpec::check() const {
    if (n_visualizations < 1 || chain_length < 1 || n_chains < 1)
        throw ZqlError(ErrorStage::Io, ErrorKind::BadK, "chain spec fields must be >= 1");
    if (process_loops != 1 && process_loops != 2)
        throw ZqlError(ErrorStage::Io, ErrorKind::BadK, "process_loops must be 1 or 2");
    if (selectivity <= 0 || selectivity > 1)
        throw ZqlError(ErrorStage::Io, ErrorKind::BadK, "selectivity must be in (0, 1]");
}

ColumnTable make_chain_table(const ChainBenchSpec& spec) {
    spec.check();
    const std::size_t n = spec.n_visualizations;
    const std::size_t xs = 10;

    Column step{"step", ColumnKind::Ordinal, {}, {}, {}};
    std::vector<Column> keys;
    for (std::size_t c = 0; c < spec.n_chains; ++c)
        keys.push_back(Column{"key" + std::to_string(c + 1), ColumnKind::Categorical, {}, {}, {}});
    Column y{"metric", ColumnKind::Measure, {}, {}, {}};

    const std::size_t positive = static_cast<std::size_t>(
        std::max(1.0, std::ceil(spec.selectivity * static_cast<double>(n))));
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t x = 0; x < xs; ++x) {
            step.ord.push_back(static_cast<int64_t>(x));
            for (std::size_t c = 0; c < spec.n_chains; ++c) {
                const std::size_t kk = (k + c * 13) % n;
                keys[c].cat.push_back("k" + std::to_string(kk));
            }
            // the first chain's key decides the drift so selectivity is exact
            const std::size_t key0 = k;
            const double drift = key0 < positive ? (1.0 + hash01(spec.seed ^ key0) * 2.0)
                                                 : -(1.0 + hash01(spec.seed ^ key0) * 2.0);
            y.num.push_back(100.0 + drift * static_cast<double>(x) +
                            10.0 * hash01(spec.seed ^ (k * 1000 + x)));
        }
    }
    std::vector<Column> cols = {step};
    for (auto& c : keys) cols.push_back(std::move(c));
    cols.push_back(std::move(y));
    return ColumnTable("chain", std::move(cols));
}

std::string make_chain_query(const ChainBenchSpec& spec) {
    spec.check();
    std::ostringstream os;
    os << "name | x | y | z | process\n";
    const std::size_t keep = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(spec.selectivity *
                                              static_cast<double>(spec.n_visualizations))) / 2);
    for (std::size_t c = 0; c < spec.n_chains; ++c) {
        const std::string key = "key" + std::to_string(c + 1);
        std::string prev_var;
        for (std::size_t i = 1; i <= spec.chain_length; ++i) {
            const std::string f = "f" + std::to_string(c + 1) + "x" + std::to_string(i);
            const std::string v = "v" + std::to_string(c + 1) + "x" + std::to_string(i);
            const std::string z =
                i == 1 ? v + " <-- '" + key + "'.*" : prev_var;
            const std::string iter = i == 1 ? v : prev_var;
            std::string proc;
            if (i < spec.chain_length) {
                const std::string out = "w" + std::to_string(c + 1) + "x" + std::to_string(i);
                if (spec.process_loops == 1) {
                    proc = i == 1 ? out + " <-- argany_" + iter + "[t>0] T(" + f + ")"
                                  : out + " <-- argmax_" + iter + "[k=" + std::to_string(keep) +
                                        "] T(" + f + ")";
                } else {
                    // two-loop form: a mirror collection over an independent
                    // variable with the same domain feeds a summed pairwise
                    // distance
                    const std::string m = f + "m";
                    const std::string mv = v + "m";
                    const std::string mirror_z =
                        i == 1 ? mv + " <-- '" + key + "'.*" : mv + " <-- " + prev_var;
                    os << m << " | 'step' | 'metric' | " << mirror_z << " | \n";
                    proc = out + " <-- argmax_" + iter + "[k=" + std::to_string(keep) + "] sum_" +
                           mv + " D(" + f + ", " + m + ")";
                }
                prev_var = out;
            }
            const bool last = i == spec.chain_length;
            os << (last ? "*" : "") << f << " | 'step' | 'metric' | " << z << " | " << proc
               << "\n";
        }
    }
    return os.str();
}

ColumnTable make_bench_table(std::uint64_t seed) {
    Column year{"year", ColumnKind::Ordinal, {}, {}, {}};
    Column month{"month", ColumnKind::Ordinal, {}, {}, {}};
    Column product{"product", ColumnKind::Categorical, {}, {}, {}};
    Column location{"location", ColumnKind::Categorical, {}, {}, {}};
    Column category{"category", ColumnKind::Categorical, {}, {}, {}};
    Column sales{"sales", ColumnKind::Measure, {}, {}, {}};
    Column profit{"profit", ColumnKind::Measure, {}, {}, {}};

    for (int y = 0; y < 10; ++y)
        for (int m = 1; m <= 12; ++m)
            for (int p = 0; p < 20; ++p)
                for (int l = 0; l < 10; ++l) {
                    year.ord.push_back(2006 + y);
                    month.ord.push_back(m);
                    product.cat.push_back("prod" + std::to_string(p));
                    location.cat.push_back("loc" + std::to_string(l));
                    category.cat.push_back("cat" + std::to_string(p % 5));
                    const double pdrift = (p % 2 == 0 ? 1.0 : -1.0) * (4.0 + p % 7);
                    const double ldrift = (l % 2 == 0 ? 1.0 : -1.0) * (3.0 + l % 5);
                    const std::uint64_t h = seed ^ (static_cast<std::uint64_t>(p) << 24) ^
                                            (static_cast<std::uint64_t>(l) << 16) ^
                                            (static_cast<std::uint64_t>(m) << 8) ^
                                            static_cast<std::uint64_t>(y);
                    sales.num.push_back(800 + pdrift * y + 5 * m + 25 * hash01(h));
                    profit.num.push_back(300 + ldrift * y + 2 * m + 15 * hash01(h ^ 0xABCD));
                }
    return ColumnTable("bench", {year, month, product, location, category, sales, profit});
}

std::string benchmark_query_b1() {
    return
        "name | x | y | z | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'product'.* | v2 <-- argany_v1[t>0] T(f1)\n"
        "f2 | 'year' | 'profit' | v1 | v3 <-- argany_v1[t<0] T(f2)\n"
        "*f3 | 'year' | 'sales' | v2 | \n"
        "*f4 | 'year' | 'profit' | v3 | \n"
        "f5 | 'year' | 'sales' | v4 <-- 'location'.* | v5 <-- argmax_v4[k=5] T(f5)\n"
        "*f6 | 'year' | 'sales' | v5 | \n";
}

std::string benchmark_query_b2() {
    return
        "name | x | y | z | z2 | z3 | process\n"
        "f1 | 'year' | 'sales' | v1 <-- 'location'.* | | | v2 <-- argany_v1[t<0] T(f1)\n"
        "f2 | 'year' | 'profit' | v3 <-- 'category'.* | | | v4 <-- argany_v3[t<0] T(f2)\n"
        "f3 | 'year' | 'profit' | v5 <-- 'product'.* | 'location'.[? IN v2] | 'category'.[? IN v4] "
        "| v6 <-- argany_v5[t>0] T(f3)\n"
        "f4 | 'year' | 'sales' | v5 | 'location'.[? IN v2] | 'category'.[? IN v4] | "
        "v7 <-- argany_v5[t>0] T(f4)\n"
        "*f5 <-- f3[1:3] + f4[1:3] | | | | | |\n";
}

std::string benchmark_query_b3() {
    std::ostringstream os;
    os << "name | x | y | z | process\n";
    const char* dims[] = {"year", "product", "location", "category"};
    int p = 0;
    for (const char* d : dims) {
        ++p;
        const std::string fa = std::string("fa") + std::to_string(p);
        const std::string fb = std::string("fb") + std::to_string(p);
        const std::string fc = std::string("fc") + std::to_string(p);
        const std::string v = std::string("v") + std::to_string(p);
        const std::string w = std::string("w") + std::to_string(p);
        const std::string u = std::string("u") + std::to_string(p);
        os << fa << " | 'month' | 'sales' | " << v << " <-- '" << d << "'.* | \n";
        os << fb << " <-- " << fa << " | | | " << w << " <-- '" << d << "'._ | " << u
           << " <-- argmax_" << v << "[k=2] sum_" << w << " D(" << fa << ", " << fb << ")\n";
        os << "*" << fc << " | 'month' | 'sales' | " << u << " | \n";
    }
    return os.str();
}

std::string BenchReport::to_text() const {
    std::ostringstream os;
    os << "chain bench: viz=" << spec.n_visualizations << " length=" << spec.chain_length
       << " chains=" << spec.n_chains << " loops=" << spec.process_loops
       << " selectivity=" << spec.selectivity << " seed=" << spec.seed << "\n";
    os << "strategy    requests  phases  group_values  predicted_ms  measured_ms\n";
    for (const auto& s : per_strategy) {
        os << to_string(s.strategy);
        for (std::size_t i = std::string(to_string(s.strategy)).size(); i < 12; ++i) os << ' ';
        os << s.requests << "  " << s.phases << "  " << s.group_values << "  " << s.predicted_ms
           << "  " << s.measured_ms << "\n";
    }
    os << "results identical across strategies: " << (results_identical ? "yes" : "NO") << "\n";
    return os.str();
}

BenchReport run_chain_bench(const ChainBenchSpec& spec, const EngineOptions& options) {
    spec.check();
    BenchReport report;
    report.spec = spec;

    ColumnTable table = make_chain_table(spec);
    const std::string text = make_chain_query(spec);
    ZqlQuery q = parse_query(text);
    AttributeCatalog catalog = AttributeCatalog::defaults_for(table);
    ValidatedQuery vq = validate(q, catalog, SchemaInfo::from_table(table));
    Engine engine(table, PrimitiveRegistry::builtin(), options);

    std::vector<ResultSet> results;
    for (ExecStrategy s : {ExecStrategy::NoOpt, ExecStrategy::Parallel, ExecStrategy::Speculate,
                           ExecStrategy::SmartFuse}) {
        RunOutput out = engine.run(vq, s);
        StrategyStats st;
        st.strategy = s;
        st.requests = out.trace.request_count();
        st.phases = out.trace.phase_count;
        for (const auto& r : out.trace.requests) st.group_values += r.group_values;
        st.predicted_ms = out.trace.predicted_ms;
        st.measured_ms = out.trace.measured_ms;
        report.per_strategy.push_back(st);
        results.push_back(std::move(out.results));
    }
    report.results_identical = true;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (!(results[i] == results[0])) report.results_identical = false;
    return report;
}

ColumnTable make_equivalence_table(std::uint64_t seed) {
    // smaller variant of the bench table so fifty queries stay fast
    Column year{"year", ColumnKind::Ordinal, {}, {}, {}};
    Column month{"month", ColumnKind::Ordinal, {}, {}, {}};
    Column product{"product", ColumnKind::Categorical, {}, {}, {}};
    Column location{"location", ColumnKind::Categorical, {}, {}, {}};
    Column category{"category", ColumnKind::Categorical, {}, {}, {}};
    Column sales{"sales", ColumnKind::Measure, {}, {}, {}};
    Column profit{"profit", ColumnKind::Measure, {}, {}, {}};
    for (int y = 0; y < 5; ++y)
        for (int m = 1; m <= 4; ++m)
            for (int p = 0; p < 10; ++p)
                for (int l = 0; l < 4; ++l) {
                    year.ord.push_back(2012 + y);
                    month.ord.push_back(m);
                    product.cat.push_back("prod" + std::to_string(p));
                    location.cat.push_back("loc" + std::to_string(l));
                    category.cat.push_back("cat" + std::to_string(p % 3));
                    const double pd = (p % 2 ? -1.0 : 1.0) * (2.0 + p % 5);
                    const std::uint64_t h = seed ^ (static_cast<std::uint64_t>(p) << 20) ^
                                            (static_cast<std::uint64_t>(l) << 12) ^
                                            (static_cast<std::uint64_t>(m) << 4) ^
                                            static_cast<std::uint64_t>(y);
                    sales.num.push_back(100 + pd * y + 3 * m + 10 * hash01(h));
                    profit.num.push_back(40 - pd * y + m + 5 * hash01(h ^ 0x77));
                }
    return ColumnTable("equiv", {year, month, product, location, category, sales, profit});
}

std::string random_equivalence_query(std::mt19937_64& rng) {
    std::ostringstream os;
    os << "name | x | y | z | z2 | process\n";

    const char* xs[] = {"'year'", "'month'"};
    const char* ys[] = {"'sales'", "'profit'"};
    const char* dims[] = {"product", "location", "category"};
    auto pick = [&](auto& arr) { return arr[rng() % (sizeof(arr) / sizeof(arr[0]))]; };

    const int depth = 2 + static_cast<int>(rng() % 4);  // 2..5 rows
    std::string prev_out;  // process output feeding the next row
    std::string prev_name;
    std::vector<std::string> names;
    for (int i = 1; i <= depth; ++i) {
        const std::string f = "f" + std::to_string(i);
        const std::string v = "v" + std::to_string(i);
        const std::string w = "w" + std::to_string(i);
        const bool last = i == depth;
        std::string z, z2, proc;

        const int shape = static_cast<int>(rng() % (prev_out.empty() ? 3 : 4));
        const std::string dim = dims[rng() % 3];
        switch (shape) {
            case 0:  // iterate a full dimension
                z = v + " <-- '" + dim + "'.*";
                break;
            case 1: {  // iterate with an exclusion
                const char* excl = dim == "product" ? "prod0" : dim == "location" ? "loc0" : "cat0";
                z = v + " <-- '" + dim + "'.(* - '" + excl + "')";
                break;
            }
            case 2:  // fixed slice with a second constraint
                z = std::string("'product'.'prod") + std::to_string(rng() % 10) + "'";
                z2 = "'month'.[? < 3]";
                break;
            default:  // reuse the previous process output
                z = prev_out;
                break;
        }
        if (!last && shape != 2) {
            const int ptype = static_cast<int>(rng() % 3);
            const std::string iter = shape == 3 ? prev_out : v;
            if (ptype == 0) proc = w + " <-- argany_" + iter + "[t" + (rng() % 2 ? ">" : "<") + "0] T(" + f + ")";
            else if (ptype == 1)
                proc = w + " <-- argmax_" + iter + "[k=" + std::to_string(1 + rng() % 4) + "] T(" + f + ")";
            else if (!prev_name.empty())
                proc = w + " <-- argmin_" + iter + "[k=" + std::to_string(1 + rng() % 4) + "] T(" + f + ")";
            else
                proc = w + " <-- argmax_" + iter + "[p=50] T(" + f + ")";
            prev_out = w;
        } else if (!last) {
            prev_out.clear();
        }
        os << (last ? "*" : "") << f << " | " << pick(xs) << " | " << pick(ys) << " | " << z
           << " | " << z2 << " | " << proc << "\n";
        prev_name = f;
        names.push_back(f);
    }
    // occasionally append a derived output row combining two collections
    if (names.size() >= 2 && rng() % 2 == 0) {
        os << "*fd <-- " << names[0] << "+" << names[names.size() - 2] << " | | | | |\n";
    }
    return os.str();
}

}  // namespace zql
