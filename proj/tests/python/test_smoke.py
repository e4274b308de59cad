"""Smoke tests for the python bindings; the C++ suites carry the real load."""

import csv
import os
from collections import defaultdict

import pytest

import zqlengine as zql

ROOT = os.environ.get("ZQL_REPO_ROOT", os.path.join(os.path.dirname(__file__), "..", ".."))


@pytest.fixture(scope="module")
def products():
    return zql.load_table(
        os.path.join(ROOT, "data", "products.csv"),
        os.path.join(ROOT, "data", "products.schema"),
    )


def read_query(name):
    with open(os.path.join(ROOT, "queries", name)) as f:
        return f.read()


def test_table_loads(products):
    assert products.row_count == 120
    names = [c[0] for c in products.columns]
    assert names == ["year", "month", "product", "location", "category", "sales", "profit"]


def test_overview_matches_a_hand_rolled_groupby(products):
    engine = zql.Engine(products)
    out = engine.run(read_query("overview.zql"))
    cells = out["outputs"][0]["cells"]
    assert len(cells) == 1
    series = dict(cells[0]["series"])

    expected = defaultdict(float)
    with open(os.path.join(ROOT, "data", "products.csv")) as f:
        for row in csv.DictReader(f):
            if row["product"] == "chair":
                expected[int(row["year"])] += float(row["sales"])
    assert set(series) == set(expected)
    for year, total in expected.items():
        assert series[year] == pytest.approx(total, rel=1e-12)


def test_strategies_agree(products):
    engine = zql.Engine(products)
    query = read_query("real2.zql")
    results = [engine.run(query, strategy=s)["outputs"] for s in zql.STRATEGIES]
    for other in results[1:]:
        assert other == results[0]


def test_smartfuse_collapses_requests(products):
    engine = zql.Engine(products)
    query = read_query("proc1.zql")
    noopt = engine.run(query, strategy="noopt")["trace"]
    fused = engine.run(query, strategy="smartfuse")["trace"]
    assert noopt["requests"] == 3
    assert fused["requests"] == 1
    assert "GROUP BY" in fused["request_list"][0]["sql"]


def test_primitives():
    assert zql.t_slope([(0, 0), (1, 2), (2, 4), (3, 6)]) == pytest.approx(2.0)
    assert zql.d_euclidean([(0, 0), (1, 0)], [(0, 3), (1, 4)]) == pytest.approx(5.0)


def test_reprint_round_trips():
    text = read_query("trend.zql")
    once = zql.reprint(text)
    assert zql.reprint(once) == once


def test_plan_dot(products):
    engine = zql.Engine(products)
    dot = engine.plan_dot(read_query("real2.zql"))
    assert dot.startswith("digraph")
    assert "p1" in dot and "f5" in dot


def test_benchmark_request_counts():
    table = zql.bench_table()
    engine = zql.Engine(table)
    queries = zql.benchmark_queries()
    expectations = {"B1": (6, 1), "B2": (4, 1), "B3": (8, 2)}
    for name, (noopt, fused) in expectations.items():
        assert engine.run(queries[name], strategy="noopt")["trace"]["requests"] == noopt
        assert engine.run(queries[name], strategy="smartfuse")["trace"]["requests"] == fused


def test_completeness_smoke():
    outcomes = zql.run_completeness(seed=3, relations=1)
    assert outcomes
    assert all(o["pass"] for o in outcomes)
