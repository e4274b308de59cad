"""Collection-oriented visual exploration queries over columnar data.

The heavy lifting lives in the `_zqlengine` extension module; this package
re-exports its surface. Typical use:

    import zqlengine as zql

    table = zql.load_table("data/products.csv", "data/products.schema")
    engine = zql.Engine(table)
    out = engine.run(open("queries/trend.zql").read(), strategy="smartfuse")
    for output in out["outputs"]:
        print(output["name"], len(output["cells"]), "visualizations")
"""

from _zqlengine import (  # noqa: F401
    Engine,
    Table,
    ZqlError,
    bench_table,
    benchmark_queries,
    d_euclidean,
    equivalence_table,
    load_table,
    reprint,
    run_chain_bench,
    run_completeness,
    t_slope,
)

STRATEGIES = ("noopt", "parallel", "speculate", "smartfuse")

__all__ = [
    "Engine",
    "Table",
    "ZqlError",
    "STRATEGIES",
    "bench_table",
    "benchmark_queries",
    "d_euclidean",
    "equivalence_table",
    "load_table",
    "reprint",
    "run_chain_bench",
    "run_completeness",
    "t_slope",
]
