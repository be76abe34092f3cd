import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vizrec.queries import (
    INF,
    Clause,
    Connection,
    EmptySupportError,
    Pmf,
    Predicate,
    Visualization,
    estimate_pmf,
    evaluate_predicate,
    groupby_domain,
    selectivity,
)
from vizrec.tables import FeatureKind, from_arrays


def brute_rows(pred, table):
    """Row-by-row Python re-implementation used as the oracle."""
    out = []
    for i in range(table.n):
        ok = True
        for conn in pred.connections:
            if conn.is_sentinel:
                continue
            x = float(table.metric(conn.feature)[i])
            if np.isnan(x):
                ok = False
                break
            hit = False
            for c in conn.clauses:
                if c.is_sentinel:
                    hit = True
                elif c.op == "<=":
                    hit = x <= c.value
                elif c.op == ">=":
                    hit = x >= c.value
                elif c.op == "<":
                    hit = x < c.value
                elif c.op == ">":
                    hit = x > c.value
                elif c.op == "=":
                    hit = x == c.value
                else:
                    hit = x != c.value
                if hit:
                    break
            if not hit:
                ok = False
                break
        if ok:
            out.append(i)
    return out


values_st = st.one_of(st.integers(-3, 3).map(float), st.just(INF))
ops_st = st.sampled_from(["<=", ">=", "=", "!=", "<", ">"])


@st.composite
def predicates(draw):
    feats = draw(st.lists(st.sampled_from(["a", "b"]), unique=True, max_size=2))
    conns = []
    for f in feats:
        clauses = draw(
            st.lists(
                st.tuples(ops_st, values_st).map(lambda t: Clause(f, *t)),
                min_size=1,
                max_size=3,
                unique=True,
            )
        )
        conns.append(Connection(f, tuple(clauses)))
    return Predicate(tuple(conns))


@st.composite
def tables(draw):
    n = draw(st.integers(1, 30))
    a = draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n))
    b = draw(st.lists(st.one_of(st.integers(-3, 3), st.just(np.nan)), min_size=n, max_size=n))
    return from_arrays(
        "t",
        {
            "a": (FeatureKind.DISCRETE, np.array(a, dtype=float)),
            "b": (FeatureKind.CONTINUOUS, np.array(b, dtype=float)),
        },
    )


@settings(max_examples=200, deadline=None)
@given(tables(), predicates())
def test_evaluate_matches_bruteforce(table, pred):
    assert list(evaluate_predicate(pred, table)) == brute_rows(pred, table)


@settings(max_examples=100, deadline=None)
@given(tables(), predicates())
def test_adding_a_conjunct_never_grows_selection(table, pred):
    wider_feats = set(pred.features)
    extra = Connection("a", (Clause("a", "<=", 0.0),))
    if "a" in wider_feats:
        return
    narrowed = Predicate(pred.connections + (extra,))
    assert set(evaluate_predicate(narrowed, table)) <= set(evaluate_predicate(pred, table))


def test_sentinel_clause_selects_everything(tiny_table):
    pred = Predicate((Connection("a", (Clause("a", "<=", INF),)),))
    assert len(evaluate_predicate(pred, tiny_table)) == tiny_table.n
    assert selectivity(pred, tiny_table) == 1.0


def test_json_round_trip():
    pred = Predicate(
        (
            Connection("a", (Clause("a", "<=", 2.0), Clause("a", ">", 5.0))),
            Connection("b", (Clause("b", "=", 1.0),)),
        )
    )
    assert Predicate.from_json(pred.to_json()).canonical() == pred.canonical()


def test_canonical_is_order_insensitive():
    c1 = Connection("a", (Clause("a", "<=", 2.0),))
    c2 = Connection("b", (Clause("b", "=", 1.0),))
    assert Predicate((c1, c2)).canonical() == Predicate((c2, c1)).canonical()


def test_predicate_rejects_repeated_feature():
    c = Connection("a", (Clause("a", "<=", 2.0),))
    with pytest.raises(ValueError):
        Predicate((c, c))


def test_clause_rejects_nan_and_bad_op():
    with pytest.raises(ValueError):
        Clause("a", "<=", float("nan"))
    with pytest.raises(ValueError):
        Clause("a", "<>", 1.0)


def test_visualization_rejects_groupby_in_predicate(tiny_table):
    pred = Predicate((Connection("g", (Clause("g", "<=", 1.0),)),))
    with pytest.raises(ValueError):
        Visualization(pred, "g")


def test_pmf_estimation_tiny(tiny_table):
    # g values: 1,1,2,2,1,2,1,2 -> (0.5, 0.5); filter b<=0 keeps rows 0,2,4,6
    vis = Visualization(Predicate(), "g")
    pmf = estimate_pmf(vis, tiny_table)
    assert pmf.support == 8
    assert pmf.probs == (0.5, 0.5)
    filt = Predicate((Connection("b", (Clause("b", "<=", 0.0),)),))
    pmf2 = estimate_pmf(Visualization(filt, "g"), tiny_table)
    assert pmf2.support == 4
    assert pmf2.support_values == pmf.support_values  # aligned to full table
    assert pmf2.probs == (0.75, 0.25)


def test_zero_support_raises(tiny_table):
    pred = Predicate((Connection("a", (Clause("a", ">", 99.0),)),))
    with pytest.raises(EmptySupportError):
        estimate_pmf(Visualization(pred, "g"), tiny_table)


def test_continuous_groupby_buckets_from_full_table():
    rng = np.random.default_rng(1)
    t = from_arrays(
        "c",
        {
            "x": (FeatureKind.CONTINUOUS, rng.uniform(0, 10, 500)),
            "f": (FeatureKind.BINARY, rng.integers(0, 2, 500).astype(float)),
        },
    )
    values, edges = groupby_domain(t, "x", bucket_count=10)
    assert len(values) == 10
    assert edges[0] == t.metric("x").min() and edges[-1] == t.metric("x").max()
    filt = Predicate((Connection("f", (Clause("f", "<=", 0.0),)),))
    pmf = estimate_pmf(Visualization(filt, "x"), t)
    assert pmf.support_values == values  # domain unaffected by the filter
    assert abs(sum(pmf.probs) - 1.0) < 1e-12


def test_pmf_validation():
    with pytest.raises(ValueError):
        Pmf((0.0, 1.0), (0.6, 0.6), 10, (6.0, 6.0))
    with pytest.raises(ValueError):
        Pmf((0.0,), (1.0,), 0, (0.0,))
