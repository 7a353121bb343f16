import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenfuzz.feedback import (PASSED, VIOLATED, evaluate, f_collision, f_destination, graph_distance,
                               min_distance_to_set, oracle, violation_degree)

from conftest import make_trace

binmat = st.lists(st.integers(0, 1), min_size=12, max_size=12).map(lambda v: np.array(v).reshape(3, 4))


def test_cosine_examples():
    assert graph_distance(np.array([1, 1, 0]), np.array([1, 0, 1])) == pytest.approx(0.5, abs=1e-12)
    b = np.array([[0, 1], [1, 1]])
    assert graph_distance(b, b) == pytest.approx(0.0, abs=1e-12)
    assert graph_distance(np.array([1, 0, 0]), np.array([0, 1, 1])) == pytest.approx(1.0, abs=1e-12)


def test_zero_matrix_convention():
    z = np.zeros((2, 2))
    assert graph_distance(z, z) == 0.0
    assert graph_distance(z, np.eye(2)) == 1.0


def test_shape_mismatch():
    with pytest.raises(ValueError):
        graph_distance(np.zeros((2, 2)), np.zeros((2, 3)))


def test_min_distance_to_set():
    b = np.array([1, 1, 0])
    assert min_distance_to_set(b, []) == 1.0
    assert min_distance_to_set(b, [np.array([0, 0, 1]), b]) == 0.0
    assert min_distance_to_set(b, [np.array([0, 0, 1])]) == 1.0


@given(binmat, binmat)
def test_distance_symmetric_bounded(a, b):
    d = graph_distance(a, b)
    assert 0.0 <= d <= 1.0
    assert d == graph_distance(b, a)
    assert graph_distance(a, a) == 0.0


@given(binmat, st.lists(binmat, max_size=4), st.lists(binmat, max_size=4))
def test_min_over_superset_shrinks(b, S, extra):
    assert min_distance_to_set(b, S + extra) <= min_distance_to_set(b, S)


def test_oracle_cases():
    assert oracle(make_trace((99.5, 0.0), min_dist=3.2)) == PASSED
    assert oracle(make_trace((99.5, 0.0), collided=True)) == VIOLATED
    assert oracle(make_trace((60.0, 0.0), min_dist=8.0)) == VIOLATED


def test_violation_degree_examples():
    assert violation_degree(make_trace((60.0, 0.0), collided=True)) == 0.0
    assert violation_degree(make_trace((99.5, 0.0), min_dist=5.0)) == 14.5
    assert violation_degree(make_trace((75.0, 0.0), min_dist=2.0)) == 2.0


@given(st.floats(0, 200), st.floats(0, 50), st.booleans())
def test_degree_nonnegative_and_zero_iff(x, dmin, coll):
    t = make_trace((x, 0.0), min_dist=dmin, collided=coll)
    d = violation_degree(t)
    assert d >= 0
    assert d == f_collision(t) + f_destination(t)
    touched = coll or dmin == 0
    assert (d == 0) == (touched and abs(100 - x) >= 10)


def test_evaluate_record():
    t = make_trace((99.5, 0.0), min_dist=5.0)
    b = np.array([[1, 0], [0, 1]])
    rec = evaluate(t, b, b, [], [b])
    assert (rec.ts, rec.vd, rec.degree, rec.result) == (1.0, 0.0, 14.5, PASSED)
    assert not rec.violated and rec.to_dict()["f_destination"] == 9.5
