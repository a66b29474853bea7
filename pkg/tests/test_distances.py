import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gendiag.distances import (
    Euclidean, FunctionDistance, Hamming, LazyPairwise, MetropolisHastings, UserTable, euclidean,
    hamming, mh_distance, pairwise_matrix, read_distance_table,
)
from gendiag.errors import FormatError, GendiagError, ShapeMismatch, UndefinedRatio
from gendiag.proposals import CustomProposal, RandomWalk, ReflectMixture
from gendiag.samplers import X3
from gendiag.states import BinaryMatrix, Partition, RealVector, coassociation

R = lambda *v: RealVector(list(v))  # noqa: E731


@pytest.mark.parametrize("x,y,d", [((0,), (0,), 0), ((-3,), (3,), 6), ((1, 2, 3), (4, 6, 3), 5)])
def test_euclidean_examples(x, y, d):
    assert euclidean(R(*x), R(*y)) == d


def test_euclidean_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        euclidean(R(1.0), R(1.0, 2.0))
    with pytest.raises(ShapeMismatch):
        hamming(BinaryMatrix(np.zeros((2, 2))), BinaryMatrix(np.zeros((2, 3))))


def test_hamming_examples():
    a = BinaryMatrix.from_flat(2, 2, [0, 1, 1, 0])
    assert hamming(a, a) == 0
    assert hamming(a, BinaryMatrix.from_flat(2, 2, [1, 1, 1, 0])) == 1


def test_hamming_xor_oracle():
    rng = np.random.default_rng(1)
    for _ in range(100):
        a, b = rng.integers(0, 2, (15, 15)), rng.integers(0, 2, (15, 15))
        count = sum(int(a[i, j] ^ b[i, j]) for i in range(15) for j in range(15))
        assert hamming(BinaryMatrix(a), BinaryMatrix(b)) == count


def test_hamming_partitions_use_coassociation():
    p, q = Partition([0, 0, 1]), Partition([0, 1, 1])
    assert hamming(p, q) == hamming(coassociation(p), coassociation(q)) == 4
    assert hamming(Partition([0, 0, 1]), Partition([5, 5, 2])) == 0


bits = arrays(np.uint8, (3, 3), elements=st.integers(0, 1))


@given(bits, bits, bits)
def test_hamming_metric(a, b, c):
    A, B, C = BinaryMatrix(a), BinaryMatrix(b), BinaryMatrix(c)
    assert (hamming(A, B) == 0) == (A == B)
    assert hamming(A, C) <= hamming(A, B) + hamming(B, C)
    assert hamming(A, B) == hamming(B, A)


def test_mh_self_distance_zero_under_random_walk():
    assert mh_distance(R(0.3), R(0.3), X3.log_density, RandomWalk(1.0)) == 0.0


def test_mh_orderings_match_case_study():
    # the local walk sees 0 as nearer to -3 than 3; the reflecting proposal sees the opposite
    m1 = lambda a, b: mh_distance(R(a), R(b), X3.log_density, RandomWalk(1.0))  # noqa: E731
    m2 = lambda a, b: mh_distance(R(a), R(b), X3.log_density, ReflectMixture(0.1))  # noqa: E731
    assert m1(-3, 0) < m1(-3, 3)
    assert m2(-3, 3) < m2(-3, 0)


def test_mh_closed_form_value():
    # uniform target, RW sd s: d = 1 - exp(-(x-y)^2 / (2 s^2))
    flat = lambda a: 0.0  # noqa: E731
    for dx in (0.1, 0.5, 2.0):
        got = mh_distance(R(0.0), R(dx), flat, RandomWalk(0.7))
        assert got == pytest.approx(1 - math.exp(-dx * dx / (2 * 0.49)), rel=1e-12)


def test_mh_monotone_in_separation_on_flat_target():
    flat = lambda a: 0.0  # noqa: E731
    for prop in (RandomWalk(0.5), RandomWalk(2.0)):
        ds = [mh_distance(R(0.0), R(x), flat, prop) for x in np.linspace(0, 5, 50)]
        assert np.all(np.diff(ds) >= 0)


def test_mh_log_space_extremes():
    steep = lambda a: -1e4 * float(np.sum(np.asarray(a) ** 2))  # noqa: E731
    d = mh_distance(R(0.0), R(0.265), steep, RandomWalk(1.0))  # ratio about e^-700
    assert 0 <= d <= 1 and not math.isnan(d)
    assert mh_distance(R(-3.0), R(3.0), X3.log_density, ReflectMixture(0.1)) < 1
    assert mh_distance(R(-3.0), R(0.0), X3.log_density, RandomWalk(1.0)) == pytest.approx(1 - math.exp(-4.5))


def test_mh_undefined_ratio():
    dead = lambda a: -math.inf  # noqa: E731
    with pytest.raises(UndefinedRatio):
        mh_distance(R(0.0), R(1.0), dead, RandomWalk(1.0))
    one_dead = lambda a: 0.0 if a[0] < 0.5 else -math.inf  # noqa: E731
    assert mh_distance(R(0.0), R(1.0), one_dead, RandomWalk(1.0)) == 1.0
    pool = [R(1.0), R(2.0)]
    with pytest.raises(UndefinedRatio):
        pairwise_matrix(pool, MetropolisHastings(dead, RandomWalk(1.0)))


@settings(max_examples=200)
@given(st.floats(-8, 8), st.floats(-8, 8), st.sampled_from([RandomWalk(1.0), ReflectMixture(0.1), RandomWalk(0.1)]))
def test_mh_bounded_symmetric(x, y, prop):
    a = mh_distance(R(x), R(y), X3.log_density, prop)
    b = mh_distance(R(y), R(x), X3.log_density, prop)
    assert 0 <= a <= 1 and a == b


def test_reflect_mixture_symmetric():
    rng = np.random.default_rng(2)
    q = ReflectMixture(0.7)
    x, y = rng.normal(0, 3, (1000, 1)), rng.normal(0, 3, (1000, 1))
    np.testing.assert_allclose(q.log_q(y, x), q.log_q(x, y), rtol=1e-12)


def test_q_star_is_maximum():
    rng = np.random.default_rng(3)
    grid = np.linspace(-12, 12, 200001)[:, None]
    for q in (RandomWalk(0.4), ReflectMixture(0.1), ReflectMixture(3.0)):
        for x in rng.normal(0, 3, 5):
            best = np.max(q.log_q(grid, np.array([x])))
            assert q.log_q_star(np.array([x])) == pytest.approx(best, abs=1e-6)
            assert q.log_q_star(np.array([x])) >= best - 1e-12


def test_custom_proposal_grid_fallback():
    rw = RandomWalk(0.5)
    c = CustomProposal(rw.log_q, bounds=(-10, 10))
    assert c.log_q_star(np.array([1.3])) == pytest.approx(float(rw.log_q_star(np.array([1.3]))), abs=1e-3)
    with pytest.raises(ValueError):
        CustomProposal(rw.log_q)


def test_pairwise_examples():
    M = pairwise_matrix([R(-3.0), R(0.0), R(3.0)], Euclidean())
    assert M[0, 1] == 3 and M[0, 2] == 6 and M[1, 2] == 3
    assert pairwise_matrix([R(1.0)], Euclidean()).values.shape == (1, 1)


@pytest.mark.parametrize("threads", ["1", "3"])
def test_pairwise_recompute_oracle(monkeypatch, threads):
    monkeypatch.setenv("GENDIAG_THREADS", threads)
    rng = np.random.default_rng(4)
    pool = [R(float(v)) for v in rng.normal(0, 3, 50)]
    for d in (Euclidean(), MetropolisHastings(X3.log_density, ReflectMixture(0.1))):
        M = pairwise_matrix(pool, d)
        for i in range(50):
            for j in range(50):
                assert M[i, j] == pytest.approx(d(pool[i], pool[j]), rel=1e-12, abs=1e-15)
        assert np.array_equal(M.values, M.values.T)


def test_lazy_rows_match_dense():
    rng = np.random.default_rng(5)
    pool = [BinaryMatrix(rng.integers(0, 2, (4, 4))) for _ in range(20)]
    lazy, dense = LazyPairwise(pool, Hamming()), pairwise_matrix(pool, Hamming())
    for i in range(20):
        assert np.array_equal(lazy.row(i), dense.row(i))
    assert lazy.evaluations == 400


def test_function_distance_and_bad_values():
    pool = [R(0.0), R(1.0)]
    M = pairwise_matrix(pool, FunctionDistance(lambda a, b: abs(a.values[0] - b.values[0]) ** 2))
    assert M[0, 1] == 1.0
    with pytest.raises(GendiagError, match="pair"):
        pairwise_matrix(pool, FunctionDistance(lambda a, b: -1.0))
    with pytest.raises(GendiagError):
        pairwise_matrix(pool, FunctionDistance(lambda a, b: math.nan))


def test_user_table(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("i,j,distance\n0,1,2.5\n1,2,1.0\n2,0,3.0\n")
    t = read_distance_table(p)
    assert t.values.tolist() == [[0, 2.5, 3], [2.5, 0, 1], [3, 1, 0]]
    with pytest.raises(ShapeMismatch):
        t.prepare([R(0.0)] * 2)
    p.write_text("i,j,distance\n0,1,2.5\n1,2,1.0\n")
    with pytest.raises(FormatError, match="missing"):
        read_distance_table(p)
    p.write_text("a,b,c\n")
    with pytest.raises(FormatError):
        read_distance_table(p)
    p.write_text("i,j,distance\n0,1,x\n")
    with pytest.raises(FormatError) as e:
        read_distance_table(p)
    assert e.value.line == 2
    with pytest.raises(FormatError):
        UserTable(np.array([[0, 1], [2, 0]]))
