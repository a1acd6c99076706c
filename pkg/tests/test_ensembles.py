import numpy as np
import pytest

from dirwalk.applications import t_r
from dirwalk.ensembles import (
    composite,
    cyclic,
    cyclic_param_matrix,
    dirichlet,
    explicit_mixture,
    from_dict,
    leader,
    point_mass,
    polling_cycle,
)
from dirwalk.errors import AllZeroParams, InvalidEnsemble
from dirwalk.rng import RngStream
from dirwalk.sampling import sample_matrix

SWAP = [[0.0, 1.0], [1.0, 0.0]]


def test_point_mass_is_constant():
    x = sample_matrix(point_mass(SWAP), RngStream(0), size=10)
    assert np.all(x == np.array(SWAP))


def test_mixture_frequencies_and_normalised_weights():
    e = explicit_mixture([(3.0, np.eye(2)), (1.0, SWAP)])
    assert e.weights == (0.75, 0.25)
    x = sample_matrix(e, RngStream(1), size=40_000)
    frac = np.mean(x[:, 0, 0] == 0.0)
    assert abs(frac - 0.25) < 4 * np.sqrt(0.25 * 0.75 / 40_000)


def test_mixture_validation():
    with pytest.raises(InvalidEnsemble):
        explicit_mixture([])
    with pytest.raises(InvalidEnsemble):
        explicit_mixture([(1.0, np.eye(2)), (1.0, np.eye(3))])
    with pytest.raises(InvalidEnsemble):
        explicit_mixture([(-1.0, np.eye(2))])


def test_composite_is_ordered_product():
    a = point_mass([[0.5, 0.5], [0.0, 1.0]])
    b = point_mass(SWAP)
    x = sample_matrix(composite([a, b]), RngStream(2))
    np.testing.assert_allclose(x.values, np.array([[0.5, 0.5], [0.0, 1.0]]) @ np.array(SWAP))


def test_composite_rectangular_chain():
    e = composite([dirichlet(np.ones((2, 3))), dirichlet(np.ones((3, 4)))])
    assert (e.r, e.c) == (2, 4)
    x = sample_matrix(e, RngStream(3), size=5)
    np.testing.assert_allclose(x.sum(axis=2), 1.0, atol=1e-14)
    with pytest.raises(InvalidEnsemble):
        composite([dirichlet(np.ones((2, 3))), dirichlet(np.ones((2, 2)))])


def test_polling_cycle_matches_operator_product():
    inner = dirichlet(np.ones((4, 4)))
    xs = sample_matrix(inner, RngStream(4), size=20)
    cyc = sample_matrix(polling_cycle(inner), RngStream(4), size=20)
    for x, c in zip(xs, cyc):
        expect = np.eye(4)
        for r in range(1, 5):
            expect = expect @ t_r(x, r).values
        np.testing.assert_allclose(c, expect, atol=1e-14)


def test_cyclic_param_matrix():
    a = cyclic_param_matrix(4).values
    assert a.sum() == 8
    assert all(a[k, k] == 1 and a[k, (k + 1) % 4] == 1 for k in range(4))


def test_dirichlet_rejects_empty_row():
    with pytest.raises(AllZeroParams):
        dirichlet([[0, 0], [1, 1]])


def test_from_dict_round_trip():
    specs = [
        cyclic(3),
        leader(4),
        dirichlet([[1, 2], [0, 1]]),
        explicit_mixture([(0.5, np.eye(2)), (0.5, SWAP)]),
        composite([cyclic(3), leader(3)]),
        polling_cycle(cyclic(3)),
    ]
    for e in specs:
        back = from_dict(e.to_dict())
        a = sample_matrix(e, RngStream(5), size=3)
        b = sample_matrix(back, RngStream(5), size=3)
        np.testing.assert_array_equal(a, b)
    assert isinstance(from_dict([[1, 0], [0, 1]]).r, int)
    with pytest.raises(InvalidEnsemble):
        from_dict({"kind": "nope"})
    with pytest.raises(InvalidEnsemble):
        from_dict({"kind": "cyclic"})


def test_every_draw_is_stochastic():
    for e in (cyclic(5), leader(5), dirichlet([[0.1, 0.2, 0.0], [1, 1, 1], [0, 0, 3]])):
        x = sample_matrix(e, RngStream(6), size=2000)
        assert np.all(x >= 0)
        np.testing.assert_allclose(x.sum(axis=2), 1.0, atol=1e-12)
