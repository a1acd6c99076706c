import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_stochastic
from dirwalk.applications import (
    AffineFrame,
    ExchangeChain,
    PollingWalk,
    SimplexCascade,
    beta_params,
    cascade_step,
    exchange_stationary_test,
    exchange_step,
    exchange_trajectory,
    polling_cycle_step,
    polling_samples,
    polling_stationary_test,
    polling_step,
    simplices_batch,
    simplices_run,
    t_r,
    trajectory_csv,
)
from dirwalk.characterization import dirichlet_battery, estimate_limit_params
from dirwalk.ensembles import cyclic, cyclic_param_matrix, dirichlet, leader, point_mass
from dirwalk.errors import IndexOutOfRange, NotSquare
from dirwalk.rng import RngStream
from dirwalk.sampling import sample_dirichlet, sample_matrix


# ---------------------------------------------------------------- exchange


def test_exchange_identity_is_frozen():
    chain = ExchangeChain.start(point_mass(np.eye(3)), [0.2, 0.3, 0.5])
    rng = RngStream(0)
    for _ in range(20):
        chain = exchange_step(chain, rng)
    np.testing.assert_array_equal(chain.state.values, [0.2, 0.3, 0.5])
    assert chain.n == 20


def test_exchange_first_step_from_corner():
    rng = RngStream(1)
    u = RngStream(1).uniform()
    chain = exchange_step(ExchangeChain.start(cyclic(3), [1, 0, 0]), rng)
    np.testing.assert_allclose(chain.state.values, [u, 1 - u, 0])


def test_exchange_conservation():
    traj = exchange_trajectory(leader(4), [1, 0, 0, 0], 1_000_000, RngStream(2))
    assert np.max(np.abs(traj.sum(axis=1) - 1.0)) <= 1e-10
    chain = ExchangeChain.start(cyclic(3))
    rng = RngStream(3)
    for _ in range(10_000):
        chain = exchange_step(chain, rng)
    assert abs(chain.state.values.sum() - 1.0) <= 1e-10


def test_exchange_stationary_examples():
    rep = exchange_stationary_test(cyclic(3), [2, 2, 2], rng=RngStream(4))
    assert rep.passed
    assert abs(rep.details["var"][0] - 2 / 63) < 0.15 * 2 / 63
    assert exchange_stationary_test(leader(3), [2, 2, 2], rng=RngStream(5)).passed
    assert not exchange_stationary_test(cyclic(3), [1, 1, 1], rng=RngStream(6)).passed


@pytest.mark.parametrize("e", [cyclic(3), leader(3)])
def test_one_step_invariance(e):
    q = sample_dirichlet([2, 2, 2], RngStream(7), size=100_000)
    x = sample_matrix(e, RngStream(8), size=100_000)
    assert dirichlet_battery(np.einsum("ni,nij->nj", q, x), [2, 2, 2]).passed


def test_trajectory_csv():
    traj = exchange_trajectory(cyclic(3), [1, 0, 0], 3, RngStream(9))
    text = trajectory_csv(traj)
    lines = text.split("\r\n")
    assert lines[0] == "step,x1,x2,x3" and lines[1].startswith("0,1.0,0.0,0.0") and len(lines) == 6


# ---------------------------------------------------------------- simplices


def test_frame_round_trip_and_validation():
    f = AffineFrame([[0, 0], [2, 0], [0, 1]])
    b = np.array([0.2, 0.3, 0.5])
    np.testing.assert_allclose(f.to_barycentric(f.to_cartesian(b)), b, atol=1e-15)
    with pytest.raises(ValueError):
        AffineFrame([[0, 0], [1, 1], [2, 2]])
    std = AffineFrame.standard(4)
    np.testing.assert_array_equal(std.vertices, np.vstack([np.zeros(3), np.eye(3)]))


def test_uniform_rows_hit_barycenter_in_one_step():
    f = AffineFrame([[0, 0], [4, 0], [0, 2]])
    res = simplices_run(f, point_mass(np.full((3, 3), 1 / 3)), rng=RngStream(0))
    assert res.steps == 1 and res.converged
    np.testing.assert_allclose(res.point, [4 / 3, 2 / 3], atol=1e-15)


def test_simplex_limit_matches_first_row_of_product():
    f = AffineFrame.standard(3)
    res = simplices_run(f, cyclic(3), rng=RngStream(10))
    from dirwalk.products import iterate_until_converged

    tr = iterate_until_converged(cyclic(3), 1e-300, res.steps, RngStream(10))
    np.testing.assert_allclose(res.barycentric.values, tr.final.values[0], atol=1e-8)
    np.testing.assert_allclose(f.to_cartesian(res.barycentric.values), res.point, atol=1e-8)


def test_simplex_diameters_non_increasing():
    hist = np.array(simplices_run(AffineFrame.standard(4), leader(4), rng=RngStream(11)).diameter_history)
    assert np.all(np.diff(hist[:, 1]) <= 1e-15)


def test_cascade_vertices_stay_inside():
    f = AffineFrame([[0, 0], [1, 0], [0.3, 2]])
    c = SimplexCascade.start(f)
    rng = RngStream(12)
    for _ in range(30):
        c = cascade_step(c, dirichlet(np.ones((3, 3))), rng)
        bary = f.to_barycentric(c.vertices)
        assert np.all(bary >= -1e-10)
        np.testing.assert_allclose(bary.sum(axis=1), 1.0, atol=1e-10)


def test_simplices_batch_fits_dirichlet():
    f = AffineFrame.standard(3)
    b = simplices_batch(f, cyclic(3), 10_000, rng=RngStream(13))
    assert b.converged.all()
    fit = estimate_limit_params(b.barycentric).values
    assert np.max(np.abs(fit - 2) / 2) <= 0.1
    assert np.max(np.abs(f.to_cartesian(b.barycentric) - b.points)) <= 1e-8


# ---------------------------------------------------------------- polling


def test_t_r_examples():
    np.testing.assert_array_equal(t_r(np.eye(3), 2).values, np.eye(3))
    x = np.array([[1, 0, 0], [0.2, 0.3, 0.5], [0, 0, 1.0]])
    np.testing.assert_array_equal(t_r(x, 2).values, x)
    with pytest.raises(IndexOutOfRange):
        t_r(x, 0)
    with pytest.raises(IndexOutOfRange):
        t_r(x, 4)


def test_beta_examples():
    a = cyclic_param_matrix(3)
    assert beta_params(a, 1).tolist() == [1, 2, 1]
    assert beta_params(a, 3).tolist() == [2, 1, 1]
    aa, bb, cc = 1.5, 0.7, 2.2
    assert beta_params([[aa, bb], [bb, cc]], 1).tolist() == pytest.approx([aa, cc + bb])
    with pytest.raises(NotSquare):
        beta_params(np.ones((2, 3)), 1)


@pytest.mark.parametrize("d", range(2, 9))
def test_beta_rows_for_cyclic_matrix(d):
    a = cyclic_param_matrix(d)
    rows = [beta_params(a, r).values for r in range(1, d + 1)]
    for r, row in enumerate(rows, start=1):
        assert row.sum() == d + 1
        assert row[r % d] == 2 and np.sum(row == 1) == d - 1
        np.testing.assert_array_equal(np.roll(rows[0], r - 1), row)


def test_polling_step_examples():
    w = PollingWalk.start(cyclic(3), [0.5, 0.3, 0.2])
    out = polling_step(w, 1, [0.1, 0.4, 0.5])
    np.testing.assert_allclose(out.state.values, [0.05, 0.5, 0.45], atol=1e-15)
    empty = PollingWalk.start(cyclic(3), [0.0, 0.3, 0.7])
    assert polling_step(empty, 1, [0.1, 0.4, 0.5]).state == empty.state
    assert polling_step(w, 2, [0, 1, 0]).state == w.state


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_operator_consistency(d, seed):
    rng = np.random.default_rng(seed)
    x = random_stochastic(rng, d)
    b = rng.dirichlet(np.ones(d))
    w = PollingWalk.start(cyclic(d), b)
    prod = np.eye(d)
    for r in range(1, d + 1):
        w = polling_step(w, r, x[r - 1])
        prod = prod @ t_r(x, r).values
    np.testing.assert_allclose(w.state.values, b @ prod, atol=1e-12)


def test_polling_cycle_step_uses_one_draw():
    w = PollingWalk.start(cyclic(3), [0.2, 0.3, 0.5])
    x = sample_matrix(cyclic(3), RngStream(14)).values
    after = polling_cycle_step(w, RngStream(14))
    expect = w.state.values @ t_r(x, 1).values @ t_r(x, 2).values @ t_r(x, 3).values
    np.testing.assert_allclose(after.state.values, expect, atol=1e-14)
    assert after.n == 3


def test_polling_stationary_examples():
    rep = polling_stationary_test(cyclic(3), r=1, rng=RngStream(15))
    assert rep.passed and rep.details["beta"] == [1.0, 2.0, 1.0]
    fit = np.array(rep.details["t_hat"])
    assert np.max(np.abs(fit - [1, 2, 1]) / [1, 2, 1]) <= 0.1
    ones = np.ones((2, 2))
    rep2 = polling_stationary_test(dirichlet(ones), ones, r=1, rng=RngStream(16))
    assert rep2.passed and rep2.details["beta"] == [1.0, 2.0]
    na = polling_stationary_test(point_mass(np.eye(3)), [1, 2, 1], r=1, rng=RngStream(17))
    assert not na.passed and na.details["applicable"] is False


def test_polling_residues_shift_parameters():
    fits = []
    for r in (1, 2, 3):
        fits.append(estimate_limit_params(polling_samples(cyclic(3), r, rng=RngStream(18 + r))).values)
    for r in (2, 3):
        np.testing.assert_allclose(fits[r - 1], np.roll(fits[0], r - 1), rtol=0.1)


def test_polling_fresh_draw_variant_runs():
    s = polling_samples(cyclic(3), 1, n_samples=2000, rng=RngStream(19), fresh_per_step=True)
    np.testing.assert_allclose(s.sum(axis=1), 1.0, atol=1e-12)
