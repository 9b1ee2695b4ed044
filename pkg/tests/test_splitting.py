import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magnuskit.errors import MagnusError
from magnuskit.problems import duffing
from magnuskit.quadrature import GL1, GL2
from magnuskit.splitting import (
    BAB_SEEDS,
    LEAPFROG,
    SUZUKI,
    SeparableFlow,
    SplitCoefficients,
    _second_column_system,
    bab_method,
    bab_tables,
    blend_weights,
    get_split_method,
    integrate_split,
    magnus_split_step,
    split_step,
    step_jacobian,
    symplecticity_defect,
)

ALL = ["S2", "SU54", "GS64", "MN64"]


def oscillator():
    def drift(blend, x):
        return np.array([x[0] + sum(w for _, w in blend) * x[1], x[1]])

    def kick(blend, x):
        return np.array([x[0], x[1] - sum(w for _, w in blend) * x[0]])

    def ref(t0, t1, x):
        c, s = np.cos(t1 - t0), np.sin(t1 - t0)
        return np.array([c * x[0] + s * x[1], -s * x[0] + c * x[1]])

    return SeparableFlow(2, drift, kick, True, ref, "oscillator", 0.0, 1.0, np.array([1.0, 0.0]))


def one_step(name, flow, t, h, x):
    c = get_split_method(name)
    if c.layout == "AB":
        return split_step(c, flow, t, h, x)
    return magnus_split_step(c, flow, GL2, t, h, x)


@pytest.fixture(scope="module")
def duff():
    return duffing()


def test_leapfrog_is_stormer_verlet():
    flow = oscillator()
    h = 0.3
    q, p = 0.7, -0.2
    ph = p - h / 2 * q
    q1 = q + h * ph
    p1 = ph - h / 2 * q1
    np.testing.assert_allclose(split_step(LEAPFROG, flow, 0.0, h, [q, p]), [q1, p1], atol=1e-16)


def test_suzuki_coefficients():
    g1 = 1 / (4 - 4 ** (1 / 3))
    assert SUZUKI.b[0] == pytest.approx(g1, abs=1e-16)
    assert SUZUKI.b[2] == pytest.approx(1 - 4 * g1, abs=1e-15)
    assert SUZUKI.a.sum() == pytest.approx(1.0) and SUZUKI.b.sum() == pytest.approx(1.0)


def test_mn64_seeds():
    a, b = bab_method("MN64").a, bab_method("MN64").b
    assert b[0, 0] == 0.0829844064174052
    assert a[0, 0] == 0.245298957184271


@pytest.mark.parametrize("name", sorted(BAB_SEEDS))
def test_bab_tables_structure(name):
    a, b = bab_tables(*BAB_SEEDS[name])
    assert a.shape == (6, 2) and b.shape == (7, 2)
    assert a[:, 0].sum() == pytest.approx(1.0, abs=1e-15)
    assert b[:, 0].sum() == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(a[:, 0], a[::-1, 0], atol=0)
    np.testing.assert_allclose(a[:, 1], -a[::-1, 1], atol=0)
    np.testing.assert_allclose(b[:, 1], -b[::-1, 1], atol=0)
    unknowns = {("a", 0): 0, ("a", 2): 1, ("b", 0): 2, ("b", 1): 3}
    M, rhs = _second_column_system(a[:, 0], b[:, 0], unknowns)
    x = np.array([a[0, 1], a[2, 1], b[0, 1], b[1, 1]])
    np.testing.assert_allclose(M @ x, rhs, atol=1e-14)


def test_autonomous_reduction():
    for name in BAB_SEEDS:
        c = bab_method(name)
        rho, sigma = blend_weights(c, GL2)
        np.testing.assert_allclose(rho.sum(axis=1), c.a[:, 0], atol=1e-15)
        np.testing.assert_allclose(sigma.sum(axis=1), c.b[:, 0], atol=1e-15)


def test_bab_on_autonomous_equals_plain_composition():
    flow = oscillator()
    c = bab_method("MN64")
    h = 0.2
    x = np.array([0.4, 0.9])
    y = x.copy()
    for i in range(7):
        y = flow.flow2([(0.0, h * c.b[i, 0])], y)
        if i < 6:
            y = flow.flow1([(0.0, h * c.a[i, 0])], y)
    np.testing.assert_allclose(magnus_split_step(c, flow, GL2, 0.0, h, x), y, atol=1e-15)


def test_layout_mismatch():
    flow = oscillator()
    with pytest.raises(MagnusError):
        split_step(bab_method("MN64"), flow, 0, 0.1, [1, 0])
    with pytest.raises(MagnusError):
        magnus_split_step(LEAPFROG, flow, GL2, 0, 0.1, [1, 0])
    with pytest.raises(MagnusError):
        magnus_split_step(bab_method("GS64"), flow, GL1, 0, 0.1, [1, 0])
    with pytest.raises(MagnusError):
        get_split_method("XY99")


def test_coefficient_validation():
    with pytest.raises(MagnusError):
        SplitCoefficients("bad", [0.5, 0.4], [1.0, 0.0], 2, "AB", 1)
    with pytest.raises(MagnusError):
        SplitCoefficients("bad", [0.5, 0.5], [1.0, 0.0], 2, "ABA", 1)
    with pytest.raises(MagnusError):
        SplitCoefficients("bad", np.ones((2, 2)) / 2, np.ones((2, 2)) / 2, 2, "BAB", 1)


@pytest.mark.parametrize("name", ALL)
def test_symplectic_on_duffing(duff, name):
    for t in (0.0, 3.0, 20.0):
        M = step_jacobian(lambda x: one_step(name, duff, t, 0.1, x), duff.x0)
        assert symplecticity_defect(M) <= 1e-8


def test_symplecticity_defect_detects_dissipation():
    M = np.diag([1.0, 0.9])
    assert symplecticity_defect(M) > 0.05


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(ALL), st.floats(0, 30), st.floats(0.01, 0.3))
def test_time_symmetry(name, t, h):
    flow = duffing()
    x = np.array([1.2, -0.3])
    back = one_step(name, flow, t + h, -h, one_step(name, flow, t, h, x))
    assert np.linalg.norm(back - x) <= 1e-10


@pytest.mark.parametrize("name,p", [("S2", 2), ("SU54", 4), ("GS64", 4), ("MN64", 4)])
def test_local_error_order(duff, name, p):
    x = np.array([1.75, 0.0])
    errs = []
    hs = [0.2, 0.1, 0.05]
    for h in hs:
        errs.append(np.linalg.norm(one_step(name, duff, 1.0, h, x) - duff.reference(1.0, 1.0 + h, x)))
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope == pytest.approx(p + 1, abs=0.3)


@pytest.mark.parametrize("name,p", [("S2", 2), ("SU54", 4), ("GS64", 4), ("MN64", 4)])
def test_global_order_duffing(duff, name, p):
    evals = [600, 1200, 2400]
    c = get_split_method(name)
    errs = []
    for e in evals:
        x, used = integrate_split(c, duff, duff.t0, duff.tf, e // c.evals_per_step)
        assert used == e
        errs.append(np.linalg.norm(x - duff.reference(duff.t0, duff.tf, duff.x0)))
    slope = -np.polyfit(np.log(evals), np.log(errs), 1)[0]
    assert slope == pytest.approx(p, abs=0.3)


def test_integrate_split_arguments(duff):
    with pytest.raises(MagnusError):
        integrate_split(LEAPFROG, duff, 1.0, 0.0, 10)
    with pytest.raises(MagnusError):
        integrate_split(LEAPFROG, duff, 0.0, 1.0, 0)


def test_oscillator_convergence():
    flow = oscillator()
    x, _ = integrate_split(bab_method("MN64"), flow, 0.0, 1.0, 20)
    assert np.linalg.norm(x - flow.reference(0.0, 1.0, flow.x0)) < 1e-7
