"""Discrete operator and semi-analytic evaluation paths."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from fraclap.errors import DomainError, GridMismatchError
from fraclap.fields import ExteriorData
from fraclap.grid import Grid1D, GridFunction
from fraclap.operator import (
    DistanceProfile,
    assemble,
    apply,
    eval_on_power,
    exterior_potential,
    frac_lap_of_c2,
    tail_coefficient,
)
from fraclap.quadrature import eval_C, eval_C_tilde

# operator of the unit bump c=1 at probe points, alpha=0.5; mpmath references
# from scripts/make_reference_values.py
BUMP_REFERENCE = {
    0.2: -2.57794842626589182,
    0.35: 7.54894507346770296,
    0.5: 12.8,
    0.65: 7.54894507346770296,
    0.8: -2.57794842626589182,
}
BUMP_REFERENCE_A = {(0.3, 0.25): 4.16583031119023021, (0.3, 0.75): 7.48434257488361816}


def bump_vals(x):
    return (4.0 * x * (1.0 - x)) ** 3


def bump_scalar(z):
    if 0.0 < z < 1.0:
        return (4.0 * z * (1.0 - z)) ** 3
    return 0.0


# ---------------------------------------------------------------------------
# profiles
# ---------------------------------------------------------------------------


def test_profile_positive_and_c2_at_seam():
    for tau in (-0.95, -0.5, -0.1):
        prof = DistanceProfile(tau=tau, delta=0.1)
        s = np.geomspace(1e-6, 0.5, 500)
        assert np.all(prof.v(s) > 0)
        h = 1e-4
        for s0 in (0.1, 0.25):
            fd2 = (prof.v(s0 + h) - 2 * prof.v(s0) + prof.v(s0 - h)) / h**2
            assert fd2 == pytest.approx(prof.v2(s0 + 1e-12), rel=2e-3, abs=1e-6)


def test_profile_collar_is_exact_power():
    prof = DistanceProfile(tau=-0.6, delta=0.1)
    x = np.array([1e-4, 0.05, 0.95, 1.0 - 1e-4])
    d = np.minimum(x, 1 - x)
    assert prof.value(x) == pytest.approx(d**-0.6)
    assert prof.value(np.array([-0.1, 1.1])) == pytest.approx([0.0, 0.0])


def test_profile_domain_errors():
    with pytest.raises(DomainError):
        DistanceProfile(tau=-1.2)
    with pytest.raises(DomainError):
        DistanceProfile(tau=-0.5, delta=0.7)


# ---------------------------------------------------------------------------
# semi-analytic evaluation
# ---------------------------------------------------------------------------


def test_collar_asymptotics_match_kernel_constant():
    """On the collar the operator equals -C(tau) d^(tau-2a) up to O(d^rho)."""
    for tau, alpha in [(-0.8, 0.5), (-0.2, 0.5), (-0.5, 0.25)]:
        c = eval_C(tau, alpha)
        for d in (1e-4, 1e-3):
            val = eval_on_power(tau, alpha, d)
            assert val * d ** (2 * alpha - tau) == pytest.approx(-c, rel=2e-3)


def test_collar_and_interior_routes_agree():
    prof = DistanceProfile(tau=-0.5, delta=0.1)
    for x in (0.05, 0.099):
        collar = eval_on_power(-0.5, 0.5, x, prof)
        generic = frac_lap_of_c2(
            prof.value_scalar, x, 0.5,
            breakpoints=(0.1, 0.5, 0.9),
            boundary_exponent=-0.5, boundary_collar=0.1,
        )
        assert collar == pytest.approx(generic, rel=1e-7)


def test_eval_on_power_symmetry_and_signs(kc05):
    prof = DistanceProfile(tau=-0.4, delta=0.1)
    assert eval_on_power(-0.4, 0.5, 0.3, prof) == pytest.approx(
        eval_on_power(-0.4, 0.5, 0.7, prof), rel=1e-9
    )
    # below the root the collar operator is negative, above positive
    assert eval_on_power(-0.8, 0.5, 1e-3) < 0
    assert eval_on_power(-0.2, 0.5, 1e-3) > 0


def test_eval_on_power_floor():
    with pytest.raises(DomainError):
        eval_on_power(-0.5, 0.5, 1e-7)
    with pytest.raises(DomainError):
        eval_on_power(-0.5, 0.5, 1.5)


def test_bump_operator_against_reference():
    for x, ref in BUMP_REFERENCE.items():
        assert frac_lap_of_c2(bump_scalar, x, 0.5) == pytest.approx(ref, abs=1e-9)
    for (x, alpha), ref in BUMP_REFERENCE_A.items():
        assert frac_lap_of_c2(bump_scalar, x, alpha) == pytest.approx(ref, abs=1e-7)


# ---------------------------------------------------------------------------
# dense assembly
# ---------------------------------------------------------------------------


def test_row_identity_and_tail(op301, grid301):
    ones = np.ones(grid301.n_interior)
    resid = op301.interaction @ ones
    scale = np.abs(op301.interaction).sum(axis=1) + op301.tail
    assert np.max(np.abs(resid) / scale) < 1e-12
    out = apply(op301, GridFunction(grid301, 2.7 * ones))
    assert out.values == pytest.approx(2.7 * op301.tail, rel=1e-9)
    assert np.all(op301.tail > 0)
    assert op301.tail == pytest.approx(op301.tail[::-1])


def test_m_matrix_structure(op301):
    diag = np.diag(op301.interaction)
    off = op301.interaction - np.diag(diag)
    assert np.all(diag > 0)
    assert np.max(off) <= 1e-14


def test_apply_zero_function_gives_zero(op301, grid301):
    out = apply(op301, GridFunction.zeros(grid301))
    assert out.values == pytest.approx(np.zeros(grid301.n_interior))


def test_apply_zero_and_exterior_load(grid301):
    ext = ExteriorData.power_collar(beta=-0.5, kappa_g=1.0, eta=0.5)
    op = assemble(grid301, 0.5, ext)
    zero = GridFunction.zeros(grid301, ext)
    out = apply(op, zero)
    assert out.values == pytest.approx(op.exterior_load)
    assert np.all(op.exterior_load < 0)  # load is -G and G > 0 for g >= 0


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_apply_linearity(seed):
    grid = Grid1D.graded(101, 2.0)
    op = assemble(grid, 0.5)
    r = np.random.default_rng(seed)
    u = r.standard_normal(grid.n_interior)
    v = r.standard_normal(grid.n_interior)
    a, b = r.standard_normal(2)
    lhs = apply(op, GridFunction(grid, a * u + b * v)).values
    rhs = a * apply(op, GridFunction(grid, u)).values + b * apply(op, GridFunction(grid, v)).values
    assert lhs == pytest.approx(rhs, abs=1e-8 * (1 + np.max(np.abs(rhs))))


def test_indicator_reproduces_tail(op301, grid301):
    # interval indicator: nodal ones; the closed form is the tail coefficient
    out = apply(op301, GridFunction(grid301, np.ones(grid301.n_interior)))
    expected = tail_coefficient(grid301.nodes, 0.5)
    assert out.values == pytest.approx(expected, rel=1e-9)
    d = grid301.d
    collar = d < 0.05
    band = out.values[collar] * d[collar] ** (2 * 0.5)
    # 1/(2 alpha) <= band <= 2/(2 alpha) on the collar
    assert np.all(band > 0.99) and np.all(band < 2.01)


def test_grid_mismatch_raises(op301):
    other = Grid1D.graded(51, 2.0)
    with pytest.raises(GridMismatchError):
        apply(op301, GridFunction(other, np.zeros(other.n_interior)))


def test_assembly_special_value_log_branch():
    # 2*alpha = 1 exercises the logarithmic antiderivative branch
    grid = Grid1D.graded(101, 2.0)
    for alpha in (0.5, 0.5 + 1e-13):
        op = assemble(grid, alpha)
        assert np.all(np.isfinite(op.interaction))


def test_smooth_bump_probe_accuracy():
    """Discrete apply against the independent quadrature reference."""
    probes = sorted(BUMP_REFERENCE)
    grid = Grid1D.graded(999, 3.0, include=probes)
    op = assemble(grid, 0.5)
    out = apply(op, GridFunction(grid, bump_vals(grid.nodes)))
    for px in probes:
        i = int(np.argmin(np.abs(grid.nodes - px)))
        assert grid.nodes[i] == pytest.approx(px, abs=1e-13)
        assert out.values[i] == pytest.approx(BUMP_REFERENCE[px], abs=2.5e-2)


def test_grid_refinement_convergence():
    probes = sorted(BUMP_REFERENCE)
    errs = []
    for n in (251, 501, 1001):
        grid = Grid1D.graded(n, 3.0, include=probes)
        op = assemble(grid, 0.5)
        out = apply(op, GridFunction(grid, bump_vals(grid.nodes)))
        err = max(
            abs(out.values[int(np.argmin(np.abs(grid.nodes - px)))] - ref)
            for px, ref in BUMP_REFERENCE.items()
        )
        errs.append(err)
    assert errs[0] / errs[1] >= 1.8
    assert errs[1] / errs[2] >= 1.8


def test_symmetric_output_for_symmetric_data(op301, grid301):
    u = GridFunction(grid301, bump_vals(grid301.nodes))
    out = apply(op301, u).values
    assert out == pytest.approx(out[::-1], rel=1e-9, abs=1e-9)


# ---------------------------------------------------------------------------
# exterior potential
# ---------------------------------------------------------------------------


def test_exterior_potential_zero():
    ext = ExteriorData.zero()
    assert exterior_potential(ext, 0.5, np.array([0.3])) == pytest.approx([0.0])


def test_exterior_potential_against_quadrature():
    ext = ExteriorData.power_collar(beta=-0.5, kappa_g=1.0, eta=0.5)
    x0 = 0.37

    def g(z):
        return float(ext.value(np.array([z]))[0])

    left, _ = quad(lambda z: g(z) * abs(z - x0) ** -2.0, -np.inf, 0.0, limit=400)
    right, _ = quad(lambda z: g(z) * abs(z - x0) ** -2.0, 1.0, np.inf, limit=400)
    got = float(exterior_potential(ext, 0.5, np.array([x0]))[0])
    assert got == pytest.approx(left + right, rel=1e-9)


def test_exterior_potential_boundary_rate():
    ext = ExteriorData.power_collar(beta=-0.5, kappa_g=1.0, eta=0.5)
    d = np.geomspace(1e-4, 1e-2, 40)
    G = exterior_potential(ext, 0.5, d)
    assert np.all(G > 0)
    slope = np.polyfit(np.log(d), np.log(G), 1)[0]
    assert slope == pytest.approx(-1.5, rel=0.05)
    # the leading constant is the exterior kernel constant
    assert G[0] * d[0] ** 1.5 == pytest.approx(eval_C_tilde(-0.5, 0.5), rel=1e-3)


def test_exterior_potential_tabulated_matches_quadrature_of_table():
    zs = np.linspace(-0.5, -1e-3, 60)
    gs = (-zs) ** -0.5
    ext_t = ExteriorData(kind="tabulated", table_z=tuple(zs), table_g=tuple(gs))
    x = np.array([0.4])
    got = exterior_potential(ext_t, 0.5, x)
    ref = sum(
        quad(lambda z: np.interp(z, zs, gs) * (x[0] - z) ** -2.0, a, b)[0]
        for a, b in zip(zs[:-1], zs[1:])
    )
    assert got[0] == pytest.approx(ref, rel=1e-9)


def test_weighted_l1_membership():
    ext = ExteriorData.power_collar(beta=-0.9, kappa_g=2.0, eta=0.25)
    val = ext.weighted_l1(0.5)
    assert np.isfinite(val) and val > 0
    assert ExteriorData.zero().weighted_l1(0.5) == 0.0
