"""Kernel-integral engine against independent high-precision references.

Frozen constants come from scripts/make_reference_values.py (mpmath at 40
digits, series-regularized integrands); they are independent of the package's
float64 pipeline.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta as beta_fn

from fraclap.errors import DomainError
from fraclap.quadrature import (
    DEFAULT_QUADRATURE,
    KernelConstants,
    QuadratureConfig,
    eval_C,
    eval_C_derivatives,
    eval_C_tilde,
)

# mpmath references (40 digits), see scripts/make_reference_values.py
C_REFERENCE = {
    (-0.5, 0.25): -2.0,
    (-0.25, 0.25): -2.3962804694711844149,
    (-0.9, 0.5): 8.7019451914176251431,
    (-0.999, 0.5): 998.99671341957106521,
    (-0.5, 0.75): 4.0 / 3.0,
    (-0.3, 0.5): -0.68475020055065953715,
    (-0.7, 0.5): 1.5977504679515382918,
    (0.25, 0.5): -math.pi / 4.0,
}
C_PRIME_REFERENCE = {(-0.4, 0.5): -3.3438611738809}


@pytest.mark.parametrize("key", sorted(C_REFERENCE))
def test_eval_c_against_brute_force_reference(key):
    tau, alpha = key
    assert eval_C(tau, alpha) == pytest.approx(C_REFERENCE[key], abs=1e-11, rel=1e-11)


def test_eval_c_zero_identity_exact():
    # for tau = 0 the integrand vanishes on (0,1) and equals -t^(-1-2a) beyond
    assert eval_C(0.0, 0.5) == pytest.approx(-1.0, abs=1e-12)
    assert eval_C(0.0, 0.25) == pytest.approx(-2.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.05, max_value=0.95))
def test_eval_c_zero_identity_property(alpha):
    assert abs(eval_C(0.0, alpha) + 1.0 / (2.0 * alpha)) < 1e-10


def test_divergence_toward_minus_one():
    # C blows up as tau approaches -1 from above
    c1 = eval_C(-0.9, 0.5)
    c2 = eval_C(-0.999, 0.5)
    assert c2 > c1 > 0
    assert c2 > 900


def test_domain_errors():
    with pytest.raises(DomainError):
        eval_C(-1.0, 0.5)
    with pytest.raises(DomainError):
        eval_C(1.01, 0.5)  # tau must stay below 2*alpha
    with pytest.raises(DomainError):
        eval_C(-0.5, 1.0)
    with pytest.raises(DomainError):
        eval_C_tilde(-1.0, 0.5)
    with pytest.raises(DomainError):
        eval_C_tilde(0.1, 0.5)


def test_config_validation():
    with pytest.raises(DomainError):
        QuadratureConfig(abs_tol=0.0)
    with pytest.raises(DomainError):
        QuadratureConfig(split_radius=0.6)
    with pytest.raises(DomainError):
        QuadratureConfig(tail_cut=1.5)
    with pytest.raises(DomainError):
        QuadratureConfig(max_subdivisions=4)


def test_derivatives_against_reference_and_finite_differences():
    c1, c2 = eval_C_derivatives(-0.4, 0.5)
    assert c1 == pytest.approx(C_PRIME_REFERENCE[(-0.4, 0.5)], abs=1e-9)
    assert c2 > 0
    h = 1e-4
    fd = (eval_C(-0.4 + h, 0.5) - eval_C(-0.4 - h, 0.5)) / (2 * h)
    assert c1 == pytest.approx(fd, abs=1e-5)
    fd2 = (eval_C(-0.4 + h, 0.5) - 2 * eval_C(-0.4, 0.5) + eval_C(-0.4 - h, 0.5)) / h**2
    assert c2 == pytest.approx(fd2, rel=1e-4)


@settings(max_examples=15, deadline=None)
@given(
    st.floats(min_value=-0.95, max_value=-0.05),
    st.sampled_from([0.25, 0.5, 0.75]),
)
def test_second_derivative_positive(tau, alpha):
    _, c2 = eval_C_derivatives(tau, alpha)
    assert c2 > 0


def test_derivative_consistent_with_convexity():
    # C' must increase across the minimum region
    d_lo, _ = eval_C_derivatives(-0.9, 0.5)
    d_hi, _ = eval_C_derivatives(-0.1, 0.5)
    assert d_lo < d_hi


@pytest.mark.parametrize(
    "beta,alpha",
    [(-0.5, 0.5), (-0.9, 0.25), (-0.3, 0.75), (-0.5, 0.25), (-0.1, 0.9)],
)
def test_c_tilde_beta_identity(beta, alpha):
    # substitution t -> 1/s turns the integral into an Euler Beta value
    assert eval_C_tilde(beta, alpha) == pytest.approx(
        beta_fn(2 * alpha - beta, beta + 1.0), abs=1e-8
    )


def test_c_tilde_trivial_endpoint():
    assert eval_C_tilde(0.0, 0.5) == pytest.approx(1.0, abs=1e-12)
    assert eval_C_tilde(-0.9, 0.25) > 0


def test_refinement_consistency():
    coarse = QuadratureConfig(abs_tol=1e-8, rel_tol=1e-6)
    fine = QuadratureConfig(abs_tol=5e-9, rel_tol=5e-7)
    a = eval_C(-0.6, 0.5, coarse)
    b = eval_C(-0.6, 0.5, fine)
    assert abs(a - b) < 1e-8


def test_kernel_constants_cache_positive(kc05):
    val = kc05.cache_c_tilde(-0.5)
    assert val > 0
    assert all(v > 0 for _, v in kc05.c_tilde_cache)
    assert isinstance(kc05, KernelConstants)
    assert len(kc05.c_of_tau_cache) > 0


def test_split_radius_insensitivity():
    # moving the analytic-zone boundaries must not move the value
    alt = QuadratureConfig(split_radius=0.35, tail_cut=6.0)
    for tau, alpha in [(-0.7, 0.5), (-0.25, 0.25), (0.2, 0.6)]:
        assert eval_C(tau, alpha, alt) == pytest.approx(
            eval_C(tau, alpha, DEFAULT_QUADRATURE), abs=1e-11
        )
