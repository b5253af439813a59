"""Recompute the high-precision reference values frozen into the test suite.

Everything here is derived straight from the defining integrals with mpmath,
independently of the package's own quadrature pipeline.  The second-difference
integrands cancel catastrophically near t = 0, so the singular zones are
integrated via exact even-power series / incomplete-beta closed forms and only
the regular remainders go through mp.quad.  Run it to regenerate the constants
pasted into tests/ (stable to far more digits than any tolerance used there).
"""

import mpmath as mp

mp.mp.dps = 40


def kernel_constant(tau, alpha):
    """C(tau) = int_0^inf [chi_(0,1)(t)|1-t|^tau + (1+t)^tau - 2] t^(-1-2a) dt."""
    tau = mp.mpf(tau)
    alpha = mp.mpf(alpha)
    a, b, T = mp.mpf("0.25"), mp.mpf("0.25"), mp.mpf(4)

    # [0, a]: (1-t)^tau + (1+t)^tau - 2 = 2 sum_{k>=1} binom(tau,2k) t^(2k)
    s0 = mp.mpf(0)
    k = 1
    while True:
        term = 2 * mp.binomial(tau, 2 * k) * a ** (2 * k - 2 * alpha) / (2 * k - 2 * alpha)
        s0 += term
        if abs(term) < mp.mpf(10) ** (-mp.mp.dps - 5) and k > 4:
            break
        k += 1

    def full(t):
        return ((1 - t) ** tau + (1 + t) ** tau - 2) * t ** (-1 - 2 * alpha)

    q1 = mp.quad(full, [a, 1 - b])

    # (1-t)^tau part on [1-b, 1]:  int_0^b s^tau (1-s)^(-1-2a) ds
    s1 = mp.betainc(tau + 1, -2 * alpha, 0, b)

    def smooth(t):
        return ((1 + t) ** tau - 2) * t ** (-1 - 2 * alpha)

    q2 = mp.quad(smooth, [1 - b, T, mp.inf])
    return s0 + q1 + s1 + q2


def tau0(alpha, tol=mp.mpf("1e-30")):
    lo, hi = mp.mpf("-0.9999999"), mp.mpf(0)
    assert kernel_constant(lo, alpha) > 0
    for _ in range(140):
        mid = (lo + hi) / 2
        fm = kernel_constant(mid, alpha)
        if hi - lo < tol:
            return mid
        if fm > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def frac_lap_smooth(F, x, alpha, breakpts):
    """(-Delta)^a F at x for F analytic near x, compactly supported on [0,1]."""
    x = mp.mpf(x)
    alpha = mp.mpf(alpha)
    rho = min([abs(x - p) for p in breakpts if abs(x - p) > 0] + [mp.mpf("0.05")]) / 2

    # even Taylor part on [0, rho], exact term-by-term integration
    nmax = 18
    coeffs = mp.taylor(F, x, nmax)
    near = mp.mpf(0)
    for k in range(1, nmax // 2 + 1):
        c2k = coeffs[2 * k]
        near += 2 * c2k * rho ** (2 * k - 2 * alpha) / (2 * k - 2 * alpha)

    def g(r):
        return (F(x + r) + F(x - r) - 2 * F(x)) * r ** (-1 - 2 * alpha)

    pts = sorted({abs(x - p) for p in breakpts} | {x, 1 - x})
    pts = [p for p in pts if p > rho]
    far = mp.quad(g, [rho] + pts + [max(pts) + 1, mp.inf])
    return -(near + far)


def frac_lap_bump(x, alpha, c=1.0):
    """(-Delta)^a of c*(4z(1-z))^3 on (0,1), 0 outside, at interior x."""

    def B(z):
        if 0 < z < 1:
            return mp.mpf(c) * (4 * z * (1 - z)) ** 3
        return mp.mpf(0)

    return frac_lap_smooth(B, x, alpha, [mp.mpf(0), mp.mpf(1)])


def frac_lap_dist_alpha(x, alpha):
    """(-Delta)^a of (4z(1-z))^a on (0,1), 0 outside (torsion closed form)."""
    a = mp.mpf(alpha)

    def w(z):
        if 0 < z < 1:
            return (4 * z * (1 - z)) ** a
        return mp.mpf(0)

    return frac_lap_smooth(w, x, alpha, [mp.mpf(0), mp.mpf("0.5"), mp.mpf(1)])


if __name__ == "__main__":
    print("# kernel constant spot values")
    for tau, alpha in [(-0.5, 0.25), (-0.25, 0.25), (-0.9, 0.5), (-0.999, 0.5),
                       (-0.5, 0.75), (-0.3, 0.5), (-0.7, 0.5), (0.25, 0.5)]:
        print(f"C({tau}, alpha={alpha}) = {mp.nstr(kernel_constant(tau, alpha), 20)}")

    print("# check C(0) = -1/(2 alpha)")
    for alpha in ["0.1", "0.5", "0.9"]:
        print(alpha, mp.nstr(kernel_constant(0, alpha) + 1 / (2 * mp.mpf(alpha)), 8))

    print("# C'(tau) by central differences, tau=-0.4, alpha=0.5")
    h = mp.mpf("1e-12")
    d = (kernel_constant(mp.mpf("-0.4") + h, 0.5) - kernel_constant(mp.mpf("-0.4") - h, 0.5)) / (2 * h)
    print(f"C'(-0.4, 0.5) ~ {mp.nstr(d, 14)}")

    print("# root of C in (-1,0) vs alpha-1")
    for alpha in ["0.25", "0.5", "0.75", "0.1", "0.9", "0.05", "0.95"]:
        t0 = tau0(mp.mpf(alpha))
        print(f"tau0({alpha}) = {mp.nstr(t0, 18)}   alpha-1 = {mp.nstr(mp.mpf(alpha)-1, 18)}")

    print("# fractional laplacian of the unit bump (c=1), alpha=0.5")
    for x in ["0.2", "0.35", "0.5", "0.65", "0.8"]:
        print(f"x={x}: {mp.nstr(frac_lap_bump(x, '0.5'), 18)}")
    print("# same, alpha=0.25 and 0.75 at x=0.3")
    print(mp.nstr(frac_lap_bump("0.3", "0.25"), 18))
    print(mp.nstr(frac_lap_bump("0.3", "0.75"), 18))

    print("# torsion closed form: (-Delta)^a (4x(1-x))^a should be constant in x")
    for alpha in ["0.5", "0.25", "0.75"]:
        vals = [frac_lap_dist_alpha(x, alpha) for x in ["0.2", "0.4", "0.5", "0.7"]]
        print(f"alpha={alpha}:", [mp.nstr(v, 16) for v in vals])
        a = mp.mpf(alpha)
        guess = 2 ** (2 * a) * (2 ** (2 * a) * mp.gamma(a + mp.mpf("0.5")) * mp.gamma(a + 1) / mp.sqrt(mp.pi))
        print("   4^a * Getoor const:", mp.nstr(guess, 16))
