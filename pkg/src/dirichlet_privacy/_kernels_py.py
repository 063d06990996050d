"""Pure-Python numerical kernels.

This module is the fallback twin of the Cython extension ``_kernels_c``;
both expose the same functions with identical semantics, and the test suite
runs the contract tests against whichever backends are importable.  Keep the
two implementations structurally parallel when editing either one.

Contents: log-gamma and digamma (Stirling series plus upward recurrence),
log-beta, the regularized incomplete beta function (Lentz continued
fraction), and the Dirichlet "all coordinates above a threshold" probability
evaluated by nested adaptive Gauss-Kronrod quadrature with the innermost
integral in closed form.
"""

from __future__ import annotations

import math

from .exceptions import NumericalError

BACKEND = "python"

_HALF_LN_TWO_PI = 0.5 * math.log(2.0 * math.pi)

# Stirling series coefficients B_{2n} / (2n (2n-1)) for ln Gamma.
_LG_COEF = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)

# Asymptotic series coefficients B_{2n} / (2n) for digamma.
_DG_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)

_STIRLING_CUTOFF = 12.0


def ln_gamma(z: float) -> float:
    """Natural log of the gamma function for z > 0."""
    if not z > 0.0:
        raise ValueError(f"ln_gamma requires z > 0, got {z!r}")
    shift = 0.0
    while z < _STIRLING_CUTOFF:
        shift += math.log(z)
        z += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = _LG_COEF[7]
    for c in (_LG_COEF[6], _LG_COEF[5], _LG_COEF[4], _LG_COEF[3],
              _LG_COEF[2], _LG_COEF[1], _LG_COEF[0]):
        series = series * inv2 + c
    return (z - 0.5) * math.log(z) - z + _HALF_LN_TWO_PI + series * inv - shift


def digamma(z: float) -> float:
    """Logarithmic derivative of the gamma function for z > 0."""
    if not z > 0.0:
        raise ValueError(f"digamma requires z > 0, got {z!r}")
    shift = 0.0
    while z < _STIRLING_CUTOFF:
        shift += 1.0 / z
        z += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = _DG_COEF[6]
    for c in (_DG_COEF[5], _DG_COEF[4], _DG_COEF[3],
              _DG_COEF[2], _DG_COEF[1], _DG_COEF[0]):
        series = series * inv2 + c
    return math.log(z) - 0.5 * inv - series * inv2 - shift


def ln_beta(a: float, b: float) -> float:
    """Log of the beta function, beta(a, b) = Gamma(a) Gamma(b) / Gamma(a+b)."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"ln_beta requires positive arguments, got {a!r}, {b!r}")
    return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)


_BETACF_MAX_ITER = 400
_BETACF_EPS = 3e-16
_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz scheme)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise NumericalError(
        f"incomplete beta continued fraction did not converge "
        f"within {_BETACF_MAX_ITER} iterations (a={a!r}, b={b!r}, x={x!r})"
    )


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta function I_x(a, b) for x in [0, 1]."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"reg_inc_beta requires positive a, b, got {a!r}, {b!r}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"reg_inc_beta requires x in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    # Swap into the fast-convergence region of the continued fraction.
    if x > a / (a + b):
        return 1.0 - reg_inc_beta(1.0 - x, b, a)
    ln_front = a * math.log(x) + b * math.log1p(-x) - ln_beta(a, b)
    return math.exp(ln_front) * _betacf(a, b, x) / a


# 15-point Kronrod nodes on [0, 1] half-interval, with the embedded 7-point
# Gauss rule on the odd-indexed nodes (QUADPACK dqk15 constants).
_XGK = (
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898,
)
_WGK = (
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298,
)
_WGK_CENTER = 0.209482141084728
_WG = (0.129484966168870, 0.279705391489277, 0.381830050505119)
_WG_CENTER = 0.417959183673469

_MAX_INTERVALS = 4096
_INITIAL_SPLIT = 8


def _gk15(f, a: float, b: float):
    """One Gauss-Kronrod 7-15 panel; returns (integral, error_estimate)."""
    center = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(center)
    resk = fc * _WGK_CENTER
    resg = fc * _WG_CENTER
    for j in range(7):
        dx = half * _XGK[j]
        f1 = f(center - dx)
        f2 = f(center + dx)
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _WG[(j - 1) // 2] * (f1 + f2)
    return resk * half, abs((resk - resg) * half)


def _adaptive_gk(f, lo: float, hi: float, tol: float):
    """Adaptive bisection built on the 7-15 panel.

    Keeps a worst-first interval list; initial split guards against narrow
    peaks that a single panel would miss.
    """
    if hi <= lo:
        return 0.0, 0.0
    intervals = []
    step = (hi - lo) / _INITIAL_SPLIT
    for i in range(_INITIAL_SPLIT):
        a = lo + i * step
        b = hi if i == _INITIAL_SPLIT - 1 else lo + (i + 1) * step
        val, err = _gk15(f, a, b)
        intervals.append([err, a, b, val])
    while True:
        total_err = 0.0
        worst = 0
        for idx, item in enumerate(intervals):
            total_err += item[0]
            if item[0] > intervals[worst][0]:
                worst = idx
        if total_err <= tol:
            break
        if len(intervals) >= _MAX_INTERVALS:
            raise NumericalError(
                f"adaptive quadrature failed to reach tolerance {tol!r} "
                f"within {_MAX_INTERVALS} intervals"
            )
        err, a, b, _ = intervals[worst]
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            # Interval at floating-point resolution; accept its estimate.
            intervals[worst][0] = 0.0
            continue
        val1, err1 = _gk15(f, a, mid)
        val2, err2 = _gk15(f, mid, b)
        intervals[worst] = [err1, a, mid, val1]
        intervals.append([err2, mid, b, val2])
    value = math.fsum(item[3] for item in intervals)
    error = math.fsum(item[0] for item in intervals)
    return value, error


def _ln_beta_pdf(u: float, a: float, b: float, lnb: float) -> float:
    return (a - 1.0) * math.log(u) + (b - 1.0) * math.log1p(-u) - lnb


def _tail1(a0: float, a1: float, g: float) -> float:
    """P[X >= g] for X ~ Beta(a0, a1)."""
    if g >= 1.0:
        return 0.0
    return 1.0 - reg_inc_beta(g, a0, a1)


def _tail2(a0: float, a1: float, a2: float, g: float, tol: float):
    """P[X0 >= g and X1 >= g] for (X0, X1, rest) ~ Dirichlet(a0, a1, a2)."""
    if 2.0 * g >= 1.0:
        return 0.0, 0.0
    rest = a1 + a2
    lnb = ln_beta(a0, rest)

    def integrand(u: float) -> float:
        gi = g / (1.0 - u)
        if gi >= 1.0:
            return 0.0
        inner = 1.0 - reg_inc_beta(gi, a1, a2)
        return math.exp(_ln_beta_pdf(u, a0, rest, lnb)) * inner

    val, err = _adaptive_gk(integrand, g, 1.0 - g, tol)
    return val, err


def _tail3(a0: float, a1: float, a2: float, a3: float, g: float, tol: float):
    """Three constrained coordinates; two quadrature levels."""
    if 3.0 * g >= 1.0:
        return 0.0, 0.0
    rest = a1 + a2 + a3
    lnb = ln_beta(a0, rest)
    inner_tol = 0.5 * tol

    def integrand(u: float) -> float:
        gi = g / (1.0 - u)
        inner, _ = _tail2(a1, a2, a3, gi, inner_tol)
        return math.exp(_ln_beta_pdf(u, a0, rest, lnb)) * inner

    val, err = _adaptive_gk(integrand, g, 1.0 - 2.0 * g, 0.5 * tol)
    return val, err + inner_tol


def dirichlet_tail(alphas, gamma: float, tol: float = 1e-9):
    """P[X_i >= gamma for every constrained coordinate i].

    ``alphas`` holds the Dirichlet parameters; all entries except the last
    are constrained.  Supports one to three constrained coordinates (the
    innermost integral is closed form, outer levels use adaptive quadrature).
    Returns (probability, error_estimate).
    """
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) < 2 or len(alphas) > 4:
        raise ValueError(
            f"dirichlet_tail supports 2..4 parameters, got {len(alphas)}"
        )
    for a in alphas:
        if not a > 0.0:
            raise ValueError(f"Dirichlet parameters must be positive, got {alphas!r}")
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    m = len(alphas) - 1
    if gamma <= 0.0:
        return 1.0, 0.0
    if m * gamma >= 1.0:
        return 0.0, 0.0
    if m == 1:
        value, error = _tail1(alphas[0], alphas[1], gamma), 1e-13
    elif m == 2:
        value, error = _tail2(alphas[0], alphas[1], alphas[2], gamma, tol)
    else:
        value, error = _tail3(alphas[0], alphas[1], alphas[2], alphas[3], gamma, tol)
    return min(max(value, 0.0), 1.0), error
