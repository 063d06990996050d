# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Twin of ``_kernels_py``; see that module for the algorithm notes.  The two
backends expose identical functions and must stay behaviorally in sync (the
kernel contract tests run against both).
"""

from libc.math cimport exp, fabs, isnan, log, log1p, NAN

from .exceptions import NumericalError

BACKEND = "compiled"

cdef double _HALF_LN_TWO_PI = 0.9189385332046727

cdef double* _LG_COEF = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
]

cdef double* _DG_COEF = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
]

cdef double _STIRLING_CUTOFF = 12.0


cdef double _ln_gamma_raw(double z) noexcept nogil:
    cdef double shift = 0.0
    cdef double inv, inv2, series
    cdef int i
    while z < _STIRLING_CUTOFF:
        shift += log(z)
        z += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = _LG_COEF[7]
    for i in range(6, -1, -1):
        series = series * inv2 + _LG_COEF[i]
    return (z - 0.5) * log(z) - z + _HALF_LN_TWO_PI + series * inv - shift


cdef double _digamma_raw(double z) noexcept nogil:
    cdef double shift = 0.0
    cdef double inv, inv2, series
    cdef int i
    while z < _STIRLING_CUTOFF:
        shift += 1.0 / z
        z += 1.0
    inv = 1.0 / z
    inv2 = inv * inv
    series = _DG_COEF[6]
    for i in range(5, -1, -1):
        series = series * inv2 + _DG_COEF[i]
    return log(z) - 0.5 * inv - series * inv2 - shift


cdef inline double _ln_beta_raw(double a, double b) noexcept nogil:
    return _ln_gamma_raw(a) + _ln_gamma_raw(b) - _ln_gamma_raw(a + b)


DEF BETACF_MAX_ITER = 400
cdef double _BETACF_EPS = 3e-16
cdef double _FPMIN = 1e-300


cdef double _betacf_raw(double a, double b, double x) noexcept nogil:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if fabs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _BETACF_EPS:
            return h
    return NAN


cdef double _reg_inc_beta_raw(double x, double a, double b) noexcept nogil:
    cdef bint swapped = 0
    cdef double t, cf, ln_front
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    if x > a / (a + b):
        t = a
        a = b
        b = t
        x = 1.0 - x
        swapped = 1
    ln_front = a * log(x) + b * log1p(-x) - _ln_beta_raw(a, b)
    cf = _betacf_raw(a, b, x)
    if isnan(cf):
        return cf
    t = exp(ln_front) * cf / a
    return 1.0 - t if swapped else t


# QUADPACK dqk15 nodes and weights.
cdef double* _XGK = [
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898,
]
cdef double* _WGK = [
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298,
]
cdef double _WGK_CENTER = 0.209482141084728
cdef double* _WG = [0.129484966168870, 0.279705391489277, 0.381830050505119]
cdef double _WG_CENTER = 0.417959183673469

DEF MAX_INTERVALS = 4096
DEF INITIAL_SPLIT = 8


cdef struct TailParams:
    double g
    double a0
    double a1
    double a2
    double a3
    double rest
    double lnb
    double inner_tol
    int levels
    bint failed


cdef double _integrand(double u, TailParams* p) noexcept nogil:
    cdef double gi = p.g / (1.0 - u)
    cdef double dens, inner, ierr
    dens = exp((p.a0 - 1.0) * log(u) + (p.rest - 1.0) * log1p(-u) - p.lnb)
    if p.levels == 2:
        if gi >= 1.0:
            return 0.0
        inner = 1.0 - _reg_inc_beta_raw(gi, p.a1, p.a2)
    else:
        inner = _tail2_raw(p.a1, p.a2, p.a3, gi, p.inner_tol, &ierr, &p.failed)
    if isnan(inner):
        p.failed = 1
        return 0.0
    return dens * inner


cdef double _gk15(TailParams* p, double a, double b, double* err) noexcept nogil:
    cdef double center = 0.5 * (a + b)
    cdef double half = 0.5 * (b - a)
    cdef double fc = _integrand(center, p)
    cdef double resk = fc * _WGK_CENTER
    cdef double resg = fc * _WG_CENTER
    cdef double dx, f1, f2
    cdef int j
    for j in range(7):
        dx = half * _XGK[j]
        f1 = _integrand(center - dx, p)
        f2 = _integrand(center + dx, p)
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _WG[(j - 1) // 2] * (f1 + f2)
    err[0] = fabs((resk - resg) * half)
    return resk * half


cdef double _adaptive(TailParams* p, double lo, double hi, double tol,
                      double* err_out) noexcept nogil:
    cdef double[MAX_INTERVALS] ierr
    cdef double[MAX_INTERVALS] ia
    cdef double[MAX_INTERVALS] ib
    cdef double[MAX_INTERVALS] ival
    cdef int count = 0
    cdef int i, worst
    cdef double step, a, b, mid, total_err, value
    cdef double e1, e2, v1, v2
    if hi <= lo:
        err_out[0] = 0.0
        return 0.0
    step = (hi - lo) / INITIAL_SPLIT
    for i in range(INITIAL_SPLIT):
        a = lo + i * step
        b = hi if i == INITIAL_SPLIT - 1 else lo + (i + 1) * step
        ival[count] = _gk15(p, a, b, &ierr[count])
        ia[count] = a
        ib[count] = b
        count += 1
    while True:
        total_err = 0.0
        worst = 0
        for i in range(count):
            total_err += ierr[i]
            if ierr[i] > ierr[worst]:
                worst = i
        if total_err <= tol:
            break
        if count >= MAX_INTERVALS:
            p.failed = 1
            err_out[0] = total_err
            return NAN
        a = ia[worst]
        b = ib[worst]
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            ierr[worst] = 0.0
            continue
        v1 = _gk15(p, a, mid, &e1)
        v2 = _gk15(p, mid, b, &e2)
        ierr[worst] = e1
        ib[worst] = mid
        ival[worst] = v1
        ierr[count] = e2
        ia[count] = mid
        ib[count] = b
        ival[count] = v2
        count += 1
    value = 0.0
    total_err = 0.0
    for i in range(count):
        value += ival[i]
        total_err += ierr[i]
    err_out[0] = total_err
    return value


cdef double _tail2_raw(double a0, double a1, double a2, double g, double tol,
                       double* err, bint* failed) noexcept nogil:
    cdef TailParams p
    cdef double value
    if 2.0 * g >= 1.0:
        err[0] = 0.0
        return 0.0
    p.g = g
    p.a0 = a0
    p.a1 = a1
    p.a2 = a2
    p.a3 = 0.0
    p.rest = a1 + a2
    p.lnb = _ln_beta_raw(a0, p.rest)
    p.inner_tol = 0.0
    p.levels = 2
    p.failed = 0
    value = _adaptive(&p, g, 1.0 - g, tol, err)
    if p.failed:
        failed[0] = 1
    return value


cdef double _tail3_raw(double a0, double a1, double a2, double a3, double g,
                       double tol, double* err, bint* failed) noexcept nogil:
    cdef TailParams p
    cdef double value, outer_err
    if 3.0 * g >= 1.0:
        err[0] = 0.0
        return 0.0
    p.g = g
    p.a0 = a0
    p.a1 = a1
    p.a2 = a2
    p.a3 = a3
    p.rest = a1 + a2 + a3
    p.lnb = _ln_beta_raw(a0, p.rest)
    p.inner_tol = 0.5 * tol
    p.levels = 3
    p.failed = 0
    value = _adaptive(&p, g, 1.0 - 2.0 * g, 0.5 * tol, &outer_err)
    err[0] = outer_err + p.inner_tol
    if p.failed:
        failed[0] = 1
    return value


def ln_gamma(double z):
    """Natural log of the gamma function for z > 0."""
    if not z > 0.0:
        raise ValueError(f"ln_gamma requires z > 0, got {z!r}")
    return _ln_gamma_raw(z)


def digamma(double z):
    """Logarithmic derivative of the gamma function for z > 0."""
    if not z > 0.0:
        raise ValueError(f"digamma requires z > 0, got {z!r}")
    return _digamma_raw(z)


def ln_beta(double a, double b):
    """Log of the beta function, beta(a, b) = Gamma(a) Gamma(b) / Gamma(a+b)."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"ln_beta requires positive arguments, got {a!r}, {b!r}")
    return _ln_beta_raw(a, b)


def reg_inc_beta(double x, double a, double b):
    """Regularized incomplete beta function I_x(a, b) for x in [0, 1]."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"reg_inc_beta requires positive a, b, got {a!r}, {b!r}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"reg_inc_beta requires x in [0, 1], got {x!r}")
    cdef double value = _reg_inc_beta_raw(x, a, b)
    if isnan(value):
        raise NumericalError(
            f"incomplete beta continued fraction did not converge "
            f"within {BETACF_MAX_ITER} iterations (a={a!r}, b={b!r}, x={x!r})"
        )
    return value


def dirichlet_tail(alphas, double gamma, double tol=1e-9):
    """P[X_i >= gamma for every constrained coordinate i].

    ``alphas`` holds the Dirichlet parameters; all entries except the last
    are constrained.  Supports one to three constrained coordinates.
    Returns (probability, error_estimate).
    """
    cdef double a[4]
    cdef double value, err
    cdef bint failed = 0
    cdef int n = len(alphas)
    cdef int i
    if n < 2 or n > 4:
        raise ValueError(f"dirichlet_tail supports 2..4 parameters, got {n}")
    for i in range(n):
        a[i] = alphas[i]
        if not a[i] > 0.0:
            raise ValueError(
                f"Dirichlet parameters must be positive, got {tuple(alphas)!r}"
            )
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    cdef int m = n - 1
    if gamma <= 0.0:
        return 1.0, 0.0
    if m * gamma >= 1.0:
        return 0.0, 0.0
    if m == 1:
        value = 1.0 - _reg_inc_beta_raw(gamma, a[0], a[1])
        err = 1e-13
        if isnan(value):
            failed = 1
    elif m == 2:
        value = _tail2_raw(a[0], a[1], a[2], gamma, tol, &err, &failed)
    else:
        value = _tail3_raw(a[0], a[1], a[2], a[3], gamma, tol, &err, &failed)
    if failed or isnan(value):
        raise NumericalError(
            f"quadrature for the Dirichlet tail probability failed to "
            f"converge (alphas={tuple(alphas)!r}, gamma={gamma!r}, tol={tol!r})"
        )
    return min(max(value, 0.0), 1.0), err
