"""Hankel functions of the first kind (orders 0, 1) and 2-D Helmholtz Green's
functions built on them.

All wavenumbers in this code base are real and positive (lossless media), so
only real positive arguments are supported.  Evaluation uses the ascending
series for small arguments and the large-argument asymptotic expansion above a
fixed crossover.  The ascending series is accumulated in double-double
arithmetic: near the crossover its terms grow to ~1e5 before cancelling, which
would cost ~5 digits in plain double precision.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "hankel1",
    "greens2d",
    "greens2d_normal_deriv",
    "SERIES_ASYMPTOTIC_CROSSOVER",
]

_EULER_GAMMA = 0.5772156649015328606
_TWO_OVER_PI = 2.0 / np.pi

# Crossover between the ascending series and the asymptotic expansion.  The
# series (in double-double) is accurate everywhere but slows down and the
# asymptotic error floor drops below 1e-13 here, so this is where we switch.
SERIES_ASYMPTOTIC_CROSSOVER = 14.0

_SERIES_TERMS = 48        # covers x <= crossover with terms below 1e-20
_PLAIN_SERIES_MAX = 5.0   # below this the plain-double series stays < 1e-13
_PLAIN_SERIES_TERMS = 26
# larger arguments need fewer asymptotic terms for the same ~1e-13 floor
_ASYMPTOTIC_EDGES = (20.0, 40.0, 100.0)
_ASYMPTOTIC_TERMS = (30, 20, 12, 8)

# pi/4 split into a double-double so the asymptotic phase x - (2n+1)*pi/4
# keeps full precision for x up to ~1e8.
_PIO4_HI = 0.7853981633974483
_PIO4_LO = 3.061616997868383e-17

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant


# ---------------------------------------------------------------------------
# double-double helpers (component-wise on ndarrays)
# ---------------------------------------------------------------------------

def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    # requires |a| >= |b|
    s = a + b
    err = b - (s - a)
    return s, err


def _two_prod(a, b):
    p = a * b
    ah = _SPLITTER * a
    ah = ah - (ah - a)
    al = a - ah
    bh = _SPLITTER * b
    bh = bh - (bh - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e = e + (al + bl)
    return _quick_two_sum(s, e)


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _quick_two_sum(p, e)


def _dd_div_scalar(ah, al, d):
    q1 = ah / d
    p, e = _two_prod(q1, d)
    # remainder (ah, al) - q1*d evaluated in double-double
    rh, rl = _dd_add(ah, al, -p, -e)
    q2 = (rh + rl) / d
    return _quick_two_sum(q1, q2)


def _dd_recip_scalar(d):
    return _dd_div_scalar(1.0, 0.0, float(d))


# ---------------------------------------------------------------------------
# ascending series (x <= crossover)
# ---------------------------------------------------------------------------

def _series_h0_h1_plain(x):
    """Plain-double ascending series; adequate for x <= _PLAIN_SERIES_MAX."""
    half = 0.5 * x
    z = half * half

    t = np.ones_like(x)
    j0 = t.copy()
    s0 = np.zeros_like(x)
    u = half.copy()
    j1 = u.copy()
    s1 = u.copy()  # k=0 term: (H_0 + H_1) u_0 = u_0
    hk = 0.0
    for k in range(1, _PLAIN_SERIES_TERMS + 1):
        t = t * (-z) / (k * k)
        j0 += t
        hk += 1.0 / k
        s0 -= hk * t
        u = u * (-z) / (k * (k + 1))
        j1 += u
        s1 += (2.0 * hk + 1.0 / (k + 1)) * u

    lg = np.log(half) + _EULER_GAMMA
    y0 = _TWO_OVER_PI * (lg * j0 + s0)
    y1 = _TWO_OVER_PI * (lg * j1 - 1.0 / x) - s1 / np.pi
    return j0 + 1j * y0, j1 + 1j * y1


def _harmonic_dd(n):
    """Double-double harmonic numbers H_0..H_n."""
    hs = [(0.0, 0.0)]
    h, l = 0.0, 0.0
    for j in range(1, n + 1):
        rh, rl = _dd_recip_scalar(j)
        h, l = _dd_add(h, l, rh, rl)
        hs.append((h, l))
    return hs


def _series_h0_h1(x):
    """Ascending-series H0, H1 for an ndarray of small positive arguments."""
    half = 0.5 * x
    zh, zl = _two_prod(x, x)
    zh, zl = 0.25 * zh, 0.25 * zl  # z = x^2/4, exact scaling

    harm = _harmonic_dd(_SERIES_TERMS + 1)

    # J0 = sum t_k,             t_0 = 1,   t_{k+1} = -t_k z / (k+1)^2
    # Y0-series S0 = -sum H_k t_k (k >= 1)
    th, tl = np.ones_like(x), np.zeros_like(x)
    j0h, j0l = th.copy(), tl.copy()
    s0h, s0l = np.zeros_like(x), np.zeros_like(x)
    for k in range(1, _SERIES_TERMS + 1):
        th, tl = _dd_mul(th, tl, -zh, -zl)
        th, tl = _dd_div_scalar(th, tl, float(k * k))
        j0h, j0l = _dd_add(j0h, j0l, th, tl)
        hk_h, hk_l = harm[k]
        ph, pl = _dd_mul(th, tl, hk_h, hk_l)
        s0h, s0l = _dd_add(s0h, s0l, -ph, -pl)

    # J1 = sum u_k,             u_0 = x/2, u_{k+1} = -u_k z / ((k+1)(k+2))
    # Y1-series S1 = sum (H_k + H_{k+1}) u_k
    uh, ul = half, np.zeros_like(x)
    j1h, j1l = uh.copy(), ul.copy()
    s1h, s1l = uh.copy(), ul.copy()  # k=0 term: (H_0 + H_1) u_0 = u_0
    for k in range(1, _SERIES_TERMS + 1):
        uh, ul = _dd_mul(uh, ul, -zh, -zl)
        uh, ul = _dd_div_scalar(uh, ul, float(k * (k + 1)))
        j1h, j1l = _dd_add(j1h, j1l, uh, ul)
        ha, la = _dd_add(*harm[k], *harm[k + 1])
        ph, pl = _dd_mul(uh, ul, ha, la)
        s1h, s1l = _dd_add(s1h, s1l, ph, pl)

    j0 = j0h + j0l
    j1 = j1h + j1l
    lg = np.log(half) + _EULER_GAMMA
    y0 = _TWO_OVER_PI * (lg * j0 + (s0h + s0l))
    y1 = _TWO_OVER_PI * (lg * j1 - 1.0 / x) - (s1h + s1l) / np.pi
    return j0 + 1j * y0, j1 + 1j * y1


# ---------------------------------------------------------------------------
# asymptotic expansion (x > crossover)
# ---------------------------------------------------------------------------

def _asymptotic_h0_h1(x, nterms):
    """Large-argument H0, H1: sqrt(2/(pi x)) e^{i(x-(2n+1)pi/4)} sum a_k (i/x)^k."""
    iox = 1j / x

    s0 = np.ones_like(x) + 0j
    s1 = np.ones_like(x) + 0j
    t = s0.copy()
    a0 = 1.0
    a1 = 1.0
    for k in range(nterms):
        c = 2 * k + 1
        a0 = a0 * (-c * c) / (8.0 * (k + 1))          # 4n^2 - (2k+1)^2, n=0
        a1 = a1 * (4.0 - c * c) / (8.0 * (k + 1))     # n=1
        t = t * iox
        s0 += a0 * t
        s1 += a1 * t

    # phase chi = x - pi/4 carried as double-double; the low part corrects the
    # libm sin/cos of the rounded high part
    ch, cl = _two_sum(x, -_PIO4_HI)
    cl = cl - _PIO4_LO
    cos_hi = np.cos(ch)
    sin_hi = np.sin(ch)
    re = cos_hi - sin_hi * cl
    im = sin_hi + cos_hi * cl
    amp = np.sqrt(_TWO_OVER_PI / x)
    phase0 = amp * (re + 1j * im)

    h0 = phase0 * s0
    h1 = (-1j * phase0) * s1  # extra e^{-i pi/2} for order 1
    return h0, h1


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

def _hankel1_01(x):
    """H0^(1)(x) and H1^(1)(x) for an ndarray of validated positive doubles."""
    flat = x.ravel()
    h0 = np.empty(flat.shape, dtype=np.complex128)
    h1 = np.empty(flat.shape, dtype=np.complex128)

    plain = flat <= _PLAIN_SERIES_MAX
    if plain.any():
        h0[plain], h1[plain] = _series_h0_h1_plain(flat[plain])
    mid = (flat > _PLAIN_SERIES_MAX) & (flat <= SERIES_ASYMPTOTIC_CROSSOVER)
    if mid.any():
        h0[mid], h1[mid] = _series_h0_h1(flat[mid])

    lo = SERIES_ASYMPTOTIC_CROSSOVER
    for hi, nterms in zip(_ASYMPTOTIC_EDGES + (np.inf,), _ASYMPTOTIC_TERMS):
        band = (flat > lo) & (flat <= hi)
        if band.any():
            h0[band], h1[band] = _asymptotic_h0_h1(flat[band], nterms)
        lo = hi
    return h0.reshape(x.shape), h1.reshape(x.shape)


def hankel1(order, x):
    """Hankel function of the first kind, H_n^(1)(x) = J_n(x) + i Y_n(x).

    Parameters
    ----------
    order : int
        0 or 1.
    x : float or ndarray
        Strictly positive real argument(s).

    Returns
    -------
    complex or ndarray of complex128
    """
    if order not in (0, 1):
        raise ValueError(f"hankel1: unsupported order {order!r} (only 0 and 1)")
    arr = np.asarray(x, dtype=np.float64)
    if arr.size == 0:
        return np.empty(arr.shape, dtype=np.complex128)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("hankel1: argument must be finite and > 0")
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    h0, h1 = _hankel1_01(arr)
    out = h0 if order == 0 else h1
    return complex(out[0]) if scalar else out.reshape(np.shape(x))


def greens2d(k, r):
    """Free-space 2-D Helmholtz Green's function (i/4) H0^(1)(k |r|).

    `r` is a 2-vector or an (..., 2) array of displacement vectors in cm;
    `k` is the wavenumber in rad/cm.
    """
    if k <= 0:
        raise ValueError("greens2d: wavenumber must be positive")
    vec = np.asarray(r, dtype=np.float64)
    dist = np.hypot(vec[..., 0], vec[..., 1])
    if np.any(dist == 0.0):
        raise ValueError("greens2d: singular evaluation at |r| = 0")
    out = 0.25j * hankel1(0, k * dist)
    return out


def greens2d_normal_deriv(k, r, n):
    """Directional derivative n . grad G of the 2-D Green's function.

    Equals -(i k / 4) H1^(1)(k |r|) (n.r)/|r|.  `n` must be a unit vector
    (broadcastable against `r`).
    """
    if k <= 0:
        raise ValueError("greens2d_normal_deriv: wavenumber must be positive")
    vec = np.asarray(r, dtype=np.float64)
    nrm = np.asarray(n, dtype=np.float64)
    nlen = np.hypot(nrm[..., 0], nrm[..., 1])
    if np.any(np.abs(nlen - 1.0) > 1e-12):
        raise ValueError("greens2d_normal_deriv: n must be a unit vector")
    dist = np.hypot(vec[..., 0], vec[..., 1])
    if np.any(dist == 0.0):
        raise ValueError("greens2d_normal_deriv: singular evaluation at |r| = 0")
    ndotr = nrm[..., 0] * vec[..., 0] + nrm[..., 1] * vec[..., 1]
    return (-0.25j * k) * hankel1(1, k * dist) * ndotr / dist
