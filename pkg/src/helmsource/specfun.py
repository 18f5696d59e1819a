"""Cylinder functions J0, J1, Y0, Y1 and the Hankel functions H0(1), H1(1).

Real, non-negative arguments only. Both regimes are evaluated with plain
numpy so the routines accept scalars or arrays:

* ``x <= 12``: ascending power series (log-series form for Y0, Y1).
* ``x > 12``: Hankel asymptotic expansion truncated near its smallest term.

Absolute error is below 1e-10 everywhere on (0, 100] and well below that away
from the switchover point.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

SWITCH = 12.0
EULER_GAMMA = 0.57721566490153286061

_N_SERIES = 34
_N_ASYM = 25

# series coefficients in t = x^2 / 4
_fact = [math.factorial(m) for m in range(_N_SERIES + 2)]
_harm = np.concatenate([[0.0], np.cumsum(1.0 / np.arange(1, _N_SERIES + 2))])

_J0_COEF = np.array([(-1) ** m / _fact[m] ** 2 for m in range(_N_SERIES)])
_J1_COEF = np.array([(-1) ** m / (_fact[m] * _fact[m + 1]) for m in range(_N_SERIES)])
# Y0 = (2/pi)(ln(x/2) + gamma) J0 + (2/pi) sum (-1)^(m+1) H_m t^m / (m!)^2
_Y0_COEF = np.array([(-1) ** (m + 1) * _harm[m] / _fact[m] ** 2 for m in range(_N_SERIES)])
# Y1 = (2/pi) ln(x/2) J1 - 2/(pi x) - (x/(2 pi)) sum (-1)^m (psi(m+1)+psi(m+2)) t^m/(m!(m+1)!)
_Y1_COEF = np.array(
    [
        (-1) ** m * (2.0 * (-EULER_GAMMA) + _harm[m] + _harm[m + 1]) / (_fact[m] * _fact[m + 1])
        for m in range(_N_SERIES)
    ]
)


def _asym_coef(nu: int) -> np.ndarray:
    a = np.empty(_N_ASYM)
    a[0] = 1.0
    mu = 4.0 * nu * nu
    for k in range(1, _N_ASYM):
        a[k] = a[k - 1] * (mu - (2 * k - 1) ** 2) / (8.0 * k)
    return a


_A0 = _asym_coef(0)
_A1 = _asym_coef(1)


def _horner(coef: np.ndarray, t: np.ndarray) -> np.ndarray:
    acc = np.full_like(t, coef[-1])
    for c in coef[-2::-1]:
        acc = acc * t + c
    return acc


def _series(x: np.ndarray, order: int):
    """(J, Y) by ascending series; Y is only meaningful for x > 0."""
    t = 0.25 * x * x
    with np.errstate(divide="ignore", invalid="ignore"):
        logh = np.log(0.5 * x)
        if order == 0:
            j = _horner(_J0_COEF, t)
            y = (2.0 / np.pi) * ((logh + EULER_GAMMA) * j + _horner(_Y0_COEF, t))
        else:
            j = 0.5 * x * _horner(_J1_COEF, t)
            y = (2.0 / np.pi) * logh * j - 2.0 / (np.pi * x) - x / (2.0 * np.pi) * _horner(_Y1_COEF, t)
    return j, y


def _asymptotic(x: np.ndarray, order: int):
    a = _A0 if order == 0 else _A1
    inv = 1.0 / x
    inv2 = inv * inv
    # P = sum_k (-1)^k a_2k x^-2k, Q = sum_k (-1)^k a_(2k+1) x^-(2k+1)
    p_coef = a[0::2] * (-1.0) ** np.arange(len(a[0::2]))
    q_coef = a[1::2] * (-1.0) ** np.arange(len(a[1::2]))
    p = _horner(p_coef, inv2)
    q = inv * _horner(q_coef, inv2)
    c, s = np.cos(x), np.sin(x)
    r = np.sqrt(2.0 / (np.pi * x)) / math.sqrt(2.0)
    if order == 0:
        # chi = x - pi/4
        cc, sc = c + s, s - c
    else:
        # chi = x - 3 pi/4
        cc, sc = s - c, -(s + c)
    return r * (p * cc - q * sc), r * (p * sc + q * cc)


def _eval(x, order: int, want: str, strict: bool):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("argument must be finite")
    if strict and np.any(arr <= 0.0):
        raise DomainError("argument must be strictly positive")
    if np.any(arr < 0.0):
        raise DomainError("argument must be non-negative")
    flat = np.atleast_1d(arr).ravel()
    j = np.empty_like(flat)
    y = np.empty_like(flat)
    small = flat <= SWITCH
    if np.any(small):
        j[small], y[small] = _series(flat[small], order)
    if not np.all(small):
        big = ~small
        j[big], y[big] = _asymptotic(flat[big], order)
    shape = arr.shape
    if want == "j":
        out = j.reshape(shape)
    elif want == "y":
        out = y.reshape(shape)
    else:
        out = (j + 1j * y).reshape(shape)
    return out[()] if out.ndim == 0 else out


def bessel_j0(x):
    """J0(x) for x >= 0."""
    return _eval(x, 0, "j", strict=False)


def bessel_j1(x):
    """J1(x) for x >= 0."""
    return _eval(x, 1, "j", strict=False)


def bessel_y0(x):
    """Y0(x) for x > 0; raises :class:`DomainError` at or below zero."""
    return _eval(x, 0, "y", strict=True)


def bessel_y1(x):
    """Y1(x) for x > 0."""
    return _eval(x, 1, "y", strict=True)


def hankel1_0(x):
    """H0^(1)(x) = J0(x) + i Y0(x) for x > 0."""
    return _eval(x, 0, "h", strict=True)


def hankel1_1(x):
    """H1^(1)(x) = J1(x) + i Y1(x) for x > 0."""
    return _eval(x, 1, "h", strict=True)
