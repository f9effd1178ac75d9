"""Modified Bessel functions used by the kernel evaluations.

Complex K_0/K_1 are needed on the right half plane Re z > 0 only (every
kernel argument has the form -i sqrt(lambda) |x| with Im sqrt(lambda) > 0);
integer-order I_n/K_n on the positive reals back the circle diagonalization
oracle.  Evaluation is delegated to the AMOS routines behind a domain-checked
surface; accuracy against an independent high-precision oracle is pinned in
the test fixtures.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import special as sp

from .errors import DomainError

#: |z| beyond which K_j underflows to an exact zero (e^-700 < 1e-304).
OVERFLOW_RADIUS = 700.0

EULER_GAMMA = float(np.euler_gamma)


class BesselUnderflowWarning(RuntimeWarning):
    """K_j(z) flushed to zero because |z| exceeds the overflow radius."""


def bessel_k(order: int, z: complex) -> complex:
    """K_0(z) or K_1(z) for a single complex argument with Re z > 0.

    |z| > OVERFLOW_RADIUS returns 0 and emits BesselUnderflowWarning.
    """
    if order not in (0, 1):
        raise DomainError(f"order must be 0 or 1, got {order}")
    z = complex(z)
    if z.real <= 0:
        raise DomainError(f"bessel_k requires Re z > 0, got z={z}")
    if abs(z) > OVERFLOW_RADIUS:
        warnings.warn(
            f"K_{order}({z}) underflows; returning 0", BesselUnderflowWarning,
            stacklevel=2,
        )
        return 0j
    return complex(sp.kv(order, z))


def bessel_k_array(order: int, z: np.ndarray) -> np.ndarray:
    """Vectorized K_0/K_1 on the right half plane; underflow flushes to 0.

    Real inputs take the real fast path.  No domain checks beyond Re z > 0.
    """
    z = np.asarray(z)
    if np.any(np.real(z) <= 0):
        raise DomainError("bessel_k_array requires Re z > 0 everywhere")
    big = np.abs(z) > OVERFLOW_RADIUS
    zs = np.where(big, 1.0, z)
    with np.errstate(under="ignore"):
        if np.isrealobj(z):
            out = sp.k0(zs.real) if order == 0 else sp.k1(zs.real)
            out = np.asarray(out, dtype=float)
        else:
            out = sp.kv(order, zs)
    return np.where(big, 0.0, out)


def bessel_i_array(order: int, z: np.ndarray) -> np.ndarray:
    """Vectorized I_0/I_1; caller must keep |Re z| below the overflow radius."""
    z = np.asarray(z)
    if np.isrealobj(z):
        return np.asarray(sp.i0(z) if order == 0 else sp.i1(z), dtype=float)
    return sp.iv(order, z)


def bessel_ik_int(order: int, x: float) -> tuple[float, float]:
    """(I_n(x), K_n(x)) for integer n >= 0 and real x > 0."""
    if order < 0 or order > 200:
        raise DomainError(f"order must be in 0..200, got {order}")
    if not x > 0:
        raise DomainError(f"bessel_ik_int requires x > 0, got {x}")
    with np.errstate(under="ignore"):
        iv = float(sp.iv(order, x))
        kv = float(sp.kv(order, x))
    return iv, kv
