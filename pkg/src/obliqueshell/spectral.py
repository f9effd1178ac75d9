"""Birman-Schwinger machinery for the oblique transmission operator.

The discrete spectrum of the operator with coupling alpha on the curve is
characterized through the dispersion functions lambda -> lambda mu_n(S(lambda))
(mu_n = n-th largest eigenvalue of the single layer operator), each strictly
increasing from -infinity to 0 on (-infinity, 0).  Eigenvalues are the unique
roots of lambda mu_n(S(lambda)) = 1/alpha (alpha < 0); for alpha > 0 there are
none.  A delta-interaction comparison spectrum solves alpha mu_n(S(lambda)) =
-1 instead, where branches may be empty.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import bie
from .bie import BoundaryOperatorMatrix, FieldSamples, VolumeGrid
from .errors import (
    DivergenceError,
    DomainError,
    NumericalInstabilityError,
    ParameterError,
    PoleProximityError,
    ResolutionError,
)
from .geometry import Curve, QuadratureGrid, grid as make_grid
from .kernels import SpectralParameter, kernel_U, kernel_dzbar_U
from .specfun import bessel_ik_int

#: smallest lambda the bracket expansion may visit before giving up
BRACKET_FLOOR = -1e12

#: singular-value gate for resolvent application near the point spectrum
POLE_GATE = 1e-8


# ---------------------------------------------------------------------------
# dispersion


@dataclass(frozen=True)
class DispersionSample:
    lam: float
    n: int
    value: float


def _check_branch(n: int, N: int) -> None:
    if n < 1:
        raise ParameterError(f"branch index must be >= 1, got {n}")
    if n > N // 4:
        raise ResolutionError(f"branch n={n} needs N >= {4 * n}, got N={N}")


def _mu_n(curve: Curve, lam: float, n: int, N: int) -> float:
    sp = SpectralParameter.make(lam)
    op = bie.assemble_S(make_grid(curve, N), sp)
    return float(op.eigenvalues_desc(k=n)[n - 1].real)


def dispersion(curve: Curve, n: int, lam: float, N: int = 256) -> DispersionSample:
    """Sample of the dispersion function lambda * mu_n(S(lambda)), lambda < 0."""
    if not lam < 0:
        raise DomainError(f"dispersion needs lambda < 0, got {lam}")
    _check_branch(n, N)
    return DispersionSample(float(lam), n, float(lam) * _mu_n(curve, lam, n, N))


def circle_oracle_mu(n: int, R: float, lam: float) -> float:
    """Closed-form mu for the circle of radius R: R I_n(kR) K_n(kR), k=sqrt(-lambda).

    For n >= 1 this eigenvalue has multiplicity two.
    """
    if n < 0:
        raise DomainError(f"order must be >= 0, got {n}")
    if not R > 0:
        raise DomainError(f"radius must be positive, got {R}")
    if not lam < 0:
        raise DomainError(f"lambda must be negative, got {lam}")
    k = float(np.sqrt(-lam))
    iv, kv = bessel_ik_int(n, k * R)
    return R * iv * kv


# ---------------------------------------------------------------------------
# root finding on a monotone branch


def _bracket_and_solve(f, seed: float, tol: float, increasing: bool):
    """Root of the monotone function f on (-inf, 0); f is in lambda < 0.

    ``seed`` is a negative starting abscissa.  Expands geometrically until a
    sign change is bracketed, then runs Brent's method.
    """
    lo = -abs(seed)
    f_lo = f(lo)
    sign_at_left = -1.0 if increasing else 1.0  # sign of f near -infinity
    if np.sign(f_lo) == sign_at_left or f_lo == 0:
        # seed is already on the -infinity side; march toward 0
        hi = lo
        f_hi = f_lo
        while np.sign(f_hi) == sign_at_left and f_hi != 0:
            lo, f_lo = hi, f_hi
            hi = hi / 8
            if hi > -1e-14:
                return None  # no crossing before lambda -> 0-
            f_hi = f(hi)
    else:
        hi, f_hi = lo, f_lo
        while np.sign(f_lo) != sign_at_left:
            hi, f_hi = lo, f_lo
            lo = lo * 8
            if lo < BRACKET_FLOOR:
                raise DivergenceError(
                    f"bracket expansion passed lambda = {BRACKET_FLOOR:g}"
                )
            f_lo = f(lo)
    if f_lo == 0:
        return lo
    if f_hi == 0:
        return hi
    return brentq(f, lo, hi, rtol=max(tol, 4 * np.finfo(float).eps), xtol=1e-300)


def find_eigenvalue(curve: Curve, alpha: float, n: int, tol: float = 1e-9,
                    N: int = 256) -> tuple[float, float]:
    """Unique root of lambda mu_n(S(lambda)) = 1/alpha for alpha < 0.

    Returns (lambda_n, birman_schwinger_residual).
    """
    if not alpha < 0:
        raise ParameterError(f"find_eigenvalue needs alpha < 0, got {alpha}")
    if not tol > 0:
        raise ParameterError("tol must be positive")
    _check_branch(n, N)

    def f(lam: float) -> float:
        return lam * _mu_n(curve, lam, n, N) - 1.0 / alpha

    seed = max(1.0, 4.0 / alpha ** 2 / 8)
    root = _bracket_and_solve(f, seed, tol, increasing=True)
    if root is None:
        raise DivergenceError("dispersion root escaped toward lambda = 0")
    residual = abs(alpha * root * _mu_n(curve, root, n, N) - 1.0)
    return float(root), float(residual)


# ---------------------------------------------------------------------------
# spectrum enumeration


@dataclass(frozen=True)
class EigenvalueEntry:
    n: int
    lam: float
    residual: float
    multiplicity: int = 1


@dataclass(frozen=True)
class SpectrumResult:
    alpha: float
    curve_name: str
    N: int
    tol: float
    eigenvalues: tuple[EigenvalueEntry, ...]
    kind: str = "oblique"
    empty_branches: tuple[int, ...] = ()

    def lambdas(self) -> np.ndarray:
        return np.array([e.lam for e in self.eigenvalues])

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "curve": self.curve_name,
            "N": self.N,
            "tol": self.tol,
            "kind": self.kind,
            "empty_branches": list(self.empty_branches),
            "eigenvalues": [
                {"n": e.n, "lambda": e.lam, "residual": e.residual,
                 "multiplicity": e.multiplicity}
                for e in self.eigenvalues
            ],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _annotate_multiplicities(entries: list[EigenvalueEntry]) -> list[EigenvalueEntry]:
    """Cluster roots closer than 1e-6 |lambda| and stamp each entry with its
    cluster size (symmetry-forced degeneracies, e.g. circle pairs)."""
    entries = sorted(entries, key=lambda e: -e.lam)
    out: list[EigenvalueEntry] = []
    i = 0
    while i < len(entries):
        j = i + 1
        while j < len(entries) and \
                abs(entries[j].lam - entries[i].lam) <= 1e-6 * abs(entries[i].lam):
            j += 1
        for e in entries[i:j]:
            out.append(EigenvalueEntry(e.n, e.lam, e.residual, j - i))
        i = j
    return out


def enumerate_spectrum(curve: Curve, alpha: float, count: int, N: int = 256,
                       tol: float = 1e-9) -> SpectrumResult:
    """First ``count`` discrete eigenvalues, non-increasing; empty for alpha > 0."""
    if alpha == 0:
        raise ParameterError("alpha must be nonzero")
    if count < 1:
        raise ParameterError("count must be >= 1")
    if count > N // 8:
        raise ResolutionError(f"count={count} needs N >= {8 * count}, got N={N}")
    if alpha > 0:
        # verify the mechanism: every eigenvalue of alpha lambda S(lambda)
        # stays below 1 on a probe grid, so 1 is never hit
        for lam in np.geomspace(1e-2, 100, 20):
            top = alpha * (-lam) * _mu_n(curve, -lam, 1, N)
            if top >= 1:
                raise NumericalInstabilityError(
                    f"unexpected unit crossing at lambda={-lam} for alpha={alpha}"
                )
        return SpectrumResult(alpha, curve.name, N, tol, ())

    entries = []
    for n in range(1, count + 1):
        lam_n, res = find_eigenvalue(curve, alpha, n, tol=tol, N=N)
        entries.append(EigenvalueEntry(n, lam_n, res))
    entries = _annotate_multiplicities(entries)
    return SpectrumResult(alpha, curve.name, N, tol, tuple(entries))


# ---------------------------------------------------------------------------
# eigenfunctions


@dataclass(frozen=True)
class EigenfunctionField:
    points: np.ndarray
    values: np.ndarray
    density: np.ndarray
    lam: float
    n: int
    grid: QuadratureGrid = field(repr=False)


def eigenfunction(curve: Curve, alpha: float, lambda_n: float, n: int,
                  spatial_grid, N: int = 256, tol: float = 1e-6,
                  upsample: int = 8) -> EigenfunctionField:
    """Field Psi_lambda phi of the eigenfunction on branch n at lambda_n.

    phi is the eigenvector of alpha lambda S(lambda) for the eigenvalue nearest
    1, normalized to unit L2 norm on the curve.
    """
    if not lambda_n < 0:
        raise DomainError("lambda_n must be negative")
    g = make_grid(curve, N)
    sp = SpectralParameter.make(lambda_n)
    op = bie.assemble_S(g, sp)
    w_all, V = np.linalg.eigh(op.symmetrized())
    bs_vals = alpha * lambda_n * w_all
    idx = int(np.argmin(np.abs(bs_vals - 1.0)))
    if abs(bs_vals[idx] - 1.0) > 10 * tol:
        raise NumericalInstabilityError(
            f"no eigenvalue of alpha lambda S near 1 at lambda={lambda_n} "
            f"(nearest is {bs_vals[idx]:.6g}); lambda_n and n are inconsistent"
        )
    phi = V[:, idx] / np.sqrt(g.jacobians)
    norm = np.sqrt(g.weight * np.sum(np.abs(phi) ** 2 * g.jacobians))
    phi = phi / norm
    pts = spatial_grid.points if isinstance(spatial_grid, VolumeGrid) \
        else np.atleast_2d(np.asarray(spatial_grid, dtype=float))
    fs = bie.eval_Psi(g, phi, sp, pts, upsample=upsample)
    return EigenfunctionField(fs.points, fs.values, phi, float(lambda_n), n, g)


def oblique_residual(g: QuadratureGrid, density: np.ndarray,
                     sp: SpectralParameter, alpha: float,
                     h_sequence=None, upsample: int = 16) -> float:
    """Relative residual of the oblique transmission condition for Psi density.

    The condition (nu1 + i nu2)(f_+ - f_-) = -alpha (dzbar f_+ + dzbar f_-)
    reduces, through the extrapolated jump identities, to
    jump_estimate = alpha * dzbar_sum.
    """
    jump, dzbar_sum = bie.jump_traces(g, density, sp, h_sequence, upsample)
    num = np.linalg.norm(jump - alpha * dzbar_sum)
    den = max(np.linalg.norm(jump), np.linalg.norm(alpha * dzbar_sum))
    return float(num / den)


# ---------------------------------------------------------------------------
# resolvent application


@dataclass(frozen=True)
class KreinResult:
    volume: VolumeGrid
    values: np.ndarray
    free_values: np.ndarray
    density: np.ndarray
    grid: QuadratureGrid = field(repr=False)
    sp: SpectralParameter = field(repr=False)
    alpha: float = 0.0


def _free_resolvent_on_grid(sp: SpectralParameter, vol: VolumeGrid,
                            f: np.ndarray) -> np.ndarray:
    """(-Delta - lambda)^-1 f by convolution quadrature on the uniform grid.

    The self-cell weight integrates the kernel exactly over a disc of equal
    area: int_0^a K_0(k rho) rho d rho = (1 - k a K_1(k a)) / k^2.
    """
    from scipy.signal import fftconvolve
    from .specfun import bessel_k_array

    nx, ny = vol.shape
    dx = vol.h * np.arange(-(nx - 1), nx)
    dy = vol.h * np.arange(-(ny - 1), ny)
    DX, DY = np.meshgrid(dx, dy, indexing="ij")
    R = np.sqrt(DX ** 2 + DY ** 2)
    kap = sp.kappa
    kern = np.zeros_like(R, dtype=complex)
    mask = R > 0
    arg = (kap.real if kap.imag == 0 else kap) * R[mask]
    kern[mask] = bessel_k_array(0, arg) / (2 * np.pi)
    a = vol.h / np.sqrt(np.pi)
    ka = kap * a
    self_cell = (1.0 - ka * bessel_k_array(1, np.array([ka]))[0]) / kap ** 2
    kern[nx - 1, ny - 1] = self_cell / vol.weight
    fg = np.asarray(f, dtype=complex).reshape(vol.shape)
    out = fftconvolve(kern, fg, mode="valid") * vol.weight
    return out.ravel()


def _nearest_eigenvalue_message(curve: Curve, alpha: float, lam: complex,
                                bs_vals: np.ndarray) -> str:
    n_star = int(np.argmin(np.abs(bs_vals - 1.0))) + 1
    try:
        lam_near, _ = find_eigenvalue(curve, alpha, n_star, tol=1e-6, N=128)
        where = f"nearest eigenvalue approximately {lam_near:.9g} (branch {n_star})"
    except Exception:
        where = f"nearest unit crossing on branch {n_star}"
    return (f"resolvent parameter lambda={lam} too close to the point "
            f"spectrum; {where}")


def krein_apply(curve: Curve, alpha: float, sp: SpectralParameter,
                f_samples: np.ndarray, vol: VolumeGrid | None = None,
                N: int = 256, upsample: int = 4) -> KreinResult:
    """Resolvent of the transmission operator applied to volume samples f.

    g = free + alpha Psi_lambda (I - alpha lambda S(lambda))^-1 Psi*_lambdabar f.
    """
    if vol is None:
        vol = bie.default_volume_grid(curve)
    g = make_grid(curve, N)
    f = np.asarray(f_samples, dtype=complex).ravel()
    free = _free_resolvent_on_grid(sp, vol, f)
    if alpha == 0:
        return KreinResult(vol, free.copy(), free, np.zeros(g.N, complex), g, sp, alpha)

    op = bie.assemble_S(g, sp)
    sym = op.symmetrized()
    B = np.eye(g.N) - alpha * sp.lam * sym
    smin = float(np.linalg.svd(B, compute_uv=False)[-1])
    if smin <= POLE_GATE:
        if np.isrealobj(sym):
            mu = np.linalg.eigvalsh(sym)[::-1]
        else:
            mu = np.sort(np.linalg.eigvals(sym).real)[::-1]
        raise PoleProximityError(
            _nearest_eigenvalue_message(curve, alpha, sp.lam,
                                        alpha * sp.lam * mu)
        )
    rhs = bie.apply_Psi_star(g, sp.conjugate, f, vol)
    eta = np.linalg.solve(np.eye(g.N) - alpha * sp.lam * op.entries, rhs)
    corr = bie.eval_Psi(g, eta, sp, vol.points, upsample=upsample).values
    return KreinResult(vol, free + alpha * corr, free, eta, g, sp, alpha)


def _direct_volume_field(kernel, sp, vol: VolumeGrid, f: np.ndarray,
                         points: np.ndarray) -> np.ndarray:
    """Integral of kernel(x - y) f(y) dy at points, by direct summation."""
    f = np.asarray(f, dtype=complex).ravel()
    out = np.zeros(len(points), dtype=complex)
    chunk = max(1, int(4e6 // max(len(vol.points), 1)))
    for lo in range(0, len(points), chunk):
        hi = min(lo + chunk, len(points))
        diff = points[lo:hi, None, :] - vol.points[None, :, :]
        out[lo:hi] = kernel(sp, diff) @ f
    return vol.weight * out


def krein_transmission_residual(result: KreinResult, f_samples: np.ndarray,
                                h_sequence=None, upsample: int = 16) -> float:
    """Relative residual of the oblique transmission condition for g.

    The free part is trace-continuous, so it drops from the jump on the left
    and contributes twice its dzbar trace on the right.
    """
    g, sp, alpha, vol = result.grid, result.sp, result.alpha, result.volume
    if h_sequence is None:
        h_sequence = bie.default_h_sequence(g.curve)
    jump, dzbar_sum = bie.jump_traces(g, result.density, sp, h_sequence, upsample)
    # dzbar of the free part on the curve, extrapolated from both sides
    f = np.asarray(f_samples, dtype=complex).ravel()
    stacks = []
    for sgn in (-1.0, +1.0):
        vals = np.stack([
            _direct_volume_field(kernel_dzbar_U, sp, vol, f,
                                 g.points + sgn * h * g.normals)
            for h in h_sequence
        ])
        stacks.append(bie._neville_to_zero(np.asarray(h_sequence, float), vals))
    dz_free = 0.5 * (stacks[0] + stacks[1])
    # lhs = nu (g_+ - g_-) = -i alpha jump ;  rhs = -alpha (dzbar g_+ + dzbar g_-)
    lhs = -1j * alpha * jump
    rhs = -alpha * (2 * dz_free + alpha * 1j * dzbar_sum)
    num = np.linalg.norm(lhs - rhs)
    den = max(np.linalg.norm(lhs), np.linalg.norm(rhs))
    return float(num / den)


# ---------------------------------------------------------------------------
# delta-interaction comparison


def delta_spectrum(curve: Curve, alpha: float, count: int, N: int = 256,
                   tol: float = 1e-9) -> SpectrumResult:
    """Eigenvalues of the delta interaction: roots of alpha mu_n(S(lambda)) = -1.

    Branches with no root are reported in ``empty_branches`` (the delta
    interaction has finitely many eigenvalues), not as errors.
    """
    if alpha == 0:
        raise ParameterError("alpha must be nonzero")
    if count < 1:
        raise ParameterError("count must be >= 1")
    if count > N // 8:
        raise ResolutionError(f"count={count} needs N >= {8 * count}, got N={N}")
    if alpha > 0:
        # alpha S(lambda) is positive, so -1 is never an eigenvalue
        return SpectrumResult(alpha, curve.name, N, tol, (), kind="delta",
                              empty_branches=tuple(range(1, count + 1)))

    entries = []
    empty = []
    for n in range(1, count + 1):
        def f(lam: float) -> float:
            # decreasing in lambda: mu_n increases, alpha < 0
            return alpha * _mu_n(curve, lam, n, N) + 1.0

        root = _bracket_and_solve(f, 1.0, tol, increasing=False)
        if root is None:
            empty.append(n)
            continue
        residual = abs(alpha * _mu_n(curve, root, n, N) + 1.0)
        entries.append(EigenvalueEntry(n, float(root), float(residual)))
    entries.sort(key=lambda e: -e.lam)
    return SpectrumResult(alpha, curve.name, N, tol, tuple(entries),
                          kind="delta", empty_branches=tuple(empty))


# ---------------------------------------------------------------------------
# CSV emission


def dispersion_csv_rows(curve: Curve, branches, lambdas, N: int = 256):
    """Rows 'lambda,n,value' for a sweep, header included."""
    yield "lambda,n,value"
    for n in branches:
        for lam in lambdas:
            s = dispersion(curve, n, lam, N)
            yield f"{s.lam:.17g},{s.n},{s.value:.17g}"
