"""Nystrom discretization of the boundary operators and layer potentials.

Two assembly paths for the weakly singular single-layer kernel
(1/2pi) K_0(kappa |x-y|), kappa = -i sqrt(lambda):

* moderate kappa: Martensen-Kussmaul splitting.  K_0 is split into
  -(1/2) I_0 ln(4 sin^2((t-s)/2)) plus a smooth periodic remainder; the log
  factor is integrated with the exact Fourier log-weights, the remainder
  with the trapezoid rule.  Spectrally accurate on analytic curves.

* large real kappa (Re kappa * diameter beyond a threshold): the splitting
  is abandoned because I_0(kappa r) overflows/cancels catastrophically.
  Instead each row integral is computed by product integration on dyadically
  graded Gauss-Legendre panels around the singular node, with the density
  transferred off-grid through the exact trigonometric interpolant.  The
  kernel is evaluated directly, so no cancellation occurs; accuracy is then
  limited only by how well N nodes resolve the density.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import circulant

from .errors import ConfigurationError, DomainError, NumericalInstabilityError, SingularityError
from .geometry import Curve, QuadratureGrid
from .kernels import DiracParameter, SpectralParameter, kernel_L, kernel_U
from .specfun import EULER_GAMMA, bessel_i_array, bessel_k_array

#: Hard cap on Re(kappa) * diameter for the splitting path.  The splitting's
#: smooth remainder carries Fourier tails of size e^{2 kappa d}; the trapezoid
#: rule only damps the tail modes it resolves, so the usable range also grows
#: with N.  Empirically the remainder quadrature keeps the matrix positive
#: definite for kappa d up to about log2(N) (6 at N=64, 8 at N=256), and is
#: destroyed outright beyond kappa d of about 12 at any practical N.
SPLIT_LIMIT = 10.0


def _split_limit(N: int) -> float:
    return min(SPLIT_LIMIT, float(np.log2(N)))


# ---------------------------------------------------------------------------
# assembly


def log_quadrature_weights(N: int) -> np.ndarray:
    """Circulant matrix R with R[i,j] the exact quadrature weight of the
    periodic log kernel ln(4 sin^2((t_i - t_j)/2)) at node t_j."""
    n = N // 2
    theta = 2 * np.pi * np.arange(N) / N
    m = np.arange(1, n)
    col = -(2 * np.pi / n) * (np.cos(np.outer(theta, m)) / m).sum(axis=1) \
        - (np.pi / n ** 2) * np.cos(n * theta)
    return circulant(col)


def _pairwise_r(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff ** 2).sum(-1))


def _kernel_times(kappa: complex, r: np.ndarray, order: int = 0) -> np.ndarray:
    """K_order(kappa r) with the real fast path when kappa is real."""
    if kappa.imag == 0:
        return bessel_k_array(order, kappa.real * r)
    return bessel_k_array(order, kappa * r)


def _single_layer_weights_mk(grid: QuadratureGrid, kappa: complex) -> np.ndarray:
    """Symmetric weight matrix W of the Martensen-Kussmaul scheme.

    (S phi)(t_i) ~ sum_j W[i,j] jac_j phi_j.
    """
    N = grid.N
    t = grid.nodes
    r = _pairwise_r(grid.points)
    theta = t[:, None] - t[None, :]
    off = ~np.eye(N, dtype=bool)

    real_path = kappa.imag == 0
    arg = (kappa.real if real_path else kappa) * r
    i0 = bessel_i_array(0, arg)
    A = -i0 / (4 * np.pi)

    ln4sin2 = np.zeros_like(r)
    ln4sin2[off] = np.log(4 * np.sin(theta[off] / 2) ** 2)

    B = np.zeros_like(A, dtype=complex if not real_path else float)
    kern = np.zeros_like(B)
    kern[off] = _kernel_times(kappa, r[off]) / (2 * np.pi)
    B[off] = kern[off] - A[off] * ln4sin2[off]
    diag = -(np.log(kappa / 2) + EULER_GAMMA + np.log(grid.jacobians)) / (2 * np.pi)
    if real_path:
        diag = diag.real
    np.fill_diagonal(B, diag)

    R = log_quadrature_weights(N)
    return R * A + grid.weight * B


def _trig_interp_kernel(theta: np.ndarray, N: int) -> np.ndarray:
    """Cardinal function of trigonometric interpolation at N uniform nodes."""
    n = N // 2
    theta = np.asarray(theta, dtype=float)
    out = np.empty_like(theta)
    small = np.abs(np.remainder(theta + np.pi, 2 * np.pi) - np.pi) < 1e-12
    th = np.where(small, 1.0, theta)
    out = np.sin(n * th) * np.cos(th / 2) / (N * np.sin(th / 2))
    out[small] = 1.0
    return out


def _graded_offsets(kappa_scale: float, n_panel: int = 16) -> tuple[np.ndarray, np.ndarray, float]:
    """One-sided offsets/weights of dyadically graded GL panels on (delta, pi].

    Returns (offsets, weights, delta); panels halve toward the singularity
    until kappa_scale * delta <= 6e-4 (freezing the density over the innermost
    interval leaves an error of order delta^3).
    """
    levels = max(10, int(np.ceil(np.log2(max(np.pi * kappa_scale / 6e-4, 2.0)))))
    xg, wg = leggauss(n_panel)
    offs, wts = [], []
    hi = np.pi
    for _ in range(levels):
        lo = hi / 2
        offs.append(0.5 * (hi - lo) * xg + 0.5 * (hi + lo))
        wts.append(0.5 * (hi - lo) * wg)
        hi = lo
    return np.concatenate(offs), np.concatenate(wts), hi


def _single_layer_weights_local(grid: QuadratureGrid, kappa: complex) -> np.ndarray:
    """Graded-panel product integration; valid for any kappa with Re kappa > 0."""
    N = grid.N
    t = grid.nodes
    curve = grid.curve
    jac_max = float(grid.jacobians.max())
    offs, wts, delta = _graded_offsets(abs(kappa) * jac_max)
    Q = len(offs)

    real_path = kappa.imag == 0
    dtype = float if real_path else complex
    W = np.zeros((N, N), dtype=dtype)
    # with uniform nodes, t_i - t_j = t_{(i-j) mod N}, so the cardinal factor
    # is circulant and each panel node contributes one rank structure;
    # summing over panel nodes is a single (N,Q) x (Q,N) product per side,
    # scattered onto the diagonals d = (i - j) mod N afterwards.
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    rows = np.arange(N)[:, None]
    for sgn in (+1.0, -1.0):
        s = (t[:, None] + sgn * offs[None, :]).ravel()
        pts = curve.point(s).reshape(N, Q, 2)
        r = np.linalg.norm(pts - grid.points[:, None, :], axis=-1)
        kern = _kernel_times(kappa, r) / (2 * np.pi)
        jac_s = curve.jacobian(s).reshape(N, Q)
        A = kern * jac_s * wts[None, :]
        C = _trig_interp_kernel(sgn * offs[:, None] - t[None, :], N)
        W += (A @ C)[rows, idx]
    # innermost [0, delta]: kernel ~ K_0(kappa jac sigma), density frozen.
    a = kappa * grid.jacobians
    x = a * delta
    inner = delta * (1.0 - np.log(x / 2) - EULER_GAMMA) \
        - delta * x ** 2 / 12 * (np.log(x / 2) + EULER_GAMMA - 4.0 / 3.0) \
        - delta * x ** 4 / 320 * (np.log(x / 2) + EULER_GAMMA - 17.0 / 10.0)
    inner = grid.jacobians * inner / np.pi  # both sides, 1/(2 pi) kernel factor
    if real_path:
        inner = inner.real
    W[np.arange(N), np.arange(N)] += inner
    # divide out the jacobian column factor applied by the caller
    W = W / grid.jacobians[None, :]
    return 0.5 * (W + W.T)


def single_layer_weights(grid: QuadratureGrid, kappa: complex) -> np.ndarray:
    kappa = complex(kappa)
    if kappa.real <= 0:
        raise DomainError("single layer kernel needs Re kappa > 0")
    if kappa.real * grid.curve.diameter <= _split_limit(grid.N):
        return _single_layer_weights_mk(grid, kappa)
    return _single_layer_weights_local(grid, kappa)


@dataclass(frozen=True)
class BoundaryOperatorMatrix:
    """Dense Nystrom matrix acting on nodal density values."""

    entries: np.ndarray
    grid: QuadratureGrid
    param: object
    kind: str  # "S" or "M3CM3"

    @property
    def N(self) -> int:
        return self.grid.N

    def _jac_vector(self) -> np.ndarray:
        jac = self.grid.jacobians
        if self.entries.shape[0] == 2 * self.grid.N:
            jac = np.concatenate([jac, jac])
        return jac

    def symmetrized(self) -> np.ndarray:
        """Similarity transform making the matrix represent the operator in an
        orthonormal basis of the weighted L2 space on the curve."""
        d = np.sqrt(self._jac_vector())
        return self.entries * (d[:, None] / d[None, :])

    def eigenvalues_desc(self, k: int | None = None) -> np.ndarray:
        """Eigenvalues sorted by descending real part."""
        sym = self.symmetrized()
        if np.isrealobj(sym):
            n = sym.shape[0]
            if k is not None and n >= 512 and k < n // 4:
                from scipy.linalg import eigh
                vals = eigh(sym, eigvals_only=True,
                            subset_by_index=[n - k, n - 1])
                return vals[::-1]
            vals = np.linalg.eigvalsh(sym)[::-1]
        else:
            vals = np.linalg.eigvals(sym)
            vals = vals[np.argsort(-vals.real)]
        return vals if k is None else vals[:k]

    def operator_norm(self) -> float:
        return float(np.linalg.norm(self.symmetrized(), 2))

    def to_csv(self, path) -> None:
        """Row-major 're,im' pairs, 17 significant digits."""
        with open(path, "w") as fh:
            for row in np.atleast_2d(self.entries):
                fh.write(",".join(
                    f"{v.real:.17g},{v.imag:.17g}" for v in np.asarray(row, dtype=complex)
                ) + "\n")


def assemble_S(grid: QuadratureGrid, sp: SpectralParameter) -> BoundaryOperatorMatrix:
    """Single layer boundary operator S(lambda) as an N x N Nystrom matrix."""
    W = single_layer_weights(grid, sp.kappa)
    Q = W * grid.jacobians[None, :]
    return BoundaryOperatorMatrix(Q, grid, sp, "S")


def assemble_M3CM3(grid: QuadratureGrid, dp: DiracParameter) -> BoundaryOperatorMatrix:
    """Compression M3 C_z M3 of the Dirac boundary operator, 2N x 2N.

    The sigma.x term dies under the compression, so only the K_0 part of the
    Dirac kernel survives: the live block is (z/c^2 - 1/2) times the scalar
    single layer matrix at the relativistic root.  Component-major ordering;
    rows/columns touching the killed spinor component are structural zeros.
    """
    N = grid.N
    factor = dp.lam / dp.c ** 2 - 0.5
    W = single_layer_weights(grid, dp.kappa)
    Q = np.zeros((2 * N, 2 * N), dtype=complex)
    Q[N:, N:] = factor * W * grid.jacobians[None, :]
    return BoundaryOperatorMatrix(Q, grid, dp, "M3CM3")


# ---------------------------------------------------------------------------
# off-curve evaluation


@dataclass(frozen=True)
class FieldSamples:
    points: np.ndarray
    values: np.ndarray


def _check_points_off_curve(grid: QuadratureGrid, points: np.ndarray) -> None:
    fine_t = np.linspace(0, 2 * np.pi, 2048, endpoint=False)
    fine = grid.curve.point(fine_t)
    d = np.sqrt(((points[:, None, :] - fine[None, :, :]) ** 2).sum(-1)).min(axis=1)
    tol = 1e-10 * max(1.0, grid.curve.diameter)
    if np.any(d < tol):
        raise SingularityError("evaluation point lies on the curve")


def _upsampled_density(grid: QuadratureGrid, density: np.ndarray, factor: int):
    """Trig-interpolate density*jacobian to a factor-times-finer grid."""
    N = grid.N
    g = np.asarray(density, dtype=complex) * grid.jacobians
    if factor <= 1:
        return grid.points, g, grid.weight
    M = factor * N
    gh = np.fft.fft(g)
    Gh = np.zeros(M, dtype=complex)
    n = N // 2
    Gh[:n] = gh[:n]
    Gh[-(n - 1):] = gh[-(n - 1):]
    Gh[n] = gh[n] / 2
    Gh[M - n] = gh[n] / 2
    fine_vals = np.fft.ifft(Gh) * factor
    fine_t = 2 * np.pi * np.arange(M) / M
    return grid.curve.point(fine_t), fine_vals, 2 * np.pi / M


def _eval_layer(grid, density, sp, points, kernel, upsample):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    _check_points_off_curve(grid, points)
    src, g, w = _upsampled_density(grid, density, upsample)
    out = np.zeros(len(points), dtype=complex)
    chunk = max(1, int(4e6 // max(len(src), 1)))
    for lo in range(0, len(points), chunk):
        hi = min(lo + chunk, len(points))
        diff = points[lo:hi, None, :] - src[None, :, :]
        out[lo:hi] = kernel(sp, diff) @ g
    return FieldSamples(points, w * out)


def eval_SL(grid: QuadratureGrid, density: np.ndarray, sp: SpectralParameter,
            points: np.ndarray, upsample: int = 1) -> FieldSamples:
    """Single layer potential SL(lambda) density at points off the curve."""
    return _eval_layer(grid, density, sp, points, kernel_U, upsample)


def eval_Psi(grid: QuadratureGrid, density: np.ndarray, sp: SpectralParameter,
             points: np.ndarray, upsample: int = 1) -> FieldSamples:
    """Potential with the oblique kernel at points off the curve."""
    return _eval_layer(grid, density, sp, points, kernel_L, upsample)


def eval_dzbar_Psi(grid: QuadratureGrid, density: np.ndarray, sp: SpectralParameter,
                   points: np.ndarray, upsample: int = 1) -> FieldSamples:
    """d/dzbar of the oblique potential; equals (i lambda / 2) SL(lambda)."""
    sl = eval_SL(grid, density, sp, points, upsample=upsample)
    return FieldSamples(sl.points, 0.5j * sp.lam * sl.values)


# ---------------------------------------------------------------------------
# traces by Richardson extrapolation


def _neville_to_zero(h: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Polynomial extrapolation of vals(h) to h=0 along the last-but-one axis.

    ``vals`` has shape (len(h), ...).
    """
    tab = [v.astype(complex) for v in vals]
    k = len(h)
    for level in range(1, k):
        new = []
        for i in range(k - level):
            num = h[i] * tab[i + 1] - h[i + level] * tab[i]
            new.append(num / (h[i] - h[i + level]))
        tab = new
    return tab[0]


def default_h_sequence(curve: Curve) -> np.ndarray:
    return curve.diameter * np.array([1e-2, 5e-3, 2.5e-3])


def _extrapolated_sides(grid, density, sp, h_seq, evaluator, upsample):
    """One-sided boundary limits of a field, inside (+) and outside (-)."""
    h_seq = np.asarray(h_seq, dtype=float)
    if np.any(np.diff(h_seq) >= 0):
        raise ConfigurationError("h_sequence must be strictly decreasing")
    inner = np.stack([
        evaluator(grid, density, sp, grid.points - h * grid.normals, upsample).values
        for h in h_seq
    ])
    outer = np.stack([
        evaluator(grid, density, sp, grid.points + h * grid.normals, upsample).values
        for h in h_seq
    ])
    _ratio_check(h_seq, inner)
    _ratio_check(h_seq, outer)
    return _neville_to_zero(h_seq, inner), _neville_to_zero(h_seq, outer)


def _ratio_check(h_seq, stack) -> None:
    if len(h_seq) < 3:
        return
    d1 = np.linalg.norm(stack[0] - stack[1])
    d2 = np.linalg.norm(stack[1] - stack[2])
    scale = np.linalg.norm(stack[-1])
    if d1 < 1e-13 * max(scale, 1.0):
        return  # field effectively h-independent, nothing to extrapolate
    if d2 == 0 or not np.isfinite(d1 / d2):
        raise NumericalInstabilityError("trace extrapolation ratio test failed")
    expected = h_seq[0] / h_seq[1]
    ratio = d1 / d2
    if not (0.25 * expected < ratio < 16.0 * expected):
        raise NumericalInstabilityError(
            f"trace extrapolation not converging (difference ratio {ratio:.3g})"
        )


def jump_traces(grid: QuadratureGrid, density: np.ndarray, sp: SpectralParameter,
                h_sequence: np.ndarray | None = None, upsample: int = 16):
    """Extrapolated jump identities of the oblique potential.

    Returns (i (nu1 + i nu2)(trace_+ - trace_-),  -i (dzbar trace sum));
    these approach the density and lambda S(lambda) density respectively.
    """
    if h_sequence is None:
        h_sequence = default_h_sequence(grid.curve)
    psi_in, psi_out = _extrapolated_sides(grid, density, sp, h_sequence, eval_Psi, upsample)
    dz_in, dz_out = _extrapolated_sides(grid, density, sp, h_sequence, eval_dzbar_Psi, upsample)
    nu = grid.normals[:, 0] + 1j * grid.normals[:, 1]
    jump = 1j * nu * (psi_in - psi_out)
    dzbar_sum = -1j * (dz_in + dz_out)
    return jump, dzbar_sum


# ---------------------------------------------------------------------------
# volume grids and the adjoint map


@dataclass(frozen=True)
class VolumeGrid:
    """Uniform tensor grid over a square box, trapezoid weights h^2."""

    xs: np.ndarray
    ys: np.ndarray
    points: np.ndarray
    h: float

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.xs), len(self.ys)

    @property
    def weight(self) -> float:
        return self.h * self.h

    def reshape(self, flat: np.ndarray) -> np.ndarray:
        return np.asarray(flat).reshape(self.shape)


def make_volume_grid(halfwidth: float, n: int, center=(0.0, 0.0)) -> VolumeGrid:
    if halfwidth <= 0 or n < 2:
        raise ConfigurationError("volume grid needs halfwidth > 0 and n >= 2")
    # cell-centered nodes: generic curves are not hit exactly
    h = 2 * halfwidth / n
    xs = center[0] - halfwidth + h * (np.arange(n) + 0.5)
    ys = center[1] - halfwidth + h * (np.arange(n) + 0.5)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=-1)
    return VolumeGrid(xs, ys, pts, h)


def default_volume_grid(curve: Curve, n: int = 96) -> VolumeGrid:
    return make_volume_grid(3.0 * curve.diameter, n)


def check_volume_clear_of_curve(vol: VolumeGrid, grid: QuadratureGrid,
                                tol: float | None = None) -> None:
    if tol is None:
        tol = 1e-9 * grid.curve.diameter
    fine_t = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
    fine = grid.curve.point(fine_t)
    # distance in manageable chunks
    dmin = np.inf
    for lo in range(0, len(vol.points), 4096):
        block = vol.points[lo:lo + 4096]
        d = np.sqrt(((block[:, None, :] - fine[None, :, :]) ** 2).sum(-1)).min()
        dmin = min(dmin, float(d))
    if dmin < tol:
        raise ConfigurationError(
            f"volume grid touches the curve (min distance {dmin:.3g} < {tol:.3g})"
        )


def apply_Psi_star(grid: QuadratureGrid, sp: SpectralParameter,
                   f_samples: np.ndarray, vol: VolumeGrid) -> np.ndarray:
    """Adjoint map: density y -> integral of conj(L(x - y)) f(x) dx."""
    check_volume_clear_of_curve(vol, grid)
    f = np.asarray(f_samples, dtype=complex).ravel()
    if f.shape[0] != len(vol.points):
        raise ConfigurationError("f_samples does not match the volume grid")
    out = np.zeros(grid.N, dtype=complex)
    chunk = max(1, int(4e6 // grid.N))
    for lo in range(0, len(vol.points), chunk):
        hi = min(lo + chunk, len(vol.points))
        diff = vol.points[lo:hi, None, :] - grid.points[None, :, :]
        out += np.conj(kernel_L(sp, diff)).T @ f[lo:hi]
    return vol.weight * out
