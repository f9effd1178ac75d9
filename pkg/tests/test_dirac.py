import numpy as np
import pytest

from obliqueshell import bie, dirac, geometry
from obliqueshell.errors import DomainError, ParameterError
from obliqueshell.kernels import DiracParameter, M3, SpectralParameter


def test_real_lambda_rejected(circle):
    with pytest.raises(DomainError):
        dirac.limit_gaps(circle, -1.0, 16.0)
    with pytest.raises(DomainError):
        dirac.dirac_correction(circle, -1.0, -1.0, 16.0)
    with pytest.raises(DomainError):
        dirac.sqrt_shift_bounds(-1.0, 16.0)


def test_compression_resolvent_identity(circle):
    # (I - alpha c^2 M3 C M3)^-1 P3 = P3 (I - alpha c^2 P3 C P3)^-1 P3 must be
    # insensitive to junk placed in the structurally killed blocks
    g = geometry.grid(circle, 24)
    dp = DiracParameter.shifted(1j, 8.0)
    C = bie.assemble_M3CM3(g, dp).entries
    N = g.N
    rng = np.random.default_rng(1)
    C_junk = C.copy()
    C_junk[:N, :N] += 0.3 * rng.normal(size=(N, N))  # killed by P3 projection
    alpha, c = -1.0, 8.0
    P3 = np.zeros((2 * N, 2 * N))
    P3[N:, N:] = np.eye(N)
    R_clean = np.linalg.inv(np.eye(2 * N) - alpha * c ** 2 * C) @ P3
    R_proj = P3 @ np.linalg.inv(
        np.eye(2 * N) - alpha * c ** 2 * (P3 @ C_junk @ P3)) @ P3
    assert np.linalg.norm(R_clean - R_proj) <= 1e-12 * np.linalg.norm(R_proj)


def test_gap_sequences_decrease_with_c(circle):
    g1 = dirac.limit_gaps(circle, 1j, 8.0, N=64,
                          volume_box=bie.make_volume_grid(3.0, 24))
    g2 = dirac.limit_gaps(circle, 1j, 32.0, N=64,
                          volume_box=bie.make_volume_grid(3.0, 24))
    for a, b in zip(g1, g2):
        assert b < a
        assert a > 0 and np.isfinite(a)


def test_limit_study_slopes(circle):
    vol = bie.make_volume_grid(3.0, 24)
    res = dirac.nonrel_limit_study(circle, 1j, [8.0, 32.0, 128.0], N=64,
                                   volume_box=vol)
    # boundary-volume and volume gaps decay like 1/c, the boundary-boundary
    # gap like 1/c^2
    for name in ("a0", "phi", "phistar"):
        assert -1.4 <= res.slopes[name] <= -0.7, (name, res.slopes)
    assert res.slopes["c"] <= -1.7
    rows = list(res.csv_rows())
    assert rows[0] == "c,gap_a0,gap_phi,gap_phistar,gap_c"
    assert len(rows) == 4
    assert "slopes" in res.to_json()


def test_limit_study_needs_two_speeds(circle):
    with pytest.raises(ParameterError):
        dirac.nonrel_limit_study(circle, 1j, [8.0])


def test_gap_resolution_stability(circle):
    # doubling the boundary resolution moves the gaps by < 5%
    vol = bie.make_volume_grid(3.0, 24)
    a = dirac.limit_gaps(circle, 1j, 16.0, N=64, volume_box=vol)
    b = dirac.limit_gaps(circle, 1j, 16.0, N=128, volume_box=vol)
    for x, y in zip(a, b):
        assert abs(x - y) <= 0.05 * abs(x)


def test_correction_zero_coupling(circle):
    blocks = dirac.dirac_correction(circle, 0.0, 1j, 16.0, N=48, probe_n=10)
    assert blocks.difference_norm == 0.0
    assert blocks.m3_block_norm == 0.0
    assert np.all(blocks.dirac_kernel == 0)


def test_correction_reference_block_structure(circle):
    blocks = dirac.dirac_correction(circle, -1.0, 1j, 16.0, N=48, probe_n=10)
    M = blocks.schrod_kernel.shape[0] // 2
    # the limit correction lives in the first spinor component only
    assert blocks.m3_block_norm == 0.0
    assert np.linalg.norm(blocks.schrod_kernel[M:, :]) == 0.0
    assert np.linalg.norm(blocks.schrod_kernel[:, M:]) == 0.0
    assert np.linalg.norm(blocks.schrod_kernel[:M, :M]) > 0
    assert blocks.difference_norm > 0


def test_correction_convergence_rate(circle):
    norms, slope = dirac.correction_convergence(
        circle, -1.0, 1j, [16.0, 64.0], N=64, probe_n=12)
    assert norms[1] < norms[0]
    assert slope <= -0.8


def test_sqrt_shift_bounds_hold():
    out = dirac.sqrt_shift_bounds(1j, 100.0)
    assert out["bounds_hold"]
    out2 = dirac.sqrt_shift_bounds(1 + 1j, 10.0)
    assert out2["bounds_hold"]
    # ratio of the shifted to unshifted root approaches 1 as c grows
    big = dirac.sqrt_shift_bounds(1 + 1j, 1e6)
    assert big["max_abs"] / big["abs_sqrt_lambda"] == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ParameterError):
        dirac.sqrt_shift_bounds(1j, -5.0)


def test_sqrt_shift_reports_minimal_c():
    # huge |lambda| with tiny c violates the bounds; a minimal c is reported
    out = dirac.sqrt_shift_bounds(-1e6 + 1j, 1.0)
    if not out["bounds_hold"]:
        assert out["minimal_c"] > 1.0
        again = dirac.sqrt_shift_bounds(-1e6 + 1j, out["minimal_c"])
        assert again["bounds_hold"]
