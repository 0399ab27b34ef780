import math

import numpy as np
import pytest

from solitonlab import DomainError, GridError
from solitonlab.correlation import (SpinVector, apply_2J, build_singlet, chsh,
                                    chsh_local_strategies, chsh_optimize,
                                    coplanar_direction, epr_correlation,
                                    ladder_check_grid, pair_correlation_fn,
                                    pauli_dot, unit_vector)
from solitonlab.spingrid import GridSpec

ROOT2 = math.sqrt(2.0)


def _random_units(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _random_rotation(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


# --- construction ------------------------------------------------------------

def test_singlet_amplitudes_and_norm():
    pair = build_singlet(1.0)
    s = 1.0 / ROOT2
    assert pair.amplitudes == (0.0, pytest.approx(s), pytest.approx(-s), 0.0)
    assert pair.two_particle_norm == pytest.approx(1.0, abs=1e-10)


def test_singlet_norm_bilinear():
    assert build_singlet(2.0).two_particle_norm == pytest.approx(4.0, rel=1e-12)


def test_singlet_antisymmetric_under_exchange():
    pair = build_singlet(1.0)
    m = np.asarray(pair.amplitudes).reshape(2, 2)
    assert np.allclose(m.T, -m)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_singlet_rejects_bad_norm(bad):
    with pytest.raises(DomainError):
        build_singlet(bad)


# --- analyzer validation ------------------------------------------------------

def test_unit_vector_normalizes_near_unit():
    v = unit_vector((0.0, 0.0, 1.0 + 1e-9))
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-15)


def test_unit_vector_rejects_non_unit():
    with pytest.raises(DomainError):
        unit_vector((0.0, 0.0, 1.1))
    with pytest.raises(DomainError):
        unit_vector((0.0, 0.0, 0.0))


# --- doubled angular momentum --------------------------------------------------

def test_apply_2J_z_eigenvectors():
    up = SpinVector(1.0, 0.0)
    out = apply_2J((0, 0, 1), up)
    assert (out.c_up, out.c_down) == (1.0 + 0.0j, 0.0 + 0.0j)
    dn = SpinVector(0.0, 1.0)
    out = apply_2J((0, 0, 1), dn)
    assert (out.c_up, out.c_down) == (0.0 + 0.0j, -1.0 + 0.0j)


def test_apply_2J_x_flips_spin():
    out = apply_2J((1, 0, 0), SpinVector(1.0, 0.0))
    assert (out.c_up, out.c_down) == (0.0 + 0.0j, 1.0 + 0.0j)


def test_apply_2J_involution():
    rng = np.random.default_rng(5)
    for a in _random_units(rng, 50):
        v = SpinVector(complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
        w = apply_2J(a, apply_2J(a, v))
        assert abs(w.c_up - v.c_up) < 1e-12
        assert abs(w.c_down - v.c_down) < 1e-12


def test_apply_2J_rejects_non_unit():
    with pytest.raises(DomainError):
        apply_2J((0.5, 0, 0), SpinVector(1.0, 0.0))


# --- EPR correlation -----------------------------------------------------------

def test_correlation_parallel_analyzers():
    pair = build_singlet(1.0)
    assert epr_correlation(pair, (0, 0, 1), (0, 0, 1)).P_exact == pytest.approx(-1.0, abs=1e-12)


def test_correlation_orthogonal_analyzers():
    pair = build_singlet(1.0)
    assert epr_correlation(pair, (1, 0, 0), (0, 1, 0)).P_exact == pytest.approx(0.0, abs=1e-12)


def test_correlation_sixty_degrees():
    pair = build_singlet(1.0)
    b = (math.sin(math.pi / 3), 0.0, math.cos(math.pi / 3))
    assert epr_correlation(pair, (0, 0, 1), b).P_exact == pytest.approx(-0.5, abs=1e-12)


def test_correlation_equals_minus_dot_product():
    pair = build_singlet(1.0)
    rng = np.random.default_rng(17)
    a = _random_units(rng, 10_000)
    b = _random_units(rng, 10_000)
    p = pair_correlation_fn(pair)(a, b)
    assert np.max(np.abs(p + np.sum(a * b, axis=1))) < 1e-12
    assert np.max(np.abs(p)) <= 1.0 + 1e-12


def test_correlation_rotation_invariance():
    pair = build_singlet(1.0)
    rng = np.random.default_rng(23)
    for _ in range(100):
        a, b = _random_units(rng, 2)
        rot = _random_rotation(rng)
        p1 = epr_correlation(pair, a, b).P_exact
        p2 = epr_correlation(pair, rot @ a, rot @ b).P_exact
        assert abs(p1 - p2) < 1e-12


def test_correlation_symmetric():
    pair = build_singlet(1.0)
    rng = np.random.default_rng(29)
    for _ in range(50):
        a, b = _random_units(rng, 2)
        assert epr_correlation(pair, a, b).P_exact == pytest.approx(
            epr_correlation(pair, b, a).P_exact, abs=1e-14)


def test_correlation_operator_bilinearity():
    # sigma.(alpha a1 + beta a2) = alpha sigma.a1 + beta sigma.a2: expectation
    # through the raw operator respects the linear structure before any
    # normalization of the direction
    pair = build_singlet(1.0)
    amps = np.asarray(pair.amplitudes).reshape(2, 2)
    rng = np.random.default_rng(31)

    def raw_P(avec, bvec):
        op = pauli_dot(avec) @ amps @ pauli_dot(bvec).T
        return float(np.sum(amps.conj() * op).real)

    for _ in range(25):
        a1, a2, b = _random_units(rng, 3)
        alpha, beta = rng.normal(size=2)
        combo = alpha * a1 + beta * a2
        assert raw_P(combo, b) == pytest.approx(
            alpha * raw_P(a1, b) + beta * raw_P(a2, b), rel=1e-12, abs=1e-12)


def test_correlation_scales_with_radial_norm():
    # uncalibrated radial norm rescales the correlation by (norm/hbar)^2
    pair = build_singlet(2.0)
    assert epr_correlation(pair, (0, 0, 1), (0, 0, 1)).P_exact == pytest.approx(-4.0, rel=1e-12)
    assert epr_correlation(pair, (0, 0, 1), (0, 0, 1), hbar=2.0).P_exact == pytest.approx(-1.0, rel=1e-12)


def test_calibrated_singlet_from_solution(singlet05):
    # two-particle norm equals hbar^2 and P(a,b) = -(a.b) for the real pipeline
    assert singlet05.two_particle_norm == pytest.approx(1.0, abs=1e-10)
    b = (math.sin(1.0), 0.0, math.cos(1.0))
    assert epr_correlation(singlet05, (0, 0, 1), b).P_exact == pytest.approx(
        -math.cos(1.0), abs=1e-12)


# --- CHSH ---------------------------------------------------------------------

def test_chsh_canonical_angles():
    pair = build_singlet(1.0)
    fn = pair_correlation_fn(pair)
    a, ap, b, bp = (coplanar_direction(t) for t in
                    np.deg2rad([0.0, 90.0, 45.0, 135.0]))
    assert chsh(a, ap, b, bp, fn) == pytest.approx(2.0 * ROOT2, abs=1e-12)


def test_chsh_degenerate_settings():
    pair = build_singlet(1.0)
    fn = pair_correlation_fn(pair)
    a = coplanar_direction(0.3)
    b = coplanar_direction(1.1)
    s = chsh(a, a, b, b, fn)
    assert s == pytest.approx(2.0 * abs(fn(a, b)), abs=1e-12)
    assert s <= 2.0 + 1e-12


def test_local_strategies_bounded_by_two():
    values = chsh_local_strategies()
    assert len(values) == 16
    assert all(v <= 2.0 for v in values)
    assert max(values) == 2.0


def test_chsh_optimize_singlet():
    fn = pair_correlation_fn(build_singlet(1.0))
    _angles, s_max = chsh_optimize(fn)
    assert abs(s_max - 2.0 * ROOT2) <= 1e-6


def test_chsh_optimize_damped():
    fn = pair_correlation_fn(build_singlet(1.0))
    damped = lambda a, b: 0.5 * np.asarray(fn(a, b))
    _angles, s_max = chsh_optimize(damped)
    assert s_max == pytest.approx(ROOT2, abs=1e-6)
    assert s_max <= 2.0


def test_chsh_optimize_product_state():
    def product(a, b):
        a = np.atleast_2d(a)
        b = np.atleast_2d(b)
        r = -(a[:, 2] * b[:, 2])
        return r if r.size > 1 else float(r[0])

    _angles, s_max = chsh_optimize(product)
    assert s_max == pytest.approx(2.0, abs=1e-6)


def test_chsh_optimize_rejects_bad_restarts():
    with pytest.raises(DomainError):
        chsh_optimize(lambda a, b: 0.0, restarts=0)


# --- ladder grid check ----------------------------------------------------------

def test_ladder_check_grid_passes_default(sol05):
    report = ladder_check_grid(sol05)
    assert report.max_residual <= 0.02
    assert set(report.as_dict()) == {"jplus_up", "j3_up", "jminus_up",
                                     "jminus_dn", "j3_dn", "jplus_dn"}


def test_ladder_check_grid_convergence(sol05):
    r32 = ladder_check_grid(sol05, tol=0.2, grid=GridSpec(n=32, extent=10.0))
    r64 = ladder_check_grid(sol05, tol=0.2, grid=GridSpec(n=64, extent=10.0))
    for key, coarse in r32.as_dict().items():
        ratio = coarse / r64.as_dict()[key]
        assert 2.5 <= ratio <= 6.5


def test_ladder_check_grid_tolerance_enforced(sol05):
    with pytest.raises(GridError):
        ladder_check_grid(sol05, tol=1e-4)
