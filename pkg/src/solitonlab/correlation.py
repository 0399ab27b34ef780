"""Entangled two-soliton singlet, spin-correlation algebra and CHSH.

The two spin-basis solitons span a two-dimensional space on which the doubled
angular momentum 2(J.a) acts exactly as the Pauli matrix sigma.a (shown by
the ladder relations, and validated on a 3-D grid by ladder_check_grid). The
correlation operator for the product state therefore factorizes into a
4-dimensional spin-space computation times the squared radial norm, which is
where the engine is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, GridError
from . import spingrid

__all__ = [
    "SpinLabel", "SpinVector", "EntangledPair", "CorrelationReport", "ChshSettings",
    "build_singlet", "apply_2J", "epr_correlation", "pair_correlation_fn",
    "chsh", "chsh_optimize", "chsh_local_strategies", "ladder_check_grid",
    "unit_vector", "coplanar_direction",
]

UNIT_TOL = 1e-6


class SpinLabel(Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class SpinVector:
    """Amplitudes over the two spin-basis solitons."""
    c_up: complex
    c_down: complex

    @property
    def norm2(self) -> float:
        return abs(self.c_up) ** 2 + abs(self.c_down) ** 2


@dataclass(frozen=True)
class EntangledPair:
    """Two-particle state over the product basis (uu, ud, du, dd)."""
    amplitudes: tuple
    radial_norm_per_particle: float

    @property
    def two_particle_norm(self) -> float:
        amp2 = sum(abs(a) ** 2 for a in self.amplitudes)
        return amp2 * self.radial_norm_per_particle ** 2


@dataclass(frozen=True)
class ChshSettings:
    a: tuple
    a_prime: tuple
    b: tuple
    b_prime: tuple
    S: float


@dataclass(frozen=True)
class CorrelationReport:
    a: tuple
    b: tuple
    P_exact: float
    chsh: Optional[ChshSettings] = None


def unit_vector(a) -> np.ndarray:
    """Validate a Cartesian analyzer direction; normalize within 1e-6 of unit.

    Silent normalization of grossly non-unit vectors would mask caller bugs,
    so anything farther than 1e-6 from unit length is rejected.
    """
    v = np.asarray(a, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"analyzer direction must be finite, got {a!r}")
    norm = float(np.linalg.norm(v))
    if abs(norm - 1.0) > UNIT_TOL:
        raise DomainError(
            f"analyzer direction has length {norm:.8f}, more than {UNIT_TOL:g} from 1")
    return v / norm


def build_singlet(radial_norm: float) -> EntangledPair:
    """Antisymmetric zero-spin combination of the two basis solitons."""
    if not math.isfinite(radial_norm) or radial_norm <= 0:
        raise DomainError(f"radial_norm must be positive, got {radial_norm!r}")
    s = 1.0 / math.sqrt(2.0)
    return EntangledPair(amplitudes=(0.0 + 0.0j, s + 0.0j, -s + 0.0j, 0.0 + 0.0j),
                         radial_norm_per_particle=radial_norm)


def pauli_dot(a) -> np.ndarray:
    """sigma . a as a 2x2 complex matrix; equals the action of 2(J.a)."""
    a1, a2, a3 = a
    return np.array([[a3, a1 - 1j * a2],
                     [a1 + 1j * a2, -a3]], dtype=complex)


def apply_2J(direction, v: SpinVector) -> SpinVector:
    """Apply twice the spin projection along a unit direction.

    The basis action is phi_up -> a3 phi_up + (a1+ia2) phi_dn and
    phi_dn -> (a1-ia2) phi_up - a3 phi_dn, i.e. sigma.a on the coefficients.
    Applying it twice with the same direction is the identity.
    """
    a = unit_vector(direction)
    m = pauli_dot(a)
    c = m @ np.array([v.c_up, v.c_down], dtype=complex)
    return SpinVector(c_up=complex(c[0]), c_down=complex(c[1]))


def epr_correlation(pair: EntangledPair, a, b, hbar: float = 1.0) -> CorrelationReport:
    """Exact spin correlation <2(J1.a) x 2(J2.b)> for the two-particle state.

    The spin-space expectation is multiplied by (radial norm / hbar)^2; with
    the calibrated norm the singlet gives exactly -(a.b).
    """
    av = unit_vector(a)
    bv = unit_vector(b)
    amps = np.asarray(pair.amplitudes, dtype=complex).reshape(2, 2)
    op_amps = pauli_dot(av) @ amps @ pauli_dot(bv).T
    val = complex(np.sum(amps.conj() * op_amps))
    if abs(val.imag) > 1e-12 * max(1.0, abs(val.real)):
        raise DomainError(f"correlation has spurious imaginary part {val.imag:.3e}")
    scale = (pair.radial_norm_per_particle / hbar) ** 2
    return CorrelationReport(a=tuple(av), b=tuple(bv), P_exact=val.real * scale)


def pair_correlation_fn(pair: EntangledPair, hbar: float = 1.0) -> Callable:
    """Vectorized correlation closure fn(a, b) for batched unit directions.

    Accepts (3,) or (n, 3) arrays (assumed unit length; used by the CHSH
    optimizer where directions are constructed from angles).
    """
    amps = np.asarray(pair.amplitudes, dtype=complex).reshape(2, 2)
    scale = (pair.radial_norm_per_particle / hbar) ** 2

    def fn(a, b):
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        sa = _pauli_batch(a)
        sb = _pauli_batch(b)
        val = np.einsum("ik,nij,nkl,jl->n", amps.conj(), sa, sb, amps).real * scale
        return val if val.size > 1 else float(val[0])

    return fn


def _pauli_batch(a: np.ndarray) -> np.ndarray:
    out = np.empty((a.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = a[:, 2]
    out[:, 0, 1] = a[:, 0] - 1j * a[:, 1]
    out[:, 1, 0] = a[:, 0] + 1j * a[:, 1]
    out[:, 1, 1] = -a[:, 2]
    return out


def chsh(a, a_prime, b, b_prime, correlation_fn: Callable) -> float:
    """S = |P(a,b) - P(a,b')| + |P(a',b) + P(a',b')|."""
    return (abs(correlation_fn(a, b) - correlation_fn(a, b_prime))
            + abs(correlation_fn(a_prime, b) + correlation_fn(a_prime, b_prime)))


def coplanar_direction(theta):
    """Unit vector(s) in the x-z plane at angle theta from the z axis."""
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.sin(theta), np.zeros_like(theta), np.cos(theta)], axis=-1)


def chsh_optimize(correlation_fn: Callable, restarts: int = 4):
    """Maximize S over coplanar analyzer angles.

    A 1-degree grid over the two detector angles (with the optimal partner
    angles picked per pair) seeds Nelder-Mead refinements from the top
    `restarts` grid points. correlation_fn must accept batched (n, 3) inputs.
    Returns (best_angles, S_max) with angles (a, a', b, b') in radians.
    """
    if restarts < 1:
        raise DomainError(f"restarts must be >= 1, got {restarts}")
    theta = np.deg2rad(np.arange(0.0, 360.0))
    n = theta.size
    dirs = coplanar_direction(theta)
    table = np.empty((n, n))
    for i in range(n):
        table[i] = correlation_fn(np.broadcast_to(dirs[i], (n, 3)), dirs)
    # for each (b, b') pair, the best a maximizes |P(a,b) - P(a,b')| and the
    # best a' maximizes |P(a',b) + P(a',b')|
    m_diff = np.empty((n, n))
    m_sum = np.empty((n, n))
    i_diff = np.empty((n, n), dtype=int)
    i_sum = np.empty((n, n), dtype=int)
    for j in range(n):
        d = np.abs(table[:, j][:, None] - table)
        s = np.abs(table[:, j][:, None] + table)
        m_diff[j] = d.max(axis=0)
        i_diff[j] = d.argmax(axis=0)
        m_sum[j] = s.max(axis=0)
        i_sum[j] = s.argmax(axis=0)
    s_grid = m_diff + m_sum

    def s_of(angles):
        a, ap, b, bp = (coplanar_direction(t) for t in angles)
        return chsh(a, ap, b, bp, correlation_fn)

    best_angles, s_max = None, -math.inf
    flat = np.argsort(s_grid.ravel())[::-1][:restarts]
    for k in flat:
        j, jp = divmod(int(k), n)
        x0 = np.array([theta[i_diff[j, jp]], theta[i_sum[j, jp]], theta[j], theta[jp]])
        res = minimize(lambda ang: -s_of(ang), x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000})
        if -res.fun > s_max:
            s_max = -float(res.fun)
            best_angles = tuple(float(t) for t in res.x)
    return best_angles, s_max


def chsh_local_strategies() -> list:
    """S values of all 16 deterministic local strategies (each <= 2).

    A deterministic local model assigns fixed outcomes +-1 per analyzer
    setting; P(x, y) = A(x)B(y) then bounds S by 2 for every assignment.
    """
    values = []
    for a1, a2, b1, b2 in product((-1, 1), repeat=4):
        values.append(abs(a1 * b1 - a1 * b2) + abs(a2 * b1 + a2 * b2))
    return values


def ladder_check_grid(solution, tol: float = 0.02,
                      grid: Optional[spingrid.GridSpec] = None) -> spingrid.LadderReport:
    """Validate the six ladder relations on a 3-D grid.

    Central differences converge quadratically, so halving the spacing must
    shrink every residual about fourfold; at the 64^3 default all residuals
    stay below 2%.
    """
    spec = grid or spingrid.GridSpec(n=64, extent=10.0)
    report = spingrid.ladder_residuals(solution, spec)
    if report.max_residual > tol:
        worst = max(report.as_dict(), key=report.as_dict().get)
        raise GridError(
            f"ladder relation {worst} has residual {report.max_residual:.4f} "
            f"> {tol} at n = {spec.n}")
    return report
