"""Two identical two-level atoms sharing one vacuum radiation field.

All rates and frequencies are in units of the single-atom decay rate, all
times are the dimensionless ``gamma * t`` and distances are ``k0 * r``.
Density matrices are column-vectorized (Fortran order) when acted on by a
Liouvillian, so ``vec(A X B) = kron(B.T, A) vec(X)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import StateCorrupted
from .linalg import ID2, SIGMA_MINUS, SIGMA_Z, herm_eigvals, kron, matrix_exp

ID4 = np.eye(4, dtype=complex)
LOWERING = (kron(SIGMA_MINUS, ID2), kron(ID2, SIGMA_MINUS))
SIGMA_Z_SITES = (kron(SIGMA_Z, ID2), kron(ID2, SIGMA_Z))
SWAP = np.eye(4)[[0, 2, 1, 3]].astype(complex)


def wavelengths_to_k0r(r_over_lambda):
    """Convert a separation in wavelengths ``r / lambda`` to ``k0 r``."""
    return 2.0 * math.pi * np.asarray(r_over_lambda, dtype=float)


def k0r_to_wavelengths(k0r):
    return np.asarray(k0r, dtype=float) / (2.0 * math.pi)


@dataclass(frozen=True)
class GeometryConfig:
    """Pair geometry and atomic constants.

    ``dipole_angle`` is the angle between the transition dipole and the
    interatomic axis; the default ``pi/2`` puts both dipoles perpendicular
    to the axis.
    """

    k0r: float
    dipole_angle: float = math.pi / 2
    gamma: float = 1.0
    omega0: float = 0.0

    def __post_init__(self):
        if not (self.k0r > 0 and math.isfinite(self.k0r)):
            raise ValueError(f"k0r must be positive and finite, got {self.k0r}")
        if not (0.0 <= self.dipole_angle <= math.pi / 2 + 1e-12):
            raise ValueError(f"dipole_angle must lie in [0, pi/2], got {self.dipole_angle}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.omega0 >= 0:
            raise ValueError(f"omega0 must be non-negative, got {self.omega0}")

    def with_k0r(self, k0r: float) -> "GeometryConfig":
        return GeometryConfig(float(k0r), self.dipole_angle, self.gamma, self.omega0)


@dataclass(frozen=True)
class CouplingCoefficients:
    gamma12: float
    omega12: float


def collective_damping(g: GeometryConfig) -> float:
    """Cross damping rate gamma_12 in units of gamma."""
    x = g.k0r
    c2 = math.cos(g.dipole_angle) ** 2
    sx, cx = math.sin(x), math.cos(x)
    return 1.5 * (1 - c2) * sx / x + 1.5 * (1 - 3 * c2) * (cx / x**2 - sx / x**3)


def dipole_shift(g: GeometryConfig) -> float:
    """Dipole-dipole energy shift Omega_12 in units of gamma."""
    x = g.k0r
    c2 = math.cos(g.dipole_angle) ** 2
    sx, cx = math.sin(x), math.cos(x)
    return -0.75 * (1 - c2) * cx / x + 0.75 * (1 - 3 * c2) * (sx / x**2 + cx / x**3)


def coupling_coefficients(g: GeometryConfig) -> CouplingCoefficients:
    return CouplingCoefficients(collective_damping(g), dipole_shift(g))


def _left(a):
    return kron(ID4, a)


def _right(a):
    return kron(a.T, ID4)


@dataclass(frozen=True)
class Liouvillian:
    matrix: np.ndarray = field(repr=False)
    geometry: GeometryConfig

    def apply(self, rho) -> np.ndarray:
        v = np.asarray(rho, dtype=complex).reshape(-1, order="F")
        return (self.matrix @ v).reshape(4, 4, order="F")


def build_liouvillian(g: GeometryConfig) -> Liouvillian:
    """Generator of the collective-emission master equation.

    Coherent part: local terms ``omega0 * sigma_z`` on each atom plus the
    exchange ``Omega_12 (s1+ s2- + s2+ s1-)``. Dissipative part: the
    Lindblad form with rate matrix ``[[gamma, gamma_12], [gamma_12, gamma]]``.
    """
    g12 = collective_damping(g) * g.gamma
    o12 = dipole_shift(g) * g.gamma
    rates = ((g.gamma, g12), (g12, g.gamma))

    sm = LOWERING
    sp = tuple(s.conj().T for s in sm)
    ham = g.omega0 * (SIGMA_Z_SITES[0] + SIGMA_Z_SITES[1])
    ham = ham + o12 * (sp[0] @ sm[1] + sp[1] @ sm[0])

    mat = -1j * (_left(ham) - _right(ham))
    for i in range(2):
        for j in range(2):
            rate = rates[i][j]
            if rate == 0.0:
                continue
            jump = sp[i] @ sm[j]
            # sigma_j^- rho sigma_i^+
            mat = mat + rate * (kron(sp[i].T, sm[j]) - 0.5 * (_left(jump) + _right(jump)))
    return Liouvillian(mat, g)


@dataclass(frozen=True)
class InitialState:
    """``family`` "Phi": a|01> + sqrt(1-a^2)|10>; "Psi": b|00> + sqrt(1-b^2)|11>."""

    family: str
    amplitude: float

    def __post_init__(self):
        if self.family not in ("Phi", "Psi"):
            raise ValueError(f"family must be 'Phi' or 'Psi', got {self.family!r}")
        if not (0.0 <= self.amplitude <= 1.0):
            raise ValueError(f"amplitude must lie in [0, 1], got {self.amplitude}")

    @classmethod
    def from_amp2(cls, family: str, amp2: float) -> "InitialState":
        if not (0.0 <= amp2 <= 1.0):
            raise ValueError(f"squared amplitude must lie in [0, 1], got {amp2}")
        return cls(family, math.sqrt(amp2))


def initial_state(s: InitialState) -> np.ndarray:
    a = s.amplitude
    b = math.sqrt(max(0.0, 1.0 - a * a))
    psi = np.zeros(4, dtype=complex)
    if s.family == "Phi":
        psi[1], psi[2] = a, b
    else:
        psi[0], psi[3] = a, b
    return np.outer(psi, psi.conj())


def _validated(rho: np.ndarray, what: str) -> np.ndarray:
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-9:
        raise StateCorrupted(f"{what}: trace {tr:.12g} deviates from 1")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > 1e-9:
        raise StateCorrupted(f"{what}: Hermitian deviation {herm:.3e}")
    # drop rounding drift so downstream entropies see an exact unit trace
    rho = 0.5 * (rho + rho.conj().T) / tr.real
    wmin = herm_eigvals(rho)[-1]
    if wmin < -1e-10:
        raise StateCorrupted(f"{what}: negative eigenvalue {wmin:.3e}")
    return rho


def propagator(L: Liouvillian, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    return matrix_exp(t * L.matrix)


def propagate(rho0, L: Liouvillian, t: float) -> np.ndarray:
    """Evolve `rho0` for scaled time `t` with the exact propagator exp(t L)."""
    rho0 = np.asarray(rho0, dtype=complex)
    if t == 0:
        return rho0.copy()
    v = propagator(L, t) @ rho0.reshape(-1, order="F")
    return _validated(v.reshape(4, 4, order="F"), f"propagate(t={t})")


def rk4_propagate(rho0, L: Liouvillian, t: float, steps: int) -> np.ndarray:
    """Fixed-step classical Runge-Kutta integration of the same generator."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    rho0 = np.asarray(rho0, dtype=complex)
    if t == 0:
        return rho0.copy()
    m = L.matrix
    h = t / steps
    v = rho0.reshape(-1, order="F")
    for _ in range(steps):
        k1 = m @ v
        k2 = m @ (v + 0.5 * h * k1)
        k3 = m @ (v + 0.5 * h * k2)
        k4 = m @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return _validated(v.reshape(4, 4, order="F"), f"rk4_propagate(t={t})")


def trajectory(rho0, L: Liouvillian, times) -> list[np.ndarray]:
    return [propagate(rho0, L, float(t)) for t in times]
