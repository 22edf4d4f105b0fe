"""Correlation measures on two-qubit states.

Entropies are in bits. Discord and classical correlation are one-way with
the projective measurement performed on qubit B; pass ``measured="A"`` to
get the mirrored quantities.
"""
from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidState, NotXState, OptimizerStalled
from .linalg import (
    SIGMA_Y,
    clip_spectrum,
    eigvals_2x2,
    herm_eigh,
    kron,
    partial_trace,
    swap_qubits,
)

log = logging.getLogger(__name__)

# (-CLIP_SLACK, 0) is rounding noise for scalar measures
CLIP_SLACK = 1e-8
_YY = kron(SIGMA_Y, SIGMA_Y)
TWO_PI = 2.0 * math.pi


def _clip_measure(value: float, name: str) -> float:
    if value < 0.0:
        if value < -CLIP_SLACK:
            raise InvalidState(f"{name} = {value:.3e} is negative beyond rounding")
        if value < -1e-12:
            log.debug("clipping %s = %.3e to zero", name, value)
        return 0.0
    return value


def _spectrum(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if abs(np.trace(rho) - 1.0) > 1e-8:
        raise InvalidState(f"trace {np.trace(rho).real:.12g} deviates from 1")
    return clip_spectrum(herm_eigh(rho, tol=1e-8)[0])


def _xlog2x(w):
    w = np.asarray(w, dtype=float)
    out = np.zeros_like(w)
    pos = w > 0
    out[pos] = w[pos] * np.log2(w[pos])
    return out


def von_neumann_entropy(rho) -> float:
    """``-sum(l * log2(l))`` over the eigenvalues of `rho`, with 0 log 0 = 0."""
    return max(0.0, float(-np.sum(_xlog2x(_spectrum(rho)))))


def binary_entropy(x: float) -> float:
    if x < -1e-12 or x > 1 + 1e-12:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    x = min(max(x, 0.0), 1.0)
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def spin_flip(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    return _YY @ rho.conj() @ _YY


def concurrence(rho) -> float:
    """Wootters concurrence.

    The square roots of the eigenvalues of ``rho @ spin_flip(rho)`` are the
    singular values of ``M = sqrt(rho) @ YY @ sqrt(rho).conj()``. They are
    read off the Hermitian dilation ``[[0, M], [M^H, 0]]``, which keeps
    near-zero values accurate to rounding instead of to its square root.
    """
    rho = np.asarray(rho, dtype=complex)
    w, v = herm_eigh(rho, tol=1e-8)
    w = clip_spectrum(w)
    sq = (v * np.sqrt(w)) @ v.conj().T
    m = sq @ _YY @ sq.conj()
    dil = np.zeros((8, 8), dtype=complex)
    dil[:4, 4:] = m
    dil[4:, :4] = m.conj().T
    s = herm_eigh(dil, tol=1e-8)[0][:4]
    return float(min(1.0, max(0.0, s[0] - s[1] - s[2] - s[3])))


def eof_from_concurrence(c: float) -> float:
    return binary_entropy(0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - c * c))))


def eof(rho) -> float:
    """Entanglement of formation in e-bits."""
    return eof_from_concurrence(concurrence(rho))


def x_state_concurrence(rho, tol: float = 1e-10) -> float:
    """Closed-form concurrence for states whose only nonzero entries form an X."""
    rho = np.asarray(rho, dtype=complex)
    mask = np.ones((4, 4), dtype=bool)
    mask[np.arange(4), np.arange(4)] = False
    mask[np.arange(4), 3 - np.arange(4)] = False
    off = np.max(np.abs(rho[mask]))
    if off > tol:
        raise NotXState(f"off-X element of magnitude {off:.3e}")
    p = np.clip(np.real(np.diag(rho)), 0.0, None)
    c1 = abs(rho[0, 3]) - math.sqrt(p[1] * p[2])
    c2 = abs(rho[1, 2]) - math.sqrt(p[0] * p[3])
    return float(2.0 * max(0.0, c1, c2))


def is_x_state(rho, tol: float = 1e-10) -> bool:
    try:
        x_state_concurrence(rho, tol)
    except NotXState:
        return False
    return True


def mutual_information(rho) -> float:
    rho = np.asarray(rho, dtype=complex)
    value = (
        von_neumann_entropy(partial_trace(rho, "A"))
        + von_neumann_entropy(partial_trace(rho, "B"))
        - von_neumann_entropy(rho)
    )
    return _clip_measure(value, "mutual information")


def conditional_entropy(rho) -> float:
    """``S(AB) - S(B)``; negative for entangled states."""
    rho = np.asarray(rho, dtype=complex)
    return von_neumann_entropy(rho) - von_neumann_entropy(partial_trace(rho, "B"))


@dataclass(frozen=True)
class MeasurementBasis:
    """Projective qubit measurement along the Bloch direction (theta, phi)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not (0.0 <= self.phi < TWO_PI):
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi}")

    @classmethod
    def canonical(cls, theta: float, phi: float) -> "MeasurementBasis":
        """Fold arbitrary angles onto theta in [0, pi], phi in [0, 2pi)."""
        theta = math.remainder(theta, TWO_PI)
        if theta < 0:
            theta, phi = -theta, phi + math.pi
        phi = math.fmod(phi, TWO_PI)
        if phi < 0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        return cls(min(theta, math.pi), phi)

    def vector(self) -> np.ndarray:
        return np.array(
            [math.cos(self.theta / 2), cmath.exp(1j * self.phi) * math.sin(self.theta / 2)]
        )

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.vector()
        p0 = np.outer(n, n.conj())
        return p0, np.eye(2) - p0


def _measured_blocks(rho: np.ndarray, thetas, phis):
    """Unnormalized states of A for outcome 0 of a measurement on B.

    Returns entries ``(m00, m11, m01)`` of ``Tr_B[(I x P0) rho]`` for each
    pair of angles (broadcast), where ``P0 = |n><n|``.
    """
    c = np.cos(np.asarray(thetas) / 2)
    s = np.exp(1j * np.asarray(phis)) * np.sin(np.asarray(thetas) / 2)
    r = rho.reshape(2, 2, 2, 2)

    def sandwich(a, ap):
        blk = r[a, :, ap, :]
        return (
            c * c * blk[0, 0]
            + c * s * blk[0, 1]
            + np.conj(s) * c * blk[1, 0]
            + np.conj(s) * s * blk[1, 1]
        )

    return sandwich(0, 0).real, sandwich(1, 1).real, sandwich(0, 1)


def _branch_entropy(m00, m11, m01):
    # p S(M / p) = -sum(mu log2 mu) + p log2 p for eigenvalues mu of M
    mats = np.empty(np.shape(m00) + (2, 2), dtype=complex)
    mats[..., 0, 0] = m00
    mats[..., 1, 1] = m11
    mats[..., 0, 1] = m01
    mats[..., 1, 0] = np.conj(m01)
    mu = np.clip(eigvals_2x2(mats), 0.0, None)
    p = np.clip(m00 + m11, 0.0, None)
    out = -_xlog2x(mu).sum(axis=-1) + _xlog2x(p)
    return np.where(p < 1e-14, 0.0, out)


def measured_conditional_entropy_grid(rho, thetas, phis) -> np.ndarray:
    """Vectorized ``sum_k p_k S(rho_A|k)`` over broadcast arrays of angles."""
    rho = np.asarray(rho, dtype=complex)
    rho_a = partial_trace(rho, "A")
    m00, m11, m01 = _measured_blocks(rho, thetas, phis)
    e0 = _branch_entropy(m00, m11, m01)
    e1 = _branch_entropy(rho_a[0, 0].real - m00, rho_a[1, 1].real - m11, rho_a[0, 1] - m01)
    return e0 + e1


def conditional_entropy_on_measurement(rho, basis: MeasurementBasis, measured: str = "B") -> float:
    """Average entropy of the unmeasured qubit after measuring `basis`."""
    rho = np.asarray(rho, dtype=complex)
    if measured == "A":
        rho = swap_qubits(rho)
    value = measured_conditional_entropy_grid(rho, np.array(basis.theta), np.array(basis.phi))
    return float(max(0.0, value))


class _ScalarObjective:
    """Pure-python conditional entropy for the local refinement loop."""

    def __init__(self, rho: np.ndarray):
        r = rho.reshape(2, 2, 2, 2)
        self.b00 = [[complex(r[0, i, 0, j]) for j in range(2)] for i in range(2)]
        self.b11 = [[complex(r[1, i, 1, j]) for j in range(2)] for i in range(2)]
        self.b01 = [[complex(r[0, i, 1, j]) for j in range(2)] for i in range(2)]
        self.a00 = (self.b00[0][0] + self.b00[1][1]).real
        self.a11 = (self.b11[0][0] + self.b11[1][1]).real
        self.a01 = self.b01[0][0] + self.b01[1][1]
        self.calls = 0

    @staticmethod
    def _sandwich(b, c, s):
        sc = s.conjugate()
        return c * c * b[0][0] + c * s * b[0][1] + sc * c * b[1][0] + sc * s * b[1][1]

    @staticmethod
    def _branch(m00, m11, m01):
        p = m00 + m11
        if p < 1e-14:
            return 0.0
        rad = math.sqrt(0.25 * (m00 - m11) ** 2 + abs(m01) ** 2)
        out = p * math.log2(p)
        for mu in (0.5 * p + rad, 0.5 * p - rad):
            if mu > 0:
                out -= mu * math.log2(mu)
        return out

    def __call__(self, x) -> float:
        self.calls += 1
        theta, phi = float(x[0]), float(x[1])
        c = math.cos(0.5 * theta)
        s = cmath.exp(1j * phi) * math.sin(0.5 * theta)
        m00 = self._sandwich(self.b00, c, s).real
        m11 = self._sandwich(self.b11, c, s).real
        m01 = self._sandwich(self.b01, c, s)
        return self._branch(m00, m11, m01) + self._branch(
            self.a00 - m00, self.a11 - m11, self.a01 - m01
        )


@dataclass(frozen=True)
class OptimizerSettings:
    n_theta: int = 48
    n_phi: int = 96
    n_starts: int = 5
    xatol: float = 1e-9
    fatol: float = 1e-13
    maxiter: int = 2000


DEFAULT_OPTIMIZER = OptimizerSettings()


def minimize_measured_entropy(rho, settings: OptimizerSettings = DEFAULT_OPTIMIZER):
    """Minimum over projective measurements on B of the measured conditional entropy.

    A deterministic ``n_theta x n_phi`` grid over the Bloch sphere is scanned,
    and Nelder-Mead is started from the `n_starts` best grid points.
    Returns ``(value, MeasurementBasis)``.
    """
    rho = np.asarray(rho, dtype=complex)
    thetas = np.linspace(0.0, math.pi, settings.n_theta)
    phis = np.arange(settings.n_phi) * (TWO_PI / settings.n_phi)
    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    grid = measured_conditional_entropy_grid(rho, tt, pp).ravel()
    order = np.argsort(grid, kind="stable")

    f = _ScalarObjective(rho)
    dth = thetas[1] - thetas[0]
    dph = phis[1] - phis[0]
    best_val, best_x = float(grid[order[0]]), (tt.flat[order[0]], pp.flat[order[0]])
    converged = False
    for idx in order[: settings.n_starts]:
        x0 = np.array([tt.flat[idx], pp.flat[idx]])
        simplex = np.array([x0, x0 + [dth, 0.0], x0 + [0.0, dph]])
        res = minimize(
            f,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": settings.xatol,
                "fatol": settings.fatol,
                "maxiter": settings.maxiter,
            },
        )
        converged |= bool(res.success)
        if res.fun < best_val:
            best_val, best_x = float(res.fun), (float(res.x[0]), float(res.x[1]))
    if not converged:
        raise OptimizerStalled("no Nelder-Mead refinement reached its tolerance")
    return max(0.0, best_val), MeasurementBasis.canonical(*best_x)


def classical_correlation(rho, measured: str = "B", settings: OptimizerSettings = DEFAULT_OPTIMIZER):
    """One-way classical correlation and the optimal measurement basis."""
    rho = np.asarray(rho, dtype=complex)
    if measured == "A":
        rho = swap_qubits(rho)
    elif measured != "B":
        raise ValueError(f"measured must be 'A' or 'B', not {measured!r}")
    s_a = von_neumann_entropy(partial_trace(rho, "A"))
    h_min, basis = minimize_measured_entropy(rho, settings)
    return _clip_measure(s_a - h_min, "classical correlation"), basis


def discord(rho, measured: str = "B", settings: OptimizerSettings = DEFAULT_OPTIMIZER) -> float:
    rho = np.asarray(rho, dtype=complex)
    c, _ = classical_correlation(rho, measured, settings)
    return _clip_measure(mutual_information(rho) - c, "discord")


def environment_entanglement(rho, settings: OptimizerSettings = DEFAULT_OPTIMIZER) -> float:
    """Entanglement between atom A and the environment via monogamy.

    Valid when the atoms plus environment form a pure state.
    """
    return _clip_measure(discord(rho, settings=settings) + conditional_entropy(rho), "E_AE")


def environment_discord(rho, settings: OptimizerSettings = DEFAULT_OPTIMIZER) -> float:
    """Discord between atom A and the environment (measuring the environment)."""
    return _clip_measure(eof(rho) + conditional_entropy(rho), "delta_AE")


@dataclass(frozen=True)
class CorrelationRecord:
    gamma_t: float
    k0r: float
    E_AB: float
    delta_AB: float
    C_AB: float
    I_AB: float
    S_cond: float
    E_AE: float
    delta_AE: float
    optimal_basis: MeasurementBasis

    def check(self, tol: float = 1e-9) -> None:
        """Raise ``InvalidState`` if a defining identity is violated."""
        gaps = {
            "delta_AB - (I_AB - C_AB)": self.delta_AB - (self.I_AB - self.C_AB),
            "E_AE - delta_AB - S_cond": self.E_AE - self.delta_AB - self.S_cond,
            "delta_AE - E_AB - S_cond": self.delta_AE - self.E_AB - self.S_cond,
        }
        for name, gap in gaps.items():
            if abs(gap) >= tol:
                raise InvalidState(f"record identity {name} off by {gap:.3e}")

    def as_row(self) -> tuple:
        return (
            self.gamma_t,
            self.k0r,
            self.E_AB,
            self.delta_AB,
            self.C_AB,
            self.I_AB,
            self.S_cond,
            self.E_AE,
            self.delta_AE,
            self.optimal_basis.theta,
            self.optimal_basis.phi,
        )


def correlation_record(
    rho, gamma_t: float, k0r: float, settings: OptimizerSettings = DEFAULT_OPTIMIZER
) -> CorrelationRecord:
    """Evaluate every measure once and assemble a consistent record."""
    rho = np.asarray(rho, dtype=complex)
    e_ab = eof(rho)
    s_ab = von_neumann_entropy(rho)
    s_a = von_neumann_entropy(partial_trace(rho, "A"))
    s_b = von_neumann_entropy(partial_trace(rho, "B"))
    i_ab = _clip_measure(s_a + s_b - s_ab, "mutual information")
    h_min, basis = minimize_measured_entropy(rho, settings)
    c_ab = _clip_measure(s_a - h_min, "classical correlation")
    d_ab = _clip_measure(i_ab - c_ab, "discord")
    s_cond = s_ab - s_b
    rec = CorrelationRecord(
        gamma_t=float(gamma_t),
        k0r=float(k0r),
        E_AB=e_ab,
        delta_AB=d_ab,
        C_AB=c_ab,
        I_AB=i_ab,
        S_cond=s_cond,
        E_AE=_clip_measure(d_ab + s_cond, "E_AE"),
        delta_AE=_clip_measure(e_ab + s_cond, "delta_AE"),
        optimal_basis=basis,
    )
    rec.check()
    return rec
