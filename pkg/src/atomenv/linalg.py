"""Dense complex linear algebra for 2x2, 4x4 and 16x16 operators.

Matrices are plain ``numpy`` arrays. The two-qubit basis ordering is
``|00>, |01>, |10>, |11>`` with the first label belonging to atom A.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidState, NoConvergence, NotHermitian

# eigenvalues in [-NEG_CLIP, 0) are rounding noise and are set to zero
NEG_CLIP = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |0> ground, |1> excited; sigma^- = |0><1|
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T
ID2 = np.eye(2, dtype=complex)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def _check_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")


def herm_eigh(m, tol: float = 1e-10, max_sweeps: int = 50):
    """Eigen-decomposition of a small Hermitian matrix by cyclic Jacobi.

    Returns ``(w, v)`` with eigenvalues ``w`` in decreasing order and the
    matching eigenvectors as the columns of ``v``.

    Raises
    ------
    NotHermitian
        If ``max|m - m^H|`` exceeds `tol`.
    NoConvergence
        If the off-diagonal norm does not drop below 1e-12 within
        `max_sweeps` sweeps.
    """
    a = np.array(m, dtype=complex)
    _check_square(a)
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if dev > tol:
        raise NotHermitian(f"Hermitian deviation {dev:.3e} exceeds {tol:.1e}")
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1.0)

    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < 1e-12 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                # unitary rotation zeroing a[p, q]: strip the phase, then a
                # real symmetric Jacobi rotation
                phase = apq / mag
                app, aqq = a[p, p].real, a[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot = np.eye(n, dtype=complex)
                rot[p, p] = c
                rot[p, q] = s
                rot[q, p] = -s * np.conj(phase)
                rot[q, q] = c * np.conj(phase)
                a = rot.conj().T @ a @ rot
                v = v @ rot
    else:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")

    w = np.real(np.diag(a))
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def herm_eigvals(m, tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in decreasing order."""
    return herm_eigh(m, tol)[0]


def eigvals_2x2(m: np.ndarray) -> np.ndarray:
    """Closed-form eigenvalues of a stack of 2x2 Hermitian matrices.

    `m` has shape ``(..., 2, 2)``; returns ``(..., 2)`` sorted decreasing.
    Used in the vectorized measurement search where a Jacobi sweep per
    matrix would be far too slow.
    """
    a = m[..., 0, 0].real
    d = m[..., 1, 1].real
    b = m[..., 0, 1]
    mean = 0.5 * (a + d)
    rad = np.sqrt(0.25 * (a - d) ** 2 + np.abs(b) ** 2)
    return np.stack([mean + rad, mean - rad], axis=-1)


def clip_spectrum(w: np.ndarray, what: str = "state") -> np.ndarray:
    """Zero out tiny negative eigenvalues; raise on real negativity."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -NEG_CLIP:
        raise InvalidState(f"{what} has eigenvalue {w.min():.3e} < -{NEG_CLIP:.0e}")
    return np.where(w < 0, 0.0, w)


def _pade6(a: np.ndarray) -> np.ndarray:
    # diagonal (6, 6) Pade coefficients of exp
    b = (1.0, 1.0 / 2, 5.0 / 44, 1.0 / 66, 1.0 / 792, 1.0 / 15840, 1.0 / 665280)
    n = a.shape[0]
    ident = np.eye(n, dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (b[1] * ident + b[3] * a2 + b[5] * a4)
    v = b[0] * ident + b[2] * a2 + b[4] * a4 + b[6] * a6
    return np.linalg.solve(v - u, v + u)


def matrix_exp(m) -> np.ndarray:
    """Matrix exponential by scaling and squaring around a (6, 6) Pade core.

    The mean diagonal is shifted out first (it commutes with everything),
    then the remainder is halved until its 1-norm is below 0.5,
    exponentiated with the Pade approximant and squared back up.
    ``matrix_exp(0)`` is the identity exactly.
    """
    a = np.array(m, dtype=complex)
    _check_square(a)
    n = a.shape[0]
    mu = np.trace(a) / n
    a = a - mu * np.eye(n)
    norm = np.linalg.norm(a, 1)
    if norm == 0.0:
        return np.exp(mu) * np.eye(n, dtype=complex)
    s = max(0, int(math.ceil(math.log2(norm / 0.5))))
    e = _pade6(a / 2.0**s)
    for _ in range(s):
        e = e @ e
    return np.exp(mu) * e


def kron(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    ra, ca = a.shape
    rb, cb = b.shape
    out = a[:, None, :, None] * b[None, :, None, :]
    return out.reshape(ra * rb, ca * cb)


def partial_trace(rho, keep: str) -> np.ndarray:
    """Reduce a two-qubit density matrix to the qubit labelled `keep` ("A" or "B")."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"partial_trace expects a 4x4 matrix, got {rho.shape}")
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-8:
        raise InvalidState(f"trace {tr.real:.12g} deviates from 1")
    r = rho.reshape(2, 2, 2, 2)
    if keep == "A":
        return np.einsum("ijkj->ik", r)
    if keep == "B":
        return np.einsum("jijk->ik", r)
    raise ValueError(f"keep must be 'A' or 'B', not {keep!r}")


def swap_qubits(rho) -> np.ndarray:
    """Exchange the roles of A and B in a two-qubit operator."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    return r.transpose(1, 0, 3, 2).reshape(4, 4)


def is_density_matrix(rho, tol: float = 1e-8) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if abs(np.trace(rho) - 1) > tol or np.max(np.abs(rho - rho.conj().T)) > tol:
        return False
    return np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() >= -tol
