"""Dense complex linear algebra for 2x2 and 4x4 Hermitian matrices.

Only what the trace-distance and concurrence oracles need: Hermitian
eigenvalues (closed form for 2x2, cyclic Jacobi for larger), Kronecker
products, and the Wootters concurrence. Matrices are plain complex numpy
arrays; :class:`DensityMatrix` wraps one with physicality checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constants
from .errors import NumericalFailureError, PhysicalityError

_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])


def _as_complex_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PhysicalityError(f"expected a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise PhysicalityError("matrix contains non-finite entries")
    return a


def hermitian_eigenvalues(m) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, ascending.

    2x2 matrices use the closed quadratic formula; anything larger goes
    through a cyclic Jacobi iteration with unitary plane rotations. Raises
    :class:`PhysicalityError` if the input deviates from Hermiticity by
    more than the shared tolerance.
    """
    a = _as_complex_matrix(m)
    dev = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if dev > constants.HERMITICITY_TOL * scale:
        raise PhysicalityError(f"matrix is not Hermitian (deviation {dev:.3e})")
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0].real])
    if n == 2:
        half_tr = 0.5 * (a[0, 0].real + a[1, 1].real)
        half_diff = 0.5 * (a[0, 0].real - a[1, 1].real)
        r = np.hypot(half_diff, abs(a[0, 1]))
        return np.array([half_tr - r, half_tr + r])
    return _jacobi_eigenvalues(a)


def _jacobi_eigenvalues(a: np.ndarray, max_sweeps: int = 30) -> np.ndarray:
    """Cyclic Jacobi for complex Hermitian matrices (eigenvalues only)."""
    h = 0.5 * (a + a.conj().T)  # exact Hermitian copy to iterate on
    n = h.shape[0]
    norm = np.linalg.norm(h)
    if norm == 0.0:
        return np.zeros(n)
    tol = 1e-15 * norm
    for _ in range(max_sweeps):
        # Off-diagonal norm summed directly: the norm(h)^2 - sum(diag^2)
        # shortcut cancels catastrophically once off ~ sqrt(eps)*norm.
        off = np.linalg.norm(h - np.diag(np.diag(h)))
        if off <= tol:
            return np.sort(np.diag(h).real)
        for p in range(n - 1):
            for q in range(p + 1, n):
                hpq = h[p, q]
                if abs(hpq) <= tol / (n * n):
                    continue
                # Phase out h[p,q], then a real Jacobi rotation on the
                # remaining symmetric 2x2 block.
                phase = hpq / abs(hpq)
                app = h[p, p].real
                aqq = h[q, q].real
                tau = (aqq - app) / (2.0 * abs(hpq))
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                v = np.array([[c * phase, s * phase], [-s, c]])
                h[:, [p, q]] = h[:, [p, q]] @ v
                h[[p, q], :] = v.conj().T @ h[[p, q], :]
                h[p, q] = 0.0
                h[q, p] = 0.0
                h[p, p] = h[p, p].real
                h[q, q] = h[q, q].real
    raise NumericalFailureError("Jacobi eigenvalue iteration did not converge")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A physical 2x2 or 4x4 density matrix.

    Stored exactly Hermitian (symmetrized on construction); trace and
    positivity are validated against the shared tolerance table.
    """

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = _as_complex_matrix(self.matrix)
        if a.shape[0] not in (2, 4):
            raise PhysicalityError(f"only 2x2 and 4x4 states supported, got {a.shape}")
        dev = np.max(np.abs(a - a.conj().T))
        if dev > constants.HERMITICITY_TOL * max(1.0, float(np.max(np.abs(a)))):
            raise PhysicalityError(f"density matrix not Hermitian (deviation {dev:.3e})")
        sym = 0.5 * (a + a.conj().T)
        tr = sym.trace().real
        if abs(tr - 1.0) > constants.TRACE_TOL:
            raise PhysicalityError(f"trace {tr!r} differs from 1 beyond tolerance")
        lo = hermitian_eigenvalues(sym)[0]
        if lo < constants.PSD_EIGENVALUE_FLOOR:
            raise PhysicalityError(f"negative eigenvalue {lo:.3e} beyond tolerance")
        sym.setflags(write=False)
        object.__setattr__(self, "matrix", sym)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return hermitian_eigenvalues(self.matrix)


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """(1/2) tr|a - b|: distinguishability of two states, in [0, 1]."""
    if a.dim != b.dim:
        raise PhysicalityError(f"dimension mismatch: {a.dim} vs {b.dim}")
    lam = hermitian_eigenvalues(a.matrix - b.matrix)
    return 0.5 * float(np.sum(np.abs(lam)))


def kron(a, b) -> np.ndarray:
    """Kronecker product of two square matrices."""
    am = _as_complex_matrix(a)
    bm = _as_complex_matrix(b)
    return np.kron(am, bm)


def wootters_concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit state.

    C = max(0, sqrt(l1) - sqrt(l2) - sqrt(l3) - sqrt(l4)) with l_i the
    descending eigenvalues of rho (sy x sy) rho* (sy x sy).
    """
    if rho.dim != 4:
        raise PhysicalityError("concurrence requires a 4x4 state")
    yy = np.kron(_SIGMA_Y, _SIGMA_Y)
    tilde = yy @ rho.matrix.conj() @ yy
    lam = np.linalg.eigvals(rho.matrix @ tilde)
    # The spectrum of rho*rho_tilde is real nonnegative; discard the
    # tiny imaginary/negative parts introduced by roundoff.
    lam = np.sort(np.clip(lam.real, 0.0, None))[::-1]
    roots = np.sqrt(lam)
    return max(0.0, float(roots[0] - roots[1] - roots[2] - roots[3]))
