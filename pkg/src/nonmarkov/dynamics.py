"""Reduced qubit dynamics driven by the amplitude b(t).

The single-qubit channel scales the excited population by |b|^2 and the
coherences by b; its Kraus pair (phase kept on b) is

    K0 = [[b, 0], [0, 1]],   K1 = [[0, 0], [sqrt(1-|b|^2), 0]]

in the (|e>, |g>) basis. Two noninteracting qubits in independent
reservoirs evolve under the tensor square of the channel, which also
covers entangled (Bell) inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constants
from .amplitude import AmplitudeTrajectory
from .errors import PhysicalityError
from .linalg import DensityMatrix, kron
from .reservoir import Lorentzian


@dataclass(frozen=True)
class QubitInitialState:
    """(alpha, beta): excited population and coherence of a qubit state."""

    alpha: float
    beta: complex

    def __post_init__(self):
        if not (0.0 <= self.alpha <= 1.0):
            raise PhysicalityError(f"alpha must lie in [0, 1], got {self.alpha}")
        b = complex(self.beta)
        if not (np.isfinite(b.real) and np.isfinite(b.imag)):
            raise PhysicalityError("beta must be finite")
        if abs(b) ** 2 > self.alpha * (1.0 - self.alpha) + constants.COHERENCE_SLACK:
            raise PhysicalityError(
                f"|beta|^2 = {abs(b)**2:.3e} exceeds alpha(1-alpha) = "
                f"{self.alpha * (1 - self.alpha):.3e}"
            )
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class StatePair:
    first: QubitInitialState
    second: QubitInitialState


@dataclass(frozen=True, eq=False)
class ScalarTrajectory:
    """A real signal on a uniform grid: trace distance, population, concurrence."""

    dt: float
    values: np.ndarray
    lorentzian: Lorentzian | None = None

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise PhysicalityError(f"dt must be positive, got {self.dt}")
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise PhysicalityError("values must be a nonempty 1-d array")
        if not np.isfinite(v).all():
            raise PhysicalityError("signal contains non-finite samples")
        if v.min() < -constants.AMPLITUDE_BOUND_SLACK or v.max() > 1.0 + constants.AMPLITUDE_BOUND_SLACK:
            raise PhysicalityError("signal leaves [0, 1] beyond tolerance")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def t_max(self) -> float:
        return self.dt * (self.values.size - 1)

    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.values.size)


def excited_state() -> QubitInitialState:
    return QubitInitialState(alpha=1.0, beta=0.0)


def ground_state() -> QubitInitialState:
    return QubitInitialState(alpha=0.0, beta=0.0)


def plus_state() -> QubitInitialState:
    """(|g> + |e>)/sqrt(2): alpha = 1/2, beta = 1/2."""
    return QubitInitialState(alpha=0.5, beta=0.5)


def minus_state() -> QubitInitialState:
    """(|g> - |e>)/sqrt(2): alpha = 1/2, beta = -1/2."""
    return QubitInitialState(alpha=0.5, beta=-0.5)


def optimal_pair() -> StatePair:
    """The |+>/|-> pair that saturates the maximum trace distance |b(t)|."""
    return StatePair(first=plus_state(), second=minus_state())


def density_matrix(state: QubitInitialState) -> DensityMatrix:
    a, b = state.alpha, state.beta
    return DensityMatrix(np.array([[a, b], [np.conj(b), 1.0 - a]], dtype=complex))


def _check_amplitude(b: complex) -> complex:
    b = complex(b)
    if abs(b) > 1.0 + constants.CHANNEL_INPUT_SLACK:
        raise PhysicalityError(f"|b| = {abs(b)!r} exceeds 1 beyond tolerance")
    return b


def kraus_pair(b: complex) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude-damping Kraus pair with survival amplitude b."""
    b = _check_amplitude(b)
    decay = np.sqrt(max(0.0, 1.0 - abs(b) ** 2))
    k0 = np.array([[b, 0.0], [0.0, 1.0]], dtype=complex)
    k1 = np.array([[0.0, 0.0], [decay, 0.0]], dtype=complex)
    return k0, k1


def evolve_single(state: QubitInitialState, b: complex) -> DensityMatrix:
    """Apply the channel: rho_ee -> alpha|b|^2, rho_eg -> beta*b."""
    b = _check_amplitude(b)
    pop = state.alpha * min(abs(b) ** 2, 1.0)
    coh = state.beta * b
    return DensityMatrix(np.array([[pop, coh], [np.conj(coh), 1.0 - pop]], dtype=complex))


def trace_distance_single(pair: StatePair, b: complex) -> float:
    """|b| sqrt(|b|^2 (alpha-mu)^2 + |beta-nu|^2), the closed-form distance."""
    b = _check_amplitude(b)
    x = abs(b)
    da = pair.first.alpha - pair.second.alpha
    db = abs(pair.first.beta - pair.second.beta)
    return x * np.sqrt(x * x * da * da + db * db)


def pair_distance_trajectory(traj: AmplitudeTrajectory, pair: StatePair) -> ScalarTrajectory:
    """Closed-form trace distance of an evolving pair along a trajectory."""
    x = np.abs(traj.values)
    da = pair.first.alpha - pair.second.alpha
    db = abs(pair.first.beta - pair.second.beta)
    vals = x * np.sqrt(x * x * da * da + db * db)
    return ScalarTrajectory(dt=traj.dt, values=vals, lorentzian=traj.lorentzian)


def optimal_distance_trajectory(traj: AmplitudeTrajectory) -> ScalarTrajectory:
    """|b(t)|: the trace distance of the optimal |+>/|-> pair."""
    return ScalarTrajectory(dt=traj.dt, values=np.abs(traj.values), lorentzian=traj.lorentzian)


def population_excited(traj: AmplitudeTrajectory) -> ScalarTrajectory:
    """Excited population |b(t)|^2 of a qubit prepared in |e>."""
    return ScalarTrajectory(
        dt=traj.dt, values=np.abs(traj.values) ** 2, lorentzian=traj.lorentzian
    )


def bell_psi() -> DensityMatrix:
    """(|ge> + |eg>)/sqrt(2) as a density matrix (basis ee, eg, ge, gg)."""
    v = np.zeros(4, dtype=complex)
    v[1] = v[2] = 1.0 / np.sqrt(2.0)
    return DensityMatrix(np.outer(v, v.conj()))


def bell_phi() -> DensityMatrix:
    """(|gg> + |ee>)/sqrt(2) as a density matrix (basis ee, eg, ge, gg)."""
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 1.0 / np.sqrt(2.0)
    return DensityMatrix(np.outer(v, v.conj()))


def evolve_two_qubit(
    a: QubitInitialState | DensityMatrix,
    b_state: QubitInitialState | None,
    b: complex,
) -> DensityMatrix:
    """Evolve two noninteracting qubits under the channel's tensor square.

    Product inputs are given as two single-qubit states; an entangled
    input (e.g. a Bell state) is given as a 4x4 DensityMatrix with
    b_state = None, and goes through the Kraus tensor representation.
    """
    b = _check_amplitude(b)
    if isinstance(a, DensityMatrix):
        if b_state is not None:
            raise PhysicalityError("joint 4x4 input takes b_state=None")
        if a.dim != 4:
            raise PhysicalityError("joint input must be 4x4")
        k0, k1 = kraus_pair(b)
        out = np.zeros((4, 4), dtype=complex)
        for ki in (k0, k1):
            for kj in (k0, k1):
                op = kron(ki, kj)
                out += op @ a.matrix @ op.conj().T
        return DensityMatrix(out)
    if b_state is None:
        raise PhysicalityError("product input needs two single-qubit states")
    return DensityMatrix(kron(evolve_single(a, b).matrix, evolve_single(b_state, b).matrix))


def trace_distance_two(b: complex) -> float:
    """|b| sqrt(2 - 2|b|^2 + |b|^4): distance of evolved |++> vs |-->."""
    b = _check_amplitude(b)
    x = abs(b)
    return x * np.sqrt(2.0 - 2.0 * x * x + x**4)


def two_qubit_distance_trajectory(traj: AmplitudeTrajectory) -> ScalarTrajectory:
    x = np.abs(traj.values)
    vals = x * np.sqrt(2.0 - 2.0 * x * x + x**4)
    return ScalarTrajectory(dt=traj.dt, values=vals, lorentzian=traj.lorentzian)


def concurrence_bell(b: complex) -> tuple[float, float]:
    """Concurrences (|b|^2, |b|^4) of evolved Bell states |Psi> and |Phi>."""
    b = _check_amplitude(b)
    x2 = min(abs(b) ** 2, 1.0)
    return max(0.0, x2), max(0.0, x2 * x2)


def concurrence_trajectories(traj: AmplitudeTrajectory) -> tuple[ScalarTrajectory, ScalarTrajectory]:
    x2 = np.minimum(np.abs(traj.values) ** 2, 1.0)
    c_psi = ScalarTrajectory(dt=traj.dt, values=x2, lorentzian=traj.lorentzian)
    c_phi = ScalarTrajectory(dt=traj.dt, values=x2 * x2, lorentzian=traj.lorentzian)
    return c_psi, c_phi
