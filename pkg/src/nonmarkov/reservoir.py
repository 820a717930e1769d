"""Spectral densities J(w) and the reservoir correlation function f(t).

Rates are in units of an arbitrary reference rate chosen by the caller
(the CLI uses gamma0 = 1); times are in inverse units of the same rate.

The Lorentzian correlation uses the wide-band closed form
f(t) = (gamma0*width/2) * exp((i*detuning - width) * t). Ohmic-family
spectra go through vectorized composite Gauss-Legendre quadrature with a
doubling error estimate; tabulated spectra integrate their linear
interpolant times the oscillatory factor exactly, segment by segment.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import constants
from .errors import NumericalFailureError, PhysicalityError, UnsupportedModelError


class Regime(enum.Enum):
    MARKOVIAN = "markovian"
    NON_MARKOVIAN = "non_markovian"
    CRITICAL = "critical"


@dataclass(frozen=True)
class Lorentzian:
    """Lorentzian spectral density of width `width` centered at resonance.

    `detuning` shifts the qubit frequency off the spectral center; the
    closed-form amplitude path requires detuning == 0.
    """

    gamma0: float
    width: float
    detuning: float = 0.0

    def __post_init__(self):
        if not (self.gamma0 > 0 and np.isfinite(self.gamma0)):
            raise PhysicalityError(f"gamma0 must be positive, got {self.gamma0}")
        if not (self.width > 0 and np.isfinite(self.width)):
            raise PhysicalityError(f"width must be positive, got {self.width}")
        if not np.isfinite(self.detuning):
            raise PhysicalityError("detuning must be finite")


@dataclass(frozen=True)
class OhmicFamily:
    """J(w) = coupling * cutoff^(1-exponent) * w^exponent * exp(-w/cutoff).

    exponent < 1 is sub-ohmic, 1 ohmic, > 1 super-ohmic.
    """

    coupling: float
    exponent: float
    cutoff: float
    qubit_frequency: float

    def __post_init__(self):
        for name in ("coupling", "exponent", "cutoff", "qubit_frequency"):
            v = getattr(self, name)
            if not (v > 0 and np.isfinite(v)):
                raise PhysicalityError(f"{name} must be positive, got {v}")


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Spectral density given as (w, J) samples, linearly interpolated.

    Zero outside the tabulated range. Frequencies must be strictly
    increasing and J nonnegative.
    """

    points: np.ndarray
    qubit_frequency: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise PhysicalityError("points must be an (n >= 2, 2) array of (w, J)")
        if not np.isfinite(pts).all():
            raise PhysicalityError("tabulated points must be finite")
        if np.any(np.diff(pts[:, 0]) <= 0):
            raise PhysicalityError("tabulated frequencies must be strictly increasing")
        if np.any(pts[:, 1] < 0):
            raise PhysicalityError("tabulated J values must be nonnegative")
        if not (self.qubit_frequency > 0 and np.isfinite(self.qubit_frequency)):
            raise PhysicalityError("qubit_frequency must be positive")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


SpectralModel = Union[Lorentzian, OhmicFamily, Tabulated]


def load_tabulated(path, qubit_frequency: float) -> Tabulated:
    """Read a two-column (w, J) whitespace-separated file; '#' comments."""
    pts = np.loadtxt(path, comments="#", ndmin=2)
    return Tabulated(points=pts, qubit_frequency=qubit_frequency)


def classify_regime(model: SpectralModel) -> Regime:
    """Markovian for gamma0 < width/2, non-Markovian above, critical at the edge."""
    if not isinstance(model, Lorentzian):
        raise UnsupportedModelError(
            f"regime classification is defined for Lorentzian models, got {type(model).__name__}"
        )
    edge = 0.5 * model.width
    if abs(model.gamma0 - edge) <= constants.CRITICAL_REGIME_REL_TOL * model.width:
        return Regime.CRITICAL
    return Regime.MARKOVIAN if model.gamma0 < edge else Regime.NON_MARKOVIAN


def kappa(model: Lorentzian) -> float:
    """Oscillation/relaxation rate scale sqrt(|width^2 - 2*gamma0*width|)."""
    if not isinstance(model, Lorentzian):
        raise UnsupportedModelError("kappa is defined for Lorentzian models")
    return float(np.sqrt(abs(model.width**2 - 2.0 * model.gamma0 * model.width)))


@dataclass(frozen=True, eq=False)
class CorrelationSamples:
    """f(n*dt) on a uniform grid, n = 0 .. len(values)-1."""

    dt: float
    values: np.ndarray

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise PhysicalityError(f"dt must be positive, got {self.dt}")
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or v.size < 1:
            raise PhysicalityError("values must be a nonempty 1-d array")
        if not np.isfinite(v).all():
            raise PhysicalityError("correlation samples must be finite")
        if np.max(np.abs(v)) > 0 and not v[0].real > 0:
            raise PhysicalityError("f(0) must have positive real part for nontrivial coupling")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def correlation(
    model: SpectralModel,
    dt: float,
    n: int,
    rel_tol: float = constants.QUADRATURE_REL_TOL,
) -> CorrelationSamples:
    """Sample the reservoir correlation f(t) = integral J(w) e^{i(w0-w)t} dw.

    Returns n samples at t = 0, dt, ..., (n-1)*dt.
    """
    if n < 1:
        raise PhysicalityError(f"need at least one sample, got n={n}")
    if not (dt > 0 and np.isfinite(dt)):
        raise PhysicalityError(f"dt must be positive, got {dt}")
    t = dt * np.arange(n)
    if isinstance(model, Lorentzian):
        amp = 0.5 * model.gamma0 * model.width
        values = amp * np.exp((1j * model.detuning - model.width) * t)
    elif isinstance(model, OhmicFamily):
        values = _ohmic_correlation(model, t, rel_tol)
    elif isinstance(model, Tabulated):
        values = _tabulated_correlation(model, t)
    else:
        raise UnsupportedModelError(f"unknown spectral model {type(model).__name__}")
    return CorrelationSamples(dt=dt, values=values)


def spectral_density(model: SpectralModel, omega) -> np.ndarray | float:
    """Evaluate J(w) for models defined on an absolute frequency axis."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if isinstance(model, OhmicFamily):
        j = model.coupling * model.cutoff ** (1.0 - model.exponent)
        out = np.zeros_like(w)
        pos = w > 0
        out[pos] = j * w[pos] ** model.exponent * np.exp(-w[pos] / model.cutoff)
    elif isinstance(model, Tabulated):
        out = np.interp(w, model.points[:, 0], model.points[:, 1], left=0.0, right=0.0)
    else:
        raise UnsupportedModelError(
            "spectral_density on an absolute axis is defined for OhmicFamily/Tabulated"
        )
    return out if np.ndim(omega) else float(out[0])


def _gauss_legendre_nodes(edges: np.ndarray, order: int = 10):
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _graded_edges(omega_max: float, panels: int, grading: int = 16) -> np.ndarray:
    """Uniform panels, with the first one refined geometrically toward 0.

    Sub-ohmic spectra have an algebraic kink at w = 0 that uniform panels
    cannot resolve; geometric grading restores convergence there.
    """
    edges = np.linspace(0.0, omega_max, panels + 1)
    first = edges[1] * 0.5 ** np.arange(grading - 1, -1, -1)
    return np.concatenate([[0.0], first, edges[2:]])


def _oscillatory_sum(j_vals, weights, omega, omega0, t, chunk=4096):
    """Sum_k w_k J_k exp(i (w0 - w_k) t_i), chunked over t."""
    out = np.empty(t.size, dtype=complex)
    coeff = weights * j_vals
    delta = omega0 - omega
    for lo in range(0, t.size, chunk):
        block = t[lo : lo + chunk]
        out[lo : lo + chunk] = np.exp(1j * np.outer(block, delta)) @ coeff
    return out


def _ohmic_correlation(model: OhmicFamily, t: np.ndarray, rel_tol: float) -> np.ndarray:
    omega_max = 40.0 * model.cutoff
    t_last = float(t[-1]) if t.size else 0.0
    # Roughly one oscillation period of the integrand per panel.
    panels = max(32, int(np.ceil(omega_max * max(t_last, 1e-30) / (2.0 * np.pi))))
    if panels > 200_000:
        raise NumericalFailureError(
            f"oscillatory quadrature needs {panels} panels; horizon too long for "
            "the Ohmic correlation path"
        )

    def run(p):
        nodes, weights = _gauss_legendre_nodes(_graded_edges(omega_max, p))
        return _oscillatory_sum(
            spectral_density(model, nodes), weights, nodes, model.qubit_frequency, t
        )

    coarse = run(panels)
    fine = run(2 * panels)
    scale = max(abs(fine[0]), 1e-300)
    err = float(np.max(np.abs(fine - coarse))) / scale
    if err > rel_tol:
        raise NumericalFailureError(
            f"correlation quadrature did not converge (estimated relative error {err:.3e} "
            f"> {rel_tol:.1e})"
        )
    return fine


def _segment_fourier(j1, j2, w1, w2, t):
    """Exact integral of the linear interpolant times exp(-i w t) over [w1, w2].

    Returns an array over t. Small phases use a series expansion to avoid
    cancellation in (1 - exp(-i L t)) / (i t).
    """
    length = w2 - w1
    slope = (j2 - j1) / length
    phase = length * t  # L*t, real
    z = -1j * phase
    small = np.abs(phase) < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        it = 1j * t
        e = np.exp(z)
        e0 = np.where(small, length * (1.0 + z / 2.0 + z**2 / 6.0 + z**3 / 24.0),
                      np.divide(1.0 - e, it, out=np.full(t.shape, length + 0j), where=~small))
        e1 = np.where(
            small,
            length**2 * (0.5 + z / 3.0 + z**2 / 8.0 + z**3 / 30.0),
            np.divide(e0 - length * e, it, out=np.full(t.shape, 0.5 * length**2 + 0j), where=~small),
        )
    return np.exp(-1j * w1 * t) * (j1 * e0 + slope * e1)


def _tabulated_correlation(model: Tabulated, t: np.ndarray) -> np.ndarray:
    w = model.points[:, 0]
    j = model.points[:, 1]
    total = np.zeros(t.shape, dtype=complex)
    for k in range(w.size - 1):
        if j[k] == 0.0 and j[k + 1] == 0.0:
            continue
        total += _segment_fourier(j[k], j[k + 1], w[k], w[k + 1], t)
    return np.exp(1j * model.qubit_frequency * t) * total
