"""Classical sampling of Gaussian optics with bucket detectors.

Conventions (fixed; mixing them is the classic bug):

* Phase-space vectors use block ordering ``r = (x_1, ..., x_m, p_1, ..., p_m)``.
  The per-mode pair of mode ``j`` is ``(r[j], r[m + j])`` and the complex
  amplitude is ``alpha_j = x_j + i p_j``.
* The vacuum covariance is ``I/2``; Wigner functions are normalised densities,
  so the single-mode vacuum is ``exp(-|r|^2) / pi`` and a coherent state with
  amplitude ``alpha`` carries ``|alpha|^2`` photons on average.
* ``Omega = [[0, I], [-I, 0]]``; a covariance is physical iff
  ``cov + (i/2) Omega >= 0``, equivalently all symplectic eigenvalues are
  ``>= 1/2``.

The no-click element of a bucket detector has Wigner function ``1/(2 pi)`` on
the disk ``|r| < R``.  Since every Wigner function involved is non-negative,
drawing a phase point from the output state and reading off which modes fall
outside their disk samples the detection pattern exactly.  The multi-mode
detector is the product of the per-mode ones.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DimensionError, ParameterError, StateError
from .linalg import check_unitary, matrix_from_json
from .rng import RngStream

SYMMETRY_TOL = 1e-12
PHYSICAL_TOL = 1e-9


def symplectic_form(m: int) -> np.ndarray:
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_eigenvalues(cov) -> np.ndarray:
    """Symplectic eigenvalues of a ``2m x 2m`` covariance, ascending."""
    cov = np.asarray(cov, dtype=float)
    m = cov.shape[0] // 2
    ev = np.linalg.eigvals(1j * symplectic_form(m) @ cov)
    return np.sort(np.abs(ev.real))[::2]


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Mean vector and covariance matrix of an ``m``-mode Gaussian state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).ravel()
        cov = np.array(self.cov, dtype=float)
        if mean.size % 2 or mean.size == 0:
            raise DimensionError(f"mean must have even positive length, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise DimensionError(f"covariance must be {mean.size}x{mean.size}, got {cov.shape}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise StateError("state contains NaN or Inf")
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(cov))):
            raise StateError("covariance matrix is not symmetric")
        cov = (cov + cov.T) / 2
        nu = symplectic_eigenvalues(cov)
        if nu.min() < 0.5 - PHYSICAL_TOL:
            raise StateError(f"covariance violates the uncertainty principle: min symplectic eigenvalue {nu.min():.6g} < 1/2")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def m(self) -> int:
        return self.mean.size // 2

    def mode(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        """Reduced ``(mean, cov)`` of mode ``j`` in ``(x, p)`` order."""
        idx = [j, self.m + j]
        return self.mean[idx], self.cov[np.ix_(idx, idx)]

    def mean_photon_proxy(self) -> float:
        """``sum |alpha_j|^2``, the coherent part of the photon number."""
        return float(np.sum(self.mean**2))

    def wigner(self, r) -> np.ndarray:
        """Wigner density at phase points ``r`` (shape ``(..., 2m)``)."""
        r = np.asarray(r, dtype=float)
        d = r - self.mean
        inv = np.linalg.inv(self.cov)
        quad = np.einsum("...i,ij,...j->...", d, inv, d)
        norm = (2 * math.pi) ** self.m * math.sqrt(np.linalg.det(self.cov))
        return np.exp(-0.5 * quad) / norm


def vacuum_state(m: int) -> GaussianState:
    if m < 1:
        raise DimensionError(f"need at least one mode, got {m}")
    return GaussianState(np.zeros(2 * m), 0.5 * np.eye(2 * m))


def coherent_state(displacements) -> GaussianState:
    """Product of coherent states; ``displacements[j] = (x_j, p_j)``."""
    d = np.asarray(displacements, dtype=float).reshape(-1, 2)
    m = d.shape[0]
    if m < 1:
        raise DimensionError("need at least one mode")
    return GaussianState(np.concatenate([d[:, 0], d[:, 1]]), 0.5 * np.eye(2 * m))


def squeezed_state(squeezing) -> GaussianState:
    """Product of squeezed vacua, mode ``j`` with covariance ``diag(e^{2s}, e^{-2s})/2``."""
    s = np.atleast_1d(np.asarray(squeezing, dtype=float))
    return GaussianState(np.zeros(2 * s.size), np.diag(np.concatenate([np.exp(2 * s), np.exp(-2 * s)]) / 2))


@dataclass(frozen=True, eq=False)
class GaussianChannel:
    """Affine action ``mean -> X mean + d``, ``cov -> X cov X^T + Y``."""

    X: np.ndarray
    Y: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        d = np.array(self.d, dtype=float).ravel()
        k = X.shape[0]
        if X.shape != (k, k) or Y.shape != (k, k) or d.shape != (k,) or k % 2 or k == 0:
            raise DimensionError(f"channel needs 2m x 2m X, Y and length-2m d; got {X.shape}, {Y.shape}, {d.shape}")
        if np.max(np.abs(Y - Y.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(Y))):
            raise StateError("Y must be symmetric")
        Y = (Y + Y.T) / 2
        if cp_defect(X, Y) < -PHYSICAL_TOL:
            raise StateError("channel is not completely positive: Y + (i/2)(Omega - X Omega X^T) has a negative eigenvalue")
        for a in (X, Y, d):
            a.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return self.X.shape[0] // 2

    def then(self, other: "GaussianChannel") -> "GaussianChannel":
        """The channel applying ``self`` first and ``other`` second."""
        if other.m != self.m:
            raise DimensionError("channels act on different mode counts")
        return GaussianChannel(other.X @ self.X, other.X @ self.Y @ other.X.T + other.Y, other.X @ self.d + other.d)


def cp_defect(X, Y) -> float:
    """Smallest eigenvalue of ``Y + (i/2)(Omega - X Omega X^T)``; ``>= 0`` for a valid channel."""
    om = symplectic_form(X.shape[0] // 2)
    H = Y + 0.5j * (om - X @ om @ X.T)
    return float(np.linalg.eigvalsh(H).min())


def identity_channel(m: int) -> GaussianChannel:
    return GaussianChannel(np.eye(2 * m), np.zeros((2 * m, 2 * m)), np.zeros(2 * m))


def passive_network_channel(U) -> GaussianChannel:
    """Channel of a lossless interferometer ``U`` acting on amplitudes ``alpha -> U alpha``."""
    try:
        U = check_unitary(U)
    except ParameterError as exc:
        raise StateError(str(exc)) from None
    X = np.block([[U.real, -U.imag], [U.imag, U.real]])
    k = X.shape[0]
    return GaussianChannel(X, np.zeros((k, k)), np.zeros(k))


def lossy_channel(eta: float, m: int) -> GaussianChannel:
    """Uniform loss with transmissivity ``eta`` on every mode."""
    if not 0 <= eta <= 1:
        raise ParameterError(f"transmissivity must lie in [0, 1], got {eta}")
    k = 2 * m
    return GaussianChannel(math.sqrt(eta) * np.eye(k), (1 - eta) / 2 * np.eye(k), np.zeros(k))


def apply_channel(state: GaussianState, channel: GaussianChannel) -> GaussianState:
    if state.m != channel.m:
        raise DimensionError(f"state has {state.m} modes, channel acts on {channel.m}")
    mean = channel.X @ state.mean + channel.d
    cov = channel.X @ state.cov @ channel.X.T + channel.Y
    cov = (cov + cov.T) / 2
    return GaussianState(mean, cov)


def sample_phase_points(state: GaussianState, rng: RngStream, size: int | None = None) -> np.ndarray:
    """Draw phase points from the (Gaussian, hence positive) Wigner function."""
    try:
        L = np.linalg.cholesky(state.cov)
    except np.linalg.LinAlgError:
        raise StateError("covariance is not positive definite") from None
    k = state.mean.size
    shape = (k,) if size is None else (size, k)
    z = rng.normal(size=shape)
    return state.mean + z @ L.T


def sample_phase_point(state: GaussianState, rng: RngStream) -> np.ndarray:
    return sample_phase_points(state, rng)


@dataclass(frozen=True)
class BucketDetector:
    """Click/no-click detector whose no-click Wigner function is flat on ``|r| < R``."""

    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise ParameterError(f"detector radius must be positive, got {self.R}")

    @property
    def dark_count_rate(self) -> float:
        return math.exp(-self.R**2)


def bucket_detect(r, detector: BucketDetector) -> np.ndarray:
    """Click pattern for phase point(s) ``r``: bit ``j`` is 1 iff mode ``j`` lies outside the disk."""
    r = np.asarray(r, dtype=float)
    if r.shape[-1] % 2:
        raise DimensionError("phase points must have even length")
    m = r.shape[-1] // 2
    radius = np.hypot(r[..., :m], r[..., m:])
    return (radius >= detector.R).astype(np.int8)


def classical_sample(state: GaussianState, network: GaussianChannel, detector: BucketDetector,
                     l: int, rng: RngStream) -> np.ndarray:
    """``l`` detection patterns, shape ``(l, m)``, sampled exactly."""
    out = apply_channel(state, network)
    return bucket_detect(sample_phase_points(out, rng, size=l), detector)


def no_click_probability(mean, cov, R: float) -> float:
    """Single-mode no-click probability: the Wigner density integrated over ``|r| < R``."""
    state = GaussianState(mean, cov)
    inv = np.linalg.inv(state.cov)
    norm = 2 * math.pi * math.sqrt(np.linalg.det(state.cov))
    mx, mp = state.mean

    def density(rho, phi):
        dx, dp = rho * math.cos(phi) - mx, rho * math.sin(phi) - mp
        q = inv[0, 0] * dx * dx + 2 * inv[0, 1] * dx * dp + inv[1, 1] * dp * dp
        return rho * math.exp(-0.5 * q) / norm

    val, _ = integrate.dblquad(density, 0.0, 2 * math.pi, 0.0, R, epsabs=1e-12, epsrel=1e-10)
    return float(val)


def click_probabilities(state: GaussianState, detector: BucketDetector) -> np.ndarray:
    """Per-mode click probability of ``state``."""
    return np.array([1.0 - no_click_probability(*state.mode(j), detector.R) for j in range(state.m)])


def pattern_counts(patterns) -> dict[str, int]:
    """Histogram of click patterns keyed by bit strings such as ``"010"``."""
    return dict(Counter("".join(map(str, row)) for row in np.asarray(patterns).tolist()))


def circuit_from_json(obj) -> tuple[GaussianState, GaussianChannel, BucketDetector]:
    """Parse a circuit description.

    ``input`` is one of ``{"vacuum": true}``, ``{"coherent": [[x, p], ...]}``,
    ``{"squeezed": [s, ...]}`` or ``{"mean": [...], "cov": [[...]]}``.
    ``channel`` is ``{"X", "Y", "d"}``, ``{"unitary": <matrix json>}``,
    ``{"loss": eta}`` or absent (identity).
    """
    m = int(obj["m"])
    inp = obj.get("input", {"vacuum": True})
    if "coherent" in inp:
        state = coherent_state(inp["coherent"])
    elif "squeezed" in inp:
        state = squeezed_state(inp["squeezed"])
    elif "mean" in inp:
        state = GaussianState(inp["mean"], inp["cov"])
    elif inp.get("vacuum"):
        state = vacuum_state(m)
    else:
        raise ParameterError(f"unrecognised input specification {sorted(inp)}")
    if state.m != m:
        raise DimensionError(f"input has {state.m} modes, circuit declares m = {m}")
    ch = obj.get("channel")
    if ch is None:
        channel = identity_channel(m)
    elif "unitary" in ch:
        channel = passive_network_channel(matrix_from_json(ch["unitary"]))
    elif "loss" in ch:
        channel = lossy_channel(float(ch["loss"]), m)
    elif "X" in ch:
        channel = GaussianChannel(ch["X"], ch["Y"], ch.get("d", np.zeros(2 * m)))
    else:
        raise ParameterError(f"unrecognised channel specification {sorted(ch)}")
    if channel.m != m:
        raise DimensionError(f"channel acts on {channel.m} modes, circuit declares m = {m}")
    detector = BucketDetector(float(obj.get("detector", {}).get("R", 1.6)))
    return state, channel, detector
