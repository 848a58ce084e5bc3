"""Flatness of Boson-Sampling distributions: bounds, moment identities and probes.

Gaussian model.  ``mu_G(sigma)`` draws the real and imaginary part of every
entry i.i.d. from N(0, sigma^2), so ``E|x|^2 = 2 sigma^2``.  The default
``sigma = 1/sqrt(m)`` therefore gives ``E|x|^2 = 2/m``, twice the Haar value
``E|U_jk|^2 = 1/m``.  That factor is kept deliberately; the probes report both
ensembles' second moments instead of silently rescaling one of them.

Caveat on :func:`gaussian_concentration_bound`: it evaluates the stated
formula, which uses the tail ``erfc(xi / (sqrt 2 sigma))`` of a *real*
Gaussian.  The modulus of a complex entry has the larger tail
``exp(-xi^2 / (2 sigma^2))`` (see :func:`complex_entry_exceedance`), so the
formula underestimates the true exceedance for ``mu_G``.  The end point of the
chained bound used by :func:`theorem_bound_evaluator` (``2 n^2 e^{1 - x^2}``)
is unaffected because it only needs the larger tail.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import erfc

from .distribution import (
    DEFAULT_CAP,
    OutcomeSequence,
    enumerate_sample_space,
    outcome_probabilities,
    sample_space_size,
)
from .errors import DimensionError, EnumerationCapError, ParameterError
from .linalg import (
    haar_isometry_columns,
    haar_unitary,
    permanents,
    sample_gaussian_matrix,
    sample_row_repeated_gaussian,
)
from .rng import RngStream

_CHUNK = 50_000


def default_sigma(m: int) -> float:
    return 1.0 / math.sqrt(m)


# ---------------------------------------------------------------------------
# concentration of the Gaussian measure


def gaussian_concentration_bound(n: int, sigma: float, xi: float) -> float:
    """``1 - (1 - erfc(xi / (sqrt(2) sigma)))^(n^2)``, the max-entry bound as usually stated."""
    if n < 1 or sigma <= 0 or xi <= 0:
        raise ParameterError("need n >= 1, sigma > 0, xi > 0")
    tail = float(erfc(xi / (math.sqrt(2.0) * sigma)))
    if tail >= 1.0:
        return 1.0
    return float(-math.expm1(n * n * math.log1p(-tail)))


def complex_entry_exceedance(n: int, sigma: float, xi: float, rows: int | None = None) -> float:
    """Exact ``Pr[max_jk |x_jk| >= xi]`` for independent complex Gaussian entries.

    ``rows`` is the number of independent rows (``|S~|`` for a row-repeated
    matrix); it defaults to ``n``.
    """
    if n < 1 or sigma <= 0 or xi <= 0:
        raise ParameterError("need n >= 1, sigma > 0, xi > 0")
    rows = n if rows is None else rows
    tail = math.exp(-(xi**2) / (2 * sigma**2))
    return float(-math.expm1(rows * n * math.log1p(-tail))) if tail < 1 else 1.0


def erfc_chain_bound(n: int, x: float) -> float | None:
    """``2 n^2 e^{1 - x^2}`` when ``n^2 e^{1 - x^2} <= 1/2``, else ``None``."""
    q = n * n * math.exp(1 - x * x)
    return 2 * q if q <= 0.5 else None


def max_entry_exceedance_mc(n: int, sigma: float, xi: float, draws: int, rng: RngStream,
                            S=None) -> tuple[float, float]:
    """Monte Carlo ``Pr[max |x_jk| >= xi]`` and its standard error.

    Draws from ``mu_G(sigma)``, or from the row-repeated ensemble when an
    occupation list ``S`` is given.
    """
    hits = 0
    done = 0
    i = 0
    while done < draws:
        b = min(_CHUNK, draws - done)
        sub = rng.spawn(i)
        if S is None:
            X = sample_gaussian_matrix(n, sigma, sub, size=b)
        else:
            X = sample_row_repeated_gaussian(S, sigma, sub, size=b)
        hits += int(np.count_nonzero(np.abs(X).max(axis=(1, 2)) >= xi))
        done += b
        i += 1
    p = hits / draws
    return p, math.sqrt(max(p * (1 - p), 0.0) / draws)


# ---------------------------------------------------------------------------
# permanent moments


@dataclass
class MomentEstimate:
    order: int
    n: int
    m: int
    sigma: float
    trials: int
    mean: float
    stderr: float
    target: float
    median_of_means: float
    groups: int

    @property
    def z(self) -> float:
        """Deviation of the plain mean from the target in standard errors."""
        return (self.mean - self.target) / self.stderr if self.stderr > 0 else math.inf

    def to_json(self) -> dict:
        return {**asdict(self), "z": self.z}


def permanent_moment_target(n: int, m: int, order: int, sigma: float | None = None) -> float:
    """Closed form of ``E|Perm(X)|^order`` for ``X ~ mu_G(sigma)``.

    With ``v = 2 sigma^2``: ``n! v^n`` for order 2 and ``(n!)^2 (n+1) v^{2n}``
    for order 4.  At ``sigma = 1/sqrt(m)`` these are ``2^n n! m^-n`` and
    ``2^{2n} (n!)^2 (n+1) m^{-2n}``.
    """
    v = 2.0 * (default_sigma(m) if sigma is None else sigma) ** 2
    if order == 2:
        return math.factorial(n) * v**n
    if order == 4:
        return math.factorial(n) ** 2 * (n + 1) * v ** (2 * n)
    raise ParameterError(f"order must be 2 or 4, got {order}")


def permanent_moment_mc(n: int, m: int, order: int, trials: int, rng: RngStream,
                        sigma: float | None = None, groups: int = 20) -> MomentEstimate:
    """Monte Carlo estimate of ``E|Perm(X)|^order`` with ``X ~ mu_G(sigma)``.

    Besides the plain mean (and its standard error) a median-of-means estimate
    over ``groups`` blocks is reported, which is more robust for the heavy
    tailed fourth moment.
    """
    if order not in (2, 4):
        raise ParameterError(f"order must be 2 or 4, got {order}")
    if n < 1 or n > 8:
        raise ParameterError(f"n must lie in 1..8, got {n}")
    if trials < 2:
        raise ParameterError("need at least two trials")
    sigma = default_sigma(m) if sigma is None else sigma
    values = np.empty(trials)
    for i, start in enumerate(range(0, trials, _CHUNK)):
        b = min(_CHUNK, trials - start)
        X = sample_gaussian_matrix(n, sigma, rng.spawn(i), size=b)
        values[start:start + b] = np.abs(permanents(X)) ** order
    groups = max(1, min(groups, trials // 2))
    mom = float(np.median([blk.mean() for blk in np.array_split(values, groups)]))
    return MomentEstimate(
        order=order,
        n=n,
        m=m,
        sigma=sigma,
        trials=trials,
        mean=float(values.mean()),
        stderr=float(values.std(ddof=1) / math.sqrt(trials)),
        target=permanent_moment_target(n, m, order, sigma),
        median_of_means=mom,
        groups=groups,
    )


# ---------------------------------------------------------------------------
# Haar versus Gaussian


F_SPECS = ("one", "max-entry", "perm-prob")


@dataclass
class MultiplicativeProbeReport:
    """Both sides of ``E_Haar f(U_S) <= (1 + O(delta)) E_Gauss f(X)``."""

    m: int
    n: int
    S: list
    f: str
    threshold: float | None
    sigma: float
    trials: int
    haar_mean: float
    haar_stderr: float
    gauss_mean: float
    gauss_stderr: float
    ratio: float
    haar_entry_second_moment: float
    gauss_entry_second_moment: float
    entry_variance_ratio: float
    gaussian_ensemble: str

    def to_json(self) -> dict:
        d = asdict(self)
        if math.isinf(d["ratio"]) or math.isnan(d["ratio"]):
            d["ratio"] = str(d["ratio"])
        return d


def _indicator(f: str, threshold, weight: float):
    if f == "one":
        return lambda X: np.ones(X.shape[0], dtype=bool)
    if f == "max-entry":
        return lambda X: np.abs(X).max(axis=(1, 2)) >= threshold
    if f == "perm-prob":
        return lambda X: np.abs(permanents(X)) ** 2 / weight >= threshold
    raise ParameterError(f"unknown f-spec {f!r}; expected one of {F_SPECS}")


def multiplicative_bound_probe(m: int, n: int, S, f: str, trials: int, rng: RngStream,
                               threshold: float | None = None,
                               sigma: float | None = None) -> MultiplicativeProbeReport:
    """Estimate ``E f(U_S)`` for Haar ``U`` and ``E f(X)`` for the matching Gaussian ensemble.

    ``f`` is ``"one"``, ``"max-entry"`` (``max |x_jk| >= threshold``) or
    ``"perm-prob"`` (``|Perm X|^2 / prod s_j! >= threshold``).  Colliding ``S``
    use the row-repeated Gaussian ensemble.
    """
    seq = OutcomeSequence(S, n)
    if seq.m != m:
        raise DimensionError(f"S has {seq.m} modes, expected {m}")
    if f not in F_SPECS:
        raise ParameterError(f"unknown f-spec {f!r}; expected one of {F_SPECS}")
    if f != "one" and threshold is None:
        raise ParameterError(f"f-spec {f!r} needs a threshold")
    sigma = default_sigma(m) if sigma is None else sigma
    ind = _indicator(f, threshold, seq.factorial_weight())
    rows = list(seq.modes)
    haar_hits = gauss_hits = 0
    haar_sq = gauss_sq = 0.0
    for i, start in enumerate(range(0, trials, _CHUNK // 10)):
        b = min(_CHUNK // 10, trials - start)
        sub = rng.spawn(i)
        cols = haar_isometry_columns(m, n, sub.spawn(0), size=b)
        US = cols[:, rows, :]
        if seq.is_collision_free:
            X = sample_gaussian_matrix(n, sigma, sub.spawn(1), size=b)
        else:
            X = sample_row_repeated_gaussian(seq, sigma, sub.spawn(1), size=b)
        haar_hits += int(np.count_nonzero(ind(US)))
        gauss_hits += int(np.count_nonzero(ind(X)))
        haar_sq += float((np.abs(US) ** 2).mean() * b)
        gauss_sq += float((np.abs(X) ** 2).mean() * b)
    ph, pg = haar_hits / trials, gauss_hits / trials
    hsq, gsq = haar_sq / trials, gauss_sq / trials
    return MultiplicativeProbeReport(
        m=m,
        n=n,
        S=list(seq),
        f=f,
        threshold=threshold,
        sigma=sigma,
        trials=trials,
        haar_mean=ph,
        haar_stderr=math.sqrt(ph * (1 - ph) / trials),
        gauss_mean=pg,
        gauss_stderr=math.sqrt(pg * (1 - pg) / trials),
        ratio=ph / pg if pg > 0 else (math.nan if ph == 0 else math.inf),
        haar_entry_second_moment=hsq,
        gauss_entry_second_moment=gsq,
        entry_variance_ratio=gsq / hsq,
        gaussian_ensemble="G" if seq.is_collision_free else "G_S",
    )


# ---------------------------------------------------------------------------
# empirical flatness


@dataclass
class FlatnessReport:
    """Per-trial largest outcome probability of ``D_U`` for Haar ``U``.

    With ``restricted`` set the maximum runs over collision-free outcomes only,
    using the un-renormalised ``D_U`` probabilities.
    """

    m: int
    n: int
    restricted: bool
    threshold: float
    trials: int
    max_probs: list = field(default_factory=list)
    argmax: list = field(default_factory=list)
    complete: bool = True

    @property
    def completed_trials(self) -> int:
        return len(self.max_probs)

    @property
    def exceedance(self) -> float:
        if not self.max_probs:
            return math.nan
        return sum(p >= self.threshold for p in self.max_probs) / len(self.max_probs)

    @property
    def below_fraction(self) -> float:
        return 1.0 - self.exceedance

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "restricted": self.restricted,
            "threshold": self.threshold,
            "trials": self.trials,
            "completed_trials": self.completed_trials,
            "max_probs": self.max_probs,
            "argmax": self.argmax,
            "exceedance": self.exceedance,
            "complete": self.complete,
        }


def flatness_threshold(n: int, kind: str = "exp") -> float:
    """``e^{-2n}`` (``"exp"``) or ``n^{-n/2}`` (``"power"``)."""
    if kind == "exp":
        return math.exp(-2 * n)
    if kind == "power":
        return n ** (-n / 2)
    raise ParameterError(f"unknown threshold kind {kind!r}")


def _cap_hint(m: int, n: int, restricted: bool, cap: int) -> str:
    mm = m
    while mm > n and sample_space_size(mm, n, restricted) > cap:
        mm -= 1
    nn = n
    while nn > 1 and sample_space_size(m, nn, restricted) > cap:
        nn -= 1
    return f"try m <= {mm} at n = {n}, or n <= {nn} at m = {m}"


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BOSONBENCH_THREADS", "1")))
    except ValueError:
        return 1


def empirical_flatness(m: int, n: int, trials: int, restricted: bool, rng: RngStream,
                       threshold: float | None = None, cap: int = DEFAULT_CAP,
                       budget_seconds: float | None = None, threads: int | None = None) -> FlatnessReport:
    """Draw ``trials`` Haar unitaries and record ``max_S Pr_{D_U}[S]`` for each.

    Trial ``t`` always uses ``rng.spawn(t)``, so results do not depend on the
    thread count.  If ``budget_seconds`` runs out, the report holds the trials
    finished so far and ``complete`` is ``False``.
    """
    try:
        space = enumerate_sample_space(m, n, restricted=restricted, cap=cap)
    except EnumerationCapError as exc:
        raise EnumerationCapError(exc.size, cap, _cap_hint(m, n, restricted, cap)) from None
    if len(space) == 0:
        raise DimensionError(f"no collision-free outcomes for n = {n} > m = {m}")
    report = FlatnessReport(m, n, restricted, flatness_threshold(n) if threshold is None else threshold, trials)
    deadline = None if budget_seconds is None else time.monotonic() + budget_seconds

    def one_trial(t):
        U = haar_unitary(m, rng.spawn(t))
        p = outcome_probabilities(U, space)
        j = int(np.argmax(p))
        return float(p[j]), list(space[j])

    threads = threads or _threads()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for start in range(0, trials, threads):
            if deadline is not None and time.monotonic() > deadline:
                report.complete = False
                break
            for pmax, arg in pool.map(one_trial, range(start, min(trials, start + threads))):
                report.max_probs.append(pmax)
                report.argmax.append(arg)
    return report


# ---------------------------------------------------------------------------
# closed-form bound chains


def stirling_upper(n: int) -> float:
    """``e^{1-n} n^{n + 1/2}``, an upper bound on ``n!``."""
    return math.exp(1 - n) * n ** (n + 0.5)


def log_sample_space_bound(n: int, c: float, nu: float) -> float:
    """``ln[(2 (c+1) e)^n n^{(nu-1) n}]``, bounding ``ln |Phi_{m,n}|`` when ``m <= c n^nu``."""
    return n * math.log(2 * (c + 1) * math.e) + (nu - 1) * n * math.log(n)


@dataclass
class BoundEvaluation:
    variant: str
    n: int
    m: int
    epsilon: float
    value: float
    vacuous: bool
    excludes_haar_factor: bool = True
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)


def theorem_bound_evaluator(n: int, m: int, epsilon: float, variant: str) -> BoundEvaluation:
    """Evaluate the union-bound chains on ``Pr_U[exists S: Pr[S] >= epsilon]``.

    ``"tail-chain"``: ``|Phi_{m,n}| * 2 n^2 e^{1 - xi^2/(2 sigma^2)}`` with
    ``xi = (sqrt(eps)/n!)^{1/n}`` and ``sigma = 1/sqrt(m)``; vacuous (value 1)
    unless ``n^2 e^{1 - xi^2/(2 sigma^2)} <= 1/2``.

    ``"moment-markov"``: ``|Phi_{m,n}| 2^{2n} (n!)^2 (n+1) m^{-2n} eps^{-2}``,
    clamped to 1 (and flagged vacuous) when it exceeds 1.

    Neither includes the unquantified ``1 + O(delta)`` Haar-to-Gaussian factor;
    ``excludes_haar_factor`` records that.
    """
    if n < 1 or m < 1 or not epsilon > 0:
        raise ParameterError("need n >= 1, m >= 1, epsilon > 0")
    size = sample_space_size(m, n)
    if variant == "tail-chain":
        sigma = default_sigma(m)
        xi = (math.sqrt(epsilon) / math.factorial(n)) ** (1.0 / n)
        x2 = xi**2 / (2 * sigma**2)
        q = n * n * math.exp(1 - x2)
        detail = {"xi": xi, "sigma": sigma, "geometric_ratio": q, "sample_space_size": size}
        if q > 0.5:
            return BoundEvaluation(variant, n, m, epsilon, 1.0, True, detail=detail)
        value = size * 2 * q
        return BoundEvaluation(variant, n, m, epsilon, value, value >= 1, detail=detail)
    if variant == "moment-markov":
        log_raw = (math.log(size) + 2 * n * math.log(2) + 2 * math.lgamma(n + 1)
                   + math.log(n + 1) - 2 * n * math.log(m) - 2 * math.log(epsilon))
        raw = math.exp(min(log_raw, 700.0))
        detail = {"raw": raw, "sample_space_size": size}
        return BoundEvaluation(variant, n, m, epsilon, min(raw, 1.0), raw >= 1, detail=detail)
    raise ParameterError(f"unknown variant {variant!r}; expected 'tail-chain' or 'moment-markov'")
