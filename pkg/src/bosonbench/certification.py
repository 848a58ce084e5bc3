"""What a certifier can compute from samples.

Two settings are covered.  In the black-box setting only relabeling-invariant
information is legitimate, which is exactly the fingerprint tensor; the
birthday-paradox bounds say that for flat distributions the fingerprint is
almost always trivial.  In the state-discrimination setting the certifier knows
both candidate distributions and can run a likelihood-ratio test, whose sample
cost is controlled by Renyi relative entropies.

Entropies use the natural log; min-entropy is reported in bits.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .distribution import DiscreteDistribution, draw_indices
from .errors import DimensionError, ImpossibleSampleError, LabelError, ParameterError, RangeError
from .rng import RngStream

ACCEPT = "accept"
REJECT = "reject"


# ---------------------------------------------------------------------------
# fingerprints


@dataclass(frozen=True)
class FingerprintTensor:
    """Sparse fingerprint tensor with dense semantics.

    ``counts[(k_1, ..., k_k)]`` is the number of labels that occur exactly
    ``k_j`` times in sequence ``j`` for every ``j``.  Absent keys are zero.
    """

    k: int
    l: int
    N: int
    counts: dict = field(hash=False)

    def __post_init__(self):
        counts = {tuple(int(i) for i in key): int(c) for key, c in self.counts.items() if c}
        if any(len(key) != self.k for key in counts):
            raise DimensionError("fingerprint index tuples must have length k")
        if any(c < 0 for c in counts.values()):
            raise ParameterError("fingerprint counts must be non-negative")
        if any(not 0 <= i <= self.l for key in counts for i in key):
            raise DimensionError("fingerprint indices must lie in 0..l")
        if sum(counts.values()) != self.N:
            raise ParameterError(f"fingerprint counts sum to {sum(counts.values())}, expected N = {self.N}")
        for j in range(self.k):
            weighted = sum(key[j] * c for key, c in counts.items())
            if weighted != self.l:
                raise ParameterError(f"sequence {j} accounts for {weighted} samples, expected l = {self.l}")
        object.__setattr__(self, "counts", counts)

    def __getitem__(self, key) -> int:
        if isinstance(key, int):
            key = (key,)
        return self.counts.get(tuple(key), 0)

    def __eq__(self, other):
        if not isinstance(other, FingerprintTensor):
            return NotImplemented
        return (self.k, self.l, self.N, self.counts) == (other.k, other.l, other.N, other.counts)

    def __hash__(self):
        return hash((self.k, self.l, self.N, frozenset(self.counts.items())))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.l + 1,) * self.k, dtype=np.int64)
        for key, c in self.counts.items():
            out[key] = c
        return out

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "l": self.l,
            "N": self.N,
            "nonzeros": [[list(key), c] for key, c in sorted(self.counts.items())],
        }

    @classmethod
    def from_json(cls, obj) -> "FingerprintTensor":
        return cls(obj["k"], obj["l"], obj["N"], {tuple(key): c for key, c in obj["nonzeros"]})


def fingerprint(sequences: Sequence[Sequence[int]], N: int) -> FingerprintTensor:
    """Fingerprint tensor of ``k`` equally long sample sequences over labels ``0..N-1``.

    A single flat sequence of ints is accepted as the ``k = 1`` case.
    """
    sequences = list(sequences)
    if sequences and isinstance(sequences[0], (int, np.integer)):
        sequences = [sequences]
    seqs = [list(s) for s in sequences]
    if not seqs:
        raise DimensionError("need at least one sample sequence")
    l = len(seqs[0])
    if any(len(s) != l for s in seqs):
        raise DimensionError("all sample sequences must have the same length")
    per_seq = []
    for s in seqs:
        for x in s:
            if not (isinstance(x, (int, np.integer)) and 0 <= x < N):
                raise LabelError(f"sample label {x!r} outside the sample space 0..{N - 1}")
        per_seq.append(Counter(int(x) for x in s))
    k = len(seqs)
    seen = set().union(*per_seq)
    counts = Counter(tuple(c[label] for c in per_seq) for label in seen)
    unseen = N - len(seen)
    if unseen:
        counts[(0,) * k] += unseen
    return FingerprintTensor(k, l, N, dict(counts))


def trivial_fingerprint(k: int, l: int, N: int) -> FingerprintTensor:
    """The fingerprint of ``k`` sequences of ``l`` samples in which no label repeats."""
    if k * l > N:
        raise ParameterError(f"k*l = {k * l} distinct labels do not fit in N = {N}")
    counts = {(0,) * k: N - k * l}
    if l:
        for j in range(k):
            key = [0] * k
            key[j] = 1
            counts[tuple(key)] = l
    return FingerprintTensor(k, l, N, counts)


def is_trivial_fingerprint(C: FingerprintTensor) -> bool:
    if C.k * C.l > C.N:
        return False
    return C == trivial_fingerprint(C.k, C.l, C.N)


# ---------------------------------------------------------------------------
# birthday-paradox bounds


def birthday_bound_valid(l: int, epsilon: float) -> bool:
    """Whether ``l`` samples are few enough for :func:`birthday_lower_bound` to apply."""
    return l <= 1 + 1 / (2 * epsilon)


def birthday_lower_bound(l: int, epsilon: float) -> float:
    """Lower bound ``2^(-l^2 eps)`` on the probability that ``l`` draws from
    ``eps``-flat distributions are pairwise distinct.

    Raises:
        RangeError: if ``l > 1 + 1/(2 eps)``, where the bound is not claimed.
    """
    if l < 1:
        raise ParameterError(f"l must be >= 1, got {l}")
    if not 0 < epsilon <= 1:
        raise ParameterError(f"epsilon must lie in (0, 1], got {epsilon}")
    if not birthday_bound_valid(l, epsilon):
        raise RangeError(f"l = {l} exceeds 1 + 1/(2 eps) = {1 + 1 / (2 * epsilon):.6g}")
    return 2.0 ** (-(l**2) * epsilon)


def fingerprint_triviality_bound(k: int, l: int, epsilon: float, a: float) -> float:
    """Upper bound ``(k a)^2 sqrt(eps)`` on ``Pr[C != C~]`` for ``l <= a eps^(-1/4)``."""
    if k < 1 or l < 0:
        raise ParameterError("need k >= 1 and l >= 0")
    if not 0 < epsilon <= 1 or a <= 0:
        raise ParameterError("need 0 < epsilon <= 1 and a > 0")
    if l > a * epsilon ** (-0.25) * (1 + 1e-12):
        raise RangeError(f"l = {l} exceeds a * eps^(-1/4) = {a * epsilon ** -0.25:.6g}")
    if not birthday_bound_valid(k * l, epsilon):
        raise RangeError(f"k*l = {k * l} exceeds 1 + 1/(2 eps); epsilon too large for this bound")
    return (k * a) ** 2 * math.sqrt(epsilon)


def minimal_a(l: int, epsilon: float) -> float:
    """Smallest ``a`` with ``l <= a eps^(-1/4)``."""
    return l * epsilon**0.25


# ---------------------------------------------------------------------------
# divergences


def _probs(P):
    return P.probs if isinstance(P, DiscreteDistribution) else np.asarray(P, dtype=float)


def _pair(P, Q):
    if isinstance(P, DiscreteDistribution) and isinstance(Q, DiscreteDistribution):
        if not P.space.same_as(Q.space):
            raise DimensionError("distributions live on different sample spaces")
    p, q = _probs(P), _probs(Q)
    if p.shape != q.shape:
        raise DimensionError(f"probability vectors differ in length: {p.shape} vs {q.shape}")
    return p, q


def flatness(dist) -> tuple[float, float]:
    """``(epsilon, min-entropy in bits)`` with ``epsilon`` the largest probability."""
    eps = float(_probs(dist).max())
    return eps, float(-math.log2(eps))


def renyi_relative_entropy(P, Q, t: float) -> float:
    """Renyi relative entropy of order ``t`` (natural log); ``inf`` unless supp P is inside supp Q."""
    if t < 0:
        raise ParameterError(f"order t must be >= 0, got {t}")
    if t == 1:
        raise ParameterError("t = 1 is the relative entropy; call relative_entropy")
    p, q = _pair(P, Q)
    sp, sq = p > 0, q > 0
    if np.any(sp & ~sq):
        return math.inf
    both = sp & sq
    s = np.sum(p[both] ** t * q[both] ** (1 - t))
    if s <= 0:
        return math.inf if t > 1 else -math.inf
    return float(math.log(s) / (t - 1))


def relative_entropy(P, Q) -> float:
    """Kullback-Leibler divergence ``sum P ln(P/Q)``; ``inf`` if supp P is not inside supp Q."""
    p, q = _pair(P, Q)
    sp = p > 0
    if np.any(sp & (q <= 0)):
        return math.inf
    return float(np.sum(p[sp] * np.log(p[sp] / q[sp])))


def one_norm_distance(P, Q) -> float:
    p, q = _pair(P, Q)
    return float(np.abs(p - q).sum())


# ---------------------------------------------------------------------------
# finite-sample discrimination


_BOUND_CONST = 4 * math.sqrt(2)


def eta(P, Q) -> float:
    """``1 + exp(S_{3/2}/2) + exp(-S_{1/2}/2)``."""
    return 1 + math.exp(renyi_relative_entropy(P, Q, 1.5) / 2) + math.exp(-renyi_relative_entropy(P, Q, 0.5) / 2)


def discrimination_error_bound(P, Q, l: int, alpha: float) -> float:
    """Upper bound on ``(1/l) ln beta_{l,alpha}``, the log type-II error rate.

    ``-S(P||Q) + 4 sqrt(2) ln(1/alpha) (S_{3/2}(P||Q)/2 + ln 3) / sqrt(l)``.
    Returns ``inf`` (no guarantee) when either entropy is infinite.
    """
    if l < 1:
        raise ParameterError(f"l must be >= 1, got {l}")
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    S = relative_entropy(P, Q)
    S32 = renyi_relative_entropy(P, Q, 1.5)
    if math.isinf(S) or math.isinf(S32):
        return math.inf
    return -S + _BOUND_CONST * math.log(1 / alpha) * (S32 / 2 + math.log(3)) / math.sqrt(l)


def min_samples_negative(P, Q, alpha: float) -> float:
    """Smallest integer ``l`` for which :func:`discrimination_error_bound` is ``<= 0``.

    Returns ``inf`` when ``S(P||Q) == 0`` or an entropy is infinite.
    """
    if not 0 < alpha < 1:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha}")
    S = relative_entropy(P, Q)
    S32 = renyi_relative_entropy(P, Q, 1.5)
    if math.isinf(S) or math.isinf(S32) or S <= 0:
        return math.inf
    root = _BOUND_CONST * math.log(1 / alpha) * (S32 / 2 + math.log(3)) / S
    l = max(1, math.ceil(root**2))
    # guard the ceiling against round-off on exact squares
    while l > 1 and discrimination_error_bound(P, Q, l - 1, alpha) <= 0:
        l -= 1
    while discrimination_error_bound(P, Q, l, alpha) > 0:
        l += 1
    return l


def log_likelihood_ratio(P, Q, samples) -> float:
    """``sum ln(P[s]/Q[s])`` over sample indices; may be +-inf.

    Raises:
        ImpossibleSampleError: if a sample has probability zero under both.
    """
    p, q = _pair(P, Q)
    idx = np.asarray(samples, dtype=np.int64)
    ps, qs = p[idx], q[idx]
    if np.any((ps <= 0) & (qs <= 0)):
        raise ImpossibleSampleError("a sample has probability zero under both hypotheses")
    p_dead = np.any(ps <= 0)
    q_dead = np.any(qs <= 0)
    if p_dead and q_dead:
        return 0.0  # both hypotheses refuted; fall through to the conservative tie
    if p_dead:
        return -math.inf
    if q_dead:
        return math.inf
    return float(np.sum(np.log(ps) - np.log(qs)))


def likelihood_ratio_test(P, Q, samples) -> str:
    """Decide ``"P"`` iff the log-likelihood ratio is strictly positive, else ``"Q"``."""
    return "P" if log_likelihood_ratio(P, Q, samples) > 0 else "Q"


# ---------------------------------------------------------------------------
# symmetric certification


def collision_policy(C: FingerprintTensor) -> str:
    """Reject uniformity iff some label was seen more than once."""
    return ACCEPT if is_trivial_fingerprint(C) else REJECT


def symmetric_certifier(samples, N: int, policy: Callable[[FingerprintTensor], str] = collision_policy) -> str:
    """Decide from a single sample sequence through its fingerprint only.

    The samples are reduced to a :class:`FingerprintTensor` before ``policy``
    sees anything, so the decision cannot depend on sample order or labels.
    """
    return policy(fingerprint([list(samples)], N))


@dataclass
class HypothesisTestReport:
    """Monte Carlo error rates of the likelihood-ratio test at one sample size."""

    l: int
    alpha: float
    trials: int
    type_one: float
    type_two: float
    bound: float
    eta: float
    relative_entropy: float
    renyi_three_halves: float

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        for key in ("bound", "relative_entropy", "renyi_three_halves", "eta"):
            if math.isinf(d[key]):
                d[key] = "inf" if d[key] > 0 else "-inf"
        return d


def likelihood_ratio_report(P: DiscreteDistribution, Q: DiscreteDistribution, l: int, alpha: float,
                            trials: int, rng: RngStream) -> HypothesisTestReport:
    """Estimate both error rates of :func:`likelihood_ratio_test` with ``l`` samples.

    Type I: deciding ``Q`` on samples from ``P``.  Type II: deciding ``P`` on
    samples from ``Q``.
    """
    wrong_p = wrong_q = 0
    for t in range(trials):
        trial = rng.spawn(t)
        if likelihood_ratio_test(P, Q, draw_indices(P, l, trial.spawn(0))) == "Q":
            wrong_p += 1
        if likelihood_ratio_test(P, Q, draw_indices(Q, l, trial.spawn(1))) == "P":
            wrong_q += 1
    return HypothesisTestReport(
        l=l,
        alpha=alpha,
        trials=trials,
        type_one=wrong_p / trials,
        type_two=wrong_q / trials,
        bound=discrimination_error_bound(P, Q, l, alpha),
        eta=eta(P, Q),
        relative_entropy=relative_entropy(P, Q),
        renyi_three_halves=renyi_relative_entropy(P, Q, 1.5),
    )
