"""Sample spaces of occupation sequences and exact Boson-Sampling distributions.

An outcome of ``n`` photons in ``m`` modes is an occupation list
``S = (s_1, ..., s_m)`` with ``sum(S) == n``.  The probability of ``S`` for an
interferometer ``U`` fed with one photon in each of the first ``n`` modes is::

    Pr[S] = |Perm(U_S)|^2 / prod_j s_j!

where ``U_S`` keeps the first ``n`` columns of ``U`` and ``s_j`` copies of row
``j``.  Sample spaces are enumerated in lexicographic order of the occupation
vectors, largest first, so ``(n, 0, ..., 0)`` is always element 0.  Internally
each element is stored as its sorted list of occupied mode indices (one index
per photon), which is exactly the row selection that builds ``U_S``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from itertools import chain, combinations, combinations_with_replacement

import numpy as np

from .errors import (
    DimensionError,
    EnumerationCapError,
    NormalizationError,
    ParameterError,
    ZeroMassError,
)
from .linalg import as_complex_matrix, permanents_of_row_selections
from .rng import RngStream

DEFAULT_CAP = 10**7
NORMALIZATION_TOL = 1e-9
ZERO_MASS_TOL = 1e-12


class OutcomeSequence(tuple):
    """Occupation numbers ``(s_1, ..., s_m)``; an immutable tuple of ints."""

    def __new__(cls, occupations, n: int | None = None):
        occ = tuple(int(s) for s in occupations)
        if not occ:
            raise DimensionError("an outcome sequence needs at least one mode")
        if any(s < 0 for s in occ):
            raise DimensionError(f"occupations must be non-negative, got {occ}")
        if n is not None and sum(occ) != n:
            raise DimensionError(f"occupations {occ} sum to {sum(occ)}, expected {n}")
        return super().__new__(cls, occ)

    @classmethod
    def from_modes(cls, modes, m: int) -> "OutcomeSequence":
        """Build from a list of occupied mode indices (0-based, one per photon)."""
        return cls(np.bincount(np.asarray(modes, dtype=np.int64), minlength=m))

    @classmethod
    def first_modes(cls, n: int, m: int) -> "OutcomeSequence":
        """The input pattern ``1_n = (1, ..., 1, 0, ..., 0)``."""
        if n > m:
            raise DimensionError(f"cannot place {n} single photons in {m} modes")
        return cls([1] * n + [0] * (m - n))

    @property
    def m(self) -> int:
        return len(self)

    @property
    def n(self) -> int:
        return sum(self)

    @property
    def is_collision_free(self) -> bool:
        return all(s <= 1 for s in self)

    @property
    def nonzero(self) -> tuple[int, ...]:
        """The sequence with all zeros removed."""
        return tuple(s for s in self if s > 0)

    @property
    def modes(self) -> tuple[int, ...]:
        """Mode index ``j`` repeated ``s_j`` times, increasing."""
        return tuple(j for j, s in enumerate(self) for _ in range(s))

    def factorial_weight(self) -> int:
        return math.prod(math.factorial(s) for s in self)


def sample_space_size(m: int, n: int, restricted: bool = False) -> int:
    if restricted:
        return math.comb(m, n)
    return math.comb(m + n - 1, n)


@dataclass(frozen=True, eq=False)
class SampleSpace:
    """Enumerated outcome sequences for ``n`` photons in ``m`` modes.

    ``modes[i]`` holds the sorted photon-mode indices of element ``i``.  With
    ``restricted`` set only collision-free sequences are present.
    """

    m: int
    n: int
    restricted: bool
    modes: np.ndarray = field(repr=False)
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return int(self.modes.shape[0])

    def __getitem__(self, i: int) -> OutcomeSequence:
        return OutcomeSequence.from_modes(self.modes[i], self.m)

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def elements(self) -> list[OutcomeSequence]:
        return list(self)

    def occupations(self) -> np.ndarray:
        """Dense ``(N, m)`` array of occupation vectors."""
        occ = np.zeros((len(self), self.m), dtype=np.int64)
        rows = np.repeat(np.arange(len(self)), self.n)
        np.add.at(occ, (rows, self.modes.ravel()), 1)
        return occ

    def factorial_weights(self) -> np.ndarray:
        """``prod_j s_j!`` for every element, as floats."""
        if len(self) == 0 or self.n == 1 or self.restricted:
            return np.ones(len(self))
        run = np.ones(len(self), dtype=np.int64)
        weight = np.ones(len(self), dtype=np.float64)
        for i in range(1, self.n):
            same = self.modes[:, i] == self.modes[:, i - 1]
            run = np.where(same, run + 1, 1)
            weight *= run
        return weight

    def index(self, S) -> int:
        """Position of ``S`` in the enumeration."""
        if not self._index:
            self._index.update({tuple(row): i for i, row in enumerate(self.modes.tolist())})
        seq = OutcomeSequence(S, self.n)
        if seq.m != self.m:
            raise DimensionError(f"sequence has {seq.m} modes, space has {self.m}")
        try:
            return self._index[seq.modes]
        except KeyError:
            raise DimensionError(f"{tuple(seq)} is not in this (restricted) sample space") from None

    def same_as(self, other: "SampleSpace") -> bool:
        return (self.m, self.n, self.restricted) == (other.m, other.n, other.restricted)


def enumerate_sample_space(m: int, n: int, restricted: bool = False, cap: int = DEFAULT_CAP) -> SampleSpace:
    """All occupation sequences of ``n`` photons in ``m`` modes.

    Raises:
        EnumerationCapError: if the space has more than ``cap`` elements.
    """
    if m < 1 or n < 1:
        raise DimensionError(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    size = sample_space_size(m, n, restricted)
    if size > cap:
        raise EnumerationCapError(size, cap, "reduce m or n, or raise the cap")
    gen = combinations(range(m), n) if restricted else combinations_with_replacement(range(m), n)
    dtype = np.int16 if m < 2**15 else np.int64
    flat = np.fromiter(chain.from_iterable(gen), dtype=dtype, count=size * n)
    modes = flat.reshape(size, n)
    modes.setflags(write=False)
    return SampleSpace(m, n, bool(restricted), modes)


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Probability vector aligned with ``space``'s enumeration."""

    space: SampleSpace
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=np.float64)
        if p.shape != (len(self.space),):
            raise DimensionError(f"expected {len(self.space)} probabilities, got shape {p.shape}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ParameterError("probabilities must be finite and non-negative")
        total = p.sum()
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NormalizationError(f"probabilities sum to {total!r}, not 1 within {NORMALIZATION_TOL:g}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return len(self.probs)

    def prob(self, S) -> float:
        return float(self.probs[self.space.index(S)])

    @property
    def epsilon(self) -> float:
        """Largest single-outcome probability (the flatness parameter)."""
        return float(self.probs.max())

    @property
    def min_entropy_bits(self) -> float:
        return float(-math.log2(self.epsilon))

    def support(self) -> np.ndarray:
        return self.probs > 0

    def to_json(self) -> dict:
        return {
            "m": self.space.m,
            "n": self.space.n,
            "restricted": self.space.restricted,
            "probs": self.probs.tolist(),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["index", "occupations", "probability"])
        for i, occ in enumerate(self.space.occupations().tolist()):
            writer.writerow([i, " ".join(map(str, occ)), repr(float(self.probs[i]))])
        return buf.getvalue()


def _check_space(U: np.ndarray, space: SampleSpace) -> None:
    if U.shape != (space.m, space.m):
        raise DimensionError(f"U has shape {U.shape}, expected {(space.m, space.m)}")
    if space.n > space.m:
        raise DimensionError(f"n = {space.n} photons need at least n input modes, m = {space.m}")


def build_submatrix(U, S, n: int | None = None) -> np.ndarray:
    """``U_S``: the first ``n`` columns of ``U`` with row ``j`` taken ``s_j`` times."""
    U = as_complex_matrix(U, square=True)
    seq = OutcomeSequence(S, n)
    if seq.m != U.shape[0]:
        raise DimensionError(f"sequence has {seq.m} modes but U is {U.shape[0]}x{U.shape[0]}")
    if seq.n > U.shape[1]:
        raise DimensionError(f"{seq.n} photons exceed the {U.shape[1]} input modes")
    return U[list(seq.modes), : seq.n]


def outcome_probability(U, S) -> float:
    """Probability of output pattern ``S`` given one photon in each of the first ``n`` modes."""
    sub = build_submatrix(U, S)
    seq = OutcomeSequence(S)
    perm = permanents_of_row_selections(sub, np.arange(seq.n)[None, :])[0]
    return float(abs(perm) ** 2 / seq.factorial_weight())


def outcome_probabilities(U, space: SampleSpace) -> np.ndarray:
    """Unnormalised ``Pr_{D_U}[S]`` for every ``S`` in ``space``."""
    U = as_complex_matrix(U, square=True)
    _check_space(U, space)
    perms = permanents_of_row_selections(U[:, : space.n], space.modes)
    return np.abs(perms) ** 2 / space.factorial_weights()


def full_distribution(U, n: int, cap: int = DEFAULT_CAP, space: SampleSpace | None = None) -> DiscreteDistribution:
    """Exact output distribution over all of ``Phi_{m,n}``.

    Raises:
        NormalizationError: if the probabilities do not sum to 1 within 1e-9,
            which points at a non-unitary ``U`` or a permanent bug.
    """
    U = as_complex_matrix(U, square=True)
    if space is None:
        space = enumerate_sample_space(U.shape[0], n, restricted=False, cap=cap)
    elif space.restricted or space.n != n:
        raise DimensionError("full_distribution needs the unrestricted space for the same n")
    return DiscreteDistribution(space, outcome_probabilities(U, space))


def postselected_distribution(U, n: int, cap: int = DEFAULT_CAP, space: SampleSpace | None = None) -> DiscreteDistribution:
    """Output distribution conditioned on no two photons sharing a mode.

    Raises:
        ZeroMassError: if the collision-free outcomes carry total probability
            at most 1e-12 (the post-selection would only amplify round-off).
    """
    U = as_complex_matrix(U, square=True)
    if space is None:
        space = enumerate_sample_space(U.shape[0], n, restricted=True, cap=cap)
    elif not space.restricted or space.n != n:
        raise DimensionError("postselected_distribution needs the collision-free space for the same n")
    raw = outcome_probabilities(U, space)
    mass = raw.sum()
    if mass <= ZERO_MASS_TOL:
        raise ZeroMassError(f"collision-free outcomes carry total probability {mass:.3e}")
    return DiscreteDistribution(space, raw / mass)


def collision_free_fraction(U, n: int, cap: int = DEFAULT_CAP) -> float:
    """Total probability of the collision-free outcomes."""
    U = as_complex_matrix(U, square=True)
    if n > U.shape[0]:
        return 0.0
    space = enumerate_sample_space(U.shape[0], n, restricted=True, cap=cap)
    return float(min(1.0, outcome_probabilities(U, space).sum()))


def uniform_distribution(space: SampleSpace) -> DiscreteDistribution:
    if len(space) == 0:
        raise DimensionError("uniform distribution over an empty sample space")
    return DiscreteDistribution(space, np.full(len(space), 1.0 / len(space)))


def draw_indices(dist: DiscreteDistribution, l: int, rng: RngStream) -> np.ndarray:
    """``l`` i.i.d. element indices by inverse-CDF lookup."""
    if l < 0:
        raise ParameterError(f"sample count must be non-negative, got {l}")
    cdf = np.cumsum(dist.probs)
    u = rng.random(l) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1)


def draw_samples(dist: DiscreteDistribution, l: int, rng: RngStream) -> list[OutcomeSequence]:
    return [dist.space[i] for i in draw_indices(dist, l, rng)]


def beamsplitter() -> np.ndarray:
    """The balanced two-mode beamsplitter ``[[1, 1], [1, -1]] / sqrt(2)``."""
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2.0)
