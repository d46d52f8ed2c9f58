"""Exact sampling of the Erdős–Rényi random numerical semigroup.

Each positive integer enters the random set A independently with
probability p. A stream emits A in increasing order from geometric
inter-element gaps; :func:`sample_semigroup` doubles a truncation point M
until gcd(A ∩ [M]) = 1 and F(<A ∩ [M]>) < M. Every element of A beyond M
then exceeds the Frobenius number and is already in the semigroup, so the
invariants returned are those of the infinite model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import core
from .core import InvariantsRecord
from .errors import InvalidParameter, SamplerDidNotConverge

TRUNCATION_CAP = 2**30
_U_LOW = 2.0**-53
_U_HIGH = 1.0 - 2.0**-53


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise InvalidParameter(f"p must lie in (0, 1), got {p}")


def geometric_gap(u, p):
    """Inverse-CDF gap: ``floor(ln u / ln(1 - p)) + 1``, so P[gap = k] = (1-p)^(k-1) p.

    Accepts a scalar or an array of u values.
    """
    _check_p(p)
    arr = np.asarray(u, dtype=np.float64)
    if np.any((arr <= 0.0) | (arr >= 1.0)):
        raise InvalidParameter("u must lie in the open interval (0, 1)")
    gaps = np.floor(np.log(arr) / np.log1p(-p)).astype(np.int64) + 1
    return int(gaps) if gaps.ndim == 0 else gaps


def stream_seed(master_seed: int, trial_id: int, stream_index: int = 0) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_id), int(stream_index)))


class RandomStream:
    """The random set A for one (p, master_seed, trial_id, stream_index).

    Elements are generated lazily and cached, so asking for A ∩ [M] and
    later for A ∩ [M'] with M' > M extends the earlier answer.
    """

    def __init__(self, p: float, master_seed: int, trial_id: int = 0, stream_index: int = 0):
        _check_p(p)
        self.p = float(p)
        self.master_seed = int(master_seed)
        self.trial_id = int(trial_id)
        self.stream_index = int(stream_index)
        self._rng = np.random.Generator(np.random.PCG64(stream_seed(master_seed, trial_id, stream_index)))
        self._log_q = math.log1p(-self.p)
        self._chunks: list[np.ndarray] = []
        self._elements = np.empty(0, dtype=np.int64)
        self.cursor = 0

    def _extend(self, M):
        while self.cursor < M:
            want = int((M - self.cursor) * self.p * 1.05) + 16
            u = 1.0 - self._rng.random(want)
            np.clip(u, _U_LOW, _U_HIGH, out=u)
            gaps = np.floor(np.log(u) / self._log_q).astype(np.int64) + 1
            new = self.cursor + np.cumsum(gaps)
            self._chunks.append(new)
            self.cursor = int(new[-1])
        if len(self._chunks) > 1:
            self._elements = np.concatenate([self._elements, *self._chunks])
            self._chunks.clear()
        elif self._chunks:
            self._elements = np.concatenate([self._elements, self._chunks.pop()])

    def sample_prefix(self, M: int) -> np.ndarray:
        """A ∩ [1, M] as a sorted int64 array (read-only view)."""
        self._extend(M)
        view = self._elements[: np.searchsorted(self._elements, M, side="right")]
        view.flags.writeable = False
        return view

    def first_pair(self, start: int = 1) -> int:
        """Least v with 2v >= start and both 2v, 2v + 1 in A."""
        M = max(64, 2 * start)
        while True:
            els = self.sample_prefix(M)
            els = els[els >= start]
            hit = np.flatnonzero((els[:-1] % 2 == 0) & (els[1:] == els[:-1] + 1))
            if hit.size:
                return int(els[hit[0]]) // 2
            M *= 2


def sample_prefix(stream: RandomStream, M: int) -> set[int]:
    return set(stream.sample_prefix(M).tolist())


@dataclass(frozen=True)
class SampleOutcome:
    p: float
    trial_id: int
    truncation_M: int
    elements: tuple[int, ...] = field(repr=False)
    invariants: InvariantsRecord
    count_in_N: int | None = None
    shift: int = 1

    CSV_HEADER = "trial_id,p,M,F,g,e,q,count_elements"

    def csv_row(self) -> str:
        inv = self.invariants
        return (f"{self.trial_id},{format_real(self.p)},{self.truncation_M},{inv.frobenius},{inv.genus},"
                f"{inv.embedding_dim},{inv.multiplicity},{len(self.elements)}")


def format_real(x: float) -> str:
    """Reals in CSV output: 17 significant digits, '.' decimal separator."""
    return format(float(x), ".17g")


def initial_truncation(p: float) -> int:
    return math.ceil(8.0 / p * max(1.0, math.log(1.0 / p) ** 2))


def _converge(stream, p, trial, lower, M, cap, crosscheck):
    while True:
        if M > cap:
            raise SamplerDidNotConverge(p, trial, M)
        els = stream.sample_prefix(M)
        els = els[els >= lower]
        if els.size and math.gcd(*els.tolist()) == 1:
            gens = core.GeneratorSet(tuple(els.tolist()), 1)
            ap = core.apery_set(gens)
            F = core.frobenius(ap)
            if F < M:
                inv = core.invariants_from_apery(ap, candidates=gens.elements)
                if crosscheck:
                    ref = core.invariants_bruteforce(gens)
                    if ref != inv:
                        raise AssertionError(f"Apéry/prefix mismatch for trial {trial}: {inv} vs {ref}")
                return SampleOutcome(p, trial, M, gens.elements, inv, shift=lower)
        M *= 2


def sample_semigroup(p: float, trial: int, master_seed: int, *, initial_M: int | None = None,
                     cap: int = TRUNCATION_CAP, crosscheck: bool = False) -> SampleOutcome:
    """Draw <A> for one trial and return its exact invariants.

    ``initial_M`` overrides the starting truncation (the default grows from
    ``ceil(8 ln^2(1/p) / p)``); ``crosscheck`` recomputes the invariants
    from a membership table and fails loudly on disagreement.
    """
    _check_p(p)
    stream = RandomStream(p, master_seed, trial)
    M = initial_M if initial_M is not None else initial_truncation(p)
    return _converge(stream, p, trial, 1, M, cap, crosscheck)


def shifted_sample_semigroup(p: float, u: int, trial: int, master_seed: int, *,
                             initial_M: int | None = None, cap: int = TRUNCATION_CAP,
                             crosscheck: bool = False) -> SampleOutcome:
    """Same as :func:`sample_semigroup` for the ground set [u, inf).

    The draw is coupled to the unshifted one: it uses the same stream and
    drops elements below u, so for fixed seeds F can only grow with u.
    """
    _check_p(p)
    if u < 2 or u % 2:
        raise InvalidParameter(f"u must be an even integer >= 2, got {u}")
    stream = RandomStream(p, master_seed, trial)
    M = initial_M if initial_M is not None else max(initial_truncation(p), 4 * u)
    return _converge(stream, p, trial, u, M, cap, crosscheck)
