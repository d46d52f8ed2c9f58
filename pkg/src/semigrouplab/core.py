"""Exact invariants of numerical semigroups given by a finite generator set.

The canonical finite representation is the Apéry table of S with respect to
its multiplicity q: ``w[r]`` is the least element of S congruent to r mod q.
Frobenius number, genus, membership and the minimal generating set are all
read off that table. :func:`semigroup_prefix` is an independent dynamic
programming closure used as an oracle and for sparse-density measurements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import InvalidGenerators, NotCofinite

MAX_GENERATOR = 2**31


@dataclass(frozen=True)
class GeneratorSet:
    elements: tuple[int, ...]
    gcd: int

    def __len__(self):
        return len(self.elements)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.elements, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class AperyTable:
    q: int
    w: np.ndarray

    def __post_init__(self):
        self.w.setflags(write=False)

    def __eq__(self, other):
        if not isinstance(other, AperyTable):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.w, other.w)

    def __hash__(self):
        return hash((self.q, self.w.tobytes()))


@dataclass(frozen=True)
class InvariantsRecord:
    frobenius: int
    genus: int
    embedding_dim: int
    multiplicity: int

    def __str__(self):
        return f"F={self.frobenius} g={self.genus} e={self.embedding_dim} q={self.multiplicity}"

    def satisfies_inequalities(self) -> bool:
        F, g, e = self.frobenius, self.genus, self.embedding_dim
        return F + 1 <= 2 * g and g <= F + 1 and e <= F + 2


@dataclass(frozen=True, eq=False)
class MembershipTable:
    N: int
    member: np.ndarray

    def __post_init__(self):
        self.member.setflags(write=False)

    def __contains__(self, n):
        return 0 <= n <= self.N and bool(self.member[n])

    def elements(self) -> list[int]:
        return np.flatnonzero(self.member).tolist()

    def count(self, positive_only=False) -> int:
        c = int(np.count_nonzero(self.member))
        return c - 1 if positive_only else c


def normalize_generators(raw: Iterable[int]) -> GeneratorSet:
    vals = [int(x) for x in raw]
    if not vals:
        raise InvalidGenerators("generator list is empty")
    bad = [x for x in vals if x <= 0]
    if bad:
        raise InvalidGenerators(f"generators must be positive, got {bad[0]}")
    big = [x for x in vals if x > MAX_GENERATOR]
    if big:
        raise InvalidGenerators(f"generator {big[0]} exceeds 2**31")
    elements = tuple(sorted(set(vals)))
    return GeneratorSet(elements, reduce(math.gcd, elements))


def _coerce(gens) -> GeneratorSet:
    return gens if isinstance(gens, GeneratorSet) else normalize_generators(gens)


def apery_set(gens) -> AperyTable:
    gens = _coerce(gens)
    if gens.gcd != 1:
        raise NotCofinite(f"gcd of generators is {gens.gcd}")
    q = gens.elements[0]
    w = _kernels.apery_round_robin(gens.as_array(), q)
    return AperyTable(q, w)


def frobenius(ap: AperyTable) -> int:
    return int(ap.w.max()) - ap.q


def genus(ap: AperyTable) -> int:
    # Each residue class r contributes w[r] // q gaps below w[r].
    return int((ap.w // ap.q).sum())


def membership(ap: AperyTable, n: int) -> bool:
    if n < 0:
        return False
    return n >= int(ap.w[n % ap.q])


def minimal_generators(ap: AperyTable, candidates: Iterable[int] | None = None) -> set[int]:
    """Return the unique minimal generating set of the semigroup.

    Candidates default to every Apéry element; passing a known generating
    set restricts the search, since every minimal generator belongs to any
    generating set. Each candidate w (other than q) is kept unless
    ``w = w[a] + w[r - a]`` for a nonzero residue a; any decomposition
    ``w = s + t`` with s, t nonzero semigroup elements reduces to one of that
    form, because ``w`` is the least element of its class.
    """
    q, w = ap.q, ap.w
    if q == 1:
        return {1}
    if candidates is None:
        residues = np.arange(1, q, dtype=np.int64)
    else:
        picked = sorted({int(c) % q for c in candidates
                         if c % q != 0 and int(c) == int(w[int(c) % q])})
        residues = np.asarray(picked, dtype=np.int64)
    mask = _kernels.apery_minimal_mask(w, residues)
    return {q} | {int(w[r]) for r in residues[mask]}


def invariants(gens) -> InvariantsRecord:
    gens = _coerce(gens)
    ap = apery_set(gens)
    return invariants_from_apery(ap, candidates=gens.elements)


def invariants_from_apery(ap: AperyTable, candidates=None) -> InvariantsRecord:
    return InvariantsRecord(
        frobenius=frobenius(ap),
        genus=genus(ap),
        embedding_dim=len(minimal_generators(ap, candidates)),
        multiplicity=ap.q,
    )


def semigroup_prefix(gens, N: int) -> MembershipTable:
    gens = _coerce(gens)
    if N < 0:
        raise ValueError("N must be nonnegative")
    arr = gens.as_array()
    return MembershipTable(int(N), _kernels.prefix_closure(arr[arr <= N], int(N)))


def count_upto(ap: AperyTable, N: int) -> int:
    """|S ∩ [1, N]| straight from the Apéry table."""
    if N < 1:
        return 0
    return int(_kernels.apery_count_upto(ap.w, int(N))) - 1


def invariants_bruteforce(gens) -> InvariantsRecord:
    """Invariants from a membership table alone, without any Apéry data.

    The table is grown until it ends in a run of q consecutive members;
    past such a run every integer is in S, so the last gap is the
    Frobenius number.
    """
    gens = _coerce(gens)
    if gens.gcd != 1:
        raise NotCofinite(f"gcd of generators is {gens.gcd}")
    q = gens.elements[0]
    N = 2 * gens.elements[-1] + q
    while True:
        table = semigroup_prefix(gens, N)
        gaps = np.flatnonzero(~table.member)
        F = int(gaps[-1]) if gaps.size else -1
        if N - F >= q:
            break
        N *= 2
    member = table.member
    minimal = 0
    for a in gens.elements:
        # a is redundant iff a = s + t with s, t in S ∩ [1, a-1]
        if a == 1 or not np.any(member[1:a] & member[a - 1:0:-1]):
            minimal += 1
    return InvariantsRecord(F, int(gaps.size), minimal, q)


def gaps(ap: AperyTable) -> list[int]:
    out = []
    for r in range(1, ap.q):
        out.extend(range(r, int(ap.w[r]), ap.q))
    return sorted(out)


def sylvester(a: int, b: int) -> tuple[int, int]:
    return a * b - a - b, (a - 1) * (b - 1) // 2


__all__: Sequence[str] = [
    "GeneratorSet", "AperyTable", "InvariantsRecord", "MembershipTable",
    "normalize_generators", "apery_set", "frobenius", "genus", "membership",
    "minimal_generators", "invariants", "invariants_from_apery",
    "semigroup_prefix", "count_upto", "invariants_bruteforce", "gaps", "sylvester",
]
