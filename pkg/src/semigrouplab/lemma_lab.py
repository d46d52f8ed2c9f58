"""Exact and Monte Carlo checks of the combinatorial and probabilistic lemmas.

Covers the partition function and its Hardy-Ramanujan leading term, the
partition-sum bound on sparse generating sets, subset-sum coverage of
Z/qZ, and the resampling procedure that turns a distinct-valued sequence
into an i.i.d. uniform one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np
from scipy import stats

from . import _kernels, core
from .errors import BudgetExceeded, InvalidParameter
from .random_model import RandomStream

# --- partitions -------------------------------------------------------------

_PART = [1]


def partition_count(n: int) -> int:
    """Exact Part(n) from Euler's pentagonal-number recurrence (memoized)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    for m in range(len(_PART), n + 1):
        total = 0
        k = 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * _PART[m - g1]
            g2 = g1 + k
            if g2 <= m:
                total += sign * _PART[m - g2]
            k += 1
        _PART.append(total)
    return _PART[n]


def enumerate_partitions(n: int, largest: int | None = None) -> Iterator[tuple[int, ...]]:
    """All partitions of n as non-increasing tuples. Brute force; for oracles only."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in enumerate_partitions(n - first, first):
            yield (first,) + rest


def hardy_ramanujan_estimate(n: int) -> float:
    if n < 1:
        raise ValueError("n must be positive")
    return math.exp(math.pi * math.sqrt(2.0 * n / 3.0)) / (4.0 * math.sqrt(3.0) * n)


def partition_ratio(n: int) -> float:
    # Part(n) can exceed float range long before the ratio does.
    log_part = math.log(partition_count(n))
    log_est = math.pi * math.sqrt(2.0 * n / 3.0) - math.log(4.0 * math.sqrt(3.0) * n)
    return math.exp(log_part - log_est)


def partition_sum_bound(gamma: float, N: int, C: float) -> float:
    """C (gamma N)^(-1/2) exp(pi sqrt(2 gamma N / 3))."""
    if not 0.0 < gamma <= 1.0:
        raise InvalidParameter("gamma must lie in (0, 1]")
    if N < 1 or C <= 0:
        raise InvalidParameter("need N >= 1 and C > 0")
    x = gamma * N
    return C / math.sqrt(x) * math.exp(math.pi * math.sqrt(2.0 * x / 3.0))


def partition_prefix_sum(x: float) -> int:
    """sum of Part(n) for 0 <= n <= floor(x)."""
    return sum(partition_count(n) for n in range(int(math.floor(x)) + 1))


def calibrate_constant(max_x: int = 500) -> float:
    """Smallest power of two C with sum_{n <= x} Part(n) <= bound(x, C) for x = 1..max_x.

    Between consecutive integers the left side is constant and the bound is
    increasing (for x > 3 / (2 pi^2)), so integer x is the worst case.
    """
    worst = max(partition_prefix_sum(x) / partition_sum_bound(1.0, x, 1.0)
                for x in range(1, max_x + 1))
    return 2.0 ** math.ceil(math.log2(worst))


def extremal_sparse_set(gamma: float, N: int) -> list[int]:
    """{ceil(i / gamma) : i >= 1} ∩ [1, N], the densest set with |A ∩ [n]| <= gamma n."""
    g = Fraction(str(gamma))
    out = []
    i = 1
    while True:
        a = math.ceil(i / g)
        if a > N:
            return out
        out.append(a)
        i += 1


# --- subset-sum coverage of Z/qZ --------------------------------------------


def reachable_residues(q: int, xs: Sequence[int]) -> set[int]:
    """Residues mod q of all 0/1 combinations of xs. One rotate-and-or per element."""
    if q < 1:
        raise InvalidParameter("q must be positive")
    full = (1 << q) - 1
    mask = 1
    for x in xs:
        if not 0 <= x < q:
            raise InvalidParameter(f"residue {x} outside [0, {q})")
        if x:
            mask |= ((mask << x) | (mask >> (q - x))) & full
    return {r for r in range(q) if mask >> r & 1}


def _covers_batch(q: int, xs: np.ndarray) -> np.ndarray:
    """Row-wise coverage test for an (n, L) array of residues."""
    return _kernels.covers_rows(np.ascontiguousarray(xs, dtype=np.int64), q)


@dataclass(frozen=True)
class CoverageReport:
    q: int
    L: int
    mode: str
    samples: int
    failures: int
    estimate: float
    bound: float

    @property
    def exact_failure(self) -> Fraction:
        return Fraction(self.failures, self.samples)

    def to_json(self) -> dict:
        return asdict(self)


def coverall_failure_probability(q: int, L: int, mode: str = "exact", budget: int = 10**6,
                                 seed: int = 0, chunk: int = 20000) -> CoverageReport:
    """Probability that L uniform residues mod q fail to cover Z/qZ by subset sums.

    Exact mode enumerates all q**L sequences (refusing if that exceeds
    ``budget``); Monte Carlo mode draws ``budget`` sequences.
    """
    if q < 1 or L < 1:
        raise InvalidParameter("q and L must be positive")
    bound = q * q / 2.0**L
    if mode == "exact":
        total = q**L
        if total > budget:
            raise BudgetExceeded(f"coverall(q={q}, L={L})", total, budget)
        failures = 0
        for start in range(0, total, chunk):
            codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
            digits = (codes[:, None] // q ** np.arange(L, dtype=np.int64)[None, :]) % q
            failures += int(np.count_nonzero(~_covers_batch(q, digits)))
        samples = total
    elif mode == "monte_carlo":
        if budget < 1:
            raise BudgetExceeded(f"coverall(q={q}, L={L})", 1, budget)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(q, L)))
        failures = 0
        done = 0
        while done < budget:
            n = min(chunk, budget - done)
            failures += int(np.count_nonzero(~_covers_batch(q, rng.integers(0, q, size=(n, L)))))
            done += n
        samples = budget
    else:
        raise InvalidParameter(f"unknown mode {mode!r}")
    return CoverageReport(q, L, mode, samples, failures, failures / samples, bound)


# --- distinct resampling ----------------------------------------------------


def _resample_core(ys: np.ndarray, zs: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Deterministic part of the resampling, row-wise.

    Blocks of equal z values are ranked by first appearance; block k gets
    ys[perm[k]]. With perm a uniform permutation this is a uniformly random
    injective map from blocks to the values of ys.
    """
    eq = zs[:, :, None] == zs[:, None, :]
    first = eq.argmax(axis=2)
    is_first = first == np.arange(zs.shape[1])[None, :]
    rank = np.cumsum(is_first, axis=1) - 1
    block_rank = np.take_along_axis(rank, first, axis=1)
    slot = np.take_along_axis(perm, block_rank, axis=1)
    return np.take_along_axis(ys, slot, axis=1)


def resample_sequence(ys: Sequence[int], zs: Sequence[int], rng: np.random.Generator) -> list[int]:
    ys_arr = np.asarray(ys, dtype=np.int64)
    zs_arr = np.asarray(zs, dtype=np.int64)
    if ys_arr.shape != zs_arr.shape or ys_arr.ndim != 1:
        raise InvalidParameter("ys and zs must be sequences of equal length")
    if len(set(ys_arr.tolist())) != ys_arr.size:
        raise InvalidParameter("ys must be distinct")
    perm = rng.permutation(ys_arr.size)
    return _resample_core(ys_arr[None, :], zs_arr[None, :], perm[None, :])[0].tolist()


@dataclass(frozen=True)
class ResampleReport:
    q: int
    ell: int
    mode: str
    samples: int
    distribution: dict | None = None     # exact: sequence -> Fraction
    chi_square: float | None = None
    p_value: float | None = None

    @property
    def uniform(self) -> bool:
        if self.mode == "exact":
            target = Fraction(1, self.q**self.ell)
            return (len(self.distribution) == self.q**self.ell
                    and all(v == target for v in self.distribution.values()))
        return self.p_value is not None and self.p_value > 1e-3

    def to_json(self) -> dict:
        out = {"q": self.q, "ell": self.ell, "mode": self.mode, "samples": self.samples,
               "uniform": self.uniform}
        if self.mode == "exact":
            out["max_deviation"] = str(max(abs(v - Fraction(1, self.q**self.ell))
                                           for v in self.distribution.values()))
        else:
            out["chi_square"] = self.chi_square
            out["p_value"] = self.p_value
        return out


def resample_distribution_check(q: int, ell: int, mode: str = "exact", budget: int = 10**6,
                                seed: int = 0, chunk: int = 100000) -> ResampleReport:
    """Output distribution of the resampling procedure over (Z/qZ)^ell.

    Exact mode enumerates every (ys, zs, injective map) triple with rational
    weights; Monte Carlo mode draws ``budget`` samples and returns a
    chi-square goodness-of-fit against the uniform distribution.
    """
    if not 1 <= ell <= q:
        raise InvalidParameter("need 1 <= ell <= q")
    cells = q**ell
    if mode == "exact":
        n_ys = math.perm(q, ell)
        n_maps = math.factorial(ell)
        needed = n_ys * cells * n_maps
        if needed > budget:
            raise BudgetExceeded(f"resample(q={q}, ell={ell})", needed, budget)
        weight = Fraction(1, needed)
        ys = np.array(list(itertools.permutations(range(q), ell)), dtype=np.int64)
        zs = np.array(list(itertools.product(range(q), repeat=ell)), dtype=np.int64)
        perms = np.array(list(itertools.permutations(range(ell))), dtype=np.int64)
        Y = np.repeat(ys, len(zs) * len(perms), axis=0)
        Z = np.tile(np.repeat(zs, len(perms), axis=0), (len(ys), 1))
        P = np.tile(perms, (len(ys) * len(zs), 1))
        xs = _resample_core(Y, Z, P)
        codes = xs @ (q ** np.arange(ell, dtype=np.int64))
        counts = np.bincount(codes, minlength=cells)
        dist = {}
        for code, c in enumerate(counts.tolist()):
            if c:
                dist[tuple(int(d) for d in np.unravel_index(code, (q,) * ell, order="F"))] = c * weight
        return ResampleReport(q, ell, mode, needed, distribution=dist)
    if mode == "monte_carlo":
        if budget < 1:
            raise BudgetExceeded(f"resample(q={q}, ell={ell})", 1, budget)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(q, ell)))
        counts = np.zeros(cells, dtype=np.int64)
        weights = q ** np.arange(ell, dtype=np.int64)
        done = 0
        while done < budget:
            n = min(chunk, budget - done)
            ys = np.argsort(rng.random((n, q)), axis=1)[:, :ell]
            zs = rng.integers(0, q, size=(n, ell))
            perm = np.argsort(rng.random((n, ell)), axis=1)
            counts += np.bincount(_resample_core(ys, zs, perm) @ weights, minlength=cells)
            done += n
        chi2, pval = stats.chisquare(counts)
        return ResampleReport(q, ell, mode, budget, chi_square=float(chi2), p_value=float(pval))
    raise InvalidParameter(f"unknown mode {mode!r}")


# --- sparseness below the transition scale ------------------------------------


@dataclass(frozen=True)
class DensityReport:
    p: float
    c: float
    N: int
    eps: float
    trials: int
    counts: tuple[int, ...]

    @property
    def mean(self) -> float:
        return sum(self.counts) / len(self.counts)

    @property
    def max(self) -> int:
        return max(self.counts)

    @property
    def mean_density(self) -> float:
        return self.mean / self.N

    @property
    def frac_sparse(self) -> float:
        limit = self.N**self.eps
        return sum(c <= limit for c in self.counts) / len(self.counts)


def transition_scale(p: float, c: float) -> int:
    """floor(c ln^2(1/p) / p), at least 1."""
    return max(1, int(math.floor(c / p * math.log(1.0 / p) ** 2)))


def sparse_density(p: float, c: float, trials: int, master_seed: int, eps: float = 0.5) -> DensityReport:
    """|<A> ∩ [N]| at N = c ln^2(1/p) / p over independent trials."""
    if not 0.0 < p < 1.0 or c <= 0:
        raise InvalidParameter("need 0 < p < 1 and c > 0")
    N = transition_scale(p, c)
    counts = []
    for t in range(trials):
        els = RandomStream(p, master_seed, t).sample_prefix(N)
        if els.size == 0:
            counts.append(0)
            continue
        gens = core.GeneratorSet(tuple(els.tolist()), math.gcd(*els.tolist()))
        counts.append(core.semigroup_prefix(gens, N).count(positive_only=True))
    return DensityReport(p, c, N, eps, trials, tuple(counts))
