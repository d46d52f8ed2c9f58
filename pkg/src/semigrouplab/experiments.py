"""Seeded Monte Carlo studies of the random semigroup and the exact lemma suite.

Trials are independent (each owns a stream derived from the master seed and
its trial id), so they run on a thread pool and are folded in trial-id
order afterwards; output does not depend on the thread count.
"""

from __future__ import annotations

import io
import json
import math
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__, core, lemma_lab
from .errors import BudgetExceeded, InvalidParameter, InvariantViolation, SamplerDidNotConverge
from .random_model import (SampleOutcome, format_real, sample_semigroup,
                           shifted_sample_semigroup)


def default_threads() -> int:
    return os.cpu_count() or 1


def map_trials(fn: Callable[[int], object], trial_ids: Sequence[int], threads: int = 1) -> list:
    """fn over trial ids, results in input order. SamplerDidNotConverge becomes None."""
    def guarded(t):
        try:
            return fn(t)
        except SamplerDidNotConverge:
            return None

    if threads <= 1 or len(trial_ids) <= 1:
        return [guarded(t) for t in trial_ids]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(guarded, trial_ids))


def audit(outcome: SampleOutcome) -> None:
    inv = outcome.invariants
    if not inv.satisfies_inequalities():
        raise InvariantViolation(
            f"trial {outcome.trial_id} at p={outcome.p}: {inv} breaks (F+1)/2 <= g <= F+1, e <= F+2")
    if inv.frobenius >= outcome.truncation_M:
        raise InvariantViolation(f"trial {outcome.trial_id}: F={inv.frobenius} not below M={outcome.truncation_M}")


def nearest_rank(sorted_vals: Sequence[float], frac: float) -> float:
    k = max(1, math.ceil(frac * len(sorted_vals)))
    return sorted_vals[k - 1]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format_real(v)


def _csv(rows, header: Sequence[str]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\r\n")
    for row in rows:
        buf.write(",".join(_fmt(getattr(row, h)) for h in header) + "\r\n")
    return buf.getvalue()


def _json(rows) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2, sort_keys=False) + "\n"


# --- scaling -------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingConfig:
    p_grid: tuple[float, ...]
    trials: int
    master_seed: int
    threads: int = 1
    output_path: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        if not self.p_grid:
            raise InvalidParameter("p_grid is empty")
        if any(not 0 < p < 1 for p in self.p_grid):
            raise InvalidParameter("every p must lie in (0, 1)")
        if any(a <= b for a, b in zip(self.p_grid, self.p_grid[1:])):
            raise InvalidParameter("p_grid must be strictly decreasing")
        if self.trials < 1:
            raise InvalidParameter("trials must be >= 1")
        if self.threads < 1:
            raise InvalidParameter("threads must be >= 1")


ENVELOPE_CONSTANT = 5.0


@dataclass(frozen=True)
class ScalingRow:
    p: float
    trials: int
    capped: int
    mean_F: float
    median_F: float
    q10_F: float
    q90_F: float
    mean_g: float
    mean_e: float
    ratio_F_ln: float
    ratio_e_ln: float
    ratio_gF: float
    frac_under_envelope_log2: float

    def check(self):
        if not 0.0 <= self.frac_under_envelope_log2 <= 1.0:
            raise InvariantViolation(f"frac_under_envelope out of range: {self}")
        if self.mean_F > 0 and not 0.5 <= self.ratio_gF <= 1.0 + 1.0 / self.mean_F:
            raise InvariantViolation(f"ratio_gF outside [1/2, 1 + 1/mean_F]: {self}")


SCALING_HEADER = [f.name for f in fields(ScalingRow)]


def aggregate_scaling(p: float, outcomes: Sequence[SampleOutcome | None]) -> ScalingRow:
    done = [o for o in outcomes if o is not None]
    capped = len(outcomes) - len(done)
    if not done:
        raise InvariantViolation(f"every trial at p={p} hit the truncation cap")
    F = sorted(o.invariants.frobenius for o in done)
    g = [o.invariants.genus for o in done]
    e = [o.invariants.embedding_dim for o in done]
    n = len(done)
    ln2 = math.log(1.0 / p) ** 2
    envelope = ENVELOPE_CONSTANT / p * math.log2(1.0 / p) ** 2
    mean_F = sum(F) / n
    mean_g = sum(g) / n
    mean_e = sum(e) / n
    row = ScalingRow(
        p=p, trials=n, capped=capped,
        mean_F=mean_F, median_F=float(nearest_rank(F, 0.5)),
        q10_F=float(nearest_rank(F, 0.1)), q90_F=float(nearest_rank(F, 0.9)),
        mean_g=mean_g, mean_e=mean_e,
        ratio_F_ln=mean_F / (ln2 / p), ratio_e_ln=mean_e / ln2,
        ratio_gF=mean_g / mean_F if mean_F > 0 else math.nan,
        frac_under_envelope_log2=sum(f <= envelope for f in F) / n,
    )
    row.check()
    return row


def scaling_outcomes(p: float, trials: int, master_seed: int, threads: int = 1):
    outcomes = map_trials(lambda t: sample_semigroup(p, t, master_seed), range(trials), threads)
    for o in outcomes:
        if o is not None:
            audit(o)
    return outcomes


@dataclass
class StudyResult:
    rows: list
    manifest: dict
    header: list[str] = field(default_factory=list)

    def render(self, fmt: str = "csv") -> str:
        return _csv(self.rows, self.header) if fmt == "csv" else _json(self.rows)


def _manifest(study: str, config: dict, rows, started: float, **extra) -> dict:
    return {
        "tool": "semigrouplab",
        "version": __version__,
        "study": study,
        "config": config,
        "master_seed": config.get("master_seed"),
        "wall_clock_seconds": round(time.time() - started, 3),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "row_counts": {study: len(rows)},
        **extra,
    }


def run_scaling(config: ScalingConfig) -> StudyResult:
    started = time.time()
    rows = []
    audited = 0
    for p in config.p_grid:
        outcomes = scaling_outcomes(p, config.trials, config.master_seed, config.threads)
        audited += sum(o is not None for o in outcomes)
        rows.append(aggregate_scaling(p, outcomes))
    cfg = {"p_grid": list(config.p_grid), "trials": config.trials,
           "master_seed": config.master_seed, "threads": config.threads}
    manifest = _manifest("scaling", cfg, rows, started, draws_audited=audited,
                         capped=sum(r.capped for r in rows))
    return StudyResult(rows, manifest, SCALING_HEADER)


# --- transition ----------------------------------------------------------------


@dataclass(frozen=True)
class TransitionRow:
    p: float
    C: float
    N: int
    trials: int
    prob_dense: float
    mean_density: float


TRANSITION_HEADER = [f.name for f in fields(TransitionRow)]


def _strictly_increasing(xs):
    return all(a < b for a, b in zip(xs, xs[1:]))


def run_transition(p: float, C_grid: Sequence[float], trials: int, master_seed: int,
                   threads: int = 1) -> StudyResult:
    """P[F < N] and mean |<A> ∩ [N]| / N at N = floor(C ln^2(1/p) / p), one shared draw per trial."""
    started = time.time()
    C_grid = [float(c) for c in C_grid]
    if not C_grid or not _strictly_increasing(C_grid) or C_grid[0] <= 0:
        raise InvalidParameter("C_grid must be positive and strictly increasing")
    Ns = [lemma_lab.transition_scale(p, c) for c in C_grid]

    def one(t):
        o = sample_semigroup(p, t, master_seed)
        audit(o)
        ap = core.apery_set(core.GeneratorSet(o.elements, 1))
        return o.invariants.frobenius, [core.count_upto(ap, N) for N in Ns]

    results = [r for r in map_trials(one, range(trials), threads) if r is not None]
    capped = trials - len(results)
    n = len(results)
    rows = []
    for i, (C, N) in enumerate(zip(C_grid, Ns)):
        dense = sum(F < N for F, _ in results)
        dens = sum(counts[i] for _, counts in results) / N
        rows.append(TransitionRow(p, C, N, n, dense / n, dens / n))
    for a, b in zip(rows, rows[1:]):
        if b.prob_dense < a.prob_dense:
            raise InvariantViolation("prob_dense decreased along C_grid")
    cfg = {"p": p, "C_grid": C_grid, "trials": trials, "master_seed": master_seed, "threads": threads}
    return StudyResult(rows, _manifest("transition", cfg, rows, started, draws_audited=n, capped=capped),
                       TRANSITION_HEADER)


# --- tail --------------------------------------------------------------------


@dataclass(frozen=True)
class TailRow:
    p: float
    u: int
    trials: int
    mean_F_shifted: float
    reference: float

    def check(self):
        vals = (self.mean_F_shifted, self.reference)
        if not all(math.isfinite(v) and v >= 0 for v in vals):
            raise InvariantViolation(f"non-finite or negative tail row: {self}")


TAIL_HEADER = [f.name for f in fields(TailRow)]


def tail_outcomes(p: float, u: int, trials: int, master_seed: int, threads: int = 1, first_trial: int = 0):
    outcomes = map_trials(lambda t: shifted_sample_semigroup(p, u, t, master_seed),
                          range(first_trial, first_trial + trials), threads)
    for o in outcomes:
        if o is not None:
            audit(o)
    return outcomes


def run_tail(p: float, u_grid: Sequence[int], trials: int, master_seed: int, threads: int = 1) -> StudyResult:
    started = time.time()
    u_grid = [int(u) for u in u_grid]
    if not u_grid or any(u < 2 or u % 2 for u in u_grid):
        raise InvalidParameter("u values must be even and >= 2")
    rows = []
    capped = 0
    for u in u_grid:
        done = [o for o in tail_outcomes(p, u, trials, master_seed, threads) if o is not None]
        capped += trials - len(done)
        mean_F = sum(o.invariants.frobenius for o in done) / len(done)
        row = TailRow(p, u, len(done), mean_F, p**-4 + u * u)
        row.check()
        rows.append(row)
    cfg = {"p": p, "u_grid": u_grid, "trials": trials, "master_seed": master_seed, "threads": threads}
    return StudyResult(rows, _manifest("tail", cfg, rows, started, capped=capped), TAIL_HEADER)


# --- lemma suite -------------------------------------------------------------


def _need(name, needed, budget):
    if needed > budget:
        raise BudgetExceeded(name, needed, budget)


def check_partition_enumeration(budget):
    needed = sum(lemma_lab.partition_count(n) for n in range(31))
    _need("partition_enumeration", needed, budget)
    bad = [n for n in range(31)
           if sum(1 for _ in lemma_lab.enumerate_partitions(n)) != lemma_lab.partition_count(n)]
    return not bad, {"n_max": 30, "mismatches": bad}


def check_hardy_ramanujan(budget):
    grid = (1000, 2000, 5000)
    _need("hardy_ramanujan_ratio", max(grid), budget)
    ratios = [lemma_lab.partition_ratio(n) for n in grid]
    in_band = all(0.9 <= r <= 1.1 for r in ratios)
    devs = [abs(r - 1) for r in ratios]
    monotone = all(a >= b for a, b in zip(devs, devs[1:]))
    return in_band and monotone, {"n": list(grid), "ratio": ratios}


def check_partition_sum_bound(budget, max_x=500, gammas=(0.1, 0.2), N_max=2000):
    _need("partition_sum_bound", max_x + len(gammas) * N_max, budget)
    C = lemma_lab.calibrate_constant(max_x)
    sums_ok = all(lemma_lab.partition_prefix_sum(x) <= lemma_lab.partition_sum_bound(1.0, x, C)
                  for x in range(1, max_x + 1))
    worst = 0.0
    for gamma in gammas:
        A0 = lemma_lab.extremal_sparse_set(gamma, N_max)
        table = core.semigroup_prefix(A0, N_max)
        cum = np.cumsum(table.member) - 1
        for N in range(1, N_max + 1):
            worst = max(worst, int(cum[N]) / lemma_lab.partition_sum_bound(gamma, N, C))
    return sums_ok and worst <= 1.0, {"C": C, "max_measured_over_bound": worst}


def coverall_grid(q_max=5, limit=10**6, L_max=20):
    for q in range(1, q_max + 1):
        for L in range(1, L_max + 1):
            if q**L > limit:
                break
            if q * q < 2**L:
                yield q, L


def check_coverall(budget):
    worst = []
    ok = True
    for q, L in coverall_grid():
        rep = lemma_lab.coverall_failure_probability(q, L, "exact", budget)
        if rep.exact_failure > Fraction(q * q, 2**L):
            ok = False
            worst.append([q, L, rep.estimate, rep.bound])
    small = lemma_lab.coverall_failure_probability(2, 2, "exact", budget)
    mid = lemma_lab.coverall_failure_probability(3, 10, "exact", budget)
    ok = ok and small.exact_failure == Fraction(1, 4) and mid.exact_failure <= Fraction(9, 1024)
    return ok, {"violations": worst, "q2_L2": str(small.exact_failure), "q3_L10": str(mid.exact_failure)}


def check_resample(budget):
    cases = [(q, ell) for q in range(1, 5) for ell in range(1, min(q, 3) + 1)]
    bad = [[q, ell] for q, ell in cases
           if not lemma_lab.resample_distribution_check(q, ell, "exact", budget).uniform]
    return not bad, {"cases": len(cases), "non_uniform": bad}


LEMMA_CHECKS = {
    "partition_enumeration": check_partition_enumeration,
    "hardy_ramanujan_ratio": check_hardy_ramanujan,
    "partition_sum_bound": check_partition_sum_bound,
    "coverall_exact": check_coverall,
    "resample_exact": check_resample,
}


def run_lemma_suite(budget: int = 10**6) -> dict:
    entries = []
    for name, fn in LEMMA_CHECKS.items():
        try:
            passed, detail = fn(budget)
            entries.append({"name": name, "passed": bool(passed), "detail": detail})
        except BudgetExceeded as exc:
            entries.append({"name": name, "passed": False, "error": "BudgetExceeded",
                            "detail": {"check": exc.check, "needed": exc.needed, "budget": exc.budget}})
    return {"budget": budget, "checks": entries, "passed": all(e["passed"] for e in entries)}


# --- files and replay ----------------------------------------------------------


def write_study(result: StudyResult, out: str | os.PathLike, fmt: str = "csv") -> Path:
    out = Path(out)
    out.write_text(result.render(fmt), newline="")
    result.manifest["format"] = fmt
    result.manifest["outputs"] = [out.name]
    manifest_path = out.with_name(out.name + ".manifest.json")
    manifest_path.write_text(json.dumps(result.manifest, indent=2) + "\n")
    return manifest_path


def rerun(manifest: dict) -> StudyResult:
    cfg = manifest["config"]
    study = manifest["study"]
    if study == "scaling":
        return run_scaling(ScalingConfig(tuple(cfg["p_grid"]), cfg["trials"], cfg["master_seed"], cfg["threads"]))
    if study == "transition":
        return run_transition(cfg["p"], cfg["C_grid"], cfg["trials"], cfg["master_seed"], cfg["threads"])
    if study == "tail":
        return run_tail(cfg["p"], cfg["u_grid"], cfg["trials"], cfg["master_seed"], cfg["threads"])
    raise InvalidParameter(f"unknown study {study!r}")


def replay(manifest_path: str | os.PathLike, out_dir: str | os.PathLike | None = None) -> list[Path]:
    """Rerun the study a manifest describes and rewrite its outputs."""
    manifest_path = Path(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    result = rerun(manifest)
    target = Path(out_dir) if out_dir is not None else manifest_path.parent
    written = []
    for name in manifest["outputs"]:
        path = target / name
        write_study(result, path, manifest.get("format", "csv"))
        written.append(path)
    return written
