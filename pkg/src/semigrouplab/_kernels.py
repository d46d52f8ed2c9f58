"""Compiled inner loops. Everything here works on int64 numpy arrays and releases the GIL."""

import numpy as np
from numba import njit

INF = np.iinfo(np.int64).max


@njit(cache=True, nogil=True)
def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


@njit(cache=True, nogil=True)
def apery_round_robin(gens, q):
    # gens sorted ascending, gens[0] == q, gcd(gens) == 1.
    # One cyclic pass per generator, each cycle entered at its current minimum;
    # after the pass for generator a, w is exact for the prefix gens[:i+1].
    w = np.full(q, INF, dtype=np.int64)
    w[0] = 0
    for i in range(gens.shape[0]):
        a = gens[i]
        step = a % q
        if step == 0:
            continue
        d = _gcd(step, q)
        length = q // d
        for start in range(d):
            best = INF
            best_r = -1
            r = start
            for _ in range(length):
                if w[r] < best:
                    best = w[r]
                    best_r = r
                r += step
                if r >= q:
                    r -= q
            if best_r < 0:
                continue
            r = best_r
            for _ in range(length - 1):
                nxt = r + step
                if nxt >= q:
                    nxt -= q
                cand = w[r] + a
                if cand < w[nxt]:
                    w[nxt] = cand
                r = nxt
    return w


@njit(cache=True, nogil=True)
def apery_decomposable(w, r):
    """True if w[r] = w[a] + w[r - a] for some nonzero residue a != r."""
    q = w.shape[0]
    target = w[r]
    for a in range(1, q):
        if a == r:
            continue
        wa = w[a]
        if wa >= target:
            continue
        b = r - a
        if b < 0:
            b += q
        if wa + w[b] == target:
            return True
    return False


@njit(cache=True, nogil=True)
def apery_minimal_mask(w, residues):
    out = np.zeros(residues.shape[0], dtype=np.bool_)
    for i in range(residues.shape[0]):
        out[i] = not apery_decomposable(w, residues[i])
    return out


@njit(cache=True, nogil=True)
def prefix_closure(gens, N):
    # gens sorted ascending, all >= 1.
    member = np.zeros(N + 1, dtype=np.bool_)
    member[0] = True
    k = gens.shape[0]
    for n in range(1, N + 1):
        for j in range(k):
            a = gens[j]
            if a > n:
                break
            if member[n - a]:
                member[n] = True
                break
    return member


@njit(cache=True, nogil=True)
def apery_count_upto(w, N):
    # |S ∩ [0, N]|
    q = w.shape[0]
    total = 0
    for r in range(q):
        if w[r] <= N:
            total += (N - w[r]) // q + 1
    return total


@njit(cache=True, nogil=True)
def covers_rows(xs, q):
    # xs: (n, L) residues in [0, q). out[i]: subset sums of row i hit every class.
    n, L = xs.shape
    out = np.zeros(n, dtype=np.bool_)
    reach = np.zeros(q, dtype=np.bool_)
    prev = np.zeros(q, dtype=np.bool_)
    for i in range(n):
        reach[:] = False
        reach[0] = True
        hit = 1
        for j in range(L):
            x = xs[i, j]
            if x == 0:
                continue
            prev[:] = reach
            for r in range(q):
                if prev[r] and not reach[(r + x) % q]:
                    reach[(r + x) % q] = True
                    hit += 1
            if hit == q:
                break
        out[i] = hit == q
    return out
