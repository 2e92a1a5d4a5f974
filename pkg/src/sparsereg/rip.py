"""Restricted-isometry constants and quadratic-form concentration probes.

The k-restricted isometry constant of X (with the 1/n scaling used
throughout this package) is

    delta_k = max over size-k supports S of
              max(lmax(X_S' X_S / n) - 1, 1 - lmin(X_S' X_S / n)).

Exact mode enumerates every support within a budget; sampled mode maximizes
over random supports and therefore only ever gives a lower bound on the
true constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .rng import make_generator
from .supports import check_budget, enumerate_supports, sample_support

_EIG_CHUNK = 65536


@dataclass(frozen=True)
class RipEstimate:
    k: int
    delta: float
    exact: bool
    supports_checked: int


def _max_deviation(G: np.ndarray, supports: np.ndarray) -> float:
    """Worst eigenvalue deviation from 1 over a batch of supports.

    ``supports`` is an (m, k) integer array indexing into the normalized
    Gram matrix G.
    """
    sub = G[supports[:, :, None], supports[:, None, :]]
    eig = np.linalg.eigvalsh(sub)
    return float(np.maximum(eig[:, -1] - 1.0, 1.0 - eig[:, 0]).max())


def rip_constant(
    X: np.ndarray,
    k: int,
    mode: str = "exact",
    budget: int = 2_000_000,
    seed: int = 0,
) -> RipEstimate:
    """Restricted isometry constant of X at order k, exact or sampled."""
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    if not 1 <= k <= p:
        raise ValueError(f"k must lie in [1, p], got k={k}, p={p}")
    G = (X.T @ X) / n
    delta = 0.0
    if mode == "exact":
        total = comb(p, k)
        check_budget(total, budget, f"exact isometry constant at p={p}, k={k}")
        batch: list[tuple[int, ...]] = []
        for support in enumerate_supports(p, k):
            batch.append(support)
            if len(batch) == _EIG_CHUNK:
                delta = max(delta, _max_deviation(G, np.array(batch, dtype=np.int64)))
                batch.clear()
        if batch:
            delta = max(delta, _max_deviation(G, np.array(batch, dtype=np.int64)))
        return RipEstimate(k=k, delta=delta, exact=True, supports_checked=total)
    if mode == "sampled":
        rng = make_generator(seed, "rip-sample")
        supports = np.array(
            [sample_support(rng, p, k) for _ in range(budget)], dtype=np.int64
        )
        for start in range(0, budget, _EIG_CHUNK):
            delta = max(delta, _max_deviation(G, supports[start : start + _EIG_CHUNK]))
        return RipEstimate(k=k, delta=delta, exact=False, supports_checked=budget)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class RipConsequences:
    """Per-part verdicts; None marks a part whose preconditions do not apply."""

    inner_product: bool | None
    norm_sandwich: bool | None
    disjoint_inner_product: bool | None


def check_rip_consequences(
    X: np.ndarray, v: np.ndarray, w: np.ndarray, delta: float, k: int
) -> RipConsequences:
    """Literal evaluation of three isometry consequences at level (k, delta).

    Part 1 (both vectors k-sparse):
        |(Xv)'(Xw)| <= (1 + delta) ||v|| ||w|| n.
    Part 2 (common super-support of size k):
        ||Xw||^2 - 4 ||v-w|| ||w|| n <= ||Xv||^2
                                     <= ||Xw||^2 + 4 ||v-w|| ||w|| n + 2 ||v-w||^2 n.
    Part 3 (disjoint supports, common super-support of size k):
        |(Xv)'(Xw)| <= delta (||v||^2 + ||w||^2) n.
    """
    X = np.asarray(X, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = X.shape[0]
    sv = set(np.flatnonzero(v).tolist())
    sw = set(np.flatnonzero(w).tolist())
    union = sv | sw
    Xv, Xw = X @ v, X @ w
    nv, nw = float(np.linalg.norm(v)), float(np.linalg.norm(w))
    inner = abs(float(Xv @ Xw))

    part1: bool | None = None
    if len(sv) <= k and len(sw) <= k:
        part1 = inner <= (1.0 + delta) * nv * nw * n

    part2: bool | None = None
    if len(union) <= k:
        dvw = float(np.linalg.norm(v - w))
        nxv2 = float(Xv @ Xv)
        nxw2 = float(Xw @ Xw)
        upper = nxw2 + 4.0 * dvw * nw * n + 2.0 * dvw * dvw * n
        lower = nxw2 - 4.0 * dvw * nw * n
        part2 = lower <= nxv2 <= upper

    part3: bool | None = None
    if not (sv & sw) and len(union) <= k:
        part3 = inner <= delta * (nv * nv + nw * nw) * n

    return RipConsequences(
        inner_product=part1, norm_sandwich=part2, disjoint_inner_product=part3
    )


@dataclass(frozen=True)
class TailTable:
    """Empirical tail of |V'AV - trace(A)| over standard normal V, with norms.

    The matrix norms let callers overlay any candidate concentration
    envelope ``2 exp(-d min(t^2/||A||_F^2, t/||A||))``; no constant d is
    asserted here because none is pinned down by theory.
    """

    thresholds: np.ndarray
    tail_frequency: np.ndarray
    frobenius: float
    opnorm: float
    trials: int
    mean_quadratic_form: float
    trace: float

    def to_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "empirical_tail", "frobenius", "opnorm"])
            for t, f in zip(self.thresholds, self.tail_frequency):
                writer.writerow([repr(float(t)), repr(float(f)), repr(self.frobenius), repr(self.opnorm)])


def operator_norm(
    A: np.ndarray, tol: float = 1e-10, max_iters: int = 100_000, seed: int = 0
) -> float:
    """Largest singular value by power iteration on A'A, deterministic start."""
    A = np.asarray(A, dtype=np.float64)
    m = A.shape[1]
    x = make_generator(seed, "power-iteration").standard_normal(m)
    x /= np.linalg.norm(x)
    sigma = 0.0
    for _ in range(max_iters):
        y = A @ x
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return 0.0
        z = A.T @ y
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            return ny
        x = z / nz
        if abs(ny - sigma) <= tol * max(1.0, ny):
            return ny
        sigma = ny
    return sigma


def quadratic_form_probe(
    A: np.ndarray, trials: int, t_grid, seed: int = 0
) -> TailTable:
    """Sample V'AV for standard normal V and tabulate deviation tails.

    Requires at least 1000 trials so the table is meaningful.  Also reports
    the Frobenius norm and the operator norm (power iteration, 1e-10
    relative tolerance) of A.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if not np.all(np.isfinite(A)):
        raise ValueError("A must be finite")
    if trials < 1000:
        raise ValueError("need at least 1000 trials")
    t_grid = np.asarray(t_grid, dtype=np.float64)
    n = A.shape[0]
    rng = make_generator(seed, "quadratic-form")
    center = float(np.trace(A))
    devs = np.empty(trials)
    total = 0.0
    chunk = max(1, (1 << 22) // max(n, 1))
    done = 0
    while done < trials:
        m = min(chunk, trials - done)
        V = rng.standard_normal((m, n))
        q = np.einsum("ti,ti->t", V @ A, V)
        total += float(q.sum())
        devs[done : done + m] = np.abs(q - center)
        done += m
    tails = np.array([(devs > t).mean() for t in t_grid])
    return TailTable(
        thresholds=t_grid,
        tail_frequency=tails,
        frobenius=float(np.linalg.norm(A)),
        opnorm=operator_norm(A),
        trials=trials,
        mean_quadratic_form=total / trials,
        trace=center,
    )
