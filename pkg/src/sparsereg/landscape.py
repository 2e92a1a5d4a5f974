"""Support-landscape analysis: overlap profiles, gap verdicts, local minima,
deviating-local-minimum triplets, pure-noise fits, and the mixed-vector
certificate that witnesses LASSO failure.

Exhaustive routines enumerate supports within an explicit budget and refuse
otherwise; sampled variants only ever produce upper bounds on level minima
and therefore can certify absence of a gap but never its presence.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .model import Dimensions, Instance, SparseVector
from .rng import make_generator
from .supports import (
    BudgetExceededError,
    check_budget,
    enumerate_overlap_supports,
    enumerate_supports,
    overlap_level_count,
    sample_overlap_support,
)
from math import comb


def _require_landscape_dims(dims: Dimensions) -> None:
    if 3 * dims.k > dims.p:
        raise ValueError(
            f"landscape analysis needs k <= p/3, got k={dims.k}, p={dims.p}"
        )


def best_on_support(
    X: np.ndarray, Y: np.ndarray, S: Sequence[int]
) -> tuple[np.ndarray, float]:
    """Least-squares fit restricted to the columns in S.

    Returns the dense coefficient vector (zeros off S) and the l2 residual.
    Uses a thin QR factorization; rank-deficient column sets fall back to
    the minimum-norm solution.
    """
    p = X.shape[1]
    beta = np.zeros(p)
    S = np.asarray(sorted(S), dtype=np.int64)
    if S.size == 0:
        return beta, float(np.linalg.norm(Y))
    Xs = X[:, S]
    Q, R = np.linalg.qr(Xs)
    diag = np.abs(np.diag(R))
    if diag.size and diag.min() > 1e-12 * max(diag.max(), 1.0):
        coef = np.linalg.solve(R, Q.T @ Y)
    else:
        coef, *_ = np.linalg.lstsq(Xs, Y, rcond=None)
    beta[S] = coef
    return beta, float(np.linalg.norm(Y - Xs @ coef))


@dataclass(frozen=True)
class LevelStat:
    min_residual: float
    argmin_support: tuple[int, ...]


@dataclass(frozen=True)
class OverlapProfile:
    """Minimum fit residual per support-overlap level against the truth.

    ``levels[s]`` is the best residual among size-k supports sharing exactly
    s indices with the true support.  Exact profiles are true minima from
    exhaustive enumeration; sampled profiles are upper bounds on the minima.
    """

    k: int
    levels: dict[int, LevelStat]
    exact: bool

    def to_json(self) -> str:
        payload = {
            "schema_version": 1,
            "k": self.k,
            "exact": self.exact,
            "levels": {
                str(s): {
                    "min_residual": st.min_residual,
                    "support": list(st.argmin_support),
                }
                for s, st in sorted(self.levels.items())
            },
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["overlap", "min_residual", "support"])
            for s, st in sorted(self.levels.items()):
                writer.writerow(
                    [s, repr(st.min_residual), " ".join(map(str, st.argmin_support))]
                )


def overlap_profile(
    instance: Instance,
    mode: str = "exact",
    budget: int = 2_000_000,
    seed: int = 0,
) -> OverlapProfile:
    """Per-overlap-level minimum residuals over size-k supports.

    Exact mode enumerates every size-k support (refusing if the total count
    exceeds ``budget``); sampled mode draws ``budget`` uniform supports per
    level and reports the best seen, flagged ``exact=False``.
    """
    dims = instance.dims
    _require_landscape_dims(dims)
    X, Y = instance.X, instance.Y
    k, p = dims.k, dims.p
    star = np.asarray(instance.beta_star.indices)
    rest = np.setdiff1d(np.arange(p), star)
    levels: dict[int, LevelStat] = {}
    if mode == "exact":
        total = sum(overlap_level_count(k, p, s) for s in range(k + 1))
        check_budget(total, budget, f"exact overlap profile at p={p}, k={k}")
        for s in range(k + 1):
            best: LevelStat | None = None
            for support in enumerate_overlap_supports(star.tolist(), rest.tolist(), s, k):
                _, resid = best_on_support(X, Y, support)
                if best is None or resid < best.min_residual:
                    best = LevelStat(min_residual=resid, argmin_support=support)
            levels[s] = best
        return OverlapProfile(k=k, levels=levels, exact=True)
    if mode == "sampled":
        rng = make_generator(seed, "overlap-profile")
        for s in range(k + 1):
            best = None
            draws = 1 if overlap_level_count(k, p, s) == 1 else budget
            for _ in range(draws):
                support = sample_overlap_support(rng, star, rest, s, k)
                _, resid = best_on_support(X, Y, support)
                if best is None or resid < best.min_residual:
                    best = LevelStat(min_residual=resid, argmin_support=support)
            levels[s] = best
        return OverlapProfile(k=k, levels=levels, exact=False)
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class OgpReport:
    """Gap verdict for one radius r.

    ``holds`` requires: the truth fits below r, some disjoint-support vector
    fits below r, and an integer interval 0 < s1 < s2 < k of overlap levels
    at which no size-k support fits below r.  ``(zeta1, zeta2)`` is the
    longest such interval scaled by 1/k.  Sampled profiles can only refute,
    so their verdict is one of holds / fails / unknown, never a certified
    holds.
    """

    r: float
    holds: bool
    verdict: str
    zeta1: float | None
    zeta2: float | None
    witnesses: dict[str, tuple[int, ...]]
    gap_levels: tuple[int, int] | None

    def to_payload(self) -> dict:
        return {
            "r": self.r,
            "holds": self.holds,
            "verdict": self.verdict,
            "zeta1": self.zeta1,
            "zeta2": self.zeta2,
            "gap_levels": list(self.gap_levels) if self.gap_levels else None,
            "witnesses": {k: list(v) for k, v in self.witnesses.items()},
        }


def _longest_gap_run(gap: set[int], k: int) -> tuple[int, int] | None:
    """Longest run of consecutive gap levels inside [1, k-1] with length >= 2.

    Ties go to the smallest starting level.
    """
    best: tuple[int, int] | None = None
    s = 1
    while s < k:
        if s in gap:
            e = s
            while e + 1 < k and (e + 1) in gap:
                e += 1
            if e > s and (best is None or e - s > best[1] - best[0]):
                best = (s, e)
            s = e + 1
        else:
            s += 1
    return best


def ogp_check(
    profile: OverlapProfile, residual_at_beta_star: float, r: float
) -> OgpReport:
    """Evaluate the three gap conditions against an overlap profile."""
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    k = profile.k
    cond1 = residual_at_beta_star < r
    level0 = profile.levels[0]
    cond2 = level0.min_residual < r
    gap = {s for s in range(1, k) if profile.levels[s].min_residual >= r}
    run = _longest_gap_run(gap, k)
    witnesses = {
        "truth_support": profile.levels[k].argmin_support,
        "disjoint_support": level0.argmin_support,
    }
    if profile.exact:
        holds = cond1 and cond2 and run is not None
        return OgpReport(
            r=r,
            holds=holds,
            verdict="holds" if holds else "fails",
            zeta1=run[0] / k if holds else None,
            zeta2=run[1] / k if holds else None,
            witnesses=witnesses,
            gap_levels=run if holds else None,
        )
    # Sampled minima are upper bounds: a low sampled level disproves a gap
    # there, but a high one proves nothing.
    if not cond1:
        verdict = "fails"
    elif run is None:
        verdict = "fails"
    else:
        verdict = "unknown"
    return OgpReport(
        r=r,
        holds=False,
        verdict=verdict,
        zeta1=None,
        zeta2=None,
        witnesses=witnesses,
        gap_levels=run,
    )


def default_r_grid(w_norm: float, count: int = 40) -> np.ndarray:
    """Log-spaced radii spanning [0.5, 4] times the noise norm."""
    if w_norm <= 0:
        w_norm = 1.0
    return np.geomspace(0.5 * w_norm, 4.0 * w_norm, count)


def find_nontrivial_local_minima(instance: Instance, budget: int = 2_000_000) -> list[tuple[int, ...]]:
    """All size-k supports, other than the truth, that no single swap improves.

    A support S qualifies when its restricted least-squares residual is at
    most that of every S - {i} + {j} (i in S, j outside).  Exhaustive only:
    refuses when C(p, k) exceeds the budget.
    """
    dims = instance.dims
    _require_landscape_dims(dims)
    k, p = dims.k, dims.p
    check_budget(comb(p, k), budget, f"local-minimum enumeration at p={p}, k={k}")
    X, Y = instance.X, instance.Y
    resid: dict[tuple[int, ...], float] = {}
    for support in enumerate_supports(p, k):
        _, r = best_on_support(X, Y, support)
        resid[support] = r
    star = instance.beta_star.support
    out: list[tuple[int, ...]] = []
    for support, r in resid.items():
        if support == star:
            continue
        s_set = set(support)
        is_min = True
        for i in support:
            rest = s_set - {i}
            for j in range(p):
                if j in s_set:
                    continue
                neighbor = tuple(sorted(rest | {j}))
                if resid[neighbor] < r:
                    is_min = False
                    break
            if not is_min:
                break
        if is_min:
            out.append(support)
    return out


@dataclass(frozen=True)
class DlmTriplet:
    """Triplet (a, b, c) carried on pairwise disjoint index sets.

    S1, S2, S3 are super-supports of a, b, c; |S1| = |S2|, and when the
    sparsity parameter k is given, |S1| + |S2| + |S3| <= 3k applies.  The
    vectors may live in dimension p or p + 1 (one appended coordinate).
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    S1: tuple[int, ...]
    S2: tuple[int, ...]
    S3: tuple[int, ...]
    alpha: float
    k: int | None = None

    def validate(self) -> None:
        d = len(self.a)
        if len(self.b) != d or len(self.c) != d:
            raise ValueError("a, b, c must have equal length")
        s1, s2, s3 = set(self.S1), set(self.S2), set(self.S3)
        if not (s1 and s2 and s3):
            raise ValueError("S1, S2, S3 must be nonempty")
        if s1 & s2 or s1 & s3 or s2 & s3:
            raise ValueError("S1, S2, S3 must be pairwise disjoint")
        if len(s1) != len(s2):
            raise ValueError("|S1| must equal |S2|")
        for vec, s, name in ((self.a, s1, "a"), (self.b, s2, "b"), (self.c, s3, "c")):
            if not set(np.flatnonzero(vec).tolist()) <= s:
                raise ValueError(f"support of {name} must lie inside its index set")
        if self.k is not None and len(s1) + len(s2) + len(s3) > 3 * self.k:
            raise ValueError("|S1| + |S2| + |S3| exceeds 3k")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


def dlm_check(X: np.ndarray, triplet: DlmTriplet) -> bool:
    """Direct evaluation of the deviating-local-minimum inequality.

    True iff for every i in S1 and j in S2:

        ||(Xa - a_i X_i) + (Xb - b_j X_j) + Xc||^2
            >= ||Xa + Xb + Xc||^2 - alpha (||a||^2/|S1| + ||b||^2/|S2|) n
    """
    triplet.validate()
    n = X.shape[0]
    a, b, c = triplet.a, triplet.b, triplet.c
    Xa, Xb, Xc = X @ a, X @ b, X @ c
    total = Xa + Xb + Xc
    slack = triplet.alpha * (
        float(a @ a) / len(triplet.S1) + float(b @ b) / len(triplet.S2)
    ) * n
    rhs = float(total @ total) - slack
    for i in triplet.S1:
        partial = total - a[i] * X[:, i]
        for j in triplet.S2:
            vec = partial - b[j] * X[:, j]
            if float(vec @ vec) < rhs:
                return False
    return True


def dlm_aggregate_bound(X: np.ndarray, triplet: DlmTriplet, delta_3k: float) -> bool:
    """Summed form of the triplet inequality under a certified 3k-isometry constant.

    Evaluates ``||X(a+b)||^2 + 2 (Xc)'(X(a+b)) <= (alpha + 4 delta_3k)
    (||a||^2 + ||b||^2) n``.  That ``dlm_check`` implies this bound is a
    property the test suite verifies; it is not enforced here.
    """
    triplet.validate()
    n = X.shape[0]
    a, b, c = triplet.a, triplet.b, triplet.c
    Xab = X @ (a + b)
    Xc = X @ c
    lhs = float(Xab @ Xab) + 2.0 * float(Xc @ Xab)
    rhs = (triplet.alpha + 4.0 * delta_3k) * (float(a @ a) + float(b @ b)) * n
    return lhs <= rhs


@dataclass(frozen=True)
class PureNoiseFit:
    """Best exactly k'-sparse binary fit to a target vector."""

    beta: SparseVector
    scaled_residual: float
    paper_bound: float
    exact: bool


def pure_noise_best_fit(
    Yp: np.ndarray,
    X: np.ndarray,
    k_prime: int,
    mode: str = "exact",
    budget: int = 2_000_000,
    seed: int = 0,
    c: float = 1.0,
    var_y: float | None = None,
) -> PureNoiseFit:
    """Minimize ``n^{-1/2} ||Yp - X b||`` over exactly k'-sparse binary b.

    Exact mode enumerates all supports (budget-checked); greedy mode runs
    forward selection, flipping the single best coordinate to 1 per step for
    k' steps, and is flagged non-exact.  ``paper_bound`` evaluates the
    reference envelope ``exp(1/(2c)) sqrt(k' + var) exp(-k' log p / n)``
    with the supplied constant c and variance (sample variance of Yp by
    default); it is reported for comparison only, never asserted.
    """
    Yp = np.asarray(Yp, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    n, p = X.shape
    if not 1 <= k_prime <= p:
        raise ValueError(f"k_prime must lie in [1, p], got {k_prime}")
    if mode == "exact":
        check_budget(comb(p, k_prime), budget, f"binary fit enumeration at p={p}, k'={k_prime}")
        best_support: tuple[int, ...] | None = None
        best_resid = math.inf
        for support in enumerate_supports(p, k_prime):
            resid = float(np.linalg.norm(Yp - X[:, support].sum(axis=1)))
            if resid < best_resid:
                best_resid = resid
                best_support = support
        exact = True
    elif mode == "greedy":
        chosen: list[int] = []
        fit = np.zeros(n)
        for _ in range(k_prime):
            best_j = -1
            best_resid = math.inf
            for j in range(p):
                if j in chosen:
                    continue
                resid = float(np.linalg.norm(Yp - fit - X[:, j]))
                if resid < best_resid:
                    best_resid = resid
                    best_j = j
            chosen.append(best_j)
            fit += X[:, best_j]
        best_support = tuple(sorted(chosen))
        best_resid = float(np.linalg.norm(Yp - X[:, best_support].sum(axis=1)))
        exact = False
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if var_y is None:
        var_y = float(np.var(Yp, ddof=1))
    bound = (
        math.exp(1.0 / (2.0 * c))
        * math.sqrt(k_prime + var_y)
        * math.exp(-k_prime * math.log(p) / n)
    )
    beta = SparseVector(
        length=p, indices=np.array(best_support, dtype=np.int64), values=np.ones(k_prime)
    )
    return PureNoiseFit(
        beta=beta,
        scaled_residual=best_resid / math.sqrt(n),
        paper_bound=bound,
        exact=exact,
    )


@dataclass(frozen=True)
class CertificateReport:
    """A feasible mixed vector with prescribed l1 norm and small scaled residual.

    The construction mixes the binary truth (weight ``lambda_mix``) with a
    disjoint-support half-sparsity binary vector (weight ``1 - lambda_mix``)
    where ``lambda_mix = 1 - 4 C1 sqrt(sigma2/k)`` and
    ``C1 = exp(k log p / (5n))``.  By algebra the mix has l1 norm exactly
    ``k - 2 C1 sigma sqrt(k)``; it is ``valid`` when its scaled residual
    ``n^{-1/2} ||Y - X alpha||`` is at most sigma, which is what forces a
    small optimal l1 norm on the convex solvers.
    """

    C1: float
    lambda_mix: float
    alpha_vec: np.ndarray | None
    l1_norm: float | None
    scaled_residual: float | None
    valid: bool
    target_l1: float | None = None
    search_exact: bool | None = None
    disjoint_support: tuple[int, ...] = ()
    reason: str = ""

    def to_payload(self) -> dict:
        return {
            "C1": self.C1,
            "lambda_mix": self.lambda_mix,
            "l1_norm": self.l1_norm,
            "target_l1": self.target_l1,
            "scaled_residual": self.scaled_residual,
            "valid": self.valid,
            "search_exact": self.search_exact,
            "disjoint_support": list(self.disjoint_support),
            "reason": self.reason,
            "alpha": None if self.alpha_vec is None else self.alpha_vec.tolist(),
        }


def build_certificate(
    instance: Instance,
    search_mode: str = "exact",
    budget: int = 2_000_000,
    seed: int = 0,
) -> CertificateReport:
    """Construct the mixed vector witnessing a small optimal l1 norm.

    Requires a binary exactly k-sparse truth with k even.  When the mixing
    weight is not positive (noise too large for these dimensions) the report
    comes back invalid with a reason instead of raising.
    """
    dims = instance.dims
    _require_landscape_dims(dims)
    beta_star = instance.beta_star
    if not np.all(beta_star.values == 1.0):
        raise ValueError("certificate construction needs a binary truth vector")
    k = beta_star.nnz
    if k % 2 != 0:
        raise ValueError("certificate construction needs even k")
    n, p = dims.n, dims.p
    sigma = dims.sigma
    C1 = math.exp(k * math.log(p) / (5.0 * n))
    ratio = 4.0 * C1 * math.sqrt(dims.sigma2 / k)
    lambda_mix = 1.0 - ratio
    if lambda_mix <= 0.0:
        return CertificateReport(
            C1=C1,
            lambda_mix=lambda_mix,
            alpha_vec=None,
            l1_norm=None,
            scaled_residual=None,
            valid=False,
            reason=f"mixing weight 1 - 4 C1 sqrt(sigma2/k) = {lambda_mix:.4g} is not positive",
        )
    star = np.asarray(beta_star.indices)
    rest = np.setdiff1d(np.arange(p), star)
    alpha = lambda_mix * beta_star.to_dense()
    if dims.sigma2 == 0.0:
        # Degenerate mix: the disjoint part carries weight 0, alpha = truth,
        # and Y - X alpha is identically W.
        return CertificateReport(
            C1=C1,
            lambda_mix=lambda_mix,
            alpha_vec=alpha,
            l1_norm=float(np.abs(alpha).sum()),
            scaled_residual=float(np.linalg.norm(instance.W)) / math.sqrt(n),
            valid=True,
            target_l1=k - 2.0 * C1 * sigma * math.sqrt(k),
            search_exact=True,
            disjoint_support=(),
        )
    y_prime = instance.X @ beta_star.to_dense() + instance.W / (1.0 - lambda_mix)
    fit = pure_noise_best_fit(
        y_prime,
        instance.X[:, rest],
        k // 2,
        mode=search_mode,
        budget=budget,
        seed=seed,
    )
    disjoint = tuple(int(rest[j]) for j in fit.beta.indices)
    alpha[list(disjoint)] = 1.0 - lambda_mix
    search_exact = fit.exact
    l1 = float(np.abs(alpha).sum())
    scaled = float(np.linalg.norm(instance.Y - instance.X @ alpha)) / math.sqrt(n)
    return CertificateReport(
        C1=C1,
        lambda_mix=lambda_mix,
        alpha_vec=alpha,
        l1_norm=l1,
        scaled_residual=scaled,
        valid=scaled <= sigma,
        target_l1=k - 2.0 * C1 * sigma * math.sqrt(k),
        search_exact=search_exact,
        disjoint_support=disjoint,
    )


def with_noise_column(X: np.ndarray, W: np.ndarray, sigma: float) -> np.ndarray:
    """Append W/sigma as an extra column, giving an (n, p+1) design.

    Under this augmentation ``Y = X' [b*; sigma]``, which converts noisy
    instances into noiseless ones over p + 1 coordinates; triplet
    experiments use it to study swap stability with the noise made explicit.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return np.hstack([X, (W / sigma)[:, None]])
