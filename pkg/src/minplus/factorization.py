"""Min-plus low-rank approximation.

Three routes to a rank-m factorization:

* actual waypoints: pick m columns of a distance matrix D and score
  D(:,W) (x) D(:,W)^T, the shortest distances forced through the chosen
  waypoint set W;
* symmetric virtual waypoints: minimize ||D - F (x) F^T||_F over a free
  n x m factor F by smoothed Newton steps. With the per-row argmin columns
  frozen, the objective is an ordinary quadratic; a fixed number of Jacobi
  sweeps approximates its minimizer and an undershooting convex
  combination (factor mu) damps the move so selector flips cannot cycle;
* general alternation: minimize ||M - A (x) B||_F by alternating 2-norm
  regression sweeps over the columns of B and the rows of A.

Everything is seeded; multi-restart drivers derive one child generator
per restart so results are independent of execution order.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import TropicalMatrix, _data_of, _mp, frobenius_distance, is_idempotent
from .errors import DomainError, ShapeError
from .regression import RegressionConfig, chebyshev_regression, newton_directed_line_search

INFEASIBLE_HINT = "cap infinite entries first (the CLI exposes --cap for this)"


@dataclass
class FactorPair:
    """A factorization M ≈ left (x) right with its achieved residual."""

    left: TropicalMatrix
    right: TropicalMatrix
    residual: float
    restarts_used: int
    iteration_trace: tuple[float, ...]


@dataclass
class SymFactorConfig:
    """Parameters of the symmetric factorization driver.

    rank is the number of virtual waypoints; jacobi_steps is the number of
    Jacobi sweeps per Newton approximation; shoot is the undershooting
    weight mu of the convex-combination step. When the residual fails to
    improve for decay_patience consecutive iterations, mu is multiplied by
    mu_decay down to mu_floor. tol is an early-exit residual target.
    """

    rank: int
    jacobi_steps: int = 5
    shoot: float = 0.5
    max_iter: int = 100
    restarts: int = 100
    seed: int = 0
    tol: float = 0.0
    mu_decay: float = 0.5
    decay_patience: int = 5
    mu_floor: float = 1e-3

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if self.jacobi_steps < 1:
            raise ValueError("jacobi_steps must be >= 1")
        if not (0.0 < self.shoot <= 1.0):
            raise ValueError("shoot must lie in (0, 1]")
        if self.max_iter < 1 or self.restarts < 1:
            raise ValueError("max_iter and restarts must be >= 1")


@dataclass
class NonsymFactorConfig:
    """Parameters of the alternating general factorization.

    By default row sweeps over A use the B from the previous outer
    iteration; gauss_seidel=True uses the freshly updated B instead, which
    makes every half-sweep non-increasing. init optionally supplies
    (A0, B0) arrays for the first restart in place of the kmeans start.
    """

    max_iter: int = 100
    tol: float = 1e-8
    restarts: int = 1
    seed: int = 0
    gauss_seidel: bool = False
    inner_max_iter: int = 50
    kmeans_max_iter: int = 50
    init: tuple[np.ndarray, np.ndarray] | None = None


def _check_symmetric_distance(D: TropicalMatrix, *, require_finite: bool = True) -> np.ndarray:
    d = _data_of(D)
    if d.shape[0] != d.shape[1]:
        raise ShapeError(f"expected a square matrix, got {d.shape}")
    if not np.array_equal(d, d.T):
        raise ShapeError("matrix is not symmetric")
    if require_finite and not np.isfinite(d).all():
        raise DomainError(f"matrix has non-finite entries; {INFEASIBLE_HINT}")
    return d


def _warn_if_not_idempotent(D: TropicalMatrix) -> None:
    if not is_idempotent(D, tol=1e-9):
        warnings.warn(
            "input is not idempotent; waypoint factorizations are meant for "
            "shortest-path distance matrices",
            UserWarning,
            stacklevel=3,
        )


def _waypoint_product(d: np.ndarray, waypoints: tuple[int, ...]) -> tuple[np.ndarray, float]:
    left = d[:, list(waypoints)]
    product = _mp(left, left.T)
    residual = float(np.sqrt(np.sum((d - product) ** 2)))
    return left, residual


def actual_waypoint(D: TropicalMatrix, W) -> FactorPair:
    """Score a fixed waypoint set: left = D(:,W), right = left^T.

    Entry (i,j) of the product is the shortest i-to-j distance constrained
    to pass through at least one waypoint in W, so the product dominates D
    entrywise and is exact on rows and columns indexed by W.
    """
    d = _check_symmetric_distance(D)
    _warn_if_not_idempotent(D)
    waypoints = tuple(int(w) for w in W)
    n = d.shape[0]
    if len(waypoints) == 0:
        raise ValueError("waypoint set must not be empty")
    if len(set(waypoints)) != len(waypoints):
        raise ValueError("waypoint indices must be distinct")
    for w in waypoints:
        if not (0 <= w < n):
            raise IndexError(f"waypoint index {w} outside 0..{n - 1}")
    left, residual = _waypoint_product(d, waypoints)
    return FactorPair(
        left=TropicalMatrix(left),
        right=TropicalMatrix(left.T),
        residual=residual,
        restarts_used=0,
        iteration_trace=(residual,),
    )


def actual_waypoint_search(
    D: TropicalMatrix, m: int, budget: int = 10000, seed: int = 0
) -> tuple[tuple[int, ...], FactorPair]:
    """Best waypoint set of size m: exhaustive when C(n,m) fits the budget,
    otherwise seeded uniform sampling of budget subsets.

    Ties break toward the lexicographically smallest W.
    """
    d = _check_symmetric_distance(D)
    _warn_if_not_idempotent(D)
    n = d.shape[0]
    if not (1 <= m <= n):
        raise ValueError(f"rank must lie in 1..{n}")
    total = math.comb(n, m)
    if total <= budget:
        candidates = itertools.combinations(range(n), m)
        evaluated = total
    else:
        rng = np.random.default_rng([seed])
        candidates = (
            tuple(int(w) for w in np.sort(rng.choice(n, size=m, replace=False)))
            for _ in range(budget)
        )
        evaluated = budget
    best_w: tuple[int, ...] | None = None
    best_left = None
    best_res = np.inf
    for w in candidates:
        w = tuple(w)
        left, res = _waypoint_product(d, w)
        if res < best_res or (res == best_res and (best_w is None or w < best_w)):
            best_w, best_left, best_res = w, left, res
    assert best_w is not None and best_left is not None
    pair = FactorPair(
        left=TropicalMatrix(best_left),
        right=TropicalMatrix(best_left.T),
        residual=best_res,
        restarts_used=evaluated,
        iteration_trace=(best_res,),
    )
    return best_w, pair


def _jacobi_setup(d: np.ndarray, f: np.ndarray):
    """Selector tables for the quadratic frozen at factor f.

    K[i,j] is the smallest column attaining min_k(f_ik + f_jk). The
    returned pieces let one Jacobi sweep run as dense array arithmetic.
    """
    n, m = f.shape
    pair_values = f[:, None, :] + f[None, :, :]
    selectors = pair_values.argmin(axis=2)
    one_hot = selectors[:, :, None] == np.arange(m)[None, None, :]
    diag = np.arange(n)
    diag_hot = one_hot[diag, diag, :]  # 1_ik: does row i anchor column k
    cross_count = one_hot.sum(axis=1) - diag_hot
    static_num = np.einsum("ijk,ij->ik", one_hot, d) - diag_hot * d[diag, diag][:, None]
    denominator = 2.0 * diag_hot + cross_count
    return one_hot, diag_hot, static_num, denominator, diag


def _jacobi_apply(d: np.ndarray, setup, fp: np.ndarray) -> np.ndarray:
    """One Jacobi sweep of the frozen quadratic's normal equations.

    Entry (i,k) becomes (d_ii*1_ik + sum_{j != i, K(i,j)=k} (d_ij - fp_jk))
    / (2*1_ik + #{j != i : K(i,j)=k}); zero denominators copy fp.
    """
    one_hot, diag_hot, static_num, denominator, diag = setup
    cross = np.einsum("ijk,jk->ik", one_hot, fp) - diag_hot * fp
    numerator = d[diag, diag][:, None] * diag_hot + static_num - cross
    return np.where(denominator > 0, numerator / np.where(denominator > 0, denominator, 1.0), fp)


def jacobi_map(D: TropicalMatrix, F: TropicalMatrix, Fp: TropicalMatrix) -> TropicalMatrix:
    """One Jacobi sweep with selectors frozen at F, applied to values Fp.

    Iterating this map with F held fixed converges to the minimizer of the
    frozen quadratic q_F (its constrained coordinates; untouched ones are
    copied through).
    """
    d = _data_of(D)
    f, fp = _data_of(F), _data_of(Fp)
    if d.shape[0] != d.shape[1]:
        raise ShapeError(f"expected a square matrix, got {d.shape}")
    if f.shape != fp.shape or f.shape[0] != d.shape[0]:
        raise ShapeError(f"factor shapes disagree: D {d.shape}, F {f.shape}, Fp {fp.shape}")
    if not (np.isfinite(d).all() and np.isfinite(f).all() and np.isfinite(fp).all()):
        raise DomainError("jacobi_map needs finite inputs")
    return TropicalMatrix(_jacobi_apply(d, _jacobi_setup(d, f), fp))


def _sym_run(d: np.ndarray, f0: np.ndarray, cfg: SymFactorConfig):
    """One restart of the symmetric driver; returns (best F, residual, trace).

    The trace records the best residual seen up to each iteration, so it
    is non-increasing by construction.
    """
    f = f0.astype(float).copy()
    best_res = float(np.sqrt(np.sum((d - _mp(f, f.T)) ** 2)))
    best_f = f.copy()
    trace = [best_res]
    mu = cfg.shoot
    stall = 0
    for _ in range(cfg.max_iter):
        if best_res <= cfg.tol:
            break
        setup = _jacobi_setup(d, f)
        fp = f.copy()
        for _ in range(cfg.jacobi_steps):
            fp = _jacobi_apply(d, setup, fp)
        f = mu * fp + (1.0 - mu) * f
        res = float(np.sqrt(np.sum((d - _mp(f, f.T)) ** 2)))
        if res < best_res:
            best_res = res
            best_f = f.copy()
            stall = 0
        else:
            stall += 1
            if stall >= cfg.decay_patience:
                mu = max(mu * cfg.mu_decay, cfg.mu_floor)
                stall = 0
        trace.append(best_res)
    return best_f, best_res, trace


def sym_factorize(
    D: TropicalMatrix, cfg: SymFactorConfig, extra_inits: tuple[np.ndarray, ...] = ()
) -> FactorPair:
    """Symmetric virtual-waypoint factorization D ≈ F (x) F^T.

    Each restart draws a waypoint set W uniformly (seeded per restart) and
    starts from F = D(:,W). Per iteration the selectors are frozen at the
    current factor, jacobi_steps Jacobi sweeps approximate the frozen
    quadratic's minimizer, and the factor moves by the undershooting
    combination mu*new + (1-mu)*current. The best iterate over all
    restarts wins; ties keep the earliest restart. extra_inits supplies
    additional deterministic starting factors (used by the rank-sweep CLI
    to warm-start from the previous rank).
    """
    d = _check_symmetric_distance(D)
    _warn_if_not_idempotent(D)
    n = d.shape[0]
    if cfg.rank > n:
        raise ValueError(f"rank {cfg.rank} exceeds matrix size {n}")
    best: tuple[float, np.ndarray, list[float]] | None = None
    runs = 0
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        waypoints = rng.choice(n, size=cfg.rank, replace=False)
        f0 = d[:, waypoints]
        f, res, trace = _sym_run(d, f0, cfg)
        runs += 1
        if best is None or res < best[0]:
            best = (res, f, trace)
        if best[0] <= cfg.tol:
            break
    if best is None or best[0] > cfg.tol:
        for f0 in extra_inits:
            f0 = np.asarray(f0, dtype=float)
            if f0.shape != (n, cfg.rank):
                raise ShapeError(f"extra init shape {f0.shape} is not ({n}, {cfg.rank})")
            if not np.isfinite(f0).all():
                raise DomainError("extra inits must be finite")
            f, res, trace = _sym_run(d, f0, cfg)
            runs += 1
            if best is None or res < best[0]:
                best = (res, f, trace)
            if best[0] <= cfg.tol:
                break
    assert best is not None
    res, f, trace = best
    return FactorPair(
        left=TropicalMatrix(f),
        right=TropicalMatrix(f.T),
        residual=res,
        restarts_used=runs,
        iteration_trace=tuple(trace),
    )


def residual_of_given_factor(D: TropicalMatrix, F: TropicalMatrix) -> float:
    """||D - F (x) F^T||_F for a user-supplied factor."""
    d = _data_of(D)
    f = _data_of(F)
    if d.shape[0] != d.shape[1]:
        raise ShapeError(f"expected a square matrix, got {d.shape}")
    if f.shape[0] != d.shape[0]:
        raise ShapeError(f"factor has {f.shape[0]} rows, matrix has {d.shape[0]}")
    return frobenius_distance(D, TropicalMatrix(_mp(f, f.T)))


def _kmeans_columns(m_data: np.ndarray, k: int, rng: np.random.Generator, max_iter: int) -> np.ndarray:
    """Cluster the columns of m_data (points in R^n) into k centers.

    Seeding picks centers with probability proportional to squared
    distance from the chosen set; empty clusters are re-seeded to the
    point farthest from its assigned center. Returns centers as columns.
    """
    points = m_data.T
    count = points.shape[0]
    first = int(rng.integers(count))
    center_idx = [first]
    d2 = np.sum((points - points[first]) ** 2, axis=1)
    while len(center_idx) < k:
        total = float(d2.sum())
        if total > 0.0:
            probs = d2 / total
            nxt = int(rng.choice(count, p=probs))
        else:
            nxt = int(rng.integers(count))
        center_idx.append(nxt)
        d2 = np.minimum(d2, np.sum((points - points[nxt]) ** 2, axis=1))
    centers = points[center_idx].astype(float).copy()
    assign = None
    for _ in range(max_iter):
        dist = np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_assign = dist.argmin(axis=1)
        to_center = dist[np.arange(count), new_assign].copy()
        for c in range(k):
            if not (new_assign == c).any():
                farthest = int(to_center.argmax())
                centers[c] = points[farthest]
                new_assign[farthest] = c
                to_center[farthest] = -1.0
        if assign is not None and (new_assign == assign).all():
            break
        assign = new_assign
        for c in range(k):
            members = points[assign == c]
            if len(members):
                centers[c] = members.mean(axis=0)
    return centers.T


def nonsym_factorize(M: TropicalMatrix, m: int, cfg: NonsymFactorConfig | None = None) -> FactorPair:
    """General factorization M ≈ A (x) B by alternating regression.

    A starts from kmeans centers of M's columns; B starts from the
    sup-norm solutions against that A. Then columns of B and rows of A are
    refined in turn by the 2-norm solver, warm-started at their previous
    values; by default the row sweep regresses against the previous outer
    iteration's B. The best pair ever seen (initialization included) is
    returned, so the residual never exceeds the initialization's.
    """
    cfg = cfg or NonsymFactorConfig()
    m_mat = _data_of(M)
    if not np.isfinite(m_mat).all():
        raise DomainError(f"matrix has non-finite entries; {INFEASIBLE_HINT}")
    n, d_cols = m_mat.shape
    if not (1 <= m <= min(n, d_cols)):
        raise ValueError(f"rank must lie in 1..{min(n, d_cols)}")
    inner_cfg = RegressionConfig(max_iter=cfg.inner_max_iter)
    best: tuple[float, np.ndarray, np.ndarray, list[float]] | None = None
    runs = 0
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        if cfg.init is not None and r == 0:
            a = np.asarray(cfg.init[0], dtype=float).copy()
            b = np.asarray(cfg.init[1], dtype=float).copy()
            if a.shape != (n, m) or b.shape != (m, d_cols):
                raise ShapeError(
                    f"init shapes {a.shape}, {b.shape} do not match ({n},{m}), ({m},{d_cols})"
                )
            if not (np.isfinite(a).all() and np.isfinite(b).all()):
                raise DomainError("init factors must be finite")
        else:
            a = _kmeans_columns(m_mat, m, rng, cfg.kmeans_max_iter)
            b = np.empty((m, d_cols))
            a_trop = TropicalMatrix(a)
            for j in range(d_cols):
                b[:, j] = chebyshev_regression(a_trop, m_mat[:, j]).solution
        res = float(np.sqrt(np.sum((m_mat - _mp(a, b)) ** 2)))
        trace = [res]
        run_best = (res, a.copy(), b.copy())
        for _ in range(cfg.max_iter):
            a_prev, b_prev = a.copy(), b.copy()
            a_trop = TropicalMatrix(a)
            for j in range(d_cols):
                b[:, j] = newton_directed_line_search(
                    a_trop, m_mat[:, j], x0=b[:, j], cfg=inner_cfg
                ).solution
            res = float(np.sqrt(np.sum((m_mat - _mp(a, b)) ** 2)))
            trace.append(res)
            if res < run_best[0]:
                run_best = (res, a.copy(), b.copy())
            b_for_rows = b if cfg.gauss_seidel else b_prev
            bt_trop = TropicalMatrix(b_for_rows.T)
            for i in range(n):
                a[i, :] = newton_directed_line_search(
                    bt_trop, m_mat[i, :], x0=a[i, :], cfg=inner_cfg
                ).solution
            res = float(np.sqrt(np.sum((m_mat - _mp(a, b)) ** 2)))
            trace.append(res)
            if res < run_best[0]:
                run_best = (res, a.copy(), b.copy())
            change = max(
                float(np.max(np.abs(a - a_prev), initial=0.0)),
                float(np.max(np.abs(b - b_prev), initial=0.0)),
            )
            if change < cfg.tol:
                break
        runs += 1
        if best is None or run_best[0] < best[0]:
            best = (run_best[0], run_best[1], run_best[2], trace)
    assert best is not None
    res, a, b, trace = best
    return FactorPair(
        left=TropicalMatrix(a),
        right=TropicalMatrix(b),
        residual=res,
        restarts_used=runs,
        iteration_trace=tuple(trace),
    )
