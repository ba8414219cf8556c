"""Circle fitting over sliding trajectory windows.

Two fitters share one algebraic core: the classic least-squares fit
(squared-radius residuals, reduced to a 3x3 linear solve) and a
resilient variant that adds per-point offsets ``a_t`` with an l1
penalty so sparse outliers are absorbed instead of dragging the fit.

The resilient objective, after substituting z = x0^2 + y0^2 - r^2,

    sum_t (L_t + a_t)^2 + lam * sum_t |a_t|,
    L_t = (x_t^2 + y_t^2) - (2 x_t x0 + 2 y_t y0 - z),

is jointly convex in (x0, y0, z, a).  Block coordinate descent
alternates an exact 3x3 solve for (x0, y0, z) with the closed-form
soft threshold a_t = S_{lam/2}(-L_t), so the objective never increases.

Data is centered on its centroid internally; this keeps the normal
matrix conditioning geometric (collinearity detection) and makes the
fits translation-equivariant to float precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

COND_LIMIT = 1e12


class FitError(RuntimeError):
    """Raised when a window admits no well-posed circle fit."""


@dataclass(frozen=True)
class PointWindow:
    """A sliding window of trajectory points, oldest first."""

    points: np.ndarray
    timestamps: np.ndarray | None = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be (N, 2), got {pts.shape}")
        if len(pts) < 3:
            raise ValueError(f"need at least 3 points, got {len(pts)}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        if self.timestamps is not None:
            ts = np.asarray(self.timestamps, dtype=float)
            if ts.shape != (len(pts),):
                raise ValueError("timestamps must match point count")
            if np.any(np.diff(ts) <= 0):
                raise ValueError("timestamps must be strictly increasing")
            object.__setattr__(self, "timestamps", ts)

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class CircleFit:
    """Fitted circle plus per-point outlier offsets and diagnostics."""

    x0: float
    y0: float
    r: float
    a: np.ndarray
    iterations: int
    converged: bool
    residual: float
    objective_history: list[float] = field(default_factory=list)

    @property
    def center(self) -> tuple[float, float]:
        return (self.x0, self.y0)


def _design(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Centered design matrix M, target b, and the centroid shift."""
    mean = pts.mean(axis=0)
    q = pts - mean
    b = q[:, 0] ** 2 + q[:, 1] ** 2
    M = np.column_stack([2.0 * q[:, 0], 2.0 * q[:, 1], -np.ones(len(q))])
    return M, b, mean


def _solve_block(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    G = M.T @ M
    if np.linalg.cond(G) > COND_LIMIT:
        raise FitError("degenerate window: points are (nearly) collinear")
    return np.linalg.solve(G, M.T @ rhs)


def _radius(p: np.ndarray) -> float:
    r2 = p[0] * p[0] + p[1] * p[1] - p[2]
    if r2 <= 0.0:
        raise FitError(f"fit produced non-positive squared radius {r2:.3e}")
    return float(np.sqrt(r2))


def kasa_fit(w: PointWindow) -> CircleFit:
    """Least-squares circle through a window: one 3x3 normal solve.

    Minimizes the squared-radius residuals sum((r_t^2 - r^2)^2).  All
    offsets ``a`` come back zero.  Raises FitError on collinear windows
    or when the recovered squared radius is non-positive.
    """
    M, b, mean = _design(w.points)
    p = _solve_block(M, b)
    r = _radius(p)
    resid = float(np.sum((b - M @ p) ** 2))
    return CircleFit(
        x0=float(p[0] + mean[0]),
        y0=float(p[1] + mean[1]),
        r=r,
        a=np.zeros(len(w)),
        iterations=0,
        converged=True,
        residual=resid,
        objective_history=[resid],
    )


def _soft_threshold(v: np.ndarray, thresh: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - thresh, 0.0)


def _bcd(
    M: np.ndarray, b: np.ndarray, lam: float, tol: float, max_iter: int
) -> tuple[np.ndarray, np.ndarray, int, bool, list[float]]:
    """Block coordinate descent on the resilient objective at fixed lam."""
    a = np.zeros(len(b))
    p = _solve_block(M, b)
    history: list[float] = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p_prev, a_prev = p, a
        L = b - M @ p
        a = _soft_threshold(-L, lam / 2.0)
        p = _solve_block(M, b + a)
        obj = float(np.sum((b + a - M @ p) ** 2) + lam * np.sum(np.abs(a)))
        history.append(obj)
        delta = max(np.max(np.abs(p - p_prev)), np.max(np.abs(a - a_prev)))
        if delta < tol:
            converged = True
            break
    return p, a, it, converged, history


def default_lambda(w: PointWindow, rounds: int = 5) -> float:
    """Scale-aware default weight: 2x the median absolute residual.

    The residual scale is first estimated from a plain least-squares
    pass, then re-estimated from the resilient fit it implies, iterating
    to a fixed point (at most ``rounds`` times).  The re-estimation
    matters under corruption: the initial pass is dragged by the very
    outliers the weight is supposed to isolate, which inflates the
    median.  On clean windows the first estimate is already the fixed
    point.
    """
    M, b, _ = _design(w.points)
    p = _solve_block(M, b)
    lam = 2.0 * float(np.median(np.abs(b - M @ p)))
    if lam <= 0.0:
        # exactly fitting window: any positive weight leaves a = 0
        return 1e-9 * max(1.0, float(np.max(np.abs(b))))
    for _ in range(rounds):
        p, _a, _it, _conv, _hist = _bcd(M, b, lam, tol=1e-8, max_iter=200)
        lam_new = 2.0 * float(np.median(np.abs(b - M @ p)))
        if lam_new <= 0.0:
            break
        done = abs(lam_new - lam) <= 0.05 * lam
        lam = lam_new
        if done:
            break
    return lam


def resilient_fit(
    w: PointWindow,
    lam: float | None = None,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> CircleFit:
    """Outlier-tolerant circle fit with l1-penalized per-point offsets.

    ``lam`` weights the l1 term; ``None`` selects it via
    :func:`default_lambda`.  ``lam == 0`` is rejected: the objective is
    then degenerate (any circle reaches zero by absorbing all residual
    into ``a``).  If the iteration limit is hit the best iterate is
    returned with ``converged=False``.
    """
    if lam is None:
        lam = default_lambda(w)
    if not lam > 0.0:
        raise ValueError(f"lam must be positive, got {lam!r}")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    M, b, mean = _design(w.points)
    p, a, it, converged, history = _bcd(M, b, lam, tol, max_iter)
    r = _radius(p)
    return CircleFit(
        x0=float(p[0] + mean[0]),
        y0=float(p[1] + mean[1]),
        r=r,
        a=a,
        iterations=it,
        converged=converged,
        residual=history[-1],
        objective_history=history,
    )
