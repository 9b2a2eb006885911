"""Least-squares fits of gap-ratio curves to the crossover surmise.

Two model shapes: "scale-shift" fits r~(a x) + b and
"scale-shift-amplitude" fits c r~(a x) + b, where r~ is the analytic
crossover gap-ratio curve.  The solver is a small Levenberg-Marquardt
loop on the normal equations with central-difference Jacobians; accepted
steps never increase the residual sum of squares.

The physically meaningful window of the models is tau = a x <= 1, so
``fit_crossover_with_range`` re-restricts the data to x <= 1/a and refits
until the included set stabilizes (at most 5 passes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficiencyError
from .spectra import R_TILDE_GOE_SURMISE, R_TILDE_GUE_SURMISE, crossover_r_tilde

MODEL_SCALE_SHIFT = "scale-shift"
MODEL_SCALE_SHIFT_AMPLITUDE = "scale-shift-amplitude"

# curve value halfway between the surmise endpoints sits at this tau;
# used to seed the scale parameter from the data's own midpoint crossing
_TAU_MIDPOINT = 0.2844


def _eval_scale_shift(x, p):
    return crossover_r_tilde(np.clip(p[0] * x, 0.0, None)) + p[1]


def _eval_scale_shift_amplitude(x, p):
    return p[2] * crossover_r_tilde(np.clip(p[0] * x, 0.0, None)) + p[1]


MODELS = {
    MODEL_SCALE_SHIFT: (("a", "b"), _eval_scale_shift),
    MODEL_SCALE_SHIFT_AMPLITUDE: (("a", "b", "c"), _eval_scale_shift_amplitude),
}


@dataclass(frozen=True)
class FitResult:
    """Converged parameters of one crossover-curve fit."""

    model: str
    params: np.ndarray
    stderr: np.ndarray
    rss: float
    n_points: int
    iterations: int
    converged: bool
    fit_range: tuple
    rss_trace: tuple

    def named(self) -> dict:
        names, _ = MODELS[self.model]
        return dict(zip(names, self.params))


def model_names(model: str):
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    return MODELS[model][0]


def fit_range_from_scale(a: float) -> tuple:
    """Validity window (0, 1/a) of the crossover model for scale a."""
    if a <= 0:
        raise ValueError(f"scale parameter must be positive, got {a}")
    return (0.0, 1.0 / a)


def _jacobian(fn, x, p):
    jac = np.empty((x.size, p.size))
    for j in range(p.size):
        h = max(1e-6, 1e-6 * abs(p[j]))
        pp = p.copy()
        pp[j] += h
        pm = p.copy()
        pm[j] -= h
        jac[:, j] = (fn(x, pp) - fn(x, pm)) / (2.0 * h)
    return jac


def _gradient_small(jac, r, gtol: float) -> bool:
    # scale-invariant test: every column of the Jacobian is nearly
    # orthogonal to the residual, |J_j . r| <= gtol |J_j| |r|
    grad = jac.T @ r
    scale = np.sqrt(np.sum(jac * jac, axis=0)) * np.sqrt(r @ r)
    return bool(np.all(np.abs(grad) <= gtol * scale + 1e-300))


def fit_crossover(
    x,
    y,
    model: str = MODEL_SCALE_SHIFT,
    p0=None,
    sigma=None,
    max_iter: int = 200,
    gtol: float = 1e-6,
) -> FitResult:
    """Levenberg-Marquardt fit of one gap-ratio curve.

    ``sigma`` holds per-point standard errors used as inverse weights.
    ``converged`` means the scaled gradient passed |J_j . r| <=
    gtol |J_j| |r| for every parameter, or the weighted residual norm
    reached the rounding floor 1e-12 |w y|.  Raises
    RankDeficiencyError when the normal matrix is singular.
    """
    names, fn = MODELS[model] if model in MODELS else (None, None)
    if fn is None:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    if x.size < len(names) + 1:
        raise ValueError(f"need more than {len(names)} points to fit {model}")
    with np.errstate(divide="ignore"):
        w = np.ones_like(x) if sigma is None else 1.0 / np.asarray(sigma, dtype=float)
    if np.any(~np.isfinite(w)):
        raise ValueError("sigma entries must be finite and nonzero")
    p = np.asarray(p0, dtype=float) if p0 is not None else _default_start(x, y, model)
    if p.shape != (len(names),):
        raise ValueError(f"p0 must have {len(names)} entries for {model}")

    def residual(pv):
        return (fn(x, pv) - y) * w

    r = residual(p)
    rss = float(r @ r)
    trace = [rss]
    lam = 1e-3
    # residuals at the rounding scale of the weighted data carry no
    # gradient information, so treat them as converged outright
    rss_floor = 1e-24 * float(np.sum((w * y) ** 2))
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        jac = _jacobian(fn, x, p) * w[:, None]
        if rss <= rss_floor or _gradient_small(jac, r, gtol):
            converged = True
            break
        grad = jac.T @ r
        normal = jac.T @ jac
        stepped = False
        stalled = False
        for _ in range(40):
            damped = normal + lam * np.diag(np.diag(normal))
            try:
                delta = np.linalg.solve(damped, -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            candidate = p + delta
            rc = residual(candidate)
            rss_c = float(rc @ rc)
            if rss_c <= rss:
                improvement = rss - rss_c
                p, r, rss = candidate, rc, rss_c
                trace.append(rss)
                lam = max(lam / 3.0, 1e-12)
                stepped = True
                stalled = improvement <= 1e-14 * max(rss, 1e-300)
                break
            lam *= 10.0
            if lam > 1e14:
                break
        if not stepped or stalled:
            break

    jac = _jacobian(fn, x, p) * w[:, None]
    if not converged:
        # stalled or ran out of iterations; the final point may still
        # satisfy the gradient criterion
        converged = rss <= rss_floor or _gradient_small(jac, r, gtol)
    normal = jac.T @ jac
    try:
        cov = np.linalg.inv(normal)
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(
            f"normal matrix of the {model} fit is singular; parameters are degenerate on this data"
        ) from exc
    dof = max(x.size - p.size, 1)
    cov = cov * (rss / dof)
    stderr = np.sqrt(np.maximum(np.diag(cov), 0.0))
    return FitResult(
        model=model,
        params=p,
        stderr=stderr,
        rss=rss,
        n_points=int(x.size),
        iterations=iterations,
        converged=converged,
        fit_range=(float(x.min()), float(x.max())),
        rss_trace=tuple(trace),
    )


def _default_start(x, y, model: str) -> np.ndarray:
    ymid = 0.5 * (np.min(y) + np.max(y))
    above = np.nonzero(y >= ymid)[0]
    if above.size and above[0] > 0:
        i = above[0]
        x0, x1 = x[i - 1], x[i]
        y0, y1 = y[i - 1], y[i]
        xmid = x0 + (ymid - y0) * (x1 - x0) / max(y1 - y0, 1e-300)
    else:
        xmid = float(np.median(x))
    a0 = _TAU_MIDPOINT / max(xmid, 1e-12)
    if model == MODEL_SCALE_SHIFT:
        return np.array([a0, 0.0])
    span = max(np.max(y) - np.min(y), 1e-6)
    c0 = span / (R_TILDE_GUE_SURMISE - R_TILDE_GOE_SURMISE)
    return np.array([a0, float(np.min(y) - c0 * R_TILDE_GOE_SURMISE), c0])


def fit_crossover_with_range(
    x,
    y,
    model: str = MODEL_SCALE_SHIFT,
    p0=None,
    sigma=None,
    max_passes: int = 5,
) -> FitResult:
    """Fit, restrict to the model's validity window x <= 1/a, refit.

    Stops when the included point set repeats or after max_passes.  The
    returned result carries the final window as ``fit_range``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sig = None if sigma is None else np.asarray(sigma, dtype=float)
    names = model_names(model)
    mask = np.ones(x.size, dtype=bool)
    result = None
    for _ in range(max_passes):
        result = fit_crossover(
            x[mask], y[mask], model=model, p0=p0,
            sigma=None if sig is None else sig[mask],
        )
        p0 = result.params
        a = result.params[0]
        if a <= 0:
            break
        lo, hi = fit_range_from_scale(a)
        new_mask = (x >= lo) & (x <= hi)
        if new_mask.sum() < len(names) + 1 or np.array_equal(new_mask, mask):
            mask = mask if new_mask.sum() < len(names) + 1 else new_mask
            break
        mask = new_mask
    lo, hi = (0.0, float(x[mask].max()))
    if result.params[0] > 0:
        lo, hi = fit_range_from_scale(result.params[0])
    return FitResult(
        model=result.model,
        params=result.params,
        stderr=result.stderr,
        rss=result.rss,
        n_points=result.n_points,
        iterations=result.iterations,
        converged=result.converged,
        fit_range=(lo, hi),
        rss_trace=result.rss_trace,
    )
