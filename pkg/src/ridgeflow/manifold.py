"""Geometry of volume-preserving linear maps and the rank-reduction descent.

The search space is the group of determinant-one matrices; tangent
vectors at the identity are traceless matrices, the metric is the
Frobenius pairing transported by the base point, and the retraction is
the matrix exponential (which preserves the determinant exactly for
traceless generators).

``gradient_descent`` integrates the coordinate-flow PDE for the tensor
with a step-truncation scheme, reading the descent generator off each
truncation, until the backward-difference slope of the singular-value
sum rises above ``-eta``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NumericalError
from .tt import FttTensor, TruncationResult, advect_linear_rhs, linear_combine, truncate

__all__ = [
    "CoordinateMap",
    "DescentConfig",
    "DescentTrace",
    "DescentHistory",
    "tangent_project",
    "riemannian_metric",
    "matrix_exponential",
    "backward_difference",
    "descent_step",
    "gradient_descent",
]

_TRACE_TOL = 1e-10


def tangent_project(w):
    """Remove the trace component: W - (trace W / d) I."""
    w = np.asarray(w, dtype=float)
    d = w.shape[0]
    return w - (np.trace(w) / d) * np.eye(d)


def riemannian_metric(v, w, a):
    """Metric (V, W)_A = trace((V A^-1)(W A^-1)^T)."""
    a = np.asarray(a, dtype=float)
    try:
        va = np.linalg.solve(a.T, np.asarray(v, dtype=float).T).T
        wa = np.linalg.solve(a.T, np.asarray(w, dtype=float).T).T
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular-base-point: A must be invertible") from exc
    return float(np.sum(va * wa))


def matrix_exponential(m):
    """Matrix exponential by scaling and squaring."""
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise NumericalError("nonfinite-input: matrix has non-finite entries")
    return scipy.linalg.expm(m)


@dataclass
class FlowStep:
    """One stored generator step: apply exp(eps * generator) on the right."""

    generator: np.ndarray
    eps: float


class CoordinateMap:
    """Accumulated determinant-one map with its generator history.

    The map satisfies v(x) = u(gamma x) where u is the tensor the steps
    were generated from: appending a step multiplies gamma on the right
    by exp(eps * generator).  Generators must be traceless, so the
    determinant stays at one up to the accuracy of the exponential.
    """

    def __init__(self, gamma, steps=None, validate=True):
        self.gamma = np.asarray(gamma, dtype=float)
        self.steps = list(steps) if steps else []
        if validate:
            self.validate()

    @classmethod
    def identity(cls, d):
        return cls(np.eye(d), [])

    @classmethod
    def from_generator(cls, generator, eps):
        generator = np.asarray(generator, dtype=float)
        return cls(matrix_exponential(eps * generator), [FlowStep(generator.copy(), float(eps))])

    @property
    def d(self):
        return self.gamma.shape[0]

    def validate(self):
        if abs(np.linalg.det(self.gamma) - 1.0) > 1e-8:
            raise ValueError(
                f"determinant-drift: |det - 1| = {abs(np.linalg.det(self.gamma) - 1.0):.3e}"
            )
        for s in self.steps:
            if abs(np.trace(s.generator)) > _TRACE_TOL:
                raise ValueError("nonzero-trace-generator: stored generator is not traceless")

    def det_drift(self):
        return abs(np.linalg.det(self.gamma) - 1.0)

    def append_step(self, generator, eps):
        """Append one generator step in place (right multiplication)."""
        generator = np.asarray(generator, dtype=float)
        if abs(np.trace(generator)) > _TRACE_TOL:
            raise ValueError("nonzero-trace-generator: generator is not traceless")
        self.gamma = self.gamma @ matrix_exponential(eps * generator)
        self.steps.append(FlowStep(generator.copy(), float(eps)))

    def compose(self, later):
        """Map accumulated by this one followed by ``later`` (right mult)."""
        return CoordinateMap(
            self.gamma @ later.gamma, self.steps + later.steps, validate=False
        )

    def inverse(self):
        """Inverse map: reversed step order with negated generators."""
        inv_steps = [FlowStep(-s.generator, s.eps) for s in reversed(self.steps)]
        return CoordinateMap(np.linalg.inv(self.gamma), inv_steps, validate=False)

    def copy(self):
        return CoordinateMap(self.gamma.copy(), [FlowStep(s.generator.copy(), s.eps) for s in self.steps], validate=False)

    def distance_from_identity(self):
        return float(np.linalg.norm(self.gamma - np.eye(self.d)))

    def __repr__(self):
        return f"CoordinateMap(d={self.d}, steps={len(self.steps)}, |G-I|={self.distance_from_identity():.3e})"


@dataclass
class DescentConfig:
    """Parameters of the rank-reduction descent."""

    delta_eps: float
    eta: float
    max_iter: int
    trunc_delta: float
    p: int = 2
    scheme: str = "ab2"

    def __post_init__(self):
        if self.delta_eps <= 0 or self.eta <= 0 or self.max_iter <= 0 or self.trunc_delta <= 0:
            raise ValueError("invalid-config: all descent parameters must be positive")
        if self.p < 1:
            raise ValueError("invalid-config: backward-difference order must be >= 1")
        if self.scheme not in ("euler", "ab2"):
            raise ValueError(f"invalid-config: unknown scheme {self.scheme!r}")


@dataclass
class DescentTrace:
    """Per-iteration record of a descent run."""

    eps: list = field(default_factory=list)
    cost: list = field(default_factory=list)
    rank_l1: list = field(default_factory=list)
    rank_above_delta_l1: list = field(default_factory=list)
    grad_fro: list = field(default_factory=list)
    dsdeps: list = field(default_factory=list)
    max_det_drift: float = 0.0

    COLUMNS = ("eps", "cost", "rank_l1", "rank_above_delta_l1", "grad_fro", "dSdeps")

    def append(self, eps, cost, rank_l1, rank_above, grad_fro, dsdeps):
        self.eps.append(float(eps))
        self.cost.append(float(cost))
        self.rank_l1.append(int(rank_l1))
        self.rank_above_delta_l1.append(int(rank_above))
        self.grad_fro.append(float(grad_fro))
        self.dsdeps.append(float(dsdeps))

    def rows(self):
        return list(zip(self.eps, self.cost, self.rank_l1,
                        self.rank_above_delta_l1, self.grad_fro, self.dsdeps))

    def __len__(self):
        return len(self.eps)


@dataclass
class DescentHistory:
    """Carries the latest truncation result and recent flow right-hand sides."""

    result: TruncationResult
    rhs: deque = field(default_factory=lambda: deque(maxlen=2))


def backward_difference(values, p, h):
    """One-sided derivative estimate at the newest of equally spaced values.

    Uses the last p+1 values; exact for polynomials of degree <= p.
    """
    values = np.asarray(values, dtype=float)
    if p < 1:
        raise ValueError("invalid-order: p must be >= 1")
    if values.size < p + 1:
        raise ValueError(
            f"insufficient-history: need {p + 1} values for order {p}, got {values.size}"
        )
    tail = values[-(p + 1):]
    # nodes at -p h, ..., -h, 0; differentiate the interpolant at 0
    nodes = h * np.arange(-p, 1, dtype=float)
    vand = np.vander(nodes, increasing=True)
    coefs = np.linalg.solve(vand, tail)
    return float(coefs[1])


def descent_step(v, map_, cfg, history):
    """One step of the rank-reducing coordinate descent.

    Integrates the flow PDE one epsilon step (Euler bootstrap, then a
    two-step Adams-Bashforth combination), truncates with the gradient
    factor, and appends the retraction exp(-delta_eps * D) to the map.
    """
    res = history.result
    d_gen = res.gradient_factor
    if d_gen is None:
        raise ValueError("missing-gradient: history.result must carry a gradient factor")

    rhs = advect_linear_rhs(v, -d_gen, cfg.trunc_delta)
    if cfg.scheme == "ab2" and len(history.rhs) >= 1:
        prev = history.rhs[-1]
        combo = linear_combine(
            [(1.0, v), (1.5 * cfg.delta_eps, rhs), (-0.5 * cfg.delta_eps, prev)]
        )
    else:
        combo = linear_combine([(1.0, v), (cfg.delta_eps, rhs)])
    history.rhs.append(rhs)

    new_res = truncate(combo, cfg.trunc_delta, want_gradient=True)
    history.result = new_res
    map_.append_step(-d_gen, cfg.delta_eps)
    return new_res.tensor, map_, new_res


def gradient_descent(u, cfg):
    """Descend the singular-value sum along a path of determinant-one maps.

    Returns the accumulated map (v(x) ~= u(gamma x)), the reduced-rank
    tensor and the per-iteration trace.  Stops when the backward
    difference of the cost exceeds -eta or after ``max_iter`` steps.

    The input is normalized internally (and rescaled on return), so the
    iterates, the stopping decision and the map do not depend on the
    scale of ``u``; reported costs refer to the original scale.
    """
    from .tt import norm as tt_norm

    scale = tt_norm(u)
    if scale == 0.0:
        raise NumericalError("zero-tensor: cannot descend on the zero tensor")
    res = truncate(u.scale(1.0 / scale), cfg.trunc_delta, want_gradient=True)
    v = res.tensor

    map_ = CoordinateMap.identity(u.d)
    history = DescentHistory(result=res)
    trace = DescentTrace()
    costs = [res.cost]
    trace.append(
        0.0,
        res.cost * scale,
        res.tensor.rank_l1,
        res.count_above_l1(cfg.trunc_delta),
        np.linalg.norm(res.gradient_factor) * scale,
        np.nan,
    )

    # fixed-step descent rattles once it reaches a kink of the
    # singular-value sum (vanishing sigma), so the iterate at the stop
    # can overshoot; keep the best-cost iterate seen instead.
    best_cost = res.cost
    best_index = 0
    best_state = (v, map_.gamma.copy())

    sdot = -np.inf
    i = 0
    while sdot < -cfg.eta and i < cfg.max_iter:
        v, map_, res = descent_step(v, map_, cfg, history)
        if not np.isfinite(res.cost):
            raise NumericalError(
                f"nonfinite-cost: descent aborted at iteration {i + 1} "
                f"(cost={res.cost}, eps={(i + 1) * cfg.delta_eps:.6g})"
            )
        costs.append(res.cost)
        order = min(cfg.p, len(costs) - 1)
        sdot = backward_difference(costs, order, cfg.delta_eps)
        i += 1
        trace.append(
            i * cfg.delta_eps,
            res.cost * scale,
            res.tensor.rank_l1,
            res.count_above_l1(cfg.trunc_delta),
            np.linalg.norm(res.gradient_factor) * scale,
            sdot * scale,
        )
        trace.max_det_drift = max(trace.max_det_drift, map_.det_drift())
        if res.cost < best_cost:
            best_cost = res.cost
            best_index = i
            best_state = (res.tensor, map_.gamma.copy())

    v_best, gamma_best = best_state
    map_best = CoordinateMap(gamma_best, map_.steps[:best_index], validate=False)
    return map_best, v_best.scale(scale), trace
