"""Iterative proportional fitting (Deming-Stephan raking) of a dense table."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleError, ShapeError, ValidationError

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITERS = 1000


@dataclass
class ContingencyTable:
    dimensions: list  # [(name, n_categories), ...]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        shape = tuple(int(n) for _, n in self.dimensions)
        if self.values.shape != shape:
            raise ShapeError(f"table values have shape {self.values.shape}, dimensions say {shape}")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise ValidationError("table values must be finite and >= 0")

    @property
    def names(self):
        return [name for name, _ in self.dimensions]

    @property
    def shape(self):
        return self.values.shape

    def marginal(self, axis):
        others = tuple(i for i in range(self.values.ndim) if i != axis)
        return self.values.sum(axis=others)


@dataclass
class ConvergenceReport:
    iterations: int
    max_deviation: float
    converged: bool
    history: list = field(default_factory=list)

    def to_dict(self):
        return {
            "iterations": self.iterations,
            "final_deviation": self.max_deviation,
            "converged": self.converged,
            "history": list(self.history),
        }


def _marginal(values, axis):
    others = tuple(i for i in range(values.ndim) if i != axis)
    return values.sum(axis=others)


def scale_dimension(values, target, axis):
    """Scale ``values`` in place so its marginal along ``axis`` equals ``target``.

    Slices whose current marginal is zero are left untouched (they can only
    hold structural zeros).
    """
    margin = _marginal(values, axis)
    factor = np.ones_like(margin)
    pos = margin > 0
    factor[pos] = target[pos] / margin[pos]
    shape = [1] * values.ndim
    shape[axis] = -1
    values *= factor.reshape(shape)
    return values


def max_deviation(values, targets):
    return max(float(np.max(np.abs(_marginal(values, d) - t))) for d, t in enumerate(targets))


def check_feasible(values, names, categories, targets):
    for d, t in enumerate(targets):
        margin = _marginal(values, d)
        bad = np.flatnonzero((t > 0) & (margin <= 0))
        if bad.size:
            k = int(bad[0])
            raise InfeasibleError(
                f"dimension {names[d]!r} category {categories[d][k]!r} has target "
                f"{t[k]:g} but no positive seed cell")


def fit_ipf(seed, targets, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Rake ``seed`` until every marginal matches ``targets``.

    Parameters
    ----------
    seed : ContingencyTable
        Prior joint table.  Zero cells are structural and stay zero.
    targets : MarginalSet
        One target vector per dimension, in the same order as the seed.
    tol : float
        Stop once the largest absolute marginal deviation is at most this.
    max_iters : int
        Upper bound on full sweeps over the dimensions.

    Returns
    -------
    (ContingencyTable, ConvergenceReport)
    """
    if tol <= 0:
        raise ValidationError("tol must be positive")
    if max_iters < 1:
        raise ValidationError("max_iters must be >= 1")
    if seed.names != targets.names or seed.shape != targets.shape:
        raise ShapeError(
            f"seed dimensions {list(zip(seed.names, seed.shape))} do not match target "
            f"dimensions {list(zip(targets.names, targets.shape))}")

    tgt = [targets.target_array(d) for d in range(len(targets.dimensions))]
    values = seed.values.copy()
    check_feasible(values, targets.names, [c for _, c in targets.dimensions], tgt)

    history = []
    converged = False
    for _ in range(max_iters):
        for d, t in enumerate(tgt):
            scale_dimension(values, t, d)
        dev = max_deviation(values, tgt)
        history.append(dev)
        if dev <= tol:
            converged = True
            break

    fitted = ContingencyTable(list(seed.dimensions), values)
    return fitted, ConvergenceReport(len(history), history[-1], converged, history)
