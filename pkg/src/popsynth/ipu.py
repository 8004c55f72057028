"""Iterative proportional updating of sample-household weights.

Household weights are adjusted one constraint at a time so that household
counts and person counts are matched together.  The quality of fit is the
mean relative deviation over all constraints (:func:`goodness_delta`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bands import label_matches
from .errors import InfeasibleError, ShapeError, SpecError
from .ipf import ConvergenceReport

HOUSEHOLD = "household"
PERSON = "person"

DEFAULT_TOL = 0.05
DEFAULT_MAX_ITERS = 2000
STALL_EPS = 1e-12


@dataclass(frozen=True)
class Constraint:
    """One count target.

    ``conditions`` is a tuple of ``(attribute, category label)`` pairs that
    must all match; an empty tuple matches every household (or every person).
    A custom ``predicate`` replaces the conditions when given.
    """

    name: str
    level: str
    conditions: tuple = ()
    target: float = 0.0
    predicate: Optional[Callable] = None

    def matches(self, record):
        if self.predicate is not None:
            return bool(self.predicate(record))
        for attr, label in self.conditions:
            try:
                value = record.attribute(attr)
            except (KeyError, AttributeError):
                raise SpecError(
                    f"constraint {self.name!r} references missing {self.level} "
                    f"attribute {attr!r}") from None
            if not label_matches(label, value):
                return False
        return True


@dataclass(frozen=True)
class ConstraintSpec:
    constraints: tuple

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        names = [c.name for c in self.constraints]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise SpecError(f"duplicate constraint name {dup!r}")
        seen_person = False
        for c in self.constraints:
            if c.level not in (HOUSEHOLD, PERSON):
                raise SpecError(f"constraint {c.name!r}: unknown level {c.level!r}")
            if c.target < 0:
                raise SpecError(f"constraint {c.name!r}: negative target")
            if c.level == PERSON:
                seen_person = True
            elif seen_person:
                raise SpecError(
                    f"household constraint {c.name!r} listed after a person constraint")

    @classmethod
    def from_levels(cls, household=(), person=()):
        return cls(tuple(household) + tuple(person))

    @property
    def names(self):
        return [c.name for c in self.constraints]

    @property
    def targets(self):
        return np.array([c.target for c in self.constraints], dtype=float)

    def __len__(self):
        return len(self.constraints)


@dataclass
class IncidenceMatrix:
    names: list
    levels: list
    matrix: np.ndarray  # (n_constraints, n_households)

    @property
    def n_households(self):
        return self.matrix.shape[1]


def build_incidence(sample, spec):
    """Count how often each sample household contributes to each constraint."""
    a = np.zeros((len(spec), len(sample.households)), dtype=np.int64)
    for i, c in enumerate(spec.constraints):
        for j, hh in enumerate(sample.households):
            if c.level == HOUSEHOLD:
                a[i, j] = 1 if c.matches(hh) else 0
            else:
                a[i, j] = sum(1 for p in hh.members if c.matches(p))
    return IncidenceMatrix(spec.names, [c.level for c in spec.constraints], a)


def _matrix(incidence):
    return incidence.matrix if isinstance(incidence, IncidenceMatrix) else np.asarray(incidence)


def goodness_delta(incidence, weights, targets):
    """Mean relative deviation of weighted constraint sums from their targets.

    Constraints with a zero target contribute their absolute weighted sum.
    """
    a = np.asarray(_matrix(incidence), dtype=float)
    w = np.asarray(weights, dtype=float)
    t = np.asarray(targets, dtype=float)
    if a.shape != (t.size, w.size):
        raise ShapeError(f"incidence {a.shape} vs {t.size} targets x {w.size} weights")
    sums = a @ w
    dev = np.abs(sums - t)
    pos = t > 0
    dev[pos] /= t[pos]
    return float(dev.mean()) if dev.size else 0.0


def fit_ipu(incidence, targets, tol=DEFAULT_TOL, max_iters=DEFAULT_MAX_ITERS):
    """Fit household weights to constraint targets.

    Weights start at one.  Each iteration visits the constraints in order and
    rescales the weights of every contributing household so the weighted sum
    hits the constraint's target.  Iteration stops when the goodness delta
    drops to ``tol``, when it changes by less than 1e-12 between iterations,
    or after ``max_iters`` passes.

    Returns
    -------
    (numpy.ndarray, ConvergenceReport)
    """
    a = np.asarray(_matrix(incidence), dtype=float)
    t = np.asarray(targets, dtype=float)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a.ndim != 2 or a.shape[0] != t.size:
        raise ShapeError(f"incidence has {a.shape[0]} rows but {t.size} targets were given")
    names = incidence.names if isinstance(incidence, IncidenceMatrix) else [str(i) for i in range(t.size)]
    for i in range(t.size):
        if t[i] > 0 and not np.any(a[i] > 0):
            raise InfeasibleError(
                f"constraint {names[i]!r} has target {t[i]:g} but no contributing household")

    w = np.ones(a.shape[1])
    rows = [(i, np.flatnonzero(a[i] > 0)) for i in range(t.size)]
    prev = goodness_delta(a, w, t)
    history = []
    for _ in range(max_iters):
        for i, idx in rows:
            if idx.size == 0:
                continue
            s = a[i, idx] @ w[idx]
            if s > 0:
                w[idx] *= t[i] / s
        delta = goodness_delta(a, w, t)
        history.append(delta)
        if delta <= tol or abs(prev - delta) < STALL_EPS:
            break
        prev = delta

    report = ConvergenceReport(len(history), history[-1], history[-1] <= tol, history)
    return w, report
