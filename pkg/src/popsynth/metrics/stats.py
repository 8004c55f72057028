"""Distances and goodness-of-fit tests used to compare populations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import DegenerateTestError, ShapeError, ValidationError

POOL_THRESHOLD = 5.0


@dataclass
class Histogram2D:
    x_edges: np.ndarray
    y_edges: np.ndarray
    masses: np.ndarray  # (len(x_edges) - 1, len(y_edges) - 1), sums to 1
    n_in: int = 0
    n_out: int = 0

    def same_bins(self, other):
        return (np.array_equal(self.x_edges, other.x_edges)
                and np.array_equal(self.y_edges, other.y_edges))


def _edges(e, name):
    e = np.asarray(e, dtype=float)
    if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
        raise ValidationError(f"{name} must be strictly increasing with at least two entries")
    return e


def _bin(values, edges):
    # Half-open [lo, hi) bins; the last bin is closed on the right.
    idx = np.searchsorted(edges, values, side="right") - 1
    idx[values == edges[-1]] = edges.size - 2
    ok = (values >= edges[0]) & (values <= edges[-1])
    return idx, ok


def histogram2d(x, y, x_edges, y_edges):
    """Normalised joint histogram of paired samples.

    Pairs outside the binned range are counted in ``n_out`` and left out of
    the normalisation.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ShapeError("x and y must have the same length")
    xe, ye = _edges(x_edges, "x_edges"), _edges(y_edges, "y_edges")
    ix, okx = _bin(x, xe)
    iy, oky = _bin(y, ye)
    ok = okx & oky
    n_in = int(ok.sum())
    if n_in == 0:
        raise ValidationError("no pairs fall inside the histogram range")
    counts = np.zeros((xe.size - 1, ye.size - 1))
    np.add.at(counts, (ix[ok], iy[ok]), 1.0)
    return Histogram2D(xe, ye, counts / n_in, n_in, int(x.size - n_in))


def bhattacharyya_coefficient(p, q):
    if not p.same_bins(q):
        raise ShapeError("histograms have different bin edges")
    return float(np.sum(np.sqrt(p.masses * q.masses)))


def bhattacharyya(p, q):
    """``-ln(sum(sqrt(p * q)))``; infinite for disjoint supports."""
    bc = min(bhattacharyya_coefficient(p, q), 1.0)
    if bc <= 0.0:
        return math.inf
    d = -math.log(bc)
    return d if d > 0 else 0.0


@dataclass(frozen=True)
class StatResult:
    statistic: float
    pvalue: float
    dof: int | None = None


def kolmogorov_sf(lam):
    """Survival function of the Kolmogorov distribution, P(K > lam)."""
    if lam <= 0:
        return 1.0
    if lam < 1.18:
        # Jacobi-theta form; converges fast for small arguments.
        s = 0.0
        c = math.pi ** 2 / (8.0 * lam * lam)
        for k in range(1, 40, 2):
            s += math.exp(-k * k * c)
        cdf = math.sqrt(2.0 * math.pi) / lam * s
        return min(max(1.0 - cdf, 0.0), 1.0)
    s = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * k * k * lam * lam)
        s += term if k % 2 else -term
        if term < 1e-17:
            break
    return min(max(2.0 * s, 0.0), 1.0)


def ks_statistic(a, b):
    """Exact sup-norm distance between the two empirical CDFs.

    Both ECDFs are evaluated at every point of the merged sorted sample, after
    all ties at that point are consumed.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValidationError("KS test needs two non-empty samples")
    merged = np.concatenate([a, b])
    fa = np.searchsorted(a, merged, side="right") / a.size
    fb = np.searchsorted(b, merged, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(a, b):
    """Two-sample KS test with the asymptotic Kolmogorov p-value."""
    d = ks_statistic(a, b)
    na, nb = np.size(a), np.size(b)
    ne = na * nb / (na + nb)
    return StatResult(d, kolmogorov_sf(d * math.sqrt(ne)))


def chi2_sf(x, dof):
    """Upper tail of the chi-square distribution (regularised upper incomplete gamma)."""
    if dof < 1:
        raise ValidationError("chi-square needs at least one degree of freedom")
    if x <= 0:
        return 1.0
    return float(special.gammaincc(dof / 2.0, x / 2.0))


def pool_cells(observed, expected, threshold=POOL_THRESHOLD):
    """Merge every cell with expected count below ``threshold`` into one remainder cell.

    The remainder is dropped when both its expected and observed totals are zero.
    """
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    small = e < threshold
    if not np.any(small):
        return o, e
    o_keep, e_keep = o[~small], e[~small]
    o_rest, e_rest = o[small].sum(), e[small].sum()
    if e_rest == 0 and o_rest == 0:
        return o_keep, e_keep
    return np.append(o_keep, o_rest), np.append(e_keep, e_rest)


def chi_square(observed, expected, pool_threshold=POOL_THRESHOLD):
    """Pearson chi-square goodness-of-fit test.

    Cells with expected count below ``pool_threshold`` are pooled first;
    pass ``pool_threshold=0`` to test the cells as given.
    """
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    if o.shape != e.shape or o.ndim != 1:
        raise ShapeError("observed and expected must be 1-D and of equal length")
    if np.any(o < 0) or np.any(e < 0):
        raise ValidationError("counts must be >= 0")
    o, e = pool_cells(o, e, pool_threshold)
    if np.any(e <= 0):
        raise ValidationError("expected count must be positive in every tested cell")
    if o.size < 2:
        raise DegenerateTestError("fewer than two cells remain after pooling")
    stat = float(np.sum((o - e) ** 2 / e))
    dof = o.size - 1
    return StatResult(stat, chi2_sf(stat, dof), dof)
