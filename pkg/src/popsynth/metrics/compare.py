"""Source-vs-synthetic comparison report."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..errors import DegenerateTestError, ValidationError
from .stats import bhattacharyya, chi_square, histogram2d, ks_two_sample

DEFAULT_BINS = {
    "age": np.arange(0, 101, 5, dtype=float),
    "height": np.arange(40, 201, 10, dtype=float),
    "weight": np.arange(0, 121, 5, dtype=float),
}

JOINTS = (("age", "height"), ("age", "weight"))
CONTINUOUS = ("age", "height", "weight")
CATEGORICAL = ("sex", "religion", "caste", "job_label")


@dataclass
class MetricEntry:
    name: str
    metric: str
    statistic: Optional[float]
    pvalue: Optional[float]
    n_source: int
    n_synthetic: int
    details: dict = field(default_factory=dict)


def _json_number(v):
    if v is None:
        return None
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


@dataclass
class MetricsReport:
    entries: list = field(default_factory=list)

    def get(self, metric, name):
        for e in self.entries:
            if e.metric == metric and e.name == name:
                return e
        raise KeyError((metric, name))

    def to_dict(self):
        out = []
        for e in self.entries:
            d = asdict(e)
            d["statistic"] = _json_number(d["statistic"])
            d["pvalue"] = _json_number(d["pvalue"])
            out.append(d)
        return {"comparisons": out}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def source_columns(sample):
    persons = sample.persons
    return {
        "age": np.array([p.age for p in persons], dtype=float),
        "height": np.array([p.height for p in persons], dtype=float),
        "weight": np.array([p.weight for p in persons], dtype=float),
        "sex": [p.sex for p in persons],
        "religion": [p.religion for p in persons],
        "caste": [p.caste for p in persons],
        "job_label": [p.job_label for p in persons],
    }


def synthetic_columns(persons):
    return {
        "age": np.array([p.age for p in persons], dtype=float),
        "height": np.array([p.height for p in persons], dtype=float),
        "weight": np.array([p.weight for p in persons], dtype=float),
        "sex": [p.sex for p in persons],
        "religion": [p.religion for p in persons],
        "caste": [p.caste for p in persons],
        "job_label": [p.job_label if p.job_label is not None else p.seed_job_label for p in persons],
    }


def _category_test(name, src, syn):
    cats = list(dict.fromkeys(list(src) + list(syn)))
    n_src, n_syn = len(src), len(syn)
    cs, cy = Counter(src), Counter(syn)
    src_counts = np.array([cs[c] for c in cats], dtype=float)
    obs = np.array([cy[c] for c in cats], dtype=float)
    exp = src_counts / n_src * n_syn
    entry = MetricEntry(name, "chi_square", None, None, n_src, n_syn, {"categories": len(cats)})
    try:
        res = chi_square(obs, exp)
    except DegenerateTestError as exc:
        entry.details["note"] = str(exc)
        return entry
    except ValidationError:
        # synthetic mass in categories the source never shows
        entry.statistic, entry.pvalue = math.inf, 0.0
        entry.details["note"] = "synthetic categories absent from source"
        return entry
    entry.statistic, entry.pvalue = res.statistic, res.pvalue
    entry.details["dof"] = res.dof
    return entry


def compare_populations(source, synthetic, bins=None, subsample=None, rng=None):
    """Compare a seed micro-sample with a synthetic population.

    Computes Bhattacharyya distances on the (age, height) and (age, weight)
    joint histograms, two-sample KS tests on age, height and weight, and
    chi-square tests on sex, religion, caste and job-label counts.

    ``subsample`` (with ``rng``) draws that many synthetic persons without
    replacement before comparing.
    """
    persons = synthetic.persons if hasattr(synthetic, "persons") else list(synthetic)
    if not source.households or not persons:
        raise ValidationError("both populations must be non-empty")
    if subsample is not None and subsample < len(persons):
        if rng is None:
            raise ValidationError("subsampling needs an rng")
        idx = np.sort(rng.choice(len(persons), size=int(subsample), replace=False))
        persons = [persons[i] for i in idx.tolist()]
    edges = dict(DEFAULT_BINS)
    edges.update(bins or {})
    src = source_columns(source)
    syn = synthetic_columns(persons)
    n_src, n_syn = len(src["age"]), len(syn["age"])

    report = MetricsReport()
    for xa, ya in JOINTS:
        p = histogram2d(src[xa], src[ya], edges[xa], edges[ya])
        q = histogram2d(syn[xa], syn[ya], edges[xa], edges[ya])
        report.entries.append(MetricEntry(
            f"{xa}_{ya}", "bhattacharyya", bhattacharyya(p, q), None, n_src, n_syn,
            {"out_of_range_source": p.n_out, "out_of_range_synthetic": q.n_out}))
    for col in CONTINUOUS:
        res = ks_two_sample(src[col], syn[col])
        report.entries.append(MetricEntry(col, "ks", res.statistic, res.pvalue, n_src, n_syn))
    for col in CATEGORICAL:
        report.entries.append(_category_test(col, src[col], syn[col]))
    return report
