"""Category labels shared by marginal tables, job tables and prevalence tables.

A label is either a wildcard (``*``), an inclusive integer range (``18-59``),
an open-ended range (``60+``) or a literal compared against ``str(value)``.
"""

import math
import re

_RANGE = re.compile(r"^\s*(-?\d+(?:\.\d+)?)\s*-\s*(-?\d+(?:\.\d+)?)\s*$")
_OPEN = re.compile(r"^\s*(-?\d+(?:\.\d+)?)\s*\+\s*$")

WILDCARD = "*"


def parse_band(label):
    """Return ``(lo, hi)`` for a numeric range label, or None for a literal."""
    m = _RANGE.match(label)
    if m:
        lo, hi = float(m.group(1)), float(m.group(2))
        if hi < lo:
            raise ValueError(f"empty range label {label!r}")
        return lo, hi
    m = _OPEN.match(label)
    if m:
        return float(m.group(1)), math.inf
    return None


def label_matches(label, value):
    if label == WILDCARD:
        return True
    band = parse_band(label)
    if band is not None and isinstance(value, (int, float)) and not isinstance(value, bool):
        return band[0] <= value <= band[1]
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    return str(value) == label

