"""Pooling of layer and grid similarities into the three quality scores."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

DEFAULT_WEIGHTS = (0.4, 0.6)


@dataclass
class QualityTriple:
    """Content, style and combined quality plus the settings that shaped them."""

    q_content: float
    q_style: float
    q_overall: float
    config: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "q_content": self.q_content,
            "q_style": self.q_style,
            "q_overall": self.q_overall,
            "config": self.config,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


def pool_style(ss_per_layer) -> float:
    """Product of the five per-layer style similarities."""
    values = np.asarray(list(ss_per_layer), dtype=np.float64)
    if values.shape != (5,):
        raise InvalidInputError(f"expected five layer similarities, got {values.shape}")
    return float(np.prod(values))


def pool_content(
    cs_grid: dict, z_count: int, o_count: int, normalized: bool = False
) -> float:
    """Product over octaves of the per-octave scale sums, divided by Z^2.

    With normalized=True the divisor is Z^O instead, which maps the all-ones
    grid to exactly 1; both choices rank any image set identically.
    """
    total = 1.0
    for o in range(1, o_count + 1):
        octave_sum = 0.0
        for z in range(1, z_count + 1):
            if (z, o) not in cs_grid:
                raise InvalidInputError(f"grid is missing the ({z}, {o}) entry")
            octave_sum += float(cs_grid[(z, o)])
        total *= octave_sum
    divisor = float(z_count**o_count) if normalized else float(z_count**2)
    return total / divisor


def pool_overall(q_content: float, q_style: float, w1: float = 0.4, w2: float = 0.6) -> float:
    """Weighted geometric combination q_content^w1 * q_style^w2."""
    if q_content <= 0 or q_style <= 0:
        raise InvalidInputError(
            f"pooling needs positive inputs, got ({q_content}, {q_style})"
        )
    return float(q_content**w1 * q_style**w2)


def pool_overall_combination(
    q_content: float,
    q_style: float,
    c: float,
    d: float,
    w1: float = 0.4,
    w2: float = 0.6,
    w3: float = 0.4,
    w4: float = 0.6,
) -> float:
    """Blend of the geometric pooling and a weighted arithmetic sum.

    c scales the multiplicative term, d the summation term; (c, d) = (1, 0)
    reduces to pool_overall.
    """
    if q_content <= 0 or q_style <= 0:
        raise InvalidInputError(
            f"pooling needs positive inputs, got ({q_content}, {q_style})"
        )
    product = q_content**w1 * q_style**w2
    summed = w3 * q_content + w4 * q_style
    return float(c * product + d * summed)
