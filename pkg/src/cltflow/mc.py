"""Deterministic Monte Carlo oracle.

Randomness comes from the SplitMix64 finalizer (public-domain constants
0x9E3779B97F4A7C15, 0xBF58476D1CE4E5B9, 0x94D049BB133111EB) used counter
style: draw i of stream s under seed k is

    mix64( (mix64(k) ^ mix64(s * PHI64)) + PHI64 * (i + 1) )

with pure 64-bit integer arithmetic, so batches are bit-identical across
platforms and runs.  Uniforms take the top 52 bits offset by half an ulp,
landing strictly inside (0, 1); parametric laws invert their CDFs, atomic
laws draw categorically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import MeasureError
from .measures import (
    Affine,
    Atomic,
    CfLevel,
    Empirical,
    Measure,
    Parametric,
    require_membership,
)
from .charfn import empirical_cf, eval_cf_grid
from .metrics import GridSpec

__all__ = [
    "SampleBatch",
    "sample",
    "empirical_flow_check",
    "FlowCheck",
    "MAX_SAMPLING_LEVELS",
    "ORACLE_GRID",
]

PHI64 = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1

MAX_SAMPLING_LEVELS = 25
ORACLE_GRID = GridSpec(1e-3, 50.0, 10)


def _mix64_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _stream_key(seed: int, stream: int) -> int:
    return _mix64_int(seed) ^ _mix64_int((stream * PHI64) & _MASK)


def _uniforms(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    """count uniforms in the open interval (0, 1) from counter positions start.."""
    key = np.uint64(_stream_key(seed, stream))
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = key + np.uint64(PHI64) * idx
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
    return ((z >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


@dataclass(frozen=True, eq=False)
class SampleBatch:
    """A reproducible draw: regenerating with the same source/seed/size is bit-identical."""

    source: Measure
    seed: int
    values: np.ndarray

    @property
    def size(self) -> int:
        return self.values.size


def _draw(m: Measure, n: int, seed: int, stream: int, start: int) -> np.ndarray:
    if isinstance(m, Atomic):
        u = _uniforms(seed, stream, start, n)
        edges = np.cumsum(m.weights)
        idx = np.minimum(np.searchsorted(edges, u, side="right"), len(m.atoms) - 1)
        return m.positions[idx]
    if isinstance(m, Empirical):
        u = _uniforms(seed, stream, start, n)
        idx = np.minimum((u * m.samples.size).astype(np.int64), m.samples.size - 1)
        return m.samples[idx]
    if isinstance(m, Parametric):
        u = _uniforms(seed, stream, start, n)
        fam, p = m.family, m.params
        if fam == "gaussian":
            return p[0] + math.sqrt(p[1]) * ndtri(u)
        if fam == "uniform":
            return p[0] + (p[1] - p[0]) * u
        if fam == "laplace":
            v = u - 0.5
            return p[0] - p[1] * np.sign(v) * np.log1p(-2.0 * np.abs(v))
        if fam == "exponential":
            return p[1] - np.log1p(-u) / p[0]
        if fam == "heavy_cubic":
            sign = np.where(u < 0.5, -1.0, 1.0)
            tail = 1.0 - np.abs(2.0 * u - 1.0)
            return sign * (3.0 * math.sqrt(3.0) * tail) ** (-1.0 / 3.0)
        raise MeasureError(f"unknown family {fam!r}")
    if isinstance(m, Affine):
        return m.shift + m.scale * _draw(m.base, n, seed, stream, start)
    if isinstance(m, CfLevel):
        if m.count > MAX_SAMPLING_LEVELS:
            raise MeasureError(
                f"sampling refuses cf iteration depth {m.count} > "
                f"{MAX_SAMPLING_LEVELS} (2^{m.count} base draws per sample)"
            )
        folds = 1 << m.count
        total = np.zeros(n)
        for j in range(folds):
            total += _draw(m.base, n, seed, stream, start + j * n)
        return total * 2.0 ** (-m.count / 2.0)
    raise MeasureError(
        f"sampling supports atomic, parametric, empirical, affine and cf-level "
        f"laws, not {type(m).__name__}"
    )


def sample(m: Measure, n: int, seed: int) -> SampleBatch:
    """Draw n values of m, deterministically in (m, n, seed)."""
    if not isinstance(n, int) or n < 1:
        raise MeasureError("sample size must be a positive integer")
    if not isinstance(seed, int) or seed < 0:
        raise MeasureError("seed must be a nonnegative integer")
    return SampleBatch(m, seed, _draw(m, n, seed, 0, 0))


@dataclass(frozen=True)
class FlowCheck:
    """Empirical-vs-analytic cf agreement along the pairwise-sum flow."""

    ok: bool
    max_deviation: float
    envelope: float
    per_level: tuple[float, ...]


def empirical_flow_check(
    m: Measure,
    levels: int,
    n: int,
    seed: int,
    grid: GridSpec | None = None,
) -> FlowCheck:
    """Compare empirical cfs of pairwise-summed samples with analytic iterates.

    For each level k = 0..levels, n samples of the k-fold pairwise-summed and
    rescaled law are drawn (2^k base draws each, from a per-level stream) and
    their empirical cf is compared on the grid against the analytic cf of the
    k-th iterate.  Passing means every deviation stays within the conservative
    envelope 4/sqrt(n).  The default grid is the coarse ORACLE_GRID; the
    envelope does not depend on grid resolution.
    """
    if not isinstance(levels, int) or not 0 <= levels <= 12:
        raise MeasureError("levels must be an integer in 0..12")
    if not isinstance(n, int) or n < 10**5:
        raise MeasureError("the flow check needs at least 1e5 samples per level")
    require_membership(m, 2, "the empirical flow check")
    grid = grid or ORACLE_GRID
    pts = grid.points()
    envelope = 4.0 / math.sqrt(n)
    devs = []
    for k in range(levels + 1):
        if k == 0:
            level_m = m
        elif isinstance(m, CfLevel):
            level_m = CfLevel(m.base, m.count + k)
        else:
            level_m = CfLevel(m, k)
        draws = _draw(level_m, n, seed, k, 0)
        ecf = empirical_cf(draws, pts)
        acf = eval_cf_grid(level_m, pts)
        devs.append(float(np.max(np.abs(ecf - acf))))
    worst = max(devs)
    return FlowCheck(worst <= envelope, worst, envelope, tuple(devs))
