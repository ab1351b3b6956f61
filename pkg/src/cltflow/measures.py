"""Probability measures on the real line and their exact moment algebra.

A measure is represented by one of a small set of immutable value types:

* ``Atomic``        finite support, positive weights summing to one
* ``Parametric``    closed-form family (gaussian, uniform, exponential, laplace,
                    plus the internal heavy-tail family used by the test bank)
* ``Empirical``     a finite sample treated as its empirical law
* ``CfLevel``       n applications of the renormalization map to a base law
* ``ConvProduct``   convolution of independent component laws
* ``ConvPower``     n-fold convolution of one law with itself
* ``Affine``        the law of shift + scale * X

All representations carry exact first-through-fourth cumulants (with ``inf``
and ``nan`` markers where a moment is infinite or not absolutely convergent),
which is what the metric layer needs for its zero-frequency limits.  Every
value is frozen; operations return new measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc

from .errors import (
    DegenerateMeasureError,
    MeasureError,
    MembershipError,
    MomentUnavailableError,
)

__all__ = [
    "Measure",
    "Atomic",
    "Parametric",
    "Empirical",
    "CfLevel",
    "ConvProduct",
    "ConvPower",
    "Affine",
    "QMembership",
    "make_atomic",
    "make_parametric",
    "moment",
    "abs_moment_bound",
    "standardize",
    "scale_law",
    "convolve",
    "convolution_power",
    "q_membership",
    "measure_from_literal",
    "cumulants",
]

ATOM_MERGE_TOL = 1e-12
PUBLIC_FAMILIES = ("gaussian", "uniform", "exponential", "laplace")
_MEMBER_TOL = 1e-10

_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class Measure:
    """Base class for all measure representations."""


@dataclass(frozen=True)
class Atomic(Measure):
    """Finite discrete law: sorted positions with positive weights summing to 1."""

    atoms: tuple[tuple[float, float], ...]
    moment_cache: tuple[float, float, float, float] | None = field(
        init=False, default=None, compare=False, repr=False
    )

    def __post_init__(self):
        if not self.atoms:
            raise MeasureError("atomic measure needs at least one atom")
        pos = [a[0] for a in self.atoms]
        if any(pos[i] >= pos[i + 1] for i in range(len(pos) - 1)):
            raise MeasureError("atomic positions must be strictly increasing")
        if any(w <= 0 for _, w in self.atoms):
            raise MeasureError("atomic weights must be strictly positive")
        object.__setattr__(self, "moment_cache", _atomic_summary(self.atoms))

    @property
    def positions(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms])

    @property
    def weights(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms])


@dataclass(frozen=True)
class Parametric(Measure):
    """Closed-form family; params are family specific.

    gaussian: (mean, variance); uniform: (a, b); laplace: (loc, scale);
    exponential: (rate, shift) with the shift used internally for
    standardized forms; heavy_cubic: () is the standardized symmetric law
    with density (sqrt(3)/6) |x|^-4 on |x| >= 1/sqrt(3), which has unit
    variance and no finite third absolute moment.
    """

    family: str
    params: tuple[float, ...]
    moment_cache: tuple[float, float, float, float] | None = field(
        init=False, default=None, compare=False, repr=False
    )

    def __post_init__(self):
        fam, p = self.family, self.params
        if fam == "gaussian":
            if len(p) != 2 or not p[1] > 0 or not all(map(math.isfinite, p)):
                raise MeasureError("gaussian needs (mean, variance) with variance > 0")
        elif fam == "uniform":
            if len(p) != 2 or not p[0] < p[1] or not all(map(math.isfinite, p)):
                raise MeasureError("uniform needs (a, b) with a < b")
        elif fam == "laplace":
            if len(p) != 2 or not p[1] > 0 or not all(map(math.isfinite, p)):
                raise MeasureError("laplace needs (loc, scale) with scale > 0")
        elif fam == "exponential":
            if len(p) != 2 or not p[0] > 0 or not all(map(math.isfinite, p)):
                raise MeasureError("exponential needs (rate, shift) with rate > 0")
        elif fam == "heavy_cubic":
            if p != ():
                raise MeasureError("heavy_cubic takes no parameters")
        else:
            raise MeasureError(f"unknown parametric family {fam!r}")
        object.__setattr__(self, "moment_cache", _parametric_summary(fam, p))


@dataclass(frozen=True, eq=False)
class Empirical(Measure):
    """The empirical law of a fixed finite sample."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise MeasureError("empirical measure needs a nonempty 1-d sample")
        if not np.all(np.isfinite(arr)):
            raise MeasureError("empirical samples must be finite")
        object.__setattr__(self, "samples", arr)


@dataclass(frozen=True)
class CfLevel(Measure):
    """count applications of the renormalization map to a standardized base law."""

    base: Measure
    count: int

    def __post_init__(self):
        if isinstance(self.base, CfLevel):
            raise MeasureError("CfLevel base must not itself be a CfLevel")
        if not isinstance(self.count, int) or self.count < 1:
            raise MeasureError("CfLevel count must be a positive integer")


@dataclass(frozen=True)
class ConvProduct(Measure):
    """Convolution of independent component laws (cf is the pointwise product)."""

    parts: tuple[Measure, ...]

    def __post_init__(self):
        if len(self.parts) < 2:
            raise MeasureError("convolution product needs at least two parts")


@dataclass(frozen=True)
class ConvPower(Measure):
    """n-fold convolution of one law with itself."""

    base: Measure
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise MeasureError("convolution power needs a positive integer order")


@dataclass(frozen=True)
class Affine(Measure):
    """The law of shift + scale * X with scale > 0."""

    base: Measure
    scale: float
    shift: float = 0.0

    def __post_init__(self):
        if not self.scale > 0 or not math.isfinite(self.scale):
            raise MeasureError("affine scale must be a positive finite number")
        if not math.isfinite(self.shift):
            raise MeasureError("affine shift must be finite")


@dataclass(frozen=True)
class QMembership:
    """Verdict on membership in the centred, reduced, finite-r-th-moment class.

    ``abs_moment_r`` is the exact r-th absolute moment when one is exactly
    computable; for cf-composed representations it is a finite certified upper
    bound instead (finite iff the moment itself is finite, which is all the
    verdict needs).
    """

    r: float
    is_member: bool
    mean: float
    variance: float
    abs_moment_r: float


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def make_atomic(atoms) -> Atomic:
    """Build an atomic measure: sort, merge positions closer than 1e-12, renormalize."""
    pairs = [(float(x), float(w)) for x, w in atoms]
    if not pairs:
        raise MeasureError("atomic measure needs at least one atom")
    for x, w in pairs:
        if not (math.isfinite(x) and math.isfinite(w)):
            raise MeasureError("atom positions and weights must be finite")
        if w <= 0:
            raise MeasureError(f"atom weight must be positive, got {w}")
    pairs.sort()
    merged: list[list[float]] = []
    for x, w in pairs:
        if merged and x - merged[-1][0] <= ATOM_MERGE_TOL:
            merged[-1][1] += w
        else:
            merged.append([x, w])
    total = math.fsum(w for _, w in merged)
    return Atomic(tuple((x, w / total) for x, w in merged))


def make_parametric(family: str, params) -> Parametric:
    """Build one of the four public closed-form families."""
    if family not in PUBLIC_FAMILIES:
        raise MeasureError(
            f"unknown family {family!r}; expected one of {PUBLIC_FAMILIES}"
        )
    p = tuple(float(v) for v in params)
    if family == "exponential":
        if len(p) != 1:
            raise MeasureError("exponential takes a single rate parameter")
        p = (p[0], 0.0)
    return Parametric(family, p)


def dirac(x: float = 0.0) -> Atomic:
    """Point mass at x."""
    return Atomic(((float(x), 1.0),))


def measure_from_literal(obj) -> Measure:
    """Parse a JSON-style measure literal.

    Accepted forms (field names fixed):
      {"type": "atomic", "atoms": [[x, w], ...]}
      {"type": "parametric", "family": "gaussian", "params": [0, 1]}
    """
    if not isinstance(obj, dict):
        raise MeasureError("measure literal must be an object")
    kind = obj.get("type")
    if kind == "atomic":
        extra = set(obj) - {"type", "atoms"}
        if extra:
            raise MeasureError(f"unknown keys in atomic literal: {sorted(extra)}")
        atoms = obj.get("atoms")
        if not isinstance(atoms, list) or not all(
            isinstance(a, (list, tuple)) and len(a) == 2 for a in atoms
        ):
            raise MeasureError("atomic literal needs atoms: [[x, w], ...]")
        return make_atomic(atoms)
    if kind == "parametric":
        extra = set(obj) - {"type", "family", "params"}
        if extra:
            raise MeasureError(f"unknown keys in parametric literal: {sorted(extra)}")
        family = obj.get("family")
        params = obj.get("params")
        if not isinstance(family, str) or not isinstance(params, list):
            raise MeasureError("parametric literal needs family and params")
        return make_parametric(family, params)
    raise MeasureError(f"unknown measure literal type {kind!r}")


# ---------------------------------------------------------------------------
# cumulants and moments
# ---------------------------------------------------------------------------


def _raw_to_cumulants(m1, m2, m3, m4):
    k1 = m1
    k2 = m2 - m1 * m1
    k3 = m3 - 3.0 * m1 * m2 + 2.0 * m1**3
    k4 = m4 - 4.0 * m1 * m3 - 3.0 * m2 * m2 + 12.0 * m1 * m1 * m2 - 6.0 * m1**4
    return (k1, k2, k3, k4)


def _cumulants_to_raw(k1, k2, k3, k4):
    # cross terms vanish identically for centred laws even when the higher
    # cumulant carries an inf/nan marker, so 0 * marker must stay 0
    def prod(a, b):
        return 0.0 if a == 0.0 or b == 0.0 else a * b

    m1 = k1
    m2 = k2 + k1 * k1
    m3 = k3 + prod(3.0 * k2, k1) + k1**3
    m4 = k4 + prod(4.0 * k3, k1) + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 + k1**4
    return (m1, m2, m3, m4)


def _atomic_raw(atoms):
    xs = np.array([a[0] for a in atoms])
    ws = np.array([a[1] for a in atoms])
    return tuple(float(np.dot(ws, xs**k)) for k in (1, 2, 3, 4))


def _atomic_summary(atoms):
    m1, m2, m3, _ = _atomic_raw(atoms)
    xs = np.array([a[0] for a in atoms])
    ws = np.array([a[1] for a in atoms])
    abs3 = float(np.dot(ws, np.abs(xs) ** 3))
    return (m1, m2 - m1 * m1, m3, abs3)


def _parametric_summary(family, params):
    k1, k2, k3, _ = _parametric_cumulants(family, params)
    m3 = _cumulants_to_raw(k1, k2, k3, 0.0)[2]
    abs3 = _parametric_abs_odd(family, params, 3)
    return (k1, k2, m3, abs3)


def _parametric_cumulants(family, p):
    if family == "gaussian":
        return (p[0], p[1], 0.0, 0.0)
    if family == "uniform":
        half = 0.5 * (p[1] - p[0])
        return (0.5 * (p[0] + p[1]), half * half / 3.0, 0.0, -2.0 * half**4 / 15.0)
    if family == "laplace":
        b = p[1]
        return (p[0], 2.0 * b * b, 0.0, 12.0 * b**4)
    if family == "exponential":
        rate, shift = p
        return (1.0 / rate + shift, rate**-2, 2.0 * rate**-3, 6.0 * rate**-4)
    if family == "heavy_cubic":
        # third moment not absolutely convergent, fourth infinite
        return (0.0, 1.0, math.nan, math.inf)
    raise MeasureError(f"unknown family {family!r}")


def cumulants(m: Measure) -> tuple[float, float, float, float]:
    """First through fourth cumulants, exact per representation.

    Entries are inf when the moment is infinite and nan when not absolutely
    convergent.  Cumulants are additive under convolution and scale as
    lambda^k, which makes every composite exact.
    """
    if isinstance(m, Atomic):
        return _raw_to_cumulants(*_atomic_raw(m.atoms))
    if isinstance(m, Parametric):
        return _parametric_cumulants(m.family, m.params)
    if isinstance(m, Empirical):
        x = m.samples
        return _raw_to_cumulants(*(float(np.mean(x**k)) for k in (1, 2, 3, 4)))
    if isinstance(m, CfLevel):
        k1, k2, k3, k4 = cumulants(m.base)
        n = m.count
        # per step: sum of two independent copies, rescaled by 2^{-1/2}
        return (
            k1 * 2.0 ** (n / 2.0),
            k2,
            k3 * 2.0 ** (-n / 2.0),
            k4 * 2.0 ** (-float(n)),
        )
    if isinstance(m, ConvProduct):
        ks = [cumulants(p) for p in m.parts]
        return tuple(math.fsum(k[i] for k in ks) for i in range(4))  # type: ignore[return-value]
    if isinstance(m, ConvPower):
        k1, k2, k3, k4 = cumulants(m.base)
        return (m.n * k1, m.n * k2, m.n * k3, m.n * k4)
    if isinstance(m, Affine):
        k1, k2, k3, k4 = cumulants(m.base)
        s = m.scale
        return (m.shift + s * k1, s * s * k2, s**3 * k3, s**4 * k4)
    raise MeasureError(f"unsupported representation {type(m).__name__}")


def _validate_order(k):
    if not isinstance(k, int) or not 1 <= k <= 4:
        raise MeasureError("moment order must be an integer in 1..4")


def moment(m: Measure, k: int, absolute: bool = False) -> float:
    """E(X^k) or E(|X|^k) for k <= 4.

    Returns inf when the moment is infinite and nan when a signed moment is
    not absolutely convergent.  Raises MomentUnavailableError for absolute
    odd moments of cf-composed representations, which have no exact rule
    (use abs_moment_bound for a finiteness certificate instead).
    """
    _validate_order(k)
    if not absolute or k % 2 == 0:
        if isinstance(m, Atomic):
            return _atomic_raw(m.atoms)[k - 1]
        if isinstance(m, Empirical):
            return float(np.mean(m.samples**k))
        return _cumulants_to_raw(*cumulants(m))[k - 1]
    return _abs_moment_odd(m, k)


def _abs_moment_odd(m: Measure, k: int) -> float:
    if isinstance(m, Atomic):
        xs, ws = m.positions, m.weights
        return float(np.dot(ws, np.abs(xs) ** k))
    if isinstance(m, Empirical):
        return float(np.mean(np.abs(m.samples) ** k))
    if isinstance(m, Parametric):
        return _parametric_abs_odd(m.family, m.params, k)
    if isinstance(m, Affine) and m.shift == 0.0:
        return m.scale**k * _abs_moment_odd(m.base, k)
    raise MomentUnavailableError(
        f"absolute moment of order {k} has no exact rule for "
        f"{type(m).__name__}; use abs_moment_bound for a certificate"
    )


def _parametric_abs_odd(family, p, k):
    if family == "gaussian":
        mu, sd = p[0], math.sqrt(p[1])
        t = mu / sd
        e = math.exp(-0.5 * t * t)
        g = math.erf(t / math.sqrt(2.0))
        if k == 1:
            return sd * _SQRT_2_OVER_PI * e + mu * g
        return sd**3 * (_SQRT_2_OVER_PI * (t * t + 2.0) * e + t * (t * t + 3.0) * g)
    if family == "uniform":
        a, b = p
        if a >= 0.0:
            return (b ** (k + 1) - a ** (k + 1)) / ((k + 1) * (b - a))
        if b <= 0.0:
            return ((-a) ** (k + 1) - (-b) ** (k + 1)) / ((k + 1) * (b - a)) * -1.0
        return ((-a) ** (k + 1) + b ** (k + 1)) / ((k + 1) * (b - a))
    if family == "laplace":
        loc, b = p
        if loc == 0.0:
            return math.factorial(k) * b**k
        half = 0.5 * (
            _abs_moment_shifted_exp(1.0 / b, loc, k)
            + _abs_moment_shifted_exp(1.0 / b, -loc, k)
        )
        return half
    if family == "exponential":
        rate, shift = p
        return _abs_moment_shifted_exp(rate, shift, k)
    if family == "heavy_cubic":
        if k == 1:
            return math.sqrt(3.0) / 2.0
        return math.inf
    raise MeasureError(f"unknown family {family!r}")


def _abs_moment_shifted_exp(rate, shift, k):
    """E|Z + shift|^k for Z ~ exponential(rate), exact via incomplete gammas."""
    if shift >= 0.0:
        return math.fsum(
            math.comb(k, j) * shift ** (k - j) * math.factorial(j) / rate**j
            for j in range(k + 1)
        )
    t = -shift
    u = rate * t
    below = math.fsum(
        math.comb(k, j)
        * (-1.0) ** j
        * t ** (k - j)
        * (math.factorial(j) / rate**j)
        * float(gammainc(j + 1, u))
        for j in range(k + 1)
    )
    above = math.exp(-u) * math.factorial(k) / rate**k
    return below + above


def abs_moment_bound(m: Measure, k: int) -> float:
    """A finite upper bound on E|X|^k whenever the moment is finite.

    Exact values are returned where available; cf-composed representations
    fall back to Minkowski-inequality propagation, so the bound is finite if
    and only if the underlying moment is.
    """
    _validate_order(k)
    if k % 2 == 0:
        return moment(m, k, absolute=True)
    try:
        return _abs_moment_odd(m, k)
    except MomentUnavailableError:
        pass
    if isinstance(m, CfLevel):
        return 2.0 ** (m.count * k / 2.0) * abs_moment_bound(m.base, k)
    if isinstance(m, ConvProduct):
        norms = [abs_moment_bound(p, k) ** (1.0 / k) for p in m.parts]
        return math.fsum(norms) ** k
    if isinstance(m, ConvPower):
        return (m.n * abs_moment_bound(m.base, k) ** (1.0 / k)) ** k
    if isinstance(m, Affine):
        return (m.scale * abs_moment_bound(m.base, k) ** (1.0 / k) + abs(m.shift)) ** k
    raise MeasureError(f"unsupported representation {type(m).__name__}")


# ---------------------------------------------------------------------------
# measure algebra
# ---------------------------------------------------------------------------


def standardize(m: Measure) -> Measure:
    """Affine image (X - mean)/stddev; exact per representation."""
    k1, k2, _, _ = cumulants(m)
    if not math.isfinite(k2) or k2 <= 0.0:
        raise DegenerateMeasureError(
            f"cannot standardize a measure with variance {k2}"
        )
    mean, sd = k1, math.sqrt(k2)
    if isinstance(m, Atomic):
        xs = (m.positions - mean) / sd
        ws = m.weights
        xs = xs - float(np.dot(ws, xs))  # second pass kills rounding in the mean
        return make_atomic(zip(xs, ws))
    if isinstance(m, Parametric):
        fam, p = m.family, m.params
        if fam == "gaussian":
            return Parametric("gaussian", (0.0, 1.0))
        if fam == "uniform":
            return Parametric("uniform", ((p[0] - mean) / sd, (p[1] - mean) / sd))
        if fam == "laplace":
            return Parametric("laplace", (0.0, p[1] / sd))
        if fam == "exponential":
            return Parametric("exponential", (1.0, -1.0))
        return m  # heavy_cubic is standardized by construction
    if isinstance(m, Empirical):
        xs = (m.samples - mean) / sd
        return Empirical(xs - float(np.mean(xs)))
    if abs(mean) <= 1e-12 and abs(k2 - 1.0) <= 1e-14:
        return m
    return scale_law(_shift(m, -mean), 1.0 / sd)


def _shift(m: Measure, c: float) -> Measure:
    if c == 0.0:
        return m
    if isinstance(m, Atomic):
        return make_atomic(zip(m.positions + c, m.weights))
    if isinstance(m, Parametric):
        fam, p = m.family, m.params
        if fam == "gaussian":
            return Parametric(fam, (p[0] + c, p[1]))
        if fam == "uniform":
            return Parametric(fam, (p[0] + c, p[1] + c))
        if fam == "laplace":
            return Parametric(fam, (p[0] + c, p[1]))
        if fam == "exponential":
            return Parametric(fam, (p[0], p[1] + c))
    if isinstance(m, Empirical):
        return Empirical(m.samples + c)
    if isinstance(m, Affine):
        return Affine(m.base, m.scale, m.shift + c)
    return Affine(m, 1.0, c)


def scale_law(m: Measure, lam: float) -> Measure:
    """The law of lam * X for lam > 0."""
    lam = float(lam)
    if not lam > 0 or not math.isfinite(lam):
        raise MeasureError(f"scale factor must be positive and finite, got {lam}")
    if lam == 1.0:
        return m
    if isinstance(m, Atomic):
        return make_atomic(zip(m.positions * lam, m.weights))
    if isinstance(m, Parametric):
        fam, p = m.family, m.params
        if fam == "gaussian":
            return Parametric(fam, (lam * p[0], lam * lam * p[1]))
        if fam == "uniform":
            return Parametric(fam, (lam * p[0], lam * p[1]))
        if fam == "laplace":
            return Parametric(fam, (lam * p[0], lam * p[1]))
        if fam == "exponential":
            return Parametric(fam, (p[0] / lam, lam * p[1]))
        return Affine(m, lam, 0.0)
    if isinstance(m, Empirical):
        return Empirical(m.samples * lam)
    if isinstance(m, Affine):
        return Affine(m.base, lam * m.scale, lam * m.shift)
    return Affine(m, lam, 0.0)


def convolve(a: Measure, b: Measure) -> Measure:
    """The law of X + Y for independent X ~ a, Y ~ b.

    Atomic pairs convolve exactly (with position merging); gaussian pairs
    stay gaussian; point masses act as shifts; everything else becomes a
    cf-product representation.
    """
    for m in (a, b):
        if not math.isfinite(cumulants(m)[1]):
            raise MeasureError("convolution requires finite second moments")
    if isinstance(a, Atomic) and len(a.atoms) == 1:
        return _shift(b, a.atoms[0][0])
    if isinstance(b, Atomic) and len(b.atoms) == 1:
        return _shift(a, b.atoms[0][0])
    if isinstance(a, Atomic) and isinstance(b, Atomic):
        pos = np.add.outer(a.positions, b.positions).ravel()
        ws = np.multiply.outer(a.weights, b.weights).ravel()
        return make_atomic(zip(pos, ws))
    if (
        isinstance(a, Parametric)
        and isinstance(b, Parametric)
        and a.family == b.family == "gaussian"
    ):
        return Parametric(
            "gaussian", (a.params[0] + b.params[0], a.params[1] + b.params[1])
        )
    parts: list[Measure] = []
    for m in (a, b):
        parts.extend(m.parts if isinstance(m, ConvProduct) else (m,))
    return ConvProduct(tuple(parts))


def convolution_power(m: Measure, n: int) -> Measure:
    """The n-fold convolution of m with itself."""
    if not isinstance(n, int) or n < 1:
        raise MeasureError("convolution power needs a positive integer order")
    if n == 1:
        return m
    return ConvPower(m, n)


def q_membership(m: Measure, r) -> QMembership:
    """Check mean 0, variance 1, and finiteness of the r-th absolute moment."""
    if r not in (2, 3, 2.0, 3.0):
        raise MembershipError(f"membership is defined for r in {{2, 3}}, got {r}")
    r = int(r)
    k1, k2, _, _ = cumulants(m)
    if r == 2:
        abs_r = moment(m, 2, absolute=True)
    else:
        abs_r = abs_moment_bound(m, 3)
    ok = (
        abs(k1) <= _MEMBER_TOL
        and abs(k2 - 1.0) <= _MEMBER_TOL
        and math.isfinite(abs_r)
    )
    return QMembership(float(r), ok, k1, k2, abs_r)


def require_membership(m: Measure, r, what: str = "operation") -> QMembership:
    """Raise MembershipError unless m is centred, reduced, with finite r-th moment."""
    qm = q_membership(m, r)
    if not qm.is_member:
        raise MembershipError(
            f"{what} requires a centred, reduced law with finite absolute moment "
            f"of order {r}: got mean {qm.mean:.3g}, variance {qm.variance:.6g}, "
            f"abs moment {qm.abs_moment_r:.3g}"
        )
    return qm
