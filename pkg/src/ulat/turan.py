"""Trigonometric polynomials on the torus and Turan-type sup-norm bounds.

A sparse polynomial sum_k c_k exp(2 i pi <k, t>) obeys a reverse-Hoelder
inequality: its global sup is controlled by its sup on any measurable set E
of positive measure, at cost (14/|E|)^(m-1) in one dimension (m terms) and
(14 d / |E|)^(m_1 + ... + m_d) in dimension d, where m_i + 1 counts the
distinct frequencies along axis i.  This module evaluates both sides with
certified two-sided sup-norm brackets and runs randomized campaigns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import AxisBox
from .mc import trial_rng

__all__ = [
    "TrigPolynomial",
    "TorusSet",
    "PolyOrder",
    "SupEstimate",
    "TuranResult",
    "poly_order",
    "sup_norm",
    "turan_check_1d",
    "turan_check_multidim",
    "random_polynomial",
    "random_torus_set",
    "run_campaign",
    "box_union_measure",
]

GRID_DENSITY_FACTOR = 8
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Finite frequency-to-coefficient map; zero coefficients are dropped."""

    dimension: int
    terms: dict

    def __init__(self, dimension: int, terms):
        clean = {}
        for k, c in dict(terms).items():
            key = tuple(int(x) for x in (k if isinstance(k, (tuple, list, np.ndarray)) else (k,)))
            if len(key) != dimension:
                raise ValueError("frequency vector dimension mismatch")
            c = complex(c)
            if c != 0:
                clean[key] = c
        if not clean:
            raise ValueError("polynomial must have at least one nonzero term")
        object.__setattr__(self, "dimension", int(dimension))
        object.__setattr__(self, "terms", clean)

    def frequencies(self) -> np.ndarray:
        return np.array(sorted(self.terms.keys()), dtype=int)

    def coefficients(self) -> np.ndarray:
        return np.array([self.terms[tuple(k)] for k in sorted(self.terms.keys())])

    def evaluate(self, t) -> np.ndarray:
        """sum_k c_k exp(2 i pi <k, t>) for one point or an (n, d) array."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 1
        pts = np.atleast_2d(t)
        if pts.shape[1] != self.dimension:
            raise ValueError("evaluation points must match the polynomial dimension")
        freqs = self.frequencies()
        coefs = self.coefficients()
        phases = np.exp(2j * math.pi * (pts @ freqs.T))
        vals = phases @ coefs
        return vals[0] if scalar else vals

    def gradient_bound(self) -> float:
        """Global bound for ||grad p||_2: 2 pi sum |c_k| ||k||_2."""
        freqs = self.frequencies().astype(float)
        coefs = np.abs(self.coefficients())
        return 2.0 * math.pi * float(np.sum(coefs * np.linalg.norm(freqs, axis=1)))

    def max_abs_frequency(self) -> int:
        return int(np.max(np.abs(self.frequencies()), initial=0))

    def to_records(self) -> list[dict]:
        return [
            {"frequency": list(k), "re": self.terms[k].real, "im": self.terms[k].imag}
            for k in sorted(self.terms.keys())
        ]

    @staticmethod
    def from_records(dimension: int, records) -> "TrigPolynomial":
        terms = {tuple(r["frequency"]): complex(r["re"], r["im"]) for r in records}
        return TrigPolynomial(dimension, terms)


@dataclass(frozen=True)
class PolyOrder:
    """Order statistics of a spectrum.

    per_axis[i] + 1 is the number of distinct frequencies along axis i;
    fm_exponent = sum(per_axis) is the exponent of the multidimensional
    bound; nazarov_m (d = 1 only) is the plain term count whose exponent in
    the one-dimensional bound is nazarov_m - 1; ord_set is the set-order
    convention fm_exponent + d.
    """

    per_axis: tuple
    fm_exponent: int
    nazarov_m: int | None
    ord_set: int


def poly_order(p: TrigPolynomial) -> PolyOrder:
    freqs = p.frequencies()
    distinct = [len(np.unique(freqs[:, i])) for i in range(p.dimension)]
    per_axis = tuple(c - 1 for c in distinct)
    fm = int(sum(per_axis))
    card = len(p.terms)
    # Spectrum-count chains that every valid spectrum satisfies.
    assert fm <= p.dimension * max(per_axis)
    assert max(per_axis) <= card - 1
    assert card <= int(np.prod([m + 1 for m in per_axis]))
    return PolyOrder(
        per_axis=per_axis,
        fm_exponent=fm,
        nazarov_m=card if p.dimension == 1 else None,
        ord_set=fm + p.dimension,
    )


# ---------------------------------------------------------------------------
# Torus sets
# ---------------------------------------------------------------------------


def box_union_measure(boxes: list[AxisBox]) -> float:
    """Exact volume of a union of axis boxes by recursive slab sweep."""
    if not boxes:
        return 0.0
    d = boxes[0].dimension
    if d == 1:
        intervals = sorted((float(b.lower[0]), float(b.upper[0])) for b in boxes)
        total, cur_lo, cur_hi = 0.0, *intervals[0]
        for lo, hi in intervals[1:]:
            if lo > cur_hi:
                total += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        return total + (cur_hi - cur_lo)
    cuts = sorted({float(b.lower[0]) for b in boxes} | {float(b.upper[0]) for b in boxes})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (lo + hi)
        active = [
            AxisBox(b.lower[1:], b.upper[1:])
            for b in boxes
            if b.lower[0] <= mid <= b.upper[0]
        ]
        if active:
            total += (hi - lo) * box_union_measure(active)
    return total


@dataclass(frozen=True, eq=False)
class TorusSet:
    """Finite union of axis boxes inside the fundamental domain [0, 1)^d."""

    dimension: int
    pieces: tuple
    measure: float = field(init=False)

    def __init__(self, dimension: int, pieces):
        pieces = tuple(pieces)
        if not pieces:
            raise ValueError("torus set needs at least one piece")
        for b in pieces:
            if b.dimension != dimension:
                raise ValueError("piece dimension mismatch")
            if np.any(b.lower < -1e-12) or np.any(b.upper > 1.0 + 1e-12):
                raise ValueError("torus set pieces must lie inside [0, 1]^d")
        object.__setattr__(self, "dimension", int(dimension))
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "measure", box_union_measure(list(pieces)))

    @staticmethod
    def full(dimension: int) -> "TorusSet":
        return TorusSet(dimension, [AxisBox([0.0] * dimension, [1.0] * dimension)])

    @staticmethod
    def arcs(intervals) -> "TorusSet":
        return TorusSet(1, [AxisBox([lo], [hi]) for lo, hi in intervals])


# ---------------------------------------------------------------------------
# Certified sup norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SupEstimate:
    """Grid maximum with a certified one-sided window.

    The true supremum lies in [value, value + window]: grid points are
    feasible (lower bound) and the gradient bound caps the rise between
    neighboring grid points.
    """

    value: float
    window: float
    argmax: tuple

    @property
    def upper(self) -> float:
        return self.value + self.window


def _box_axis_grid(lo: float, hi: float, density: float) -> np.ndarray:
    n = max(int(math.ceil((hi - lo) * density)), 2)
    return np.linspace(lo, hi, n + 1)


def sup_norm(p: TrigPolynomial, region: TorusSet | None = None) -> SupEstimate:
    """Certified bracket for sup |p| over a region (default: full torus).

    Per-axis grid density is at least GRID_DENSITY_FACTOR times
    (max |frequency coordinate| + 1) points per unit length, followed by a
    golden-section polish around the best grid point.  The window is the
    gradient bound times the half-diagonal of one grid cell.
    """
    region = region or TorusSet.full(p.dimension)
    if region.measure <= 0:
        raise ValueError("sup_norm region must have positive measure")
    density = GRID_DENSITY_FACTOR * (p.max_abs_frequency() + 1)
    grad = p.gradient_bound()
    best_val, best_pt, best_window = -1.0, None, 0.0
    for box in region.pieces:
        axes = [
            _box_axis_grid(float(box.lower[i]), float(box.upper[i]), density)
            for i in range(p.dimension)
        ]
        spacings = np.array([ax[1] - ax[0] if len(ax) > 1 else 0.0 for ax in axes])
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p.dimension)
        vals = np.abs(p.evaluate(mesh))
        idx = int(np.argmax(vals))
        window = grad * 0.5 * float(np.linalg.norm(spacings))
        if vals[idx] > best_val:
            best_val = float(vals[idx])
            best_pt = mesh[idx].copy()
            best_box = box
            best_spacings = spacings
            best_window = window
    # Golden-section polish per axis inside the best cell; the window keeps
    # certifying against the original grid.
    pt = best_pt.copy()
    for axis in range(p.dimension):
        h = best_spacings[axis]
        if h == 0.0:
            continue
        lo = max(float(best_box.lower[axis]), pt[axis] - h)
        hi = min(float(best_box.upper[axis]), pt[axis] + h)
        a, b = lo, hi
        for _ in range(3):
            c = b - GOLDEN * (b - a)
            dpt, ept = pt.copy(), pt.copy()
            dpt[axis], ept[axis] = c, a + GOLDEN * (b - a)
            if abs(p.evaluate(dpt)) >= abs(p.evaluate(ept)):
                b = a + GOLDEN * (b - a)
            else:
                a = c
        cand = pt.copy()
        cand[axis] = 0.5 * (a + b)
        if abs(p.evaluate(cand)) > best_val:
            best_val = float(abs(p.evaluate(cand)))
            pt = cand
    return SupEstimate(best_val, best_window, tuple(float(x) for x in pt))


# ---------------------------------------------------------------------------
# Turan checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TuranResult:
    lhs: float
    rhs: float
    factor: float
    holds: bool
    lhs_window: float
    rhs_window: float
    exponent: int

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "factor": self.factor,
            "holds": self.holds,
            "exponent": self.exponent,
        }


def _check(p: TrigPolynomial, e: TorusSet, factor: float, exponent: int) -> TuranResult:
    lhs = sup_norm(p)
    rhs_sup = sup_norm(p, e)
    rhs = factor * rhs_sup.upper
    # A genuine violation needs the certified lower bound of the global sup
    # to exceed the certified upper bound of the right-hand side.
    holds = lhs.value <= rhs * (1.0 + 1e-12) + 1e-300
    return TuranResult(lhs.value, rhs, factor, bool(holds), lhs.window, rhs_sup.window, exponent)


def turan_check_1d(p: TrigPolynomial, e: TorusSet) -> TuranResult:
    """One-dimensional bound: sup_T |p| <= (14/|E|)^(m-1) sup_E |p|."""
    if p.dimension != 1 or e.dimension != 1:
        raise ValueError("turan_check_1d requires dimension 1")
    m = poly_order(p).nazarov_m
    factor = (14.0 / e.measure) ** (m - 1)
    return _check(p, e, factor, m - 1)


def turan_check_multidim(p: TrigPolynomial, e: TorusSet) -> TuranResult:
    """Multidimensional bound: sup |p| <= (14 d / |E|)^(m_1+...+m_d) sup_E |p|."""
    if p.dimension != e.dimension:
        raise ValueError("polynomial and set dimensions differ")
    exponent = poly_order(p).fm_exponent
    factor = (14.0 * p.dimension / e.measure) ** exponent
    return _check(p, e, factor, exponent)


# ---------------------------------------------------------------------------
# Randomized campaigns
# ---------------------------------------------------------------------------


def random_polynomial(
    d: int,
    rng: np.random.Generator,
    max_terms: int = 8,
    max_freq: int = 16,
    max_per_axis: int | None = None,
) -> TrigPolynomial:
    """Random sparse polynomial with complex Gaussian coefficients.

    ``max_per_axis`` restricts the number of distinct frequency values per
    axis (spectra inside a small product set), as used in the 2-D campaigns.
    """
    if max_per_axis is not None:
        axes = [
            rng.choice(np.arange(-max_freq, max_freq + 1), size=max_per_axis, replace=False)
            for _ in range(d)
        ]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        n = int(rng.integers(1, len(grid) + 1))
        pick = rng.choice(len(grid), size=n, replace=False)
        freqs = grid[pick]
    else:
        n = int(rng.integers(1, max_terms + 1))
        pool = np.arange(-max_freq, max_freq + 1)
        if d == 1:
            vals = rng.choice(pool, size=n, replace=False)
            freqs = vals[:, None]
        else:
            seen = set()
            while len(seen) < n:
                seen.add(tuple(int(x) for x in rng.integers(-max_freq, max_freq + 1, d)))
            freqs = np.array(sorted(seen), dtype=int)
    coefs = rng.standard_normal(len(freqs)) + 1j * rng.standard_normal(len(freqs))
    return TrigPolynomial(d, dict(zip(map(tuple, freqs.tolist()), coefs)))


def random_torus_set(
    d: int,
    rng: np.random.Generator,
    max_pieces: int = 4,
    min_measure: float = 0.1,
) -> TorusSet:
    """Random union of boxes in [0,1)^d with measure at least min_measure."""
    for _ in range(256):
        n = int(rng.integers(1, max_pieces + 1))
        boxes = []
        for _ in range(n):
            lo = rng.uniform(0.0, 0.9, d)
            width = rng.uniform(0.02, 0.5, d)
            hi = np.minimum(lo + width, 1.0)
            boxes.append(AxisBox(lo, hi))
        ts = TorusSet(d, boxes)
        if ts.measure >= min_measure:
            return ts
    raise RuntimeError("failed to draw a torus set of the requested measure")


def run_campaign(
    d: int,
    count: int,
    seed: int = 0,
    max_terms: int = 8,
    max_freq: int | None = None,
    max_per_axis: int | None = None,
    min_measure: float | None = None,
) -> list[dict]:
    """Randomized verification campaign; returns one row per instance."""
    if max_freq is None:
        max_freq = 16 if d == 1 else 4
    if min_measure is None:
        min_measure = 0.1 if d == 1 else 0.05
    if max_per_axis is None and d > 1:
        max_per_axis = 3
    rows = []
    for i in range(count):
        rng = trial_rng(seed, i)
        p = random_polynomial(d, rng, max_terms=max_terms, max_freq=max_freq,
                              max_per_axis=max_per_axis)
        e = random_torus_set(d, rng, min_measure=min_measure)
        res = turan_check_1d(p, e) if d == 1 else turan_check_multidim(p, e)
        rows.append(
            {
                "seed": i,
                "lhs": res.lhs,
                "rhs": res.rhs,
                "factor": res.factor,
                "holds": res.holds,
            }
        )
    return rows
