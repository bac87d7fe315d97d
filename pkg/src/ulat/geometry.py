"""Subsets of R^d as finite unions of closed balls and axis-aligned boxes.

The module provides exact membership, exact or Monte Carlo Lebesgue
measure, Haar-random rotations, widths of projections onto random lines,
the rotation-averaged mean width, and certified upper bounds for the
ball-cover functional  sum_i min(r_i, r_i^d).

All types are immutable values; operations are pure given a generator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .mc import Estimate, run_trials, trial_rng

__all__ = [
    "Ball",
    "AxisBox",
    "EuclideanSet",
    "Rotation",
    "CoverCandidate",
    "sample_rotation",
    "projection_width",
    "mean_width",
    "lebesgue_measure",
    "cover_measure_upper",
    "ball_volume",
    "merged_length",
]

ORTHOGONALITY_TOL = 1e-12

# Grid covers finer than this cell count are skipped; they cannot beat the
# candidates already collected for sets that large.
_GRID_CELL_CAP = 200_000


def ball_volume(d: int, radius: float) -> float:
    """Volume of a d-dimensional Euclidean ball."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * radius**d


def _as_point(x, d: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape != (d,):
        raise ValueError(f"expected a point of dimension {d}, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed Euclidean ball."""

    center: np.ndarray
    radius: float

    def __init__(self, center, radius: float):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if center.ndim != 1:
            raise ValueError("ball center must be a vector")
        if not radius > 0:
            raise ValueError("ball radius must be positive")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(radius))

    @property
    def dimension(self) -> int:
        return self.center.shape[0]

    def contains(self, points: np.ndarray) -> np.ndarray:
        diff = points - self.center
        return np.einsum("...i,...i->...", diff, diff) <= self.radius**2 + 1e-15

    def bounding_radius(self) -> float:
        return float(np.linalg.norm(self.center)) + self.radius

    def inner_radius(self) -> float:
        return max(0.0, float(np.linalg.norm(self.center)) - self.radius)

    def volume(self) -> float:
        return ball_volume(self.dimension, self.radius)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.center - self.radius, self.center + self.radius

    def translate(self, offset) -> "Ball":
        return Ball(self.center + np.asarray(offset, dtype=float), self.radius)

    def scale(self, factor: float) -> "Ball":
        return Ball(self.center * factor, self.radius * factor)

    def to_dict(self) -> dict:
        return {"kind": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class AxisBox:
    """Closed axis-aligned box given by opposite corners."""

    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, lower, upper):
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("box corners must be vectors of equal dimension")
        if not np.all(lower < upper):
            raise ValueError("box corners must satisfy lower < upper coordinatewise")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.all((points >= self.lower - 1e-15) & (points <= self.upper + 1e-15), axis=-1)

    def bounding_radius(self) -> float:
        far = np.maximum(np.abs(self.lower), np.abs(self.upper))
        return float(np.linalg.norm(far))

    def inner_radius(self) -> float:
        # Distance from the origin to the box.
        gap = np.maximum(np.maximum(self.lower - 0.0, 0.0 - self.upper), 0.0)
        return float(np.linalg.norm(gap))

    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lower, self.upper

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def half_widths(self) -> np.ndarray:
        return 0.5 * (self.upper - self.lower)

    def translate(self, offset) -> "AxisBox":
        offset = np.asarray(offset, dtype=float)
        return AxisBox(self.lower + offset, self.upper + offset)

    def scale(self, factor: float) -> "AxisBox":
        a, b = self.lower * factor, self.upper * factor
        if factor < 0:
            a, b = b, a
        return AxisBox(a, b)

    def to_dict(self) -> dict:
        return {"kind": "box", "lower": self.lower.tolist(), "upper": self.upper.tolist()}


Piece = Ball | AxisBox


@dataclass(frozen=True, eq=False)
class EuclideanSet:
    """Finite union of closed balls and axis-aligned boxes in R^d."""

    dimension: int
    pieces: tuple

    def __init__(self, dimension: int, pieces: Iterable[Piece] = ()):
        dimension = int(dimension)
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        pieces = tuple(pieces)
        for p in pieces:
            if p.dimension != dimension:
                raise ValueError(
                    f"piece of dimension {p.dimension} in a set of dimension {dimension}"
                )
        object.__setattr__(self, "dimension", dimension)
        object.__setattr__(self, "pieces", pieces)

    # -- membership and extents ------------------------------------------

    def contains(self, x) -> bool | np.ndarray:
        """Membership in the closed union (boundary counts as inside)."""
        points = np.asarray(x, dtype=float)
        scalar = points.ndim == 1
        if points.shape[-1] != self.dimension:
            raise ValueError(
                f"point dimension {points.shape[-1]} does not match set dimension {self.dimension}"
            )
        if not self.pieces:
            out = np.zeros(points.shape[:-1], dtype=bool)
            return bool(out) if scalar else out
        mask = self.pieces[0].contains(points)
        for p in self.pieces[1:]:
            mask = mask | p.contains(points)
        return bool(mask) if scalar else mask

    def is_empty(self) -> bool:
        return not self.pieces

    def bounding_radius(self) -> float:
        if not self.pieces:
            return 0.0
        return max(p.bounding_radius() for p in self.pieces)

    def inner_radius(self) -> float:
        """Lower bound for inf{||x|| : x in the set} (0 if the origin is inside)."""
        if not self.pieces:
            return math.inf
        return min(p.inner_radius() for p in self.pieces)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.pieces:
            z = np.zeros(self.dimension)
            return z, z
        los, his = zip(*(p.bounds() for p in self.pieces))
        return np.min(np.array(los), axis=0), np.max(np.array(his), axis=0)

    # -- structure --------------------------------------------------------

    def translate(self, offset) -> "EuclideanSet":
        return EuclideanSet(self.dimension, [p.translate(offset) for p in self.pieces])

    def scale(self, factor: float) -> "EuclideanSet":
        return EuclideanSet(self.dimension, [p.scale(factor) for p in self.pieces])

    def pairwise_disjoint(self) -> bool:
        """Conservative disjointness test used by the exact-measure fast path."""
        for i, a in enumerate(self.pieces):
            for b in self.pieces[i + 1 :]:
                if not _surely_disjoint(a, b):
                    return False
        return True

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "pieces": [p.to_dict() for p in self.pieces],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @staticmethod
    def from_dict(doc: dict) -> "EuclideanSet":
        pieces: list[Piece] = []
        for item in doc.get("pieces", []):
            kind = item.get("kind")
            if kind == "ball":
                pieces.append(Ball(item["center"], item["radius"]))
            elif kind == "box":
                pieces.append(AxisBox(item["lower"], item["upper"]))
            else:
                raise ValueError(f"unknown piece kind: {kind!r}")
        return EuclideanSet(doc["dimension"], pieces)

    @staticmethod
    def from_json(text: str) -> "EuclideanSet":
        return EuclideanSet.from_dict(json.loads(text))


def _surely_disjoint(a: Piece, b: Piece) -> bool:
    if isinstance(a, Ball) and isinstance(b, Ball):
        return float(np.linalg.norm(a.center - b.center)) > a.radius + b.radius
    if isinstance(a, AxisBox) and isinstance(b, AxisBox):
        return bool(np.any(a.upper < b.lower) or np.any(b.upper < a.lower))
    if isinstance(a, AxisBox):
        a, b = b, a
    # a: Ball, b: AxisBox.  Exact point-to-box distance.
    gap = np.maximum(np.maximum(b.lower - a.center, a.center - b.upper), 0.0)
    return float(np.linalg.norm(gap)) > a.radius


# ---------------------------------------------------------------------------
# Rotations
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Rotation:
    """Orthogonal matrix acting on R^d.

    For d >= 2 the determinant must be +1.  In one dimension the two-element
    orthogonal group {+1, -1} is used so that averaging over rotations sweeps
    the whole line rather than a half-line, hence |det| = 1 is accepted.
    """

    matrix: np.ndarray

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("rotation matrix must be square")
        d = m.shape[0]
        if np.max(np.abs(m.T @ m - np.eye(d))) > ORTHOGONALITY_TOL:
            raise ValueError("matrix is not orthogonal within tolerance 1e-12")
        det = float(np.linalg.det(m))
        if d == 1:
            if abs(abs(det) - 1.0) > ORTHOGONALITY_TOL:
                raise ValueError("1-D rotation must be +1 or -1")
        elif abs(det - 1.0) > 1e-9:
            raise ValueError("rotation matrix must have determinant +1")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def apply(self, points: np.ndarray) -> np.ndarray:
        """rho(x) for one point or an (n, d) array of points."""
        return np.asarray(points, dtype=float) @ self.matrix.T

    def apply_transpose(self, points: np.ndarray) -> np.ndarray:
        """Transpose action (the inverse rotation)."""
        return np.asarray(points, dtype=float) @ self.matrix

    def first_axis_image(self) -> np.ndarray:
        """Unit vector rho(e_1)."""
        return self.matrix[:, 0].copy()


def sample_rotation(d: int, rng: np.random.Generator) -> Rotation:
    """Haar-distributed rotation.

    Sampling orthogonalizes a matrix of independent standard normals and
    normalizes the signs of the triangular factor's diagonal, which is
    exactly Haar on the orthogonal group; if the result has determinant -1
    one column is negated.  For d = 1 the two reflections +1 and -1 are
    drawn with equal probability.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if d == 1:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        return Rotation(np.array([[sign]]))
    z = rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return Rotation(q)


# ---------------------------------------------------------------------------
# Measure
# ---------------------------------------------------------------------------


def lebesgue_measure(
    s: EuclideanSet, trials: int = 100_000, seed: int = 0
) -> Estimate:
    """Lebesgue measure of the union.

    Pairwise disjoint pieces are summed analytically (exact, stderr 0).
    Otherwise the measure is estimated by uniform sampling in the bounding
    box of the union.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if s.is_empty():
        return Estimate(0.0, 0.0, exact=True)
    if s.pairwise_disjoint():
        return Estimate(sum(p.volume() for p in s.pieces), 0.0, exact=True)
    lo, hi = s.bounding_box()
    box_vol = float(np.prod(hi - lo))
    rng = trial_rng(seed, 0)
    hits = 0
    remaining = trials
    chunk = min(trials, 1_000_000)
    while remaining > 0:
        n = min(chunk, remaining)
        pts = rng.uniform(lo, hi, size=(n, s.dimension))
        hits += int(np.count_nonzero(s.contains(pts)))
        remaining -= n
    p = hits / trials
    return Estimate(box_vol * p, box_vol * math.sqrt(max(p * (1 - p), 0.0) / trials))


# ---------------------------------------------------------------------------
# Projections and widths
# ---------------------------------------------------------------------------


def merged_length(intervals: Sequence[tuple[float, float]]) -> float:
    """Total length of a union of closed intervals (sweep merge)."""
    if not intervals:
        return 0.0
    pairs = sorted(intervals)
    total = 0.0
    cur_lo, cur_hi = pairs[0]
    for lo, hi in pairs[1:]:
        if lo > cur_hi:
            total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    total += cur_hi - cur_lo
    return total


def projection_width(s: EuclideanSet, rho: Rotation) -> float:
    """Length of the projection of the set onto the line spanned by rho(e_1).

    Each ball projects to an interval of length 2r around <c, u>; each box
    projects to the interval between its extreme corner support values.
    The projected intervals are merged exactly.
    """
    if s.is_empty():
        raise ValueError("projection width requires a nonempty set")
    if rho.dimension != s.dimension:
        raise ValueError("rotation dimension does not match set dimension")
    u = rho.first_axis_image()
    intervals = []
    for p in s.pieces:
        if isinstance(p, Ball):
            c = float(p.center @ u)
            intervals.append((c - p.radius, c + p.radius))
        else:
            c = float(p.center() @ u)
            reach = float(np.abs(u) @ p.half_widths())
            intervals.append((c - reach, c + reach))
    return merged_length(intervals)


def mean_width(s: EuclideanSet, trials: int = 2048, seed: int = 0) -> Estimate:
    """Monte Carlo average of projection widths over Haar rotations."""
    if trials < 2:
        raise ValueError("mean_width requires trials >= 2")
    widths = run_trials(
        lambda rng: projection_width(s, sample_rotation(s.dimension, rng)),
        trials,
        seed,
    )
    mean = float(np.mean(widths))
    stderr = float(np.std(widths, ddof=1) / math.sqrt(trials))
    return Estimate(mean, stderr)


# ---------------------------------------------------------------------------
# Cover functional
# ---------------------------------------------------------------------------


def _cover_value(radii: np.ndarray, d: int) -> float:
    return float(np.sum(np.minimum(radii, radii**d)))


@dataclass(frozen=True, eq=False)
class CoverCandidate:
    """A ball cover of a target set with value sum_i min(r_i, r_i^d)."""

    balls: tuple
    value: float

    def verify_covers(
        self, target: EuclideanSet, samples: int = 4096, seed: int = 0
    ) -> bool:
        """Membership-sampling check that the balls cover the target."""
        if target.is_empty():
            return True
        lo, hi = target.bounding_box()
        rng = trial_rng(seed, 0)
        # Rejection-sample points of the target, then test cover membership.
        found = 0
        for _ in range(64):
            pts = rng.uniform(lo, hi, size=(samples, target.dimension))
            inside = pts[target.contains(pts)]
            if len(inside) == 0:
                continue
            found += len(inside)
            covered = np.zeros(len(inside), dtype=bool)
            for b in self.balls:
                covered |= b.contains(inside)
            if not bool(np.all(covered)):
                return False
            if found >= samples:
                return True
        return True


def _grid_cover_cells(s: EuclideanSet, side: float) -> set[tuple[int, ...]] | None:
    """Integer grid cells (side-aligned cubes) intersecting the set."""
    cells: set[tuple[int, ...]] = set()
    for p in s.pieces:
        lo, hi = p.bounds()
        lo_idx = np.floor(lo / side).astype(int)
        hi_idx = np.floor(hi / side - 1e-12).astype(int)
        counts = hi_idx - lo_idx + 1
        if np.prod(counts, dtype=float) > _GRID_CELL_CAP:
            return None
        ranges = [np.arange(a, b + 1) for a, b in zip(lo_idx, hi_idx)]
        mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, s.dimension)
        if isinstance(p, Ball):
            cell_lo = mesh * side
            cell_hi = cell_lo + side
            gap = np.maximum(np.maximum(cell_lo - p.center, p.center - cell_hi), 0.0)
            keep = np.einsum("ij,ij->i", gap, gap) <= p.radius**2
            mesh = mesh[keep]
        cells.update(map(tuple, mesh.tolist()))
        if len(cells) > _GRID_CELL_CAP:
            return None
    return cells


def cover_measure_upper(s: EuclideanSet, max_level: int = 6) -> CoverCandidate:
    """Certified upper bound for the cover functional inf sum min(r_i, r_i^d).

    Candidates: the set's own balls plus circumscribed balls of its boxes
    (the self cover), and dyadic cube-grid covers at scales 2^-j for
    j = 0..max_level with each cube replaced by its circumscribed ball.
    The best candidate is returned; its balls cover the set by construction.
    """
    if s.is_empty():
        raise ValueError("cover_measure_upper requires a nonempty set")
    d = s.dimension
    candidates: list[CoverCandidate] = []

    self_balls = []
    for p in s.pieces:
        if isinstance(p, Ball):
            self_balls.append(p)
        else:
            self_balls.append(Ball(p.center(), float(np.linalg.norm(p.half_widths()))))
    radii = np.array([b.radius for b in self_balls])
    candidates.append(CoverCandidate(tuple(self_balls), _cover_value(radii, d)))

    for j in range(max_level + 1):
        side = 2.0**-j
        cells = _grid_cover_cells(s, side)
        if cells is None:
            continue
        r = side * math.sqrt(d) / 2.0
        value = len(cells) * min(r, r**d)
        balls = tuple(
            Ball((np.array(c, dtype=float) + 0.5) * side, r) for c in sorted(cells)
        )
        candidates.append(CoverCandidate(balls, value))

    return min(candidates, key=lambda c: c.value)
