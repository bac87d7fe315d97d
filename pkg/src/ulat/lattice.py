"""Random lattices v * rho^T(Z^d), their intersections with sets, and
Monte Carlo verification of lattice-averaging estimates.

A lattice draw is a Haar-random rotation together with a dilation drawn
uniformly from (1, 2).  The module enumerates lattice points inside
bounded sets exactly, computes the order statistic of the resulting index
sets, and estimates the expectations that control point counts and orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaincc

from .geometry import EuclideanSet, Rotation, lebesgue_measure, mean_width, cover_measure_upper, sample_rotation, ball_volume
from .mc import ExpectationReport, mean_stderr, run_trials, trial_rng

__all__ = [
    "RandomLattice",
    "LatticePointSet",
    "sample_lattice",
    "lattice_point",
    "intersect",
    "order_of",
    "polar_constant",
    "check_lattice_averaging",
    "estimate_card",
    "estimate_order",
    "axis_hit_count",
    "integer_vectors_in_annulus",
    "AnnulusIndicator",
    "GaussianProfile",
    "SetIndicatorProfile",
]


@dataclass(frozen=True, eq=False)
class RandomLattice:
    """Lattice {v * rho^T(j) : j in Z^d} for a rotation rho and v in (1, 2)."""

    rotation: Rotation
    dilation: float

    def __post_init__(self) -> None:
        if not (1.0 < self.dilation < 2.0):
            raise ValueError("lattice dilation must lie in the open interval (1, 2)")

    @property
    def dimension(self) -> int:
        return self.rotation.dimension

    def points(self, indices: np.ndarray) -> np.ndarray:
        """Embed integer index vectors: k -> v * rho^T(k)."""
        return self.dilation * self.rotation.apply_transpose(np.asarray(indices, dtype=float))


def sample_lattice(d: int, rng: np.random.Generator) -> RandomLattice:
    """Draw (rho, v) with rho Haar and v uniform on (1, 2)."""
    rho = sample_rotation(d, rng)
    v = float(rng.uniform(1.0, 2.0))
    if v <= 1.0 or v >= 2.0:  # measure-zero edge under floating point
        v = 1.5
    return RandomLattice(rho, v)


def lattice_point(lat: RandomLattice, k) -> np.ndarray:
    """The lattice point v * rho^T(k) for one integer vector k."""
    k = np.asarray(k, dtype=float)
    if k.shape != (lat.dimension,):
        raise ValueError(f"index vector must have dimension {lat.dimension}")
    return lat.points(k)


@dataclass(frozen=True, eq=False)
class LatticePointSet:
    """Finite set of integer indices k whose embeddings lie in a target set."""

    indices: np.ndarray
    lattice: RandomLattice

    def __init__(self, indices, lattice: RandomLattice):
        arr = np.asarray(indices, dtype=int)
        if arr.size == 0:
            arr = arr.reshape(0, lattice.dimension)
        if arr.ndim != 2 or arr.shape[1] != lattice.dimension:
            raise ValueError("indices must be an (n, d) integer array")
        if len(arr) != len({tuple(row) for row in arr.tolist()}):
            raise ValueError("duplicate indices in lattice point set")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "indices", arr)
        object.__setattr__(self, "lattice", lattice)

    def __len__(self) -> int:
        return self.indices.shape[0]

    def points(self) -> np.ndarray:
        return self.lattice.points(self.indices)

    def order(self) -> int:
        """Sum over axes of the number of distinct index coordinates."""
        return order_of(self.indices)

    def contains_index(self, k) -> bool:
        k = tuple(int(x) for x in k)
        return k in {tuple(row) for row in self.indices.tolist()}


def order_of(indices) -> int:
    """Order of a finite subset of Z^d: sum of distinct-coordinate counts.

    The empty set has order 0, which keeps the statistic monotone.
    """
    arr = np.asarray(indices, dtype=int)
    if arr.size == 0:
        return 0
    if arr.ndim != 2:
        raise ValueError("indices must be an (n, d) array")
    return int(sum(len(np.unique(arr[:, i])) for i in range(arr.shape[1])))


# ---------------------------------------------------------------------------
# Integer point enumeration
# ---------------------------------------------------------------------------


def integer_vectors_in_annulus(r_lo: float, r_hi: float, d: int) -> np.ndarray:
    """All k in Z^d with r_lo <= ||k|| <= r_hi, as an (n, d) array.

    d = 2 builds per-column index ranges directly; other dimensions filter
    a bounding cube.
    """
    if r_hi < 0:
        return np.empty((0, d), dtype=int)
    r_lo = max(r_lo, 0.0)
    kmax = int(math.floor(r_hi + 1e-9))
    if d == 2:
        cols = []
        k1 = np.arange(-kmax, kmax + 1)
        hi2 = r_hi**2 - k1.astype(float) ** 2
        lo2 = r_lo**2 - k1.astype(float) ** 2
        for a, h2, l2 in zip(k1, hi2, lo2):
            if h2 < -1e-12:
                continue
            h = int(math.floor(math.sqrt(max(h2, 0.0)) + 1e-9))
            if l2 <= 0:
                rng2 = np.arange(-h, h + 1)
            else:
                low = int(math.ceil(math.sqrt(l2) - 1e-9))
                if low > h:
                    continue
                rng2 = np.concatenate([np.arange(-h, -low + 1), np.arange(low, h + 1)])
                if low == 0:
                    rng2 = np.unique(rng2)
            cols.append(np.column_stack([np.full(len(rng2), a), rng2]))
        if not cols:
            return np.empty((0, 2), dtype=int)
        return np.concatenate(cols).astype(int)
    ranges = [np.arange(-kmax, kmax + 1)] * d
    mesh = np.stack(np.meshgrid(*ranges, indexing="ij"), axis=-1).reshape(-1, d)
    norm2 = np.einsum("ij,ij->i", mesh, mesh)
    keep = (norm2 <= r_hi**2 + 1e-9) & (norm2 >= r_lo**2 - 1e-9)
    return mesh[keep].astype(int)


def intersect(lat: RandomLattice, sigma: EuclideanSet) -> LatticePointSet:
    """Exact enumeration of {k : v * rho^T(k) in sigma} for bounded sigma.

    Since the embedding is an isometry up to the dilation, candidates are
    restricted to ||k|| <= bounding_radius(sigma) / v before the exact
    membership test.
    """
    if sigma.dimension != lat.dimension:
        raise ValueError("set dimension does not match lattice dimension")
    if sigma.is_empty():
        return LatticePointSet(np.empty((0, lat.dimension), dtype=int), lat)
    r_hi = sigma.bounding_radius() / lat.dilation + 1e-9
    r_lo = max(sigma.inner_radius() / lat.dilation - 1e-9, 0.0)
    cand = integer_vectors_in_annulus(r_lo, r_hi, lat.dimension)
    if len(cand) == 0:
        return LatticePointSet(np.empty((0, lat.dimension), dtype=int), lat)
    mask = sigma.contains(lat.points(cand))
    return LatticePointSet(cand[mask], lat)


def axis_hit_count(lat: RandomLattice, sigma: EuclideanSet, k_range: int) -> int:
    """Number of nonzero first coordinates k such that some index (k, k')
    embeds into sigma.

    ``k_range`` must dominate bounding_radius(sigma) / v so that no hit can
    be missed; the remaining coordinates are enumerated over the induced
    bounded range.
    """
    if sigma.is_empty():
        return 0
    needed = sigma.bounding_radius() / lat.dilation
    if k_range < needed - 1e-9:
        raise ValueError(f"k_range {k_range} is below bounding_radius/v = {needed:.3f}")
    hits = intersect(lat, sigma).indices
    if len(hits) == 0:
        return 0
    first = hits[:, 0]
    first = first[(first != 0) & (np.abs(first) <= k_range)]
    return int(len(np.unique(first)))


# ---------------------------------------------------------------------------
# Polar constant
# ---------------------------------------------------------------------------


def polar_constant(d: int) -> float:
    """Constant C(d) in the rotation-average polar identity.

    Averaging f(v * rho(u)) with weight v^(d-1) over Haar rotations and
    v in (0, inf) integrates f against C(d) times Lebesgue measure, with
    C(d) = 1 / area(S^{d-1}) = Gamma(d/2) / (2 pi^{d/2}).  In one dimension
    the two-point rotation group gives C(1) = 1/2.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return math.gamma(d / 2.0) / (2.0 * math.pi ** (d / 2.0))


# ---------------------------------------------------------------------------
# Nonnegative radial-profile functions for the averaging checks
# ---------------------------------------------------------------------------


class AnnulusIndicator:
    """Indicator of {r_inner <= ||x|| <= r_outer}; r_inner = 0 gives a ball."""

    def __init__(self, dimension: int, r_inner: float, r_outer: float):
        if not (0 <= r_inner < r_outer):
            raise ValueError("need 0 <= r_inner < r_outer")
        self.dimension = int(dimension)
        self.r_inner = float(r_inner)
        self.r_outer = float(r_outer)
        self.support_radius = float(r_outer)

    def value(self, points: np.ndarray) -> np.ndarray:
        n2 = np.einsum("...i,...i->...", points, points)
        return ((n2 >= self.r_inner**2 - 1e-15) & (n2 <= self.r_outer**2 + 1e-15)).astype(float)

    def integral_outside(self, c: float) -> float:
        lo = max(c, self.r_inner)
        if lo >= self.r_outer:
            return 0.0
        d = self.dimension
        return ball_volume(d, self.r_outer) - ball_volume(d, lo)


class GaussianProfile:
    """The radial Gaussian exp(-pi * a * ||x||^2)."""

    def __init__(self, dimension: int, a: float = 1.0):
        if a <= 0:
            raise ValueError("Gaussian scale must be positive")
        self.dimension = int(dimension)
        self.a = float(a)
        self.support_radius = math.inf

    def value(self, points: np.ndarray) -> np.ndarray:
        n2 = np.einsum("...i,...i->...", points, points)
        return np.exp(-math.pi * self.a * n2)

    def integral_outside(self, c: float) -> float:
        d, a = self.dimension, self.a
        return a ** (-d / 2.0) * float(gammaincc(d / 2.0, math.pi * a * c * c))

    def tail_radius(self, eps_abs: float) -> float:
        r = 1.0
        while self.integral_outside(r) > eps_abs and r < 64.0:
            r *= 1.25
        return r


class SetIndicatorProfile:
    """Indicator of an arbitrary bounded set, with Monte Carlo references."""

    def __init__(self, target: EuclideanSet, ref_samples: int = 200_000, ref_seed: int = 0):
        if target.is_empty():
            raise ValueError("set indicator requires a nonempty set")
        self.dimension = target.dimension
        self.target = target
        self.support_radius = target.bounding_radius()
        self._ref_samples = ref_samples
        self._ref_seed = ref_seed

    def value(self, points: np.ndarray) -> np.ndarray:
        return self.target.contains(points).astype(float)

    def integral_outside(self, c: float) -> float:
        lo, hi = self.target.bounding_box()
        vol = float(np.prod(hi - lo))
        rng = trial_rng(self._ref_seed, 0)
        pts = rng.uniform(lo, hi, size=(self._ref_samples, self.dimension))
        inside = self.target.contains(pts)
        far = np.einsum("ij,ij->i", pts, pts) >= c * c
        return vol * float(np.count_nonzero(inside & far)) / self._ref_samples


def _profile_truncation_radius(phi, scale_min: float, reference: float) -> float:
    """Index radius beyond which the lattice sum tail is negligible.

    Compact support truncates exactly; otherwise the profile must declare a
    decay envelope through ``tail_radius``.  The target absolute tail is
    1e-6 of the reference integral.
    """
    if math.isfinite(phi.support_radius):
        return phi.support_radius / scale_min + 1e-9
    if not hasattr(phi, "tail_radius"):
        raise ValueError(
            "profile has neither compact support nor a declared decay bound"
        )
    d = phi.dimension
    eps = 1e-6 * max(reference, 1e-12)
    # Shell-count correction: points k at radius u contribute at most the
    # envelope integral over {||x|| >= u - sqrt(d)} scaled by cell volume 1.
    r = phi.tail_radius(eps / (2.0**d))
    return r / scale_min + math.sqrt(d) + 1.0


def check_lattice_averaging(
    phi, trials: int = 10_000, seed: int = 0, threads: int = 1
) -> tuple[ExpectationReport, ExpectationReport]:
    """Monte Carlo check of the two lattice-averaging estimates.

    Returns reports for

    (a)  E[ sum_{k != 0} phi(v * rho(k)) ]   against  int_{||x|| >= 1} phi,
    (b)  E[ sum_{k != 0} phi(rho(k) / v) ]   against  int_{||x|| >= 1/2} phi.

    The inner sums are truncated where the declared decay of phi makes the
    tail below 1e-6 of the reference scale.
    """
    d = phi.dimension
    ref_a = phi.integral_outside(1.0)
    ref_b = phi.integral_outside(0.5)
    rad_a = _profile_truncation_radius(phi, 1.0, ref_a)  # v >= 1
    rad_b = _profile_truncation_radius(phi, 0.5, ref_b)  # 1/v >= 1/2
    cand_a = integer_vectors_in_annulus(1.0, rad_a, d)
    cand_b = integer_vectors_in_annulus(1.0, rad_b, d)
    cand_a = cand_a[np.any(cand_a != 0, axis=1)]
    cand_b = cand_b[np.any(cand_b != 0, axis=1)]

    def one(rng: np.random.Generator) -> np.ndarray:
        rho = sample_rotation(d, rng)
        v = float(rng.uniform(1.0, 2.0))
        sum_a = float(np.sum(phi.value(v * rho.apply(cand_a)))) if len(cand_a) else 0.0
        sum_b = float(np.sum(phi.value(rho.apply(cand_b) / v))) if len(cand_b) else 0.0
        return np.array([sum_a, sum_b])

    values = run_trials(one, trials, seed, threads=threads)
    est_a, err_a = mean_stderr(values[:, 0])
    est_b, err_b = mean_stderr(values[:, 1])
    extras_a = {"reference": ref_a, "ratio": est_a / ref_a if ref_a > 0 else math.inf}
    extras_b = {"reference": ref_b, "ratio": est_b / ref_b if ref_b > 0 else math.inf}
    rep_a = ExpectationReport(est_a, err_a, trials, ref_a, seed, extras=extras_a)
    rep_b = ExpectationReport(est_b, err_b, trials, ref_b, seed, extras=extras_b)
    return rep_a, rep_b


def gaussian_polar_check(d: int, rtol: float = 1e-8) -> tuple[float, float]:
    """Quadrature verification of the polar identity with a unit Gaussian.

    Returns (radial integral, C(d)); the two must agree since the Gaussian
    integrates to 1 over R^d.
    """
    val, _ = integrate.quad(lambda v: math.exp(-math.pi * v * v) * v ** (d - 1), 0, np.inf)
    return float(val), polar_constant(d)


# ---------------------------------------------------------------------------
# Expectation estimates for intersections
# ---------------------------------------------------------------------------


def _require_origin(sigma: EuclideanSet) -> None:
    if not sigma.contains(np.zeros(sigma.dimension)):
        raise ValueError("the target set must contain the origin")


def estimate_card(
    sigma: EuclideanSet, trials: int = 2000, seed: int = 0, threads: int = 1
) -> ExpectationReport:
    """Estimate E[card(lattice points in sigma) - 1] over random lattices.

    The report's bound field carries polar_constant(d) * |sigma| as the
    analytic reference scale.
    """
    _require_origin(sigma)
    d = sigma.dimension
    measure = lebesgue_measure(sigma, seed=seed + 1)
    values = run_trials(
        lambda rng: float(len(intersect(sample_lattice(d, rng), sigma)) - 1),
        trials,
        seed,
        threads=threads,
    )
    est, err = mean_stderr(values)
    bound = polar_constant(d) * measure.value
    extras = {
        "sigma_measure": measure.value,
        "ratio_to_measure": est / measure.value if measure.value > 0 else 0.0,
    }
    return ExpectationReport(est, err, trials, bound, seed, extras=extras)


def estimate_order(
    sigma: EuclideanSet, trials: int = 2000, seed: int = 0, threads: int = 1
) -> ExpectationReport:
    """Estimate E[order of the index set - d] over random lattices.

    The report carries the cover-functional upper bound and the mean width
    as reference scales; the bound field is polar_constant(d) times their
    minimum.
    """
    _require_origin(sigma)
    if sigma.is_empty():
        raise ValueError("estimate_order requires a bounded nonempty set")
    d = sigma.dimension
    values = run_trials(
        lambda rng: float(intersect(sample_lattice(d, rng), sigma).order() - d),
        trials,
        seed,
        threads=threads,
    )
    est, err = mean_stderr(values)
    mu_up = cover_measure_upper(sigma).value
    width = mean_width(sigma, seed=seed + 1)
    nu = min(mu_up, width.value)
    extras = {
        "cover_upper": mu_up,
        "mean_width": width.value,
        "mean_width_stderr": width.stderr,
        "nu": nu,
        "ratio_to_nu": est / nu if nu > 0 else 0.0,
    }
    return ExpectationReport(est, err, trials, polar_constant(d) * nu, seed, extras=extras)
