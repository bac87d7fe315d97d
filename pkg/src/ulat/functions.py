"""Closed-form test functions with exact Fourier transforms.

The transform convention is  fhat(xi) = integral f(x) exp(+2 i pi <x, xi>) dx.
Available kinds: Gaussians exp(-pi a ||x||^2), box indicators, finite linear
combinations, modulations and translations.  Every kind carries closed
forms for both sides, radial decay envelopes, and (for compact kinds) an
explicit support set.

Cross-correlations  C_{f,g}(z) = integral f(x) conj(g(x + z)) dx  are
evaluated in closed form for any pair of kinds; they power exact torus
energies of periodizations and the tail-energy routines.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, gammaincc

from .geometry import AxisBox, Ball, EuclideanSet
from .mc import Estimate, trial_rng

__all__ = [
    "TestFunction",
    "Gaussian",
    "BoxIndicator",
    "Combination",
    "Modulated",
    "Translated",
    "evaluate",
    "evaluate_hat",
    "cross_correlation",
    "norm_sq",
    "tail_energy",
    "function_from_dict",
    "function_to_dict",
]

_TWO_PI_I = 2j * math.pi


# ---------------------------------------------------------------------------
# Kinds
# ---------------------------------------------------------------------------


class TestFunction:
    """Base class; subclasses implement closed forms on both sides."""

    dimension: int

    # -- evaluation ------------------------------------------------------

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def hat(self, xi) -> np.ndarray:
        raise NotImplementedError

    # -- structure ---------------------------------------------------------

    def leaves(self) -> list["_Leaf"]:
        raise NotImplementedError

    def support_set(self) -> EuclideanSet | None:
        """Support as a union of boxes, or None for full-support kinds."""
        return None

    @property
    def support_radius(self) -> float:
        s = self.support_set()
        return s.bounding_radius() if s is not None else math.inf

    # -- decay envelopes ---------------------------------------------------

    def envelope(self, r):
        """Nonincreasing radial majorant of |f|."""
        raise NotImplementedError

    def envelope_hat(self, r):
        """Nonincreasing radial majorant of |fhat|."""
        raise NotImplementedError

    def spatial_radius(self, tol: float = 1e-9) -> float:
        """Radius beyond which |f| is below tol times its peak scale."""
        return max(leaf.spatial_radius(tol) for leaf in self.leaves())

    def hat_radius(self, tol: float = 1e-9) -> float:
        """Radius beyond which |fhat| is certifiably below tol.

        Only available when every leaf is Gaussian; box transforms decay
        too slowly for a radial cutoff certificate.
        """
        radii = []
        for leaf in self.leaves():
            if not leaf.is_gauss:
                raise ValueError("hat-side radial cutoff requires Gaussian leaves")
            radii.append(leaf.hat_radius(tol))
        return max(radii)

    def _coerce(self, x) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        if arr.shape[-1] != self.dimension:
            raise ValueError(
                f"expected points of dimension {self.dimension}, got shape {arr.shape}"
            )
        return arr


@dataclass(frozen=True, eq=False)
class Gaussian(TestFunction):
    """f(x) = exp(-pi a ||x||^2); self-dual at a = 1."""

    a: float
    dimension: int = 1

    def __post_init__(self):
        if self.a <= 0:
            raise ValueError("Gaussian scale must be positive")

    def value(self, x):
        x = self._coerce(x)
        n2 = np.einsum("...i,...i->...", x, x)
        return np.exp(-math.pi * self.a * n2).astype(complex)

    def hat(self, xi):
        xi = self._coerce(xi)
        n2 = np.einsum("...i,...i->...", xi, xi)
        return (self.a ** (-self.dimension / 2.0) * np.exp(-math.pi * n2 / self.a)).astype(
            complex
        )

    def leaves(self):
        d = self.dimension
        return [_Leaf(True, 1.0 + 0.0j, np.zeros(d), a=self.a, center=np.zeros(d))]

    def envelope(self, r):
        return np.exp(-math.pi * self.a * np.asarray(r, dtype=float) ** 2)

    def envelope_hat(self, r):
        return self.a ** (-self.dimension / 2.0) * np.exp(
            -math.pi * np.asarray(r, dtype=float) ** 2 / self.a
        )


@dataclass(frozen=True, eq=False)
class BoxIndicator(TestFunction):
    """Indicator of an axis-aligned box."""

    box: AxisBox

    @property
    def dimension(self) -> int:
        return self.box.dimension

    def value(self, x):
        x = self._coerce(x)
        return self.box.contains(x).astype(complex)

    def hat(self, xi):
        xi = self._coerce(xi)
        widths = self.box.upper - self.box.lower
        center = self.box.center()
        prod = np.prod(widths * np.sinc(widths * xi), axis=-1)
        return prod * np.exp(_TWO_PI_I * (xi @ center))

    def leaves(self):
        return [_Leaf(False, 1.0 + 0.0j, np.zeros(self.dimension),
                      lower=self.box.lower.copy(), upper=self.box.upper.copy())]

    def support_set(self):
        return EuclideanSet(self.dimension, [self.box])

    def envelope(self, r):
        r = np.asarray(r, dtype=float)
        return (r <= self.box.bounding_radius() + 1e-15).astype(float)

    def envelope_hat(self, r):
        r = np.asarray(r, dtype=float)
        widths = self.box.upper - self.box.lower
        vol = float(np.prod(widths))
        slow = vol * math.sqrt(self.dimension) / (math.pi * float(np.min(widths)))
        with np.errstate(divide="ignore"):
            return np.minimum(vol, slow / np.maximum(r, 1e-300))


@dataclass(frozen=True, eq=False)
class Combination(TestFunction):
    """Finite linear combination sum_i c_i f_i."""

    terms: tuple  # of (complex coefficient, TestFunction)

    def __init__(self, terms):
        terms = tuple((complex(c), f) for c, f in terms)
        if not terms:
            raise ValueError("combination requires at least one term")
        d = terms[0][1].dimension
        if any(f.dimension != d for _, f in terms):
            raise ValueError("combination terms must share one dimension")
        object.__setattr__(self, "terms", terms)

    @property
    def dimension(self) -> int:
        return self.terms[0][1].dimension

    def value(self, x):
        return sum(c * f.value(x) for c, f in self.terms)

    def hat(self, xi):
        return sum(c * f.hat(xi) for c, f in self.terms)

    def leaves(self):
        out = []
        for c, f in self.terms:
            for leaf in f.leaves():
                out.append(leaf.scaled(c))
        return out

    def support_set(self):
        pieces = []
        for _, f in self.terms:
            s = f.support_set()
            if s is None:
                return None
            pieces.extend(s.pieces)
        return EuclideanSet(self.dimension, pieces)

    def envelope(self, r):
        return sum(abs(c) * f.envelope(r) for c, f in self.terms)

    def envelope_hat(self, r):
        return sum(abs(c) * f.envelope_hat(r) for c, f in self.terms)


@dataclass(frozen=True, eq=False)
class Modulated(TestFunction):
    """f(x) = base(x) exp(+2 i pi <x, y>), so fhat(xi) = base_hat(xi + y)."""

    base: TestFunction
    y: np.ndarray

    def __init__(self, base: TestFunction, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if y.shape != (base.dimension,):
            raise ValueError("modulation frequency must match the base dimension")
        y.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "y", y)

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def value(self, x):
        x = self._coerce(x)
        return self.base.value(x) * np.exp(_TWO_PI_I * (x @ self.y))

    def hat(self, xi):
        xi = self._coerce(xi)
        return self.base.hat(xi + self.y)

    def leaves(self):
        return [leaf.modulated(self.y) for leaf in self.base.leaves()]

    def support_set(self):
        return self.base.support_set()

    def envelope(self, r):
        return self.base.envelope(r)

    def envelope_hat(self, r):
        shifted = np.maximum(np.asarray(r, dtype=float) - np.linalg.norm(self.y), 0.0)
        return self.base.envelope_hat(shifted)


@dataclass(frozen=True, eq=False)
class Translated(TestFunction):
    """f(x) = base(x - x0), so fhat(xi) = exp(2 i pi <x0, xi>) base_hat(xi)."""

    base: TestFunction
    x0: np.ndarray

    def __init__(self, base: TestFunction, x0):
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        if x0.shape != (base.dimension,):
            raise ValueError("translation offset must match the base dimension")
        x0.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "x0", x0)

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def value(self, x):
        x = self._coerce(x)
        return self.base.value(x - self.x0)

    def hat(self, xi):
        xi = self._coerce(xi)
        return self.base.hat(xi) * np.exp(_TWO_PI_I * (xi @ self.x0))

    def leaves(self):
        return [leaf.translated(self.x0) for leaf in self.base.leaves()]

    def support_set(self):
        s = self.base.support_set()
        return s.translate(self.x0) if s is not None else None

    def envelope(self, r):
        shifted = np.maximum(np.asarray(r, dtype=float) - np.linalg.norm(self.x0), 0.0)
        return self.base.envelope(shifted)

    def envelope_hat(self, r):
        return self.base.envelope_hat(r)


def evaluate(f: TestFunction, x):
    """Closed-form pointwise evaluation of f."""
    return f.value(x)


def evaluate_hat(f: TestFunction, xi):
    """Closed-form pointwise evaluation of fhat."""
    return f.hat(xi)


# ---------------------------------------------------------------------------
# Leaves and cross-correlations
# ---------------------------------------------------------------------------


@dataclass
class _Leaf:
    """Separable atom: coef * shape(x) * exp(2 i pi <x, modulation>).

    shape is either a Gaussian bump exp(-pi a ||x - center||^2) or a box
    indicator [lower, upper].
    """

    is_gauss: bool
    coef: complex
    modulation: np.ndarray
    a: float | None = None
    center: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def scaled(self, c: complex) -> "_Leaf":
        out = self.copy()
        out.coef = self.coef * c
        return out

    def modulated(self, y: np.ndarray) -> "_Leaf":
        out = self.copy()
        out.modulation = self.modulation + y
        return out

    def translated(self, t: np.ndarray) -> "_Leaf":
        out = self.copy()
        # value(x - t): shift the shape and absorb the constant phase.
        out.coef = self.coef * np.exp(-_TWO_PI_I * float(t @ self.modulation))
        if self.is_gauss:
            out.center = self.center + t
        else:
            out.lower = self.lower + t
            out.upper = self.upper + t
        return out

    def copy(self) -> "_Leaf":
        return _Leaf(
            self.is_gauss,
            self.coef,
            self.modulation.copy(),
            a=self.a,
            center=None if self.center is None else self.center.copy(),
            lower=None if self.lower is None else self.lower.copy(),
            upper=None if self.upper is None else self.upper.copy(),
        )

    def spatial_radius(self, tol: float) -> float:
        if not self.is_gauss:
            far = np.maximum(np.abs(self.lower), np.abs(self.upper))
            return float(np.linalg.norm(far)) + 1e-9
        reach = math.sqrt(max(math.log(1.0 / tol), 0.0) / (math.pi * self.a))
        return float(np.linalg.norm(self.center)) + reach

    def hat_radius(self, tol: float) -> float:
        # |hat| of a Gaussian leaf is centered at -modulation with scale 1/a.
        reach = math.sqrt(max(math.log(1.0 / tol), 0.0) * self.a / math.pi)
        return float(np.linalg.norm(self.modulation)) + reach


def _exp_integral(lo, hi, omega: float):
    """integral_lo^hi exp(2 i pi omega x) dx, elementwise over arrays."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    width = np.maximum(hi - lo, 0.0)
    if omega == 0.0:
        return width.astype(complex)
    out = (np.exp(_TWO_PI_I * omega * hi) - np.exp(_TWO_PI_I * omega * lo)) / (
        _TWO_PI_I * omega
    )
    return np.where(width > 0, out, 0.0)


def _gauss_segment(alpha, beta, a: float, gamma, omega: float):
    """integral_alpha^beta exp(-pi a (x - gamma)^2 + 2 i pi omega x) dx."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    root = math.sqrt(math.pi * a)
    shift = 1j * omega / a
    upper = erf(root * (beta - gamma - shift))
    lower = erf(root * (alpha - gamma - shift))
    prefactor = np.exp(_TWO_PI_I * omega * gamma - math.pi * omega * omega / a)
    return prefactor * (upper - lower) / (2.0 * math.sqrt(a))


def _pair_kernel(l1: _Leaf, l2: _Leaf, z: np.ndarray) -> np.ndarray:
    """integral l1(x) conj(l2(x + z)) dx for an (n, d) array of shifts."""
    z = np.atleast_2d(z)
    n, d = z.shape
    omega = l1.modulation - l2.modulation
    out = np.full(n, l1.coef * np.conj(l2.coef), dtype=complex)
    out *= np.exp(-_TWO_PI_I * (z @ l2.modulation))
    for i in range(d):
        zi = z[:, i]
        wi = float(omega[i])
        if l1.is_gauss and l2.is_gauss:
            a1, a2 = l1.a, l2.a
            mu1 = float(l1.center[i])
            beta = float(l2.center[i]) - zi
            total = a1 + a2
            mu_star = (a1 * mu1 + a2 * beta) / total
            cross = a1 * a2 / total
            axis = (
                total**-0.5
                * np.exp(-math.pi * cross * (mu1 - beta) ** 2)
                * np.exp(_TWO_PI_I * wi * mu_star)
                * math.exp(-math.pi * wi * wi / total)
            )
        elif not l1.is_gauss and not l2.is_gauss:
            lo = np.maximum(float(l1.lower[i]), float(l2.lower[i]) - zi)
            hi = np.minimum(float(l1.upper[i]), float(l2.upper[i]) - zi)
            axis = _exp_integral(lo, hi, wi)
        elif not l1.is_gauss:  # box x gauss
            gamma = float(l2.center[i]) - zi
            axis = _gauss_segment(float(l1.lower[i]), float(l1.upper[i]), l2.a, gamma, wi)
        else:  # gauss x box
            lo = float(l2.lower[i]) - zi
            hi = float(l2.upper[i]) - zi
            axis = _gauss_segment(lo, hi, l1.a, float(l1.center[i]), wi)
        out *= axis
    return out


def cross_correlation(f: TestFunction, g: TestFunction, z) -> np.ndarray:
    """C_{f,g}(z) = integral f(x) conj(g(x + z)) dx, in closed form.

    ``z`` may be a single point or an (n, d) array.
    """
    if f.dimension != g.dimension:
        raise ValueError("cross-correlation requires matching dimensions")
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 1
    pts = np.atleast_2d(z)
    acc = np.zeros(pts.shape[0], dtype=complex)
    for l1 in f.leaves():
        for l2 in g.leaves():
            acc += _pair_kernel(l1, l2, pts)
    return acc[0] if scalar else acc


def norm_sq(f: TestFunction) -> float:
    """Squared L2 norm, exact via the autocorrelation at 0."""
    return float(np.real(cross_correlation(f, f, np.zeros(f.dimension))))


# ---------------------------------------------------------------------------
# Tail energies
# ---------------------------------------------------------------------------


def _single_gauss_leaf(f: TestFunction) -> _Leaf | None:
    leaves = f.leaves()
    if len(leaves) == 1 and leaves[0].is_gauss and not np.any(leaves[0].modulation):
        return leaves[0]
    return None


def _gauss_ball_tail(c_abs2: float, a: float, d: int, radius: float) -> float:
    """integral_{||x|| >= radius} |c exp(-pi a ||x||^2)|^2 dx."""
    return c_abs2 * (2.0 * a) ** (-d / 2.0) * float(
        gammaincc(d / 2.0, 2.0 * math.pi * a * radius * radius)
    )


def _side_eval(f: TestFunction, side: str):
    return f.value if side == "space" else f.hat


def _side_envelope(f: TestFunction, side: str):
    return f.envelope if side == "space" else f.envelope_hat


def _quad_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def _piece_energy(fn, piece, d: int, level: int) -> float:
    """Quadrature of |fn|^2 over one ball or box piece (smooth integrands)."""
    n = 24 * 2**level
    if isinstance(piece, AxisBox):
        xs, ws = _quad_nodes(n)
        axes = []
        weights = []
        for i in range(d):
            lo, hi = piece.lower[i], piece.upper[i]
            axes.append(0.5 * (hi - lo) * xs + 0.5 * (hi + lo))
            weights.append(0.5 * (hi - lo) * ws)
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        wmesh = np.prod(
            np.stack(np.meshgrid(*weights, indexing="ij"), axis=-1).reshape(-1, d), axis=1
        )
        vals = np.abs(fn(mesh)) ** 2
        return float(np.sum(wmesh * vals))
    assert isinstance(piece, Ball)
    if d == 1:
        xs, ws = _quad_nodes(n)
        pts = piece.center[0] + piece.radius * xs
        vals = np.abs(fn(pts[:, None])) ** 2
        return float(piece.radius * np.sum(ws * vals))
    if d == 2:
        xs, ws = _quad_nodes(n)
        r = 0.5 * piece.radius * (xs + 1.0)
        wr = 0.5 * piece.radius * ws * r
        m = 2 * n
        theta = 2.0 * math.pi * np.arange(m) / m
        dirs = np.column_stack([np.cos(theta), np.sin(theta)])
        pts = piece.center + r[:, None, None] * dirs[None, :, :]
        vals = np.abs(fn(pts.reshape(-1, 2)).reshape(len(r), m)) ** 2
        return float((2.0 * math.pi / m) * np.sum(wr * np.sum(vals, axis=1)))
    if d == 3:
        xs, ws = _quad_nodes(n)
        r = 0.5 * piece.radius * (xs + 1.0)
        wr = 0.5 * piece.radius * ws * r * r
        cs, wc = _quad_nodes(n)
        m = 2 * n
        theta = 2.0 * math.pi * np.arange(m) / m
        sin_phi = np.sqrt(1.0 - cs**2)
        dirs = np.stack(
            [
                sin_phi[:, None] * np.cos(theta)[None, :],
                sin_phi[:, None] * np.sin(theta)[None, :],
                np.broadcast_to(cs[:, None], (n, m)),
            ],
            axis=-1,
        ).reshape(-1, 3)
        pts = piece.center + r[:, None, None] * dirs[None, :, :]
        vals = np.abs(fn(pts.reshape(-1, 3))).reshape(len(r), len(dirs)) ** 2
        ang_w = np.repeat(wc, m) * (2.0 * math.pi / m)
        return float(np.sum(wr * (vals @ ang_w)))
    raise ValueError("piece quadrature supports d <= 3")


def band_energy(f: TestFunction, s: EuclideanSet, side: str = "hat", rtol: float = 1e-9) -> float:
    """integral_S of |f|^2 or |fhat|^2, by adaptive per-piece quadrature.

    Pieces must be pairwise disjoint so the union integral is a plain sum.
    Intended for smooth integrands (hat side of compact functions, or
    Gaussian-type space sides).
    """
    if s.is_empty():
        return 0.0
    if not s.pairwise_disjoint():
        raise ValueError("band_energy requires pairwise disjoint pieces")
    fn = _side_eval(f, side)
    total = 0.0
    for piece in s.pieces:
        prev = _piece_energy(fn, piece, s.dimension, 0)
        for level in range(1, 5):
            cur = _piece_energy(fn, piece, s.dimension, level)
            if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
                prev = cur
                break
            prev = cur
        total += prev
    return total


def tail_energy(
    f: TestFunction,
    s: EuclideanSet,
    method: str = "auto",
    side: str = "space",
    grid_h: float = 0.05,
    grid_extent: float | None = None,
    trials: int = 200_000,
    seed: int = 0,
) -> Estimate:
    """Energy of f (or fhat) outside the set ``s``.

    Methods:
      closed_form           Gaussian against a concentric ball (exact),
      complement_quadrature ||f||^2 minus the smooth in-set quadrature,
      grid                  rectangle rule with Richardson error estimate,
      monte_carlo           importance or window sampling with stderr.
    """
    if side not in ("space", "hat"):
        raise ValueError("side must be 'space' or 'hat'")
    if s.dimension != f.dimension and not s.is_empty():
        raise ValueError("set dimension does not match function dimension")
    total = norm_sq(f)

    if method == "auto":
        method = _auto_tail_method(f, s, side)

    if method == "closed_form":
        leaf = _single_gauss_leaf(f)
        if leaf is None:
            raise ValueError("closed_form tail energy requires a plain Gaussian")
        if s.is_empty():
            radius, centered = 0.0, True
        elif len(s.pieces) == 1 and isinstance(s.pieces[0], Ball):
            ball = s.pieces[0]
            radius = ball.radius
            anchor = leaf.center if side == "space" else np.zeros(f.dimension)
            centered = bool(np.allclose(ball.center, anchor, atol=1e-12))
        else:
            centered = False
        if not centered:
            raise ValueError("closed_form tail energy requires a concentric ball")
        c2 = abs(leaf.coef) ** 2
        if side == "space":
            return Estimate(_gauss_ball_tail(c2, leaf.a, f.dimension, radius), 0.0, exact=True)
        # |fhat|^2 = |c|^2 a^-d exp(-2 pi ||xi||^2 / a)
        d = f.dimension
        value = c2 * leaf.a ** (-d) * (leaf.a / 2.0) ** (d / 2.0) * float(
            gammaincc(d / 2.0, 2.0 * math.pi * radius * radius / leaf.a)
        )
        return Estimate(value, 0.0, exact=True)

    if method == "complement_quadrature":
        inside = band_energy(f, s, side=side)
        return Estimate(max(total - inside, 0.0), 1e-9 * total)

    if method == "grid":
        env = _side_envelope(f, side)
        extent = grid_extent
        if extent is None:
            extent = _envelope_extent(f, side)
        if not math.isfinite(extent):
            raise ValueError("grid tail energy needs a finite envelope extent")
        need = _envelope_extent(f, side)
        if math.isfinite(need) and extent < need:
            raise ValueError(
                "grid resolution does not cover the decay envelope: "
                f"extent {extent} < required {need}"
            )
        fn = _side_eval(f, side)
        coarse = _grid_tail(fn, s, f.dimension, extent, grid_h)
        fine = _grid_tail(fn, s, f.dimension, extent, grid_h / 2.0)
        # Mass of the envelope outside the window, as a one-sided error term.
        leak = _envelope_leak(env, f.dimension, extent)
        return Estimate(fine, abs(fine - coarse) + leak)

    if method == "monte_carlo":
        return _mc_tail(f, s, side, trials, seed)

    raise ValueError(f"unknown tail-energy method: {method!r}")


def _auto_tail_method(f: TestFunction, s: EuclideanSet, side: str) -> str:
    leaf = _single_gauss_leaf(f)
    if leaf is not None:
        if s.is_empty():
            return "closed_form"
        if len(s.pieces) == 1 and isinstance(s.pieces[0], Ball):
            ball = s.pieces[0]
            anchor = leaf.center if side == "space" else np.zeros(f.dimension)
            if np.allclose(ball.center, anchor, atol=1e-12):
                return "closed_form"
    if side == "hat" and math.isfinite(f.support_radius):
        return "complement_quadrature"
    if side == "space" and all(leaf.is_gauss for leaf in f.leaves()):
        return "complement_quadrature"
    return "grid"


def _envelope_extent(f: TestFunction, side: str, tol: float = 1e-7) -> float:
    if side == "space":
        return f.spatial_radius(tol)
    try:
        return f.hat_radius(tol)
    except ValueError:
        return math.inf


def _envelope_leak(env, d: int, extent: float) -> float:
    from scipy import integrate

    surface = 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
    val, _ = integrate.quad(
        lambda r: float(np.asarray(env(r)).reshape(())) ** 2 * r ** (d - 1),
        extent,
        extent + 64.0,
    )
    return surface * val


def _grid_tail(fn, s: EuclideanSet, d: int, extent: float, h: float) -> float:
    axes = [np.arange(-extent + h / 2.0, extent, h)] * d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    vals = np.abs(fn(mesh)) ** 2
    if not s.is_empty():
        vals = vals * (~s.contains(mesh))
    return float(h**d * np.sum(vals))


def _mc_tail(f: TestFunction, s: EuclideanSet, side: str, trials: int, seed: int) -> Estimate:
    rng = trial_rng(seed, 0)
    d = f.dimension
    leaf = _single_gauss_leaf(f)
    if leaf is not None:
        # Importance sampling from the density proportional to the energy;
        # by Plancherel the total mass is (2a)^{-d/2} on either side.
        a = leaf.a if side == "space" else 1.0 / leaf.a
        center = leaf.center if side == "space" else np.zeros(d)
        scale_sq = abs(leaf.coef) ** 2 * (2.0 * leaf.a) ** (-d / 2.0)
        sigma = 1.0 / math.sqrt(4.0 * math.pi * a)
        pts = center + sigma * rng.standard_normal((trials, d))
        outside = np.ones(trials, dtype=bool) if s.is_empty() else ~s.contains(pts)
        p = float(np.count_nonzero(outside)) / trials
        return Estimate(scale_sq * p, scale_sq * math.sqrt(max(p * (1 - p), 0.0) / trials))
    extent = _envelope_extent(f, side)
    if not math.isfinite(extent):
        raise ValueError("monte_carlo tail energy needs a finite envelope window")
    fn = _side_eval(f, side)
    pts = rng.uniform(-extent, extent, size=(trials, d))
    vals = np.abs(fn(pts)) ** 2
    if not s.is_empty():
        vals = vals * (~s.contains(pts))
    vol = (2.0 * extent) ** d
    mean = float(np.mean(vals))
    err = float(np.std(vals, ddof=1) / math.sqrt(trials))
    leak = _envelope_leak(_side_envelope(f, side), d, extent)
    return Estimate(vol * mean + leak, vol * err + leak)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def function_to_dict(f: TestFunction) -> dict:
    if isinstance(f, Gaussian):
        return {"kind": "gaussian", "a": f.a, "dimension": f.dimension}
    if isinstance(f, BoxIndicator):
        return {"kind": "box", "lower": f.box.lower.tolist(), "upper": f.box.upper.tolist()}
    if isinstance(f, Combination):
        return {
            "kind": "combination",
            "children": [
                {"coef": [c.real, c.imag], "function": function_to_dict(g)}
                for c, g in f.terms
            ],
        }
    if isinstance(f, Modulated):
        return {"kind": "modulated", "y": f.y.tolist(), "children": [function_to_dict(f.base)]}
    if isinstance(f, Translated):
        return {"kind": "translated", "x0": f.x0.tolist(), "children": [function_to_dict(f.base)]}
    raise TypeError(f"cannot serialize {type(f).__name__}")


def function_from_dict(doc: dict) -> TestFunction:
    kind = doc.get("kind")
    if kind == "gaussian":
        return Gaussian(doc["a"], int(doc.get("dimension", 1)))
    if kind == "box":
        return BoxIndicator(AxisBox(doc["lower"], doc["upper"]))
    if kind == "combination":
        terms = [
            (complex(item["coef"][0], item["coef"][1]), function_from_dict(item["function"]))
            for item in doc["children"]
        ]
        return Combination(terms)
    if kind == "modulated":
        return Modulated(function_from_dict(doc["children"][0]), doc["y"])
    if kind == "translated":
        return Translated(function_from_dict(doc["children"][0]), doc["x0"])
    raise ValueError(f"unknown function kind: {kind!r}")


def function_from_json(text: str) -> TestFunction:
    return function_from_dict(json.loads(text))
