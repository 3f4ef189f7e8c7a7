"""Phase functions, saddle data, and steepest-descent path machinery.

A *phase* is a polynomial ``f`` whose exponential ``exp(±s f(z))`` drives the
contour integrals evaluated elsewhere in the package.  This module knows how
to

* describe the two built-in phases (cubic and quartic) together with their
  saddle points and the constant levels ``f(saddle)``,
* trace numerically exact steepest descent/ascent curves through a saddle by
  integrating the unit-speed descent flow with Newton projection back onto
  the level set of ``Im f``,
* construct *branch paths*: analytic reparameterizations ``x -> zeta(x)`` of
  a descent curve defined by ``f(zeta(x)) - f(saddle) = sigma * x**2``,
  continued globally in the real parameter ``x`` by dense Newton marching
  seeded from a truncated power series at the saddle.

The branch paths are what the saddle-point integrators consume: they turn
oscillatory contour integrals into real-line Gaussian integrals with smooth
amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cseries import (
    BranchError,
    TruncatedSeries1,
    solve_branch,
)

__all__ = [
    "PhaseSpec",
    "make_phase",
    "PathPolyline",
    "trace_steepest",
    "export_level_curve",
    "BranchPath",
    "make_branch_path",
    "airy_branch_paths",
    "pearcey_branch_paths",
]


# ---------------------------------------------------------------------------
# Phase descriptors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhaseSpec:
    """A polynomial phase together with its saddle data.

    Attributes
    ----------
    kind:
        ``"airy-cubic"``, ``"pearcey-quartic"`` or ``"custom-polynomial"``.
    coeffs:
        Ascending complex coefficients of ``f``.
    saddles:
        Roots of ``f'`` relevant to the steepest-descent decomposition.
    levels:
        ``f(saddle)`` for each saddle, in matching order.
    """

    kind: str
    coeffs: tuple[complex, ...]
    saddles: tuple[complex, ...]
    levels: tuple[complex, ...]

    def f(self, z):
        return np.polynomial.polynomial.polyval(z, np.asarray(self.coeffs))

    def df(self, z):
        der = np.polynomial.polynomial.polyder(np.asarray(self.coeffs))
        return np.polynomial.polynomial.polyval(z, der)

    def ddf(self, z):
        der2 = np.polynomial.polynomial.polyder(np.asarray(self.coeffs), 2)
        return np.polynomial.polynomial.polyval(z, der2)


def make_phase(kind: str, coeffs=None) -> PhaseSpec:
    """Build a :class:`PhaseSpec` for one of the supported phase kinds.

    ``"airy-cubic"`` is ``f(z) = z**3/3 + z`` with saddles ``±i``;
    ``"pearcey-quartic"`` is ``f(z) = z**4/4 + z`` with saddles
    ``exp(±i*pi/3)`` and ``-1``.  ``"custom-polynomial"`` accepts explicit
    ascending coefficients and computes the saddle set from ``f'``.
    """
    if kind == "airy-cubic":
        c = (0.0, 1.0, 0.0, 1.0 / 3.0)
        saddles = (1j, -1j)
    elif kind == "pearcey-quartic":
        c = (0.0, 1.0, 0.0, 0.0, 0.25)
        saddles = (np.exp(1j * np.pi / 3), np.exp(-1j * np.pi / 3), -1.0 + 0j)
    elif kind == "custom-polynomial":
        if coeffs is None:
            raise ValueError("custom-polynomial requires explicit coeffs")
        c = tuple(complex(x) for x in coeffs)
        der = np.polynomial.polynomial.polyder(np.asarray(c))
        saddles = tuple(np.roots(der[::-1]).astype(complex))
    else:
        raise ValueError(f"unknown phase kind {kind!r}")
    levels = tuple(
        complex(np.polynomial.polynomial.polyval(s, np.asarray(c))) for s in saddles
    )
    return PhaseSpec(kind=kind, coeffs=c, saddles=tuple(map(complex, saddles)), levels=levels)


# ---------------------------------------------------------------------------
# Steepest descent tracing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathPolyline:
    """A traced path: points ``z[k]`` with cumulative arclength ``s[k]``."""

    points: np.ndarray
    arclength: np.ndarray
    saddle: complex
    direction: int  # +1 descent of Re f decreasing? see trace_steepest

    def __len__(self) -> int:
        return len(self.points)


def trace_steepest(
    phase: PhaseSpec,
    saddle: complex,
    branch_angle: float,
    *,
    descent: bool = True,
    step: float = 1e-2,
    max_arclength: float = 12.0,
    decay_budget: float = 60.0,
) -> PathPolyline:
    """Trace one steepest descent (or ascent) ray out of a saddle.

    The curve solves ``dz/ds = ± conj(f'(z))/|f'(z)|`` which keeps ``Im f``
    constant while ``Re f`` decreases (descent, ``+`` sign with our
    convention below) or increases.  ``branch_angle`` selects which of the
    rays leaving the saddle to follow: the first step leaves the saddle in
    direction ``exp(i*branch_angle)``.

    Integration is fourth-order Runge-Kutta with a Newton projection after
    every step that restores ``Im f(z) = Im f(saddle)`` to machine accuracy.
    Tracing stops at ``max_arclength`` or once ``|Re f - Re f(saddle)|``
    exceeds ``decay_budget``.
    """
    level = complex(phase.f(saddle))
    sign = -1.0 if descent else 1.0

    def velocity(z):
        d = phase.df(z)
        a = abs(d)
        if a < 1e-14:
            # At (or extremely near) the saddle the flow is singular; nudge
            # along the requested branch direction instead.
            return np.exp(1j * branch_angle)
        # dz/ds = sign * conj(f') / |f'|  gives d(Re f)/ds = sign * |f'|.
        return sign * np.conj(d) / a

    # Launch slightly off the saddle along the requested ray.
    z = saddle + 1e-4 * np.exp(1j * branch_angle)
    pts = [saddle, z]
    arcs = [0.0, 1e-4]
    s = 1e-4
    while s < max_arclength:
        h = step
        k1 = velocity(z)
        k2 = velocity(z + 0.5 * h * k1)
        k3 = velocity(z + 0.5 * h * k2)
        k4 = velocity(z + h * k3)
        z = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        # Newton projection: move along i*conj(f') to fix Im f.
        for _ in range(3):
            d = phase.df(z)
            a2 = abs(d) ** 2
            if a2 < 1e-20:
                break
            t = (level.imag - complex(phase.f(z)).imag) / a2
            z = z + 1j * t * np.conj(d)
        s += h
        pts.append(z)
        arcs.append(s)
        drop = complex(phase.f(z)).real - level.real
        if (descent and drop < -decay_budget) or (not descent and drop > decay_budget):
            break
    return PathPolyline(
        points=np.asarray(pts, dtype=complex),
        arclength=np.asarray(arcs, dtype=float),
        saddle=complex(saddle),
        direction=-1 if descent else 1,
    )


def export_level_curve(
    phase: PhaseSpec,
    level_im: float,
    *,
    window: tuple[float, float, float, float] = (-4.0, 4.0, -4.0, 4.0),
    n: int = 400,
) -> list[np.ndarray]:
    """Sample the level set ``Im f(z) = level_im`` inside a window.

    Returns a list of point arrays, one per horizontal grid sweep, located
    by sign changes of ``Im f - level_im`` along grid columns followed by
    one bisection refinement.  Intended for diagnostic plotting / tracing
    output, not for quadrature.
    """
    x0, x1, y0, y1 = window
    xs = np.linspace(x0, x1, n)
    ys = np.linspace(y0, y1, n)
    X, Y = np.meshgrid(xs, ys)
    Z = X + 1j * Y
    G = np.imag(phase.f(Z)) - level_im
    segments: list[np.ndarray] = []
    sign_flip = np.signbit(G[:-1, :]) != np.signbit(G[1:, :])
    for j in range(n):
        rows = np.nonzero(sign_flip[:, j])[0]
        if rows.size == 0:
            continue
        pts = []
        for i in rows:
            za, zb = Z[i, j], Z[i + 1, j]
            ga, gb = G[i, j], G[i + 1, j]
            zm = za + (zb - za) * (0.0 - ga) / (gb - ga)
            pts.append(zm)
        segments.append(np.asarray(pts, dtype=complex))
    return segments


# ---------------------------------------------------------------------------
# Branch paths: analytic descent parameterizations continued globally
# ---------------------------------------------------------------------------


@dataclass
class BranchPath:
    """Global solution ``zeta(x)`` of ``f(zeta(x)) - level = sigma * x**2``.

    ``zeta`` is pinned at ``zeta(0) = center`` (a saddle of ``f``) with
    prescribed first derivative ``first_coeff`` fixing the branch.  Near the
    saddle the map is evaluated from a truncated power series; beyond a small
    switch radius it is continued by dense Newton marching along the real
    axis and evaluated from the cached table by one Newton step off the
    nearest node (the quadratic defining equation makes each step
    contractive far from coincident saddles).

    Vectorized evaluation is provided by :meth:`zeta` and :meth:`dzeta`;
    ``dzeta`` uses ``zeta'(x) = 2*sigma*x / f'(zeta(x))`` away from the
    saddle and the series derivative near it.
    """

    phase: PhaseSpec
    center: complex
    sigma: int
    first_coeff: complex
    series: TruncatedSeries1
    x_switch: float = 0.12
    x_max: float = 40.0
    dx: float = 0.01
    _table_x: np.ndarray = field(default=None, repr=False)
    _table_pos: np.ndarray = field(default=None, repr=False)
    _table_neg: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.level = complex(self.phase.f(self.center))
        self._dseries = np.polynomial.polynomial.polyder(self.series.coeffs)
        self._build_table()

    # -- construction ------------------------------------------------------

    def _newton_refine(self, x: np.ndarray, z: np.ndarray, iters: int = 4) -> np.ndarray:
        target = self.level + self.sigma * x**2
        for _ in range(iters):
            fz = self.phase.f(z)
            dfz = self.phase.df(z)
            z = z - (fz - target) / dfz
        return z

    def _march(self, direction: int) -> np.ndarray:
        """March from the series edge outwards in steps of ``dx``."""
        n = int(np.ceil((self.x_max - self.x_switch) / self.dx))
        xs = self.x_switch * direction + direction * self.dx * np.arange(n + 1)
        z = complex(self.series.eval(np.array([xs[0]]))[0])
        z = complex(self._newton_refine(np.array([xs[0]]), np.array([z]))[0])
        out = np.empty(n + 1, dtype=complex)
        out[0] = z
        for k in range(1, n + 1):
            x = xs[k]
            # Predictor: tangent step using zeta' = 2 sigma x / f'(zeta).
            d = self.phase.df(z)
            pred = z + (2.0 * self.sigma * xs[k - 1] / d) * (x - xs[k - 1])
            z = complex(self._newton_refine(np.array([x]), np.array([pred]))[0])
            out[k] = z
        return out

    def _build_table(self) -> None:
        n = int(np.ceil((self.x_max - self.x_switch) / self.dx))
        self._table_x = self.x_switch + self.dx * np.arange(n + 1)
        self._table_pos = self._march(+1)
        self._table_neg = self._march(-1)

    # -- evaluation --------------------------------------------------------

    def zeta(self, x) -> np.ndarray:
        """Evaluate ``zeta(x)`` for real array ``x`` (vectorized)."""
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty(x.shape, dtype=complex)
        inner = np.abs(x) <= self.x_switch
        if inner.any():
            # The truncated series is contractive well inside its radius of
            # convergence, so it is already at machine accuracy here; Newton
            # would divide by f'(center) = 0 at the saddle itself.
            out[inner] = self.series.eval(x[inner])
        outer = ~inner
        if outer.any():
            xo = x[outer]
            ax = np.abs(xo)
            if np.any(ax > self._table_x[-1]):
                raise BranchError(
                    f"branch path evaluated beyond table range {self._table_x[-1]:.1f}"
                )
            idx = np.clip(
                np.round((ax - self.x_switch) / self.dx).astype(int),
                0,
                len(self._table_x) - 1,
            )
            seed = np.where(xo >= 0, self._table_pos[idx], self._table_neg[idx])
            out[outer] = self._newton_refine(xo, seed, iters=3)
        return out[0] if scalar else out

    def dzeta(self, x) -> np.ndarray:
        """Evaluate ``zeta'(x)`` (vectorized).

        Away from the saddle this is ``2*sigma*x / f'(zeta(x))``; inside the
        series radius the differentiated series is used (regular limit
        ``zeta'(0) = first_coeff``).
        """
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.empty(x.shape, dtype=complex)
        z = self.zeta(x)
        near = np.abs(x) <= self.x_switch
        if near.any():
            out[near] = np.polynomial.polynomial.polyval(x[near], self._dseries)
        far = ~near
        if far.any():
            out[far] = 2.0 * self.sigma * x[far] / self.phase.df(z[far])
        return out[0] if scalar else out

    def residual(self, x) -> np.ndarray:
        """Defining-equation residual ``f(zeta(x)) - level - sigma x**2``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.phase.f(self.zeta(x)) - self.level - self.sigma * x**2


def make_branch_path(
    phase: PhaseSpec,
    center: complex,
    sigma: int,
    first_coeff: complex,
    *,
    order: int = 16,
    x_max: float = 40.0,
) -> BranchPath:
    """Solve the branch series at ``center`` and wrap it in a BranchPath."""
    level = complex(phase.f(center))
    series = solve_branch(phase, center, sigma, level, first_coeff, order)
    return BranchPath(
        phase=phase,
        center=complex(center),
        sigma=sigma,
        first_coeff=complex(first_coeff),
        series=series,
        x_max=x_max,
    )


@lru_cache(maxsize=4)
def airy_branch_paths() -> dict[str, BranchPath]:
    """The two cubic-phase branch paths used by the saddle integrators.

    ``P_S`` solves ``f(z) - f(i) = -x**2`` with ``z'(0) = exp(i*pi/4)``: the
    descent parameterization through the upper saddle ``i`` running from
    ``-infinity`` up to ``infinity * exp(i*pi/3)`` as ``x`` goes ``-inf ->
    +inf``.  ``P_T`` is the same analytic branch evaluated on the imaginary
    axis of the parameter, realized as its own real-parameter path solving
    ``f(z) - f(i) = +y**2`` with ``z'(0) = exp(3i*pi/4)``; it runs from
    ``+infinity`` to ``infinity * exp(2i*pi/3)``.
    """
    phase = make_phase("airy-cubic")
    p_s = make_branch_path(phase, 1j, -1, np.exp(1j * np.pi / 4))
    p_t = make_branch_path(phase, 1j, +1, np.exp(3j * np.pi / 4))
    return {"S": p_s, "T": p_t}


@lru_cache(maxsize=4)
def pearcey_branch_paths() -> dict[str, BranchPath]:
    """The two quartic-phase branch paths through the saddle exp(i*pi/3).

    ``P_S`` solves ``f(z) - f(p) = +x**2`` with ``z'(0) = sqrt(2/3) *
    exp(2i*pi/3)`` (ascent parameterization, running from ``+infinity`` to
    ``i*infinity``); ``P_T`` solves ``f(z) - f(p) = -y**2`` with ``z'(0) =
    i * sqrt(2/3) * exp(2i*pi/3)`` (descent, running from ``infinity *
    exp(i*pi/4)`` to ``infinity * exp(3i*pi/4)``).  Conjugate-saddle paths
    are obtained from these by reflection, not stored separately.
    """
    phase = make_phase("pearcey-quartic")
    p = complex(np.exp(1j * np.pi / 3))
    a1 = np.sqrt(2.0 / 3.0) * np.exp(2j * np.pi / 3)
    p_s = make_branch_path(phase, p, +1, a1)
    p_t = make_branch_path(phase, p, -1, 1j * a1)
    return {"S": p_s, "T": p_t}
