"""Surfaces over sphere curves: areas, weighted measures, and the
boundary-length bound.

Surfaces live in the isotropic Cartesian chart, where the metric is the
conformal factor ``(1 + m/2|x|)^4`` times the flat one.  Cones ``t alpha(s)``
over unit-sphere curves are the workhorses: their flat induced metric is
``dt^2 + t^2 ds^2`` when ``alpha`` is parametrized by arc length, every
ball-clipping level is a ``t`` level, and the unit radial field is
tangent to them, which collapses the defect integral to zero and makes
the monotonicity bookkeeping exact up to quadrature.

Conformal bookkeeping used throughout (``e^phi = (1 + m/2|x|)^2``):

    g-length element   = e^phi * flat
    g-area element     = e^{2 phi} * flat
    static potential f = (1 - m/2|x|) / (1 + m/2|x|)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .errors import DomainError, GeometryError, PreconditionError, QuadratureError
from .geometry import (
    SchwarzschildModel,
    areal_from_distance,
    areal_from_isotropic,
    distance_from_isotropic,
    isotropic_from_areal,
)
from .quadrature import QuadSpec

_TWO_PI = 2.0 * math.pi


# -------------------------------------------------------------------------
# curves on the unit sphere
# -------------------------------------------------------------------------


@dataclass(frozen=True)
class SphereCurve:
    """Closed curve on the unit sphere, parametrized by arc length.

    ``alpha`` maps s to a 3-vector; ``alpha_d``/``alpha_dd`` are its first
    and second derivatives (analytic for the built-in constructors).
    """

    alpha: object
    alpha_d: object
    alpha_dd: object
    period: float

    def check(self, n_samples: int = 256) -> dict:
        """Max deviations from the unit-speed spherical invariants."""
        s = np.linspace(0.0, self.period, n_samples, endpoint=False)
        a = np.array([self.alpha(x) for x in s])
        ad = np.array([self.alpha_d(x) for x in s])
        return {
            "radius": float(np.max(np.abs(np.linalg.norm(a, axis=1) - 1.0))),
            "speed": float(np.max(np.abs(np.linalg.norm(ad, axis=1) - 1.0))),
            "tangency": float(np.max(np.abs(np.sum(a * ad, axis=1)))),
        }


def great_circle() -> SphereCurve:
    """Equator of the unit sphere; cones over it are planes through 0."""
    return SphereCurve(
        alpha=lambda s: np.array([math.cos(s), math.sin(s), 0.0]),
        alpha_d=lambda s: np.array([-math.sin(s), math.cos(s), 0.0]),
        alpha_dd=lambda s: np.array([-math.cos(s), -math.sin(s), 0.0]),
        period=_TWO_PI,
    )


def latitude_circle(theta0: float) -> SphereCurve:
    """Circle at colatitude ``theta0``; arc-length period ``2 pi sin theta0``."""
    if not (0.0 < theta0 < math.pi):
        raise DomainError(f"colatitude must lie in (0, pi), got {theta0}")
    rho = math.sin(theta0)
    z = math.cos(theta0)
    # angular rate 1/rho makes s true arc length
    return SphereCurve(
        alpha=lambda s: np.array(
            [rho * math.cos(s / rho), rho * math.sin(s / rho), z]
        ),
        alpha_d=lambda s: np.array([-math.sin(s / rho), math.cos(s / rho), 0.0]),
        alpha_dd=lambda s: np.array(
            [-math.cos(s / rho) / rho, -math.sin(s / rho) / rho, 0.0]
        ),
        period=_TWO_PI * rho,
    )


def curve_from_callable(alpha, period: float, fd_step: float | None = None) -> SphereCurve:
    """Wrap a user curve; derivatives by 4th-order central differences."""
    if not (period > 0.0):
        raise DomainError(f"period must be > 0, got {period}")
    h = 1e-5 * period if fd_step is None else fd_step

    def a(s):
        return np.asarray(alpha(s), dtype=float)

    def ad(s):
        return (a(s - 2 * h) - 8.0 * a(s - h) + 8.0 * a(s + h) - a(s + 2 * h)) / (12.0 * h)

    def add(s):
        return (
            -a(s - 2 * h)
            + 16.0 * a(s - h)
            - 30.0 * a(s)
            + 16.0 * a(s + h)
            - a(s + 2 * h)
        ) / (12.0 * h * h)

    return SphereCurve(alpha=a, alpha_d=ad, alpha_dd=add, period=period)


def rotate_curve(curve: SphereCurve, rotation: np.ndarray) -> SphereCurve:
    """Curve composed with a fixed rotation matrix."""
    Q = np.asarray(rotation, dtype=float)
    if Q.shape != (3, 3) or not np.allclose(Q @ Q.T, np.eye(3), atol=1e-12):
        raise DomainError("rotation must be a 3x3 orthogonal matrix")
    return SphereCurve(
        alpha=lambda s: Q @ curve.alpha(s),
        alpha_d=lambda s: Q @ curve.alpha_d(s),
        alpha_dd=lambda s: Q @ curve.alpha_dd(s),
        period=curve.period,
    )


def random_rotation(seed: int) -> np.ndarray:
    """Deterministic rotation matrix, uniform over SO(3)."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0.0:
        q[:, 2] = -q[:, 2]
    return q


# -------------------------------------------------------------------------
# parametrized surfaces
# -------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamSurface:
    """Chart ``(t, s) -> R^3`` on ``[t0, t1] x [0, S)``, s-periodic.

    ``kind`` is one of ``cone_over_curve``, ``plane_through_origin``,
    ``general``; cones carry their ``curve`` so integrals can use the
    1-D fast path.  ``chart_t``/``chart_s`` are the partial derivatives
    (finite-difference fallbacks are installed for general charts).
    """

    chart: object
    t_range: tuple
    s_period: float
    free_boundary: bool
    kind: str
    chart_t: object = None
    chart_s: object = None
    curve: SphereCurve | None = field(default=None, repr=False)

    @property
    def is_cone(self) -> bool:
        return self.curve is not None

    def check(self, model: SchwarzschildModel, n_samples: int = 64) -> dict:
        """Max invariant deviations: exterior containment, horizon edge."""
        t0, t1 = self.t_range
        out = {"exterior": 0.0, "horizon_edge": 0.0}
        ts = np.linspace(t0, t1, 9)
        ss = np.linspace(0.0, self.s_period, n_samples, endpoint=False)
        m = model.mass
        for t in ts:
            for s in ss:
                r = float(np.linalg.norm(self.chart(t, s)))
                out["exterior"] = max(out["exterior"], 0.5 * m - r)
        if self.free_boundary and m > 0.0:
            for s in ss:
                r = float(np.linalg.norm(self.chart(t0, s)))
                out["horizon_edge"] = max(
                    out["horizon_edge"], abs(r - 0.5 * m) / (0.5 * m)
                )
        return out


def make_cone(model: SchwarzschildModel, curve: SphereCurve, t_max: float) -> ParamSurface:
    """Cone ``{t alpha(s) : m/2 <= t <= t_max}`` over a unit-sphere curve."""
    m = model.mass
    if not (t_max > 0.5 * m):
        raise DomainError(f"t_max must exceed m/2 = {0.5 * m}, got {t_max}")
    al, ald = curve.alpha, curve.alpha_d
    return ParamSurface(
        chart=lambda t, s: t * al(s),
        t_range=(0.5 * m, t_max),
        s_period=curve.period,
        free_boundary=True,
        kind="cone_over_curve",
        chart_t=lambda t, s: al(s),
        chart_s=lambda t, s: t * ald(s),
        curve=curve,
    )


def make_plane(model: SchwarzschildModel, t_max: float, rotation: np.ndarray | None = None) -> ParamSurface:
    """Totally geodesic plane through the origin (a great-circle cone)."""
    curve = great_circle()
    if rotation is not None:
        curve = rotate_curve(curve, rotation)
    cone = make_cone(model, curve, t_max)
    return ParamSurface(
        chart=cone.chart,
        t_range=cone.t_range,
        s_period=cone.s_period,
        free_boundary=True,
        kind="plane_through_origin",
        chart_t=cone.chart_t,
        chart_s=cone.chart_s,
        curve=curve,
    )


def make_general(
    chart,
    t_range: tuple,
    s_period: float,
    free_boundary: bool = False,
    chart_t=None,
    chart_s=None,
) -> ParamSurface:
    """User-supplied chart; missing derivatives by central differences.

    The chart must be evaluable slightly outside the ``t`` range (two
    finite-difference steps) and safe for concurrent calls.
    """
    t0, t1 = t_range
    if not (t1 > t0):
        raise DomainError(f"empty t range {t_range}")
    if not (s_period > 0.0):
        raise DomainError(f"s period must be > 0, got {s_period}")
    ht = 1e-5 * (t1 - t0)
    hs = 1e-5 * s_period

    def c(t, s):
        return np.asarray(chart(t, s), dtype=float)

    if chart_t is None:
        def chart_t(t, s, _h=ht):
            return (
                c(t - 2 * _h, s) - 8.0 * c(t - _h, s) + 8.0 * c(t + _h, s) - c(t + 2 * _h, s)
            ) / (12.0 * _h)

    if chart_s is None:
        def chart_s(t, s, _h=hs):
            return (
                c(t, s - 2 * _h) - 8.0 * c(t, s - _h) + 8.0 * c(t, s + _h) - c(t, s + 2 * _h)
            ) / (12.0 * _h)

    return ParamSurface(
        chart=c,
        t_range=(t0, t1),
        s_period=s_period,
        free_boundary=free_boundary,
        kind="general",
        chart_t=chart_t,
        chart_s=chart_s,
        curve=None,
    )


def rotate_surface(surface: ParamSurface, rotation: np.ndarray) -> ParamSurface:
    """Surface composed with a fixed rotation; cones stay cones."""
    if surface.curve is not None:
        curve = rotate_curve(surface.curve, rotation)
        return ParamSurface(
            chart=lambda t, s: t * curve.alpha(s),
            t_range=surface.t_range,
            s_period=surface.s_period,
            free_boundary=surface.free_boundary,
            kind=surface.kind,
            chart_t=lambda t, s: curve.alpha(s),
            chart_s=lambda t, s: t * curve.alpha_d(s),
            curve=curve,
        )
    Q = np.asarray(rotation, dtype=float)
    old_chart, old_t, old_s = surface.chart, surface.chart_t, surface.chart_s
    return ParamSurface(
        chart=lambda t, s: Q @ old_chart(t, s),
        t_range=surface.t_range,
        s_period=surface.s_period,
        free_boundary=surface.free_boundary,
        kind=surface.kind,
        chart_t=lambda t, s: Q @ old_t(t, s),
        chart_s=lambda t, s: Q @ old_s(t, s),
        curve=None,
    )


# -------------------------------------------------------------------------
# pointwise quantities
# -------------------------------------------------------------------------


def cone_mean_curvature(model: SchwarzschildModel, curve: SphereCurve, t: float, s: float) -> float:
    """Mean curvature of the cone over ``curve`` at the point ``t alpha(s)``.

        H = det[alpha, alpha'', alpha'] / (t e^{phi(t)})

    Zero for every great circle; ``-cot(theta0) / (t e^{phi})`` on the
    colatitude-``theta0`` circle.
    """
    if not (t >= 0.5 * model.mass) or t <= 0.0:
        raise DomainError(f"t = {t} is inside the horizon or nonpositive")
    a = np.asarray(curve.alpha(s), dtype=float)
    ad = np.asarray(curve.alpha_d(s), dtype=float)
    add = np.asarray(curve.alpha_dd(s), dtype=float)
    triple = float(np.dot(np.cross(a, add), ad))
    conf = (1.0 + 0.5 * model.mass / t) ** 2
    return triple / (t * conf)


def ball_filter(model: SchwarzschildModel, a: float):
    """Predicate: is a point within horizon distance ``a``?"""
    if a < 0.0:
        raise DomainError(f"radius must be >= 0, got {a}")

    def inside(point) -> bool:
        rho = float(np.linalg.norm(np.asarray(point, dtype=float)))
        return distance_from_isotropic(model, rho) <= a

    return inside


def radial_normal_component(model: SchwarzschildModel, surface: ParamSurface, t: float, s: float) -> float:
    """Squared g-norm of the normal part of the unit radial field, in [0, 1].

    Conformal metrics preserve angles, so this equals the squared cosine
    between the flat radial direction and the flat surface normal.
    """
    x = np.asarray(surface.chart(t, s), dtype=float)
    xt = np.asarray(surface.chart_t(t, s), dtype=float)
    xs = np.asarray(surface.chart_s(t, s), dtype=float)
    nrm = np.cross(xt, xs)
    n2 = float(np.dot(nrm, nrm))
    if n2 <= 1e-24 * float(np.dot(xt, xt)) * float(np.dot(xs, xs)):
        raise GeometryError(f"degenerate tangent plane at (t,s)=({t},{s})")
    r = float(np.linalg.norm(x))
    if r == 0.0:
        raise GeometryError("radial direction undefined at the origin")
    cosine = float(np.dot(x, nrm)) / (r * math.sqrt(n2))
    val = cosine * cosine
    return min(max(val, 0.0), 1.0)


# -------------------------------------------------------------------------
# clipped integrals
# -------------------------------------------------------------------------


def clip_radius(model: SchwarzschildModel, rho: float) -> float:
    """Isotropic radius of the sphere at horizon distance ``rho``."""
    if rho < 0.0:
        raise DomainError(f"horizon distance must be >= 0, got {rho}")
    return isotropic_from_areal(model, areal_from_distance(model, rho))


def _mu_density_cone(m: float, t: np.ndarray) -> np.ndarray:
    # f * e^{2 phi} * t with all factors in isotropic form
    x = 0.5 * m / t
    return (1.0 - x) * (1.0 + x) ** 3 * t


def _area_density_cone(m: float, t: np.ndarray) -> np.ndarray:
    return (1.0 + 0.5 * m / t) ** 4 * t


def _cone_integral(model, surface, rho, spec, density) -> float:
    m = model.mass
    t0, t1 = surface.t_range
    t_clip = min(clip_radius(model, rho), t1)
    if t_clip <= t0:
        return 0.0
    val = quadrature.integrate(lambda t: density(m, t), t0, t_clip, spec)
    return surface.s_period * val


def _general_integral(model, surface, rho, spec, weight) -> float:
    """Tensor-product quadrature of ``weight(x) * flat area element`` over
    the chart preimage of the ball, doubling panels in both directions.

    ``weight`` maps isotropic radius to the scalar factor multiplying the
    flat area element (the conformal factor is part of it).
    """
    m = model.mass
    t0, t1 = surface.t_range
    t_iso = clip_radius(model, rho)
    chart, chart_t, chart_s = surface.chart, surface.chart_t, surface.chart_s

    def slice_limit(s: float) -> float:
        # largest t with |chart| <= clip level, by bisection (monotone
        # radial profile assumed, as documented)
        lo, hi = t0, t1
        if np.linalg.norm(chart(t0, s)) > t_iso:
            return t0
        if np.linalg.norm(chart(t1, s)) <= t_iso:
            return t1
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if np.linalg.norm(chart(mid, s)) <= t_iso:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def value(n_s: int, n_t: int) -> float:
        xs, ws = quadrature.panel_nodes(0.0, surface.s_period, n_s, spec.points)
        total = 0.0
        for s, w_s in zip(xs, ws):
            tc = slice_limit(s)
            if tc <= t0:
                continue
            xt, wt = quadrature.panel_nodes(t0, tc, n_t, spec.points)
            acc = 0.0
            for t, w_t in zip(xt, wt):
                p = chart(t, s)
                r = float(np.linalg.norm(p))
                el = float(np.linalg.norm(np.cross(chart_t(t, s), chart_s(t, s))))
                acc += w_t * weight(r, t, s) * el
            total += w_s * acc
        return total

    n_s, n_t = 2, 2
    prev = value(n_s, n_t)
    while True:
        n_s *= 2
        n_t *= 2
        if n_s * n_t > spec.max_panels:
            raise QuadratureError(
                f"2-D quadrature did not reach rel_tol={spec.rel_tol} within "
                f"{spec.max_panels} panels at rho={rho}"
            )
        cur = value(n_s, n_t)
        scale = max(abs(cur), abs(prev), 1e-300)
        # general charts target a looser tolerance than the 1-D cone path
        if abs(cur - prev) <= 100.0 * spec.rel_tol * scale:
            return cur
        prev = cur


def mu_integral(model: SchwarzschildModel, surface: ParamSurface, rho: float, spec: QuadSpec = QuadSpec()) -> float:
    """f-weighted g-area of the part of the surface within ``B_rho``."""
    if rho < 0.0:
        raise DomainError(f"horizon distance must be >= 0, got {rho}")
    if rho == 0.0:
        return 0.0
    if surface.is_cone:
        return _cone_integral(model, surface, rho, spec, _mu_density_cone)
    m = model.mass

    def w(r, t, s):
        x = 0.5 * m / r
        return (1.0 - x) * (1.0 + x) ** 3  # f times conformal area factor

    return _general_integral(model, surface, rho, spec, w)


def area_integral(model: SchwarzschildModel, surface: ParamSurface, rho: float, spec: QuadSpec = QuadSpec()) -> float:
    """Unweighted g-area of the part of the surface within ``B_rho``."""
    if rho < 0.0:
        raise DomainError(f"horizon distance must be >= 0, got {rho}")
    if rho == 0.0:
        return 0.0
    if surface.is_cone:
        return _cone_integral(model, surface, rho, spec, _area_density_cone)
    m = model.mass

    def w(r, t, s):
        return (1.0 + 0.5 * m / r) ** 4

    return _general_integral(model, surface, rho, spec, w)


def defect_integral(model: SchwarzschildModel, surface: ParamSurface, rho: float, spec: QuadSpec = QuadSpec()) -> float:
    """``(f/h^2) |radial normal part|^2`` integrated over the clipped surface.

    Identically zero on cones (the radial field is tangent to them); this
    is the middle term of the monotonicity identity and the defect in the
    boundary-length bound.
    """
    if rho < 0.0:
        raise DomainError(f"horizon distance must be >= 0, got {rho}")
    if rho == 0.0 or surface.is_cone:
        return 0.0
    m = model.mass

    def w(r, t, s):
        x = 0.5 * m / r
        f = (1.0 - x) / (1.0 + x)
        h = areal_from_isotropic(model, r)
        return f / (h * h) * radial_normal_component(model, surface, t, s) * (1.0 + x) ** 4

    return _general_integral(model, surface, rho, spec, w)


def boundary_length(model: SchwarzschildModel, surface: ParamSurface) -> float:
    """g-length of the horizon edge ``t = t0`` of a free-boundary surface."""
    model.require_horizon("boundary_length")
    if not surface.free_boundary:
        raise PreconditionError("surface does not carry the free-boundary flag")
    t0 = surface.t_range[0]
    if surface.is_cone:
        # edge speed is t0, conformal factor 4 on the horizon
        return 4.0 * t0 * surface.s_period

    def speed(svals):
        out = np.empty_like(svals)
        for i, s in enumerate(svals):
            p = surface.chart(t0, s)
            conf = (1.0 + 0.5 * model.mass / float(np.linalg.norm(p))) ** 2
            out[i] = conf * float(np.linalg.norm(surface.chart_s(t0, s)))
        return out

    return quadrature.integrate(speed, 0.0, surface.s_period, QuadSpec())


# -------------------------------------------------------------------------
# monotonicity, density, and the boundary-length bound
# -------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    """Ratio trace of the weighted-area monotonicity identity.

    ``ratios[i] = mu(B_rhos[i]) / h(rhos[i])^2``; ``formula_residuals[i]``
    is the identity mismatch for the consecutive pair
    ``(rhos[i], rhos[i+1])``.  ``max_backstep`` is the largest decrease
    between consecutive ratios (0 when the trace is monotone).
    """

    rhos: np.ndarray
    mu_values: np.ndarray
    ratios: np.ndarray
    boundary_length: float
    monotone: bool
    max_backstep: float
    formula_residuals: np.ndarray


@dataclass(frozen=True)
class DensityReport:
    """Area-ratio tail and its extrapolation to infinite radius."""

    theta: float
    rhos: np.ndarray
    ratios: np.ndarray
    converged: bool
    note: str


@dataclass(frozen=True)
class BoundaryBoundReport:
    """Both sides of the boundary-length bound and the equality defect.

    ``lhs`` is the density at infinity, ``rhs`` the boundary-length side
    plus the defect integral; ``equality_defect = lhs - rhs`` vanishes
    exactly on planes through the origin.
    """

    lhs: float
    rhs: float
    equality_defect: float
    boundary_term: float
    defect_value: float
    defect_tail_bound: float
    bound_satisfied: bool


def _h_of(model: SchwarzschildModel, rho: float) -> float:
    return areal_from_distance(model, rho)


def formula_residual(
    model: SchwarzschildModel,
    surface: ParamSurface,
    sigma: float,
    rho: float,
    spec: QuadSpec = QuadSpec(),
) -> float:
    """Mismatch of the monotonicity identity between radii ``sigma < rho``.

        ratio(rho) - ratio(sigma)
            - [defect(rho) - defect(sigma)]
            - m (1/h(sigma)^2 - 1/h(rho)^2) |boundary|

    Vanishes (up to quadrature) for minimal free-boundary surfaces; the
    ``sigma = 0`` case is the form integrated directly from the horizon.
    """
    if not (0.0 <= sigma < rho):
        raise DomainError(f"need 0 <= sigma < rho, got ({sigma}, {rho})")
    m = model.mass
    h_s = _h_of(model, sigma)
    h_r = _h_of(model, rho)
    ratio_r = mu_integral(model, surface, rho, spec) / h_r**2
    ratio_s = mu_integral(model, surface, sigma, spec) / h_s**2 if sigma > 0.0 else 0.0
    mid = defect_integral(model, surface, rho, spec) - defect_integral(
        model, surface, sigma, spec
    )
    if m > 0.0 and surface.free_boundary:
        edge = m * (1.0 / h_s**2 - 1.0 / h_r**2) * boundary_length(model, surface)
    else:
        edge = 0.0
    return ratio_r - ratio_s - mid - edge


def monotonicity_report(
    model: SchwarzschildModel,
    surface: ParamSurface,
    rho_grid,
    spec: QuadSpec = QuadSpec(),
) -> MonotonicityReport:
    """Ratio trace over an increasing grid of horizon distances."""
    rhos = np.asarray(rho_grid, dtype=float)
    if rhos.ndim != 1 or len(rhos) < 2 or np.any(np.diff(rhos) <= 0.0) or rhos[0] < 0.0:
        raise DomainError("rho grid must be increasing and nonnegative")
    m = model.mass

    mus = np.array([mu_integral(model, surface, r, spec) for r in rhos])
    hs = np.array([_h_of(model, r) for r in rhos])
    ratios = mus / hs**2

    if m > 0.0 and surface.free_boundary:
        blen = boundary_length(model, surface)
    else:
        blen = 0.0

    defects = np.array([defect_integral(model, surface, r, spec) for r in rhos])
    resid = np.empty(len(rhos) - 1)
    for i in range(len(resid)):
        edge = (
            m * (1.0 / hs[i] ** 2 - 1.0 / hs[i + 1] ** 2) * blen
            if m > 0.0
            else 0.0
        )
        resid[i] = (
            ratios[i + 1] - ratios[i] - (defects[i + 1] - defects[i]) - edge
        )

    steps = np.diff(ratios)
    max_backstep = float(max(0.0, -steps.min())) if len(steps) else 0.0
    scale = float(np.max(np.abs(ratios))) or 1.0
    return MonotonicityReport(
        rhos=rhos,
        mu_values=mus,
        ratios=ratios,
        boundary_length=blen,
        monotone=bool(max_backstep <= spec.rel_tol * scale),
        max_backstep=max_backstep,
        formula_residuals=resid,
    )


def density_at_infinity(
    model: SchwarzschildModel,
    surface: ParamSurface,
    rho_max: float,
    spec: QuadSpec = QuadSpec(),
    n_tail: int = 6,
) -> DensityReport:
    """Limiting area ratio against the reference great-circle cone.

    Samples the ratio on a geometric tail up to ``rho_max``, then
    extrapolates linearly in ``1/h(rho)``.  A tail whose increments grow
    is flagged as not converged ("no finite density detected").
    """
    m = model.mass
    if not (rho_max > max(m, surface.t_range[0])):
        raise DomainError(f"rho_max = {rho_max} is too small for a tail estimate")
    rhos = rho_max * 0.5 ** np.arange(n_tail - 1, -1, -1)

    # reference cone large enough to never be clipped by its own t_max
    ref = make_plane(model, t_max=2.0 * clip_radius(model, rho_max))

    ratios = np.empty(n_tail)
    for i, r in enumerate(rhos):
        denom = area_integral(model, ref, r, spec)
        ratios[i] = area_integral(model, surface, r, spec) / denom

    xs = np.array([1.0 / _h_of(model, r) for r in rhos])
    # two-point linear extrapolation to 1/h -> 0
    x0, x1 = xs[-2], xs[-1]
    y0, y1 = ratios[-2], ratios[-1]
    theta = (y1 * x0 - y0 * x1) / (x0 - x1)

    d_last = abs(ratios[-1] - ratios[-2])
    d_prev = abs(ratios[-2] - ratios[-3]) if n_tail >= 3 else d_last
    scale = max(abs(ratios[-1]), 1e-300)
    converged = d_last <= max(1.05 * d_prev, 1e3 * spec.rel_tol * scale)
    note = "" if converged else "no finite density detected"
    return DensityReport(
        theta=float(theta), rhos=rhos, ratios=ratios, converged=bool(converged), note=note
    )


def boundary_bound_check(
    model: SchwarzschildModel,
    surface: ParamSurface,
    rho_max: float,
    spec: QuadSpec = QuadSpec(),
) -> BoundaryBoundReport:
    """Both sides of ``|boundary| <= 4 pi m Theta`` with the proof identity.

    For minimal free-boundary surfaces the density splits exactly into
    the boundary term plus the (nonnegative) defect integral, so the
    report's ``equality_defect`` is a discretization residual for planes
    and positive for genuinely tilted surfaces.  The tail of the defect
    integral beyond ``rho_max`` is bounded through the monotonicity
    identity itself and carried separately.
    """
    model.require_horizon("boundary_bound_check")
    m = model.mass
    dens = density_at_infinity(model, surface, rho_max, spec)
    blen = boundary_length(model, surface)
    bterm = blen / (4.0 * math.pi * m)
    defect = defect_integral(model, surface, rho_max, spec) / math.pi

    # tail bound: pi Theta - ratio(rho_max) - m |boundary| / h(rho_max)^2,
    # clipped at zero against extrapolation noise
    h_max = _h_of(model, rho_max)
    ratio_max = mu_integral(model, surface, rho_max, spec) / h_max**2
    tail = max(
        0.0, (math.pi * dens.theta - ratio_max) / math.pi - m * blen / (math.pi * h_max**2)
    )

    lhs = dens.theta
    rhs = bterm + defect
    tol = 100.0 * max(spec.rel_tol, abs(tail))
    return BoundaryBoundReport(
        lhs=lhs,
        rhs=rhs,
        equality_defect=lhs - rhs,
        boundary_term=bterm,
        defect_value=defect,
        defect_tail_bound=tail,
        bound_satisfied=bool(lhs >= rhs - tol),
    )
