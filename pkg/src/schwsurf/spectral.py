"""Spectral quantities of the truncated plane: counts, eigenvalues, index.

The truncated problem on ``m/2 <= r <= R`` carries the Neumann condition
on the horizon and a Dirichlet condition at ``R``.  Its spectrum per
Fourier mode ``k`` is simple, and classical oscillation theory ties the
position of the ``n``-th eigenvalue to the number of interior zeros of
the horizon shot: the ``lam = 0`` shot has as many interior zeros as the
mode has negative eigenvalues.

Eigenvalues are reported in mass-squared units (``lam_report = lam_raw m^2``)
so that results are invariant under rescaling the mass.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, PreconditionError, SearchError
from .geometry import SchwarzschildModel
from .mode_odes import DEFAULT_ODE_TOL, ModeParams, RadialSolution, closed_form_v0, integrate_v

DEFAULT_LAMBDA_TOL = 1e-9  # mass-squared units; keep >= 10x the ODE tol
_BRACKET_START = 10.0  # mass-squared units
_MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class SpectrumEntry:
    k: int
    n: int
    lam: float  # mass-squared units


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues of one truncated mode problem."""

    model: SchwarzschildModel
    R: float
    entries: tuple
    method: str
    tolerances: dict = field(default_factory=dict)

    def lambdas(self, k: int | None = None) -> np.ndarray:
        vals = [e.lam for e in self.entries if k is None or e.k == k]
        return np.asarray(vals)


@dataclass(frozen=True)
class IndexReport:
    """Negative-count bookkeeping behind a Morse index value."""

    model: SchwarzschildModel
    R: float
    kmax: int
    per_mode_negative_counts: dict
    morse_index: int


def _boundary_band(R: float, tol: float, m: float) -> float:
    # crossings this close to R count as the boundary zero, not interior
    return max(1e-9 * R, 10.0 * tol * m)


def interior_zero_count(
    solution: RadialSolution, R: float, tol: float, exclude_boundary: bool = True
) -> int:
    """Zeros of the shot strictly inside ``(m/2, R)``.

    With ``exclude_boundary`` (the default, used by :func:`negative_count`)
    a refined crossing within ``max(1e-9 R, 10 tol m)`` of ``R`` is treated
    as the boundary zero of an eigenfunction, not an interior one; that
    makes the count insensitive to roundoff when an eigenvalue sits at
    exactly zero.  The eigenvalue search instead counts every crossing up
    to ``R``, because a crossing that close to the edge is a zero that has
    just entered through it.
    """
    m = solution.params.model.mass
    band = _boundary_band(R, tol, m) if exclude_boundary else 0.0
    return sum(1 for z in solution.zero_crossings if 0.5 * m < z <= R - band)


def negative_count(
    model: SchwarzschildModel,
    k: int,
    R: float,
    ode_tol: float = DEFAULT_ODE_TOL,
) -> int:
    """Number of negative eigenvalues of mode ``k`` truncated at ``R``.

    Equals the number of interior zeros of the ``lam = 0`` shot.
    """
    params = ModeParams(model, k, 0.0, R)
    sol = integrate_v(params, r_max=R, tol=ode_tol)
    return interior_zero_count(sol, R, ode_tol)


def _shot(model, k, lam_raw, R, ode_tol):
    params = ModeParams(model, k, lam_raw, R)
    sol = integrate_v(params, r_max=R, tol=ode_tol)
    return sol


def eigenvalues_shooting(
    model: SchwarzschildModel,
    k: int,
    R: float,
    how_many: int,
    tol: float = DEFAULT_LAMBDA_TOL,
    ode_tol: float = DEFAULT_ODE_TOL,
) -> Spectrum:
    """Lowest ``how_many`` eigenvalues of mode ``k`` by shooting.

    Each eigenvalue is bracketed by oscillation count (shots with ``n - 1``
    versus ``n`` interior zeros), then polished on the terminal value
    ``v(R; lam)``, which changes sign exactly once inside such a bracket.
    ``tol`` bounds the final bracket width in mass-squared units.

    Raises :class:`SearchError` with diagnostics if bracket expansion
    fails to enclose the requested count.
    """
    model.require_horizon("eigenvalues_shooting")
    m = model.mass
    if how_many < 1:
        raise DomainError(f"how_many must be >= 1, got {how_many}")
    if not (R > 0.5 * m):
        raise DomainError(f"R must exceed m/2 = {0.5 * m}, got {R}")
    if not (tol > 0.0):
        raise DomainError(f"tol must be > 0, got {tol}")

    m2 = m * m
    tol_raw = tol / m2
    cache: dict = {}

    def probe(lam_raw: float):
        if lam_raw not in cache:
            sol = _shot(model, k, lam_raw, R, ode_tol)
            cache[lam_raw] = (
                interior_zero_count(sol, R, ode_tol, exclude_boundary=False),
                sol.terminal_value(),
            )
        return cache[lam_raw]

    def count(lam_raw: float) -> int:
        return probe(lam_raw)[0]

    def terminal(lam_raw: float) -> float:
        return probe(lam_raw)[1]

    entries = []
    for n in range(1, how_many + 1):
        lam_lo = -_BRACKET_START / m2
        lam_hi = _BRACKET_START / m2
        doublings = 0
        while count(lam_lo) > n - 1:
            lam_lo *= 2.0
            doublings += 1
            if doublings > _MAX_DOUBLINGS:
                raise SearchError(
                    "lower bracket expansion failed",
                    diagnostics={"k": k, "n": n, "lam_lo": lam_lo * m2,
                                 "count": count(lam_lo / 2.0)},
                )
        doublings = 0
        while count(lam_hi) < n:
            lam_hi *= 2.0
            doublings += 1
            if doublings > _MAX_DOUBLINGS:
                raise SearchError(
                    "upper bracket expansion failed",
                    diagnostics={"k": k, "n": n, "lam_hi": lam_hi * m2,
                                 "count": count(lam_hi / 2.0)},
                )

        # bisect on the count until the bracket holds exactly one eigenvalue;
        # stop at width tol in the roundoff regime where |v(R)| sits at noise
        # level and the count flickers
        while not (count(lam_lo) == n - 1 and count(lam_hi) == n):
            if lam_hi - lam_lo <= tol_raw:
                break
            mid = 0.5 * (lam_lo + lam_hi)
            if mid == lam_lo or mid == lam_hi:
                break
            if count(mid) >= n:
                lam_hi = mid
            else:
                lam_lo = mid

        t_lo = terminal(lam_lo)
        t_hi = terminal(lam_hi)
        if t_lo == 0.0:
            lam_n = lam_lo
        elif t_hi == 0.0:
            lam_n = lam_hi
        elif (t_lo > 0.0) != (t_hi > 0.0):
            lam_n = brentq(
                terminal, lam_lo, lam_hi, xtol=tol_raw, rtol=8.0 * np.finfo(float).eps
            )
        elif lam_hi - lam_lo <= tol_raw:
            lam_n = 0.5 * (lam_lo + lam_hi)
        else:
            # terminal signs agree only if the count bisection stalled
            raise SearchError(
                "terminal value does not change sign across the bracket",
                diagnostics={"k": k, "n": n, "lam_lo": lam_lo * m2,
                             "lam_hi": lam_hi * m2, "t_lo": t_lo, "t_hi": t_hi},
            )
        entries.append(SpectrumEntry(k=k, n=n, lam=lam_n * m2))

    return Spectrum(
        model=model,
        R=R,
        entries=tuple(entries),
        method="shooting",
        tolerances={"lambda_tol": tol, "ode_tol": ode_tol},
    )


def eigenfunction(
    model: SchwarzschildModel,
    k: int,
    R: float,
    lam: float,
    n_samples: int = 2001,
    ode_tol: float = DEFAULT_ODE_TOL,
) -> tuple:
    """Sampled eigenfunction ``u = v/sqrt(r)`` for a converged eigenvalue.

    ``lam`` is in mass-squared units.  Returns ``(r, u, u_prime)`` on a
    uniform grid over ``[m/2, R]``, normalized to weighted norm one in
    ``integral of u^2 (1 + m/2r)^4 r dr`` (the angular factor ``2 pi`` is
    left out) with ``u(m/2) > 0``.
    """
    model.require_horizon("eigenfunction")
    m = model.mass
    lam_raw = lam / (m * m)
    sol = _shot(model, k, lam_raw, R, ode_tol)
    r = np.linspace(0.5 * m, R, n_samples)
    v = np.empty_like(r)
    vp = np.empty_like(r)
    for i, x in enumerate(r):
        v[i], vp[i] = sol._traj.eval(x)
    sq = np.sqrt(r)
    u = v / sq
    up = vp / sq - 0.5 * v / (r * sq)
    w = (1.0 + 0.5 * m / r) ** 4 * r
    norm2 = _panel_integral_hermite(r, u * u * w, None)
    u /= math.sqrt(norm2)
    up /= math.sqrt(norm2)
    return r, u, up


# -------------------------------------------------------------------------
# Rayleigh quotient
# -------------------------------------------------------------------------

_GL16_X, _GL16_W = np.polynomial.legendre.leggauss(16)


def _panel_integral_hermite(r, g, gp) -> float:
    """Integral of sampled data: 16-point Gauss panels per sample interval.

    Values on each panel come from the cubic Hermite through the samples;
    when ``gp`` is None the slopes are 4th-order finite differences.
    """
    if gp is None:
        gp = _derivative_samples(r, g)
    total = 0.0
    r0 = r[:-1]
    r1 = r[1:]
    h = r1 - r0
    tau = 0.5 * (_GL16_X + 1.0)
    t2 = tau * tau
    t3 = t2 * tau
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + tau
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    vals = (
        np.outer(g[:-1], h00)
        + np.outer(gp[:-1] * h, h10)
        + np.outer(g[1:], h01)
        + np.outer(gp[1:] * h, h11)
    )
    total = float(np.sum(vals @ _GL16_W * (0.5 * h)))
    return total


def _derivative_samples(r: np.ndarray, g: np.ndarray) -> np.ndarray:
    """4th-order derivatives of sampled data via local quartic fits."""
    n = len(r)
    if n < 5:
        raise PreconditionError("need at least 5 samples for the derivative stencil")
    out = np.empty(n)
    for i in range(n):
        j = min(max(i - 2, 0), n - 5)
        rs = r[j : j + 5]
        gs = g[j : j + 5]
        x0 = rs[2]
        coef = np.polyfit(rs - x0, gs, 4)
        der = np.polyval(np.polyder(coef), r[i] - x0)
        out[i] = der
    return out


def rayleigh_quotient(
    model: SchwarzschildModel,
    R: float,
    r: np.ndarray,
    u: np.ndarray,
    u_prime: np.ndarray | None = None,
) -> float:
    """Quadratic-form quotient of a radial test function on ``[m/2, R]``.

        [integral (u'^2 - (m/r^3)(1 + m/2r)^-2 u^2) r dr]
        / [integral u^2 (1 + m/2r)^4 r dr]

    ``u`` must be sampled over the full interval and vanish at ``R``
    (within ``1e-6`` of its sup); its sign gives the sign of the quadratic
    form, and on an eigenfunction it reproduces the eigenvalue (returned
    in mass-squared units).
    """
    model.require_horizon("rayleigh_quotient")
    m = model.mass
    r = np.asarray(r, dtype=float)
    u = np.asarray(u, dtype=float)
    if r.ndim != 1 or r.shape != u.shape or len(r) < 5:
        raise PreconditionError("need matching 1-d samples, at least 5 points")
    if np.any(np.diff(r) <= 0.0):
        raise PreconditionError("sample grid must be strictly increasing")
    if abs(r[0] - 0.5 * m) > 1e-9 * max(1.0, m) or abs(r[-1] - R) > 1e-9 * max(1.0, R):
        raise PreconditionError(f"samples must span [m/2, R] = [{0.5 * m}, {R}]")
    sup = float(np.max(np.abs(u)))
    if sup == 0.0:
        raise PreconditionError("u vanishes identically")
    if abs(u[-1]) > 1e-6 * sup:
        raise PreconditionError(
            f"u(R) = {u[-1]} does not vanish within 1e-6 of sup |u| = {sup}"
        )
    if u_prime is None:
        u_prime = _derivative_samples(r, u)
    else:
        u_prime = np.asarray(u_prime, dtype=float)

    pot = (m / r**3) / (1.0 + 0.5 * m / r) ** 2
    weight = (1.0 + 0.5 * m / r) ** 4

    num_g = (u_prime**2 - pot * u**2) * r
    den_g = u**2 * weight * r
    num = _panel_integral_hermite(r, num_g, None)
    den = _panel_integral_hermite(r, den_g, None)
    return (num / den) * m * m


# -------------------------------------------------------------------------
# Morse index and the stability radius
# -------------------------------------------------------------------------


def morse_index(
    model: SchwarzschildModel,
    R: float | None = None,
    kmax: int = 5,
    ode_tol: float = DEFAULT_ODE_TOL,
    workers: int = 1,
) -> IndexReport:
    """Morse index of the plane truncated at ``R``: sum of negative counts
    over the modes ``k = 0, +-1, ..., +-kmax``.

    ``R`` defaults to ``1e3 m`` (the truncation at which the index of the
    full plane is reported).  ``workers`` caps the thread pool used for
    independent modes; 0 means one thread per CPU.
    """
    model.require_horizon("morse_index")
    m = model.mass
    if R is None:
        R = 1e3 * m
    if kmax < 0:
        raise DomainError(f"kmax must be >= 0, got {kmax}")

    ks = list(range(0, kmax + 1))
    if workers == 0:
        workers = os.cpu_count() or 1
    if workers > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda k: negative_count(model, k, R, ode_tol), ks))
    else:
        counts = [negative_count(model, k, R, ode_tol) for k in ks]

    per_mode = {}
    total = 0
    for k, c in zip(ks, counts):
        per_mode[k] = c
        if k > 0:
            per_mode[-k] = c
            total += 2 * c
        else:
            total += c
    per_mode = dict(sorted(per_mode.items()))
    return IndexReport(
        model=model, R=R, kmax=kmax, per_mode_negative_counts=per_mode, morse_index=total
    )


def stability_radius(model: SchwarzschildModel, tol: float = 1e-12) -> float:
    """Largest truncation radius with a nonnegative radial mode.

    Root of ``(1/2) log(2R/m) = (2R + m)/(2R - m)`` on ``(m/2, infinity)``,
    bracketed in ``[2m, 100m]``; the returned root has residual at most
    ``tol`` in the defining equation.  Numerically ``5.508 m``; the
    explicit radial solution :func:`closed_form_v0` vanishes there.
    """
    model.require_horizon("stability_radius")
    m = model.mass
    if not (tol > 0.0):
        raise DomainError(f"tol must be > 0, got {tol}")

    def G(R: float) -> float:
        return 0.5 * math.log(2.0 * R / m) - (2.0 * R + m) / (2.0 * R - m)

    root = brentq(G, 2.0 * m, 100.0 * m, xtol=1e-15 * m, rtol=8.0 * np.finfo(float).eps)
    if abs(G(root)) > tol:
        raise SearchError(
            "stability radius residual above tolerance",
            diagnostics={"root": root, "residual": G(root), "tol": tol},
        )
    return float(root)
