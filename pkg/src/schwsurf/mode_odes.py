"""Radial mode equations for the stability operator of the horizon-crossing plane.

Separating the stability eigenproblem of the totally geodesic plane into
Fourier modes ``u(r, theta) = u_k(r) exp(i k theta)`` and substituting
``v = sqrt(r) u_k`` turns each mode into the normal form

    v'' + Q(r) v = 0,
    Q(r) = 1/(4 r^2) - k^2/r^2 + (m/r^3)(1 + m/2r)^-2 + lam (1 + m/2r)^4,

posed on ``r >= m/2`` (isotropic radius along the plane) with horizon data
``v(m/2) = 1``, ``v'(m/2) = 1/m`` expressing the reflection (Neumann)
condition of the original mode.  ``lam`` here is raw, in units of inverse
length squared.

The module also carries the closed forms this problem admits: the explicit
``lam = 0``, ``k = 0`` solution ``v0``, the lower barriers ``psi_k`` for the
logarithmic derivative of nonradial modes, and the one-parameter Riccati
family ``psi_c`` whose blow-up radius encodes where radial stability ends.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import ode
from .errors import DomainError, NoSingularityError, SingularityError
from .geometry import SchwarzschildModel

DEFAULT_ODE_TOL = 1e-10
# dense output and crossing refinement stay sharp only while steps are
# moderate; cap at a fixed fraction of the mass scale
_MAX_STEP_MASS_FRACTION = 0.05


@dataclass(frozen=True)
class ModeParams:
    """One Fourier mode of the plane's stability operator.

    ``lam`` is the spectral parameter in raw inverse-length-squared units;
    ``R`` is the outer truncation radius where the Dirichlet condition of
    the truncated problem lives.
    """

    model: SchwarzschildModel
    k: int
    lam: float
    R: float

    def __post_init__(self):
        self.model.require_horizon("ModeParams")
        if int(self.k) != self.k:
            raise DomainError(f"k must be an integer, got {self.k}")
        if not (self.R > self.model.horizon_rho):
            raise DomainError(f"R must exceed m/2 = {self.model.horizon_rho}, got {self.R}")
        if not math.isfinite(self.lam):
            raise DomainError(f"lam must be finite, got {self.lam}")


def v_coefficient(params: ModeParams, r: float) -> float:
    """Coefficient ``Q(r)`` of the normal form ``v'' + Q v = 0``."""
    m = params.model.mass
    if r < 0.5 * m or r <= 0.0:
        raise DomainError(f"r must be >= m/2 and > 0, got {r}")
    return _q_closure(params.model.mass, params.k, params.lam)(r)


def _q_closure(m: float, k: int, lam: float):
    k2 = float(k * k)
    hm = 0.5 * m

    def q(r: float) -> float:
        a = 1.0 + hm / r
        a2 = a * a
        rr = r * r
        return (0.25 - k2) / rr + (m / (rr * r)) / a2 + lam * a2 * a2

    return q


class RadialSolution:
    """Shot of one mode from the horizon: trajectory, zeros, accessors.

    Wraps the integrator output; node arrays are the accepted steps with
    the first node at ``r = m/2`` carrying the horizon data ``(1, 1/m)``.
    ``node_log_scale`` is zero everywhere unless the run was renormalized
    against overflow, in which case true values are ``v * exp(log_scale)``.
    """

    def __init__(self, params: ModeParams, trajectory: ode.Trajectory):
        self.params = params
        self._traj = trajectory

    @property
    def nodes_r(self) -> np.ndarray:
        return self._traj.r

    @property
    def nodes_v(self) -> np.ndarray:
        return self._traj.v

    @property
    def nodes_v_prime(self) -> np.ndarray:
        return self._traj.vp

    @property
    def node_log_scale(self) -> np.ndarray:
        return self._traj.log_scale

    @property
    def zero_crossings(self) -> tuple:
        return self._traj.crossings

    @property
    def r_max(self) -> float:
        return float(self._traj.r[-1])

    def v(self, r: float) -> float:
        return self._traj.eval(r)[0]

    def v_prime(self, r: float) -> float:
        return self._traj.eval(r)[1]

    def log_abs_v(self, r: float) -> tuple:
        """(log |v|, sign); overflow-safe for renormalized shots."""
        return self._traj.log_abs_v(r)

    def gamma(self, r: float) -> float:
        """Logarithmic derivative ``v'/v``; blows up exactly at zeros of v."""
        return self._traj.gamma(r)

    def terminal_value(self) -> float:
        """v at the right endpoint, clamped into double range if rescaled."""
        v, _, L = self._traj.final_state
        if L == 0.0 or v == 0.0:
            return v
        return math.copysign(math.exp(min(math.log(abs(v)) + L, 700.0)), v)

    def sup_abs_v(self) -> float:
        """max |v| over nodes, clamped into double range if rescaled."""
        absv = np.abs(self._traj.v)
        if np.any(self._traj.log_scale != 0.0):
            logs = np.full_like(absv, -np.inf)
            mask = absv > 0.0
            logs[mask] = np.log(absv[mask]) + self._traj.log_scale[mask]
            return float(np.exp(min(np.max(logs), 700.0)))
        return float(np.max(absv))


def integrate_v(
    params: ModeParams,
    r_max: float | None = None,
    tol: float = DEFAULT_ODE_TOL,
    max_step: float | None = None,
) -> RadialSolution:
    """Shoot the mode from the horizon out to ``r_max`` (default ``params.R``).

    Embedded 4(5) pair with absolute and relative tolerance both ``tol``,
    cubic Hermite dense output on accepted steps; zero crossings of ``v``
    are refined to width ``tol * m`` (bisection on the interpolant plus a
    Newton polish).
    """
    m = params.model.mass
    if r_max is None:
        r_max = params.R
    if not (r_max > 0.5 * m):
        raise DomainError(f"r_max must exceed m/2 = {0.5 * m}, got {r_max}")
    if not (tol > 0.0):
        raise DomainError(f"tol must be > 0, got {tol}")
    if max_step is None:
        max_step = _MAX_STEP_MASS_FRACTION * m
    q = _q_closure(m, params.k, params.lam)
    traj = ode.integrate_linear2(
        q,
        0.5 * m,
        r_max,
        1.0,
        1.0 / m,
        rtol=tol,
        atol=tol,
        max_step=max_step,
        crossing_tol=tol * m,
    )
    return RadialSolution(params, traj)


# -------------------------------------------------------------------------
# closed forms
# -------------------------------------------------------------------------


def closed_form_v0(model: SchwarzschildModel, r: float) -> float:
    """Explicit ``k = 0``, ``lam = 0`` solution of the normal form.

        v0(r) = sqrt(2r/m) [1 - ((2r - m)/(2r + m)) log sqrt(2r/m)]

    Satisfies the horizon data ``v0(m/2) = 1``, ``v0'(m/2) = 1/m`` and has
    exactly one zero, at the radius where radial stability is lost.
    """
    model.require_horizon("closed_form_v0")
    m = model.mass
    if r < 0.5 * m:
        raise DomainError(f"r must be >= m/2 = {0.5 * m}, got {r}")
    x = 2.0 * r / m
    return math.sqrt(x) * (1.0 - (2.0 * r - m) / (2.0 * r + m) * 0.5 * math.log(x))


def barrier_psi_k(model: SchwarzschildModel, k: int, r: float) -> float:
    """Riccati lower barrier for the nonradial modes ``k != 0``.

    With ``b = sqrt(4 k^2 - 2)``,

        psi(r) = (1/2r) [1 - b (2/(1 + (2r/m)^b) - 1)]

    solves ``psi' + psi^2 = (k^2 - 3/4)/r^2`` with ``psi(m/2) = 1/m`` and
    decays like ``(1 + b)/(2r)``.  Any shot ``v`` of a mode with ``k != 0``
    and ``lam <= 0`` has ``v'/v >= psi``, hence no zeros.
    """
    model.require_horizon("barrier_psi_k")
    if k == 0:
        raise DomainError("barrier is defined for k != 0 only")
    m = model.mass
    if r < 0.5 * m:
        raise DomainError(f"r must be >= m/2 = {0.5 * m}, got {r}")
    b = math.sqrt(4.0 * k * k - 2.0)
    t = b * math.log(2.0 * r / m)
    # 2/(1+x) - 1 with x = (2r/m)^b, evaluated overflow-free
    if t > 700.0:
        bracket = -1.0
    else:
        x = math.exp(t)
        bracket = 2.0 / (1.0 + x) - 1.0
    return (1.0 - b * bracket) / (2.0 * r)


def log_barrier_envelope(model: SchwarzschildModel, k: int, r: float) -> float:
    """``log`` of ``exp(integral of psi_k from m/2 to r)``, in closed form.

    The integral of the barrier has the primitive

        ((1 + b)/2) log(2r/m) - log 2 + log(1 + (2r/m)^-b),

    normalized to vanish at the horizon.  A shot with ``k != 0`` and
    ``lam <= 0`` satisfies ``log v >= `` this envelope.
    """
    model.require_horizon("log_barrier_envelope")
    if k == 0:
        raise DomainError("barrier envelope is defined for k != 0 only")
    m = model.mass
    if r < 0.5 * m:
        raise DomainError(f"r must be >= m/2 = {0.5 * m}, got {r}")
    b = math.sqrt(4.0 * k * k - 2.0)
    lx = math.log(2.0 * r / m)
    t = b * lx
    tail = math.log1p(math.exp(-t)) if t < 700.0 else 0.0
    return 0.5 * (1.0 + b) * lx - math.log(2.0) + tail


def barrier_envelope(model: SchwarzschildModel, k: int, r: float) -> float:
    """``exp(integral of psi_k)``: pointwise lower bound for those shots."""
    return math.exp(log_barrier_envelope(model, k, r))


# -------------------------------------------------------------------------
# the psi_c Riccati family
# -------------------------------------------------------------------------


def cbar(model: SchwarzschildModel) -> float:
    """Parameter value for which ``psi_c`` matches the horizon data ``1/m``.

        cbar = -8 - 4 log(m/2)

    Note the bare ``log`` of a length: rescaling ``r -> mu r`` shifts every
    ``c`` by ``-4 log mu``, so ``c`` values are tied to the unit of length.
    """
    model.require_horizon("cbar")
    return -8.0 - 4.0 * math.log(0.5 * model.mass)


def _psi_c_parts(m: float, c: float, r: float) -> tuple:
    A = 4.0 * math.log(r) + c + 8.0
    num = 4.0 * r * m * A + 16.0 * r * r - 4.0 * m * m
    den = r * (4.0 * r * r - m * m) * A - 8.0 * r * (2.0 * r + m) ** 2
    return num, den


def psi_c(model: SchwarzschildModel, c: float, r: float) -> float:
    """Member of the explicit Riccati family for the radial (``k = 0``) mode.

        psi_c(r) = 1/(2r) + [4 r m A + 16 r^2 - 4 m^2]
                            / [r (4 r^2 - m^2) A - 8 r (2r + m)^2],
        A = 4 log r + c + 8.

    Solves ``psi' + psi^2 = -1/(4 r^2) - (m/r^3)(1 + m/2r)^-2`` away from
    the single blow-up radius of the denominator; at ``c = cbar`` it equals
    ``1/m`` on the horizon.  Evaluation within the blow-up's numerical halo
    (denominator below ``1e-9`` of the numerator scale) raises
    :class:`SingularityError` carrying the located radius.

    ``c`` is unit-dependent through the bare ``log r``; see :func:`cbar`.
    """
    model.require_horizon("psi_c")
    m = model.mass
    if r < 0.5 * m:
        raise DomainError(f"r must be >= m/2 = {0.5 * m}, got {r}")
    num, den = _psi_c_parts(m, c, r)
    if abs(den) < 1e-9 * abs(num):
        raise SingularityError(
            f"psi_c evaluated at its blow-up near r = {r}",
            r_singularity=singularity_radius(model, c),
        )
    return 0.5 / r + num / den


def singularity_radius(model: SchwarzschildModel, c: float, tol: float = 1e-12) -> float:
    """Blow-up radius ``R_c > m/2`` of ``psi_c``.

    Root of ``(2R - m)(4 log R + 8 + c) = 8 (2R + m)``, located by
    bracketed root finding; strictly decreasing in ``c``.  Equivalently
    ``c = 8 (2R + m)/(2R - m) - 4 log R - 8``, which is the exact inverse.
    The residual of the returned root satisfies
    ``|F(R_c)| <= tol * 8 (2 R_c + m)``.
    """
    model.require_horizon("singularity_radius")
    m = model.mass
    if not (tol > 0.0):
        raise DomainError(f"tol must be > 0, got {tol}")

    def F(R: float) -> float:
        return (2.0 * R - m) * (4.0 * math.log(R) + 8.0 + c) - 8.0 * (2.0 * R + m)

    lo = 0.5 * m
    hi = max(2.0 * m, 1.0)
    f_hi = F(hi)
    n_double = 0
    while f_hi <= 0.0:
        hi *= 2.0
        n_double += 1
        if n_double > 200:
            raise NoSingularityError(
                f"no sign change for the blow-up of psi_c up to R = {hi}"
            )
        f_hi = F(hi)
    # F(m/2) = -16 m < 0, so the bracket is valid
    root = brentq(F, lo, hi, xtol=1e-15 * max(1.0, hi), rtol=8.0 * np.finfo(float).eps)
    scale = 8.0 * (2.0 * root + m)
    if abs(F(root)) > tol * scale:
        raise NoSingularityError(
            f"blow-up radius residual {F(root)} exceeds tol * {scale}"
        )
    return float(root)


def ode_residual_grid(
    func, q_func, r_values: np.ndarray, step: float
) -> np.ndarray:
    """5-point central ``func'' + q func`` residuals on a grid.

    Utility for checking closed-form solutions of ``v'' + Q v = 0``
    without symbolic differentiation; ``step`` is the stencil spacing.
    """
    r = np.asarray(r_values, dtype=float)
    out = np.empty_like(r)
    for i, x in enumerate(r):
        f2 = (
            -func(x - 2 * step)
            + 16.0 * func(x - step)
            - 30.0 * func(x)
            + 16.0 * func(x + step)
            - func(x + 2 * step)
        ) / (12.0 * step * step)
        out[i] = f2 + q_func(x) * func(x)
    return out


def riccati_residual_grid(
    func, rhs_func, r_values: np.ndarray, step: float
) -> np.ndarray:
    """5-point central ``func' + func^2 - rhs`` residuals on a grid."""
    r = np.asarray(r_values, dtype=float)
    out = np.empty_like(r)
    for i, x in enumerate(r):
        d1 = (
            func(x - 2 * step)
            - 8.0 * func(x - step)
            + 8.0 * func(x + step)
            - func(x + 2 * step)
        ) / (12.0 * step)
        out[i] = d1 + func(x) ** 2 - rhs_func(x)
    return out


def radial_q(model: SchwarzschildModel, lam: float = 0.0, k: int = 0):
    """Convenience: the coefficient ``Q`` as a plain callable of ``r``."""
    model.require_horizon("radial_q")
    return _q_closure(model.mass, k, lam)
