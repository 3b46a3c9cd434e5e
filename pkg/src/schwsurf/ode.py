"""Adaptive integration of ``v'' + q(r) v = 0`` with dense output.

Embedded Dormand-Prince 4(5) pair on the first-order system ``(v, v')``,
absolute and relative tolerance both settable, cubic Hermite dense output
on accepted steps and sign-change detection for the zeros of ``v``.

The stepper works on plain floats (the system has two components; numpy
per-step overhead would dominate the run time of long shots).  Solutions
of the underlying mode problems can grow like ``exp(c r)`` over thousands
of mass units, so the state is renormalized by a positive factor whenever
it threatens the double range; zeros and signs are invariant under that,
and per-node log-scale offsets keep magnitudes recoverable.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, IntegrationError

# Dormand-Prince 5(4) tableau
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
# fifth-order minus embedded fourth-order weights
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_RENORM_THRESHOLD = 1e150
_MAX_STEPS = 20_000_000


def _hermite(tau: float, h: float, y0: float, d0: float, y1: float, d1: float) -> float:
    t2 = tau * tau
    t3 = t2 * tau
    return (
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
        + h * d0 * (t3 - 2.0 * t2 + tau)
        + y1 * (-2.0 * t3 + 3.0 * t2)
        + h * d1 * (t3 - t2)
    )


def _hermite_d(tau: float, h: float, y0: float, d0: float, y1: float, d1: float) -> float:
    t2 = tau * tau
    return (
        y0 * (6.0 * t2 - 6.0 * tau)
        + h * d0 * (3.0 * t2 - 4.0 * tau + 1.0)
        + y1 * (-6.0 * t2 + 6.0 * tau)
        + h * d1 * (3.0 * t2 - 2.0 * tau)
    ) / h


@dataclass(frozen=True)
class Trajectory:
    """Accepted-step samples of one integration of ``v'' + q v = 0``.

    ``v``/``vp`` hold frame-local values: the true solution at node ``i``
    is ``v[i] * exp(log_scale[i])``.  ``log_scale`` is identically zero
    unless the run grew past the renormalization threshold.
    """

    r: np.ndarray
    v: np.ndarray
    vp: np.ndarray
    log_scale: np.ndarray
    q_nodes: np.ndarray
    crossings: tuple

    def _interval(self, x: float) -> int:
        if not (self.r[0] <= x <= self.r[-1]):
            raise DomainError(f"evaluation point {x} outside [{self.r[0]}, {self.r[-1]}]")
        i = bisect_right(self.r, x) - 1
        return min(max(i, 0), len(self.r) - 2)

    def _eval_frame(self, x: float) -> tuple:
        """(v, vp, log_scale) at x, values in the left node's frame."""
        if x == self.r[-1]:
            i = len(self.r) - 2
        else:
            i = self._interval(x)
        r0, r1 = self.r[i], self.r[i + 1]
        dL = self.log_scale[i + 1] - self.log_scale[i]
        fac = math.exp(dL)
        v0, w0 = self.v[i], self.vp[i]
        v1, w1 = self.v[i + 1] * fac, self.vp[i + 1] * fac
        h = r1 - r0
        if h == 0.0:
            return v0, w0, self.log_scale[i]
        tau = (x - r0) / h
        val = _hermite(tau, h, v0, w0, v1, w1)
        # v' gets its own cubic: endpoint slopes are v'' = -q v
        w0p = -self.q_nodes[i] * v0
        w1p = -self.q_nodes[i + 1] * v1
        der = _hermite(tau, h, w0, w0p, w1, w1p)
        return val, der, self.log_scale[i]

    def eval(self, x: float) -> tuple:
        """(v, v') at x; overflows to +-inf if the stored scale is extreme."""
        val, der, L = self._eval_frame(x)
        fac = math.exp(min(L, 709.0)) if L != 0.0 else 1.0
        return val * fac, der * fac

    def log_abs_v(self, x: float) -> tuple:
        """(log |v(x)|, sign of v(x)); safe for renormalized runs."""
        val, _, L = self._eval_frame(x)
        if val == 0.0:
            return -math.inf, 0.0
        return math.log(abs(val)) + L, math.copysign(1.0, val)

    def gamma(self, x: float) -> float:
        """Logarithmic derivative ``v'/v`` (frame factors cancel)."""
        val, der, _ = self._eval_frame(x)
        if val == 0.0:
            raise DomainError(f"gamma undefined at a zero of v (r = {x})")
        return der / val

    @property
    def final_state(self) -> tuple:
        """(v, v', log_scale) at the right endpoint."""
        return float(self.v[-1]), float(self.vp[-1]), float(self.log_scale[-1])


def _refine_crossing(r0, r1, v0, w0, v1, w1, tol_r: float) -> float:
    """Locate the sign change of the Hermite interpolant on [r0, r1].

    Bisection down to width ``tol_r``, then two Newton polish steps on the
    interpolant using its derivative.
    """
    h = r1 - r0
    lo, hi = 0.0, 1.0
    flo = v0
    for _ in range(80):
        if (hi - lo) * h <= tol_r:
            break
        mid = 0.5 * (lo + hi)
        fm = _hermite(mid, h, v0, w0, v1, w1)
        if fm == 0.0:
            lo = hi = mid
            break
        if (fm > 0.0) == (flo > 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    tau = 0.5 * (lo + hi)
    for _ in range(2):
        p = _hermite(tau, h, v0, w0, v1, w1)
        dp = _hermite_d(tau, h, v0, w0, v1, w1) * h
        if dp == 0.0:
            break
        step = p / dp
        nt = tau - step
        if 0.0 <= nt <= 1.0:
            tau = nt
    return r0 + tau * h


def integrate_linear2(
    q: Callable[[float], float],
    r0: float,
    r1: float,
    v_init: float,
    vp_init: float,
    rtol: float,
    atol: float,
    max_step: float,
    crossing_tol: float,
) -> Trajectory:
    """Integrate ``v'' + q(r) v = 0`` from ``(r0, v_init, vp_init)`` to ``r1``.

    Raises :class:`IntegrationError` with the last good abscissa if the
    step size underflows.
    """
    if not (r1 > r0):
        raise DomainError(f"need r1 > r0, got [{r0}, {r1}]")
    if not (rtol > 0.0 and atol > 0.0):
        raise DomainError("tolerances must be > 0")
    if not (max_step > 0.0):
        raise DomainError("max_step must be > 0")

    rs = [r0]
    vs = [v_init]
    ws = [vp_init]
    Ls = [0.0]
    qs = [q(r0)]

    r = r0
    v, w = v_init, vp_init
    L = 0.0
    k1v, k1w = w, -qs[0] * v  # FSAL seed
    h = min(max_step, (r1 - r0) / 100.0)

    n_steps = 0
    while r < r1:
        n_steps += 1
        if n_steps > _MAX_STEPS:
            raise IntegrationError(f"step budget exhausted at r = {r}", last_r=r)
        if h < 1e-14 * max(1.0, abs(r)):
            raise IntegrationError(f"step size underflow at r = {r}", last_r=r)
        last = False
        if r + h >= r1:
            h = r1 - r
            last = True

        # stages (k1 carried over, FSAL)
        yv = v + h * _A21 * k1v
        yw = w + h * _A21 * k1w
        q2 = q(r + _C2 * h)
        k2v, k2w = yw, -q2 * yv

        yv = v + h * (_A31 * k1v + _A32 * k2v)
        yw = w + h * (_A31 * k1w + _A32 * k2w)
        q3 = q(r + _C3 * h)
        k3v, k3w = yw, -q3 * yv

        yv = v + h * (_A41 * k1v + _A42 * k2v + _A43 * k3v)
        yw = w + h * (_A41 * k1w + _A42 * k2w + _A43 * k3w)
        q4 = q(r + _C4 * h)
        k4v, k4w = yw, -q4 * yv

        yv = v + h * (_A51 * k1v + _A52 * k2v + _A53 * k3v + _A54 * k4v)
        yw = w + h * (_A51 * k1w + _A52 * k2w + _A53 * k3w + _A54 * k4w)
        q5 = q(r + _C5 * h)
        k5v, k5w = yw, -q5 * yv

        yv = v + h * (_A61 * k1v + _A62 * k2v + _A63 * k3v + _A64 * k4v + _A65 * k5v)
        yw = w + h * (_A61 * k1w + _A62 * k2w + _A63 * k3w + _A64 * k4w + _A65 * k5w)
        q6 = q(r + h)
        k6v, k6w = yw, -q6 * yv

        v_new = v + h * (_B1 * k1v + _B3 * k3v + _B4 * k4v + _B5 * k5v + _B6 * k6v)
        w_new = w + h * (_B1 * k1w + _B3 * k3w + _B4 * k4w + _B5 * k5w + _B6 * k6w)
        q7 = q6  # stages 6 and 7 share the abscissa r + h
        k7v, k7w = w_new, -q7 * v_new

        err_v = h * (_E1 * k1v + _E3 * k3v + _E4 * k4v + _E5 * k5v + _E6 * k6v + _E7 * k7v)
        err_w = h * (_E1 * k1w + _E3 * k3w + _E4 * k4w + _E5 * k5w + _E6 * k6w + _E7 * k7w)
        sc_v = atol + rtol * max(abs(v), abs(v_new))
        sc_w = atol + rtol * max(abs(w), abs(w_new))
        ev = err_v / sc_v
        ew = err_w / sc_w
        err = math.sqrt(0.5 * (ev * ev + ew * ew))
        if not math.isfinite(err):
            h *= 0.2
            continue

        if err <= 1.0:
            r = r1 if last else r + h
            v, w = v_new, w_new
            k1v, k1w = k7v, k7w
            rs.append(r)
            mag = max(abs(v), abs(w))
            if mag > _RENORM_THRESHOLD:
                v /= mag
                w /= mag
                k1v /= mag
                k1w /= mag
                L += math.log(mag)
            vs.append(v)
            ws.append(w)
            Ls.append(L)
            qs.append(q7)
            grow = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            h = min(max_step, h * grow)
        else:
            h *= max(0.2, 0.9 * err ** -0.2)

    r_arr = np.asarray(rs)
    v_arr = np.asarray(vs)
    w_arr = np.asarray(ws)
    L_arr = np.asarray(Ls)
    q_arr = np.asarray(qs)

    crossings = _scan_crossings(r_arr, v_arr, w_arr, L_arr, q_arr, crossing_tol)
    return Trajectory(r_arr, v_arr, w_arr, L_arr, q_arr, tuple(crossings))


def _scan_crossings(r, v, w, L, qn, tol_r) -> Sequence[float]:
    out = []
    n = len(r)
    i = 0
    while i < n:
        if v[i] == 0.0:
            out.append(float(r[i]))
            i += 1
            continue
        if i + 1 < n and v[i + 1] != 0.0 and (v[i] > 0.0) != (v[i + 1] > 0.0):
            fac = math.exp(L[i + 1] - L[i])
            z = _refine_crossing(
                r[i], r[i + 1], v[i], w[i], v[i + 1] * fac, w[i + 1] * fac, tol_r
            )
            out.append(float(z))
        i += 1
    return out
