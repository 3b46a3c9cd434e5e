"""Eigenvalue search, oscillation counts, Morse index, Rayleigh quotient."""

import numpy as np
import pytest

from schwsurf import (
    ModeParams,
    SchwarzschildModel,
    closed_form_v0,
    eigenfunction,
    eigenvalues_shooting,
    integrate_v,
    morse_index,
    negative_count,
    rayleigh_quotient,
    stability_radius,
)
from schwsurf.errors import DomainError
from schwsurf.spectral import interior_zero_count

# zero of the radial closed form at m = 2, 30-digit reference
R_STAR_M2 = 11.016093846685423

LAMBDA_TOL = 1e-9  # mass-squared units, the search default
ODE_TOL = 1e-10


@pytest.fixture(scope="module")
def spec20(m2):
    """Three lowest radial eigenvalues at R = 20, shared by several tests."""
    return eigenvalues_shooting(m2, 0, 20.0, 3, tol=LAMBDA_TOL, ode_tol=ODE_TOL)


# ------------------------------------------------------------ stability radius


def test_stability_radius_value_and_residual(m2):
    R = stability_radius(m2, tol=1e-12)
    assert R == pytest.approx(R_STAR_M2, rel=1e-13)
    assert 5.50 <= R / m2.mass <= 5.52
    assert abs(closed_form_v0(m2, R)) <= 1e-8


def test_stability_radius_scale_covariance():
    a = stability_radius(SchwarzschildModel(1.0))
    b = stability_radius(SchwarzschildModel(2.0))
    assert b == pytest.approx(2.0 * a, rel=1e-13)


def test_stability_radius_validation(m2):
    with pytest.raises(DomainError):
        stability_radius(m2, tol=0.0)


# ----------------------------------------------------------- counting machinery


def test_negative_count_dichotomy(m2):
    m = m2.mass
    for ratio in (1.5, 3.0, 5.4):
        assert negative_count(m2, 0, ratio * m) == 0
    for ratio in (5.6, 10.0):
        assert negative_count(m2, 0, ratio * m) == 1
    assert negative_count(m2, 1, 40.0) == 0


def test_negative_count_stable_at_the_critical_radius(m2):
    """At R exactly the stability radius the boundary zero is not interior."""
    R = stability_radius(m2)
    assert negative_count(m2, 0, R) == 0
    assert negative_count(m2, 0, R + 0.01) == 1


def test_interior_zero_count_boundary_band(m2):
    R = stability_radius(m2)
    sol = integrate_v(ModeParams(m2, 0, 0.0, R), tol=ODE_TOL)
    assert interior_zero_count(sol, R, ODE_TOL, exclude_boundary=True) == 0
    # the search-side count sees the crossing that sits on the edge
    assert interior_zero_count(sol, R, ODE_TOL, exclude_boundary=False) == 1


# ------------------------------------------------------------------- spectrum


def test_spectrum_strictly_increasing(spec20):
    lams = spec20.lambdas()
    assert len(lams) == 3
    assert np.all(np.diff(lams) > 0.0)
    assert lams[0] < 0.0 < lams[1]  # R/m = 10 has exactly one unstable mode


def test_spectrum_metadata(spec20, m2):
    assert spec20.method == "shooting"
    assert spec20.R == 20.0
    assert [e.n for e in spec20.entries] == [1, 2, 3]
    assert all(e.k == 0 for e in spec20.entries)


def test_spectrum_terminal_condition(spec20, m2):
    """Re-shot terminal values are zero to bracket-width times slope."""
    m = m2.mass
    for e in spec20.entries:
        lam_raw = e.lam / (m * m)
        sol = integrate_v(ModeParams(m2, 0, lam_raw, 20.0), tol=ODE_TOL)
        # local sensitivity of the terminal value to the eigenvalue
        d = 1e-6
        lo = integrate_v(ModeParams(m2, 0, lam_raw - d, 20.0), tol=ODE_TOL)
        hi = integrate_v(ModeParams(m2, 0, lam_raw + d, 20.0), tol=ODE_TOL)
        slope = abs(hi.terminal_value() - lo.terminal_value()) / (2.0 * d)
        band = LAMBDA_TOL / (m * m)
        assert abs(sol.terminal_value()) <= 4.0 * slope * band + 1e-12 * sol.sup_abs_v()


def test_oscillation_consistency_around_eigenvalues(spec20, m2):
    """Interior zero count jumps by one across each reported eigenvalue."""
    m = m2.mass
    for e in spec20.entries:
        for sign, expect in ((-1.0, e.n - 1), (+1.0, e.n)):
            lam_raw = (e.lam + sign * 10.0 * LAMBDA_TOL) / (m * m)
            sol = integrate_v(ModeParams(m2, 0, lam_raw, 20.0), tol=ODE_TOL)
            count = interior_zero_count(sol, 20.0, ODE_TOL, exclude_boundary=False)
            assert count == expect, (e.n, sign, count)


def test_nonradial_spectrum_positive(m2):
    spec = eigenvalues_shooting(m2, 1, 20.0, 1)
    assert spec.lambdas()[0] > 0.0


def test_spectrum_search_validation(m2):
    with pytest.raises(DomainError):
        eigenvalues_shooting(m2, 0, 20.0, 0)
    with pytest.raises(DomainError):
        eigenvalues_shooting(m2, 0, 0.5, 1)
    with pytest.raises(DomainError):
        eigenvalues_shooting(m2, 0, 20.0, 1, tol=-1e-9)


def test_spectrum_scale_covariance():
    """Eigenvalues in mass-squared units are invariant under rescaling."""
    a = eigenvalues_shooting(SchwarzschildModel(1.0), 0, 10.0, 2)
    b = eigenvalues_shooting(SchwarzschildModel(2.0), 0, 20.0, 2)
    assert b.lambdas() == pytest.approx(a.lambdas(), rel=1e-6, abs=1e-9)


# -------------------------------------------------------------- eigenfunctions


def test_first_eigenfunction_shape(spec20, m2):
    lam1 = spec20.lambdas()[0]
    r, u, up = eigenfunction(m2, 0, 20.0, lam1)
    assert r[0] == 1.0 and r[-1] == 20.0
    assert u[0] > 0.0
    # ground state: no interior sign change; the terminal sample may sit
    # within roundoff of zero on either side
    assert np.all(u[:-1] > 0.0)
    assert abs(u[-1]) <= 1e-6 * np.max(np.abs(u))


def test_eigenfunction_normalization(spec20, m2):
    lam1 = spec20.lambdas()[0]
    r, u, up = eigenfunction(m2, 0, 20.0, lam1)
    w = (1.0 + 1.0 / r) ** 4 * r
    # trapezoid on 2001 samples carries its own O(h^2) error of a few 1e-6
    norm = np.trapezoid(u * u * w, r)
    assert norm == pytest.approx(1.0, rel=1e-5)


def test_second_eigenfunction_has_one_interior_zero(spec20, m2):
    lam2 = spec20.lambdas()[1]
    r, u, up = eigenfunction(m2, 0, 20.0, lam2)
    interior = u[:-1]
    signs = np.sign(interior[np.abs(interior) > 1e-8 * np.max(np.abs(u))])
    flips = np.sum(signs[1:] != signs[:-1])
    assert flips == 1


# ------------------------------------------------------------ Rayleigh quotient


def test_rayleigh_reproduces_eigenvalue(spec20, m2):
    lam1 = spec20.lambdas()[0]
    r, u, up = eigenfunction(m2, 0, 20.0, lam1)
    q = rayleigh_quotient(m2, 20.0, r, u, up)
    assert q == pytest.approx(lam1, rel=1e-4)


def test_rayleigh_of_critical_closed_form_vanishes(m2):
    """The explicit radial solution is the null direction at the critical R."""
    R = stability_radius(m2)
    r = np.linspace(1.0, R, 4001)
    u = np.array([closed_form_v0(m2, x) for x in r]) / np.sqrt(r)
    q = rayleigh_quotient(m2, R, r, u)
    assert abs(q) <= 1e-8


def test_rayleigh_positive_battery_inside_critical_radius(m2):
    """The quadratic form is positive on a 20-function battery at R = 3."""
    R = 3.0
    r = np.linspace(1.0, R, 801)
    x = (r - 1.0) / (R - 1.0)  # normalized coordinate in [0, 1]
    battery = []
    for j in range(1, 11):
        battery.append(np.sin(np.pi * j * x))  # vanishes at both ends
    for j in range(1, 6):
        battery.append((1.0 - x) * np.cos(2.3 * j * x))  # nonzero at horizon
    for j in range(1, 6):
        battery.append((1.0 - x) ** j * (1.0 + 0.5 * x))
    assert len(battery) == 20
    for u in battery:
        q = rayleigh_quotient(m2, R, r, np.asarray(u))
        assert q > 0.0


def test_rayleigh_validation(m2):
    r = np.linspace(1.0, 3.0, 101)
    u = np.ones_like(r)
    with pytest.raises(Exception):
        rayleigh_quotient(m2, 3.0, r, u)  # does not vanish at R
    with pytest.raises(Exception):
        rayleigh_quotient(m2, 3.0, r[:4], u[:4])  # too few samples
    with pytest.raises(Exception):
        rayleigh_quotient(m2, 3.0, r + 1.0, (1.0 - (r - 1.0) / 2.0))  # wrong span


# ----------------------------------------------------------------- Morse index


def test_morse_index_single_jump(m2):
    """The index goes 0 -> 1 exactly between 5.4 m and 5.6 m and stays 1."""
    m = m2.mass
    ratios = [1.1, 2.0, 4.0, 5.4, 5.6, 8.0, 20.0, 100.0]
    indices = []
    for ratio in ratios:
        rep = morse_index(m2, R=ratio * m, kmax=5)
        indices.append(rep.morse_index)
        # every nonradial mode must stay stable
        for k, c in rep.per_mode_negative_counts.items():
            if k != 0:
                assert c == 0, (ratio, k, c)
    assert indices == [0, 0, 0, 0, 1, 1, 1, 1]


def test_morse_index_default_truncation(m2):
    rep = morse_index(m2, kmax=5)
    assert rep.R == 2e3
    assert rep.morse_index == 1
    assert rep.per_mode_negative_counts[0] == 1
    assert set(rep.per_mode_negative_counts) == set(range(-5, 6))


def test_morse_index_threaded_matches_serial(m2):
    serial = morse_index(m2, R=12.0, kmax=3, workers=1)
    threaded = morse_index(m2, R=12.0, kmax=3, workers=2)
    assert serial.per_mode_negative_counts == threaded.per_mode_negative_counts
    assert serial.morse_index == threaded.morse_index


def test_morse_index_validation(m2):
    with pytest.raises(DomainError):
        morse_index(m2, R=20.0, kmax=-1)
