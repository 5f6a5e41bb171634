"""Limit-equation solvers: constants, Barenblatt, comparison, symmetry."""

import math

import numpy as np
import pytest

from signedflow import (GridFunction, ParticleState, cumulative_charge,
                        density_from_primitive, l1_norm, log_potential,
                        simulate, solve_local, solve_nonlocal, sup_distance,
                        wall_potential)
from signedflow.potentials import make_field

WALL = wall_potential()
LOGP = log_potential()


# ---------------------------------------------------------------------------
# closed-form self-similar density (single sign, intermediate scaling)
# ---------------------------------------------------------------------------

def barenblatt(t, x, mass, diff_coeff):
    """Self-similar solution of k_t = D (k^2)_xx with the given mass."""
    c = (3.0 * mass / (4.0 * math.sqrt(12.0))) ** (2.0 / 3.0)
    s = (diff_coeff * t) ** (1.0 / 3.0)
    xi = np.asarray(x, dtype=float) / s
    return np.maximum(c - xi ** 2 / 12.0, 0.0) / s


def barenblatt_primitive(t, x, mass, diff_coeff):
    c = (3.0 * mass / (4.0 * math.sqrt(12.0))) ** (2.0 / 3.0)
    xi0 = math.sqrt(12.0 * c)
    s = (diff_coeff * t) ** (1.0 / 3.0)
    xi = np.clip(np.asarray(x, dtype=float) / s, -xi0, xi0)
    return c * (xi + xi0) - (xi ** 3 + xi0 ** 3) / 36.0


@pytest.fixture(scope="module")
def wall_l1():
    return l1_norm(WALL, 1e-10)


# ---------------------------------------------------------------------------
# constants and trivial solutions
# ---------------------------------------------------------------------------

def test_constants_preserved_local():
    u0 = GridFunction(-1.0, 0.01, np.full(201, 0.7), 0.7, 0.7)
    out, info = solve_local(u0, 2, WALL, 1.0, None, 0.05)
    assert np.array_equal(out.values, u0.values)
    assert info.max_principle_violation == 0.0


def test_constants_preserved_nonlocal():
    u0 = GridFunction(-1.0, 0.01, np.full(201, -0.3), -0.3, -0.3)
    out, _ = solve_nonlocal(u0, LOGP, 1.0, None, 0.05)
    assert np.array_equal(out.values, u0.values)


def test_constant_with_transport_field():
    # U' = 1 everywhere, but |u_x| = 0 kills the transport
    fld = make_field({"kind": "tilt", "c": 1.0})
    u0 = GridFunction(-1.0, 0.01, np.full(201, 0.4), 0.4, 0.4)
    out, _ = solve_local(u0, 2, WALL, 1.0, fld, 0.05)
    assert np.array_equal(out.values, u0.values)


# ---------------------------------------------------------------------------
# Barenblatt oracle (smaller grid here; the 2048-node run is acceptance)
# ---------------------------------------------------------------------------

def test_barenblatt_m2(wall_l1):
    D = wall_l1 / 2.0
    L, N, t0 = 3.2, 512, 1.0
    xs = np.linspace(-L, L, N)
    dx = xs[1] - xs[0]
    u0 = GridFunction(-L, dx, barenblatt_primitive(t0, xs, 1.0, D), 0.0, 1.0)
    out, info = solve_local(u0, 2, WALL, 1.0, None, 0.5)
    kap = density_from_primitive(out)
    exact = barenblatt(t0 + 0.5, xs, 1.0, D)
    l1e = np.sum(np.abs(kap.values - exact)) / np.sum(np.abs(exact))
    assert l1e < 0.02
    assert info.max_principle_violation == 0.0


def test_density_from_primitive_cases(wall_l1):
    # constant
    u = GridFunction(0.0, 0.1, np.full(11, 2.0), 2.0, 2.0)
    assert np.allclose(density_from_primitive(u).values, 0.0)
    # ramp of slope 3 on [0, 1]
    xs = np.linspace(-1, 2, 301)
    vals = np.clip(xs, 0.0, 1.0) * 3.0
    u = GridFunction(-1.0, xs[1] - xs[0], vals, 0.0, 3.0)
    k = density_from_primitive(u)
    inner = (xs > 0.05) & (xs < 0.95)
    assert np.allclose(k.values[inner], 3.0)
    # integral identity: trapezoid of the density recovers the rise
    assert np.trapezoid(k.values, xs) == pytest.approx(3.0, abs=(xs[1] - xs[0]) ** 2 * 100)
    # Barenblatt primitive differentiates back to the profile in L1
    D = wall_l1 / 2.0
    xs = np.linspace(-3, 3, 1001)
    u = GridFunction(-3.0, xs[1] - xs[0],
                     barenblatt_primitive(1.0, xs, 1.0, D), 0.0, 1.0)
    k = density_from_primitive(u)
    exact = barenblatt(1.0, xs, 1.0, D)
    assert np.sum(np.abs(k.values - exact)) * (xs[1] - xs[0]) <= 2 * (xs[1] - xs[0])


# ---------------------------------------------------------------------------
# scheme structure
# ---------------------------------------------------------------------------

def test_max_principle_both_solvers(wall_l1):
    rng = np.random.default_rng(0)
    xs = np.linspace(-2, 2, 257)
    dx = xs[1] - xs[0]
    vals = np.cumsum(rng.uniform(-1, 1, 257)) * dx
    vals -= vals[0]
    vals *= 0.5 / max(1e-9, np.max(np.abs(vals)))
    vals[-1] = vals[-2]
    u0 = GridFunction(-2.0, dx, vals, vals[0], vals[-1])
    _, info_a = solve_local(u0, 2, WALL, 1.0, None, 0.05)
    assert info_a.max_principle_violation <= 1e-12
    _, info_b = solve_nonlocal(u0, LOGP, 1.0, None, 0.02)
    assert info_b.max_principle_violation <= 1e-12


def test_discrete_comparison_principle():
    # ordered data stay ordered under the shared-step monotone scheme
    rng = np.random.default_rng(42)
    xs = np.linspace(-2, 2, 129)
    dx = xs[1] - xs[0]
    for trial in range(5):
        base = np.tanh(xs) * 0.4
        bump = rng.uniform(0.0, 0.2) * np.exp(-xs ** 2 / rng.uniform(0.3, 1.0))
        lo_v = base - bump
        hi_v = base + bump
        lo_v[0] = lo_v[1]; lo_v[-1] = lo_v[-2]
        hi_v[0] = hi_v[1]; hi_v[-1] = hi_v[-2]
        u_lo = GridFunction(-2.0, dx, lo_v, lo_v[0], lo_v[-1])
        u_hi = GridFunction(-2.0, dx, hi_v, hi_v[0], hi_v[-1])
        a, _ = solve_local(u_lo, 2, WALL, 1.0, None, 0.02)
        b, _ = solve_local(u_hi, 2, WALL, 1.0, None, 0.02)
        assert np.all(a.values <= b.values + 1e-10)


def test_grid_refinement_first_order(wall_l1):
    D = wall_l1 / 2.0
    L, t0 = 3.2, 1.0

    def run(n):
        xs = np.linspace(-L, L, n)
        dx = xs[1] - xs[0]
        u0 = GridFunction(-L, dx, barenblatt_primitive(t0, xs, 1.0, D), 0.0, 1.0)
        out, _ = solve_local(u0, 2, WALL, 1.0, None, 0.25)
        return xs, out.values

    xa, ua = run(256)
    xb, ub = run(512)
    xc, uc = run(1024)
    ref = np.interp(xa, xc, uc)
    ea = float(np.max(np.abs(ua - ref)))
    eb = float(np.max(np.abs(np.interp(xa, xb, ub) - ref)))
    assert ea / eb >= 1.5


def test_flux_form_mass_conservation(wall_l1):
    # over the single-sign region the density mass changes only through the
    # endpoint fluxes, which vanish where the density vanishes
    D = wall_l1 / 2.0
    xs = np.linspace(-3.2, 3.2, 513)
    dx = xs[1] - xs[0]
    u0 = GridFunction(-3.2, dx, barenblatt_primitive(1.0, xs, 1.0, D), 0.0, 1.0)
    out, _ = solve_local(u0, 2, WALL, 1.0, None, 0.3)
    # total density mass = far_right - far_left exactly (telescoping fluxes)
    assert out.values[-1] - out.values[0] == pytest.approx(1.0, abs=1e-12)
    assert float(np.min(np.diff(out.values))) >= -1e-12  # stays single-sign
    assert out.check_farfield()


def test_one_step_flux_identity(wall_l1):
    # exact discrete identity: the staggered-density mass over an interior
    # window changes only by the endpoint fluxes G(u_x), with G the solver's
    # own mobility antiderivative
    from signedflow import MobilityTable, ScalingRegime
    D = wall_l1 / 2.0
    xs = np.linspace(-3.2, 3.2, 257)
    dx = xs[1] - xs[0]
    v0 = barenblatt_primitive(1.0, xs, 1.0, D)
    u0 = GridFunction(-3.2, dx, v0, 0.0, 1.0)
    d0 = np.diff(v0) / dx
    p_max = max(2.0 * float(np.max(np.abs(d0))), 1.0)
    table = MobilityTable.build(WALL, ScalingRegime(m=2), p_max, tol=1e-8)
    g0 = table.g_of(d0)
    fmax = float(np.max(table.f_of(d0)))
    dt = 0.9 * 0.45 * dx ** 2 / (2 * fmax)  # strictly below one CFL step
    out, info = solve_local(u0, 2, WALL, 1.0, None, dt, cfl_safety=0.45)
    assert info.steps == 1
    d1 = np.diff(out.values) / dx
    a, b = 40, 200
    mass_change = float(np.sum(d1[a:b] - d0[a:b])) * dx
    flux_change = info.dt_min / dx * ((g0[b] - g0[b - 1]) - (g0[a] - g0[a - 1]))
    assert mass_change == pytest.approx(flux_change, abs=1e-14)


def test_antisymmetry_preserved_nonlocal():
    xs = np.linspace(-2, 2, 201)
    dx = xs[1] - xs[0]
    vals = 0.4 * np.tanh(3 * xs)
    vals[0] = vals[1]; vals[-1] = vals[-2]
    vals = 0.5 * (vals - vals[::-1])  # exactly antisymmetric
    u0 = GridFunction(-2.0, dx, vals, vals[0], vals[-1])
    out, _ = solve_nonlocal(u0, LOGP, 1.0, None, 0.05)
    assert np.max(np.abs(out.values + out.values[::-1])) <= 1e-8


def test_m3_local_solver_runs(wall_l1):
    xs = np.linspace(-2, 2, 257)
    dx = xs[1] - xs[0]
    vals = 0.5 * (1 + np.tanh(2 * xs)) * 0.6
    vals[0] = vals[1]; vals[-1] = vals[-2]
    u0 = GridFunction(-2.0, dx, vals, vals[0], vals[-1])
    out, info = solve_local(u0, 3, WALL, 1.0, None, 0.05)
    assert info.max_principle_violation <= 1e-12
    assert np.all(np.isfinite(out.values))


# ---------------------------------------------------------------------------
# cross-validation against the particle system
# ---------------------------------------------------------------------------

def test_nonlocal_matches_particles_single_sign():
    def bump(x):
        return np.where(np.abs(x) < 1, 15 / 16 * (1 - x ** 2) ** 2, 0.0)
    xf = np.linspace(-1, 1, 20001)
    v = bump(xf)
    cdf = np.concatenate([[0], np.cumsum((v[1:] + v[:-1]) / 2 * np.diff(xf))])
    cdf /= cdf[-1]

    n = 400
    x0 = np.interp((np.arange(n) + 0.5) / n, cdf, xf)
    st0 = ParticleState(0.0, x0, np.ones(n, dtype=int))
    res = simulate(st0, LOGP, 1.0, None, 0.2, t_eval=[0.2])

    L, N = 3.0, 512
    xs = np.linspace(-L, L, N)
    dx = xs[1] - xs[0]
    u0 = GridFunction(-L, dx, np.interp(xs, xf, cdf, left=0, right=1), 0.0, 1.0)
    out, _ = solve_nonlocal(u0, LOGP, 1.0, None, 0.2, rho=0.5)
    d = sup_distance(cumulative_charge(res.snapshots[0]), out, (-2.5, 2.5))
    assert d <= 0.05
