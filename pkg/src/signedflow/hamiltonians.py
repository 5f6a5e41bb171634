"""Singular nonlocal operators: quantized and compensated kernel integrals.

Two operators act on a smooth probe phi near x and a far-field v away from x,
against the rescaled kernel V_alpha'' (even, nonnegative, singular at 0):

  quantized:    pv int_{B_rho} E_eps[phi(x+z)-phi(x)] V_alpha''(z) dz
                  + int_{B_rho^c} E_eps[v(x+z)-v(x)] V_alpha''(z) dz

  compensated:  int_{B_rho} (psi(x+z)-psi(x)-psi'(x) z) V_alpha''(z) dz
                  + int_{B_rho^c} (v(x+z)-v(x)) V_alpha''(z) dz

The quantized integrand is piecewise constant between level crossings of the
increment, so the ball integral is evaluated *exactly* as a sum of E-values
times differences of V_alpha' at the crossing radii (int V'' = dV').  The
principal value is realized by pairing z with -z: on the detected core
B_rho0, where the increment stays inside (-eps, eps) with the sign of z, the
paired integrand vanishes identically, so the core contributes exactly 0.

Far fields are piecewise-constant staircases (exact sums) or clamped smooth
probes (crossing sums up to the freeze radius, exact constant tails); both
tails close with V_alpha'(inf) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import ConvergenceError, DegenerateGradientError
from .potentials import Potential, ScalingRegime, l1_norm, lattice_series
from .staircase import Staircase, staircase_identity

__all__ = [
    "TestFunction",
    "HamiltonianParams",
    "ClampedProbe",
    "quantized_nonlocal",
    "compensated_nonlocal",
    "limiting_rhs",
    "rhs_convergence_table",
    "quartic_probe_value",
    "quartic_probe_sweep",
    "kernel_second_moment",
]

_MAX_LEVELS = 8_000_000


@dataclass(frozen=True)
class TestFunction:
    """Smooth probe with derivative evaluators (vectorized callables)."""

    __test__ = False  # not a pytest class, despite the standard math name

    f: callable
    d1: callable
    d2: callable
    d3: callable = None
    order: int = 2

    def check_derivatives(self, xs, tol: float = 1e-6) -> bool:
        """Central finite-difference cross-check of d1 and d2."""
        xs = np.asarray(xs, dtype=float)
        h = 1e-5 * np.maximum(1.0, np.abs(xs))
        fd1 = (self.f(xs + h) - self.f(xs - h)) / (2 * h)
        fd2 = (self.f(xs + h) - 2 * self.f(xs) + self.f(xs - h)) / h ** 2
        ok1 = np.allclose(fd1, self.d1(xs), rtol=tol, atol=tol)
        ok2 = np.allclose(fd2, self.d2(xs), rtol=100 * tol, atol=100 * tol)
        return bool(ok1 and ok2)

    @staticmethod
    def sin() -> "TestFunction":
        return TestFunction(np.sin, np.cos, lambda x: -np.sin(x),
                            lambda x: -np.cos(x), order=3)

    @staticmethod
    def linear(slope=1.0) -> "TestFunction":
        return TestFunction(
            lambda x: slope * np.asarray(x, dtype=float),
            lambda x: slope * np.ones_like(np.asarray(x, dtype=float)),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)), order=4)

    @staticmethod
    def cubic(c3=0.25, c2=0.5, c1=2.0, c0=0.0) -> "TestFunction":
        return TestFunction(
            lambda x: ((c3 * np.asarray(x, dtype=float) + c2) * x + c1) * x + c0,
            lambda x: (3 * c3 * np.asarray(x, dtype=float) + 2 * c2) * x + c1,
            lambda x: 6 * c3 * np.asarray(x, dtype=float) + 2 * c2,
            lambda x: 6 * c3 * np.ones_like(np.asarray(x, dtype=float)),
            order=3)

    @staticmethod
    def quadratic(c2=0.5, c1=0.0, c0=0.0) -> "TestFunction":
        return TestFunction(
            lambda x: (c2 * np.asarray(x, dtype=float) + c1) * x + c0,
            lambda x: 2 * c2 * np.asarray(x, dtype=float) + c1,
            lambda x: 2 * c2 * np.ones_like(np.asarray(x, dtype=float)),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)), order=4)

    @staticmethod
    def shifted_quartic(K: float, gamma: float) -> "TestFunction":
        """z -> K ((z + gamma)^4 - gamma^4); the degenerate-gradient probe."""
        return TestFunction(
            lambda z: K * ((np.asarray(z, dtype=float) + gamma) ** 4 - gamma ** 4),
            lambda z: 4 * K * (np.asarray(z, dtype=float) + gamma) ** 3,
            lambda z: 12 * K * (np.asarray(z, dtype=float) + gamma) ** 2,
            lambda z: 24 * K * (np.asarray(z, dtype=float) + gamma), order=4)


@dataclass(frozen=True)
class HamiltonianParams:
    rho: float
    eps: float
    alpha_eps: float
    quad_tol: float = 1e-9

    def __post_init__(self):
        if min(self.rho, self.eps, self.alpha_eps, self.quad_tol) <= 0:
            raise ValueError("rho, eps, alpha_eps and quad_tol must be positive")


@dataclass(frozen=True)
class ClampedProbe:
    """Far-field slot: probe values inside B_radius(center), frozen outside."""

    probe: TestFunction
    center: float
    radius: float

    def __call__(self, x):
        z = np.clip(np.asarray(x, dtype=float) - self.center,
                    -self.radius, self.radius)
        return self.probe.f(self.center + z)


# ---------------------------------------------------------------------------
# kernel antiderivatives: int V'' = dV', int z V'' = d(z V' - V)
# ---------------------------------------------------------------------------

def _vp(pot: Potential, alpha: float, z):
    """V_alpha'(z) = alpha^2 V'(alpha z), odd in z; vanishes at +-inf."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.zeros_like(z)
    fin = np.isfinite(z)
    out[fin] = alpha ** 2 * pot.deriv(alpha * z[fin], 1)
    return out


def kernel_second_moment(pot: Potential, alpha: float, rho: float,
                         quad_tol: float = 1e-10) -> float:
    """int_{B_rho} z^2 V_alpha''(z) dz = 2 int_0^{alpha rho} y^2 V''(y) dy."""
    val, _ = integrate.quad(lambda y: y ** 2 * pot.deriv(y, 2),
                            0.0, alpha * rho, epsabs=quad_tol, epsrel=1e-10,
                            limit=400)
    if not math.isfinite(val):
        raise ConvergenceError(
            "second kernel moment diverges; x^2 V'' not locally integrable")
    return 2.0 * val


# ---------------------------------------------------------------------------
# monotone pieces and level crossings
# ---------------------------------------------------------------------------

def _scalar(fn, r: float) -> float:
    return float(np.asarray(fn(np.array([r])), dtype=float)[0])


def _critical_radii(dg, lo: float, hi: float, samples: int = 1024):
    """Zeros of dg on (lo, hi) from a sign scan refined by brentq."""
    if hi <= lo:
        return []
    rs = np.linspace(lo, hi, samples)
    vals = np.asarray(dg(rs), dtype=float)
    sign = np.sign(vals)
    out = []
    for k in np.flatnonzero(sign[:-1] * sign[1:] < 0):
        out.append(float(optimize.brentq(lambda r: _scalar(dg, r),
                                         rs[k], rs[k + 1], xtol=1e-13,
                                         maxiter=200)))
    return out


def _bisect_levels(g, zlo, zhi, levels, iters: int = 50):
    """Vectorized bisection for g(z) = level on brackets [zlo, zhi]."""
    lo = zlo.copy()
    hi = zhi.copy()
    flo = np.asarray(g(lo), dtype=float) - levels
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = np.asarray(g(mid), dtype=float) - levels
        west = flo * fm <= 0
        hi = np.where(west, mid, hi)
        lo = np.where(west, lo, mid)
        flo = np.where(west, flo, fm)
    return 0.5 * (lo + hi)


def _piece_crossings(g, a: float, b: float, eps: float, inverse=None):
    """Crossing radii of the levels eps*Z inside a monotone piece [a, b]."""
    ga, gb = _scalar(g, a), _scalar(g, b)
    lo, hi = (ga, gb) if ga <= gb else (gb, ga)
    k_lo = math.floor(lo / eps) + 1
    k_hi = math.ceil(hi / eps) - 1
    if k_hi < k_lo:
        return np.empty(0)
    n_levels = k_hi - k_lo + 1
    if n_levels > _MAX_LEVELS:
        raise ConvergenceError(
            f"level count {n_levels} exceeds the refinement budget; "
            "increase eps or shrink the ball")
    levels = np.arange(k_lo, k_hi + 1, dtype=float) * eps
    if inverse is not None:
        return np.clip(inverse(levels, a, b), a, b)
    m = int(min(max(256, 4 * n_levels), 4_000_000))
    zs = np.linspace(a, b, m)
    gs = np.asarray(g(zs), dtype=float)
    if ga <= gb:
        pos = np.searchsorted(gs, levels)
    else:
        pos = len(zs) - np.searchsorted(gs[::-1], levels, side="right")
    pos = np.clip(pos, 1, m - 1)
    return _bisect_levels(g, zs[pos - 1], zs[pos], levels)


def _side_crossings(g, dg, lo: float, hi: float, eps: float, crit=None,
                    inverse=None):
    """eps*Z crossings of g on (lo, hi) plus interior piece boundaries."""
    if hi <= lo:
        return np.empty(0), []
    if crit is None:
        crit = _critical_radii(dg, lo, hi)
    bounds = [lo] + sorted(c for c in crit if lo < c < hi) + [hi]
    out = [np.empty(0)]
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b > a:
            out.append(_piece_crossings(g, a, b, eps, inverse=inverse))
    return np.concatenate(out), bounds[1:-1]


# ---------------------------------------------------------------------------
# core radius: where the paired principal value vanishes exactly
# ---------------------------------------------------------------------------

def _first_break(g, dg, sgn: float, rho: float, eps: float, crit=None):
    """Largest r <= rho with 0 < sgn*g < eps throughout (0, r).

    Walks the monotone pieces of g; the break is the first return of g to 0
    or the first |g| = eps crossing, whichever comes first.
    """
    if crit is None:
        crit = _critical_radii(dg, 0.0, rho)
    crit = sorted(c for c in crit if 0.0 < c < rho)
    bounds = [0.0] + crit + [rho]
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b <= a:
            continue
        gb = _scalar(g, b)
        if sgn * gb <= 0.0:
            lo = a if a > 0 else b * 1e-12
            try:
                r0 = optimize.brentq(lambda r: _scalar(g, r), lo, b, xtol=1e-15)
            except ValueError:
                r0 = a
            return min(r0, rho), crit
        if abs(gb) >= eps:
            lo = a if a > 0 else b * 1e-15
            if abs(_scalar(g, lo)) - eps < 0:
                r0 = optimize.brentq(lambda r: abs(_scalar(g, r)) - eps,
                                     lo, b, xtol=1e-15)
                return min(r0, rho), crit
            return a, crit
    return rho, crit


def _core_radius(phi: TestFunction, x: float, rho: float, eps: float,
                 crit_right=None, crit_left=None):
    """rho0 with pv over B_rho0 identically zero under z <-> -z pairing."""
    s = _scalar(phi.d1, x)
    if s == 0.0:
        raise DegenerateGradientError("probe gradient vanishes at x")
    sgn = math.copysign(1.0, s)
    f0 = _scalar(phi.f, x)

    def g_right(r):
        return np.asarray(phi.f(x + np.asarray(r)), dtype=float) - f0

    def g_left(r):
        return np.asarray(phi.f(x - np.asarray(r)), dtype=float) - f0

    r_r, crit_r = _first_break(g_right, lambda r: phi.d1(x + np.asarray(r)),
                               sgn, rho, eps, crit=crit_right)
    r_l, crit_l = _first_break(g_left, lambda r: -np.asarray(
        phi.d1(x - np.asarray(r)), dtype=float), -sgn, rho, eps,
        crit=crit_left)
    return min(r_r, r_l), crit_r, crit_l


# ---------------------------------------------------------------------------
# quantized operator
# ---------------------------------------------------------------------------

def _paired_ball(phi: TestFunction, x: float, pot: Potential, rho: float,
                 eps: float, alpha: float, envelope: str,
                 inverse_right=None, inverse_left=None,
                 crit_right=None, crit_left=None):
    """Exact pv integral over B_rho of E_eps[increment] V_alpha''."""
    rho0, crit_r, crit_l = _core_radius(phi, x, rho, eps, crit_right, crit_left)
    if rho0 >= rho:
        return 0.0, rho0
    f0 = _scalar(phi.f, x)

    def g_right(r):
        return np.asarray(phi.f(x + np.asarray(r)), dtype=float) - f0

    def g_left(r):
        return np.asarray(phi.f(x - np.asarray(r)), dtype=float) - f0

    cr_r, bounds_r = _side_crossings(
        g_right, lambda r: phi.d1(x + np.asarray(r)), rho0, rho, eps,
        crit=[c for c in crit_r if rho0 < c < rho], inverse=inverse_right)
    cr_l, bounds_l = _side_crossings(
        g_left, lambda r: -np.asarray(phi.d1(x - np.asarray(r)), dtype=float),
        rho0, rho, eps,
        crit=[c for c in crit_l if rho0 < c < rho], inverse=inverse_left)
    radii = np.concatenate([cr_r, cr_l, np.asarray(bounds_r),
                            np.asarray(bounds_l)])
    radii = radii[(radii > rho0) & (radii < rho)]
    grid = np.unique(np.concatenate([[rho0], np.sort(radii), [rho]]))
    mids = 0.5 * (grid[:-1] + grid[1:])
    e_sum = (staircase_identity(g_right(mids), eps, envelope)
             + staircase_identity(g_left(mids), eps, envelope))
    vp = _vp(pot, alpha, grid)
    # summation by parts: sum e_j (vp_{j+1} - vp_j) differences the E-levels
    # (exact multiples of eps) instead of the large kernel antiderivative,
    # avoiding a cancellation floor when the rescaled kernel is steep
    if len(e_sum) == 0:
        return 0.0, rho0
    pieces = [e_sum[-1] * vp[-1], -e_sum[0] * vp[0]]
    if len(e_sum) > 1:
        de = np.diff(e_sum)
        pieces.extend((-de * vp[1:-1]).tolist())
    return float(math.fsum(pieces)), rho0


def _far_pieces(far, x: float, rho: float, side: int):
    """Half-line decomposition of r -> far(x + side*r) - far(x), r > rho.

    Returns (smooth part or None, staircase bounds, staircase increments):
    the smooth part is (g, dg, r_hi) on (rho, r_hi); the staircase part is a
    list of (r_lo, r_hi, increment) with r_hi possibly inf.
    """
    if isinstance(far, Staircase):
        fx = float(far.eval_right(np.array([x]))[0] if np.ndim(far.eval_right(x)) else far.eval_right(x))
        zj = (far.jumps - x) * side
        inner = np.sort(zj[zj > rho])
        bounds = np.concatenate([[rho], inner, [np.inf]])
        pieces = []
        for a, b in zip(bounds[:-1], bounds[1:]):
            probe = a + 1.0 if not np.isfinite(b) else 0.5 * (a + b)
            val = float(far.eval_right(x + side * probe)) - fx
            pieces.append((a, b, val))
        return None, pieces
    if isinstance(far, ClampedProbe):
        fx = _scalar(far, x)
        freeze = far.center + side * far.radius
        r_hi = side * (freeze - x)

        def g(r):
            return np.asarray(far(x + side * np.asarray(r)), dtype=float) - fx

        def dg(r):
            return side * np.asarray(far.probe.d1(x + side * np.asarray(r)),
                                     dtype=float)

        tail_incr = _scalar(g, max(rho, r_hi) + 1.0)
        pieces = [(max(rho, r_hi), np.inf, tail_incr)]
        if r_hi > rho:
            return (g, dg, r_hi), pieces
        return None, pieces
    raise TypeError(f"unsupported far-field type {type(far).__name__}")


def _tail_quantized(far, x: float, pot: Potential, rho: float, eps: float,
                    alpha: float, envelope: str) -> float:
    total = 0.0
    for side in (+1, -1):
        smooth, pieces = _far_pieces(far, x, rho, side)
        if smooth is not None:
            g, dg, r_hi = smooth
            cr, bnds = _side_crossings(g, dg, rho, r_hi, eps)
            grid = np.unique(np.concatenate(
                [[rho], cr[(cr > rho) & (cr < r_hi)], np.asarray(bnds), [r_hi]]))
            mids = 0.5 * (grid[:-1] + grid[1:])
            e = staircase_identity(g(mids), eps, envelope)
            vp = _vp(pot, alpha, grid)
            total += float(np.sum(e * np.diff(vp)))
        for a, b, incr in pieces:
            e = staircase_identity(incr, eps, envelope)
            dv = _vp(pot, alpha, np.array([b]))[0] - _vp(pot, alpha, np.array([a]))[0]
            total += e * dv
    return total


def quantized_nonlocal(phi: TestFunction, farfield, x: float, pot: Potential,
                       params: HamiltonianParams, envelope: str = "upper",
                       parts: bool = False):
    """Quantized singular operator at resolution eps (exact evaluation).

    Requires phi'(x) != 0.  ``parts=True`` also returns the ball and tail
    contributions and the detected core radius.
    """
    ball, rho0 = _paired_ball(phi, x, pot, params.rho, params.eps,
                              params.alpha_eps, envelope)
    tail = _tail_quantized(farfield, x, pot, params.rho, params.eps,
                           params.alpha_eps, envelope)
    if parts:
        return ball + tail, {"ball": ball, "tail": tail, "rho0": rho0}
    return ball + tail


# ---------------------------------------------------------------------------
# compensated operator
# ---------------------------------------------------------------------------

def _compensated_ball(psi: TestFunction, x: float, pot: Potential, rho: float,
                      alpha: float, quad_tol: float) -> float:
    f0 = _scalar(psi.f, x)
    s0 = _scalar(psi.d1, x)

    def integrand(z):
        return ((_scalar(psi.f, x + z) - f0 - s0 * z)
                * alpha ** 3 * pot.deriv(alpha * abs(z), 2))

    with np.errstate(over="ignore"):
        val, err = integrate.quad(integrand, -rho, rho, points=[0.0],
                                  epsabs=quad_tol, epsrel=1e-9, limit=400)
    if not math.isfinite(val) or err > max(quad_tol, 1e-6 * abs(val) + quad_tol):
        raise ConvergenceError(
            "compensated ball quadrature did not converge; the kernel may "
            "violate local integrability of z^2 V''")
    return val


def _tail_raw(far, x: float, pot: Potential, rho: float, alpha: float,
              quad_tol: float) -> float:
    total = 0.0
    for side in (+1, -1):
        smooth, pieces = _far_pieces(far, x, rho, side)
        if smooth is not None:
            g, _, r_hi = smooth
            val, _ = integrate.quad(
                lambda r: _scalar(g, r) * alpha ** 3 * pot.deriv(alpha * r, 2),
                rho, r_hi, epsabs=quad_tol, epsrel=1e-9, limit=400)
            total += val
        for a, b, incr in pieces:
            dv = _vp(pot, alpha, np.array([b]))[0] - _vp(pot, alpha, np.array([a]))[0]
            total += incr * dv
    return total


def compensated_nonlocal(psi: TestFunction, farfield, x: float,
                         pot: Potential, rho: float, alpha: float,
                         quad_tol: float = 1e-9, parts: bool = False):
    """Taylor-compensated kernel integral (no principal value needed).

    Requires z^2 V''(z) locally integrable; quadrature divergence near 0
    flags a potential violating that assumption.
    """
    ball = _compensated_ball(psi, x, pot, rho, alpha, quad_tol)
    tail = _tail_raw(farfield, x, pot, rho, alpha, quad_tol)
    if parts:
        return ball + tail, {"ball": ball, "tail": tail}
    return ball + tail


# ---------------------------------------------------------------------------
# limiting right-hand sides and their verification
# ---------------------------------------------------------------------------

def limiting_rhs(phi: TestFunction, x: float, m: int, pot: Potential,
                 coefficient: float, quad_tol: float = 1e-9) -> float:
    """Resolution-free limit of the quantized ball integral.

    m = 1: compensated integral over B_1 at alpha = coefficient.
    m = 2: ||V||_L1 * phi''(x).
    m = 3: (beta^3 / |phi'|^3) Psi(beta / phi') * phi''(x), beta = coefficient.
    """
    if m == 1:
        return _compensated_ball(phi, x, pot, 1.0, coefficient, quad_tol)
    d1 = _scalar(phi.d1, x)
    d2 = _scalar(phi.d2, x)
    if m == 2:
        return l1_norm(pot, min(quad_tol, 1e-8)) * d2
    if m == 3:
        if d1 == 0.0:
            raise DegenerateGradientError("m=3 limit needs phi'(x) != 0")
        series = lattice_series(pot, coefficient / d1, tol=quad_tol)
        return coefficient ** 3 / abs(d1) ** 3 * series * d2
    raise ValueError("m must be 1, 2 or 3")


def rhs_convergence_table(phi: TestFunction, x: float, m: int, pot: Potential,
                          regime: ScalingRegime, eps_list,
                          quad_tol: float = 1e-9, rho: float = 1.0):
    """(eps, value, abs error) rows for the quantized operator against its
    limit; the far-field is the probe clamped at the ball edge on both sides
    so the comparison isolates the resolution error."""
    far = ClampedProbe(phi, x, rho)
    coeff = regime.alpha if m == 1 else (regime.beta if m == 3 else 1.0)
    limit = limiting_rhs(phi, x, m, pot, coeff, quad_tol)
    if m == 1:
        limit += _tail_raw(far, x, pot, rho, regime.alpha, quad_tol)
    rows = []
    for eps in eps_list:
        params = HamiltonianParams(rho=rho, eps=float(eps),
                                   alpha_eps=regime.alpha_of_eps(float(eps)),
                                   quad_tol=quad_tol)
        val = quantized_nonlocal(phi, far, x, pot, params)
        rows.append((float(eps), float(val), float(abs(val - limit))))
    return rows, float(limit)


# ---------------------------------------------------------------------------
# degenerate-gradient probe sweep
# ---------------------------------------------------------------------------

def _quartic_inverses(K: float, gamma: float):
    """Closed-form level inversion for K((z+gamma)^4 - gamma^4) per side."""

    def inv_right(levels, a, b):
        mid = 0.5 * (a + b)
        sig = math.copysign(1.0, mid + gamma)
        return -gamma + sig * np.maximum(gamma ** 4 + levels / K, 0.0) ** 0.25

    def inv_left(levels, a, b):
        mid = 0.5 * (a + b)
        sig = math.copysign(1.0, gamma - mid)
        return gamma - sig * np.maximum(gamma ** 4 + levels / K, 0.0) ** 0.25

    return inv_right, inv_left


def quartic_probe_value(pot: Potential, K: float, gamma: float, eps: float,
                        alpha_eps: float, envelope: str = "upper") -> float:
    """gamma^2 * pv int_{B_1} E_eps[K((z+gamma)^4 - gamma^4)] V_alpha'' dz."""
    if gamma == 0.0:
        raise DegenerateGradientError("probe gradient vanishes at gamma = 0")
    phi = TestFunction.shifted_quartic(K, gamma)
    inv_r, inv_l = _quartic_inverses(K, gamma)
    # the increment's only critical offset is z = -gamma
    crit_r = [-gamma] if gamma < 0 else []
    crit_l = [gamma] if gamma > 0 else []
    ball, _ = _paired_ball(phi, 0.0, pot, 1.0, eps, alpha_eps, envelope,
                           inverse_right=inv_r, inverse_left=inv_l,
                           crit_right=crit_r, crit_left=crit_l)
    return gamma ** 2 * ball


def quartic_probe_sweep(pot: Potential, regime: ScalingRegime, K: float,
                        L: float, eps_grid, gamma_grid,
                        quad_tol: float = 1e-9, envelope: str = "upper"):
    """Sweep the degenerate-gradient bound over (eps, gamma).

    Returns (rows, per_eps_max) with rows of (eps, gamma, value); every value
    must be >= -quad_tol and the empirical maxima must stabilize as eps
    shrinks (the bound depends only on the potential, K and L).
    """
    rows = []
    per_eps_max = {}
    for eps in eps_grid:
        alpha_eps = regime.alpha_of_eps(float(eps))
        worst = 0.0
        for gamma in gamma_grid:
            if abs(gamma) > L:
                raise ValueError("gamma grid must stay within [-L, L]")
            val = quartic_probe_value(pot, K, float(gamma), float(eps),
                                      alpha_eps, envelope)
            rows.append((float(eps), float(gamma), float(val)))
            worst = max(worst, val)
        per_eps_max[float(eps)] = worst
    return rows, per_eps_max
