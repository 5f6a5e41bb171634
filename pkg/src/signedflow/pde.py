"""Monotone explicit schemes for the integrated limit equations.

Local form (intermediate and lattice scalings):

    u_t = f_m(u_x) u_xx + U'(x) |u_x|,   f_m >= 0, f_m(0) = 0.

The diffusion is advanced in flux form u_t = (G(u_x))_x with G' = f_m, which
is pointwise identical to f_m(u_x) u_xx, provably monotone under the CFL
bound dt <= dx^2 / (2 max f_m), and conserves the density u_x over intervals
up to the endpoint fluxes.

Nonlocal form (bounded scaling):

    u_t = (M[u] + U'(x)) |u_x|,

where M[u](x) is the compensated kernel integral with the local quadratic
interpolant of u in the ball slot (contributing u_xx/2 times the kernel's
second moment) and the raw grid values outside.  |u_x| is upwinded on the
sign of the frozen velocity (Godunov), so constants are preserved and the
discrete maximum principle holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import ConvergenceError
from .potentials import ExternalField, Potential, ScalingRegime, l1_norm, mobility
from .hamiltonians import kernel_second_moment

__all__ = ["GridFunction", "solve_local", "solve_nonlocal",
           "density_from_primitive", "MobilityTable"]


@dataclass(frozen=True)
class GridFunction:
    """Uniform-grid function with constant far fields outside the grid."""

    x0: float
    dx: float
    values: np.ndarray
    far_left: float
    far_right: float

    def __post_init__(self):
        object.__setattr__(self, "values",
                           np.asarray(self.values, dtype=float).copy())
        if self.dx <= 0:
            raise ValueError("dx must be positive")

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.values,
                         left=self.far_left, right=self.far_right)

    def candidate_points(self, lo: float, hi: float) -> np.ndarray:
        xs = self.xs
        return xs[(xs >= lo) & (xs <= hi)]

    def check_farfield(self, tol: float = 1e-12) -> bool:
        return (abs(self.values[0] - self.far_left) <= tol
                and abs(self.values[-1] - self.far_right) <= tol)

    def to_csv(self) -> str:
        rows = ["x,u"]
        rows += [f"{x!r},{v!r}" for x, v in zip(self.xs, self.values)]
        return "\n".join(rows)


def density_from_primitive(u: GridFunction) -> GridFunction:
    """Central-difference derivative; one-sided at the endpoints.

    The trapezoid integral of the result recovers far_right - far_left up to
    O(dx^2).
    """
    v = u.values
    k = np.empty_like(v)
    k[1:-1] = (v[2:] - v[:-2]) / (2 * u.dx)
    k[0] = (v[1] - v[0]) / u.dx
    k[-1] = (v[-1] - v[-2]) / u.dx
    return GridFunction(u.x0, u.dx, k, 0.0, 0.0)


# ---------------------------------------------------------------------------
# mobility tables (flux form needs the antiderivative of f_m)
# ---------------------------------------------------------------------------

@dataclass
class MobilityTable:
    """Sampled mobility f_m and its antiderivative G on [-p_max, p_max]."""

    ps: np.ndarray
    f: np.ndarray
    g: np.ndarray

    @staticmethod
    def build(pot: Potential, regime: ScalingRegime, p_max: float,
              num: int = 2049, tol: float = 1e-8) -> "MobilityTable":
        if regime.m == 2:
            c = l1_norm(pot, tol)
            ps = np.linspace(-p_max, p_max, num)
            return MobilityTable(ps, c * np.abs(ps), 0.5 * c * ps * np.abs(ps))
        # m = 3: sample on the half line and extend by evenness of f_3
        half = np.linspace(0.0, p_max, (num + 1) // 2)
        fh = np.array([mobility(pot, regime, float(p), tol) for p in half])
        gh = np.concatenate([[0.0], np.cumsum(0.5 * (fh[1:] + fh[:-1])
                                              * np.diff(half))])
        ps = np.concatenate([-half[::-1][:-1], half])
        f = np.concatenate([fh[::-1][:-1], fh])
        g = np.concatenate([-gh[::-1][:-1], gh])
        return MobilityTable(ps, f, g)

    def f_of(self, p):
        return np.interp(p, self.ps, self.f)

    def g_of(self, p):
        return np.interp(p, self.ps, self.g)

    @property
    def p_max(self) -> float:
        return float(self.ps[-1])


# ---------------------------------------------------------------------------
# local solver (flux form + upwinded transport)
# ---------------------------------------------------------------------------

def _upwind_transport(c, dm, dp):
    """Godunov flux for u_t = c |u_x| from one-sided differences dm, dp."""
    zero = np.zeros_like(dm)
    pos = np.maximum(np.maximum(-dm, dp), zero)   # information moves inward
    neg = np.maximum(np.maximum(dm, -dp), zero)   # slopes that erode extrema
    return np.where(c >= 0, c * pos, c * neg)


@dataclass
class SolveInfo:
    steps: int = 0
    dt_min: float = math.inf
    max_principle_violation: float = 0.0
    snapshots: list = dc_field(default_factory=list)


def solve_local(u0: GridFunction, m: int, pot: Potential, beta: float,
                field: ExternalField | None, t_end: float,
                cfl_safety: float = 0.45, mobility_tol: float = 1e-8,
                t_eval=None, overflow_guard: float = 1e12):
    """Advance u_t = f_m(u_x) u_xx + U'|u_x| to t_end (m = 2 or 3).

    Returns (GridFunction, SolveInfo); SolveInfo.snapshots holds (t, values)
    pairs at the requested times.
    """
    if m not in (2, 3):
        raise ValueError("local solver covers m = 2 and m = 3")
    regime = ScalingRegime(m=m, beta=beta)
    u = u0.values.copy()
    dx = u0.dx
    n = len(u)
    xs = u0.xs
    uprime = np.zeros(n) if field is None else np.asarray(
        field.uprime(xs), dtype=float)
    max_up = float(np.max(np.abs(uprime)))

    slopes0 = np.abs(np.diff(u)) / dx
    p_max = max(2.0 * float(np.max(slopes0, initial=0.0)), 1.0)
    table = MobilityTable.build(pot, regime, p_max, tol=mobility_tol)

    info = SolveInfo()
    eval_queue = sorted(float(tv) for tv in (t_eval if t_eval is not None else []))
    lo0, hi0 = float(np.min(u)), float(np.max(u))
    t = 0.0
    while t < t_end - 1e-300:
        d = np.diff(u) / dx
        if float(np.max(np.abs(d), initial=0.0)) > table.p_max:
            table = MobilityTable.build(pot, regime,
                                        2.0 * float(np.max(np.abs(d))),
                                        tol=mobility_tol)
        fvals = table.f_of(d)
        fmax = float(np.max(fvals, initial=0.0))
        if fmax > overflow_guard:
            raise ConvergenceError("mobility exceeded the overflow guard")
        dt_diff = dx ** 2 / (2.0 * fmax) if fmax > 0 else math.inf
        dt_adv = dx / max_up if max_up > 0 else math.inf
        dt = cfl_safety * min(dt_diff, dt_adv)
        dt = min(dt, t_end - t)
        if eval_queue:
            dt = min(dt, eval_queue[0] - t)
        dt = max(dt, 1e-15)

        g = table.g_of(d)
        unew = u.copy()
        unew[1:-1] += dt / dx * (g[1:] - g[:-1])
        if max_up > 0:
            dm = d[:-1]
            dp = d[1:]
            unew[1:-1] += dt * _upwind_transport(uprime[1:-1], dm, dp)
        u = unew
        t += dt
        info.steps += 1
        info.dt_min = min(info.dt_min, dt)
        over = max(float(np.max(u)) - hi0, lo0 - float(np.min(u)), 0.0)
        info.max_principle_violation = max(info.max_principle_violation, over)
        while eval_queue and t >= eval_queue[0] - 1e-12:
            info.snapshots.append((eval_queue.pop(0), u.copy()))

    out = GridFunction(u0.x0, dx, u, u0.far_left, u0.far_right)
    return out, info


# ---------------------------------------------------------------------------
# nonlocal solver
# ---------------------------------------------------------------------------

def _farfield_matrices(pot: Potential, alpha: float, xs: np.ndarray,
                       dx: float, k_off: int):
    """Per (node, segment) closed-form integrals over the annulus.

    For segment j = [x_j, x_{j+1}] and node i, with z measured from x_i,
    int (c + s z) V_alpha''(z) dz = c dVp + s dW over the segment, where
    Vp = V_alpha' (odd) and W(z) = z V_alpha'(z) - V_alpha(z) (even).
    """
    n = len(xs)
    j = np.arange(n - 1)
    i = np.arange(n)
    zl = dx * (j[None, :] - i[:, None])          # segment left offset
    zr = zl + dx
    # annulus: segments fully beyond the ball radius k_off*dx
    outside = (j[None, :] >= i[:, None] + k_off) | \
              (j[None, :] + 1 <= i[:, None] - k_off)

    def vp(z):
        out = np.zeros_like(z)
        mask = z != 0
        out[mask] = alpha ** 2 * pot.deriv(alpha * z[mask], 1)
        return out

    def w(z):
        out = np.zeros_like(z)
        mask = z != 0
        za = z[mask]
        out[mask] = za * alpha ** 2 * pot.deriv(alpha * za, 1) \
            - alpha * pot.deriv(alpha * za, 0)
        return out

    dvp = np.where(outside, vp(zr) - vp(zl), 0.0)
    dw = np.where(outside, w(zr) - w(zl), 0.0)
    return dvp, dw, zl


def solve_nonlocal(u0: GridFunction, pot: Potential, alpha: float,
                   field: ExternalField | None, t_end: float,
                   rho: float = 0.5, cfl_safety: float = 0.45,
                   quad_tol: float = 1e-9, t_eval=None,
                   velocity_guard: float = 1e8):
    """Advance u_t = (M[u] + U') |u_x| to t_end.

    The ball radius snaps to a whole number of cells (at least 2).  Velocity
    overflow raises with a grid-refinement hint.
    """
    u = u0.values.copy()
    dx = u0.dx
    n = len(u)
    xs = u0.xs
    k_off = max(2, int(round(rho / dx)))
    rho_eff = k_off * dx
    i2 = kernel_second_moment(pot, alpha, rho_eff, quad_tol)
    dvp, dw, _ = _farfield_matrices(pot, alpha, xs, dx, k_off)
    row_dvp = dvp.sum(axis=1)
    xseg = xs[:-1]
    cmat = (xseg[None, :] - xs[:, None]) * dvp
    dw_minus_c = dw - cmat

    # constant tails beyond the grid (or beyond the ball for edge nodes)
    r_left = np.maximum(rho_eff, xs - xs[0])
    r_right = np.maximum(rho_eff, xs[-1] - xs)
    vp_left = np.abs(alpha ** 2 * pot.deriv(alpha * r_left, 1))
    vp_right = np.abs(alpha ** 2 * pot.deriv(alpha * r_right, 1))

    uprime = np.zeros(n) if field is None else np.asarray(
        field.uprime(xs), dtype=float)

    info = SolveInfo()
    eval_queue = sorted(float(tv) for tv in (t_eval if t_eval is not None else []))
    lo0, hi0 = float(np.min(u)), float(np.max(u))
    t = 0.0
    while t < t_end - 1e-300:
        s = np.diff(u) / dx
        uxx = np.zeros(n)
        uxx[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / dx ** 2
        far = (dvp * u[:-1][None, :]).sum(axis=1) - u * row_dvp \
            + (dw_minus_c * s[None, :]).sum(axis=1)
        far += (u0.far_left - u) * vp_left + (u0.far_right - u) * vp_right
        vel = 0.5 * i2 * uxx + far + uprime
        vmax = float(np.max(np.abs(vel)))
        if vmax > velocity_guard:
            raise ConvergenceError(
                "velocity overflow near a gradient blowup; refine dx")
        ux_max = float(np.max(np.abs(s), initial=0.0))
        dt_adv = dx / vmax if vmax > 0 else math.inf
        dt_diff = dx ** 2 / (i2 * ux_max) if i2 * ux_max > 0 else math.inf
        dt = cfl_safety * min(dt_adv, dt_diff)
        dt = min(dt, t_end - t)
        if eval_queue:
            dt = min(dt, eval_queue[0] - t)
        dt = max(dt, 1e-15)

        unew = u.copy()
        dm = s[:-1]
        dp = s[1:]
        unew[1:-1] += dt * _upwind_transport(vel[1:-1], dm, dp)
        u = unew
        t += dt
        info.steps += 1
        info.dt_min = min(info.dt_min, dt)
        over = max(float(np.max(u)) - hi0, lo0 - float(np.min(u)), 0.0)
        info.max_principle_violation = max(info.max_principle_violation, over)
        while eval_queue and t >= eval_queue[0] - 1e-12:
            info.snapshots.append((eval_queue.pop(0), u.copy()))

    out = GridFunction(u0.x0, dx, u, u0.far_left, u0.far_right)
    return out, info
