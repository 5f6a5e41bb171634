"""Experiment orchestration: configs, convergence sweeps, exponent fits and
the quartic-well envelope construction.

Particle initial data comes from a signed density via quantile placement:
each sign s gets round(n * mass_s) particles at the (i - 1/2)/n_s quantiles
of its normalized component, interleaved by position, which makes the
cumulative charge converge uniformly to the density's primitive.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .dynamics import IntegratorOptions, ParticleState, simulate
from .errors import DataError
from .pde import GridFunction, solve_local, solve_nonlocal
from .potentials import (ScalingRegime, audit_assumptions, make_field,
                         make_potential)
from .staircase import cumulative_charge, sup_distance

__all__ = [
    "ExperimentConfig",
    "SignedDensity",
    "WellEnvelope",
    "quartic_envelope",
    "quantile_particles",
    "run_convergence",
    "ExponentFit",
    "fit_exponent_from_series",
    "fit_collision_exponent",
]


# ---------------------------------------------------------------------------
# signed densities and particle placement
# ---------------------------------------------------------------------------

def _bump(x):
    """Smooth compactly supported unit-mass bump on [-1, 1]."""
    return np.where(np.abs(x) < 1.0, 15.0 / 16.0 * (1.0 - x ** 2) ** 2, 0.0)


@dataclass(frozen=True)
class SignedDensity:
    """Sum of signed bump components (sign, mass, center, width)."""

    components: tuple

    @staticmethod
    def from_spec(spec) -> "SignedDensity":
        comps = []
        for c in spec:
            s = int(c["sign"])
            if s not in (-1, 1):
                raise DataError("component sign must be +-1")
            comps.append((s, float(c["mass"]), float(c["center"]),
                          float(c.get("width", 1.0))))
        return SignedDensity(tuple(comps))

    def mass(self, sign: int) -> float:
        return sum(m for s, m, _, _ in self.components if s == sign)

    def part(self, sign: int, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for s, m, c, w in self.components:
            if s == sign:
                out += m / w * _bump((x - c) / w)
        return out

    def __call__(self, x):
        return self.part(1, x) - self.part(-1, x)

    def support(self):
        lo = min(c - w for _, _, c, w in self.components)
        hi = max(c + w for _, _, c, w in self.components)
        return lo, hi

    def primitive(self, x):
        """int_-inf^x of the signed density, by fine-grid quadrature."""
        lo, hi = self.support()
        xf = np.linspace(lo, hi, 80001)
        v = self(xf)
        cum = np.concatenate([[0.0],
                              np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(xf))])
        return np.interp(np.asarray(x, dtype=float), xf, cum,
                         left=0.0, right=float(cum[-1]))


def quantile_particles(density: SignedDensity, n: int) -> ParticleState:
    """Place round(n * mass) particles per sign at mid-quantiles, interleaved."""
    xs_all, bs_all = [], []
    for sign in (1, -1):
        mass = density.mass(sign)
        n_s = int(round(n * mass))
        if n_s == 0:
            continue
        lo, hi = density.support()
        xf = np.linspace(lo, hi, 80001)
        v = density.part(sign, xf)
        cum = np.concatenate([[0.0],
                              np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(xf))])
        q = (np.arange(n_s) + 0.5) / n_s * cum[-1]
        xs_all.append(np.interp(q, cum, xf))
        bs_all.append(sign * np.ones(n_s, dtype=int))
    xs = np.concatenate(xs_all)
    bs = np.concatenate(bs_all)
    order = np.argsort(xs, kind="stable")
    xs, bs = xs[order], bs[order]
    # opposite-sign components may place both charges on the same quantile
    # point; spread coincident positions by a deterministic hair (they
    # annihilate immediately, as the cancelling densities do)
    lo, hi = density.support()
    sep = 1e-7 * (hi - lo)
    k = 0
    while k < len(xs) - 1:
        j = k
        while j < len(xs) - 1 and xs[j + 1] - xs[k] < sep * (j + 1 - k):
            j += 1
        if j > k:
            xs[k:j + 1] = xs[k] + sep * np.arange(j + 1 - k)
            k = j
        k += 1
    st = ParticleState(0.0, xs, bs)
    st.validate()
    return st


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    potential: dict
    regime: dict
    field: dict | None = None
    initial: dict | None = None
    n_list: list = dc_field(default_factory=lambda: [25, 50, 100, 200])
    t_end: float = 0.2
    snapshot_times: list = dc_field(default_factory=lambda: [0.1, 0.2])
    grid: dict = dc_field(default_factory=lambda: {
        "half_width": 2.5, "nodes": 512, "rho": 0.5})
    tolerances: dict = dc_field(default_factory=lambda: {
        "conv_tol": 0.05, "slack": 1.1, "rk_tol": 1e-9, "quad_tol": 1e-9})
    window_margin_cells: int = 3
    seed: int = 0

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        known = {f for f in ExperimentConfig.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise DataError(f"unknown config keys: {sorted(extra)}")
        cfg = ExperimentConfig(**d)
        cfg.validate()
        return cfg

    @staticmethod
    def from_json(path) -> "ExperimentConfig":
        with open(path) as fh:
            return ExperimentConfig.from_dict(json.load(fh))

    def validate(self):
        if "kind" not in self.potential:
            raise DataError("potential spec needs a 'kind'")
        if self.regime.get("m") not in (1, 2, 3):
            raise DataError("regime m must be 1, 2 or 3")
        for key, val in self.tolerances.items():
            if val <= 0:
                raise DataError(f"tolerance '{key}' must be positive")
        if self.t_end <= 0:
            raise DataError("t_end must be positive")
        if any(t > self.t_end for t in self.snapshot_times):
            raise DataError("snapshot times must not exceed t_end")

    def config_hash(self) -> str:
        blob = json.dumps(self.__dict__, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def build(self):
        pot = make_potential(self.potential)
        reg = ScalingRegime(m=self.regime["m"],
                            alpha=self.regime.get("alpha", 1.0),
                            beta=self.regime.get("beta", 1.0))
        fld = make_field(self.field)
        return pot, reg, fld

    def density(self) -> SignedDensity:
        if self.initial is None or self.initial.get("kind") != "density":
            raise DataError("config has no density-type initial data")
        return SignedDensity.from_spec(self.initial["components"])

    def particles(self) -> ParticleState:
        if self.initial is None:
            raise DataError("config has no initial data")
        if self.initial.get("kind") == "particles":
            return ParticleState(0.0, np.asarray(self.initial["x"], dtype=float),
                                 np.asarray(self.initial["b"], dtype=int))
        raise DataError("initial data is not an explicit particle list")


# ---------------------------------------------------------------------------
# quartic-well envelope
# ---------------------------------------------------------------------------

@dataclass
class WellEnvelope:
    """Envelope of translated quartics majorizing sampled data."""

    K: float
    xs: np.ndarray
    phi: np.ndarray
    env: np.ndarray
    touched: np.ndarray        # env meets phi at these samples
    min_feasible_K: float | None = None

    @property
    def feasible(self) -> bool:
        return bool(np.all(self.touched))

    def check_well_property(self, tol: float = 1e-9) -> bool:
        """env(xb + x) - env(xb) <= K((x - x0)^4 - x0^4) with
        x0^3 = -env'(xb) / (4K), sampled over the grid."""
        dx = self.xs[1] - self.xs[0]
        dphi = np.gradient(self.env, dx)
        for k in range(2, len(self.xs) - 2, max(1, len(self.xs) // 64)):
            x0 = np.cbrt(-dphi[k] / (4.0 * self.K))
            lhs = self.env - self.env[k]
            rhs = self.K * (((self.xs - self.xs[k]) - x0) ** 4 - x0 ** 4)
            if np.any(lhs > rhs + tol + 4.0 * self.K * np.abs(x0) ** 3 * dx):
                return False
        return True


def _quartic_env_values(xs, phi, K):
    # c(y0) = max_z (phi(z) - K (z - y0)^4); env(x) = min_y0 K(x-y0)^4 + c(y0).
    # Candidate centers extend past the window: a touch at slope p needs the
    # center offset (|p| / 4K)^(1/3) beyond the touch point.
    dx = xs[1] - xs[0]
    slope_max = float(np.max(np.abs(np.diff(phi)))) / dx
    pad = 1.5 * (slope_max / (4.0 * K)) ** (1.0 / 3.0) + 2.0 * dx
    n_pad = int(np.ceil(pad / dx))
    left = xs[0] - dx * np.arange(n_pad, 0, -1)
    right = xs[-1] + dx * np.arange(1, n_pad + 1)
    y0 = np.concatenate([left, xs, right])[:, None]
    c = np.max(phi[None, :] - K * (xs[None, :] - y0) ** 4, axis=1)
    env = np.min(K * (xs[None, :] - y0) ** 4 + c[:, None], axis=0)
    return env


def quartic_envelope(xs, phi, K: float, touch_tol: float = 1e-8,
                     k_hi: float = 1e8) -> WellEnvelope:
    """Pointwise infimum of translated quartics K(x - y0)^4 + c majorizing
    the samples; the result has quartic wells with constant K by construction.

    Where the envelope cannot touch (curvature spike exceeding what K can
    wrap), the minimal feasible K on this grid is bisected and reported.
    """
    xs = np.asarray(xs, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if len(xs) != len(phi) or len(xs) < 8:
        raise DataError("need matching sample arrays of length >= 8")
    if len(xs) > 4096:
        raise DataError("grid too large for the dense envelope sweep")
    env = _quartic_env_values(xs, phi, K)
    scale = max(1.0, float(np.max(np.abs(phi))))
    touched = env <= phi + touch_tol * scale
    min_k = None
    if not np.all(touched):
        lo, hi = K, K
        while hi < k_hi:
            hi *= 4.0
            e = _quartic_env_values(xs, phi, hi)
            if np.all(e <= phi + touch_tol * scale):
                break
        else:
            raise DataError("no feasible K below the bisection cap")
        for _ in range(48):
            mid = math.sqrt(lo * hi)
            e = _quartic_env_values(xs, phi, mid)
            if np.all(e <= phi + touch_tol * scale):
                hi = mid
            else:
                lo = mid
            if hi / lo < 1.001:
                break
        min_k = hi
    return WellEnvelope(K, xs, phi, env, touched, min_k)


# ---------------------------------------------------------------------------
# convergence experiment
# ---------------------------------------------------------------------------

def run_convergence(cfg: ExperimentConfig, progress=None) -> dict:
    """Simulate each n, solve the limit equation once, and compare the
    cumulative charge staircases with the grid solution in sup norm.

    The report contains (n, t, distance) rows and pass/fail flags:
    distances must be nonincreasing in n up to the configured slack, with
    the final distance below conv_tol.
    """
    pot, reg, fld = cfg.build()
    dens = cfg.density()
    tol = cfg.tolerances
    half = float(cfg.grid["half_width"])
    nodes = int(cfg.grid["nodes"])
    xs = np.linspace(-half, half, nodes)
    dx = xs[1] - xs[0]
    u0 = GridFunction(-half, dx, dens.primitive(xs),
                      0.0, float(dens.primitive(np.array([half + 1.0]))[0]))
    field_or_none = None if (cfg.field is None or cfg.field.get("kind", "none") == "none") else fld

    if reg.m == 1:
        _, info = solve_nonlocal(u0, pot, reg.alpha, field_or_none, cfg.t_end,
                                 rho=float(cfg.grid.get("rho", 0.5)),
                                 quad_tol=tol["quad_tol"],
                                 t_eval=cfg.snapshot_times)
    else:
        _, info = solve_local(u0, reg.m, pot, reg.beta, field_or_none,
                              cfg.t_end, t_eval=cfg.snapshot_times)
    pde_snaps = info.snapshots

    margin = cfg.window_margin_cells * dx
    window = (-half + margin, half - margin)
    opts = IntegratorOptions(rk_tol=tol["rk_tol"])

    rows = []
    events_total = 0
    for n in cfg.n_list:
        st0 = quantile_particles(dens, int(n))
        res = simulate(st0, pot, reg.alpha_of(int(n)), field_or_none,
                       cfg.t_end, opts, t_eval=cfg.snapshot_times)
        events_total += len(res.events)
        for (tk, uv), snap in zip(pde_snaps, res.snapshots):
            g = GridFunction(-half, dx, uv, u0.far_left, u0.far_right)
            d = sup_distance(cumulative_charge(snap), g, window)
            rows.append({"n": int(n), "t": float(tk), "distance": float(d)})
        if progress:
            progress(n)

    passed = True
    notes = []
    slack = tol["slack"]
    for tk in cfg.snapshot_times:
        col = [r["distance"] for r in rows if r["t"] == tk]
        for a, b in zip(col[:-1], col[1:]):
            if b > slack * a:
                passed = False
                notes.append(f"distance not decreasing at t={tk}: {a:.4g} -> {b:.4g}")
        if col[-1] > tol["conv_tol"]:
            passed = False
            notes.append(f"final distance {col[-1]:.4g} above {tol['conv_tol']}")

    profile = f"hj{reg.m}"
    return {
        "config_hash": cfg.config_hash(),
        "compliance": json.loads(audit_assumptions(pot, profile).to_json()),
        "rows": rows,
        "events_total": events_total,
        "passed": passed,
        "notes": notes,
    }


def convergence_csv(report: dict) -> str:
    lines = ["n,t,distance"]
    lines += [f"{r['n']},{r['t']!r},{r['distance']!r}" for r in report["rows"]]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# collision-exponent fits
# ---------------------------------------------------------------------------

@dataclass
class ExponentFit:
    slope: float
    ci_low: float
    ci_high: float
    n_points: int
    window_decades: tuple

    def to_dict(self):
        return self.__dict__.copy()


def fit_exponent_from_series(times, gaps, tau: float,
                             drop_decades: float = 1.0,
                             use_decades: float = 2.0,
                             n_boot: int = 200, seed: int = 0) -> ExponentFit:
    """Log-log slope of the gap against time-to-collision.

    The decade closest to tau is dropped (event-location error dominates
    there); the fit uses the next ``use_decades`` decades.  Bootstrap
    resampling gives the confidence interval.
    """
    times = np.asarray(times, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    s = tau - times
    keep = (s > 0) & np.isfinite(gaps) & (gaps > 0)
    s, g = s[keep], gaps[keep]
    if len(s) < 8:
        raise DataError("not enough gap samples before the collision")
    ld = np.log10(s)
    lo = ld.min()
    if ld.max() - lo < drop_decades + use_decades:
        raise DataError(
            f"need {drop_decades + use_decades:.1f} decades of time-to-collision "
            f"data, have {ld.max() - lo:.2f}")
    win = (ld >= lo + drop_decades) & (ld <= lo + drop_decades + use_decades)
    if np.count_nonzero(win) < 6:
        raise DataError("fit window holds fewer than 6 samples")
    lx, ly = np.log(s[win]), np.log(g[win])
    slope = float(np.polyfit(lx, ly, 1)[0])
    rng = np.random.default_rng(seed)
    boots = []
    idx = np.arange(len(lx))
    for _ in range(n_boot):
        pick = rng.choice(idx, size=len(idx), replace=True)
        if len(np.unique(lx[pick])) < 2:
            continue
        boots.append(np.polyfit(lx[pick], ly[pick], 1)[0])
    lo_ci, hi_ci = (np.percentile(boots, [2.5, 97.5]) if boots
                    else (slope, slope))
    return ExponentFit(slope, float(lo_ci), float(hi_ci),
                       int(np.count_nonzero(win)),
                       (drop_decades, drop_decades + use_decades))


def fit_collision_exponent(result, event_index: int = 0,
                           **fit_kwargs) -> ExponentFit:
    """Fit the shrinking-gap exponent from a simulation's diagnostics.

    Uses the recorded minimal opposite-sign gap in the inter-event window
    before the chosen event: close to the collision that gap belongs to the
    collapsing pair.
    """
    events = result.events.events
    if not events:
        raise DataError("simulation recorded no collision events")
    tau = events[event_index].tau
    t_prev = events[event_index - 1].tau if event_index > 0 else -math.inf
    d = result.diagnostics
    times = np.asarray(d.t)
    gaps = np.asarray(d.min_opposite_gap)
    keep = (times > t_prev) & (times < tau)
    return fit_exponent_from_series(times[keep], gaps[keep], tau, **fit_kwargs)
