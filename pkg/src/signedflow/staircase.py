"""Piecewise-constant machinery: cumulative charge staircases and the
step approximation of the identity.

The cumulative charge of a configuration is u(x) = (1/n) sum_i b_i H(x - x_i)
with H the Heaviside function; it is right-continuous, has a jump of size
b_i / n at each charged particle and vanishes at -inf.

The step identity with resolution eps is

    E_eps[g] = eps * (floor(g / eps) + 1/2),

whose upper and lower semicontinuous envelopes differ exactly on eps * Z.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = ["Staircase", "cumulative_charge", "staircase_identity", "sup_distance"]


@dataclass(frozen=True)
class Staircase:
    """Piecewise-constant function with sorted jump locations.

    ``values`` holds the plateau values, one more than ``jumps``; the first
    entry is the value at -inf.
    """

    jumps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        jumps = np.asarray(self.jumps, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "jumps", jumps)
        object.__setattr__(self, "values", values)
        if len(values) != len(jumps) + 1:
            raise ValueError("need one plateau more than jumps")
        if len(jumps) > 1 and not np.all(np.diff(jumps) > 0):
            raise ValueError("jump locations must be strictly increasing")

    @property
    def left_value(self) -> float:
        return float(self.values[0])

    def eval_right(self, x):
        """Right-continuous evaluation (includes the jump at x)."""
        idx = np.searchsorted(self.jumps, np.asarray(x, dtype=float), side="right")
        return self.values[idx]

    def eval_left(self, x):
        """Left limit at x."""
        idx = np.searchsorted(self.jumps, np.asarray(x, dtype=float), side="left")
        return self.values[idx]

    def candidate_points(self, lo: float, hi: float) -> np.ndarray:
        m = (self.jumps >= lo) & (self.jumps <= hi)
        return self.jumps[m]

    def to_json(self) -> str:
        return json.dumps({
            "left_value": self.left_value,
            "jumps": self.jumps.tolist(),
            "values": self.values.tolist(),
        })

    @staticmethod
    def from_json(text: str) -> "Staircase":
        d = json.loads(text)
        return Staircase(np.asarray(d["jumps"]), np.asarray(d["values"]))

    @staticmethod
    def constant(c: float) -> "Staircase":
        return Staircase(np.empty(0), np.array([float(c)]))


def cumulative_charge(state) -> Staircase:
    """Staircase primitive of the signed empirical measure of ``state``.

    Jumps of size b_i / n at each charged position; neutral particles are
    skipped.  The value at -inf is 0.
    """
    b = np.asarray(state.b)
    x = np.asarray(state.x, dtype=float)
    n = len(x)
    charged = b != 0
    xs = x[charged]
    bs = b[charged]
    if len(xs) > 1 and not np.all(np.diff(xs) > 0):
        raise ValueError("charged positions must be strictly increasing")
    values = np.concatenate(([0.0], np.cumsum(bs / n)))
    return Staircase(xs, values)


def staircase_identity(gamma, eps: float, envelope: str = "upper"):
    """Step approximation of the identity, eps * (floor(gamma/eps) + 1/2).

    On the grid eps * Z the two semicontinuous envelopes differ: the upper
    one takes the right limit, the lower one the left limit.  Accepts scalars
    or arrays.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if envelope not in ("upper", "lower"):
        raise ValueError("envelope must be 'upper' or 'lower'")
    g = np.asarray(gamma, dtype=float)
    q = g / eps
    k = np.floor(q)
    kr = np.round(q)
    on_grid = kr * eps == g
    k = np.where(on_grid, kr, k)
    if envelope == "lower":
        k = np.where(on_grid, k - 1.0, k)
    out = eps * (k + 0.5)
    if out.ndim == 0:
        return float(out)
    return out


def _eval_sides(f, xs):
    """(left, right) evaluations; continuous objects give identical sides."""
    if hasattr(f, "eval_left"):
        return np.asarray(f.eval_left(xs), dtype=float), np.asarray(f.eval_right(xs), dtype=float)
    vals = np.asarray(f(xs), dtype=float)
    return vals, vals


def sup_distance(u, v, window) -> float:
    """Sup-norm distance over ``window`` between staircases / grid functions.

    Candidate points are the union of both jump sets, grid nodes and the
    window endpoints; at each candidate both one-sided limits are compared
    (matched sides, since the difference's one-sided limits are what a
    neighborhood sees).
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must be a nonempty interval")
    pts = [np.array([lo, hi])]
    for f in (u, v):
        if hasattr(f, "candidate_points"):
            pts.append(np.asarray(f.candidate_points(lo, hi), dtype=float))
    xs = np.unique(np.concatenate(pts))
    ul, ur = _eval_sides(u, xs)
    vl, vr = _eval_sides(v, xs)
    return float(max(np.max(np.abs(ul - vl)), np.max(np.abs(ur - vr))))
