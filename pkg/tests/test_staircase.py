"""Cumulative charge staircases and the step identity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signedflow import (GridFunction, ParticleState, Staircase,
                        cumulative_charge, staircase_identity, sup_distance)


# ---------------------------------------------------------------------------
# cumulative charge
# ---------------------------------------------------------------------------

def test_two_particle_staircase():
    st_ = cumulative_charge(ParticleState(0.0, [-1.0, 1.0], [1, -1]))
    assert np.allclose(st_.jumps, [-1.0, 1.0])
    assert np.allclose(st_.values, [0.0, 0.5, 0.0])


def test_all_neutral_is_zero():
    st_ = cumulative_charge(ParticleState(0.0, [-1.0, 0.0, 1.0], [0, 0, 0]))
    assert len(st_.jumps) == 0
    assert st_.values[0] == 0.0


def test_alternating_four():
    st_ = cumulative_charge(
        ParticleState(0.0, [-2.0, -1.0, 1.0, 2.0], [1, -1, 1, -1]))
    assert np.allclose(st_.values, [0.0, 0.25, 0.0, 0.25, 0.0])


def test_neutrals_skipped_and_roundtrip():
    st_ = cumulative_charge(
        ParticleState(0.0, [-1.0, 0.2, 0.2, 0.7], [1, 0, 0, -1]))
    assert np.allclose(st_.jumps, [-1.0, 0.7])
    # jump reading recovers (x, b) of the charged particles
    n = 4
    jumps = st_.jumps
    sizes = np.diff(st_.values) * n
    assert np.allclose(jumps, [-1.0, 0.7])
    assert np.allclose(sizes, [1.0, -1.0])


@given(st.integers(2, 24), st.integers(0, 10 ** 6))
@settings(max_examples=50, deadline=None)
def test_staircase_bounded_by_one(n, seed):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(-1, 1, n)) + np.arange(n) * 1e-9
    b = rng.choice([-1, 0, 1], n)
    st_ = cumulative_charge(ParticleState(0.0, x, b))
    assert np.max(np.abs(st_.values)) <= 1.0 + 1e-15


def test_one_sided_evaluation():
    st_ = Staircase(np.array([0.0]), np.array([0.0, 1.0]))
    assert st_.eval_left(0.0) == 0.0
    assert st_.eval_right(0.0) == 1.0
    assert st_.eval_left(-1.0) == st_.eval_right(-1.0) == 0.0


def test_staircase_json_roundtrip():
    st_ = Staircase(np.array([-1.0, 2.0]), np.array([0.0, 0.5, 0.25]))
    rt = Staircase.from_json(st_.to_json())
    assert np.allclose(rt.jumps, st_.jumps)
    assert np.allclose(rt.values, st_.values)
    assert rt.left_value == 0.0


def test_staircase_rejects_bad_shapes():
    with pytest.raises(ValueError):
        Staircase(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        Staircase(np.array([1.0, 0.0]), np.array([0.0, 1.0, 2.0]))


# ---------------------------------------------------------------------------
# step identity
# ---------------------------------------------------------------------------

def test_step_identity_examples():
    assert staircase_identity(0.3, 1.0, "upper") == 0.5
    assert staircase_identity(-0.3, 1.0, "upper") == -0.5
    assert staircase_identity(1.0, 1.0, "lower") == 0.5
    assert staircase_identity(1.0, 1.0, "upper") == 1.5


def test_step_identity_envelopes_differ_exactly_on_grid():
    eps = 0.25
    ks = np.arange(-8, 9)
    on = ks * eps
    up = staircase_identity(on, eps, "upper")
    lo = staircase_identity(on, eps, "lower")
    assert np.allclose(up - lo, eps)
    off = on[:-1] + 0.4 * eps
    assert np.allclose(staircase_identity(off, eps, "upper"),
                       staircase_identity(off, eps, "lower"))


@given(st.floats(-50, 50), st.sampled_from([1.0, 0.5, 0.125, 2.0 ** -6]))
@settings(max_examples=300, deadline=None)
def test_step_identity_sawtooth_bound(gamma, eps):
    up = staircase_identity(gamma, eps, "upper")
    lo = staircase_identity(gamma, eps, "lower")
    # E[g] - g in (-eps/2, eps/2] for the upper, [-eps/2, eps/2) for lower
    # (open endpoints soften by rounding of the computed difference)
    tol = 1e-12 * (abs(gamma) + eps)
    assert -eps / 2 - tol < up - gamma <= eps / 2 + tol
    assert -eps / 2 - tol <= lo - gamma < eps / 2 + tol
    assert abs(up) <= abs(gamma) + eps / 2 + tol


@given(st.floats(-20, 20), st.sampled_from([1.0, 0.25, 2.0 ** -5]))
@settings(max_examples=300, deadline=None)
def test_step_identity_odd_off_grid(gamma, eps):
    q = gamma / eps
    if q == np.round(q):
        return
    up = staircase_identity(gamma, eps, "upper")
    um = staircase_identity(-gamma, eps, "upper")
    assert up == pytest.approx(-um, abs=1e-12)


def test_step_identity_vectorized():
    g = np.array([0.3, -0.3, 1.0])
    out = staircase_identity(g, 1.0, "upper")
    assert np.allclose(out, [0.5, -0.5, 1.5])


# ---------------------------------------------------------------------------
# sup distance
# ---------------------------------------------------------------------------

def test_sup_distance_self_is_zero():
    st_ = cumulative_charge(ParticleState(0.0, [-1.0, 1.0], [1, -1]))
    assert sup_distance(st_, st_, (-2, 2)) == 0.0


def test_sup_distance_constant_grid():
    zero = Staircase(np.empty(0), np.array([0.0]))
    g = GridFunction(-1.0, 0.5, np.full(5, 0.7), 0.7, 0.7)
    assert sup_distance(zero, g, (-1, 1)) == pytest.approx(0.7)


def test_sup_distance_vs_grid_sampling():
    # staircase against its own dense sampling: the jump mismatch of half a
    # plateau survives, located at a jump point
    st_ = cumulative_charge(ParticleState(0.0, [-1.0, 1.0], [1, -1]))
    xs = np.arange(-2.0, 2.0 + 1e-9, 1e-3)
    g = GridFunction(-2.0, 1e-3, st_.eval_right(xs), 0.0, 0.0)
    d = sup_distance(st_, g, (-2, 2))
    assert d <= 0.5 + 1e-12
    assert d >= 0.25  # half-jump seen from the left limit at a node


def test_sup_distance_empty_window():
    st_ = Staircase(np.empty(0), np.array([0.0]))
    with pytest.raises(ValueError):
        sup_distance(st_, st_, (1.0, 1.0))
