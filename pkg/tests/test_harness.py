"""Experiment harness: configs, placement, envelopes, fits, convergence."""

import json

import numpy as np
import pytest

from signedflow import (DataError, ExperimentConfig, ParticleState,
                        SignedDensity, cumulative_charge,
                        fit_collision_exponent, fit_exponent_from_series,
                        log_potential, power_law_force_potential,
                        quantile_particles, quartic_envelope, run_convergence,
                        simulate, sup_distance)
from signedflow.harness import convergence_csv


# ---------------------------------------------------------------------------
# densities and quantile placement
# ---------------------------------------------------------------------------

def density_one_sign():
    return SignedDensity.from_spec([
        {"sign": 1, "mass": 1.0, "center": 0.0, "width": 1.0}])


def density_signed():
    return SignedDensity.from_spec([
        {"sign": 1, "mass": 0.6, "center": -0.9, "width": 1.0},
        {"sign": -1, "mass": 0.4, "center": 0.9, "width": 1.0}])


def test_quantile_placement_converges_uniformly():
    dens = density_one_sign()
    xs = np.linspace(-2.5, 2.5, 2001)
    prim = dens.primitive(xs)
    for n in (20, 80, 320):
        st = quantile_particles(dens, n)
        assert st.n == n
        u = cumulative_charge(st)

        class _Probe:
            def __call__(self, x):
                return np.interp(x, xs, prim)

            def candidate_points(self, lo, hi):
                return xs[(xs >= lo) & (xs <= hi)]

        d = sup_distance(u, _Probe(), (-2.4, 2.4))
        assert d <= 0.5 / n + 5e-3


def test_quantile_placement_signed_counts():
    st = quantile_particles(density_signed(), 50)
    assert int(np.sum(st.b == 1)) == 30
    assert int(np.sum(st.b == -1)) == 20
    st.validate()


def test_density_primitive_mass():
    dens = density_signed()
    assert dens.primitive(np.array([10.0]))[0] == pytest.approx(0.2, abs=1e-6)


# ---------------------------------------------------------------------------
# config plumbing
# ---------------------------------------------------------------------------

def _cfg_dict():
    return {
        "potential": {"kind": "wall"},
        "regime": {"m": 2},
        "initial": {"kind": "density", "components": [
            {"sign": 1, "mass": 1.0, "center": 0.0, "width": 1.0}]},
        "n_list": [16, 32],
        "t_end": 0.1,
        "snapshot_times": [0.1],
        "grid": {"half_width": 2.0, "nodes": 192, "rho": 0.5},
        "seed": 7,
    }


def test_config_roundtrip_and_hash(tmp_path):
    d = _cfg_dict()
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(d))
    cfg = ExperimentConfig.from_json(p)
    cfg2 = ExperimentConfig.from_dict(json.loads(json.dumps(d)))
    assert cfg.config_hash() == cfg2.config_hash()


def test_config_validation_errors():
    bad = _cfg_dict()
    bad["regime"] = {"m": 4}
    with pytest.raises(DataError):
        ExperimentConfig.from_dict(bad)
    bad = _cfg_dict()
    bad["snapshot_times"] = [0.5]
    with pytest.raises(DataError):
        ExperimentConfig.from_dict(bad)
    bad = _cfg_dict()
    bad["bogus_key"] = 1
    with pytest.raises(DataError):
        ExperimentConfig.from_dict(bad)


# ---------------------------------------------------------------------------
# quartic envelopes
# ---------------------------------------------------------------------------

def test_envelope_of_zero_is_zero():
    xs = np.linspace(-3, 3, 301)
    we = quartic_envelope(xs, np.zeros_like(xs), 1.0)
    assert np.max(np.abs(we.env)) <= 1e-12
    assert we.feasible


def test_envelope_absolute_value_touches_everywhere():
    # -|x| can be wrapped from above by unit quartics at every point
    xs = np.linspace(-3, 3, 401)
    we = quartic_envelope(xs, -np.abs(xs), 1.0)
    assert we.feasible
    assert np.max(we.env + np.abs(xs)) <= 1e-10
    assert np.all(we.env >= -np.abs(xs) - 1e-12)
    assert we.check_well_property()


def test_envelope_mollifier_infeasible_at_center():
    xs = np.linspace(-3, 3, 401)
    def bump(x):
        with np.errstate(over="ignore"):
            return np.where(np.abs(x) < 1, np.exp(-1.0 / np.maximum(1 - x ** 2, 1e-12)), 0.0)
    we = quartic_envelope(xs, -bump(xs / 2.0), 0.01)
    i0 = np.argmin(np.abs(xs))
    assert not we.feasible
    assert not we.touched[i0]
    assert we.min_feasible_K is not None and we.min_feasible_K > 0.01


def test_envelope_majorizes_and_has_wells():
    rng = np.random.default_rng(1)
    xs = np.linspace(-2, 2, 257)
    phi = np.sin(3 * xs) * 0.3 + rng.uniform(-0.05, 0.05, len(xs))
    we = quartic_envelope(xs, phi, 4.0)
    assert np.all(we.env >= phi - 1e-10)
    # by construction the envelope itself can be wrapped by the same quartics
    assert we.check_well_property(tol=1e-6)


# ---------------------------------------------------------------------------
# exponent fits
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("a", [0.0, 0.5, 1.5])
def test_fit_exponent_two_particle(a):
    pot = power_law_force_potential(a)
    st = ParticleState(0.0, [-0.5, 0.5], [1, -1])  # gap 1, so tau = 1
    res = simulate(st, pot, 1.0, None, 1.1)
    fit = fit_collision_exponent(res)
    target = 1.0 / (2.0 + a)
    assert abs(fit.slope - target) <= 0.1 * target
    assert fit.ci_low <= fit.slope <= fit.ci_high


def test_fit_exponent_synthetic_series():
    tau = 1.0
    times = tau - np.geomspace(1e-6, 1e-1, 200)
    gaps = (tau - times) ** 0.4
    fit = fit_exponent_from_series(times, gaps, tau)
    assert fit.slope == pytest.approx(0.4, abs=1e-6)


def test_fit_exponent_insufficient_decades():
    tau = 1.0
    times = tau - np.linspace(0.01, 0.02, 50)
    gaps = (tau - times) ** 0.5
    with pytest.raises(DataError):
        fit_exponent_from_series(times, gaps, tau)


def test_fit_exponent_no_events():
    st = ParticleState(0.0, [-0.5, 0.5], [1, 1])
    res = simulate(st, log_potential(), 1.0, None, 0.05)
    with pytest.raises(DataError):
        fit_collision_exponent(res)


# ---------------------------------------------------------------------------
# convergence runner
# ---------------------------------------------------------------------------

def test_run_convergence_small_m2():
    cfg = ExperimentConfig.from_dict(_cfg_dict())
    report = run_convergence(cfg)
    assert report["passed"], report["notes"]
    ns = [r["n"] for r in report["rows"]]
    assert ns == [16, 32]
    csv = convergence_csv(report)
    assert csv.splitlines()[0] == "n,t,distance"
    assert report["compliance"]["passed"]
    assert len(report["config_hash"]) == 16


def test_run_convergence_zero_density():
    cfg_d = _cfg_dict()
    # equal-mass overlapping bumps of opposite sign: u0 identically 0
    cfg_d["initial"] = {"kind": "density", "components": [
        {"sign": 1, "mass": 0.5, "center": 0.0, "width": 1.0},
        {"sign": -1, "mass": 0.5, "center": 0.0, "width": 1.0}]}
    cfg_d["regime"] = {"m": 1, "alpha": 1.0}
    cfg_d["potential"] = {"kind": "log"}
    cfg_d["n_list"] = [16, 32]
    cfg = ExperimentConfig.from_dict(cfg_d)
    report = run_convergence(cfg)
    # everything annihilates at once: distances at the jump-size level
    assert report["events_total"] > 0
    assert all(r["distance"] <= 1.0 / r["n"] + 0.01 for r in report["rows"])


def test_report_reproducible():
    cfg = ExperimentConfig.from_dict(_cfg_dict())
    a = run_convergence(cfg)
    b = run_convergence(cfg)
    assert a["rows"] == b["rows"]
    assert convergence_csv(a) == convergence_csv(b)
