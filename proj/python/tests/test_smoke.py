import json
import math

import pytest

import vharvest as vh


def test_defaults_throughput_in_expected_range():
    s = vh.scenario(4.0)
    res = vh.throughput(s)
    assert 0.0 < res.phi_s < 1.0
    assert res.theta_kbit == pytest.approx(res.theta_pkt, rel=1e-12)  # S = 1 kbit
    assert 6.0 < res.theta_kbit < 6.6
    assert len(res.psi) == s.derived.N_s + 1


def test_stationary_battery_is_a_pmf():
    pi = vh.stationary_battery(vh.scenario(3.0))
    assert all(p >= 0 for p in pi)
    assert math.isclose(sum(pi), 1.0, abs_tol=1e-10)


def test_platoon_blackout_and_poisson_rejection():
    s = vh.scenario(4.0, traffic=vh.Platoon(50.0))
    p = vh.blackout_probability(s, 2.0)
    assert 0.0 <= p <= 1.0
    with pytest.raises(NotImplementedError):
        vh.blackout_probability(vh.scenario(4.0), 2.0)


def test_validation_error_is_value_error():
    with pytest.raises(ValueError):
        vh.scenario(4.0, Pt=-1.0)


def test_simulation_is_deterministic_and_close_to_analysis():
    cfg = vh.SimConfig()
    cfg.scenario = vh.scenario(4.0, traffic=vh.Platoon(50.0))
    cfg.n_cycles = 20000
    cfg.seed = 7
    cfg.harvest_sources = vh.HarvestSources.closest_only
    a = vh.simulate(cfg)
    b = vh.simulate(cfg)
    assert a.throughput_bits_s == b.throughput_bits_s
    analytic = vh.throughput(cfg.scenario).theta_bits
    assert a.throughput_bits_s == pytest.approx(analytic, rel=0.03)
    assert abs(a.energy_imbalance_J()) < 1e-9 * a.energy_harvested_J


def test_energy_cdf_monotone():
    s = vh.scenario(5.0)
    xs = [i * 2e-6 for i in range(1, 60)]
    f = vh.energy_cdf(s, xs)
    assert all(0.0 <= v <= 1.0 for v in f)
    assert all(b >= a for a, b in zip(f, f[1:]))


def test_recipe_roundtrip():
    recipe = {
        "name": "smoke",
        "kind": "sweep",
        "base": {"traffic": {"model": "platoon", "d0_m": 50}},
        "ell_m": [2, 4],
        "outputs": ["theta", "pbo"],
    }
    csv = vh.run_recipe(json.dumps(recipe))
    lines = csv.strip().splitlines()
    assert lines[0].startswith("ell_m,")
    assert len(lines) == 3
