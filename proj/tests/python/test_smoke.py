import math

import pytest

import fairmatch as fm


def test_bounds():
    assert fm.sampb_bound(1.0) == pytest.approx(0.725431, abs=1e-6)
    tau = 1 - math.exp(-1)
    assert fm.sampab_bound(tau, 1.0) / tau == pytest.approx(0.7194594, abs=1e-6)
    assert sum(fm.minimizer_set(0.7)) == pytest.approx(0.7)
    value, x, kappa = fm.minimize_sampab_ratio(60)
    assert value == pytest.approx(0.7195, abs=1e-3)


def test_instance_round_trip():
    inst = fm.generate_synthetic(10, 10, 3, weights="uniform", groups="partition:2", seed=4)
    assert inst.num_offline == 10 and inst.horizon == 10
    assert inst.validate() == []
    again = fm.Instance.from_json(inst.to_json())
    assert again == inst
    assert again.hash() == inst.hash()


def test_lp_and_oracle():
    path = fm.Instance([1, 1], [1, 1], [(0, 0), (0, 1), (1, 1)], [[0], [1]], 2)
    lp = fm.solve_lp(path, "ifm", cap="finite-horizon")
    assert lp.value >= fm.clairvoyant_oracle(path, "ifm") - 1e-6
    worst = fm.solve_lp(fm.make_example_worst(6), "ifm", normalize=True)
    assert worst.value == pytest.approx(1 - math.exp(-1), abs=1e-9)
    assert len(worst.x) == len(fm.make_example_worst(6).edges)


def test_run_experiment_is_deterministic():
    inst = fm.generate_synthetic(20, 20, 3, seed=1)
    a = fm.run_experiment(inst, ["samp-b", "samp-ab", "greedy"], trials=200, seed=3, sim_count=20)
    b = fm.run_experiment(inst, ["samp-b", "samp-ab", "greedy"], trials=200, seed=3, sim_count=20, threads=2)
    assert [r["z"] for r in a] == [r["z"] for r in b]
    assert {r["policy"] for r in a} == {"samp-b", "samp-ab", "greedy"}
    assert all(0.0 <= r["cr1"] <= 2.0 for r in a)


def test_plan_shape():
    inst = fm.generate_synthetic(8, 12, 2, seed=2)
    lp = fm.solve_lp(inst, normalize=True)
    beta = fm.plan_attenuation(inst, lp, sim_count=30, seed=1)
    assert len(beta) == 8 and all(len(row) == 12 for row in beta)
    assert all(row[0] == 1.0 for row in beta)


def test_sweep_and_errors():
    rows, summary = fm.sweep('{"policies": ["greedy"], "trials": 20, "grid": {"horizon": [8], "degree": [2]}}')
    assert rows.count("\n") == 2 and summary.count("\n") == 2
    with pytest.raises(fm.DataError):
        fm.sweep('{"policies": ["greedy"], "colour": 1}')
    with pytest.raises(fm.UsageError):
        fm.run_experiment(fm.make_example_worst(3), ["no-such-policy"])
    assert "samp-ab" in fm.policy_names()
