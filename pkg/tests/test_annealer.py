import json
from dataclasses import replace

import numpy as np
import pytest
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from conftest import SIZE6_SEED
from oscising.annealer import (
    EnsembleStats,
    SolveConfig,
    adder_config,
    convergence_study,
    ensemble_stats,
    generate_network,
    invertible_solve,
    multi_run,
    random_gset_like,
    small_config,
    write_runs_csv,
    write_study_csv,
)
from oscising.dynamics import readout
from oscising.ising import (
    IsingProblem,
    WeightedGraph,
    brute_force_ground,
    cut_size,
    encode_half_adder,
    ising_energy,
)
from oscising.sde import Schedule, SimOptions, simulate

QUICK = SolveConfig(schedule=Schedule(coupling=((0, 0), (5, 3)), sync=((0, 1),), noise=((0, 0.2),)),
                    options=SimOptions(t_end=8, record_stride=100, record_phases=False), runs=6,
                    master_seed=3)


# -- generators ---------------------------------------------------------------

def test_full_network_edges():
    assert generate_network("full", 4).m == 6


def test_line_network_diameter():
    g = generate_network("line", 100, seed=1)
    assert g.m == 99
    adj = coo_matrix((np.ones(g.m), (g.i, g.j)), shape=(100, 100))
    d = shortest_path(adj, directed=False, unweighted=True)
    assert d.max() == 99


def test_sparse_edge_count():
    g = generate_network("sparse", 100, seed=42, p=0.1)
    mean = 0.1 * 4950
    assert abs(g.m - mean) <= 3 * np.sqrt(4950 * 0.1 * 0.9)


def test_generator_validation_and_determinism():
    with pytest.raises(ValueError):
        generate_network("sparse", 10, p=0)
    with pytest.raises(ValueError):
        generate_network("ring", 10)
    with pytest.raises(ValueError):
        generate_network("full", 10, "gauss")
    a = generate_network("full", 12, "uniform02", 9)
    b = generate_network("full", 12, "uniform02", 9)
    assert a.edges == b.edges
    assert a.w.min() >= 0 and a.w.max() <= 2
    assert set(generate_network("full", 12, "pm1", 1).w) <= {-1.0, 1.0}


def test_gset_like_graph():
    g = random_gset_like(200, 1990, seed=2)
    assert g.n == 200 and g.m == 1990 and np.all(g.w == 1)
    assert len(set(zip(g.i.tolist(), g.j.tolist()))) == 1990


# -- multi_run ----------------------------------------------------------------

def test_single_run_reproduces_simulate():
    g = generate_network("full", 6, "uniform02", SIZE6_SEED)
    prob = IsingProblem.from_graph(g)
    cfg = replace(QUICK, runs=1)
    reports, stats = multi_run(prob, cfg, graph=g)
    _, state = simulate(prob, cfg.schedule, cfg.coupling_fn(),
                        options=replace(cfg.options, seed=cfg.run_seed(0)))
    spins, _ = readout(state)
    assert np.array_equal(reports[0].spins, spins[:-1])
    assert stats.runs == 1 and stats.best_H == reports[0].H


def test_reports_are_consistent_and_ordered():
    g = generate_network("sparse", 20, "pm1", 4, p=0.4)
    prob = IsingProblem.from_graph(g)
    reports, stats = multi_run(prob, QUICK, graph=g)
    assert [r.run_index for r in reports] == list(range(6))
    for r in reports:
        assert r.seed == QUICK.run_seed(r.run_index)
        assert r.H == ising_energy(r.spins, prob)
        assert r.cut == cut_size(r.spins, g)
        assert r.H == pytest.approx(g.total_weight() - 2 * r.cut, abs=1e-9)
    assert stats.mean_cut == pytest.approx(np.mean([r.cut for r in reports]))
    assert stats.best_cut == max(r.cut for r in reports)


def test_thread_count_does_not_change_results():
    g = generate_network("full", 10, "uniform01", 8)
    prob = IsingProblem.from_graph(g)
    a = multi_run(prob, QUICK, graph=g)[1]
    b = multi_run(prob, replace(QUICK, threads=4), graph=g)[1]
    assert a.to_json() == b.to_json()


def test_antiferromagnetic_pair_ensemble():
    prob = IsingProblem(2, [0], [1], [1.0])
    _, stats = multi_run(prob, small_config(), oracle_H=-1.0)
    assert stats.success_rate >= 0.99


def test_size6_fixture_default_config():
    g = generate_network("full", 6, "uniform02", SIZE6_SEED)
    prob = IsingProblem.from_graph(g)
    H, _ = brute_force_ground(prob)
    _, stats = multi_run(prob, small_config(), graph=g, oracle_H=H)
    assert stats.success_rate >= 0.9


def test_oracle_agreement_small_problems():
    hits = 0
    for k in range(20):
        rng = np.random.default_rng(100 + k)
        n = int(rng.integers(4, 13))
        g = generate_network("sparse", n, "pm1", 100 + k, p=0.6)
        prob = IsingProblem.from_graph(g)
        H, _ = brute_force_ground(prob)
        _, stats = multi_run(prob, small_config(runs=50, master_seed=k), graph=g, oracle_H=H)
        hits += stats.best_H == pytest.approx(H, abs=1e-9)
    assert hits >= 18


def test_failed_runs_are_excluded():
    from oscising.annealer import RunReport
    reps = [RunReport(0, 1, np.array([1]), -2.0, 1.0, 1.0),
            RunReport(1, 2, None, None, None, None, failed=True, error="boom"),
            RunReport(2, 3, np.array([1]), -4.0, 2.0, 1.0)]
    st = ensemble_stats(reps, oracle_H=-4.0)
    assert st.runs == 3 and st.failed == 1
    assert st.mean_H == -3.0 and st.best_H == -4.0 and st.success_rate == 0.5
    assert st.best_cut == 2.0 and st.worst_cut == 1.0


@pytest.mark.filterwarnings("ignore:overflow")
def test_diverged_runs_reported_not_raised():
    prob = IsingProblem(2, [0], [1], [1e306])
    cfg = SolveConfig(schedule=Schedule.constant(1e3, 0, 0), options=SimOptions(t_end=1), runs=2)
    reports, stats = multi_run(prob, cfg)
    assert stats.failed == 2 and all(r.failed and "diverged" in r.error for r in reports)
    assert stats.mean_H is None


def test_runs_csv(tmp_path):
    g = generate_network("full", 5, "uniform01", 1)
    reports, _ = multi_run(IsingProblem.from_graph(g), QUICK, graph=g)
    write_runs_csv(reports, tmp_path / "runs.csv")
    lines = (tmp_path / "runs.csv").read_text().splitlines()
    assert lines[0] == "run_index,seed,H,cut,binarity,failed" and len(lines) == 7


# -- config serialization -----------------------------------------------------

def test_config_roundtrip():
    cfg = small_config(master_seed=12, detune_sigma=0.01)
    back = SolveConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert back == cfg


def test_config_rejects_unknown_keys():
    d = small_config().to_dict()
    d["temperature"] = 3
    with pytest.raises(ValueError):
        SolveConfig.from_dict(d)
    d = small_config().to_dict()
    d["options"]["substeps"] = 2
    with pytest.raises(ValueError):
        SolveConfig.from_dict(d)


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(runs=0)
    with pytest.raises(ValueError):
        SolveConfig(detune_sigma=-0.1)


def test_detuning_changes_results_deterministically():
    g = generate_network("full", 8, "uniform01", 2)
    prob = IsingProblem.from_graph(g)
    cfg = replace(QUICK, detune_sigma=0.05)
    a = multi_run(prob, cfg, graph=g)[1]
    b = multi_run(prob, cfg, graph=g)[1]
    assert a == b


# -- convergence study --------------------------------------------------------

def test_study_rows_and_csv(tmp_path):
    rows = convergence_study([("line", 10), ("full", 10)], 3)
    assert len(rows) == 6 and {r.kind for r in rows} == {"line", "full"}
    assert all(r.settled and r.settling_time > 0 for r in rows)
    write_study_csv(rows, tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "kind,n,sample,settling_time,final_energy" and len(lines) == 7


def test_study_requires_noiseless_config():
    with pytest.raises(ValueError):
        convergence_study([("line", 10)], 1, QUICK)


def test_sparser_networks_have_shallower_energy():
    rows = convergence_study([("sparse:1", 100), ("sparse:0.3", 100), ("sparse:0.1", 100)], 5)
    depth = [np.mean([abs(r.final_energy) for r in rows if r.kind == k])
             for k in ("sparse:1", "sparse:0.3", "sparse:0.1")]
    assert depth[0] > depth[1] > depth[2]


# -- invertible logic ---------------------------------------------------------

def test_adder_forward():
    ha = encode_half_adder()
    res = invertible_solve(ha.spin, {2: 1, 3: 1}, seed=5)
    assert res.valid and list(res.assignment) == [1, 0, 1, 1]


def test_adder_inverse_sum_one():
    ha = encode_half_adder()
    preimages = {(0, 1, 0, 1), (0, 1, 1, 0)}
    cfg = adder_config()
    for r in range(10):
        res = invertible_solve(ha.spin, {1: 1}, cfg, seed=cfg.run_seed(r))
        assert tuple(res.assignment) in preimages and res.valid


def test_fully_clamped_rows():
    ha = encode_half_adder()
    for row in ha.truth_set():
        res = invertible_solve(ha.spin, dict(enumerate(row)), seed=1)
        assert res.valid and tuple(res.assignment) == tuple(row)
    res = invertible_solve(ha.spin, {0: 1, 1: 1, 2: 1, 3: 1}, seed=1)
    assert not res.valid


def test_clamp_validation():
    ha = encode_half_adder()
    with pytest.raises(ValueError):
        invertible_solve(ha.spin, {2: 2})
    with pytest.raises(IndexError):
        invertible_solve(ha.spin, {7: 1})
