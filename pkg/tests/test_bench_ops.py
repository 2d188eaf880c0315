import logging

import pandas as pd
import pytest
from rich.console import Console

from manet_dsprp_ga_app.bench_ops.bench_ops_api import (
    BenchOpsApi,
    MEMORY_TRACE_COLUMNS,
    build_scheme_hook,
    compare_schemes,
    run_experiment,
    run_replication,
)
from manet_dsprp_ga_app.bench_ops.experiment_config import Scheme, parse_config
from manet_dsprp_ga_app.cli import main as cli_main
from manet_dsprp_ga_app.exceptions import ConfigurationError
from manet_dsprp_ga_app.ga_ops.diversity_schemes import ElitismImmigrantsHook, RandomImmigrantsHook
from manet_dsprp_ga_app.ga_ops.ga_engine import GaParams
from manet_dsprp_ga_app.ga_ops.memory_scheme import EigaMegaHook, MegaHook
from manet_dsprp_ga_app.topology_ops.topology_io import load_topology

SMALL = ["--nodes", "15", "--area", "600", "600", "--range", "250", "--pop", "10", "--gens", "12"]


def _config(*extra):
    return parse_config(SMALL + list(extra))


def test_build_scheme_hook(grid_graph, rng):
    params = GaParams(n=10, m=2)
    assert build_scheme_hook(Scheme.SGA, params, grid_graph, 0, 8, rng) is None
    assert isinstance(build_scheme_hook(Scheme.RIGA, params, grid_graph, 0, 8, rng), RandomImmigrantsHook)
    assert isinstance(build_scheme_hook(Scheme.EIGA, params, grid_graph, 0, 8, rng), ElitismImmigrantsHook)
    assert type(build_scheme_hook(Scheme.MEGA, params, grid_graph, 0, 8, rng)) is MegaHook
    assert isinstance(build_scheme_hook("eiga-mega", params, grid_graph, 0, 8, rng), EigaMegaHook)


def test_replication_records_follow_schedule():
    config = _config("--scheme", "eiga", "--change-interval", "4", "--changes", "2")
    records = run_replication(config, Scheme.EIGA, 0).records
    assert [r.generation for r in records] == list(range(1, 13))
    assert [r.env_index for r in records] == [0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2, 2]
    for r in records:
        assert 0.0 <= r.quality <= 1.0
        assert 0.0 <= r.feasible_fraction <= 1.0


def test_no_changes_keeps_environment_zero():
    config = _config("--scheme", "sga", "--changes", "0", "--reps", "2")
    result = run_experiment(config)
    assert {r.env_index for r in result.records} == {0}
    assert len(result.records) == 24
    assert result.summary.recovery == {"sga": []}


def test_same_seed_gives_identical_files(tmp_path):
    paths = []
    for name in ("a", "b"):
        config = _config("--scheme", "mega", "--reps", "2", "--seed", "11",
                         "--change-interval", "3", "--out", str(tmp_path / name / "run.csv"))
        api = BenchOpsApi()
        paths.append(api.write_outputs(api.run_experiment(config), config.out))
    for key in ("primary", "summary"):
        assert paths[0][key].read_bytes() == paths[1][key].read_bytes()


def test_different_seeds_give_different_runs():
    first = run_experiment(_config("--scheme", "riga", "--seed", "1"))
    second = run_experiment(_config("--scheme", "riga", "--seed", "2"))
    assert [r.best_cost for r in first.records] != [r.best_cost for r in second.records]


def test_output_files(tmp_path):
    config = _config("--scheme", "eiga-mega", "--reps", "2", "--trace-memory",
                     "--change-interval", "3", "--out", str(tmp_path / "out.csv"))
    api = BenchOpsApi()
    paths = api.write_outputs(api.run_experiment(config), config.out)

    primary = paths["primary"].read_text(encoding="utf-8").splitlines()
    assert primary[0] == "scheme,replication,generation,env_index,best_cost,best_fitness,quality,feasible_fraction"
    assert len(primary) == 1 + 2 * 12
    assert primary[1].startswith("eiga-mega,0,1,0,")
    best_cost = primary[1].split(",")[4]
    assert len(best_cost.split(".")[1]) == 6

    summary = paths["summary"].read_text(encoding="utf-8").splitlines()
    assert summary[0] == "scheme,generation,mean_quality,median_quality"
    assert summary[13] == "scheme,offline_perf,median_recovery"
    assert summary[14].startswith("eiga-mega,")

    assert paths["memory"].name == "out.memory.csv"
    trace = pd.read_csv(paths["memory"])
    assert list(trace.columns) == MEMORY_TRACE_COLUMNS
    assert len(trace) == 2 * 12 * config.ga.memory_size


def test_workers_do_not_change_results():
    serial = run_experiment(_config("--scheme", "eiga", "--reps", "3", "--seed", "5"))
    parallel = run_experiment(_config("--scheme", "eiga", "--reps", "3", "--seed", "5", "--workers", "2"))
    assert serial.records == parallel.records


def test_compare_schemes_share_topologies():
    base = _config("--scheme", "sga,eiga,mega", "--reps", "3", "--changes", "0")
    result = compare_schemes([base.with_scheme(s) for s in base.schemes])
    table = result.summary.mean_quality_table()
    assert list(table.columns) == ["sga", "eiga", "mega"]
    assert list(table.index) == list(range(1, 13))
    assert set(result.pvalues_vs_sga) == {"eiga", "mega"}
    # quality 1 means the best cost equals the optimum of the shared topology
    by_scheme = {}
    for r in result.records:
        if r.quality == 1.0:
            by_scheme.setdefault(r.replication, set()).add(round(r.best_cost, 9))
    assert all(len(costs) == 1 for costs in by_scheme.values())


def test_compare_duplicate_scheme_matches_single_run():
    config = _config("--scheme", "eiga", "--reps", "2")
    twice = compare_schemes([config, config])
    once = run_experiment(config)
    assert twice.records == once.records


def test_compare_rejects_mismatched_configs():
    with pytest.raises(ConfigurationError):
        compare_schemes([_config("--scheme", "sga"), _config("--scheme", "eiga", "--pop", "12")])


def test_static_generate_and_solve(tmp_path):
    topology = tmp_path / "g.txt"
    api = BenchOpsApi()
    graph = api.generate_topology(parse_config(SMALL + ["--out", str(topology), "--seed", "4"], require_scheme=False))
    assert load_topology(topology).node_count == graph.node_count == 15

    config = _config("--scheme", "eiga", "--topology", str(topology), "--gens", "40", "--pop", "20")
    result = api.solve_topology(config)
    assert len(result.records) == 40
    assert result.best_path[0] == 0 and result.best_path[-1] == 14
    assert result.best_cost >= result.optimum.cost - 1e-6

    console = Console(record=True, width=200)
    api.print_static(result, console)
    assert "dijkstra" in console.export_text()


def test_solve_needs_topology():
    with pytest.raises(ConfigurationError):
        BenchOpsApi().solve_topology(_config("--scheme", "sga"))


def test_print_summary_renders_tables():
    base = _config("--scheme", "sga,eiga", "--reps", "2")
    result = compare_schemes([base.with_scheme(s) for s in base.schemes])
    console = Console(record=True, width=200)
    BenchOpsApi(logging.getLogger("test")).print_summary(result, console)
    text = console.export_text()
    assert "Mean quality per generation" in text
    assert "EIGA" in text


def test_cli_runs_comparison(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cli_main.main(SMALL + ["--scheme", "sga,eiga", "--reps", "2", "--out", "cmp.csv"])
    frame = pd.read_csv(tmp_path / "cmp.csv")
    assert set(frame["scheme"]) == {"sga", "eiga"}
    assert (tmp_path / "cmp.summary.csv").is_file()
    assert any((tmp_path / "logs").iterdir())


def test_cli_reraises_configuration_errors(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(ConfigurationError):
        cli_main.main(["--scheme", "eiga", "--pop", "1"])
    assert "Error:" in capsys.readouterr().out


def test_cli_rejects_misspelled_flags(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(ConfigurationError) as info:
        cli_main.main(SMALL + ["--scheme", "sga", "--generations", "50"])
    assert info.value.key == "generations"
    assert not (tmp_path / "results.csv").exists()
    assert "Error:" in capsys.readouterr().out
