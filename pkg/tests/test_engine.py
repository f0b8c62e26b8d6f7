from __future__ import annotations

import importlib
import json
import shutil

import pytest

from coarse.fibering import lamplighter_head_action
from core.enums import RunState
from core.errors import ConfigError, ResourceError, StructuralError
from core.experiment_engine import DEMO_DISCLAIMER, ExperimentEngine
from data.run_monitor import MONITOR_FILE
from decomp.chains import build_chain
from main import build_parser, main, parse_radii
from spaces.serialization import save_chain
from spaces.space import path_space

ball_module = importlib.import_module("groups.ball")


def _report(result) -> dict:
    return json.loads(result.report_path.read_text(encoding="utf-8"))


def test_invalid_config_is_rejected(small_config):
    small_config.witness.scales = []
    with pytest.raises(ConfigError):
        ExperimentEngine(small_config)


def test_profile_run_writes_tables_and_provenance(small_config):
    engine = ExperimentEngine(small_config)
    result = engine.run_profile()
    assert engine.state is RunState.COMPLETED
    assert result.run_dir.name == f"profile_{small_config.checksum()[:12]}"
    csv = (result.run_dir / "profile.csv").read_bytes()
    assert csv == (
        b"space,N,R,D,n_greedy,n_exact,wall_ms\r\n"
        b"z^1,5,1,3,2,2,\r\n"
        b"z^1,5,2,6,2,2,\r\n"
    )
    assert (result.run_dir / "profile.xlsx").exists()
    report = _report(result)
    assert report["config_checksum"] == small_config.checksum()
    assert report["experiment"] == "profile"
    assert report["generating_sets"]
    assert (result.run_dir.parent / MONITOR_FILE).exists()


def test_profile_rerun_is_identical(small_config):
    first = ExperimentEngine(small_config).run_profile()
    csv = (first.run_dir / "profile.csv").read_bytes()
    report = first.report_path.read_bytes()
    second = ExperimentEngine(small_config).run_profile()
    assert second.run_dir == first.run_dir
    assert (second.run_dir / "profile.csv").read_bytes() == csv
    assert second.report_path.read_bytes() == report


def test_witness_run_verifies_every_scale(small_config):
    result = ExperimentEngine(small_config).run_witness()
    report = _report(result)
    assert [v["n"] for v in report["verification"]] == [1, 2]
    assert all(v["passed"] for v in report["verification"])
    assert report["variation"]["decreasing"]
    lines = (result.run_dir / "witness.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n,sup_variation,sup_variation_float,bound,support_radius"
    assert len(lines) == 3


def test_ball_run_checks_the_group(small_config):
    report = _report(ExperimentEngine(small_config).run_ball("grigorchuk@2", samples=500))
    assert report["size"] == 11
    assert report["metric_violations"] == []
    assert report["group_violations"] == []
    assert report["left_invariance_violations"] == []
    assert report["generating_sets"][0].endswith("S={a, b, c, d}")


def test_decompose_run_consults_the_exact_oracle(small_config):
    report = _report(ExperimentEngine(small_config).run_decompose("path:10", 2))
    assert report["n"] == 2
    assert report["n_exact"] == 2
    assert report["verification"]["passed"]


def test_demo_run_passes_on_small_balls(small_config):
    engine = ExperimentEngine(small_config)
    result = engine.run_demo()
    report = _report(result)
    assert report["disclaimer"] == DEMO_DISCLAIMER
    assert report["passed"]
    assert report["product_widths_match"]
    assert report["growth_verdict"]["subexponential"]
    assert len(report["generating_sets"]) == 2
    progress = json.loads((result.run_dir / "progress.json").read_text(encoding="utf-8"))
    assert progress["index"] == progress["total"] == 4
    assert engine.queue.is_done


def test_demo_witnesses_come_from_the_product_chain(small_config):
    report = _report(ExperimentEngine(small_config).run_demo())
    assert report["product"]["radii"] == [3]
    assert report["thickening_radii"] == [1]
    assert report["product_chain_verification"]["passed"]
    assert [w["chain_radii"] for w in report["witnesses"]] == [[3]]
    assert [w["radii"] for w in report["witnesses"]] == [[1]]


def test_demo_rerun_is_byte_identical(small_config):
    first = ExperimentEngine(small_config).run_demo()
    names = ["report.json", "chain.json", "demo_witness.csv"]
    before = {name: (first.run_dir / name).read_bytes() for name in names}
    second = ExperimentEngine(small_config).run_demo()
    assert second.run_dir == first.run_dir
    assert {name: (second.run_dir / name).read_bytes() for name in names} == before


def test_pullback_run_reads_and_writes_chain_json(small_config, tmp_path):
    engine = ExperimentEngine(small_config)
    first = engine.run_pullback(10, 3, 4)
    report = _report(first)
    assert report["target_chain"]["space"] == "path:28"
    assert report["pulled_chain"]["report"]["passed"]
    stored = tmp_path / "pulled.json"
    shutil.copyfile(first.run_dir / "chain.json", stored)

    again = _report(engine.run_pullback(10, 1, 4, chain_path=stored))
    assert again["target_chain"]["space"] == "path:10"
    assert again["embedding"]["name"] == "id"
    assert again["target_chain"]["radii"] == report["pulled_chain"]["radii"]
    assert again["pulled_chain"]["radii"] == report["pulled_chain"]["radii"]


def test_product_run_accepts_a_stored_factor_chain(small_config, tmp_path):
    engine = ExperimentEngine(small_config)
    stored = tmp_path / "x.json"
    save_chain(build_chain(path_space(12), [1, 2], stop_mesh=None), stored)
    result = engine.run_product(None, "path:6", [1, 2], chain_x=stored)
    report = _report(result)
    assert report["product"]["space"] == "path:12 x path:6"
    assert (result.run_dir / "chain.json").exists()
    with pytest.raises(ConfigError):
        engine.run_product(None, "path:6", [1, 2])


def test_fiber_run_loads_a_target_chain(small_config, tmp_path):
    target = lamplighter_head_action(2).target
    cx = build_chain(target, [2], stop_mesh=None)
    stored = tmp_path / "target.json"
    save_chain(cx, stored)
    result = ExperimentEngine(small_config).run_fiber(2, [2], [2], chain_path=stored)
    fiber = _report(result)["fiber"]
    assert fiber["stabilizer_radius"] == cx.terminal_mesh
    assert fiber["report"]["passed"]
    assert (result.run_dir / "chain.json").exists()
    with pytest.raises(StructuralError):
        ExperimentEngine(small_config).run_fiber(3, [2], [2], chain_path=stored)


def test_engine_passes_check_stable_to_ball_enumeration(small_config, monkeypatch):
    small_config.ball.check_stable = False
    small_config.cache.enabled = False
    seen = []
    real = ball_module.enumerate_ball

    def recording(group, radius, budget, check_stable=True):
        seen.append(check_stable)
        return real(group, radius, budget, check_stable)

    monkeypatch.setattr(ball_module, "enumerate_ball", recording)
    ExperimentEngine(small_config).space("grigorchuk@2")
    assert seen == [False]


def test_demo_refuses_oversized_balls(small_config):
    small_config.demo.wreath_radius = small_config.demo.max_wreath_radius + 1
    with pytest.raises(ResourceError, match="shrink N"):
        ExperimentEngine(small_config).run_demo()


def test_failed_run_is_recorded(small_config):
    engine = ExperimentEngine(small_config)
    with pytest.raises(ConfigError, match="bogus"):
        engine.run_ball("bogus@2")
    assert engine.state is RunState.FAILED
    from openpyxl import load_workbook

    ws = load_workbook(f"{small_config.output_base_dir}/{MONITOR_FILE}").active
    assert [row[3] for row in ws.iter_rows(min_row=2, values_only=True)] == ["Failed"]


# --- command line ---

def test_parse_radii():
    assert parse_radii("1..4") == [1, 2, 3, 4]
    assert parse_radii("1,3,5") == [1, 3, 5]
    with pytest.raises(SystemExit):
        build_parser().parse_args(["profile", "--radii", "x..y"])


def test_chain_options_parse():
    args = build_parser().parse_args(["product", "--chain-x", "x.json", "--y", "path:6"])
    assert (args.x, args.chain_x, args.y, args.chain_y) == (None, "x.json", "path:6", None)
    args = build_parser().parse_args(["pullback", "--chain", "c.json", "--source", "path:4"])
    assert (args.chain, args.source) == ("c.json", "path:4")
    assert build_parser().parse_args(["fiber", "--chain", "t.json"]).chain == "t.json"


@pytest.fixture
def config_file(tmp_path, small_config):
    path = tmp_path / "config.json"
    small_config.ball.element_budget = 1000
    small_config.save(path)
    return str(path)


def test_main_exit_codes(config_file, tmp_path, capsys):
    assert main(["--config", config_file, "ball", "--space", "bogus@2"]) == 2
    assert main(["--config", str(tmp_path / "missing.json"), "ball", "--space", "path:3"]) == 2
    assert main(["--config", config_file, "decompose", "--space", "free:2@6", "--radius", "1"]) == 3
    assert main(["--config", config_file, "ball", "--space", "path:3"]) == 0
    assert capsys.readouterr().out.strip().endswith("report.json")


def test_main_profile_copies_the_table(config_file, tmp_path):
    out = tmp_path / "copy" / "profile.csv"
    code = main(["--config", config_file, "profile", "--space", "path", "--ball-radii", "6",
                 "--radii", "1..2", "--out", str(out)])
    assert code == 0
    assert out.read_text(encoding="utf-8").splitlines()[1].startswith("path,6,1,3,")


def test_main_cache_verbs(config_file, isolated_cache, capsys):
    assert main(["--config", config_file, "ball", "--space", "z^1@3"]) == 0
    capsys.readouterr()
    assert main(["--config", config_file, "cache", "list"]) == 0
    assert "@3" in capsys.readouterr().out
    assert main(["--config", config_file, "cache", "clear"]) == 0
    assert "removed 1 entries" in capsys.readouterr().out
