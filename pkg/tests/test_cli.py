import json

import pytest

from prioplan import scenarios
from prioplan.cli import main
from prioplan.geometry import save_map
from prioplan.instances import GenSpec, instance_path, load_environment, write_suite


def dump(inst, root):
    """Write a hand-built instance with its own map and roadmap files."""
    save_map(root / "map.pgm", inst.workspace)
    inst.roadmap.save(root / "roadmap.json")
    path = root / f"{inst.name}.json"
    path.write_text(json.dumps(inst.to_json("map.pgm", "roadmap.json")))
    return str(path)


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    root = tmp_path_factory.mktemp("suite")
    write_suite([GenSpec("corridor", "infrastructure", 3, 2, seed=1)], root)
    return root


def test_generate(tmp_path, capsys):
    assert main(["generate", "--env", "warehouse", "--mode", "free-formed", "--n", "2", "3",
                 "--count", "2", "--out", str(tmp_path)]) == 0
    assert "wrote 4 instances" in capsys.readouterr().out
    assert instance_path(tmp_path, "warehouse", "free-formed", 3, 1).exists()


def test_validate(suite, tmp_path, capsys):
    good = str(instance_path(suite, "corridor", "infrastructure", 3, 0))
    assert main(["validate", good]) == 0
    doc = json.loads(open(good).read())
    doc["robots"][1]["start"] = doc["robots"][0]["start"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc).replace('"maps/', f'"{suite}/maps/').replace('"roadmaps/', f'"{suite}/roadmaps/'))
    assert main(["validate", str(bad)]) == 1
    assert "overlap" in capsys.readouterr().out


def test_check_infra(suite, tmp_path, capsys):
    assert main(["check-infra", "--env", "warehouse"]) == 0
    assert json.loads(capsys.readouterr().out)["valid"]
    eps = tmp_path / "eps.json"
    env = load_environment("corridor")
    # endpoints filling both lanes of the hallway cut the map in two
    eps.write_text(json.dumps([list(env.endpoints[0]), [9.5, 5.5], [9.5, 6.5], list(env.endpoints[1])]))
    code = main(["check-infra", "--map", str(suite / "maps" / "corridor.pgm"),
                 "--roadmap", str(suite / "roadmaps" / "corridor.json"), "--endpoints", str(eps)])
    out = json.loads(capsys.readouterr().out)
    assert code == 1 and not out["valid"] and out["failing_pairs"]


def test_check_solvable(tmp_path, capsys):
    assert main(["check-solvable", dump(scenarios.corridor_swap(), tmp_path)]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["solvable"] is False
    assert main(["check-solvable", dump(scenarios.start_detour(), tmp_path)]) == 0


def test_solve(tmp_path, capsys):
    path = dump(scenarios.type_a(), tmp_path)
    assert main(["solve", path, "--alg", "pp"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["status"] == "failure" and out["robot"] == 2
    target = tmp_path / "sol.json"
    assert main(["solve", path, "--alg", "rpp", "--out", str(target)]) == 0
    doc = json.loads(target.read_text())
    assert doc["status"] == "success" and len(doc["trajectories"]) == 3


def test_simulate(tmp_path, capsys):
    path = dump(scenarios.double_conflict(), tmp_path)
    costs = tmp_path / "costs.json"
    costs.write_text(json.dumps({"replan": 1.0, "check": 0.1}))
    assert main(["simulate", path, "--alg", "sd-pp", "--costs", str(costs)]) == 0
    sd = json.loads(capsys.readouterr().out)
    assert main(["simulate", path, "--alg", "ad-pp", "--costs", str(costs)]) == 0
    ad = json.loads(capsys.readouterr().out)
    assert sd["status"] == ad["status"] == "success"
    assert ad["messages"] >= sd["messages"]


def test_simulate_closed_loop_with_events(tmp_path, capsys):
    path = dump(scenarios.superconflict(), tmp_path)
    ev = tmp_path / "ev.json"
    ev.write_text(json.dumps([{"time": 3.0, "robot": 3, "kind": "retask", "goal": [13.5, 12.5]}]))
    costs = tmp_path / "c.json"
    costs.write_text(json.dumps(scenarios.SUPERCONFLICT_COSTS.to_json()))
    code = main(["simulate", path, "--alg", "clad-pp", "--costs", str(costs), "--events", str(ev),
                 "--loss", "0.3", "--seed", "4", "--end-time", "40"])
    out = json.loads(capsys.readouterr().out)
    assert code == (0 if out["status"] == "success" else 1)
    assert any(e["dropped"] for e in out["log"])


def test_simulate_rejects_loss_outside_closed_loop(tmp_path, capsys):
    path = dump(scenarios.double_conflict(), tmp_path)
    assert main(["simulate", path, "--alg", "ad-pp", "--loss", "0.2"]) == 2
    assert "error" in capsys.readouterr().err


def test_bench_and_plot(suite, tmp_path, capsys):
    cfg = tmp_path / "b.yaml"
    cfg.write_text(f"instances: {suite}\nenvironments: [corridor]\nn: [3]\n"
                   "algorithms: [PP, RPP, SD-RPP, AD-RPP]\ncosts: {replan: 0.013, check: 0.00015}\n"
                   f"out: {tmp_path / 'res'}\n")
    assert main(["bench", "--config", str(cfg)]) == 0
    assert "coverage=1.00" in capsys.readouterr().out
    assert main(["plot", "--in", str(tmp_path / "res" / "runs.csv")]) == 0
    assert "wrote 5 charts" in capsys.readouterr().out
    assert (tmp_path / "res" / "plots" / "corridor_infrastructure_speedup.png").exists()


def test_missing_file_is_an_error(capsys):
    assert main(["solve", "/nonexistent/inst.json"]) == 2
