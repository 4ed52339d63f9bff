import csv
import json

import pytest

from casimir_surface import cli
from casimir_surface.bem.energy import ConditioningError

MIRRORS = {"outer": {"kind": "Vacuum"}, "bodies": [{"kind": "Constant", "params": {"eps": 1e300}}]}


def _write(tmp_path, config, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    return path


def _rows(out):
    with open(out / "results.csv") as fh:
        return list(csv.DictReader(fh))


def _lifshitz(sweep=None):
    config = {
        "command": "lifshitz",
        "geometry": {"gap": 1.0},
        "materials": MIRRORS,
        "thermal": {"mode": "ZeroT"},
        "numerics": {"pressure": False},
    }
    if sweep is not None:
        config["sweep"] = sweep
    return config


def test_lifshitz_sweep_scaling(tmp_path):
    path = _write(tmp_path, _lifshitz([0.5, 1.0, 2.0]))
    assert cli.main(["--config", str(path), "--out", str(tmp_path / "out")]) == 0
    rows = _rows(tmp_path / "out")
    assert [float(r["H"]) for r in rows] == [0.5, 1.0, 2.0]
    F = [float(r["F_per_area"]) for r in rows]
    assert F[0] / F[1] == pytest.approx(8.0, rel=1e-6)
    assert F[2] / F[1] == pytest.approx(1 / 8.0, rel=1e-6)
    sidecar = json.loads((tmp_path / "out" / "results.json").read_text())
    assert len(sidecar["records"]) == 3 and sidecar["command"] == "lifshitz"


def test_empty_sweep_gives_one_record(tmp_path):
    path = _write(tmp_path, _lifshitz([]))
    assert cli.main(["--config", str(path), "--out", str(tmp_path / "out")]) == 0
    rows = _rows(tmp_path / "out")
    assert len(rows) == 1 and float(rows[0]["H"]) == 1.0


def test_output_is_deterministic(tmp_path):
    path = _write(tmp_path, _lifshitz([0.5, 2.0]))
    for out in ("a", "b"):
        assert cli.main(["--config", str(path), "--out", str(tmp_path / out)]) == 0
    for name in ("results.csv", "results.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bem_energy_refinements(tmp_path):
    sphere = {"shape": "sphere", "radius": 1.0, "material": 0}
    config = {
        "command": "bem-energy",
        "geometry": {"bodies": [sphere, dict(sphere, center=[0.0, 0.0, 4.0])]},
        "materials": {"bodies": [{"kind": "Constant", "params": {"eps": 2.0}}]},
        "numerics": {"kappa": 1.0, "refinements": [0, 1]},
    }
    path = _write(tmp_path, config)
    assert cli.main(["--config", str(path), "--out", str(tmp_path / "out")]) == 0
    rows = _rows(tmp_path / "out")
    assert [int(r["refinement"]) for r in rows] == [0, 1]
    energies = [float(r["energy"]) for r in rows]
    assert all(e < 0 for e in energies)
    assert int(rows[1]["unknowns"]) > int(rows[0]["unknowns"])


def test_sphere_sphere_and_tmatrix(tmp_path):
    config = {
        "command": "sphere-sphere",
        "geometry": {"radii": [1.0, 1.0], "distance": 4.0},
        "materials": {"bodies": [{"kind": "Constant", "params": {"eps": 2.0}}]},
        "numerics": {"kappa": 1.0, "l_max": 6},
    }
    assert cli.main(["--config", str(_write(tmp_path, config)), "--out", str(tmp_path / "ss")]) == 0
    assert float(_rows(tmp_path / "ss")[0]["energy"]) < 0
    config = {
        "command": "tmatrix",
        "geometry": {"shape": "sphere", "radius": 1.0, "refinement": 0, "material": 0},
        "materials": {"bodies": [{"kind": "Constant", "params": {"eps": 2.0}}]},
        "numerics": {"kappa": 1.0, "l_max": 1},
    }
    assert cli.main(["--config", str(_write(tmp_path, config, "t.json")), "--out", str(tmp_path / "t")]) == 0
    rows = _rows(tmp_path / "t")
    assert len(rows) == 6
    for r in rows:
        assert float(r["T"]) == pytest.approx(float(r["T_mie"]), rel=0.2)


@pytest.mark.parametrize(
    "change",
    [
        {"sweep": [1.0, 0.5]},
        {"sweep": [-1.0]},
        {"command": "nonsense"},
        {"materials": {"bodies": [{"kind": "Unknown"}]}},
        {"geometry": {}},
    ],
)
def test_config_errors_exit_2(tmp_path, capsys, change):
    path = _write(tmp_path, {**_lifshitz(), **change})
    assert cli.main(["--config", str(path), "--out", str(tmp_path / "out")]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_files_exit_2(tmp_path):
    assert cli.main(["--config", str(tmp_path / "absent.json")]) == 2
    config = {
        "command": "bem-energy",
        "geometry": {"bodies": [{"shape": "file", "path": "absent.panels"}]},
        "materials": {"bodies": [{"kind": "Constant", "params": {"eps": 2.0}}]},
        "numerics": {"kappa": 1.0},
    }
    assert cli.main(["--config", str(_write(tmp_path, config)), "--out", str(tmp_path / "out")]) == 2


def test_numeric_errors_exit_3(tmp_path, monkeypatch, capsys):
    def failing(config, base_dir):
        raise ConditioningError("surface operator is singular")

    monkeypatch.setitem(cli.PIPELINES, "lifshitz", failing)
    path = _write(tmp_path, _lifshitz())
    assert cli.main(["--config", str(path), "--out", str(tmp_path / "out")]) == 3
    assert "ConditioningError" in capsys.readouterr().err


def test_thread_budget(monkeypatch):
    monkeypatch.delenv(cli.THREADS_ENV, raising=False)
    assert cli.thread_budget(3) == 3
    assert cli.thread_budget(0) >= 1
    monkeypatch.setenv(cli.THREADS_ENV, "2")
    assert cli.thread_budget(5) == 2
    monkeypatch.setenv(cli.THREADS_ENV, "many")
    with pytest.raises(cli.ConfigError):
        cli.thread_budget(0)
