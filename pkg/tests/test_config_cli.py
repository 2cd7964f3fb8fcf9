import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxwell_nehari import io as fio
from maxwell_nehari.cli import main, run
from maxwell_nehari.config import ConfigError, ConfigRefusal, build_nonlinearity, parse_config, serialize
from maxwell_nehari.errors import RegimeError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

MINIMAL = """
[run]
command = ground
[domain]
type = box
"""


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.domain.edges == (math.pi,) * 3 and cfg.domain.cutoff == 6.5
    assert cfg.lam == 0.0 and cfg.nonlinearity.p == 4.0


def test_pi_multiples():
    cfg = parse_config(MINIMAL + "edges = pi, 2pi, 0.5 pi\n")
    assert cfg.domain.edges == pytest.approx((math.pi, 2 * math.pi, math.pi / 2))


def test_positive_lambda_refused_with_location():
    with pytest.raises(ConfigRefusal) as info:
        parse_config(MINIMAL + "[model]\nlambda = 0.5\n")
    assert isinstance(info.value, RegimeError)
    assert info.value.line == 7 and info.value.column == 1
    assert "lambda <= 0" in str(info.value)


def test_positive_lambda_allowed_for_check():
    cfg = parse_config(MINIMAL.replace("ground", "check-nonlinearity") + "[model]\nlambda = 0.5\n")
    assert cfg.lam == 0.5


def test_physics_block():
    cfg = parse_config(MINIMAL + "[model]\neps = 1\nmu = 1\nomega = 1\nkerr = 1\n")
    assert cfg.lam == -1.0
    nl, lam = build_nonlinearity(cfg)
    assert lam == -1.0 and nl.p_max == 4
    with pytest.raises(ConfigError, match="not both"):
        parse_config(MINIMAL + "[model]\neps = 1\nmu = 1\nomega = 1\nlambda = -1\n")


@pytest.mark.parametrize("extra, line, col", [
    ("[solver]\n  tolerance = 3\n", 7, 3),
    ("[plotting]\n", 6, 1),
])
def test_unknown_keys_located(extra, line, col):
    with pytest.raises(ConfigError) as info:
        parse_config(MINIMAL + extra)
    assert (info.value.line, info.value.column) == (line, col)


def test_malformed_values():
    with pytest.raises(ConfigError, match="cutoff"):
        parse_config(MINIMAL + "cutoff = lots\n")
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + "Nr = 4\n")
    with pytest.raises(ConfigError, match="cylinder"):
        parse_config(MINIMAL.replace("ground", "symmetric"))
    with pytest.raises(ConfigRefusal):
        parse_config(MINIMAL + "[nonlinearity]\np = 6\n")
    with pytest.raises(ConfigError, match="step"):
        parse_config(MINIMAL + "[nonlinearity]\ngamma = step(1, 2)\n")


@settings(max_examples=40, deadline=None)
@given(
    lam=st.floats(-5, 0),
    p=st.floats(2.1, 5.9),
    cutoff=st.floats(2.1, 9),
    edges=st.tuples(*[st.floats(0.5, 4)] * 3),
    M=st.lists(st.floats(0.5, 3), min_size=3, max_size=3),
    restarts=st.integers(1, 8),
    seed=st.integers(0, 2**31),
)
def test_serialize_roundtrip(lam, p, cutoff, edges, M, restarts, seed):
    text = f"""
[run]
command = ground
seed = {seed}
[domain]
type = box
edges = {', '.join(map(repr, edges))}
cutoff = {cutoff!r}
modes = 1 1 0; 1 0 1
[model]
lambda = {lam!r}
[nonlinearity]
p = {p!r}
M = {', '.join(map(repr, M))}
gamma = step(2, 1.5, 1, 2)
[solver]
restarts = {restarts}
sectors = even
"""
    cfg = parse_config(text)
    assert parse_config(serialize(cfg)) == cfg


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.ini")))
def test_shipped_configs_parse_and_roundtrip(name):
    cfg = parse_config((CONFIGS / name).read_text())
    assert parse_config(serialize(cfg)) == cfg


def test_eigs_run(tmp_path):
    assert main(["eigs", "--config", str(CONFIGS / "eigs_cube.ini"), "--out-dir", str(tmp_path)]) == 0
    eig = fio.read_spectrum_csv(tmp_path / "spectrum.csv")
    assert len(eig) == 17 and eig[:3] == pytest.approx([2, 2, 2])
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["status"] == "ok" and "basis" in man["timings"]


def test_ground_single_mode_run(tmp_path):
    assert main(["ground", "--config", str(CONFIGS / "ground_single_mode.ini"), "--out-dir", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "ground.json").read_text())
    assert rep["c0"] == pytest.approx(4 * math.pi**3 / 9, rel=1e-10)
    dims, fields = fio.read_vtk_vectors(tmp_path / "ground.vtk")
    E = fields["E"]
    # unit coefficient direction: E_3 is a multiple of sin x1 sin x2 on the node lattice
    n = dims[0]
    x = np.linspace(0, math.pi, n)
    pattern = np.sin(x)[:, None] * np.sin(x)[None, :]
    ratio = E[:, :, n // 2, 2] / np.where(pattern > 1e-3, pattern, np.nan)
    assert np.nanstd(ratio) < 1e-9 * np.nanmax(np.abs(ratio))
    assert np.allclose(E[..., :2], 0)


def test_refusal_exit_codes(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(MINIMAL + "[model]\nlambda = 0.5\n")
    assert main(["ground", "--config", str(cfg), "--out-dir", str(tmp_path / "o")]) == 2
    assert "line 7" in capsys.readouterr().err
    assert json.loads((tmp_path / "o" / "manifest.json").read_text())["status"] == "refused"
    # a symmetric run below the reduced spectrum is refused at run time
    sym = tmp_path / "sym.ini"
    sym.write_text("[run]\ncommand = symmetric\n[domain]\ntype = cylinder\nNr = 6\nNz = 6\n[model]\nlambda = -30\n")
    assert main(["symmetric", "--config", str(sym), "--out-dir", str(tmp_path / "s")]) == 2
    man = json.loads((tmp_path / "s" / "manifest.json").read_text())
    assert "definite regime" in man["error"]
    # command mismatch
    assert main(["eigs", "--config", str(sym), "--out-dir", str(tmp_path / "m")]) == 2


def test_check_command(tmp_path):
    assert main(["check-nonlinearity", "--config", str(CONFIGS / "check_quadratic.ini"),
                 "--out-dir", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "conditions.json").read_text())
    assert "F4" in json.dumps(rep)
    assert json.loads((tmp_path / "manifest.json").read_text())["violated"]


def test_symmetric_run_small(tmp_path):
    text = ("[run]\ncommand = symmetric\n[domain]\ntype = cylinder\nNr = 8\nNz = 8\n"
            "[output]\nvtk_resolution = 10\n")
    status = run(parse_config(text), tmp_path)
    assert status == 0
    tab = json.loads((tmp_path / "sectors.json").read_text())
    assert set(tab["sectors"]) == {"even", "odd", "all"}
    assert tab["ground_sector"] in ("even", "all")
    dims, fields = fio.read_vtk_vectors(tmp_path / "lifted.vtk")
    assert dims == (10, 10, 10) and np.isfinite(fields["E"]).all()


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("MAXWELL_NEHARI_THREADS", "2")
    assert main(["eigs", "--config", str(CONFIGS / "eigs_cube.ini"), "--out-dir", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "manifest.json").read_text())["threads"] == 2


def test_json_cleaning():
    s = fio.dumps({"b": float("nan"), "a": np.float64(0.1), "c": np.arange(2)})
    assert s.index('"a"') < s.index('"b"')
    assert json.loads(s) == {"a": 0.1, "b": None, "c": [0, 1]}
