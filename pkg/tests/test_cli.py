import json

import pytest

from fracnls.cli import main
from fracnls.config import ExperimentConfig, load_config
from fracnls.errors import ValidationError

SMALL = ["--set", "n=16", "--set", "half_width=8.0"]

CASES = {
    "simulate": SMALL + ["--set", "t_end=0.5", "--set", "dt=0.1", "--set", "n_out=2"],
    "norms-report": SMALL,
    "dyadic-constants": ["--set", "t_grid_n=12"],
    "resonance-check": ["--set", "offset_range=1", "--set", "samples=100", "--set", "region_kind=\"HH\""],
    "normalform-check": SMALL + ["--set", "t_end=0.2", "--set", "dts=[0.1, 0.05]", "--set", "n_out=2"],
    "decay-linear": ["--set", "t_lo=20", "--set", "t_hi=80"],
    "decay-nonlinear": SMALL + ["--set", "t_end=2.0", "--set", "dt=0.1", "--set", "n_out=12",
                                "--set", "t_fit_min=0.5"],
    "scatter-forward": SMALL + ["--set", "t_end=1.0", "--set", "dt=0.1", "--set", "n_out=4"],
    "scatter-final": SMALL + ["--set", "t_max=1.0", "--set", "mesh_step=0.1", "--set", "dt=0.05"],
}

OUTPUTS = {
    "simulate": ["diagnostics.csv", "summary.json"],
    "norms-report": ["norms.json"],
    "dyadic-constants": ["dyadic.csv", "dyadic.json"],
    "resonance-check": ["resonance.json"],
    "normalform-check": ["normalform.json"],
    "decay-linear": ["decay.csv", "fit.json"],
    "decay-nonlinear": ["diagnostics.csv", "summary.json"],
    "scatter-forward": ["cauchy.csv", "scatter_forward.json"],
    "scatter-final": ["scatter_final.json"],
}


@pytest.mark.parametrize("kind", sorted(CASES))
def test_every_kind_runs(kind, tmp_path, capsys):
    out = tmp_path / kind
    assert main([kind, "--out", str(out)] + CASES[kind]) == 0
    for name in OUTPUTS[kind] + ["manifest.json"]:
        assert (out / name).exists(), name
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["kind"] == kind and "numpy" in manifest["versions"]
    assert json.loads(capsys.readouterr().out)["status"] == "ok"


def test_outputs_are_reproducible(tmp_path):
    args = CASES["simulate"] + ["--snapshot-stride", "1"]
    assert main(["simulate", "--out", str(tmp_path / "a")] + args) == 0
    assert main(["simulate", "--out", str(tmp_path / "b")] + args) == 0
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert any(str(f).startswith("snapshots") for f in files)
    for f in files:
        if f.name == "manifest.json":
            continue
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes(), f


@pytest.mark.parametrize("args", [
    ["--set", "lam=0.6"],
    ["--set", "alpha=2.0"],
    ["--set", "n=20"],
    ["--set", "bogus=1"],
    ["--workers", "0"],
])
def test_validation_exit_code(args, tmp_path, capsys):
    assert main(["norms-report", "--out", str(tmp_path)] + args) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "validation" and err["exit_code"] == 2


def test_empty_sweep_is_a_validation_error(tmp_path):
    args = ["--set", "offset_range=1", "--set", "region_kind=\"HL\""]
    assert main(["resonance-check", "--out", str(tmp_path)] + args) == 2


def test_lambda_message(tmp_path, capsys):
    main(["norms-report", "--out", str(tmp_path), "--set", "lam=0.6"])
    assert "lam=0.6 violates lam < 1/2" in json.loads(capsys.readouterr().err)["message"]


def test_numerical_exit_code(tmp_path, capsys):
    # a large constant state reaches the Riccati pole inside the run
    args = SMALL + ["--set", "eps0=50.0", "--set", "sigma=100.0", "--set", "t_end=1.0",
                    "--set", "dt=0.01"]
    assert main(["simulate", "--out", str(tmp_path)] + args) == 3
    assert json.loads(capsys.readouterr().err)["error"] == "numerical"


def test_io_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["norms-report", "--out", str(blocker / "sub")] + SMALL) == 4
    assert json.loads(capsys.readouterr().err)["error"] == "io"


def test_config_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"kind": "simulate", "alpha": 1.7, "coupling": [0.0, 1.0]}))
    cfg = load_config(p, seed=4)
    assert cfg.alpha == 1.7 and cfg.coupling == 1j and cfg.seed == 4
    assert cfg.replace(alpha=1.6).alpha == 1.6
    assert cfg.as_dict()["coupling"] == [0.0, 1.0]
    p.write_text(json.dumps({"kind": "simulate", "nope": 1}))
    with pytest.raises(ValidationError):
        load_config(p)
    p.write_text("[1, 2]")
    with pytest.raises(ValidationError):
        load_config(p)


def test_config_rejects_bad_fields():
    for kw in ({"kind": "x"}, {"alpha": 1.0}, {"lam": 0.2}, {"scheme": "euler"},
               {"dts": (0.1,)}, {"t_lo": 5.0, "t_hi": 1.0}, {"coupling": [1, 2, 3]}):
        with pytest.raises(ValidationError):
            ExperimentConfig(**kw)
