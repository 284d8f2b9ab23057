import csv

import numpy as np
import pytest

from conftest import small_config
from visclab.cli import main as cli_main
from visclab.harness import emit_plotdata, run_ladder, verify_run
from visclab.io import CorruptSnapshotError
from visclab.report import ESTIMATE_IDS


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    cfg = small_config(cells=100, snapshots=10, epsilons="0.1,0.05,0.025")
    out = tmp_path_factory.mktemp("tiny") / "run"
    result = run_ladder(cfg, outdir=out)
    return cfg, result


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_manifest_counts(tiny_run):
    cfg, result = tiny_run
    man = result.manifest
    assert sorted(man["estimates"].keys()) == sorted(ESTIMATE_IDS)
    assert len(man["estimates"]) == 9
    traj_dirs = {f.split("/")[0] for f in man["files"] if f.startswith("eps_")}
    assert len(traj_dirs) == len(cfg.ladder)
    assert any(f.startswith("reference/") for f in man["files"])
    for f in man["files"]:
        assert (result.outdir / f).exists(), f
    assert all(s["status"] == "ok" for s in man["stages"])


def test_diagnostics_columns(tiny_run):
    cfg, result = tiny_run
    rows = read_csv(result.outdir / "diagnostics.csv")
    assert list(rows[0].keys()) == ["epsilon", "entropy_id", "h1_norm_A",
                                    "measure_norm_M", "ut_l1", "dirac_metric",
                                    "divcurl_dev", "D_mean"]
    # one row per (member, entropy pair)
    assert len(rows) == len(cfg.ladder) * (1 + cfg.kruzkov_count)


def test_determinism_byte_identical(tiny_run, tmp_path):
    cfg, result = tiny_run
    rerun = run_ladder(cfg, outdir=tmp_path / "again")
    for name in ("diagnostics.csv", "convergence.csv", "estimates.csv"):
        assert (result.outdir / name).read_bytes() == \
            (tmp_path / "again" / name).read_bytes(), name
    idx_a = (result.outdir / "eps_0.05" / "index.csv").read_bytes()
    idx_b = (tmp_path / "again" / "eps_0.05" / "index.csv").read_bytes()
    assert idx_a == idx_b


def test_rerun_same_config_is_idempotent(tmp_path):
    cfg = small_config(cells=60, snapshots=4, epsilons="0.1,0.05",
                       young_window_snaps=5, young_window_cells=6)
    out = tmp_path / "run"
    first = run_ladder(cfg, outdir=out)
    second = run_ladder(cfg, outdir=out)  # same hash: overwrite silently
    assert second.outdir == first.outdir


def test_changed_config_requires_overwrite(tmp_path):
    cfg = small_config(cells=60, snapshots=4, epsilons="0.1,0.05",
                       young_window_snaps=5, young_window_cells=6)
    out = tmp_path / "run"
    run_ladder(cfg, outdir=out)
    import dataclasses
    changed = dataclasses.replace(cfg, cfl=0.35,
                                  raw_text=cfg.raw_text + "# tweak\n")
    with pytest.raises(RuntimeError, match="overwrite"):
        run_ladder(changed, outdir=out)
    res = run_ladder(changed, outdir=out, overwrite=True)
    assert res.manifest["config_sha256"] != ""


def test_verify_untouched_run(tiny_run):
    cfg, result = tiny_run
    rows, code, table = verify_run(result.outdir)
    assert code == result.exit_code
    verdicts = {r.estimate: True for r in rows}
    for r in rows:
        verdicts[r.estimate] &= r.passed
    assert verdicts == result.manifest["estimates"]


def test_verify_detects_corruption(tiny_run, tmp_path):
    cfg, result = tiny_run
    import shutil
    clone = tmp_path / "clone"
    shutil.copytree(result.outdir, clone)
    victim = clone / "eps_0.05" / "snap_0003.bin"
    data = np.fromfile(victim, dtype="<f8")
    data[7] = 9.0  # outside the recorded min/max range
    data.tofile(victim)
    with pytest.raises(CorruptSnapshotError, match="snap_0003.bin"):
        verify_run(clone)


def test_verify_missing_manifest(tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(FileNotFoundError, match="no manifest"):
        verify_run(empty)


def test_plotdata_counts(tiny_run):
    cfg, result = tiny_run
    paths = emit_plotdata(result.outdir)
    prof = read_csv(paths[0])
    groups = {(r["epsilon"], r["t"]) for r in prof}
    assert len(groups) == len(cfg.ladder) * 3
    metrics = read_csv(paths[1])
    per_eps = {}
    for r in metrics:
        per_eps.setdefault(r["epsilon"], 0)
        per_eps[r["epsilon"]] += 1
    counts = set(per_eps.values())
    assert len(counts) == 1  # same metric count for every member
    assert len(metrics) == len(cfg.ladder) * counts.pop()
    again = emit_plotdata(result.outdir)
    assert paths[0].read_bytes() == again[0].read_bytes()
    assert paths[1].read_bytes() == again[1].read_bytes()


def test_parallel_jobs_match_serial(tmp_path):
    cfg = small_config(cells=60, snapshots=4, epsilons="0.1,0.05",
                       young_window_snaps=5, young_window_cells=6)
    a = run_ladder(cfg, outdir=tmp_path / "serial", jobs=1)
    b = run_ladder(cfg, outdir=tmp_path / "parallel", jobs=2)
    for name in ("diagnostics.csv", "convergence.csv", "estimates.csv"):
        assert (tmp_path / "serial" / name).read_bytes() == \
            (tmp_path / "parallel" / name).read_bytes()


def test_zero_data_trivially_passes(tmp_path):
    cfg = small_config(cells=60, snapshots=4, epsilons="0.1,0.05",
                       young_window_snaps=5, young_window_cells=6)
    import dataclasses
    text = cfg.raw_text.replace("amplitude = 1.0", "amplitude = 0.0")
    from visclab.config import build_scenario
    zero_cfg = build_scenario(text)
    res = run_ladder(zero_cfg, outdir=tmp_path / "zero")
    assert res.exit_code == 0
    assert all(res.manifest["estimates"].values())
    rows = read_csv(res.outdir / "diagnostics.csv")
    assert all(float(r["h1_norm_A"]) == 0.0 for r in rows)
    assert all(float(r["ut_l1"]) == 0.0 for r in rows)


def test_cli_presets_and_run(tmp_path, capsys):
    assert cli_main(["presets"]) == 0
    out = capsys.readouterr().out
    assert "burgers" in out and "constant" in out and "bump" in out

    cfg = small_config(cells=60, snapshots=4, epsilons="0.1,0.05",
                       young_window_snaps=5, young_window_cells=6)
    cfgfile = tmp_path / "scenario.cfg"
    cfgfile.write_text(cfg.raw_text)
    code = cli_main(["run", "--config", str(cfgfile), "--out",
                     str(tmp_path / "cli_run")])
    out = capsys.readouterr().out
    assert code in (0, 1)
    assert "max_principle" in out
    assert cli_main(["verify", str(tmp_path / "cli_run")]) == code
    assert cli_main(["plotdata", str(tmp_path / "cli_run")]) == 0


def test_cli_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[grid]\ncells = 10\n")
    assert cli_main(["run", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "rejected" in err or "missing" in err
