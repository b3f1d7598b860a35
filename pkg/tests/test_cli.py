import json

import numpy as np
import pytest

from eislat import cli
from eislat.zlattice.enumerate import ResourceGuardError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == 0, err
    return json.loads(out)


def test_mass(capsys):
    rep = run_json(capsys, "mass", "--rank", "4")
    assert rep["mass"]["value"] == "1/155520"
    assert rep["mass"]["factored"] == "1 / 2^7*3^5*5"
    assert rep["c1_orthogonal"] == 8 and rep["c2_symplectic"] == 40
    rep = run_json(capsys, "mass", "--rank", "8")
    assert rep["mass"]["factored"] == "1 / 2^15*3^10*5^2"


def test_usage_errors(capsys):
    assert run(capsys, "mass", "--rank", "6")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "theta", "--label", "E9", "--bound", "2")[0] == 2
    assert run(capsys, "theta", "--label", "Lambda4")[0] == 2
    assert run(capsys, "mass", "--rank", "4", "--threads", "0")[0] == 2


def test_classify_small_ranks(capsys):
    rep = run_json(capsys, "classify", "--rank", "4")
    assert [c["unitary_order"] for c in rep["classes"]] == [155520]
    assert rep["mass_identity_holds"]
    rep = run_json(capsys, "classify", "--rank", "8")
    assert rep["classes"][0]["unitary_order"] == 2 * 155520 ** 2
    assert rep["mass_identity_holds"]


def test_theta_reports(capsys, tmp_path):
    rep = run_json(capsys, "theta", "--label", "12A2", "--degree", "1", "--bound", "4",
                   "--cache-dir", str(tmp_path))
    assert list(rep["coefficients"].values()) == [1, 72, 194832]
    assert (tmp_path / "12A2.theta1.b4.json").exists()
    rep = run_json(capsys, "theta", "--label", "Leech", "--degree", "1", "--bound", "8")
    assert list(rep["coefficients"].values()) == [1, 0, 196560, 16773120, 398034000]
    rep = run_json(capsys, "theta", "--label", "3E8", "--degree", "1", "--bound", "4")
    assert list(rep["coefficients"].values()) == [1, 720, 179280]


def test_cache_hit_reports_identical(capsys, tmp_path):
    args = ("build", "--label", "6D4", "--bound", "2", "--cache-dir", str(tmp_path))
    cold = run(capsys, *args)
    assert (tmp_path / "6D4.olattice.json").exists()
    warm = run(capsys, *args)
    assert cold[0] == warm[0] == 0 and cold[1] == warm[1]


def test_env_cache_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path))
    run_json(capsys, "build", "--label", "Lambda4")
    assert (tmp_path / "Lambda4.olattice.json").exists()


def test_short_vector_file(capsys, tmp_path):
    rep = run_json(capsys, "build", "--label", "Lambda4", "--bound", "4", "--cache-dir", str(tmp_path))
    assert rep["short_vector_counts"] == {"2": 240, "4": 2160}
    vecs, bound = cli.read_short_vectors(tmp_path / rep["short_vector_file"])
    assert bound == 4 and vecs.shape == (2400, 8)
    raw = (tmp_path / rep["short_vector_file"]).read_bytes()
    assert raw[:4] == b"EISV" and len(raw) == 20 + 2400 * 8 * 2


def test_corrupt_cache_is_verification_error(capsys, tmp_path):
    run_json(capsys, "build", "--label", "Lambda4", "--cache-dir", str(tmp_path))
    p = tmp_path / "Lambda4.olattice.json"
    d = json.loads(p.read_text())
    d["hgram"][0][0] = "4 + 0*w"
    p.write_text(json.dumps(d))
    assert run(capsys, "build", "--label", "Lambda4", "--cache-dir", str(tmp_path))[0] == 4


def test_guard_exit_code(capsys, monkeypatch):
    def boom(args):
        raise ResourceGuardError("budget")
    monkeypatch.setitem(cli.COMMANDS, "mass", boom)
    assert run(capsys, "mass", "--rank", "4")[0] == 3


def test_aut_and_formats(capsys):
    rep = run_json(capsys, "aut", "--label", "Lambda4")
    assert rep["unitary_order"] == 155520
    code, out, _ = run(capsys, "mass", "--rank", "4", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "key,value" and "mass.value,1/155520" in out
    code, out, _ = run(capsys, "mass", "--rank", "4")
    assert "mass.value: 1/155520" in out


def test_cuspcheck_j(capsys):
    rep = run_json(capsys, "cuspcheck", "--form", "J", "--bound", "16")
    assert rep["delta_constant"] == 72 and rep["proportional_to_delta"]
    assert rep["stated_constant"] == 720 and rep["stated_constant_matches"] is False


def test_threads_do_not_change_output(capsys):
    a = run(capsys, "theta", "--label", "Lambda4", "--degree", "2", "--bound", "4", "--threads", "1")
    b = run(capsys, "theta", "--label", "Lambda4", "--degree", "2", "--bound", "4", "--threads", "3")
    assert a[0] == b[0] == 0 and a[1] == b[1]
