import json
import math
import os

import numpy as np
import pytest

import cocyclelab as cl


def test_version_and_commands():
    assert cl.__version__
    assert "lyap" in cl.commands()
    assert "sweep" in cl.commands()


def test_groups():
    g = cl.make_group("Sp", "real", 4)
    assert g.lie_dim == 10
    assert len(cl.lie_basis(g)) == 10
    sl2 = cl.make_group("SL")
    assert cl.contains(sl2, np.array([[2.0, 1.0], [1.0, 1.0]]))
    assert not cl.contains(sl2, np.eye(2) * 2)
    su = cl.make_group("SU", "complex", 2, (1, 1))
    assert cl.contains(su, np.eye(2, dtype=complex))
    with pytest.raises(ValueError, match="even"):
        cl.make_group("Sp", "real", 3)


def test_constant_exponents():
    sl2 = cl.make_group("SL")
    lam = cl.constant_exponents(sl2, np.diag([2.0, 0.5]), base="fullshift", n=1000)
    assert abs(lam[0] - math.log(2)) < 1e-12
    assert abs(lam[1] + math.log(2)) < 1e-12
    cat = cl.constant_exponents(sl2, np.array([[2.0, 1.0], [1.0, 1.0]]), n=100000)
    assert abs(cat[0] - 0.9624236501) < 1e-6


def test_common_measure():
    c, s = math.cos(1.0), math.sin(1.0)
    rot = np.array([[c, -s], [s, c]])
    assert cl.common_invariant_measure(rot, rot)["verdict"] == "PossiblyCommon"
    r = cl.common_invariant_measure(np.diag([2.0, 0.5]), np.array([[1.25, 0.75], [0.75, 1.25]]))
    assert r["verdict"] == "NoCommonMeasure"


def test_run_writes_outputs(tmp_path):
    cfg = "[base]\nkind = fullshift\n[cocycle]\nform = constant\nvalue = 2 0; 0 0.5\n"
    r = cl.run("lyap", cfg, overrides=["params.n=500"], out=str(tmp_path))
    assert r["exit_code"] == 0, r["message"]
    csv = (tmp_path / "lyap.csv").read_text()
    assert csv.startswith("# schema=lyap/1\n")
    summary = json.loads(r["summary_json"])
    assert summary["results"]["points"][0]["n"] == 500
    assert abs(summary["results"]["points"][0]["exponents"][0] - math.log(2)) < 1e-12


def test_run_exit_codes(tmp_path):
    bad = cl.run("lyap", "[group]\nfamily = Sp\nd = 3\n[cocycle]\nform = identity\n", out=str(tmp_path))
    assert bad["exit_code"] == 2 and bad["error_kind"] == "config"
    refusal = cl.run(
        "disintegration",
        "[base]\nkind = fullshift\n[cocycle]\nform = constant\n"
        "value = 1.0512710963760241 0; 0 0.95122942450071402\n[params]\nlyap_n = 1000\n",
        out=str(tmp_path),
    )
    assert refusal["exit_code"] == 4


def test_threads_do_not_change_csv(tmp_path):
    cfg = "[cocycle]\nform = identity\n[params]\ntrials = 4\nn = 3000\nholder_samples = 10\n"
    a = cl.run("sweep", cfg, threads=1, out=str(tmp_path / "a"))
    b = cl.run("sweep", cfg, threads=3, out=str(tmp_path / "b"))
    assert a["exit_code"] == b["exit_code"] == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_selftest():
    cases = cl.selftest()
    assert len(cases) >= 20
    assert all(passed for _, passed, _ in cases)
    corrupted = cl.selftest(corrupt_tolerance=True)
    assert any(not passed for name, passed, _ in corrupted if name.startswith("membership"))
