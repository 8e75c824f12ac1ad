import io
import json
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qcong import cli
from qcong.congruence import KnownCheck, SturmCertificate, certify
from qcong.series import load_text


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def call_json(*argv):
    code, out, err = call(*argv, "--json")
    return code, json.loads(out), err


def test_expand_text_and_json_agree():
    code, text, _ = call("expand", "1^24", "--terms", "4")
    assert code == 0
    assert text.splitlines()[0] == "# offset24=24"
    s = load_text(text)
    code, data, _ = call_json("expand", "1^24", "--terms", "4")
    assert data["coeffs"] == s.tolist() == [1, -24, 252, -1472]
    assert data["offset24"] == 24 and data["exit_code"] == 0


def test_expand_mod():
    code, data, _ = call_json("expand", '{"factors": [[3, 1], [2, -1], [1, -1]]}', "--terms", "5", "--mod", "5")
    assert code == 0 and data["coeffs"] == [1, 1, 3, 3, 3] and data["modulus"] == 5


def test_tbar_brute_check():
    code, text, _ = call("tbar", "--terms", "41", "--brute-check", "25")
    assert code == 0 and "agrees" in text.splitlines()[-1]


def test_tbar_brute_check_injected(monkeypatch):
    monkeypatch.setattr(cli, "tbar_bruteforce", lambda n: 99 if n == 7 else cli.tbar_series(n + 1)[n])
    code, _, err = call("tbar", "--terms", "20", "--brute-check", "10")
    assert code == 1 and "n=7" in err


def test_scan():
    code, text, _ = call("scan", "--mod", "3", "--terms", "10000")
    assert code == 0 and text.splitlines()[-1] == "surviving residues: [2]"
    code, data, _ = call_json("scan", "--mod", "5", "--terms", "2000", "--eta", "1^-1")
    assert data["survivors"] == [4] and len(data["candidates"]) == 5


def test_threads_env(monkeypatch):
    monkeypatch.setenv("QCONG_THREADS", "3")
    assert cli.parse_config(["cosets", "2"]).threads == 3
    assert cli.parse_config(["cosets", "2", "--threads", "2"]).threads == 2
    monkeypatch.setenv("QCONG_THREADS", "many")
    assert call("cosets", "2")[0] == 2
    monkeypatch.delenv("QCONG_THREADS")
    assert cli.parse_config(["cosets", "2"]).threads >= 1


def test_scan_thread_independent():
    a = call_json("scan", "--mod", "7", "--terms", "3000", "--threads", "1")[1]
    b = call_json("scan", "--mod", "7", "--terms", "3000", "--threads", "4")[1]
    assert a == b


def test_certify_and_out(tmp_path):
    path = tmp_path / "c.json"
    code, text, _ = call("certify", "mod5-40", "--out", str(path))
    assert code == 0 and "Sturm bound 2161" in text and "verified: true" in text
    cert = SturmCertificate.from_json(json.loads(path.read_text()))
    assert cert.verified and cert.sturm_bound == 2161 and cert.terms_computed >= 172880
    code, data, _ = call_json("certify", "mod5-60")
    assert code == 0 and data["sturm_bound"] == 2593 and data["verified"] is True


def test_certify_injected_failure(monkeypatch):
    def broken(kind, extra=0):
        good = certify(kind, check_upto=5)
        return SturmCertificate(**{**good.__dict__, "verified": False, "first_failure": 3})

    monkeypatch.setattr(cli, "certify", broken)
    code, out, err = call("certify", "mod5-40")
    assert code == 1 and "n=3" in err and "verified: false" in out


def test_exclude():
    code, text, _ = call("exclude", "--lambda", "3", "--mu", "1,2", "--max-prime", "40")
    assert code == 0 and "residual (scan or citation): [2, 3, 5]" in text
    code, data, _ = call_json("exclude", "--lambda", "3", "--mu", "1,2")
    assert data["all_traces_pass"] and data["residual"] == [2, 3, 5]
    assert call("exclude", "--lambda", "3", "--mu", "3")[0] == 2


def test_exclude_injected_failure(monkeypatch):
    real = cli.exclusion_report

    def spoiled(*a, **k):
        rep = real(*a, **k)
        tr = rep.traces[0]
        rep.traces[0] = type(tr)(**{**tr.__dict__, "alpha_ok": False})
        return rep

    monkeypatch.setattr(cli, "exclusion_report", spoiled)
    code, _, err = call("exclude", "--lambda", "3", "--mu", "1,2", "--max-prime", "20")
    assert code == 1 and "ell=7" in err


def test_fell():
    code, text, _ = call("fell", "--lambda", "3", "--mu", "1,2", "--mod", "7", "--terms", "800")
    assert code == 0
    assert "weight=612 level=6 leading exponent=49" in text
    code, data, _ = call_json("fell", "--lambda", "3", "--mu", "1,2", "--mod", "7", "--terms", "800")
    assert data["theta_witness"] == 50 and data["F"]["t"] == 2
    assert all(r["agree"] for r in data["residue_table"]["rows"])


def test_fell_reports_transfer_mismatch():
    code, _, err = call("fell", "--lambda", "", "--mu", "1", "--mod", "5", "--terms", "1505")
    assert code == 1 and "disagrees" in err


def test_fell_no_witness():
    code, _, err = call("fell", "--lambda", "3", "--mu", "1,2", "--mod", "7", "--terms", "45")
    assert code == 1 and "vanishes" in err


def test_filtration():
    code, text, _ = call("filtration", "--level1", "--weight", "12", "--mod", "5", "--delta-power", "1")
    assert code == 0 and text.startswith("w_5(1^24) = 12")
    code, data, _ = call_json("filtration", "--weight", "12", "--mod", "5", "--delta-power", "1", "--theta", "1")
    assert data["w"] == 18
    code, data, _ = call_json("filtration", "--weight", "12", "--mod", "7", "--eta", "1^24")
    assert data["w"] == 12
    assert call("filtration", "--weight", "14", "--mod", "5", "--delta-power", "1")[0] == 1
    assert call("filtration", "--weight", "12", "--mod", "5", "--eta", "1^1")[0] == 2


def test_cosets():
    code, text, _ = call("cosets", "6")
    assert code == 0 and text.startswith("24 coset representatives")
    code, data, _ = call_json("cosets", "6")
    assert data["count"] == 24 and data["sign_classes"] == 12 and len(data["matrices"]) == 24
    assert call("cosets", "0")[0] == 2


def test_verify_known():
    code, text, _ = call("verify", "known", "--terms", "5001")
    assert code == 0 and text.count("PASS") == 3


def test_verify_injected_failure(monkeypatch):
    monkeypatch.setattr(cli, "verify_mod2", lambda L: KnownCheck("mod2", "s", 1, [17]))
    code, out, err = call("verify", "known", "--terms", "101")
    assert code == 1 and "n=17" in err and "FAIL" in out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["expand", "3^x", "--terms", "3"],
        ["expand", "1", "--terms", "0"],
        ["scan", "--mod", "4", "--terms", "10"],
        ["scan", "--terms", "10"],
        ["tbar", "--terms", "5", "--unknown"],
        ["tbar", "--terms", "5", "--brute-check", "9"],
        ["certify", "mod7"],
        ["verify", "other", "--terms", "5"],
        ["exclude", "--lambda", "a", "--mu", "1"],
        ["fell", "--lambda", "3", "--mu", "1,2", "--mod", "3", "--terms", "50"],
    ],
)
def test_usage_errors(argv):
    code, out, err = call(*argv)
    assert code == 2 and "usage error" in err and out == ""


@given(st.dictionaries(st.integers(1, 9), st.integers(-4, 4).filter(bool), min_size=1, max_size=3))
def test_json_round_trip_expand(factors):
    expr = " * ".join(f"{d}^{r}" for d, r in factors.items())
    code, data, _ = call_json("expand", expr, "--terms", "12", "--mod", "7")
    assert code == 0
    again = json.loads(json.dumps(data))
    code2, data2, _ = call_json("expand", json.dumps({"factors": again["eta_factors"]}), "--terms", "12", "--mod", "7")
    assert data2 == data


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "qcong", "cosets", "6", "--json"], capture_output=True, text=True
    )
    assert res.returncode == 0 and json.loads(res.stdout)["count"] == 24
    res = subprocess.run([sys.executable, "-m", "qcong", "nope"], capture_output=True, text=True)
    assert res.returncode == 2
