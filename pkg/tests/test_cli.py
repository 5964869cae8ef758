import json
from fractions import Fraction

import pytest

from spancorr import cli, report


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def payload(text):
    d = json.loads(text)
    d["provenance"].pop("timestamp")
    return d


def test_mst_exact_k4(capsys):
    code, out, _ = run(capsys, "mst", "exact", "--graph", "complete:4")
    assert code == 0
    r = payload(out)["result"]
    assert r["p_edge"] == ["1/2"] * 6
    assert Fraction(r["mean_sq_degree"]) == Fraction(79, 30)
    assert all(r["complete_host_identities"].values())


def test_ust_moments_kn(capsys):
    code, out, _ = run(capsys, "ust", "moments", "--graph", "complete:30")
    assert code == 0
    r = payload(out)["result"]
    assert r["mean_sq_degree"] == pytest.approx(5 - 11 / 30 + 6 / 900, abs=1e-10)


def test_ust_pair_and_identity(capsys):
    code, out, _ = run(capsys, "ust", "pair", "--graph", "complete:4", "--e", "0", "--f", "1")
    assert code == 0
    assert payload(out)["result"]["p_pair"] == pytest.approx(3 / 16, abs=1e-12)
    code, out, _ = run(capsys, "ust", "identity-check", "--graph", "petersen", "--samples", "200")
    assert code == 0
    assert "sampled" in payload(out)["result"]


def test_mst_lps(capsys):
    code, out, _ = run(capsys, "mst", "lps")
    assert code == 0
    assert Fraction(payload(out)["result"]["margin"]) == Fraction(311, 1587600)


def test_pwit_theta(capsys):
    code, out, _ = run(capsys, "pwit", "theta", "--lambda", "2")
    assert code == 0
    assert payload(out)["result"]["theta"] == pytest.approx(0.796812, abs=1e-6)


def test_polytope_alpha_check(capsys):
    code, out, _ = run(capsys, "polytope", "alpha-check", "--graph", "petersen")
    assert code == 0


def test_json_identical_across_threads(capsys):
    base = ("mst", "mc", "--graph", "complete:5", "--samples", "20000", "--seed", "3")
    _, a, _ = run(capsys, *base, "--threads", "1")
    _, b, _ = run(capsys, *base, "--threads", "3")
    da, db = payload(a), payload(b)
    da["provenance"].pop("command")
    db["provenance"].pop("command")
    assert da == db


def test_json_byte_identical_on_repeat(capsys):
    argv = ("ust", "mc", "--graph", "petersen", "--samples", "5000", "--seed", "1")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    strip = lambda s: "\n".join(line for line in s.splitlines() if '"timestamp"' not in line)
    assert strip(a) == strip(b)


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv(report.SEED_ENV, "17")
    code, out, _ = run(capsys, "pwit", "theta", "--lambda", "3")
    assert code == 0 and json.loads(out)["provenance"]["seed"] == 17


def test_csv_sweep(capsys):
    code, out, _ = run(capsys, "sharpness", "sweep", "--dmin", "5", "--dmax", "9", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("# ") and "seed=" in lines[0]
    assert lines[1].startswith("d,") and len(lines) == 5


def test_text_format(capsys):
    code, out, _ = run(capsys, "pwit", "theta", "--lambda", "2", "--format", "text")
    assert code == 0 and out.startswith("provenance:") and "result:" in out


def test_floats_have_17_digits():
    assert report.fmt_float(0.1) == "0.10000000000000001"


@pytest.mark.parametrize("argv,code", [
    (("ust", "moments", "--graph", "wheel:3"), 2),
    (("ust", "moments"), 2),
    (("nonsense",), 2),
    (("mst", "exact", "--graph", "complete:6"), 3),
    (("ust", "moments", "--graph", "cycle:5", "--threads", "0"), 2),
])
def test_exit_codes(capsys, argv, code):
    assert run(capsys, *argv)[0] == code


def test_verify_quick_exit_zero(capsys):
    code, out, _ = run(capsys, "verify", "all", "--quick", "--threads", "2")
    assert code == 0
    assert all(c["passed"] for c in payload(out)["result"]["criteria"])
