"""End-to-end checks of the command line front end.

Everything goes through cli(argv) in-process so the tests see real exit
codes and real stdout without paying for an interpreter per case; one
test at the bottom exercises the installed console script.
"""

import json
import shutil
import subprocess

import pytest

from effss.cli import UsageError, _parse_range, cli
from effss.objects import spec_from_dict, spec_to_dict


def run_cli(capsys, *argv):
    code = cli(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- flag parsing ----------------------------------------------------------


def test_parse_range_forms():
    assert _parse_range("3", "stem") == (3, 3)
    assert _parse_range("0..24", "stem") == (0, 24)
    assert _parse_range("-2..5", "stem") == (-2, 5)
    assert _parse_range("1..inf", "page", inf_ok=True) == (1, None)
    assert _parse_range("inf", "page", inf_ok=True) == (1, None)


def test_parse_range_rejects_garbage():
    with pytest.raises(UsageError):
        _parse_range("x..y", "stem")
    with pytest.raises(UsageError):
        _parse_range("1..inf", "stem")  # inf only where a page makes sense
    with pytest.raises(UsageError):
        _parse_range("1..2..3", "stem")


def test_malformed_flags_exit_2(capsys):
    for argv in (
        ["compute", "--object", "bogus"],
        ["compute", "--object", "ko_C", "--pages", "nonsense"],
        ["compute", "--object", "ko_C", "--stems", "5..1"],
        ["chart", "--object", "ko_C", "--page", "soon"],
        ["query", "--object", "ko_C", "--stem", "3"],  # missing --weight
        ["verify", "--suite", "no-such-suite"],
        ["frobnicate"],
    ):
        code, _out, err = run_cli(capsys, *argv)
        assert code == 2, argv
        assert "usage error" in err


# -- compute ---------------------------------------------------------------


SMALL = ["--stems", "0..8", "--filtrations", "0..6", "--weights=-4..8"]


def test_compute_dumps_requested_pages(capsys):
    code, out, _ = run_cli(capsys, "compute", "--object", "ko_C",
                           "--pages", "1..2", *SMALL)
    assert code == 0
    assert out.startswith("# object ko_C, window s 0..8 f 0..6 w -4..8\n")
    assert "page 1\n" in out and "page 2\n" in out
    assert "page inf" not in out
    assert "  (0,0,0)  Z  1\n" in out


def test_compute_inf_reaches_the_last_page(capsys):
    code, out, _ = run_cli(capsys, "compute", "--object", "ko_C",
                           "--pages", "1..inf", *SMALL)
    assert code == 0
    assert "page inf\n" in out
    # the index-two class survives where the full integral one does not
    assert "2*v2" in out


def test_compute_writes_file_when_asked(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "compute", "--object", "ko_C",
                           "--pages", "1..1", *SMALL,
                           "--out", "dump.txt", "--outdir", str(tmp_path))
    assert code == 0
    path = tmp_path / "dump.txt"
    assert out.strip() == str(path)
    assert path.read_text().startswith("# object ko_C")


# -- chart -----------------------------------------------------------------


def test_chart_writes_svg_and_sidecar(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("EFFSS_OUTDIR", str(tmp_path))
    code, out, _ = run_cli(capsys, "chart", "--object", "ko_C",
                           "--stems", "0..8")
    assert code == 0
    svg, tsv = out.strip().split("\n")
    assert svg == str(tmp_path / "ko_C.svg")
    assert tsv == str(tmp_path / "ko_C.tsv")
    text = (tmp_path / "ko_C.svg").read_text()
    assert text.startswith("<svg") and text.rstrip().endswith("</svg>")
    assert (tmp_path / "ko_C.tsv").read_text().count("\n") > 5


def test_chart_residue_class_names_files(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "chart", "--object", "ko_C",
                           "--stems", "0..8", "--residue", "0",
                           "--modulus", "2", "--outdir", str(tmp_path))
    assert code == 0
    assert (tmp_path / "ko_C_c0m2.svg").exists()
    assert (tmp_path / "ko_C_c0m2.tsv").exists()


# -- query -----------------------------------------------------------------


def test_query_image_of_j_spot(capsys):
    code, out, _ = run_cli(capsys, "query", "--object", "L_C",
                           "--stem", "7", "--weight", "4")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "Z/16, generator iv4"
    assert "  iv4: order 16, filtration 1, image part" in lines
    assert any(line.startswith("  provenance:") for line in lines)


def test_query_vanishing_coweight(capsys):
    # coweight 3 spots of the real connective object carry nothing
    code, out, _ = run_cli(capsys, "query", "--object", "ko",
                           "--stem", "5", "--weight", "2")
    assert code == 0
    assert out.strip() == "0"


# -- verify ----------------------------------------------------------------


def test_verify_single_suite(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "valuation")
    assert code == 0
    assert out.startswith("PASS valuation:")


# -- dump-presentation -----------------------------------------------------


def test_dump_presentation_round_trips(capsys):
    code, out, _ = run_cli(capsys, "dump-presentation", "--object", "ko")
    assert code == 0
    data = json.loads(out)
    assert data["name"] == "ko"
    assert sorted(g["name"] for g in data["generators"]) == [
        "h1", "rho", "tau2", "th1", "v2"]
    assert spec_to_dict(spec_from_dict(data)) == data


# -- console script --------------------------------------------------------


@pytest.mark.skipif(shutil.which("effss") is None,
                    reason="console script not on PATH")
def test_console_script_runs():
    proc = subprocess.run(["effss", "dump-presentation", "--object", "ko_C"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["name"] == "ko_C"
