import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from loqsim.dsl import SpecError, parse, serialize
from loqsim.runner import format_report, run

DATA = Path(__file__).parent / "data"

HOM = """modes 2
input 1 1
bs 0 1 0.5
herald 0=1 1=1
"""


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def test_parse_hom():
    spec = parse(HOM)
    assert spec.modes == 2
    assert spec.input_occupations == (1, 1)
    assert len(spec.elements) == 1 and spec.elements[0].kind == "bs"
    assert spec.herald == ((0, 1), (1, 1))
    assert spec.run_mode == "single"
    assert spec.emit == "json"


def test_comments_and_blank_lines():
    spec = parse("# header\n\nmodes 2  # trailing\ninput 0 1\n")
    assert spec.modes == 2 and spec.input_occupations == (0, 1)


def test_undeclared_index_located():
    with pytest.raises(SpecError) as err:
        parse("bs 0 5 0.5\nmodes 2\ninput 1 1\n")
    assert err.value.line == 1
    assert "mode 5" in err.value.message


def test_unknown_directive():
    with pytest.raises(SpecError) as err:
        parse("modes 2\nfrobnicate 1\n")
    assert err.value.line == 2 and err.value.col == 1


def test_arity_error():
    with pytest.raises(SpecError) as err:
        parse("modes 2\ninput 1 1\nbs 0 1\n")
    assert err.value.line == 3


def test_duplicate_herald_mode():
    with pytest.raises(SpecError):
        parse("modes 2\ninput 1 1\nherald 0=1 0=0\n")


def test_duplicate_run_mode():
    text = HOM + "sweep overlap from 0 to 1 steps 3\ntrials 10 seed 1\n"
    with pytest.raises(SpecError) as err:
        parse(text)
    assert "exclusive" in err.value.message


def test_gate_syntax_errors():
    with pytest.raises(SpecError):
        parse("modes 4\ninput 0 1 1 0\ngate klm_cnot control=q0 control=q1\n")
    with pytest.raises(SpecError):
        parse("modes 4\ninput 0 1 1 0\ngate swap control=q0 target=q1\n")
    with pytest.raises(SpecError):
        parse("modes 2\ninput 1 0\ngate klm_cnot control=q0 target=q1\n")


def test_unterminated_cluster():
    with pytest.raises(SpecError) as err:
        parse("cluster {\n  nodes 2\n")
    assert "unterminated" in err.value.message


def test_cluster_adapt_order():
    bad = """cluster {
  nodes 2
  edges 0-1
  measure 0 angle 10 adapt 1
  measure 1 angle 0
}
"""
    with pytest.raises(SpecError):
        parse(bad)


def test_parser_totality():
    junk = [
        "",
        "\x00\x01",
        "modes",
        "modes -3",
        "modes two",
        "input 1 1",
        "herald 0=x",
        "sweep overlap from a to b steps 2",
        "cluster {",
        "cluster { nodes 1 }",
        "}",
        "bs 0 1 2.0\nmodes 2\ninput 1 1",
        "emit yaml",
        "trials 0 seed 1",
        "measure 0 angle 1",
    ]
    for text in junk:
        try:
            parse(text)
        except SpecError:
            pass  # a located diagnostic is the only acceptable failure


def test_golden_corpus_round_trips():
    files = sorted(DATA.glob("*.lqs"))
    assert len(files) >= 10
    for path in files:
        first = parse(path.read_text())
        again = parse(serialize(first))
        assert again == first, path.name


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def test_run_hom_null():
    report = run(parse(HOM))
    assert report.columns == ["probability"]
    assert abs(report.rows[0][0]) < 1e-12


def test_run_overlap_sweep_matches_closed_form():
    spec = parse(HOM + "sweep overlap from 0 to 1 steps 11\n")
    report = run(spec)
    for x, p in report.rows:
        assert abs(p - (1.0 - x * x) / 2.0) < 1e-12


def test_run_gate_single():
    report = run(parse((DATA / "cnot_10.lqs").read_text()))
    row = report.rows[0]
    assert row[0] == "10"
    assert abs(row[1] - 1.0 / 16.0) < 1e-9
    out = json.loads(row[3])
    amps = [complex(re, im) for re, im in out["amps"]]
    assert abs(abs(amps[3]) - 1.0) < 1e-9  # |11>


def test_run_gate_reversed_roles():
    report = run(parse((DATA / "cnot_reversed.lqs").read_text()))
    row = report.rows[0]
    assert row[0] == "01"  # logical |01>: control q1 is 1
    assert abs(row[1] - 1.0 / 16.0) < 1e-9
    out = json.loads(row[3])
    amps = [complex(re, im) for re, im in out["amps"]]
    assert abs(abs(amps[3]) - 1.0) < 1e-9  # target q0 flips: |11>


def test_run_deterministic_csv():
    spec = parse((DATA / "sampling.lqs").read_text())
    a = format_report(run(spec), "csv")
    b = format_report(run(spec), "csv")
    assert a == b


def test_seed_override_changes_samples():
    spec = parse((DATA / "sampling.lqs").read_text())
    a = format_report(run(spec, seed=1), "csv")
    b = format_report(run(spec, seed=2), "csv")
    assert a != b


def test_csv_json_agreement():
    spec = parse((DATA / "hom_sweep.lqs").read_text())
    report = run(spec)
    payload = json.loads(format_report(report, "json"))

    text = format_report(report, "csv")
    main, agg = text.split("\n\n", 1)
    rows = list(csv.reader(io.StringIO(main)))
    assert rows[0] == payload["columns"]
    for csv_row, json_row in zip(rows[1:], payload["rows"]):
        for c, j in zip(csv_row, json_row):
            if isinstance(j, float):
                assert float(c) == j  # 17 significant digits: exact round trip
            else:
                assert c == str(j)
    agg_rows = {r[0]: r[1] for r in csv.reader(io.StringIO(agg)) if r}
    assert agg_rows["seed"] == str(payload["seed"])
    assert agg_rows["version"] == payload["aggregate"]["version"]


def test_all_corpus_files_run():
    for path in sorted(DATA.glob("*.lqs")):
        spec = parse(path.read_text())
        report = run(spec)
        assert report.rows, path.name
        # both encodings must always materialize
        format_report(report, "csv")
        format_report(report, "json")


def test_eta_sweep_scales_linearly():
    spec = parse((DATA / "eta_scan.lqs").read_text())
    report = run(spec)
    base = report.rows[-1][1]  # eta = 1
    for eta, p in report.rows:
        assert abs(p - eta * base) < 1e-12


def test_reflectivity_sweep_endpoints():
    spec = parse((DATA / "hom_reflectivity.lqs").read_text())
    report = run(spec)
    values = {round(r, 3): p for r, p in report.rows}
    assert abs(values[0.0] - 1.0) < 1e-12  # both photons transmit
    assert abs(values[0.5]) < 1e-12  # the interference null
    assert abs(values[1.0] - 1.0) < 1e-12  # both reflect


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def test_cli_run_exit_codes(tmp_path, capsys):
    from loqsim.cli import main

    good = tmp_path / "good.lqs"
    good.write_text(HOM)
    assert main(["run", str(good)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["rows"][0][0] == 0.0

    bad = tmp_path / "bad.lqs"
    bad.write_text("modes 2\ninput 1 1\nbs 0 9 0.5\n")
    assert main(["run", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err

    assert main(["run", str(tmp_path / "missing.lqs")]) == 1


def test_cli_out_file(tmp_path):
    from loqsim.cli import main

    spec = tmp_path / "hom.lqs"
    spec.write_text(HOM + "emit csv\n")
    out = tmp_path / "report.csv"
    assert main(["run", str(spec), "--out", str(out)]) == 0
    assert out.read_text().startswith("probability")


def test_cli_subcommands(tmp_path):
    from loqsim.cli import main

    out = tmp_path / "r.json"
    assert main(["hom", "--steps", "5", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["aggregate"]["photonic_null_probability"] == 0.0

    assert main(["cnot-herald", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    for row in data["rows"]:
        assert abs(row[1] - 1.0 / 16.0) < 1e-9

    assert main(["teleport-cnot", "--trials", "50", "--seed", "4", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["aggregate"]["min_overlap"] > 1 - 1e-10

    assert main(["cluster-demo", "--seed", "6", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["aggregate"]["oracle_overlap"] > 1 - 1e-10
