import json
import math
import textwrap

import pytest

from entroscope import __version__
from entroscope.cli_report import (
    FORMATS,
    WORKERS_ENV,
    Report,
    _default_workers,
    emit,
    parse_report,
    run,
)
from entroscope.errors import DataError
from entroscope.guesswork import (
    expected_guesses,
    format_duration,
    format_guess_count,
    time_to_success,
)


RANKING = Report(
    "subset_ranking",
    {
        "columns": ["modality", "size", "h0", "h1", "h2", "hmin", "gap"],
        "rows": [["Acc.X+Acc.Y", 2, 8.0, 7.5, 7.0, 6.5, 1.0]],
    },
    {"dataset": "toy", "binning": "fd", "timestamp": "t", "version": __version__},
)


def test_report_validation():
    with pytest.raises(DataError, match="unknown report kind"):
        Report("mystery", {"columns": [], "rows": []})
    with pytest.raises(DataError, match="columns and rows"):
        Report("subset_ranking", {"rows": []})


def test_emit_rejects_unknown_format():
    with pytest.raises(DataError, match="unknown emission format"):
        emit(RANKING, "xml")


@pytest.mark.parametrize("format", FORMATS)
def test_emission_is_deterministic(format):
    assert emit(RANKING, format) == emit(RANKING, format)


def test_markdown_layout():
    lines = emit(RANKING, "markdown").decode().splitlines()
    assert lines[0] == "| Modality | # | H0 | H1 | H2 | Hmin | H1-Hmin |"
    assert lines[1] == "| --- | --- | --- | --- | --- | --- | --- |"
    assert lines[2] == "| Acc.X+Acc.Y | 2 | 8.000 | 7.500 | 7.000 | 6.500 | 1.000 |"
    assert lines[-1] == f"*dataset: toy, bins: fd, entroscope {__version__}*"


def test_markdown_none_renders_empty():
    report = Report(
        "single_sensor_table",
        {"columns": ["channel", "h1"], "rows": [["dead", None]]},
        {"timestamp": "t", "version": __version__},
    )
    lines = emit(report, "markdown").decode().splitlines()
    assert lines[2] == "| dead |  |"


def test_markdown_empty_rows_keeps_header():
    report = Report(
        "subset_ranking",
        {"columns": ["modality", "hmin"], "rows": []},
        {"dataset": "d", "binning": "8", "timestamp": "t", "version": __version__},
    )
    lines = emit(report, "markdown").decode().splitlines()
    assert lines[0] == "| Modality | Hmin |"
    assert lines[1].startswith("| ---")
    assert lines[2] == ""  # straight to the notes


def test_delimited_layout():
    text = emit(RANKING, "delimited").decode()
    assert text.splitlines() == [
        "modality,size,h0,h1,h2,hmin,gap",
        "Acc.X+Acc.Y,2,8.0,7.5,7.0,6.5,1.0",
    ]


def test_structured_round_trip():
    data = emit(RANKING, "structured")
    back = parse_report(data)
    assert back == RANKING
    # full precision survives, unlike the markdown display rounding
    assert back.payload["rows"][0][2] == 8.0


def test_parse_report_rejects_garbage():
    with pytest.raises(DataError, match="not a structured report"):
        parse_report(b"{not json")
    with pytest.raises(DataError, match="missing schema"):
        parse_report(json.dumps({"kind": "subset_ranking"}))


def test_default_workers_env(monkeypatch):
    monkeypatch.delenv(WORKERS_ENV, raising=False)
    assert _default_workers() == 1
    monkeypatch.setenv(WORKERS_ENV, "3")
    assert _default_workers() == 3
    monkeypatch.setenv(WORKERS_ENV, "0")
    assert _default_workers() == 1
    monkeypatch.setenv(WORKERS_ENV, "many")
    assert _default_workers() == 1


# ---------------------------------------------------------------------------
# end-to-end invocations

def test_exit_codes_for_usage_errors(capsys):
    assert run([]) == 1
    assert run(["no-such-command"]) == 1
    assert run(["single"]) == 1  # neither --manifest nor --synthetic
    assert run(["single", "--synthetic", "--bins", "banana"]) == 1
    assert run(["guesswork"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err


def test_exit_code_for_data_errors(tmp_path, capsys):
    assert run(["single", "--manifest", str(tmp_path / "absent.yaml")]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: x\n")
    assert run(["single", "--manifest", str(bad)]) == 2
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    capsys.readouterr()


def test_single_synthetic_markdown(capsys):
    assert run(["single", "--synthetic", "--rows", "2000"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("| Channel | Bins | H0 | H1 | H2 | Hmin |")
    assert "Acc.X" in out and "Gyro.Mag" in out


def test_out_file_and_structured(tmp_path, capsys):
    path = tmp_path / "report.json"
    code = run([
        "single", "--synthetic", "--rows", "2000",
        "--format", "structured", "--out", str(path),
    ])
    assert code == 0
    assert capsys.readouterr().out == ""
    report = parse_report(path.read_bytes())
    assert report.kind == "single_sensor_table"
    assert len(report.payload["rows"]) == 8
    assert report.metadata["version"] == __version__


def test_validate_two_channels_is_exact(tmp_path, capsys):
    path = tmp_path / "val.json"
    code = run([
        "validate", "--synthetic", "--rows", "4000",
        "--subset", "Acc.X,Acc.Y",
        "--format", "structured", "--out", str(path),
    ])
    assert code == 0
    capsys.readouterr()
    report = parse_report(path.read_bytes())
    assert report.payload["columns"] == ["order", "direct", "chowliu", "abs_error"]
    assert [row[0] for row in report.payload["rows"]] == ["H0", "H1", "H2", "Hmin"]
    # a two-channel tree IS the joint, so every order matches
    assert report.payload["mae"] < 1e-9
    assert report.payload["n"] == 2  # arity of the validated subset


def test_matrix_maps_nan_to_null(tmp_path, capsys):
    (tmp_path / "d.csv").write_text("v,c\n1,5\n2,5\n3,5\n4,5\n")
    (tmp_path / "m.yaml").write_text(textwrap.dedent("""\
        name: flat
        channels: [V, C]
        files:
          - path: d.csv
            columns: {v: V, c: C}
    """))
    path = tmp_path / "matrix.json"
    code = run([
        "matrix", "--manifest", str(tmp_path / "m.yaml"),
        "--kind", "pearson", "--format", "structured", "--out", str(path),
    ])
    assert code == 0
    capsys.readouterr()
    doc = json.loads(path.read_bytes())
    payload = doc["payload"]
    assert payload["columns"] == ["channel", "V", "C"]
    assert payload["rows"][0] == ["V", 1.0, None]
    assert payload["rows"][1] == ["C", None, 1.0]
    assert payload["missing"] == [
        {"a": "V", "b": "C", "reason": "undefined correlation"}
    ]


def test_topk_ranks_by_hmin(tmp_path, capsys):
    path = tmp_path / "topk.json"
    code = run([
        "topk", "--synthetic", "--rows", "2000", "--max-size", "2",
        "--k", "5", "--format", "structured", "--out", str(path),
    ])
    assert code == 0
    capsys.readouterr()
    report = parse_report(path.read_bytes())
    rows = report.payload["rows"]
    assert len(rows) == 5
    hmins = [row[5] for row in rows]
    assert hmins == sorted(hmins, reverse=True)
    assert all(row[1] == 2 for row in rows)


def test_means_curve(tmp_path, capsys):
    path = tmp_path / "means.json"
    code = run([
        "means", "--synthetic", "--rows", "2000", "--max-size", "3",
        "--format", "structured", "--out", str(path),
    ])
    assert code == 0
    capsys.readouterr()
    report = parse_report(path.read_bytes())
    sizes = [row[0] for row in report.payload["rows"]]
    counts = [row[1] for row in report.payload["rows"]]
    assert sizes == [2, 3]
    assert counts == [28, 56]  # C(8,2), C(8,3)


def test_sensitivity_grid(tmp_path, capsys):
    path = tmp_path / "sens.json"
    code = run([
        "sensitivity", "--synthetic", "--rows", "3000",
        "--subset", "Acc.X", "--grid", "4,16,64",
        "--format", "structured", "--out", str(path),
    ])
    assert code == 0
    capsys.readouterr()
    report = parse_report(path.read_bytes())
    rows = report.payload["rows"]
    assert [row[0] for row in rows] == [4, 16, 64]
    for row in rows:
        assert row[1] <= math.log2(row[0]) + 1e-9  # h0 bounded by bin count
    assert report.payload["fd_marker"] > 0
    assert report.payload["scott_marker"] > 0


def test_guesswork_manual_values(capsys):
    assert run(["guesswork", "--hmin", "17", "--rates", "1,1000"]) == 0
    out = capsys.readouterr().out
    assert "E[guesses]" in out
    assert "65,536" in out  # 2^16 expected guesses at hmin 17
    assert format_duration(time_to_success(17.0, 1.0)) in out
    assert format_duration(time_to_success(17.0, 1000.0)) in out


def test_guesswork_from_report(tmp_path, capsys):
    source = tmp_path / "ranking.json"
    source.write_bytes(emit(RANKING, "structured"))
    out_path = tmp_path / "gw.json"
    code = run([
        "guesswork", "--from-report", str(source), "--rates", "1",
        "--format", "structured", "--out", str(out_path),
    ])
    assert code == 0
    capsys.readouterr()
    report = parse_report(out_path.read_bytes())
    assert report.kind == "guesswork_table"
    assert report.payload["columns"] == ["hmin", "expected_guesses", "q1"]
    row = report.payload["rows"][0]
    assert row[0] == 6.5
    assert row[1] == format_guess_count(expected_guesses(6.5))
    assert report.metadata["dataset"] == "toy"


def test_guesswork_rejects_wrong_report_kind(tmp_path, capsys):
    wrong = Report(
        "guesswork_table",
        {"columns": ["hmin"], "rows": [[4.0]]},
        {"timestamp": "t", "version": __version__},
    )
    path = tmp_path / "wrong.json"
    path.write_bytes(emit(wrong, "structured"))
    assert run(["guesswork", "--from-report", str(path)]) == 2
    assert "subset_ranking" in capsys.readouterr().err


def test_synth_check(capsys):
    assert run(["synth-check", "--rows", "1500", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert out.count("\n") >= 10  # header + separator + 8 channels + notes
