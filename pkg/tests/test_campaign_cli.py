import csv
import io
import json

import pytest

from swapqkd.campaign import (
    CampaignSpec,
    aggregate_sessions,
    campaign_records,
    format_records,
    run_campaign,
    session_seed,
)
from swapqkd.cli import EXIT_ALL_ABORTED, EXIT_OK, EXIT_USAGE, main
from swapqkd.protocol import load_transcript


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_session_seed_is_stable_and_distinct():
    assert session_seed(5, 3) == session_seed(5, 3)
    seeds = {session_seed(5, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert session_seed(5, 0) != session_seed(6, 0)
    assert 0 <= session_seed(2**64 - 1, 7) < 2**64


def test_verify_exits_zero(capsys):
    assert main(["verify"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "swap phi+ x psi- on (2,3)" in out
    assert "xor law" in out


def test_run_honest_key_rate(tmp_path):
    out = tmp_path / "run.jsonl"
    code = main(["run", "--sessions", "20", "--rounds", "50", "--check-fraction", "0", "--out", str(out)])
    assert code == EXIT_OK
    records = read_jsonl(out)
    assert [r["record"] for r in records] == ["session"] * 20 + ["aggregate"]
    agg = records[-1]
    assert agg["key_rate"] == 6.0
    assert agg["abort_rate"] == 0.0
    assert all(r["keys_equal"] for r in records[:-1])
    assert all(r["schema"] == "swapqkd.campaign/1" for r in records)


def test_aggregate_recomputes_from_sessions(tmp_path):
    out = tmp_path / "a.jsonl"
    main(["attack", "--attack", "mitm", "--sessions", "12", "--rounds", "40", "--check-fraction", "0.3", "--out", str(out)])
    records = read_jsonl(out)
    spec = CampaignSpec(subcommand="attack", sessions=12, rounds=40, check_fraction=0.3, attack="mitm")
    assert aggregate_sessions(spec, records[:-1]) == records[-1]


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_outputs_are_byte_identical(tmp_path, fmt):
    args = ["attack", "--attack", "entangle", "--sessions", "10", "--rounds", "30", "--seed", "77", "--format", fmt]
    a, b = tmp_path / "a", tmp_path / "b"
    main([*args, "--out", str(a)])
    main([*args, "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_parallel_matches_serial(tmp_path):
    args = ["run", "--sessions", "8", "--rounds", "25", "--check-fraction", "0.2", "--seed", "4"]
    a, b = tmp_path / "a", tmp_path / "b"
    main([*args, "--out", str(a)])
    main([*args, "--parallel", "2", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_csv_has_header_and_rows(tmp_path):
    out = tmp_path / "r.csv"
    main(["run", "--sessions", "5", "--rounds", "10", "--format", "csv", "--out", str(out)])
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert len(rows) == 6
    assert rows[-1]["record"] == "aggregate"
    assert rows[0]["session"] == "0"


def test_all_aborted_exit_code(tmp_path):
    code = main(["attack", "--attack", "mitm", "--sessions", "5", "--rounds", "50",
                 "--check-fraction", "0.5", "--out", str(tmp_path / "x")])
    assert code == EXIT_ALL_ABORTED


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--check-fraction", "1.5"],
        ["run", "--sessions", "0"],
        ["run", "--attack", "bogus"],
        ["attack", "--attack", "none"],
        ["sweep", "--k", "1,-2"],
        ["run", "--overlap", "2"],
        ["frobnicate"],
    ],
)
def test_invalid_arguments_exit_3(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE


def test_sweep_table(tmp_path):
    out = tmp_path / "s.jsonl"
    code = main(["sweep", "--attack", "mitm", "--sessions", "20", "--rounds", "100",
                 "--check-fraction", "0", "--k", "0,1,4", "--out", str(out)])
    assert code == EXIT_OK
    rows = read_jsonl(out)
    assert [r["k"] for r in rows] == [0, 1, 4]
    assert rows[0]["empirical"] == 0.0 and rows[0]["analytic"] == 0.0
    assert rows[2]["analytic"] == pytest.approx(1 - 0.25**4)
    assert abs(rows[2]["empirical"] - rows[2]["analytic"]) < 0.03


def test_transcript_dump(tmp_path):
    out, tr = tmp_path / "o", tmp_path / "t.jsonl"
    main(["run", "--sessions", "3", "--rounds", "4", "--check-fraction", "0.5", "--out", str(out),
          "--dump-transcript", str(tr)])
    lines = [json.loads(line) for line in tr.read_text().splitlines()]
    assert {line["session"] for line in lines} == {0, 1, 2}
    assert all(line["schema"] == "swapqkd.message/1" for line in lines)
    session0 = "".join(line + "\n" for line in tr.read_text().splitlines() if json.loads(line)["session"] == 0)
    msgs = load_transcript(session0)
    assert sum(m.kind.value == "ResultAnnounce" for m in msgs) == 4


def test_format_records_csv_blank_for_none():
    text = format_records([{"a": 1, "b": None}, {"a": 2, "c": 3}], "csv")
    assert text.splitlines() == ["a,b,c", "1,,", "2,,3"]


def test_campaign_records_sweep_returns_table():
    spec = CampaignSpec(subcommand="sweep", sessions=2, rounds=16, attack="entangle", ks=(0, 2))
    stats, _ = run_campaign(spec)
    assert campaign_records(stats) == stats.detection_table
    assert len(stats.detection_table) == 2
