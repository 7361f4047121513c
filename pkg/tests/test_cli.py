import csv

import numpy as np
import pytest

from ntn_handover.channel import ChannelConfig
from ntn_handover.cli import (
    EVENTS_HEADER,
    RESULTS_HEADER,
    TRACE_HEADER,
    emit_results,
    main,
    pathloss_trace,
)
from ntn_handover.geometry import ConstellationConfig
from ntn_handover.monitor import MetricsRecord

TINY = ["--drops", "1", "--users", "4"]


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestResultsCsv:
    def test_header_only_for_no_records(self, tmp_path):
        out = tmp_path / "r.csv"
        emit_results([], out)
        assert out.read_text() == ",".join(RESULTS_HEADER) + "\n"

    def test_row_format_and_order(self, tmp_path):
        recs = [
            MetricsRecord("timer", 6.45, 0, "mobile", 0, 8, 0, 0, 1),
            MetricsRecord("measurement", 2.0, 40, "static", 0, 10, 3, 1, 1),
            MetricsRecord("timer", 6.45, 0, "static", 0, 8, 0, 0, 1),
            MetricsRecord("measurement", 2.0, 20, "static", 0, 12, 4, 0, 1),
        ]
        out = tmp_path / "r.csv"
        emit_results(recs, out)
        rows = read_rows(out)
        assert rows[1:] == [
            ["measurement", "2", "20", "static", "0", "12", "4", "0"],
            ["measurement", "2", "40", "static", "0", "10", "3", "1"],
            ["timer", "6.45", "", "static", "0", "8", "0", "0"],
            ["timer", "6.45", "", "mobile", "0", "8", "0", "0"],
        ]

    def test_io_error_names_path(self, tmp_path):
        bad = tmp_path / "missing" / "r.csv"
        with pytest.raises(OSError, match="missing"):
            emit_results([], bad)


class TestTrace:
    def test_values(self):
        tr = pathloss_trace(ChannelConfig(), ConstellationConfig(), samples=26)
        assert tr.shape == (26, 3)
        assert tr[0, 1] == 90.0
        assert tr[0, 2] == pytest.approx(162.3, abs=0.05)
        assert tr[-1, 0] == 125_000
        assert np.all(np.diff(tr[:, 2]) >= 0)

    def test_cli_trace_file(self, tmp_path):
        trace = tmp_path / "pl.csv"
        code = main(TINY + ["--mechanism", "timer", "--set", "sweep.t_off_s=6.5", "--set", "sweep.mobility=static",
                            "--out", str(tmp_path / "r.csv"), "--trace-pathloss", str(trace),
                            "--set", "output.trace_samples=40"])
        assert code == 0
        rows = read_rows(trace)
        assert tuple(rows[0]) == TRACE_HEADER
        assert len(rows) == 41


class TestMain:
    def test_timer_sweep(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(TINY + ["--default-paper", "--mechanism", "timer", "--set", "sweep.mobility=static",
                            "--out", str(out)]) == 0
        rows = read_rows(out)[1:]
        assert [r[1] for r in rows] == ["6.4", "6.45", "6.5", "6.55", "6.6", "6.65", "6.7", "6.75", "6.8"]
        assert all(r[6] == "0" and r[7] == "0" for r in rows)

    def test_measurement_grid_rows(self, tmp_path):
        out = tmp_path / "r.csv"
        assert main(["--drops", "1", "--users", "1", "--mechanism", "measurement",
                     "--set", "scenario.step_ms=20", "--out", str(out)]) == 0
        rows = read_rows(out)[1:]
        assert len(rows) == 40
        keys = [(float(r[1]), int(r[2]), r[3] == "mobile") for r in rows]
        assert keys == sorted(keys)

    def test_byte_identical(self, tmp_path):
        args = TINY + ["--mechanism", "measurement,distance", "--set", "sweep.hys_plus_off_db=1",
                       "--set", "sweep.ttt_ms=20", "--set", "sweep.d_off_km=2"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        ea, eb = tmp_path / "ea.csv", tmp_path / "eb.csv"
        assert main(args + ["--out", str(a), "--events", str(ea)]) == 0
        assert main(args + ["--out", str(b), "--events", str(eb)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert ea.read_bytes() == eb.read_bytes()
        assert tuple(read_rows(ea)[0]) == EVENTS_HEADER

    def test_stdout(self, capsys):
        assert main(TINY + ["--mechanism", "timer", "--set", "sweep.t_off_s=6.5",
                            "--set", "sweep.mobility=static", "--out", "-"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines == [",".join(RESULTS_HEADER), "timer,6.5,,static,0,8,0,0"]

    def test_dump_config_round_trips(self, tmp_path, capsys):
        assert main(["--default-paper", "--dump-config"]) == 0
        text = capsys.readouterr().out
        p = tmp_path / "c.ini"
        p.write_text(text)
        assert main(["--config", str(p), "--dump-config"]) == 0
        assert capsys.readouterr().out == text

    @pytest.mark.parametrize(
        "args",
        [
            ["--set", "scenario.q_in_db=-9"],
            ["--set", "sweep.bogus=1"],
            ["--config", "/nonexistent/c.ini"],
            ["--set", "noseparator"],
            ["--mechanism", "handshake"],
        ],
    )
    def test_config_errors_exit_1(self, args, capsys):
        assert main(args + ["--dump-config"]) == 1
        assert "config error" in capsys.readouterr().err

    def test_unwritable_output_exits_2(self, tmp_path, capsys):
        code = main(TINY + ["--mechanism", "timer", "--out", str(tmp_path / "no" / "r.csv")])
        assert code == 2
        assert "no" in capsys.readouterr().err
