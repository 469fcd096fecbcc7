import xml.etree.ElementTree as ET

import numpy as np
import pytest

from paretoplan.bench import CSV_HEADER, parse_report_csv
from paretoplan.cli import main, read_waypoints, write_waypoints
from paretoplan.exceptions import IngestionError
from paretoplan.workspace import (
    ElevationLayer,
    OccupancyGrid,
    RiskField,
    SolarModel,
    Workspace,
    load_workspace,
    save_workspace,
)


@pytest.fixture
def workspace_file(tmp_path):
    out = tmp_path / "w.json"
    assert main(["generate", "--seed", "42", "--size", "30", "--coverage", "0.2", "--out", str(out)]) == 0
    return out


@pytest.fixture
def sealed_file(tmp_path):
    cells = np.zeros((12, 12), dtype=np.uint8)
    cells[6, :] = 1
    ws = Workspace(OccupancyGrid(cells), ElevationLayer(np.zeros((12, 12))), RiskField((3, 3)), SolarModel(),
                   (0, 0), (11, 11))
    out = tmp_path / "sealed.json"
    save_workspace(ws, out)
    return out


class TestGenerate:
    def test_default_scale(self, tmp_path, capsys):
        out = tmp_path / "w.json"
        assert main(["generate", "--seed", "42", "--size", "100", "--coverage", "0.23", "--out", str(out)]) == 0
        ws = load_workspace(out)
        assert ws.shape == (100, 100)
        assert 0.18 <= ws.grid.coverage() <= 0.28
        assert "coverage" in capsys.readouterr().out

    def test_missing_out(self, capsys):
        assert main(["generate", "--seed", "1"]) == 2

    def test_coverage_out_of_range(self, tmp_path, capsys):
        assert main(["generate", "--coverage", "0.9", "--out", str(tmp_path / "w.json")]) == 2

    def test_start_goal_override(self, tmp_path):
        out = tmp_path / "w.json"
        assert main(["generate", "--size", "20", "--start", "0,19", "--goal", "19,0", "--out", str(out)]) == 0
        ws = load_workspace(out)
        assert (ws.start, ws.goal) == ((0, 19), (19, 0))

    def test_unwritable(self, tmp_path, capsys):
        assert main(["generate", "--size", "20", "--out", str(tmp_path / "no" / "w.json")]) == 3

    def test_missing_terrain(self, tmp_path, capsys):
        code = main(["generate", "--size", "20", "--terrain", str(tmp_path / "t.pgm"), "--out", str(tmp_path / "w")])
        assert code == 3


class TestPlan:
    def test_metrics_line(self, workspace_file, tmp_path, capsys):
        out = tmp_path / "p.csv"
        assert main(["plan", "--workspace", str(workspace_file), "--algo", "dstar-po", "--out", str(out)]) == 0
        header, values = capsys.readouterr().out.splitlines()
        assert len(header.split(",")) == 5 and len(values.split(",")) == 5
        float_values = [float(v) for v in values.split(",")]
        waypoints = read_waypoints(out)
        assert waypoints[0] == (0, 0) and waypoints[-1] == (29, 29)
        assert float_values[0] >= 29 * 2 ** 0.5

    def test_default_output_name(self, workspace_file, capsys):
        assert main(["plan", "--workspace", str(workspace_file), "--algo", "astar"]) == 0
        assert (workspace_file.parent / "w_astar.csv").exists()

    def test_deterministic(self, workspace_file, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert main(["plan", "--workspace", str(workspace_file), "--out", str(out)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_trace(self, workspace_file, tmp_path, capsys):
        trace = tmp_path / "t.ndjson"
        assert main(["plan", "--workspace", str(workspace_file), "--algo", "astar", "--out",
                     str(tmp_path / "p.csv"), "--trace", str(trace)]) == 0
        assert trace.read_text().count("\n") > 10

    def test_sealed(self, sealed_file, tmp_path, capsys):
        assert main(["plan", "--workspace", str(sealed_file), "--out", str(tmp_path / "p.csv")]) == 4
        assert "no path" in capsys.readouterr().err

    def test_missing_workspace(self, tmp_path, capsys):
        assert main(["plan", "--workspace", str(tmp_path / "nope.json")]) == 3

    def test_bad_algo(self, workspace_file, capsys):
        assert main(["plan", "--workspace", str(workspace_file), "--algo", "bfs"]) == 2

    def test_bad_selector(self, workspace_file, capsys):
        assert main(["plan", "--workspace", str(workspace_file), "--selector", "single"]) == 2

    def test_verbose_after_subcommand(self, workspace_file, tmp_path, capsys):
        code = main(["plan", "--workspace", str(workspace_file), "--out", str(tmp_path / "p.csv"), "-v"])
        assert code == 0
        assert "INFO" in capsys.readouterr().err


class TestBench:
    def test_three_rows(self, tmp_path, capsys):
        out = tmp_path / "r.csv"
        code = main(["bench", "--runs", "2", "--seed", "1", "--size", "20", "--algos", "astar,dstar,dstar-po",
                     "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert text.splitlines()[0] == ",".join(CSV_HEADER)
        assert [r["algorithm"] for r in parse_report_csv(text)] == ["astar", "dstar", "dstar_po"]

    def test_stdout_markdown(self, capsys):
        assert main(["-q", "bench", "--runs", "1", "--size", "15", "--format", "markdown", "--no-timing"]) == 0
        assert capsys.readouterr().out.startswith("| Algorithm |")

    def test_no_timing_deterministic(self, capsys):
        args = ["bench", "--runs", "2", "--size", "15", "--no-timing", "--per-run"]
        assert main(args) == 0
        first = capsys.readouterr().out
        assert main(args) == 0
        assert capsys.readouterr().out == first

    def test_zero_runs(self, capsys):
        assert main(["bench", "--runs", "0"]) == 2

    def test_unknown_algo(self, capsys):
        assert main(["bench", "--algos", "astar,bfs"]) == 2

    def test_unwritable(self, tmp_path, capsys):
        assert main(["bench", "--runs", "1", "--size", "12", "--out", str(tmp_path / "no" / "r.csv")]) == 3


class TestRender:
    def test_round_trip(self, workspace_file, tmp_path, capsys):
        paths = []
        for algo in ("astar", "dstar", "dstar-po"):
            out = tmp_path / f"{algo}.csv"
            assert main(["plan", "--workspace", str(workspace_file), "--algo", algo, "--out", str(out)]) == 0
            paths += ["--path", f"{out}:{algo}"]
        svg = tmp_path / "fig.svg"
        assert main(["render", "--workspace", str(workspace_file), *paths, "--out", str(svg)]) == 0
        root = ET.parse(svg).getroot()
        assert len(root.findall(".//{http://www.w3.org/2000/svg}polyline")) == 3
        pgm = tmp_path / "fig.pgm"
        assert main(["render", "--workspace", str(workspace_file), *paths, "--layer", "risk",
                     "--out", str(pgm)]) == 0
        assert pgm.read_bytes().startswith(b"P5\n180 180\n255\n")

    def test_layer_only(self, workspace_file, tmp_path, capsys):
        out = tmp_path / "bare.pgm"
        assert main(["render", "--workspace", str(workspace_file), "--scale", "1", "--out", str(out)]) == 0
        assert len(out.read_bytes()) == len(b"P5\n30 30\n255\n") + 900

    def test_missing_path_file(self, workspace_file, tmp_path, capsys):
        code = main(["render", "--workspace", str(workspace_file), "--path", str(tmp_path / "x.csv"),
                     "--out", str(tmp_path / "f.svg")])
        assert code == 3

    def test_unknown_suffix(self, workspace_file, tmp_path, capsys):
        assert main(["render", "--workspace", str(workspace_file), "--out", str(tmp_path / "f.png")]) == 2


class TestWaypointCsv:
    def test_round_trip(self, tmp_path):
        out = tmp_path / "p.csv"
        write_waypoints([(0, 0), (1, 1), (1, 2)], out)
        assert out.read_text() == "step,row,col\n0,0,0\n1,1,1\n2,1,2\n"
        assert read_waypoints(out) == [(0, 0), (1, 1), (1, 2)]

    @pytest.mark.parametrize("text", ["row,col\n0,0\n", "step,row,col\n0,0,x\n", "step,row,col\n1,0,0\n", ""])
    def test_rejects(self, tmp_path, text):
        out = tmp_path / "p.csv"
        out.write_text(text)
        with pytest.raises(IngestionError):
            read_waypoints(out)
