import csv
import io
import json

import pytest

from interfgeom.cli import (
    CSV_COLUMNS,
    REFINED_COLUMNS,
    Range,
    ScanConfig,
    main,
    parse_config,
    parse_range,
    render_csv,
    run_scan,
    scan_rows,
)
from interfgeom.errors import ConfigError


def test_parse_documented_invocation():
    cfg = parse_config("scan --model dirac --m -1:1:41 --t 0.1:1.0:10 --bz 201 --out scan.csv".split())
    assert cfg.model == "dirac" and cfg.bz_grid == 201 and cfg.out == "scan.csv"
    assert cfg.m_range == Range(-1.0, 1.0, 41) and cfg.t_range == Range(0.1, 1.0, 10)
    assert cfg.m_range.values()[20] == 0.0


def test_even_grid_is_rejected(capsys):
    with pytest.raises(ConfigError, match="bz_grid must be odd"):
        parse_config(["scan", "--bz", "200"])
    with pytest.raises(SystemExit) as exc:
        main(["scan", "--bz", "200"])
    assert exc.value.code != 0
    assert "bz_grid must be odd" in capsys.readouterr().err


def test_config_invariants():
    with pytest.raises(ConfigError):
        ScanConfig(t_range=Range(0.0, 1.0, 3))
    with pytest.raises(ConfigError):
        ScanConfig(bz_grid=1)
    with pytest.raises(ConfigError, match="steps"):
        parse_range("0:1:0", "m")
    with pytest.raises(ConfigError):
        parse_range("0:1", "m")
    assert Range(0.5, 0.5, 1).values() == [0.5]


def test_config_file_with_override(tmp_path):
    path = tmp_path / "scan.cfg"
    path.write_text("# scan settings\nmodel = dirac\nm = -1:1:5\nt = 0.1:1:4\nbz = 31\nemit_chern = yes\n")
    cfg = parse_config(["scan", "--config", str(path), "--t", "0.5:0.5:1"])
    assert cfg.t_range.values() == [0.5] and cfg.m_range.steps == 5
    assert cfg.bz_grid == 31 and cfg.emit_chern
    columns, rows = scan_rows(cfg)
    assert len(rows) == 5 and {r[1] for r in rows} == {0.5}


def test_config_file_unknown_key(tmp_path):
    path = tmp_path / "scan.cfg"
    path.write_text("bz = 31\ncolour = red\n")
    with pytest.raises(ConfigError, match="colour"):
        parse_config(["scan", "--config", str(path)])
    with pytest.raises(ConfigError):
        parse_config(["scan", "--config", str(tmp_path / "missing.cfg")])


def small_config(tmp_path, **kw):
    base = dict(m_range=Range(-1.0, 1.0, 3), t_range=Range(0.25, 1.0, 3), bz_grid=51,
                out=str(tmp_path / "scan.csv"))
    base.update(kw)
    return ScanConfig(**base)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_smoke_scan(tmp_path):
    cfg = small_config(tmp_path, json=str(tmp_path / "scan.json"))
    assert run_scan(cfg) == 0
    table = read_csv(cfg.out)
    assert table[0] == CSV_COLUMNS and len(table) == 10
    col = {c: i for i, c in enumerate(CSV_COLUMNS)}
    # M-major, then T
    assert [(float(r[0]), float(r[1])) for r in table[1:4]] == [(-1.0, 0.25), (-1.0, 0.625), (-1.0, 1.0)]
    for row in table[1:]:
        assert float(row[col["g_interf_total"]]) > 0 and float(row[col["g_bures_total"]]) > 0
    payload = json.loads((tmp_path / "scan.json").read_text())
    assert payload["format"] == 1 and len(payload["rows"]) == 9
    assert payload["rows"][4]["g_bures_total"] == float(table[5][col["g_bures_total"]])


def test_csv_round_trips_exactly(tmp_path):
    cfg = small_config(tmp_path)
    columns, rows = scan_rows(cfg)
    parsed = list(csv.reader(io.StringIO(render_csv(columns, rows))))[1:]
    for row, text in zip(rows, parsed):
        assert [float(x) for x in text] == [float(x) for x in row]


def test_chern_column(tmp_path):
    cfg = small_config(tmp_path, m_range=Range(-1.0, 3.0, 3), t_range=Range(1.0, 1.0, 1), emit_chern=True)
    assert run_scan(cfg) == 0
    table = read_csv(cfg.out)
    assert table[0][-1] == "chern"
    assert [int(r[-1]) for r in table[1:]] == [1, -1, 0]


def test_gapless_cells_are_in_band(tmp_path):
    cfg = small_config(tmp_path, m_range=Range(2.0, 2.0, 1), t_range=Range(1.0, 1.0, 1), emit_chern=True)
    assert run_scan(cfg) == 0
    row = read_csv(cfg.out)[1]
    assert row[CSV_COLUMNS.index("gapless_cells")] == "1" and row[-1] == ""


def test_convergence_pair_columns(tmp_path):
    cfg = small_config(tmp_path, emit_convergence_pair=True)
    columns, rows = scan_rows(cfg)
    assert columns[-3:] == REFINED_COLUMNS
    assert all(r[-3] == 103 for r in rows)


def test_identical_runs_are_byte_identical(tmp_path):
    a = small_config(tmp_path, out=str(tmp_path / "a.csv"), workers=1)
    b = small_config(tmp_path, out=str(tmp_path / "b.csv"), workers=3)
    assert run_scan(a) == 0 and run_scan(b) == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_svg_output_is_deterministic(tmp_path):
    pytest.importorskip("matplotlib")
    outputs = []
    for name in ("one", "two"):
        cfg = small_config(tmp_path, svg_dir=str(tmp_path / name))
        assert run_scan(cfg) == 0
        outputs.append({p.name: p.read_bytes() for p in (tmp_path / name).iterdir()})
    assert sorted(outputs[0]) == ["bures_heatmap.svg", "interf_heatmap.svg", "line_cuts.svg"]
    assert outputs[0] == outputs[1]


def test_failures_give_nonzero_exit(tmp_path, capsys):
    assert run_scan(small_config(tmp_path, model="nope")) != 0
    assert run_scan(small_config(tmp_path, out=str(tmp_path / "no" / "such" / "dir.csv"))) != 0
    assert "error" in capsys.readouterr().err


def test_main_writes_stdout(capsys):
    assert main(["scan", "--m", "1:1:1", "--t", "1:1:1", "--bz", "11"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split(",") == CSV_COLUMNS and len(out) == 2
