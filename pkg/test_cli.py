#!/usr/bin/env python3
"""
Command line front end: exit codes, file fan-out, determinism and figure data
"""
import io
import json
import sys
import tempfile
import warnings
from contextlib import redirect_stdout
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import numpy as np
from numpy.testing import assert_allclose

from jcm_lineshapes import main, parse_fields, parse_grid
from utils.jcm import __version__
from utils.jcm.analytic import lineshape_undriven
from utils.jcm.data_exporter import read_csv
from utils.jcm.errors import InvalidFieldSpec, InvalidGrid
from utils.jcm.model import Fock, Thermal


def run(*argv: str) -> int:
    return main(list(argv))


def test_grid_syntax():
    assert_allclose(parse_grid("0:15:4"), [0.0, 5.0, 10.0, 15.0])
    assert parse_grid("0:0:1").tolist() == [0.0]
    assert parse_grid("3").tolist() == [3.0]
    for bad in ("5:0:10", "0:1:1", "0:1:0", "a:b:c", "0:1", "0:inf:3"):
        try:
            parse_grid(bad)
        except InvalidGrid:
            continue
        raise AssertionError(f"InvalidGrid not raised for {bad!r}")


def test_overflowing_fock_number_exits_two():
    assert run("lineshape", "--fock", "1e400", "--delta", "0:1:3") == 2


def test_infinite_grid_endpoint_rejected_quietly():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        try:
            parse_grid("0:inf:3")
        except InvalidGrid as e:
            assert "finite" in str(e)
        else:
            raise AssertionError("InvalidGrid not raised")


def test_field_lists():
    assert parse_fields("0.1,4,15", None) == [Thermal(0.1), Thermal(4.0), Thermal(15.0)]
    assert parse_fields(None, "0,10,20") == [Fock(0), Fock(10), Fock(20)]
    assert parse_fields(None, None) == [Thermal(0.1)]
    for nbar, fock in (("1", "2"), (None, "1.5"), ("x", None), ("-1", None)):
        try:
            parse_fields(nbar, fock)
        except InvalidFieldSpec:
            continue
        raise AssertionError(f"InvalidFieldSpec not raised for {nbar!r}, {fock!r}")


def test_inversion_writes_trace():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "inversion.csv"
        assert run("inversion", "--nbar", "0.1", "--t-max", "20", "--samples", "2000", "--output", str(path)) == 0
        table = read_csv(str(path))
        assert table.columns == ["t", "g_t", "sigma_z_analytic"]
        assert table.rows.shape == (2000, 3)
        assert abs(table.column("sigma_z_analytic")[0] - 1.0) < 1e-10
        assert table.meta["version"] == __version__
        assert table.meta["model"] == "driven"
        assert float(table.meta["omega_0"]) == 0.4 - 0.2 / 0.7


def test_resonant_vacuum_trace_is_cosine():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "vacuum.csv"
        assert run("inversion", "--nbar", "0", "--zeta", "0", "--xi", "0", "--omega-eg", "0.4",
                   "--omega-c", "0.4", "--samples", "201", "--output", str(path)) == 0
        table = read_csv(str(path))
        assert table.meta["model"] == "undriven"
        assert_allclose(table.column("sigma_z_analytic"), np.cos(2.0 * table.column("t")), atol=1e-11)


def test_identical_runs_are_byte_identical():
    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / "a.csv", Path(tmp) / "b.csv"
        for path in (first, second):
            assert run("lineshape", "--nbar", "4", "--delta", "0:15:31", "--output", str(path)) == 0
        assert first.read_bytes() == second.read_bytes()


def test_lineshape_fans_out_per_field():
    with tempfile.TemporaryDirectory() as tmp:
        base = Path(tmp) / "lineshape.csv"
        assert run("lineshape", "--g", "1", "--zeta", "0.7", "--nbar", "0.1,4,15",
                   "--delta", "0:15:300", "--output", str(base)) == 0
        names = sorted(path.name for path in Path(tmp).iterdir())
        assert names == ["lineshape_nbar-0.1.csv", "lineshape_nbar-15.csv", "lineshape_nbar-4.csv"]
        at_five = [read_csv(str(Path(tmp) / f"lineshape_nbar-{label}.csv")).column("W_analytic")[100]
                   for label in ("0.1", "4", "15")]
        assert at_five[0] > at_five[1] > at_five[2]


def test_fock_lineshapes():
    with tempfile.TemporaryDirectory() as tmp:
        base = Path(tmp) / "fock.csv"
        assert run("lineshape", "--g", "1", "--zeta", "0", "--fock", "0,10", "--delta", "0:15:101",
                   "--output", str(base)) == 0
        for k in (0, 10):
            table = read_csv(str(Path(tmp) / f"fock_fock-{k}.csv"))
            deltas = table.column("delta")
            assert_allclose(table.column("W_analytic"), deltas ** 2 / (deltas ** 2 + 4.0 * (k + 1)), atol=1e-12)


def test_single_point_grid():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "single.csv"
        assert run("lineshape", "--delta", "0:0:1", "--output", str(path)) == 0
        assert read_csv(str(path)).rows.tolist() == [[0.0, 0.0]]


def test_zeta_surface_recovers_undriven_row():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "surface.csv"
        assert run("surface", "--g", "1", "--nbar", "1.0", "--zeta-range", "0:6:5",
                   "--delta", "0:15:16", "--output", str(path)) == 0
        table = read_csv(str(path))
        assert table.columns == ["delta", "zeta", "W"]
        assert table.rows.shape == (80, 3)
        first = table.rows[table.column("zeta") == 0.0]
        assert_allclose(first[:, 2], lineshape_undriven(1.0, 1.0, first[:, 0]), rtol=1e-11, atol=1e-12)
        at_three = table.rows[table.column("delta") == 3.0][:, 2]
        assert np.all(np.diff(at_three) <= 0)


def test_nbar_surface_shape():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "surface.json"
        assert run("surface", "--g", "1", "--zeta", "0.7", "--nbar-range", "0:20:6",
                   "--delta", "0:15:11", "--format", "json", "--output", str(path)) == 0
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert sorted(payload) == ["columns", "meta", "rows"]
        assert payload["columns"] == ["delta", "nbar", "W"]
        assert len(payload["rows"]) == 66
        assert payload["meta"]["axis"] == "nbar"


def test_surface_needs_one_axis():
    assert run("surface", "--delta", "0:15:11") == 2
    assert run("surface", "--nbar-range", "0:1:3", "--zeta-range", "0:1:3") == 2


def test_configuration_errors_exit_two():
    assert run("lineshape", "--delta", "5:0:10") == 2
    assert run("inversion", "--g", "0", "--zeta", "0.5") == 2
    assert run("inversion", "--omega-0", "0.3") == 2
    assert run("inversion", "--nbar", "-1") == 2
    assert run("inversion", "--config", "/nonexistent/jcm.json") == 2


def test_truncation_cap_exits_three():
    with tempfile.TemporaryDirectory() as tmp:
        assert run("lineshape", "--g", "0.1", "--zeta", "1.0", "--fock", "0", "--max-terms", "32",
                   "--delta", "0:1:3", "--output", str(Path(tmp) / "w.csv")) == 3


def test_validate_reference_scenario():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "validate.csv"
        assert run("validate", "--nbar", "0.1", "--t-max", "20", "--samples", "2000", "--output", str(path)) == 0
        table = read_csv(str(path))
        assert float(table.meta["max_deviation"]) < 1e-6
        assert table.columns == ["t", "sigma_z_analytic", "sigma_z_numeric"]


def test_validate_undriven_scenario():
    assert run("validate", "--zeta", "0", "--xi", "0", "--nbar", "0.1,4", "--samples", "400") == 0


def test_validate_tiny_cutoff_leaks():
    assert run("validate", "--nbar", "4", "--cutoff", "4", "--samples", "201") == 3


def test_oracle_breach_exits_four_after_writing():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "breach.csv"
        assert run("inversion", "--oracle", "--tol", "1e-15", "--samples", "201", "--output", str(path)) == 4
        table = read_csv(str(path))
        assert "sigma_z_numeric" in table.columns
        assert table.meta["oracle_cutoff"] == "35"


def test_lineshape_with_oracle_column():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "oracle.csv"
        assert run("lineshape", "--nbar", "0.1", "--delta", "2", "--oracle", "--window", "500",
                   "--output", str(path)) == 0
        table = read_csv(str(path))
        assert table.columns == ["delta", "W_analytic", "W_numeric"]
        assert abs(table.rows[0, 1] - table.rows[0, 2]) < 5e-3
        assert float(table.meta["time_average_window"]) == 500.0


def test_stream_to_stdout():
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        assert run("lineshape", "--delta", "0:2:3", "--output", "-") == 0
    lines = buffer.getvalue().splitlines()
    assert lines[0].startswith("# alpha: ")
    assert lines[-4] == "delta,W_analytic"
    assert len(lines[-3:]) == 3 and lines[-3].startswith("0.000000000000e+00,")


def test_figures_writes_every_panel():
    with tempfile.TemporaryDirectory() as tmp:
        assert run("figures", "--output", tmp) == 0
        names = sorted(path.name for path in Path(tmp).iterdir())
        assert names == sorted([
            "fig_inversion_nbar-0.1.csv", "fig_inversion_nbar-4.csv",
            "fig_lineshape_nbar-0.1.csv", "fig_lineshape_nbar-4.csv", "fig_lineshape_nbar-15.csv",
            "fig_surface_nbar.csv", "fig_surface_zeta.csv",
            "fig_fock_lineshape_fock-0.csv", "fig_fock_lineshape_fock-10.csv", "fig_fock_lineshape_fock-20.csv",
        ])
        trace = read_csv(str(Path(tmp) / "fig_inversion_nbar-0.1.csv"))
        assert float(trace.meta["amplitude_driven"]) < float(trace.meta["amplitude_undriven"])


def test_config_check():
    assert run("config", "--test") == 0


if __name__ == "__main__":
    from script_checks import run_all_tests
    sys.exit(0 if run_all_tests("Command Line", dict(globals())) else 1)
