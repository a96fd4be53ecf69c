"""Rendering contract: exact data passthrough, schema errors, CLI."""

import json

import numpy as np
import pytest

from conftest import write_csv
from figures import PlotSpec, SchemaError, read_run_csv, render
from figures.cli import main


def test_read_csv_roundtrips_exactly(synthetic_run):
    path, t, mean, err = synthetic_run
    data = read_run_csv(path)
    assert (data["t"] == t).all()
    assert (data["mean_d2"] == mean).all()
    assert (data["stderr_d2"] == err).all()


def test_single_curve_with_band(tmp_path, synthetic_run):
    path, t, mean, err = synthetic_run
    out = tmp_path / "one.png"
    spec = PlotSpec(inputs=((str(path), "run"),), output=str(out))
    fig = render(spec)
    assert out.exists() and out.stat().st_size > 0
    ax = fig.axes[0]
    assert len(ax.lines) == 1
    line = ax.lines[0]
    assert (line.get_xdata() == t).all()
    assert (line.get_ydata() == mean).all()  # plotted values equal CSV values
    assert len(ax.collections) == 1  # the stderr band
    band_y = np.unique(ax.collections[0].get_paths()[0].vertices[:, 1])
    allowed = np.unique(np.concatenate([mean - err, mean + err]))
    assert np.isin(band_y, allowed).all()


def test_three_curve_overlay_with_legend(tmp_path):
    paths, labels = [], []
    for k, lam in enumerate(("0", "0.4", "0.8")):
        t = np.arange(1, 30, dtype=float)
        mean = 1.0 / (t + k)
        err = np.full_like(t, 1e-3 * (k + 1))
        p = tmp_path / f"run{k}.csv"
        write_csv(p, {"t": t, "mean_d2": mean, "stderr_d2": err})
        paths.append(str(p))
        labels.append(f"lambda={lam}")
    spec = PlotSpec(inputs=tuple(zip(paths, labels)),
                    output=str(tmp_path / "overlay.png"), xscale="linear")
    fig = render(spec)
    ax = fig.axes[0]
    assert len(ax.lines) == 3 and len(ax.collections) == 3
    assert [txt.get_text() for txt in ax.legend_.get_texts()] == labels


def test_average_reward_series_selection(tmp_path):
    t = np.arange(1, 20, dtype=float)
    cols = {
        "t": t,
        "mean_d2": 1 / t,
        "stderr_d2": 0 * t + 1e-3,
        "mean_j2": 2 / t,
        "stderr_j2": 0 * t + 2e-3,
        "mean_combined": 3 / t,
    }
    path = tmp_path / "ar.csv"
    write_csv(path, cols)
    for series, col in (("j2", "mean_j2"), ("combined", "mean_combined")):
        fig = render(PlotSpec(inputs=((str(path), "ar"),), series=series,
                              output=str(tmp_path / f"{series}.png")))
        assert (fig.axes[0].lines[0].get_ydata() == cols[col]).all()
    # combined has no stderr column, so no band is drawn
    fig = render(PlotSpec(inputs=((str(path), "ar"),), series="combined",
                          output=str(tmp_path / "c.png")))
    assert len(fig.axes[0].collections) == 0


def test_series_missing_column_names_offender(tmp_path, synthetic_run):
    path, *_ = synthetic_run
    with pytest.raises(SchemaError, match="mean_j2"):
        render(PlotSpec(inputs=((str(path), "x"),), series="j2",
                        output=str(tmp_path / "x.png")))


def test_schema_violations(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError):
        read_run_csv(empty)
    wrong = tmp_path / "wrong.csv"
    wrong.write_text("time,value\n1,2\n")
    with pytest.raises(SchemaError, match="'t'"):
        read_run_csv(wrong)
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("t,mean_d2,stderr_d2\n1,2\n")
    with pytest.raises(SchemaError):
        read_run_csv(ragged)
    headeronly = tmp_path / "h.csv"
    headeronly.write_text("t,mean_d2,stderr_d2\n")
    with pytest.raises(SchemaError):
        read_run_csv(headeronly)


def test_spec_validation(synthetic_run):
    path, *_ = synthetic_run
    with pytest.raises(ValueError):
        PlotSpec(inputs=())
    with pytest.raises(ValueError):
        PlotSpec(inputs=((str(path), "a"), (str(path), "a")))
    with pytest.raises(ValueError):
        PlotSpec(inputs=((str(path), "a"),), series="nope")
    with pytest.raises(ValueError):
        PlotSpec(inputs=((str(path), "a"),), xscale="cubic")


def test_render_does_not_mutate_inputs(tmp_path, synthetic_run):
    path, *_ = synthetic_run
    before = path.read_bytes()
    render(PlotSpec(inputs=((str(path), "x"),), output=str(tmp_path / "y.png")))
    assert path.read_bytes() == before


def test_cli_flags_form(tmp_path, synthetic_run, capsys):
    path, *_ = synthetic_run
    out = tmp_path / "cli.png"
    assert main([str(path), "--labels", "run", "-o", str(out)]) == 0
    assert out.exists()
    assert str(out) in capsys.readouterr().out


def test_cli_spec_file_form(tmp_path, synthetic_run):
    path, *_ = synthetic_run
    spec_payload = {
        "inputs": [{"path": str(path), "label": "run"}],
        "series": "d2",
        "xscale": "log",
        "yscale": "log",
        "output": str(tmp_path / "ignored.png"),
    }
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(spec_payload))
    out = tmp_path / "from_spec.png"
    assert main([str(spec_file), "-o", str(out)]) == 0
    assert out.exists()


def test_cli_schema_error_exit_code(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert main([str(bad), "-o", str(tmp_path / "n.png")]) == 2


def test_cli_label_count_mismatch(tmp_path, synthetic_run):
    path, *_ = synthetic_run
    assert main([str(path), "--labels", "a", "b",
                 "-o", str(tmp_path / "n.png")]) == 2
