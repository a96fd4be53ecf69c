import numpy as np
import pytest

figures = pytest.importorskip("figures")


def format_value(x) -> str:
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def write_csv(path, columns: dict) -> None:
    names = list(columns)
    n = len(next(iter(columns.values())))
    lines = [",".join(names)]
    for i in range(n):
        lines.append(",".join(format_value(columns[c][i]) for c in names))
    path.write_text("\n".join(lines) + "\n")


@pytest.fixture
def synthetic_run(tmp_path):
    """One discounted-style CSV with irrational-ish values that only
    survive exact round-trips."""
    rng = np.random.default_rng(3)
    t = np.unique(np.geomspace(1, 1e5, 40).astype(np.int64))
    mean = np.exp(-t / 3e4) * 7.123456789 + rng.random(len(t)) * 1e-3
    err = rng.random(len(t)) * 1e-4
    path = tmp_path / "run.csv"
    write_csv(path, {"t": t, "mean_d2": mean, "stderr_d2": err})
    return path, t.astype(float), mean, err
