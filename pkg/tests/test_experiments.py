import csv

import numpy as np
import pytest

from composite_silhouette.data import SyntheticSpec, generate_synthetic
from composite_silhouette.experiments import (convergence_study, convergence_summary, format_number, gaussian_blobs,
                                              runtime_benchmark, svg_line_chart, write_convergence_csv,
                                              write_runtime_csv, write_table)


@pytest.fixture(scope="module")
def tiny():
    return generate_synthetic(SyntheticSpec("S1", seed=0, scale=0.04))


def test_convergence_rows(tiny):
    rows = convergence_study(tiny, 5, B_max=12, B_grid=[4, 8, 12], reps=3, seed=0)
    assert [(r.B, r.rep) for r in rows] == [(b, r) for b in (4, 8, 12) for r in (1, 2, 3)]
    assert all(r.abs_error >= 0 for r in rows)
    assert all(r.abs_error == 0.0 for r in rows if r.B == 12)
    again = convergence_study(tiny, 5, B_max=12, B_grid=[4, 8, 12], reps=3, seed=0)
    assert rows == again
    summary = convergence_summary(rows)
    assert list(summary) == [4, 8, 12]
    assert summary[12] == {"median": 0.0, "q1": 0.0, "q3": 0.0, "iqr": 0.0}


def test_convergence_validation(tiny):
    with pytest.raises(ValueError):
        convergence_study(tiny, 5, B_max=10, B_grid=[5, 20])
    with pytest.raises(ValueError):
        convergence_study(tiny, 5, B_max=10, B_grid=[])


def test_gaussian_blobs_share_centers():
    a, b = gaussian_blobs(500, seed=1), gaussian_blobs(2000, seed=1)
    assert a.values.shape == (500, 10)
    means_a = np.array([a.values[a.labels == c].mean(axis=0) for c in range(5)])
    means_b = np.array([b.values[b.labels == c].mean(axis=0) for c in range(5)])
    assert np.abs(means_a - means_b).max() < 0.5


def test_runtime_rows():
    rows = runtime_benchmark([300, 600], B=3, subsample_cap=200)
    assert [(r.n, r.method) for r in rows] == [(300, "composite"), (300, "full_silhouette"),
                                               (600, "composite"), (600, "full_silhouette")]
    assert all(r.seconds > 0 for r in rows)
    with pytest.raises(ValueError):
        runtime_benchmark([])
    with pytest.raises(ValueError):
        runtime_benchmark([300], methods=["turbo"])


def test_number_format():
    assert format_number(3) == "3"
    assert format_number(0.1 + 0.2) == "0.3"
    assert format_number(1 / 3) == "0.333333333"
    assert format_number(float("inf")) == "inf"
    assert format_number("tanh") == "tanh"


def test_csv_writers(tmp_path):
    from composite_silhouette.experiments import ConvergenceRow, RuntimeRow
    p = write_convergence_csv([ConvergenceRow(10, 1, 0.25)], tmp_path / "c.csv")
    assert p.read_bytes() == b"B,rep,abs_error\n10,1,0.25\n"
    p = write_runtime_csv([RuntimeRow(100, "composite", 1.5)], tmp_path / "r.csv")
    assert list(csv.reader(p.open())) == [["n", "method", "seconds"], ["100", "composite", "1.5"]]
    write_table(tmp_path / "sub" / "t.csv", ["a"], [[1]])
    assert (tmp_path / "sub" / "t.csv").exists()


def test_svg_chart(tmp_path):
    p = svg_line_chart({"a": ([1, 2, 3], [3, 2, 1]), "b": ([1, 3], [1, 1])}, tmp_path / "x.svg",
                       "t", "x", "y", log_y=True)
    text = p.read_text()
    assert text.startswith("<svg") and text.count("<polyline") == 2
