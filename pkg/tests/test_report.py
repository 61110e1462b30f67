import csv
import io

import pytest

from pileupdens.report.render_html import render_benchmark_html
from pileupdens.report.table import MiseTable, format_cell, format_dimension


@pytest.mark.parametrize(
    "mean, sd, expected",
    [
        (0.063, 0.042, ".063 (.042)"),
        (1.11, 0.22, "1.11 (0.22)"),
        (10.6, 6.7, "10.6 (6.7)"),
        (81.0, None, "81.0"),
        (0.5, None, ".500"),
        (123.4, 45.6, "123 (46)"),
        (0.0, 0.0, ".000 (.000)"),
    ],
)
def test_format_cell(mean, sd, expected):
    assert format_cell(mean, sd) == expected


def test_format_dimension():
    assert format_dimension(3.36, 0.5) == "3.36 (0.50)"


def _table():
    return MiseTable.from_rows(
        [("gamma-mu0.5", 0.063, 0.042, 4.2, 0.6), ("pareto-mu2", 10.6, 6.7, 2.0, 0.0)]
    )


def test_csv_output():
    rows = list(csv.reader(io.StringIO(_table().to_csv())))
    assert rows[0] == ["label", "mise_x100", "sd_x100", "mean_m", "sd_m", "cell"]
    assert rows[1][0] == "gamma-mu0.5"
    assert float(rows[1][1]) == 0.063
    assert rows[1][-1] == ".063 (.042)"
    assert rows[2][-1] == "10.6 (6.7)"
    assert len(rows) == 3


def test_text_output():
    lines = _table().to_text().splitlines()
    assert lines[0].startswith("configuration")
    assert set(lines[1].replace(" ", "")) == {"-"}
    assert lines[2].startswith("gamma-mu0.5")
    assert lines[2].endswith("4.20 (0.60)")
    assert ".063 (.042)" in lines[2]
    assert len({len(line) for line in lines[:2]}) == 1


def test_html_escapes_untrusted_text():
    result = {
        "name": "<script>x</script>",
        "passed": False,
        "failures": ["a & b < c"],
        "reports": [
            {
                "label": "gamma<1>",
                "mean_mise": 0.00063,
                "sd_mise": 0.00042,
                "mean_m": 4.0,
                "sd_m": 0.0,
                "per_replicate_ise": [0.00063],
                "metadata": {"config": {"label": "gamma<1>"}},
            }
        ],
    }
    page = render_benchmark_html(result)
    assert "<script>x</script>" not in page
    assert "&lt;script&gt;" in page
    assert "a &amp; b &lt; c" in page
    assert "gamma&lt;1&gt;" in page
    assert ".063 (.042)" in page
    assert "FAILED" in page


def test_html_for_passing_run():
    page = render_benchmark_html({"name": "ok", "passed": True, "failures": [], "reports": []})
    assert "All acceptance checks passed." in page
    assert "Acceptance: passed" in page
