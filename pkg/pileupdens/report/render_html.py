from __future__ import annotations

import html
import json
from typing import Any, Dict, List

from .table import format_cell, format_dimension


def _esc(s: str) -> str:
    return html.escape(s, quote=True)


def render_benchmark_html(result: Dict[str, Any]) -> str:
    """Standalone HTML page for a benchmark result dict (as written by `BenchmarkResult.to_dict`)."""
    name = result.get("name", "benchmark")
    created = result.get("created_at", "")
    passed = result.get("passed", None)
    failures = result.get("failures", [])
    deviations = result.get("deviations", [])
    reports = result.get("reports", [])

    def li(items: List[str]) -> str:
        if not items:
            return "<p><em>All acceptance checks passed.</em></p>"
        return "<ul>" + "".join(f"<li>{_esc(str(x))}</li>" for x in items) + "</ul>"

    def notes() -> str:
        if not deviations:
            return "<p><em>Within every reference band.</em></p>"
        return "<ul>" + "".join(f"<li>{_esc(str(x))}</li>" for x in deviations) + "</ul>"

    def rows() -> str:
        out = []
        for r in reports:
            cell = format_cell(100.0 * r["mean_mise"], 100.0 * r["sd_mise"])
            dim = format_dimension(r["mean_m"], r["sd_m"])
            out.append(
                f"<tr><td>{_esc(r['label'])}</td><td>{_esc(cell)}</td>"
                f"<td>{_esc(dim)}</td><td>{len(r['per_replicate_ise'])}</td>"
                f"<td>{r.get('runtime_seconds', 0.0):.1f}s</td></tr>"
            )
        return "".join(out)

    def pre(obj: Any) -> str:
        return "<pre>" + _esc(json.dumps(obj, indent=2, sort_keys=True)) + "</pre>"

    status = "N/A" if passed is None else ("passed" if passed else "FAILED")
    return f"""<!doctype html>
<html>
<head>
  <meta charset="utf-8" />
  <meta name="viewport" content="width=device-width, initial-scale=1" />
  <title>pileupdens benchmark - {_esc(name)}</title>
  <style>
    body {{ font-family: ui-sans-serif, system-ui, -apple-system, Segoe UI, Roboto, Arial; margin: 24px; line-height: 1.4; }}
    .card {{ border: 1px solid #2a2a2a; border-radius: 14px; padding: 16px; margin-bottom: 16px; }}
    .muted {{ opacity: 0.8; }}
    h1 {{ margin: 0 0 8px 0; }}
    h2 {{ margin: 0 0 8px 0; }}
    table {{ border-collapse: collapse; }}
    td, th {{ padding: 4px 12px; border-bottom: 1px solid #ddd; text-align: right; }}
    td:first-child, th:first-child {{ text-align: left; }}
    pre {{ background: #0f0f0f; color: #f2f2f2; padding: 10px; border-radius: 10px; overflow-x: auto; margin: 0; }}
    .pill {{ display:inline-block; padding: 4px 10px; border-radius: 999px; border:1px solid #444; }}
  </style>
</head>
<body>
  <div class="card">
    <h1>Benchmark {_esc(name)}</h1>
    <div class="muted">Created: {_esc(created)}</div>
    <div style="margin-top:10px;">
      <span class="pill">Acceptance: {_esc(status)}</span>
    </div>
  </div>

  <div class="card">
    <h2>100 &times; MISE</h2>
    <table>
      <tr><th>configuration</th><th>100&times;MISE (sd)</th><th>m (sd)</th><th>replicates</th><th>time</th></tr>
      {rows()}
    </table>
  </div>

  <div class="card">
    <h2>Acceptance</h2>
    {li([str(x) for x in failures])}
  </div>

  <div class="card">
    <h2>Reference values</h2>
    {notes()}
  </div>

  <div class="card">
    <h2>Configurations</h2>
    {pre([r.get("metadata", {}).get("config", {}) for r in reports])}
  </div>
</body>
</html>"""
