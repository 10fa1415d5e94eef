"""Machine- and human-readable coverage reports."""

from __future__ import annotations

import csv
import io
import json

from .cumulative import CumulativeCoverage, Metrics

SERIES_HEADER = ("elapsed_s", "executions", "pool_size", "unit_pct", "cond_dec_pct", "mcdc_pct")


def decision_records(cov: CumulativeCoverage) -> list[dict]:
    """One record per decision: outcomes covered and MC/DC pairs satisfied."""
    rows = []
    with cov.lock:
        for d, info in sorted(cov.decisions.items()):
            t, f = cov.true_mask[d], cov.false_mask[d]
            outcomes = []
            for c in range(info.condition_count + 1):
                if c > 0 and info.root_is_leaf:
                    break
                for flag, mask in ((True, t), (False, f)):
                    if (mask >> c) & 1:
                        outcomes.append([c, flag])
            rows.append(
                {
                    "id": d,
                    "block": info.block,
                    "text": info.text,
                    "condition_count": info.condition_count,
                    "conditions": list(info.condition_indices),
                    "outcomes_covered": outcomes,
                    "mcdc_satisfied": [c for c in info.condition_indices if (cov.mcdc_mask[d] >> c) & 1],
                }
            )
    return rows


def metrics_dict(m: Metrics) -> dict:
    return {"unit_pct": round(m.unit, 6), "cond_dec_pct": round(m.cond_dec, 6), "mcdc_pct": round(m.mcdc, 6)}


def coverage_report(cov: CumulativeCoverage) -> dict:
    return {
        "model": cov.model.model.name,
        "summary": metrics_dict(cov.metrics()),
        "units_covered": sorted(cov.units),
        "units_total": len(cov.units_total),
        "decisions": decision_records(cov),
    }


def format_summary(m: Metrics) -> str:
    return f"unit {m.unit:6.2f}%  cond/dec {m.cond_dec:6.2f}%  mc/dc {m.mcdc:6.2f}%"


def format_decisions(cov: CumulativeCoverage) -> str:
    lines = []
    for r in decision_records(cov):
        n = len(r["conditions"])
        lines.append(
            f"d{r['id']:<3} {r['block']:<12} outcomes={len(r['outcomes_covered'])}"
            f" mcdc={len(r['mcdc_satisfied'])}/{n}  {r['text']}"
        )
    return "\n".join(lines)


def series_csv(rows) -> str:
    """Rows are (elapsed, executions, pool size, unit, cond/dec, mc/dc)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SERIES_HEADER)
    for r in rows:
        w.writerow([f"{r[0]:.3f}", r[1], r[2], f"{r[3]:.4f}", f"{r[4]:.4f}", f"{r[5]:.4f}"])
    return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
