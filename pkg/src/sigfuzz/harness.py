"""Report directories, corpus replay and the paired ablation runner."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import benchmarks
from .coverage.cumulative import CumulativeCoverage, Metrics
from .coverage.report import coverage_report, dumps, format_decisions, format_summary, metrics_dict, series_csv
from .exec.corpus import load_corpus, save_corpus, save_test
from .exec.engine import executor_for
from .fuzzer.campaign import CampaignConfig, CampaignReport, fuzz_campaign
from .ir import InstrumentedModel, ModelIR, instrument, parse_model

log = logging.getLogger(__name__)

ARMS = {
    # arm name -> config overrides
    "full": {},
    "raw": {"signal_mutations": False},
    "nobmc": {"bmc_seeds": False},
}


def resolve_model(spec: str) -> ModelIR:
    """A model file path, or the name of a bundled benchmark (``ondlc`` or ``ondlc.ir``).

    An existing file wins over a bundled name.  Raises FileNotFoundError if neither matches.
    """
    path = Path(spec)
    if path.is_file():
        return parse_model(path.read_text(encoding="utf-8"))
    name = path.name[:-3] if path.name.endswith(".ir") else path.name
    if path.parent == Path(".") and name in benchmarks.NAMES:
        return benchmarks.load(name)
    raise FileNotFoundError(f"no model file {spec!r} and no bundled benchmark of that name")


# run reports


def summary_text(report: CampaignReport) -> str:
    s = report.summary()
    lines = [
        f"model       {report.model}",
        f"executions  {report.executions}",
        f"initial     {format_summary(report.initial_metrics)}",
        f"final       {format_summary(report.metrics)}",
        f"pool        {len(report.pool)} entries ({s['corpus']['accepted']} accepted,"
        f" {s['corpus']['rejected']} rejected)",
        f"origins     {', '.join(f'{k}={v}' for k, v in s['corpus']['by_origin'].items()) or '-'}",
        f"findings    {len(report.findings)}",
    ]
    if report.seedgen is not None:
        agg = report.seedgen.aggregate()
        counts: dict = {}
        for st in agg.values():
            counts[st] = counts.get(st, 0) + 1
        lines.append(
            f"seedgen     K={report.seedgen.K} paths={report.seedgen.paths}"
            f" targets: {', '.join(f'{k}={v}' for k, v in sorted(counts.items())) or '-'}"
        )
    lines += ["", format_decisions(report.coverage)]
    return "\n".join(lines) + "\n"


def write_report(report: CampaignReport, outdir: str | Path) -> Path:
    """Write summary, time series, per-decision detail, seed report, corpus and findings."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(dumps(report.summary()))
    (out / "summary.txt").write_text(summary_text(report))
    (out / "timeseries.csv").write_text(series_csv(report.series))
    (out / "decisions.json").write_text(dumps(coverage_report(report.coverage)))
    if report.seedgen is not None:
        (out / "seeds.json").write_text(dumps(report.seedgen.as_dict()))
    save_corpus(out / "corpus", report.corpus)
    for f in report.findings:
        save_test(out / "findings", f.test, subdir=f.kind)
    return out


# replay


def replay_corpus(model: ModelIR | InstrumentedModel, corpus_dir: str | Path) -> CumulativeCoverage:
    """Merged coverage of every corpus file; no mutation."""
    im = model if isinstance(model, InstrumentedModel) else instrument(model)
    cov = CumulativeCoverage(im)
    ex = executor_for(im)
    for t in load_corpus(corpus_dir, im.layout):
        cov.merge_trace(ex.coverage(t))
    return cov


# ablation


@dataclass
class ArmResult:
    arm: str
    trial: int
    seed: int
    metrics: Metrics
    initial: Metrics
    executions: int
    series: list
    time_to_final: float  # first sample at which the final cond/dec level was reached


@dataclass
class Ablation:
    model: str
    arms: tuple
    budget: float
    results: list = field(default_factory=list)

    def by_trial(self) -> dict:
        out: dict = {}
        for r in self.results:
            out.setdefault(r.trial, {})[r.arm] = r
        return out

    def compare(self, a: str = "full", b: str = "raw") -> dict:
        """Paired counts: trials where arm ``a`` covers strictly more, equal, or less than ``b``."""
        wins = ties = losses = 0
        for arms in self.by_trial().values():
            if a not in arms or b not in arms:
                continue
            ka, kb = _rank(arms[a].metrics), _rank(arms[b].metrics)
            if ka > kb:
                wins += 1
            elif ka == kb:
                ties += 1
            else:
                losses += 1
        return {"a": a, "b": b, "wins": wins, "ties": ties, "losses": losses}

    def mean(self, arm: str) -> dict:
        rs = [r for r in self.results if r.arm == arm]
        if not rs:
            return {}
        n = len(rs)
        return {
            "unit_pct": sum(r.metrics.unit for r in rs) / n,
            "cond_dec_pct": sum(r.metrics.cond_dec for r in rs) / n,
            "mcdc_pct": sum(r.metrics.mcdc for r in rs) / n,
            "time_to_final_s": sum(r.time_to_final for r in rs) / n,
        }

    def as_dict(self) -> dict:
        others = [a for a in self.arms if a != self.arms[0]]
        return {
            "model": self.model,
            "arms": list(self.arms),
            "budget": self.budget,
            "trials": [
                {
                    "trial": r.trial,
                    "arm": r.arm,
                    "seed": r.seed,
                    "executions": r.executions,
                    "initial": metrics_dict(r.initial),
                    "final": metrics_dict(r.metrics),
                    "time_to_final_s": r.time_to_final,
                }
                for r in self.results
            ],
            "mean": {a: self.mean(a) for a in self.arms},
            "paired": [self.compare(self.arms[0], b) for b in others],
        }

    def table(self) -> str:
        """Per-trial cond/dec and MC/DC for each arm, then the paired comparison."""
        head = "trial " + " ".join(f"{a + ' c/d':>12} {a + ' mcdc':>12}" for a in self.arms)
        lines = [head]
        for trial, arms in sorted(self.by_trial().items()):
            cells = []
            for a in self.arms:
                m = arms[a].metrics
                cells.append(f"{m.cond_dec:12.2f} {m.mcdc:12.2f}")
            lines.append(f"{trial:5d} " + " ".join(cells))
        for a in self.arms:
            mu = self.mean(a)
            lines.append(f"mean {a}: cond/dec {mu['cond_dec_pct']:.2f}%  mc/dc {mu['mcdc_pct']:.2f}%"
                         f"  time-to-final {mu['time_to_final_s']:.2f}s")
        for c in self.as_dict()["paired"]:
            lines.append(f"{c['a']} vs {c['b']}: {c['wins']} more, {c['ties']} equal, {c['losses']} less")
        return "\n".join(lines) + "\n"

    def overlay_csv(self) -> str:
        """Long-form coverage-over-time rows for every arm and trial."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("arm", "trial", "elapsed_s", "executions", "unit_pct", "cond_dec_pct", "mcdc_pct"))
        for r in self.results:
            for row in r.series:
                w.writerow((r.arm, r.trial, f"{row[0]:.3f}", row[1], f"{row[3]:.4f}", f"{row[4]:.4f}",
                            f"{row[5]:.4f}"))
        return buf.getvalue()


def _rank(m: Metrics) -> tuple:
    # condition/decision first, MC/DC breaks ties, then units
    return (round(m.cond_dec, 9), round(m.mcdc, 9), round(m.unit, 9))


def time_to_final(series: list) -> float:
    if not series:
        return 0.0
    final = series[-1][4]
    for row in series:
        if row[4] >= final:
            return row[0]
    return series[-1][0]


def run_ablation(model: ModelIR | InstrumentedModel, trials: int = 10, budget: float = 60.0, seed: int = 0,
                 arms=("full", "raw"), base: CampaignConfig | None = None) -> Ablation:
    """Paired trials: trial ``i`` runs every arm with seed ``seed + i`` and the same budget."""
    im = model if isinstance(model, InstrumentedModel) else instrument(model)
    arms = tuple(arms)
    for a in arms:
        if a not in ARMS:
            raise ValueError(f"unknown arm {a!r}; choose from {', '.join(ARMS)}")
    base = base or CampaignConfig()
    ab = Ablation(im.model.name, arms, budget)
    for i in range(trials):
        s = seed + i
        for a in arms:
            cfg = CampaignConfig(**{**_config_fields(base), "budget": budget, "seed": s, **ARMS[a]})
            rep = fuzz_campaign(im, cfg)
            ab.results.append(ArmResult(a, i, s, rep.metrics, rep.initial_metrics, rep.executions, rep.series,
                                        time_to_final(rep.series)))
            log.info("trial %d arm %s: %s", i, a, format_summary(rep.metrics))
    return ab


def _config_fields(cfg: CampaignConfig) -> dict:
    return {k: getattr(cfg, k) for k in cfg.__dataclass_fields__}


def write_ablation(ab: Ablation, outdir: str | Path) -> Path:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ablation.json").write_text(dumps(ab.as_dict()))
    (out / "ablation.txt").write_text(ab.table())
    (out / "overlay.csv").write_text(ab.overlay_csv())
    return out
