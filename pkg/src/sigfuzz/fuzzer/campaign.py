"""The fuzzing loop: select, mutate, execute, merge, update the pool."""

from __future__ import annotations

import logging
import random
import threading
import time
from dataclasses import asdict, dataclass, field

from ..coverage.cumulative import CumulativeCoverage, Metrics, signature
from ..exec.engine import executor_for
from ..exec.testcase import TestCase
from ..ir.instrument import InstrumentedModel, instrument
from ..ir.layout import mine_constants
from ..ir.model import ModelIR
from ..seedgen.seeds import SeedReport, run_seedgen
from .mutators import MutationConfig, MutationContext, bit_flip_all, mutate_bytes
from .pool import SeedPool, evaluated_conditions

log = logging.getLogger(__name__)

LOGICAL_RATE = 10_000  # executions per logical second
WALL_CHECK_EVERY = 64  # executions between wall-clock reads


@dataclass
class CampaignConfig:
    budget: float = 60.0  # seconds of fuzzing after seed generation
    workers: int = 1
    seed: int = 0
    signal_mutations: bool = True
    bmc_seeds: bool = True
    nwise: int = 2
    unroll: int | None = None
    seedgen_budget: float = 5.0
    sample_interval: float = 0.25
    clock: str = "auto"  # "logical", "wall", or "auto" (logical for a single worker)
    deterministic_stage: bool = True
    max_findings: int = 1000
    mutation: MutationConfig | None = None
    stop_when_complete: bool = True  # nothing left to cover once every metric is at 100%

    def __post_init__(self):
        if self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.clock not in ("auto", "logical", "wall"):
            raise ValueError(f"unknown clock {self.clock!r}")
        if self.sample_interval <= 0:
            raise ValueError("sample interval must be positive")

    @property
    def logical(self) -> bool:
        if self.clock == "auto":
            return self.workers == 1
        return self.clock == "logical"

    def mutation_config(self) -> MutationConfig:
        if self.mutation is not None:
            cfg = self.mutation
            if not self.signal_mutations:
                cfg = MutationConfig(**{**asdict(cfg), "enabled": tuple(
                    o for o in cfg.enabled if o not in ("square", "curve"))})
            return cfg
        if self.signal_mutations:
            return MutationConfig()
        return MutationConfig.without_signal_operators()

    def echo(self) -> dict:
        d = asdict(self)
        d["mutation"] = list(self.mutation_config().enabled)
        d["clock"] = "logical" if self.logical else "wall"
        return d


@dataclass
class Finding:
    kind: str
    step: int
    block: str
    test: TestCase


@dataclass
class CampaignReport:
    model: str
    config: dict
    metrics: Metrics
    initial_metrics: Metrics
    series: list  # (elapsed, executions, pool size, unit, cond/dec, mc/dc)
    pool: SeedPool
    coverage: CumulativeCoverage
    executions: int
    seedgen: SeedReport | None
    findings: list = field(default_factory=list)
    wall_seconds: float = 0.0

    @property
    def corpus(self) -> list:
        return [e.test for e in self.pool.entries]

    def summary(self) -> dict:
        return {
            "model": self.model,
            "config": self.config,
            "metrics": {
                "unit_pct": round(self.metrics.unit, 6),
                "cond_dec_pct": round(self.metrics.cond_dec, 6),
                "mcdc_pct": round(self.metrics.mcdc, 6),
            },
            "initial_metrics": {
                "unit_pct": round(self.initial_metrics.unit, 6),
                "cond_dec_pct": round(self.initial_metrics.cond_dec, 6),
                "mcdc_pct": round(self.initial_metrics.mcdc, 6),
            },
            "executions": self.executions,
            "corpus": {
                "pool_size": len(self.pool),
                "accepted": self.pool.accepted,
                "rejected": self.pool.rejected,
                "by_origin": _origin_counts(self.corpus),
            },
            "findings": [
                {"kind": f.kind, "step": f.step, "block": f.block, "digest": f.test.digest} for f in self.findings
            ],
        }


def _origin_counts(tests) -> dict:
    out: dict = {}
    for t in tests:
        out[t.origin] = out.get(t.origin, 0) + 1
    return dict(sorted(out.items()))


class Campaign:
    """Shared state of one fuzzing run; workers call ``work`` concurrently."""

    def __init__(self, im: InstrumentedModel, config: CampaignConfig, seeds: list,
                 seedgen: SeedReport | None = None):
        self.im = im
        self.config = config
        self.seedgen = seedgen
        self.executor = executor_for(im)
        self.coverage = CumulativeCoverage(im)
        self.pool = SeedPool()
        self.mcfg = config.mutation_config()
        self.constants = mine_constants(im.model)
        self.findings: list = []
        self._finding_keys: set = set()
        self.lock = threading.RLock()
        self.executions = 0
        self.series: list = []
        self.logical = config.logical
        self.budget_execs = round(config.budget * LOGICAL_RATE)
        self.sample_execs = max(1, round(config.sample_interval * LOGICAL_RATE))
        self._next_sample = config.sample_interval
        self._stop = False
        self._wall_start = None
        for t in seeds:
            self.process(t, count=False)
        self.initial_metrics = self.coverage.metrics()

    # bookkeeping

    def elapsed(self) -> float:
        if self.logical:
            return self.executions / LOGICAL_RATE
        return time.perf_counter() - self._wall_start

    def _row(self, at: float) -> tuple:
        m = self.coverage.metrics()
        return (round(at, 4), self.executions, len(self.pool), m.unit, m.cond_dec, m.mcdc)

    def process(self, test: TestCase, count: bool = True) -> bool:
        trace = self.executor.coverage(test)
        sig = signature(trace)
        conds = evaluated_conditions(trace)
        with self.lock:
            delta = self.coverage.merge_trace(trace)
            self.pool.record_execution(conds)
            accepted = self.pool.update(test, sig, delta, conds)
            if trace.fault is not None:
                self._finding(trace, test, sig)
            if delta and count and self.config.stop_when_complete and self._saturated():
                self._stop = True
            if count:
                self.executions += 1
                self._tick()
        return accepted

    def _saturated(self) -> bool:
        m = self.coverage.metrics()
        return m.unit >= 100.0 and m.cond_dec >= 100.0 and m.mcdc >= 100.0

    def _finding(self, trace, test, sig) -> None:
        f = trace.fault
        key = (f.kind, f.block, sig)
        if key in self._finding_keys or len(self.findings) >= self.config.max_findings:
            return
        self._finding_keys.add(key)
        self.findings.append(Finding(f.kind, f.step, f.block, test))

    def _tick(self) -> None:
        if self.logical:
            if self.executions % self.sample_execs == 0:
                self.series.append(self._row(self.executions / LOGICAL_RATE))
            if self.executions >= self.budget_execs:
                self._stop = True
        elif self.executions % WALL_CHECK_EVERY == 0:
            now = self.elapsed()
            while now >= self._next_sample:
                self.series.append(self._row(self._next_sample))
                self._next_sample += self.config.sample_interval
            if now >= self.config.budget:
                self._stop = True

    # the loop

    def work(self, rng: random.Random) -> None:
        ctx = MutationContext(self.im.layout, self.constants, self.mcfg, self.pool.donor)
        per_seed = self.mcfg.mutations_per_seed
        layout = self.im.layout
        while not self._stop:
            with self.lock:
                entry = self.pool.select(rng, self.coverage.half_flipped())
                fresh = entry.test.select_times == 1
            parent = entry.test.data
            if fresh and self.config.deterministic_stage and "bit_flip" in self.mcfg.enabled:
                for data in bit_flip_all(parent):
                    if self._stop:
                        return
                    self.process(TestCase(data, layout, origin="mutation"))
            for _ in range(per_seed):
                if self._stop:
                    return
                child = mutate_bytes(parent, rng, ctx)
                self.process(TestCase(child, layout, origin="mutation"))

    def run(self) -> None:
        self._wall_start = time.perf_counter()
        self.series.append(self._row(0.0))
        if self.config.budget <= 0 or not self.pool.entries:
            return
        if self.config.stop_when_complete and self._saturated():
            return
        n = self.config.workers
        if n == 1:
            self.work(random.Random(self.config.seed))
        else:
            threads = [
                threading.Thread(target=self.work, args=(random.Random(f"{self.config.seed}:{i}"),), daemon=True)
                for i in range(n)
            ]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        if self.logical and self.series[-1][1] == self.executions:
            return  # the last sample already sits at the end of the budget
        self.series.append(self._row(self.elapsed()))

def fuzz_campaign(model: ModelIR | InstrumentedModel, config: CampaignConfig | None = None,
                  seeds: list | None = None) -> CampaignReport:
    """Seed generation followed by coverage-guided fuzzing for ``config.budget`` seconds."""
    config = config or CampaignConfig()
    im = model if isinstance(model, InstrumentedModel) else instrument(model)
    wall = time.perf_counter()
    seed_report = None
    if seeds is None:
        result = run_seedgen(
            im,
            K=config.unroll,
            budget=config.seedgen_budget,
            n=config.nwise,
            seed=config.seed,
            bmc=config.bmc_seeds,
            logical=config.logical,
        )
        seeds, seed_report = result.seeds, result.report
    camp = Campaign(im, config, [TestCase(t.data, t.layout, origin=t.origin) for t in seeds], seed_report)
    camp.run()
    metrics = camp.coverage.metrics()
    log.info("campaign %s: %d executions, %s", im.model.name, camp.executions, metrics)
    return CampaignReport(
        model=im.model.name,
        config=config.echo(),
        metrics=metrics,
        initial_metrics=camp.initial_metrics,
        series=camp.series,
        pool=camp.pool,
        coverage=camp.coverage,
        executions=camp.executions,
        seedgen=seed_report,
        findings=camp.findings,
        wall_seconds=time.perf_counter() - wall,
    )
