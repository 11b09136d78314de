"""Timing of pseudonym generation and verification.

Times are wall-clock per call on in-memory objects (no file I/O), after a
short warm-up.  The report carries reference figures measured on an
Intel i7-1265U next to the local numbers.
"""

from __future__ import annotations

import csv
import json
import math
import platform
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import scheme
from .algebra import SeededRng, default_rng

MIN_ITERATIONS = 10
REFERENCE = {
    "hardware": "Intel i7-1265U",
    "nymgen": {"mean_ms": 4.94, "stderr_ms": 0.02},
    "nymvf": {"mean_ms": 7.61, "stderr_ms": 0.03},
}


@dataclass
class Timing:
    name: str
    samples_ms: list[float]

    @property
    def mean(self) -> float:
        return statistics.fmean(self.samples_ms)

    @property
    def stderr(self) -> float:
        n = len(self.samples_ms)
        return statistics.stdev(self.samples_ms) / math.sqrt(n) if n > 1 else 0.0


@dataclass
class BenchReport:
    iterations: int
    timings: list[Timing]
    machine: dict = field(default_factory=dict)

    def row(self, name: str) -> Timing:
        return next(t for t in self.timings if t.name == name)

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "unit": "ms",
            "machine": self.machine,
            "results": {
                t.name: {"mean_ms": t.mean, "stderr_ms": t.stderr, "min_ms": min(t.samples_ms), "max_ms": max(t.samples_ms)}
                for t in self.timings
            },
            "reference": REFERENCE,
        }

    def table(self) -> str:
        lines = [
            f"{'operation':<10} {'mean (ms)':>12} {'stderr':>9} {'reference (ms)':>16}",
        ]
        for t in self.timings:
            ref = REFERENCE[t.name]
            lines.append(
                f"{t.name:<10} {t.mean:>12.3f} {t.stderr:>9.3f} {ref['mean_ms']:>9.2f} ± {ref['stderr_ms']:.2f}"
            )
        lines.append(f"iterations: {self.iterations}; reference hardware: {REFERENCE['hardware']}")
        return "\n".join(lines)


def run_bench(iterations: int = 100, seed: bytes | str | None = None, warmup: int = 3) -> BenchReport:
    if iterations < MIN_ITERATIONS:
        raise ValueError(f"at least {MIN_ITERATIONS} iterations are required")
    rng = SeededRng(seed) if seed is not None else default_rng()
    pp = scheme.setup(seed=rng.randbytes(32))
    master = scheme.keygen(pp, rng)
    user = scheme.keygen_user(pp, master.msk, rng)
    sp = scheme.keygen_sp(pp, master.msk, rng)

    for _ in range(warmup):
        nym, proof = scheme.nymgen_user(pp, user, master.mpk, sp.sppk, rng)
        scheme.nymvf(pp, master.mpk, sp.sppk, nym, proof)

    gen, vf = [], []
    for _ in range(iterations):
        t0 = time.perf_counter()
        nym, proof = scheme.nymgen_user(pp, user, master.mpk, sp.sppk, rng)
        t1 = time.perf_counter()
        ok = scheme.nymvf(pp, master.mpk, sp.sppk, nym, proof)
        t2 = time.perf_counter()
        if not ok:
            raise RuntimeError("benchmark proof failed to verify")
        gen.append((t1 - t0) * 1e3)
        vf.append((t2 - t1) * 1e3)
    machine = {"python": platform.python_version(), "platform": platform.platform(), "processor": platform.processor()}
    return BenchReport(iterations, [Timing("nymgen", gen), Timing("nymvf", vf)], machine)


def write_report(report: BenchReport, out_dir: str | Path) -> dict[str, Path]:
    """Write bench.json, bench_timings.csv, bench.txt and one histogram PNG per operation."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "json": out / "bench.json",
        "csv": out / "bench_timings.csv",
        "table": out / "bench.txt",
    }
    paths["json"].write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
    with paths["csv"].open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", *(t.name + "_ms" for t in report.timings)])
        for i, row in enumerate(zip(*(t.samples_ms for t in report.timings))):
            w.writerow([i, *(f"{v:.6f}" for v in row)])
    paths["table"].write_text(report.table() + "\n")

    for t in report.timings:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.hist(t.samples_ms, bins=min(30, max(5, len(t.samples_ms) // 4)), color="#4477aa")
        ax.axvline(t.mean, color="black", linestyle="--", label=f"mean {t.mean:.2f} ms")
        ax.axvline(REFERENCE[t.name]["mean_ms"], color="#cc6677", label=f"reference {REFERENCE[t.name]['mean_ms']:.2f} ms")
        ax.set_xlabel("time per call (ms)")
        ax.set_ylabel("count")
        ax.set_title(f"{t.name}, {report.iterations} iterations")
        ax.legend()
        fig.tight_layout()
        paths[t.name + "_png"] = out / f"{t.name}_hist.png"
        fig.savefig(paths[t.name + "_png"], dpi=100)
        plt.close(fig)
    return paths

