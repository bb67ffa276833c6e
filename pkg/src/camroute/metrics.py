"""Per-run metrics (loss, image quality counts, latency) and their CSV / JSON export."""

from __future__ import annotations

import csv
import io
import json
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .imaging import COMPLETE, UNUSABLE, USABLE, ImageResult

CSV_HEADER = ["scenario", "seed", "fragments_sent", "fragments_delivered", "avg_loss_ratio", "images_attempted",
              "images_received", "complete", "usable", "unusable", "mean_latency_s", "latency_ratio"]

BEST_CASE_LATENCY = 0.94


@dataclass
class RunMetrics:
    scenario: int
    seed: int
    fragments_sent: int = 0
    fragments_delivered: int = 0
    avg_loss_ratio: float = 1.0
    images_attempted: int = 0
    images_received: int = 0
    complete: int = 0
    usable: int = 0
    unusable: int = 0
    no_reception: int = 0
    latencies: list[float] = field(default_factory=list)
    mean_latency_s: Optional[float] = None
    latency_ratio: Optional[float] = None
    counters: dict = field(default_factory=dict)

    def check(self) -> None:
        if self.complete + self.usable + self.unusable != self.images_received:
            raise ValueError("quality classes do not add up to received images")
        if self.images_received > self.images_attempted:
            raise ValueError("more images received than attempted")
        if not 0.0 <= self.avg_loss_ratio <= 1.0:
            raise ValueError("average loss ratio out of range")

    def csv_row(self) -> list:
        return [self.scenario, self.seed, self.fragments_sent, self.fragments_delivered, self.avg_loss_ratio,
                self.images_attempted, self.images_received, self.complete, self.usable, self.unusable,
                self.mean_latency_s, self.latency_ratio]


def aggregate(results: Sequence[ImageResult], counters: Optional[dict] = None, scenario: int = 0, seed: int = 0,
              best_case_latency: float = BEST_CASE_LATENCY, fragments_sent: Optional[int] = None) -> RunMetrics:
    """Collapse per-image results into run metrics.

    Images whose first fragment never arrived count as fully lost and are
    excluded from the latency mean (their display timer never started).
    """
    m = RunMetrics(scenario, seed, counters=dict(counters or {}))
    m.images_attempted = len(results)
    m.fragments_sent = sum(r.expected for r in results) if fragments_sent is None else fragments_sent
    m.fragments_delivered = sum(r.received for r in results)
    if results:
        m.avg_loss_ratio = sum(r.loss_ratio for r in results) / len(results)
    for r in results:
        cls = r.classification
        if cls is None:
            m.no_reception += 1
            continue
        m.images_received += 1
        if cls == COMPLETE:
            m.complete += 1
        elif cls == USABLE:
            m.usable += 1
        elif cls == UNUSABLE:
            m.unusable += 1
        if r.latency is not None:
            m.latencies.append(r.latency)
    if m.latencies:
        m.mean_latency_s = sum(m.latencies) / len(m.latencies)
        m.latency_ratio = m.mean_latency_s / best_case_latency
    m.check()
    return m


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(metrics: Iterable[RunMetrics]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for m in metrics:
        w.writerow([_fmt(v) for v in m.csv_row()])
    return buf.getvalue()


def to_structured(metrics: Iterable[RunMetrics]) -> str:
    runs = [asdict(m) for m in metrics]
    return json.dumps({"runs": runs}, indent=2, sort_keys=True) + "\n"


def summarize(metrics: Sequence[RunMetrics]) -> list[dict]:
    """Mean and sample standard deviation per scenario over seeds."""
    cols = ["avg_loss_ratio", "images_received", "complete", "usable", "unusable", "mean_latency_s", "latency_ratio"]
    out = []
    for scen in sorted({m.scenario for m in metrics}):
        group = [m for m in metrics if m.scenario == scen]
        row: dict = {"scenario": scen, "runs": len(group)}
        for c in cols:
            vals = [getattr(m, c) for m in group if getattr(m, c) is not None]
            row[f"{c}_mean"] = statistics.fmean(vals) if vals else None
            row[f"{c}_std"] = statistics.stdev(vals) if len(vals) > 1 else 0.0 if vals else None
        out.append(row)
    return out


def summary_csv(metrics: Sequence[RunMetrics]) -> str:
    rows = summarize(metrics)
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(rows[0])
    w.writerow(keys)
    for r in rows:
        w.writerow([_fmt(r[k]) for k in keys])
    return buf.getvalue()


def export(metrics: Sequence[RunMetrics], fmt: str, path) -> list[Path]:
    """Write ``runs.csv`` or ``runs.json`` plus ``summary.csv`` under ``path`` (a directory)."""
    if not metrics:
        raise ValueError("nothing to export")
    if fmt not in ("csv", "structured"):
        raise ValueError(f"unknown export format {fmt!r}")
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        main = out / ("runs.csv" if fmt == "csv" else "runs.json")
        main.write_text(to_csv(metrics) if fmt == "csv" else to_structured(metrics))
        summ = out / "summary.csv"
        summ.write_text(summary_csv(metrics))
    except OSError as exc:
        raise OSError(f"cannot write metrics to {out}: {exc.strerror or exc}") from exc
    return [main, summ]


def _num(text: str, kind):
    if text == "":
        return None
    return kind(text)


def read_csv(text: str) -> list[RunMetrics]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError("not a run-metrics CSV")
    out = []
    for r in rows[1:]:
        d = dict(zip(CSV_HEADER, r))
        out.append(RunMetrics(
            scenario=int(d["scenario"]), seed=int(d["seed"]),
            fragments_sent=int(d["fragments_sent"]), fragments_delivered=int(d["fragments_delivered"]),
            avg_loss_ratio=float(d["avg_loss_ratio"]), images_attempted=int(d["images_attempted"]),
            images_received=int(d["images_received"]), complete=int(d["complete"]), usable=int(d["usable"]),
            unusable=int(d["unusable"]), mean_latency_s=_num(d["mean_latency_s"], float),
            latency_ratio=_num(d["latency_ratio"], float),
        ))
    return out


def read_structured(text: str) -> list[RunMetrics]:
    return [RunMetrics(**run) for run in json.loads(text)["runs"]]
