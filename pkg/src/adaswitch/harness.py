"""Experiment harness: request/prediction generators, sweep drivers, and
CSV/SVG report emission.

A sweep evaluates a list of algorithms over a grid (robustness guarantees,
horizons, or error rates) with several seeds per point, computes the
hindsight optimum with the application's exact offline oracle, and records
one row per (algorithm, grid point, seed).  Rows are plain dicts with a
fixed column schema so the CSV round-trips exactly.
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import kserver as ks
from . import oltq
from . import orra
from .framework import RequestSequence
from .switching import child_seed

log = logging.getLogger(__name__)

CSV_HEADER = "app,algorithm,sweep_axis,sweep_value,seed,val,opt,ratio,phi_star,switches,bound,flags"

AGGREGATE_HEADER = "algorithm,sweep_value,mean_ratio,stderr,rows"


# ---------------------------------------------------------------------------
# Generators


def gen_geometric(p: float, ell: int, T: int, seed: int) -> RequestSequence:
    """First T periods draw i.i.d. arrivals from a geometric law on
    {1, 2, ...} with success probability p, clipped to at most ell; nothing
    arrives afterwards.  Pure function of (p, ell, T, seed)."""
    if not 0 < p <= 1:
        raise ValueError("geometric parameter p must lie in (0, 1]")
    if T < 1:
        raise ValueError("horizon T must be >= 1")
    rng = random.Random(child_seed(seed, "geometric", p, ell, T))
    arrivals = []
    log_q = math.log1p(-p) if p < 1 else None
    for _ in range(T):
        if log_q is None:
            k = 1
        else:
            u = rng.random()
            k = int(math.ceil(math.log1p(-u) / log_q))
            k = max(1, k)
        arrivals.append(min(k, ell))
    return oltq.make_requests(ell, arrivals)


def _low_block(ell: int) -> list[int]:
    return [ell] + [0] * (2 * ell - 1)


def _high_block(ell: int) -> list[int]:
    return [ell] * ell + [0] * ell


def gen_pattern(model: str, p_err: float, ell: int, T: int,
                seed: int) -> tuple[RequestSequence, RequestSequence]:
    """Block-structured reality/prediction pair.

    Each 2*ell-period block is either low demand (ell orders up front, then
    quiet) or high demand (ell orders in each of the first ell periods).
    Model I predicts low everywhere while each real block is high with
    probability p_err; model II exchanges the roles.  T is padded up to a
    whole number of blocks when needed.
    """
    if model not in ("I", "II"):
        raise ValueError(f"model must be 'I' or 'II', got {model!r}")
    if not 0 <= p_err <= 1:
        raise ValueError("error rate must lie in [0, 1]")
    block = 2 * ell
    blocks = (T + block - 1) // block
    if blocks * block != T:
        log.info("padding horizon %d to %d (whole %d-period blocks)",
                 T, blocks * block, block)
    rng = random.Random(child_seed(seed, "pattern", model, p_err, ell, T))
    reality: list[int] = []
    prediction: list[int] = []
    for _ in range(blocks):
        flip = rng.random() < p_err
        if model == "I":
            reality.extend(_high_block(ell) if flip else _low_block(ell))
            prediction.extend(_low_block(ell))
        else:
            reality.extend(_low_block(ell) if flip else _high_block(ell))
            prediction.extend(_high_block(ell))
    return oltq.make_requests(ell, reality), oltq.make_requests(ell, prediction)


# ---------------------------------------------------------------------------
# Experiment specification


@dataclass
class AlgorithmSpec:
    name: str
    params: dict[str, str] = field(default_factory=dict)

    def get(self, key: str, default: Optional[float] = None) -> Optional[float]:
        if key in self.params:
            return float(self.params[key])
        return default


@dataclass
class ExperimentSpec:
    app: str = "oltq"
    generator: str = "geometric"
    params: dict[str, str] = field(default_factory=dict)
    prediction: str = "perfect"
    sweep_axis: str = "robustness"
    grid: list[float] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: [0])
    algorithms: list[AlgorithmSpec] = field(default_factory=list)

    def param(self, key: str, default=None, cast=float):
        if key in self.params:
            return cast(self.params[key])
        if default is None:
            raise ValueError(f"experiment spec is missing parameter {key!r}")
        return default

    def validate(self) -> None:
        if self.app not in ("oltq", "kserver", "caching", "orra"):
            raise ValueError(f"unknown application {self.app!r}")
        if not self.grid:
            raise ValueError("sweep grid must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if not self.algorithms:
            self.algorithms = []


def parse_spec(text: str) -> ExperimentSpec:
    """Parse the line-oriented spec format: ``key value...`` pairs, with
    repeated ``algorithm.name`` lines opening parameter blocks that
    following ``algorithm.<key>`` lines extend."""
    spec = ExperimentSpec()
    current: Optional[AlgorithmSpec] = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "algorithm.name":
            current = AlgorithmSpec(rest)
            spec.algorithms.append(current)
        elif key.startswith("algorithm."):
            if current is None:
                raise ValueError(f"line {lineno}: algorithm parameter before algorithm.name")
            current.params[key.split(".", 1)[1]] = rest
        elif key == "app":
            spec.app = rest
        elif key == "generator":
            spec.generator = rest
        elif key == "prediction":
            spec.prediction = rest
        elif key == "sweep":
            spec.sweep_axis = rest
        elif key == "grid":
            spec.grid = [float(x) for x in rest.split()]
        elif key == "seeds":
            tokens = rest.split()
            if len(tokens) == 1:
                spec.seeds = list(range(int(tokens[0])))
            else:
                spec.seeds = [int(x) for x in tokens]
        else:
            spec.params[key] = rest
    spec.validate()
    return spec


# ---------------------------------------------------------------------------
# Row production


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def row_to_csv(row: dict) -> str:
    return ",".join(_fmt(row[k]) for k in CSV_HEADER.split(","))


def parse_rows(text: str) -> list[dict]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("unexpected CSV header")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        keys = CSV_HEADER.split(",")
        row = dict(zip(keys, cells))
        for k in ("sweep_value", "val", "opt", "ratio", "phi_star", "bound"):
            row[k] = float(row[k]) if row[k] else None
        row["seed"] = int(row["seed"])
        row["switches"] = int(row["switches"])
        rows.append(row)
    return rows


def _oltq_instances(spec: ExperimentSpec, sweep_value: float, seed: int
                    ) -> tuple[int, RequestSequence, RequestSequence]:
    ell = spec.param("ell", cast=lambda x: int(float(x)))
    T = spec.param("T", cast=lambda x: int(float(x)))
    if spec.sweep_axis == "T":
        T = int(sweep_value)
    if spec.generator == "geometric":
        reality = gen_geometric(spec.param("p"), ell, T, seed)
        prediction = reality if spec.prediction == "perfect" else None
        if prediction is None:
            raise ValueError("geometric generator supports only perfect predictions")
    elif spec.generator in ("model1", "model2"):
        p_err = spec.param("p_err", 0.1)
        if spec.sweep_axis == "p_err":
            p_err = sweep_value
        model = "I" if spec.generator == "model1" else "II"
        reality, prediction = gen_pattern(model, p_err, ell, T, seed)
    elif spec.generator == "file":
        _, reality = oltq.read_instance(spec.params["instance"])
        if spec.prediction == "perfect":
            prediction = reality
        else:
            _, prediction = oltq.read_instance(spec.params["prediction_file"])
    else:
        raise ValueError(f"unknown generator {spec.generator!r} for oltq")
    return ell, reality, prediction


def _run_oltq_row(spec: ExperimentSpec, algo: AlgorithmSpec, sweep_value: float,
                  seed: int, cache: dict) -> dict:
    ell, reality, prediction = _oltq_instances(spec, sweep_value, seed)
    eta = oltq.eta_oltq(ell)
    opt_key = ("opt", seed, sweep_value if spec.sweep_axis != "robustness" else None)
    if opt_key not in cache:
        horizon = reality.effective_length
        cache[opt_key] = oltq.ohrr_star(oltq.OltqSimulator(ell), 1,
                                        reality.window(1, horizon))[0]
    opt = cache[opt_key]

    if algo.name == "adaswitch":
        if spec.sweep_axis == "robustness":
            epsilon = eta - sweep_value
        else:
            epsilon = algo.get("epsilon", 0.2)
        report = oltq.adaswitch_oltq(ell, reality, prediction, epsilon, seed=seed)
    elif algo.name == "strengthened":
        Z = algo.get("Z", 4.0)
        if spec.sweep_axis == "robustness":
            gamma = sweep_value
        else:
            gamma = algo.get("gamma", eta - algo.get("epsilon", 0.2))
        report = oltq.strengthened_adaswitch_oltq(ell, reality, prediction,
                                                  gamma, Z=Z, seed=seed)
    elif algo.name == "qfrac":
        report = oltq.run_qfrac_baseline(ell, reality, seed=seed)
    else:
        raise ValueError(f"unknown oltq algorithm {algo.name!r}")

    ratio = report.val / opt if opt > 0 else None
    return {
        "app": spec.app, "algorithm": algo.name, "sweep_axis": spec.sweep_axis,
        "sweep_value": float(sweep_value), "seed": seed,
        "val": report.val, "opt": opt, "ratio": ratio,
        "phi_star": report.phi_star, "switches": report.switch_count,
        "bound": report.bounds.get("T5"),
        "flags": ";".join(report.flags),
    }


def _run_caching_row(spec: ExperimentSpec, algo: AlgorithmSpec, sweep_value: float,
                     seed: int, cache: dict) -> dict:
    metric, k = ks.read_metric(spec.params["metric"])
    reality = ks.read_requests(spec.params["instance"])
    if spec.prediction == "perfect":
        prediction = reality
    else:
        prediction = ks.read_requests(spec.params["prediction_file"])
    initial = ks.ServerConfig(tuple(metric.points[:k]))
    variant = "caching" if spec.app == "caching" else "general"
    epsilon = sweep_value if spec.sweep_axis == "epsilon" else algo.get("epsilon")
    report = ks.adaswitch_kse(metric, initial, reality, prediction,
                              epsilon=epsilon, variant=variant, seed=seed)
    return {
        "app": spec.app, "algorithm": algo.name, "sweep_axis": spec.sweep_axis,
        "sweep_value": float(sweep_value), "seed": seed,
        "val": report.val, "opt": report.opt, "ratio": report.ratio,
        "phi_star": report.phi_star, "switches": report.switch_count,
        "bound": report.bounds.get("T7", report.bounds.get("T6")),
        "flags": ";".join(report.flags),
    }


def _run_orra_row(spec: ExperimentSpec, algo: AlgorithmSpec, sweep_value: float,
                  seed: int, cache: dict) -> dict:
    params, reality = orra.read_instance(spec.params["instance"])
    if spec.prediction == "perfect":
        prediction = reality
    else:
        _, prediction = orra.read_instance(spec.params["prediction_file"])
    epsilon = sweep_value if spec.sweep_axis == "epsilon" else algo.get("epsilon")
    report = orra.adaswitch_orra(params, reality, prediction, epsilon,
                                 alpha=algo.get("alpha", 3.0), seed=seed,
                                 eta_online=algo.get("eta", 0.589),
                                 monte_carlo_cap=int(algo.get("mc_cap", 200)))
    return {
        "app": spec.app, "algorithm": algo.name, "sweep_axis": spec.sweep_axis,
        "sweep_value": float(sweep_value), "seed": seed,
        "val": report.val, "opt": report.opt, "ratio": report.ratio,
        "phi_star": report.phi_star, "switches": report.switch_count,
        "bound": report.bounds.get("T2"),
        "flags": ";".join(report.flags),
    }


_ROW_RUNNERS: dict[str, Callable] = {
    "oltq": _run_oltq_row,
    "kserver": _run_caching_row,
    "caching": _run_caching_row,
    "orra": _run_orra_row,
}


def run_experiment(spec: ExperimentSpec) -> tuple[list[dict], list[dict]]:
    """Produce one row per (algorithm, sweep point, seed) plus per-point
    aggregates.  Per-row failures are recorded in the row's flags and the
    run continues."""
    spec.validate()
    rows: list[dict] = []
    runner = _ROW_RUNNERS[spec.app]
    cache: dict = {}
    for algo in spec.algorithms:
        for sweep_value in spec.grid:
            for seed in spec.seeds:
                try:
                    rows.append(runner(spec, algo, sweep_value, seed, cache))
                except Exception as exc:
                    log.warning("row failed: %s/%s@%s seed=%s: %s", spec.app,
                                algo.name, sweep_value, seed, exc)
                    rows.append({
                        "app": spec.app, "algorithm": algo.name,
                        "sweep_axis": spec.sweep_axis,
                        "sweep_value": float(sweep_value), "seed": seed,
                        "val": math.nan, "opt": math.nan, "ratio": None,
                        "phi_star": math.nan, "switches": 0, "bound": None,
                        "flags": f"error:{type(exc).__name__}",
                    })
    return rows, aggregate(rows)


def aggregate(rows: Sequence[dict]) -> list[dict]:
    """Mean ratio with standard error per (algorithm, sweep point), in
    first-appearance order."""
    groups: dict[tuple, list[float]] = {}
    order: list[tuple] = []
    for row in rows:
        key = (row["algorithm"], row["sweep_value"])
        if key not in groups:
            groups[key] = []
            order.append(key)
        if row["ratio"] is not None and not (isinstance(row["ratio"], float)
                                             and math.isnan(row["ratio"])):
            groups[key].append(row["ratio"])
    out = []
    for key in order:
        vals = groups[key]
        n = len(vals)
        mean = sum(vals) / n if n else math.nan
        if n > 1:
            var = sum((v - mean) ** 2 for v in vals) / (n - 1)
            stderr = math.sqrt(var / n)
        else:
            stderr = 0.0
        out.append({"algorithm": key[0], "sweep_value": key[1],
                    "mean_ratio": mean, "stderr": stderr, "rows": n})
    return out


# ---------------------------------------------------------------------------
# Emission


def emit_report(rows: Sequence[dict], aggregates: Sequence[dict], out_dir: str,
                formats: Sequence[str] = ("csv", "svg"),
                stem: str = "report") -> list[str]:
    import os

    os.makedirs(out_dir, exist_ok=True)
    written = []
    if "csv" in formats:
        path = os.path.join(out_dir, f"{stem}.csv")
        with open(path, "w", encoding="ascii") as fh:
            fh.write(CSV_HEADER + "\n")
            for row in rows:
                fh.write(row_to_csv(row) + "\n")
        written.append(path)
        agg_path = os.path.join(out_dir, f"{stem}_aggregates.csv")
        with open(agg_path, "w", encoding="ascii") as fh:
            fh.write(AGGREGATE_HEADER + "\n")
            for a in aggregates:
                fh.write(",".join([a["algorithm"], _fmt(float(a["sweep_value"])),
                                   _fmt(a["mean_ratio"]), _fmt(a["stderr"]),
                                   str(a["rows"])]) + "\n")
        written.append(agg_path)
    if "svg" in formats:
        if not rows:
            raise ValueError("cannot plot an empty table")
        path = os.path.join(out_dir, f"{stem}.svg")
        with open(path, "w", encoding="ascii") as fh:
            fh.write(render_plot(aggregates,
                                 xlabel=rows[0]["sweep_axis"],
                                 ylabel="competitive ratio"))
        written.append(path)
    return written


_PALETTE = ["#1f6fb2", "#d1495b", "#3a7d44", "#8d6a9f", "#c77d1e", "#4f6d7a"]


def render_plot(aggregates: Sequence[dict], xlabel: str, ylabel: str,
                width: int = 640, height: int = 420) -> str:
    """Minimal hand-rolled SVG: one mean +/- stderr line per algorithm."""
    series: dict[str, list[tuple[float, float, float]]] = {}
    for a in aggregates:
        if isinstance(a["mean_ratio"], float) and math.isnan(a["mean_ratio"]):
            continue
        series.setdefault(a["algorithm"], []).append(
            (a["sweep_value"], a["mean_ratio"], a["stderr"]))
    xs = [p[0] for pts in series.values() for p in pts]
    ys = []
    for pts in series.values():
        for _, m, s in pts:
            ys.extend([m - s, m + s])
    if not xs or not ys:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad_y = 0.05 * (y_hi - y_lo)
    y_lo -= pad_y
    y_hi += pad_y
    margin = 60

    def sx(x: float) -> float:
        return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin)

    def sy(y: float) -> float:
        return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
    ]
    for i in range(5):
        xv = x_lo + i * (x_hi - x_lo) / 4
        yv = y_lo + i * (y_hi - y_lo) / 4
        parts.append(f'<text x="{sx(xv):.1f}" y="{height - margin + 18}" '
                     f'font-size="11" text-anchor="middle">{xv:.3g}</text>')
        parts.append(f'<text x="{margin - 8}" y="{sy(yv):.1f}" font-size="11" '
                     f'text-anchor="end" dominant-baseline="middle">{yv:.3g}</text>')
    parts.append(f'<text x="{width / 2:.0f}" y="{height - 12}" font-size="13" '
                 f'text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="16" y="{height / 2:.0f}" font-size="13" '
                 f'text-anchor="middle" transform="rotate(-90 16 {height / 2:.0f})">'
                 f'{ylabel}</text>')
    for idx, (label, pts) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        pts = sorted(pts)
        coords = " ".join(f"{sx(x):.2f},{sy(m):.2f}" for x, m, _ in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" '
                     f'stroke-width="1.8"/>')
        for x, m, s in pts:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(m):.2f}" r="2.6" '
                         f'fill="{color}"/>')
            if s > 0:
                parts.append(f'<line x1="{sx(x):.2f}" y1="{sy(m - s):.2f}" '
                             f'x2="{sx(x):.2f}" y2="{sy(m + s):.2f}" '
                             f'stroke="{color}" stroke-width="1"/>')
        parts.append(f'<rect x="{width - margin - 150}" y="{margin + 18 * idx}" '
                     f'width="12" height="4" fill="{color}"/>')
        parts.append(f'<text x="{width - margin - 132}" y="{margin + 18 * idx + 5}" '
                     f'font-size="12">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts)
