"""Seeded waste experiments, growth-class fitting and CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .adversary import adversarial_stream, make_policy
from .distribution import DiscreteDistribution, check_family
from .packers import make_packer
from .rng import SizeStream, Streams
from .wastelp import build_waste_lp, gap_rates, solve_lp

CSV_COLUMNS = (
    "alg",
    "dist",
    "seed",
    "trial",
    "n",
    "bins",
    "waste_num",
    "waste_den",
    "waste_float",
    "ss_value",
    "elapsed_ms",
)

BOUNDED = "Bounded"
LOG = "Log"
SQRT = "Sqrt"
LINEAR = "Linear"
INDETERMINATE = "Indeterminate"

# growth-class thresholds on the log-log slope; tunable
ALPHA_LINEAR = 0.85
ALPHA_SQRT = (0.35, 0.65)
F_LOG = 10.0


class ConfigError(ValueError):
    pass


class InsufficientData(ValueError):
    pass


def geometric_checkpoints(n: int, points: int = 12) -> tuple[int, ...]:
    """n/2^(points-1), ..., n/2, n (rounded up, duplicates dropped)."""
    out = sorted({max(1, -(-n // (1 << k))) for k in range(points)})
    return tuple(out)


def parse_checkpoints(spec: str | None, n: int) -> tuple[int, ...]:
    if spec is None or spec == "" or spec == "geom":
        return geometric_checkpoints(n)
    if spec.startswith("geom:"):
        try:
            k = int(spec[5:])
        except ValueError:
            raise ConfigError(f"bad checkpoint spec {spec!r}") from None
        if k < 1:
            raise ConfigError("geom:K needs K >= 1")
        return geometric_checkpoints(n, k)
    try:
        return tuple(int(x) for x in spec.split(","))
    except ValueError:
        raise ConfigError(f"bad checkpoint spec {spec!r}") from None


@dataclass
class ExperimentConfig:
    alg: str
    n: int
    dist: DiscreteDistribution | None = None
    family: Sequence[DiscreteDistribution] | None = None
    adversary: str | None = None
    checkpoints: tuple | None = None
    trials: int = 1
    seed: int = 0
    jobs: int = 1
    timing: bool = False
    keep_profiles: bool = False
    backend: str | None = None

    def __post_init__(self):
        if self.checkpoints is None:
            self.checkpoints = geometric_checkpoints(self.n) if self.n >= 1 else ()
        self.checkpoints = tuple(int(c) for c in self.checkpoints)

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        cp = self.checkpoints
        if not cp:
            raise ConfigError("at least one checkpoint is required")
        if any(b <= a for a, b in zip(cp, cp[1:])) or cp[0] < 1 or cp[-1] > self.n:
            raise ConfigError(f"checkpoints must be strictly increasing within [1, n]: {cp}")
        if self.adversary is None:
            if self.dist is None:
                raise ConfigError("a distribution is required (or a family plus an adversary)")
        else:
            if not self.family:
                raise ConfigError("an adversary needs a family of distributions")
            check_family(self.family)

    @property
    def B(self) -> int:
        return self.dist.bin_size if self.adversary is None else self.family[0].bin_size

    @property
    def label(self) -> str:
        if self.adversary is None:
            return self.dist.label
        return f"adversary:{self.adversary}:B={self.B};members={len(self.family)}"


@dataclass
class Checkpoint:
    n: int
    bins: int
    waste: Fraction
    ss_value: int
    elapsed_ms: float | None = None
    profile: dict | None = None


@dataclass
class RunRecord:
    alg: str
    dist: str
    seed: int
    trial: int
    B: int
    checkpoints: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def final(self) -> Checkpoint:
        return self.checkpoints[-1]

    def rows(self) -> list[dict]:
        out = []
        for cp in self.checkpoints:
            out.append(
                {
                    "alg": self.alg,
                    "dist": self.dist,
                    "seed": self.seed,
                    "trial": self.trial,
                    "n": cp.n,
                    "bins": cp.bins,
                    "waste_num": cp.waste.numerator,
                    "waste_den": cp.waste.denominator,
                    "waste_float": float(cp.waste),
                    "ss_value": cp.ss_value,
                    "elapsed_ms": None if cp.elapsed_ms is None else round(cp.elapsed_ms, 3),
                }
            )
        return out


def _packer_kwargs(cfg: ExperimentConfig) -> dict:
    """Per-distribution LP work shared by all trials."""
    name = cfg.alg.partition(":")[0]
    if cfg.dist is None:
        return {}
    if name == "ssf":
        return {"c": solve_lp(build_waste_lp(cfg.dist)).objective}
    if name == "ss2star":
        return {"gaps": gap_rates(solve_lp(build_waste_lp(cfg.dist)))}
    return {}


def run_trial(cfg: ExperimentConfig, trial: int, kw: dict | None = None) -> RunRecord:
    streams = Streams(cfg.seed, trial)
    B = cfg.B
    kw = _packer_kwargs(cfg) if kw is None else kw
    packer = make_packer(cfg.alg, B, dist=cfg.dist, rng=streams, backend=cfg.backend, **kw)
    rec = RunRecord(cfg.alg, cfg.label, cfg.seed, trial, B)
    t0 = time.perf_counter()

    def snap(n):
        p = packer.packing
        rec.checkpoints.append(
            Checkpoint(
                n,
                p.bins,
                packer.waste(),
                p.ss,
                (time.perf_counter() - t0) * 1000.0 if cfg.timing else None,
                p.profile.as_dict() if cfg.keep_profiles else None,
            )
        )

    if cfg.adversary is None:
        items = SizeStream(cfg.dist.sampler(), streams.items)
        done = 0
        for c in cfg.checkpoints:
            packer.feed(items.take(c - done))
            done = c
            snap(c)
    else:
        policy = make_policy(cfg.adversary, cfg.family)
        marks = set(cfg.checkpoints)
        run = adversarial_stream(
            policy, packer, cfg.checkpoints[-1], streams.adversary, on_step=lambda i: snap(i) if i in marks else None
        )
        rec.extra["members"] = np.bincount(run.members, minlength=len(cfg.family)).tolist()
    if hasattr(packer, "events"):
        rec.extra["events"] = len(packer.events)
    return rec


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """All trials, ordered by trial index; output does not depend on ``jobs``."""
    cfg.validate()
    kw = _packer_kwargs(cfg)
    if cfg.jobs == 1 or cfg.trials == 1:
        return [run_trial(cfg, t, kw) for t in range(cfg.trials)]
    with ThreadPoolExecutor(max_workers=cfg.jobs) as ex:
        return list(ex.map(lambda t: run_trial(cfg, t, kw), range(cfg.trials)))


# -- growth fitting ----------------------------------------------------------------


@dataclass(frozen=True)
class GrowthFit:
    cls: str
    alpha: float  # log-log slope over the upper half of the checkpoints
    r2: float  # goodness of that log-log fit
    log_slope: float  # b in W = a + b ln n (all points)
    f_stat: float  # constant vs a + b ln n


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Intercept, slope, residual sum of squares."""
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    b = float(((x - xm) * (y - ym)).sum()) / sxx
    a = float(ym - b * xm)
    rss = float(((y - a - b * x) ** 2).sum())
    return a, b, rss


def fit_growth(points: Sequence[tuple[float, float]], floor: float = 1e-9) -> GrowthFit:
    """Classify waste growth from (n, waste) pairs; repeated n are separate trials.

    alpha > 0.85 is Linear and alpha in [0.35, 0.65] is Sqrt.  Below 0.35 an
    F-test of W = a + b ln n against a constant separates Log from Bounded.
    Anything else is Indeterminate.
    """
    pts = [(float(n), float(w)) for n, w in points]
    ns = sorted({n for n, _ in pts})
    if len(ns) < 5:
        raise InsufficientData(f"need at least 5 checkpoints, got {len(ns)}")
    if ns[0] <= 0 or ns[-1] / ns[0] < 100:
        raise InsufficientData("checkpoints must span at least two decades")
    mean = {n: np.mean([w for m, w in pts if m == n]) for n in ns}
    upper = ns[len(ns) // 2 :]
    lx = np.log(np.asarray(upper))
    ly = np.log(np.maximum(np.asarray([mean[n] for n in upper]), floor))
    _, alpha, rss = _ols(lx, ly)
    tss = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 if tss == 0 else 1.0 - rss / tss

    x = np.log(np.asarray([n for n, _ in pts]))
    y = np.asarray([w for _, w in pts])
    _, b, rss1 = _ols(x, y)
    rss0 = float(((y - y.mean()) ** 2).sum())
    dof = len(pts) - 2
    if rss1 <= 1e-12 * max(1.0, rss0):
        f = math.inf if rss0 > 1e-12 else 0.0
    else:
        f = (rss0 - rss1) / (rss1 / dof) if dof > 0 else 0.0

    if alpha > ALPHA_LINEAR:
        cls = LINEAR
    elif ALPHA_SQRT[0] <= alpha <= ALPHA_SQRT[1]:
        cls = SQRT
    elif alpha < ALPHA_SQRT[0]:
        cls = LOG if (f > F_LOG and b > 0) else BOUNDED
    else:
        cls = INDETERMINATE
    return GrowthFit(cls, float(alpha), float(r2), float(b), float(f))


def fit_records(records: Sequence[RunRecord]) -> GrowthFit:
    pts = [(cp.n, cp.waste) for r in records for cp in r.checkpoints]
    return fit_growth(pts, floor=1.0 / records[0].B)


# -- output --------------------------------------------------------------------------


def to_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        for row in r.rows():
            row = dict(row)
            row["waste_float"] = repr(row["waste_float"])
            row["elapsed_ms"] = "" if row["elapsed_ms"] is None else repr(row["elapsed_ms"])
            w.writerow([row[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def to_json(records: Sequence[RunRecord]) -> str:
    rows = [row for r in records for row in r.rows()]
    return json.dumps(rows, indent=1) + "\n"


def emit(records: Sequence[RunRecord], fmt: str = "csv", path=None) -> str:
    if fmt == "csv":
        text = to_csv(records)
    elif fmt == "json":
        text = to_json(records)
    else:
        raise ConfigError(f"unknown format {fmt!r}; use csv or json")
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
