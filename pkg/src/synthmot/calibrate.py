"""Real-vs-virtual gap calibration of tracker hyperparameters.

A pair of sequences (e.g. a seed sequence and its clone, or a clone and a
condition variation) is scored by the gap objective: joint MOTA rewarded,
MOTA difference penalized relative to how much every other metric moves.
Hyperparameters are searched with quasi-random sampling or with a
tree-structured Parzen estimator (density-ratio SMBO).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.stats import qmc

from . import motmetrics
from .motmetrics import MotReport
from .pipeline import SequenceData, map_jobs, track_and_evaluate
from .track import HyperParams

GAP_EPS = 1e-3
OBJECTIVE_VERSION = (
    "gap-v1: sum(MOTA_A+MOTA_B) - sum|dMOTA| / (1e-3 + mean_m mean_i |dm|), "
    "m in MOTP,MT,ML,P,R,I/GT,F/GT; -inf if any report has no matches"
)
OTHER_METRICS = ("MOTP", "MT", "ML", "P", "R", "I_rate", "F_rate")
KINDS = ("linear", "log", "int", "categorical")


# ---------------------------------------------------------------------------
# Gap objective


def _other_metrics(r: MotReport) -> np.ndarray:
    gt = max(r.total_gt, 1)
    return np.array([r.MOTP, r.MT, r.ML, r.P, r.R, r.idsw / gt, r.frag / gt])


def gap_objective(pairs: Sequence[tuple[MotReport, MotReport]], eps: float = GAP_EPS) -> float:
    """Joint MOTA minus the MOTA gap normalized by the mean gap of the other metrics.

    A report without a single match has undefined MOTP, so the pair cannot be
    compared and the objective is ``-inf``. This also keeps the trivial
    "output nothing" tracker (zero gap everywhere) from winning.
    """
    if not pairs:
        raise ValueError("gap objective needs at least one pair")
    if any(a.tp == 0 or b.tp == 0 for a, b in pairs):
        return -math.inf
    total = sum(a.MOTA + b.MOTA for a, b in pairs)
    mota_gap = sum(abs(a.MOTA - b.MOTA) for a, b in pairs)
    other = np.mean([np.abs(_other_metrics(a) - _other_metrics(b)) for a, b in pairs], axis=0)
    return float(total - mota_gap / (eps + other.mean()))


# ---------------------------------------------------------------------------
# Search space


@dataclass(frozen=True)
class ParamDim:
    name: str
    kind: str
    low: float = 0.0
    high: float = 1.0
    choices: tuple = ()

    def __post_init__(self):
        # one numeric type so configs reload byte-identically
        object.__setattr__(self, "low", float(self.low))
        object.__setattr__(self, "high", float(self.high))
        object.__setattr__(self, "choices", tuple(self.choices))
        if self.kind not in KINDS:
            raise ValueError(f"{self.name}: unknown kind {self.kind!r}")
        if self.kind == "categorical":
            if not self.choices:
                raise ValueError(f"{self.name}: categorical needs choices")
        elif not self.low <= self.high:
            raise ValueError(f"{self.name}: empty bounds")
        if self.kind == "log" and self.low <= 0:
            raise ValueError(f"{self.name}: log bounds must be positive")

    def from_unit(self, u: float):
        u = min(max(float(u), 0.0), 1.0)
        if self.kind == "linear":
            return self.low + u * (self.high - self.low)
        if self.kind == "log":
            return float(math.exp(math.log(self.low) + u * (math.log(self.high) - math.log(self.low))))
        if self.kind == "int":
            lo, hi = int(self.low), int(self.high)
            return min(hi, lo + int(math.floor(u * (hi - lo + 1))))
        return self.choices[min(len(self.choices) - 1, int(math.floor(u * len(self.choices))))]

    def to_unit(self, x) -> float:
        if self.kind == "linear":
            return (x - self.low) / (self.high - self.low) if self.high > self.low else 0.5
        if self.kind == "log":
            lo, hi = math.log(self.low), math.log(self.high)
            return (math.log(x) - lo) / (hi - lo) if hi > lo else 0.5
        if self.kind == "int":
            lo, hi = int(self.low), int(self.high)
            return (x - lo + 0.5) / (hi - lo + 1)
        return (self.choices.index(x) + 0.5) / len(self.choices)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"name": self.name, "kind": self.kind}
        if self.kind == "categorical":
            d["choices"] = list(self.choices)
        else:
            d["low"], d["high"] = self.low, self.high
        return d

    @classmethod
    def from_dict(cls, d) -> "ParamDim":
        return cls(d["name"], d["kind"], float(d.get("low", 0.0)), float(d.get("high", 1.0)),
                   tuple(d.get("choices", ())))


@dataclass(frozen=True)
class ParamSpace:
    dims: tuple[ParamDim, ...]

    def __post_init__(self):
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names")

    def __len__(self):
        return len(self.dims)

    def from_unit(self, u) -> dict:
        return {d.name: d.from_unit(x) for d, x in zip(self.dims, u)}

    def to_unit(self, params: Mapping) -> np.ndarray:
        return np.array([d.to_unit(params[d.name]) for d in self.dims])

    def to_list(self) -> list:
        return [d.to_dict() for d in self.dims]

    @classmethod
    def from_list(cls, items) -> "ParamSpace":
        return cls(tuple(ParamDim.from_dict(d) for d in items))


def check_hyperparam_space(space: ParamSpace) -> None:
    fields = {f.name for f in dataclasses.fields(HyperParams)}
    unknown = [d.name for d in space.dims if d.name not in fields]
    if unknown:
        raise ValueError(f"parameters not in HyperParams: {unknown}")


def default_param_space() -> ParamSpace:
    return ParamSpace((
        ParamDim("score_threshold", "linear", 0.0, 1.0),
        ParamDim("entry_cost", "log", 1e-2, 10.0),
        ParamDim("exit_cost", "log", 1e-2, 10.0),
        ParamDim("max_skip", "int", 1, 5),
        ParamDim("skip_decay", "linear", 0.5, 1.0),
        ParamDim("min_iou", "linear", 0.1, 0.7),
        ParamDim("detection_cost_scale", "log", 0.1, 10.0),
    ))


# ---------------------------------------------------------------------------
# Optimizer


class ObjectiveError(RuntimeError):
    def __init__(self, params: Mapping, cause: BaseException):
        super().__init__(f"objective failed at {dict(params)}: {cause!r}")
        self.params = dict(params)


@dataclass
class Trial:
    params: dict
    value: float


def _parzen(obs: np.ndarray, prior_weight: float = 1.0):
    """1-D Parzen mixture on [0, 1]: (means, sigmas, weights), incl. a flat-ish prior."""
    mus = np.append(obs, 0.5)
    order = np.argsort(mus, kind="stable")
    srt = mus[order]
    if len(srt) > 1:
        left = np.diff(srt, prepend=0.0)
        right = np.diff(srt, append=1.0)
        sig_sorted = np.maximum(left, right)
    else:
        sig_sorted = np.ones(1)
    sig = np.empty_like(sig_sorted)
    sig[order] = sig_sorted
    sig = np.clip(sig, 1.0 / min(100.0, len(mus) + 1.0), 1.0)
    sig[-1] = 1.0
    w = np.ones(len(mus))
    w[-1] = prior_weight
    return mus, sig, w / w.sum()


def _log_density(x: np.ndarray, mus, sig, w) -> np.ndarray:
    z = (x[:, None] - mus[None, :]) / sig[None, :]
    comp = np.log(w)[None, :] - 0.5 * z * z - np.log(sig)[None, :]
    m = comp.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(comp - m).sum(axis=1, keepdims=True)))[:, 0]


def _cat_probs(obs_idx: np.ndarray, k: int) -> np.ndarray:
    counts = np.bincount(obs_idx, minlength=k).astype(float) + 1.0
    return counts / counts.sum()


def _tpe_propose(space: ParamSpace, trials: list[Trial], rng: np.random.Generator,
                 gamma: float = 0.25, n_candidates: int = 24) -> dict:
    values = np.array([t.value for t in trials])
    units = np.array([space.to_unit(t.params) for t in trials])
    n_good = max(1, int(math.ceil(gamma * len(trials))))
    # stable descending sort: earlier trials win ties
    order = np.argsort(-values, kind="stable")
    good, bad = units[order[:n_good]], units[order[n_good:]]
    cand = np.empty((n_candidates, len(space)))
    score = np.zeros(n_candidates)
    for d, dim in enumerate(space.dims):
        if dim.kind == "categorical":
            k = len(dim.choices)
            to_idx = lambda u: np.minimum((u * k).astype(int), k - 1)  # noqa: E731
            pg = _cat_probs(to_idx(good[:, d]), k)
            pb = _cat_probs(to_idx(bad[:, d]), k)
            idx = rng.choice(k, size=n_candidates, p=pg)
            cand[:, d] = (idx + 0.5) / k
            score += np.log(pg[idx]) - np.log(pb[idx])
            continue
        mg, sg, wg = _parzen(good[:, d])
        mb, sb, wb = _parzen(bad[:, d])
        comp = rng.choice(len(mg), size=n_candidates, p=wg)
        x = rng.normal(mg[comp], sg[comp])
        # resample out-of-range draws by reflection into [0, 1]
        x = np.abs(x)
        x = np.where(x > 1.0, 2.0 - x, x)
        x = np.clip(x, 0.0, 1.0)
        cand[:, d] = x
        score += _log_density(x, mg, sg, wg) - _log_density(x, mb, sb, wb)
    best = int(np.argmax(score))
    return space.from_unit(cand[best])


def optimize(
    objective: Callable[[dict], float],
    space: ParamSpace,
    budget: int,
    strategy: str = "smbo",
    seed: int = 0,
) -> tuple[dict, list[Trial]]:
    """Maximize ``objective`` over ``space`` with ``budget`` evaluations."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if strategy not in ("random", "smbo"):
        raise ValueError(f"unknown strategy {strategy!r}")
    n_startup = budget if strategy == "random" else min(budget, max(10, budget // 5))
    sampler = qmc.Halton(d=len(space), scramble=True, seed=np.random.default_rng([seed, 1]))
    startup = sampler.random(n_startup)
    rng = np.random.default_rng([seed, 2])
    history: list[Trial] = []
    for i in range(budget):
        params = space.from_unit(startup[i]) if i < n_startup else _tpe_propose(space, history, rng)
        try:
            value = float(objective(params))
        except Exception as e:
            raise ObjectiveError(params, e) from e
        history.append(Trial(params, value))
    best = max(range(len(history)), key=lambda k: (history[k].value, -k))
    return history[best].params, history


# ---------------------------------------------------------------------------
# Protocol


METRICS = ("MOTA", "MOTP", "MT", "ML", "I", "F", "P", "R", "F1")


def deltas(a: MotReport, b: MotReport) -> dict:
    ma, mb = a.metrics(), b.metrics()
    return {k: mb[k] - ma[k] for k in METRICS}


@dataclass
class PairResult:
    name: str
    name_a: str
    name_b: str
    report_a: MotReport
    report_b: MotReport
    hyperparams: dict
    objective: float
    history: list[Trial] = field(default_factory=list)

    @property
    def deltas(self) -> dict:
        return deltas(self.report_a, self.report_b)


@dataclass
class GapReport:
    pairs: list[PairResult]
    mode: str
    objective: float
    formula: str = OBJECTIVE_VERSION

    @property
    def aggregate_deltas(self) -> dict:
        a = motmetrics.aggregate(p.report_a for p in self.pairs)
        b = motmetrics.aggregate(p.report_b for p in self.pairs)
        return deltas(a, b)

    def to_dict(self) -> dict:
        return {
            "formula": self.formula,
            "mode": self.mode,
            "objective": self.objective,
            "aggregate_deltas": self.aggregate_deltas,
            "pairs": [
                {
                    "name": p.name, "a": p.name_a, "b": p.name_b,
                    "report_a": p.report_a.to_dict(), "report_b": p.report_b.to_dict(),
                    "deltas": p.deltas, "hyperparams": p.hyperparams, "objective": p.objective,
                }
                for p in self.pairs
            ],
        }

    def table(self) -> str:
        rows = []
        for p in self.pairs:
            rows.append((p.name_a, p.report_a.metrics()))
            rows.append((p.name_b, p.report_b.metrics()))
        a = motmetrics.aggregate(p.report_a for p in self.pairs)
        b = motmetrics.aggregate(p.report_b for p in self.pairs)
        rows += [("total_A", a.metrics()), ("total_B", b.metrics())]
        return motmetrics.format_table(rows)

    def history_csv(self, space: ParamSpace) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        names = [d.name for d in space.dims]
        w.writerow(["pair", "iteration", *names, "objective"])
        # in global mode every pair shares one search
        runs = [("global", self.pairs[0].history)] if self.mode == "global" else [
            (p.name, p.history) for p in self.pairs
        ]
        for name, history in runs:
            for i, t in enumerate(history):
                w.writerow([name, i, *(repr(t.params[n]) for n in names), repr(t.value)])
        return buf.getvalue()

    def best_params(self) -> dict:
        if self.mode == "global":
            return {"mode": "global", "params": self.pairs[0].hyperparams}
        return {"mode": "per_pair", "pairs": {p.name: p.hyperparams for p in self.pairs}}


def _hyperparams(params: Mapping, base: HyperParams | None = None) -> HyperParams:
    d = (base or HyperParams()).to_dict()
    d.update(params)
    return HyperParams.from_dict(d)


def _eval_pairs(pairs, hp, iou_threshold, jobs):
    seqs = [s for pair in pairs for s in pair]
    reports = map_jobs(_EvalJob(hp, iou_threshold), seqs, jobs)
    return [(reports[2 * i], reports[2 * i + 1]) for i in range(len(pairs))]


@dataclass(frozen=True)
class _EvalJob:
    hp: HyperParams
    iou_threshold: float

    def __call__(self, seq: SequenceData) -> MotReport:
        return track_and_evaluate(seq, self.hp, self.iou_threshold)[1]


def run_gap_protocol(
    pairs: Sequence[tuple[SequenceData, SequenceData]],
    space: ParamSpace | None = None,
    budget: int = 40,
    seed: int = 0,
    strategy: str = "smbo",
    mode: str = "per_pair",
    base: HyperParams | None = None,
    iou_threshold: float = 0.5,
    jobs: int = 1,
) -> GapReport:
    """Search one fixed hyperparameter set per pair (or one for all pairs).

    Every sequence of a pair is tracked with the same parameters; detections
    are precomputed in ``SequenceData`` so only tracking is repeated.
    """
    if mode not in ("per_pair", "global"):
        raise ValueError(f"unknown mode {mode!r}")
    if not pairs:
        raise ValueError("need at least one pair")
    space = space or default_param_space()
    check_hyperparam_space(space)
    groups = [[p] for p in pairs] if mode == "per_pair" else [list(pairs)]
    results: list[PairResult] = []
    for group in groups:
        def objective(params, group=group):
            return gap_objective(_eval_pairs(group, _hyperparams(params, base), iou_threshold, jobs))

        best, history = optimize(objective, space, budget, strategy, seed)
        hp = _hyperparams(best, base)
        reports = _eval_pairs(group, hp, iou_threshold, jobs)
        value = gap_objective(reports)
        for (a, b), (ra, rb) in zip(group, reports):
            results.append(
                PairResult(f"{a.name}~{b.name}", a.name, b.name, ra, rb, hp.to_dict(), value, history)
            )
    if mode == "per_pair":
        total = sum(r.objective for r in results)
    else:
        total = results[0].objective
    return GapReport(results, mode, total)


def gap_report_json(report: GapReport) -> str:
    return json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n"
