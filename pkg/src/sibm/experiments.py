"""Monte Carlo harness: trials, sweeps, and CSV output.

Every trial draws its random stream from (master seed, sweep index, trial
index), so results do not depend on worker count or execution order.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import theory
from .ising import (
    ENUMERATION_CUTOFF,
    McmcSchedule,
    config_index,
    enumerate_gibbs,
    exact_sample_indices,
    sample_chain,
    sample_set_mcmc,
)
from .model import RegimeError, SibmParams, ValidationError, validate_params
from .recover import learn_sibm, recovery_success
from .ssbm import generate_ssbm, random_balanced_partition, sample_sbm_graph
from .stats import dist_ones, dist_pm, empirical_distribution, exp_sum, tv_distance
from .utils import as_generator, trial_seed

__all__ = [
    "KINDS",
    "SCHEMA_VERSION",
    "ExperimentConfig",
    "TrialRecord",
    "ExperimentResult",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_success_curve",
    "run_distance_scaling",
    "run_concentration",
    "run_ones_regime",
    "run_sampler_validation",
    "success_interval",
    "loglog_slope",
]

SCHEMA_VERSION = 1
KINDS = ("success_curve", "distance_scaling", "concentration", "ones_regime", "sampler_validation")
SWEEP_AXES = ("m", "beta", "n")

DEFAULT_BANDS = {
    "concentration": (0.5, 2.0),
    "ones_regime": (0.0, 0.1),
    "distance_scaling": (-0.15, 0.15),
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    params: SibmParams
    sweep: str = "m"
    values: tuple = ()
    trials: int = 1
    seed: int = 0
    burn_in: int | None = None
    anneal: int | None = None
    thinning: int = 1
    band: tuple[float, float] | None = None
    draws: int = 100_000
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown experiment kind {self.kind!r}")
        if self.sweep not in SWEEP_AXES:
            raise ValidationError(f"sweep axis must be one of {SWEEP_AXES}, got {self.sweep!r}")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        if not self.values:
            object.__setattr__(self, "values", (getattr(self.params, self.sweep),))
        if self.band is None and self.kind in DEFAULT_BANDS:
            object.__setattr__(self, "band", DEFAULT_BANDS[self.kind])

    def point_params(self, value) -> SibmParams:
        if self.sweep in ("m", "n"):
            value = int(value)
        return replace(self.params, **{self.sweep: value})

    def schedule(self, n: int) -> McmcSchedule:
        default = McmcSchedule.default(n)
        return McmcSchedule(
            burn_in=default.burn_in if self.burn_in is None else self.burn_in,
            anneal=default.anneal if self.anneal is None else self.anneal,
            thinning=self.thinning,
        )


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    value: float
    success: bool | None
    dist_pm: tuple[int, ...]
    dist_ones: tuple[int, ...]
    exp_sum: float
    ratio: float
    wall_time: float = field(compare=False)

    # wall time is excluded: CSVs must be byte-identical across runs
    CSV_FIELDS = ("trial", "value", "success", "dist_pm", "dist_ones", "exp_sum", "ratio")

    def csv_row(self) -> list:
        success = "" if self.success is None else int(self.success)
        return [
            self.trial, _fmt(self.value), success,
            " ".join(map(str, self.dist_pm)), " ".join(map(str, self.dist_ones)),
            _fmt(self.exp_sum), _fmt(self.ratio),
        ]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[TrialRecord]
    summary: list[dict]
    meta: dict

    def summary_csv(self) -> str:
        return _render_csv(self._header_lines(), list(self.summary[0]) if self.summary else [],
                           [[_fmt(v) for v in row.values()] for row in self.summary])

    def trials_csv(self) -> str:
        return _render_csv(self._header_lines(), list(TrialRecord.CSV_FIELDS),
                           [r.csv_row() for r in self.records])

    def write(self, path, trials_path=None) -> None:
        Path(path).write_bytes(self.summary_csv().encode("ascii"))
        if trials_path is not None:
            Path(trials_path).write_bytes(self.trials_csv().encode("ascii"))

    def _header_lines(self) -> list[str]:
        cfg = self.config
        lines = [
            f"schema: sibm.{cfg.kind}/{SCHEMA_VERSION}",
            f"seed: {cfg.seed}",
            f"params: n={cfg.params.n} a={_fmt(cfg.params.a)} b={_fmt(cfg.params.b)} "
            f"alpha={_fmt(cfg.params.alpha)} beta={_fmt(cfg.params.beta)} m={cfg.params.m}",
            f"sweep: {cfg.sweep}={','.join(_fmt(v) for v in cfg.values)}",
            f"trials: {cfg.trials}",
        ]
        if cfg.band is not None:
            lines.append(f"band: {_fmt(cfg.band[0])},{_fmt(cfg.band[1])}")
        lines.extend(f"{k}: {_fmt(v)}" for k, v in self.meta.items())
        return lines


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def _render_csv(comments, header, rows) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


# -- config files ---------------------------------------------------------

_INT_KEYS = {"n", "m", "trials", "seed", "burn_in", "anneal", "thinning", "draws", "workers"}
_FLOAT_KEYS = {"a", "b", "alpha", "beta"}


def parse_config(text: str) -> ExperimentConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"config line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        raw[key] = value
    known = _INT_KEYS | _FLOAT_KEYS | {"kind", "sweep", "values", "band"}
    unknown = set(raw) - known
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    try:
        ints = {k: int(raw[k]) for k in _INT_KEYS & raw.keys()}
        floats = {k: float(raw[k]) for k in _FLOAT_KEYS & raw.keys()}
        params = SibmParams(
            n=ints.pop("n"), a=floats["a"], b=floats["b"],
            alpha=floats["alpha"], beta=floats["beta"], m=ints.pop("m", 1),
        )
    except KeyError as exc:
        raise ValidationError(f"config is missing key {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise ValidationError(f"bad numeric value in config: {exc}") from exc
    sweep = raw.get("sweep", "m")
    values = ()
    if "values" in raw:
        conv = float if sweep == "beta" else int
        values = tuple(conv(v) for v in raw["values"].split(",") if v.strip())
    band = None
    if "band" in raw:
        lo, hi = (float(v) for v in raw["band"].split(","))
        band = (lo, hi)
    return ExperimentConfig(
        kind=raw.get("kind", "success_curve"), params=params, sweep=sweep,
        values=values, band=band, **ints,
    )


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


# -- trials ---------------------------------------------------------------


def _sample_trial(config: ExperimentConfig, point: int, trial: int) -> TrialRecord:
    start = time.perf_counter()
    value = config.values[point]
    params = config.point_params(value)
    rng = as_generator(trial_seed(config.seed, point, trial))
    graph = generate_ssbm(params, rng)
    es = exp_sum(graph, params.beta)
    ratio = es / params.n ** theory.g(params.a, params.b, params.beta)
    if config.kind == "concentration":
        return TrialRecord(trial, value, None, (), (), es, ratio, time.perf_counter() - start)
    samples = sample_set_mcmc(graph, params, config.schedule(params.n), rng)
    x_hat = learn_sibm(samples, rng)
    return TrialRecord(
        trial=trial, value=value,
        success=recovery_success(x_hat, graph.labels),
        dist_pm=tuple(dist_pm(s, graph.labels) for s in samples),
        dist_ones=tuple(dist_ones(s) for s in samples),
        exp_sum=es, ratio=ratio, wall_time=time.perf_counter() - start,
    )


def _run_task(args):
    config, point, trial = args
    return _sample_trial(config, point, trial)


def _run_trials(config: ExperimentConfig) -> list[TrialRecord]:
    tasks = [(config, p, t) for p in range(len(config.values)) for t in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            out = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * config.workers))))
    else:
        out = [_run_task(t) for t in tasks]
    return out


def _by_point(config, records):
    k = config.trials
    return [records[i * k:(i + 1) * k] for i in range(len(config.values))]


def success_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float, float]:
    """(stderr, lo, hi): normal interval, Wilson score interval below 30 trials."""
    rate = successes / trials
    se = math.sqrt(rate * (1 - rate) / trials)
    if trials >= 30:
        return se, max(0.0, rate - z * se), min(1.0, rate + z * se)
    denom = 1 + z * z / trials
    centre = (rate + z * z / (2 * trials)) / denom
    half = z * math.sqrt(rate * (1 - rate) / trials + z * z / (4 * trials * trials)) / denom
    return se, max(0.0, centre - half), min(1.0, centre + half)


def loglog_slope(ns, means) -> float:
    """Least-squares slope of ln(mean) against ln(n), over points with mean > 0."""
    ns = np.asarray(ns, dtype=float)
    means = np.asarray(means, dtype=float)
    keep = means > 0
    if keep.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(ns[keep]), np.log(means[keep]), 1)
    return float(slope)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise RegimeError(message)


def _check_points(config: ExperimentConfig) -> list[theory.ThresholdReport]:
    _require(config.kind != "sampler_validation", "use run_sampler_validation")
    reports = []
    for v in config.values:
        params = validate_params(config.point_params(v))
        reports.append(theory.threshold_report(params))
    return reports


def _schedule_meta(config: ExperimentConfig) -> dict:
    ns = sorted({config.point_params(v).n for v in config.values})
    parts = [f"n={n}:anneal={s.anneal},burn_in={s.burn_in}"
             for n, s in ((n, config.schedule(n)) for n in ns)]
    return {"schedule": " ".join(parts) + " (independent hot-start chain per sample)"}


def run_success_curve(config: ExperimentConfig) -> ExperimentResult:
    reports = _check_points(config)
    for r in reports:
        _require(r.alpha_regime is theory.AlphaRegime.ABOVE,
                 f"success curve needs alpha > b*beta (beta={r.beta})")
        _require(r.beta_star is not None, "success curve needs sqrt(a) - sqrt(b) > sqrt(2)")
    records = _run_trials(config)
    summary = []
    for value, recs, rep in zip(config.values, _by_point(config, records), reports):
        wins = sum(bool(r.success) for r in recs)
        se, lo, hi = success_interval(wins, len(recs))
        summary.append({
            "value": value, "trials": len(recs), "successes": wins,
            "rate": wins / len(recs), "stderr": se, "ci_low": lo, "ci_high": hi,
            "m_star": rep.m_star, "predicted": rep.predicted,
        })
    return ExperimentResult(config, records, summary, _schedule_meta(config))


def run_distance_scaling(config: ExperimentConfig) -> ExperimentResult:
    _require(config.sweep == "n", "distance scaling sweeps n")
    reports = _check_points(config)
    for r in reports:
        _require(r.alpha_regime is theory.AlphaRegime.ABOVE, "distance scaling needs alpha > b*beta")
        _require(r.beta_star is not None and r.beta <= r.beta_star,
                 "distance scaling needs beta <= beta_star")
    records = _run_trials(config)
    summary = []
    for value, recs in zip(config.values, _by_point(config, records)):
        d = np.array([x for r in recs for x in r.dist_pm], dtype=float)
        summary.append({
            "n": int(value), "trials": len(recs), "samples": d.size,
            "mean_dist_pm": float(d.mean()),
            "stderr": float(d.std(ddof=1) / math.sqrt(d.size)) if d.size > 1 else math.nan,
        })
    slope = loglog_slope([s["n"] for s in summary], [s["mean_dist_pm"] for s in summary])
    g_beta = reports[0].g_at_beta
    meta = _schedule_meta(config)
    meta.update(slope=slope, g_beta=g_beta, slope_minus_g=slope - g_beta)
    return ExperimentResult(config, records, summary, meta)


def run_concentration(config: ExperimentConfig) -> ExperimentResult:
    reports = _check_points(config)
    for r in reports:
        _require(r.beta_star is not None, "concentration needs sqrt(a) - sqrt(b) > sqrt(2)")
        _require(r.beta <= r.beta_star, "concentration needs beta <= beta_star")
    records = _run_trials(config)
    lo, hi = config.band
    summary = []
    for value, recs, rep in zip(config.values, _by_point(config, records), reports):
        ratios = np.array([r.ratio for r in recs])
        summary.append({
            "value": value, "trials": len(recs), "g_beta": rep.g_at_beta,
            "mean_ratio": float(ratios.mean()), "min_ratio": float(ratios.min()),
            "max_ratio": float(ratios.max()),
            "frac_in_band": float(np.mean((ratios >= lo) & (ratios <= hi))),
        })
    return ExperimentResult(config, records, summary, {})


def run_ones_regime(config: ExperimentConfig) -> ExperimentResult:
    reports = _check_points(config)
    for r in reports:
        _require(r.alpha_regime is theory.AlphaRegime.BELOW, "ones regime needs alpha < b*beta")
    records = _run_trials(config)
    summary = []
    for value, recs in zip(config.values, _by_point(config, records)):
        n = config.point_params(value).n
        d = np.array([x for r in recs for x in r.dist_ones], dtype=float) / n
        wins = sum(bool(r.success) for r in recs)
        summary.append({
            "value": value, "trials": len(recs),
            "mean_dist_ones": float(d.mean()), "max_dist_ones": float(d.max()),
            "success_rate": wins / len(recs),
        })
    return ExperimentResult(config, records, summary, _schedule_meta(config))


def run_sampler_validation(config: ExperimentConfig) -> ExperimentResult:
    """TV distance of a thinned Glauber chain, and of the exact sampler, to the Gibbs table.

    One graph per trial. Edge rates are clipped to 1, since a ln n / n
    exceeds 1 at the tiny n where enumeration is possible.
    """
    params = config.params
    n = params.n
    _require(4 <= n <= ENUMERATION_CUTOFF and n % 2 == 0,
             f"sampler validation needs even 4 <= n <= {ENUMERATION_CUTOFF}")
    p, q = min(1.0, params.p), min(1.0, params.q)
    schedule = config.schedule(n)
    records, summary = [], []
    for trial in range(config.trials):
        start = time.perf_counter()
        rng = as_generator(trial_seed(config.seed, 0, trial))
        graph = sample_sbm_graph(random_balanced_partition(n, rng), p, q, rng)
        table = enumerate_gibbs(graph, params.alpha, params.beta)
        target = table.probs
        chain = sample_chain(graph, params.alpha, params.beta, config.draws, schedule, rng)
        tv_mcmc = tv_distance(empirical_distribution(config_index(chain), 1 << n), target)
        exact_idx = exact_sample_indices(table, rng, config.draws)
        tv_exact = tv_distance(empirical_distribution(exact_idx, 1 << n), target)
        records.append(TrialRecord(trial, n, None, (), (), math.nan, math.nan,
                                   time.perf_counter() - start))
        summary.append({
            "graph": trial, "n_edges": graph.n_edges, "draws": config.draws,
            "tv_mcmc": tv_mcmc, "tv_exact": tv_exact,
            "tv_uniform": tv_distance(np.full(1 << n, 1.0 / (1 << n)), target),
        })
    meta = {"schedule": f"single chain anneal={schedule.anneal} burn_in={schedule.burn_in} "
                        f"thinning={schedule.thinning}",
            "edge_rates": f"p={_fmt(p)} q={_fmt(q)}"}
    return ExperimentResult(config, records, summary, meta)


_RUNNERS = {
    "success_curve": run_success_curve,
    "distance_scaling": run_distance_scaling,
    "concentration": run_concentration,
    "ones_regime": run_ones_regime,
    "sampler_validation": run_sampler_validation,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    return _RUNNERS[config.kind](config)
