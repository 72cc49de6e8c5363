"""Seeded Monte-Carlo sweeps over the terminal noise level.

Seeding: trial ``t`` of a sweep draws its channels from
``SeedSequence(master_seed, spawn_key=(t,))`` reduced to a 63-bit integer
seed (see :func:`trial_seed`). The same channel realization is therefore
reused at every noise level and by every method, so differences between
sweep points and methods are not blurred by independent channel draws. If
``H2`` is rank deficient the trial is redrawn from
``SeedSequence(seed, spawn_key=(attempt,))``.
"""

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .bs_solver import SingularChannelError, bs_iterate, identity_precoder, whitening_basis
from .channel import ChannelSet, CorrelationSpec, draw_channels, trial_rng
from .model import SystemConfig, build_rs_quadforms, effective_matrices, rate_from_sinr, sinr_direct
from .rs_solver import LmParams, bisection_solve, minimax_bound

__all__ = [
    "METHODS",
    "ConfigError",
    "ExperimentSpec",
    "TrialRecord",
    "trial_seed",
    "draw_trial_channels",
    "run_trial",
    "run_trial_methods",
    "run_sweep",
    "load_config",
    "summary_path",
    "CSV_COLUMNS",
    "sigma_grid",
    "with_overrides",
    "reduced_config",
    "oracle_comparison",
]

log = logging.getLogger(__name__)

METHODS = ("no-bs-precoding", "proposed", "bound-only")
MAX_REDRAWS = 100


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    config: SystemConfig = field(default_factory=SystemConfig)
    sigma_values: tuple = tuple(np.linspace(0.01, 1.5, 5))
    trials: int = 1000
    master_seed: int = 0
    methods: tuple = ("no-bs-precoding", "proposed")
    output_path: str = "results.csv"
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        sig = np.asarray(self.sigma_values, dtype=float)
        if sig.size == 0 or np.any(sig <= 0) or np.any(np.diff(sig) <= 0):
            raise ConfigError("sigma_values must be positive and strictly ascending")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ConfigError(f"unknown methods {sorted(unknown)}; choose from {list(METHODS)}")


@dataclass(frozen=True)
class TrialRecord:
    sigma: float
    trial_index: int
    method: str
    gamma_star: float | None
    gamma_hat: float
    worst_rate: float | None
    bs_iters: int
    lm_iters_total: int | None
    bisection_iters: int | None
    used_h0: bool
    # derived columns, kept after the core fields
    snr: float = float("nan")
    bound_rate: float = float("nan")

    def to_json(self) -> str:
        return json.dumps(asdict(self))


CSV_COLUMNS = [f.name for f in fields(TrialRecord)]


def trial_seed(master_seed: int, trial_index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def draw_trial_channels(cfg: SystemConfig, seed: int) -> ChannelSet:
    """Channels for trial ``seed``, redrawn while ``H2`` is rank deficient."""
    ch = draw_channels(trial_rng(seed), cfg)
    for attempt in range(MAX_REDRAWS):
        try:
            whitening_basis(ch)
            return ch
        except SingularChannelError:
            log.warning("seed %d: singular BS-RS channel, redraw %d", seed, attempt + 1)
            ch = draw_channels(trial_rng(seed, attempt), cfg)
    raise SingularChannelError(f"seed {seed}: no usable channel after {MAX_REDRAWS} redraws")


def run_trial_methods(
    cfg: SystemConfig,
    sigma: float,
    seed: int,
    methods,
    *,
    trial_index: int = 0,
    channels: ChannelSet | None = None,
    lm_params: LmParams | None = None,
    half_duplex: bool = True,
) -> list[TrialRecord]:
    """Run several methods on one channel draw, sharing the BS precoder design."""
    cfg = cfg.with_sigma(sigma)
    ch = channels if channels is not None else draw_trial_channels(cfg, seed)
    snr = cfg.p_r / sigma**2
    bs = None
    records = []
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}")
        if method == "no-bs-precoding":
            w, bs_iters, used_h0 = identity_precoder(cfg), 0, False
        else:
            if bs is None:
                bs = bs_iterate(ch, cfg)
            w, bs_iters, used_h0 = bs.w, bs.iters, bs.used_h0
        eff = effective_matrices(ch, w, cfg)
        forms = build_rs_quadforms(eff, cfg)
        if method == "bound-only":
            gamma_hat, _ = minimax_bound(forms)
            records.append(
                TrialRecord(
                    sigma=sigma, trial_index=trial_index, method=method,
                    gamma_star=None, gamma_hat=gamma_hat, worst_rate=None,
                    bs_iters=bs_iters, lm_iters_total=None, bisection_iters=None,
                    used_h0=used_h0, snr=snr,
                    bound_rate=float(rate_from_sinr(gamma_hat, half_duplex)),
                )
            )
            continue
        res = bisection_solve(forms, lm_params, eff=eff, cfg=cfg)
        gammas = sinr_direct(res.omega, eff, cfg)
        gamma_star = float(gammas.min())
        records.append(
            TrialRecord(
                sigma=sigma, trial_index=trial_index, method=method,
                gamma_star=gamma_star, gamma_hat=res.gamma_hat,
                worst_rate=float(rate_from_sinr(gamma_star, half_duplex)),
                bs_iters=bs_iters, lm_iters_total=res.lm_iters_total,
                bisection_iters=res.bisection_iters, used_h0=used_h0, snr=snr,
                bound_rate=float(rate_from_sinr(res.gamma_hat, half_duplex)),
            )
        )
    return records


def run_trial(cfg: SystemConfig, sigma: float, seed: int, method: str, **kwargs) -> TrialRecord:
    """One Monte-Carlo trial of ``method`` at terminal noise std ``sigma``.

    ``no-bs-precoding`` uses ``W = sqrt(P_B / N_b) I``; ``proposed`` designs
    ``W`` iteratively and then solves for the relay precoder; ``bound-only``
    records just the minimax bound for the designed ``W``.
    """
    return run_trial_methods(cfg, sigma, seed, [method], **kwargs)[0]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _task(args):
    cfg, sigma, seed, methods, trial_index = args
    return run_trial_methods(cfg, sigma, seed, methods, trial_index=trial_index)


def summary_path(output_path) -> Path:
    p = Path(output_path)
    return p.with_name(p.stem + "_summary" + (p.suffix or ".csv"))


def _summarize(records: list[TrialRecord], spec: ExperimentSpec) -> list[list]:
    numeric = ["gamma_star", "gamma_hat", "worst_rate", "bound_rate",
               "bs_iters", "lm_iters_total", "bisection_iters", "used_h0"]
    rows = []
    for sigma in spec.sigma_values:
        for method in spec.methods:
            group = [r for r in records if r.sigma == sigma and r.method == method]
            row = [sigma, method, len(group)]
            for name in numeric:
                vals = [getattr(r, name) for r in group if getattr(r, name) is not None]
                row.append(float(np.mean(np.asarray(vals, dtype=float))) if vals else None)
            rows.append(row)
    return [["sigma", "method", "trials"] + ["mean_" + n for n in numeric]] + rows


def run_sweep(spec: ExperimentSpec) -> Path:
    """Run every (sigma, trial, method) combination and write the CSV files.

    Rows are ordered by sigma, then trial index, then method in the order of
    ``spec.methods``. A companion ``<name>_summary.csv`` holds per-(sigma,
    method) means. Returns the path of the raw CSV.
    """
    tasks = [
        (spec.config, float(sigma), trial_seed(spec.master_seed, t), tuple(spec.methods), t)
        for sigma in spec.sigma_values
        for t in range(spec.trials)
    ]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            batches = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (8 * spec.workers))))
    else:
        batches = [_task(t) for t in tasks]
    records = [r for batch in batches for r in batch]
    order = {m: k for k, m in enumerate(spec.methods)}
    records.sort(key=lambda r: (r.sigma, r.trial_index, order[r.method]))

    out = Path(spec.output_path)
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        with out.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for r in records:
                writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        with summary_path(out).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            header, *rows = _summarize(records, spec)
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write results to {out}: {exc.strerror or exc}") from exc
    return out


_SYSTEM_KEYS = {f.name for f in fields(SystemConfig)} - {"correlation"}
_CORR_KEYS = {f.name for f in fields(CorrelationSpec)}
_EXPERIMENT_KEYS = {"sigma_values", "sigma_min", "sigma_max", "sigma_steps", "trials",
                    "master_seed", "methods", "output_path", "workers"}


def sigma_grid(sigma_min: float, sigma_max: float, steps: int) -> tuple:
    if steps < 1:
        raise ConfigError("sigma_steps must be at least 1")
    if steps == 1:
        return (float(sigma_min),)
    return tuple(float(s) for s in np.linspace(sigma_min, sigma_max, steps))


def load_config(path) -> ExperimentSpec:
    """Read a JSON file with optional ``system`` and ``experiment`` objects.

    ``system`` takes the :class:`SystemConfig` fields plus ``rho_bs``,
    ``rho_rs`` and ``rho_ms``; ``experiment`` takes either ``sigma_values``
    or ``sigma_min``/``sigma_max``/``sigma_steps`` together with ``trials``,
    ``master_seed``, ``methods``, ``output_path`` and ``workers``. Missing
    entries fall back to the defaults.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - {"system", "experiment"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    system = dict(raw.get("system", {}))
    experiment = dict(raw.get("experiment", {}))
    bad = (set(system) - _SYSTEM_KEYS - _CORR_KEYS) | (set(experiment) - _EXPERIMENT_KEYS)
    if bad:
        raise ConfigError(f"unknown config fields {sorted(bad)}")
    try:
        corr = CorrelationSpec(**{k: system.pop(k) for k in list(system) if k in _CORR_KEYS})
        cfg = SystemConfig(correlation=corr, **system)
        if "sigma_values" in experiment:
            sigmas = tuple(float(s) for s in experiment.pop("sigma_values"))
        else:
            sigmas = sigma_grid(experiment.pop("sigma_min", 0.01), experiment.pop("sigma_max", 1.5),
                                int(experiment.pop("sigma_steps", 5)))
        if "methods" in experiment:
            experiment["methods"] = tuple(experiment["methods"])
        return ExperimentSpec(config=cfg, sigma_values=sigmas, **experiment)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc


def with_overrides(spec: ExperimentSpec, **overrides) -> ExperimentSpec:
    return replace(spec, **{k: v for k, v in overrides.items() if v is not None})


def reduced_config(cfg: SystemConfig, sigma: float) -> SystemConfig:
    """Two relay antennas and one user, keeping powers and correlations."""
    return replace(cfg, n_b=1, n_r=2, n_u=1, sigma=sigma)


def oracle_comparison(cfg: SystemConfig, sigma: float, instances: int, samples: int,
                      master_seed: int = 0) -> list[dict]:
    """LM-bisection against random search on reduced seeded instances.

    Instance ``k`` draws its channels with seed ``trial_seed(master_seed, k)``
    and the random search uses the same seed. The BS precoder is the scaled
    identity so both solvers see the same quadratic forms.
    """
    from .oracle import random_search_rs

    small = reduced_config(cfg, sigma)
    rows = []
    for k in range(instances):
        seed = trial_seed(master_seed, k)
        ch = draw_trial_channels(small, seed)
        eff = effective_matrices(ch, identity_precoder(small), small)
        forms = build_rs_quadforms(eff, small)
        res = bisection_solve(forms, eff=eff, cfg=small)
        rep = random_search_rs(forms, samples, seed=seed)
        rows.append({
            "instance": k,
            "sigma": sigma,
            "gamma_star": res.gamma_star,
            "gamma_hat": res.gamma_hat,
            "oracle_gamma": rep.best_gamma,
            "ratio": res.gamma_star / rep.best_gamma if rep.best_gamma > 0 else float("inf"),
        })
    return rows
