"""Figure and task drivers: realization loops, aggregation, CSV-ready rows.

Each driver consumes a resolved :class:`~gqrc.config.RunConfig`, runs its
realization loop with seeds derived from the master seed, and returns the
rows of one dataset in the column order of the corresponding CSV schema.
Per-realization numerical failures are retried once with a fresh derived
seed and recorded; a second failure aborts the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import (
    ScalingSchedule,
    draw_stable_reservoir,
    gamma_decay,
    noise_scaling,
    scaling_schedule,
    snr_curve,
)
from .errors import ConfigError, NumericalError
from .readout import CapacityReport, ipc
from .reservoir import (
    InputEncoding,
    ReservoirParams,
    run_ensemble,
    run_ideal,
    washout_length,
)
from .seeds import derive_seed, make_rng

# pulse ensembles at least this large run their batched updates in float32:
# their sampling noise (~M^-1/2 <= 3e-3) dwarfs float32 rounding by 4+ orders
PULSE_F32_THRESHOLD = 100_000

CSV_SCHEMAS = {
    "capacity_by_delay": [
        "n_modes", "reflectivity", "m_pulses", "delay",
        "capacity_mean", "capacity_stderr", "realizations",
    ],
    "ipc_by_degree": [
        "n_modes", "reflectivity", "m_pulses", "degree",
        "capacity_sum", "total_ipc", "normalized_ipc", "realizations", "scenario",
    ],
    "snr_by_delay": [
        "n_modes", "reflectivity", "m_pulses", "delay",
        "snr_db_mean", "snr_db_stderr", "fitted_slope_db", "fitted_height_db",
        "realizations",
    ],
}

FIGURE_SCHEMA = {
    "fig2a": "capacity_by_delay",
    "fig3a": "capacity_by_delay",
    "fig2b": "ipc_by_degree",
    "fig4a": "ipc_by_degree",
    "fig4b": "ipc_by_degree",
    "ipc": "ipc_by_degree",
    "fig3b": "snr_by_delay",
    "fig3c": "snr_by_delay",
    "fig5": "snr_by_delay",
    "snr": "snr_by_delay",
}


@dataclass
class ExperimentResult:
    rows: list[dict]
    schema: list[str]
    realization_seeds: list[int]
    failures: list[str] = field(default_factory=list)


def _encoding(cfg) -> InputEncoding:
    return InputEncoding(
        squeeze_strength=cfg.squeeze_strength,
        angle_scale=cfg.angle_scale,
        input_domain=(cfg.input_low, cfg.input_high),
    )


def _burn_in(reflectivity: float, delay_max: int) -> int:
    # delayed targets need history even when the washout is short
    return max(washout_length(reflectivity), delay_max)


def _with_retry(fn, failures: list[str], label: str):
    """Run one realization; resample once on numerical failure, then fatal."""
    try:
        return fn(0)
    except NumericalError as err:
        failures.append(f"{label}: {err}; resampled once")
        return fn(1)


def _ipc_one_realization(
    cfg, n_modes, reflectivity, m_pulses, real_index, attempt
) -> CapacityReport:
    """Train/test one reservoir (ideal if m_pulses is None) and report IPC."""
    enc = _encoding(cfg)
    seed_args = ("ipc", n_modes, reflectivity, real_index, attempt)
    loop = draw_stable_reservoir(
        make_rng(cfg.master_seed, "crystals", *seed_args),
        n_modes, reflectivity, m_pulses or 2,
        squeeze_db_limit=cfg.squeeze_db_limit if cfg.enforce_squeeze_limit else None,
    )
    burn = _burn_in(reflectivity, cfg.delay_max)
    total = burn + cfg.train_steps + cfg.test_steps
    s_seq = make_rng(cfg.master_seed, "inputs", *seed_args).uniform(
        cfg.input_low, cfg.input_high, total
    )
    if m_pulses is None:
        feats = run_ideal(loop, enc, s_seq)
    else:
        dtype = np.float32 if m_pulses >= PULSE_F32_THRESHOLD else np.float64
        feats, _ = run_ensemble(
            loop, enc, s_seq, make_rng(cfg.master_seed, "outcomes", *seed_args),
            dtype=dtype,
        )
    threshold = None if cfg.threshold_enabled else 0.0
    return ipc(
        feats[burn : burn + cfg.train_steps],
        feats[burn + cfg.train_steps : total],
        s_seq,
        train_start=burn,
        degree_max=cfg.degree_max,
        delay_max=cfg.delay_max,
        threshold=threshold,
        input_domain=(cfg.input_low, cfg.input_high),
        ridge=cfg.ridge,
    )


def capacity_by_delay_rows(cfg, combos) -> ExperimentResult:
    """Linear capacity vs delay, averaged over realizations.

    ``combos`` is a list of (n_modes, reflectivity, m_pulses-or-None).
    """
    rows, seeds, failures = [], [], []
    for n_modes, reflectivity, m_pulses in combos:
        caps = np.zeros((cfg.realizations, cfg.delay_max + 1))
        for real in range(cfg.realizations):
            seeds.append(derive_seed(cfg.master_seed, "crystals", "ipc", n_modes,
                                     reflectivity, real, 0))
            report = _with_retry(
                lambda a, r=real: _ipc_one_realization(
                    cfg, n_modes, reflectivity, m_pulses, r, a),
                failures, f"capacity N={n_modes} R={reflectivity} real={real}",
            )
            linear = report.linear_by_delay()
            caps[real] = [linear[d] for d in range(cfg.delay_max + 1)]
        mean = caps.mean(axis=0)
        stderr = caps.std(axis=0, ddof=1) / math.sqrt(cfg.realizations) \
            if cfg.realizations > 1 else np.zeros_like(mean)
        for d in range(cfg.delay_max + 1):
            rows.append({
                "n_modes": n_modes,
                "reflectivity": reflectivity,
                "m_pulses": "" if m_pulses is None else m_pulses,
                "delay": d,
                "capacity_mean": mean[d],
                "capacity_stderr": stderr[d],
                "realizations": cfg.realizations,
            })
    return ExperimentResult(rows, CSV_SCHEMAS["capacity_by_delay"], seeds, failures)


def ipc_rows(cfg, combos) -> ExperimentResult:
    """Degree-resolved IPC rows; combos are (scenario, N, R, M-or-None)."""
    rows, seeds, failures = [], [], []
    for scenario, n_modes, reflectivity, m_pulses in combos:
        degree_sums = np.zeros((cfg.realizations, cfg.degree_max))
        totals = np.zeros(cfg.realizations)
        for real in range(cfg.realizations):
            seeds.append(derive_seed(cfg.master_seed, "crystals", "ipc", n_modes,
                                     reflectivity, real, 0))
            report = _with_retry(
                lambda a, r=real: _ipc_one_realization(
                    cfg, n_modes, reflectivity, m_pulses, r, a),
                failures, f"ipc {scenario} N={n_modes} real={real}",
            )
            sums = report.degree_sums()
            degree_sums[real] = [sums.get(D, 0.0) for D in range(1, cfg.degree_max + 1)]
            totals[real] = report.total_ipc
        n_feats = n_modes * (n_modes + 1) // 2
        for i, degree in enumerate(range(1, cfg.degree_max + 1)):
            rows.append({
                "n_modes": n_modes,
                "reflectivity": reflectivity,
                "m_pulses": "" if m_pulses is None else m_pulses,
                "degree": degree,
                "capacity_sum": degree_sums[:, i].mean(),
                "total_ipc": totals.mean(),
                "normalized_ipc": totals.mean() / n_feats,
                "realizations": cfg.realizations,
                "scenario": scenario,
            })
    return ExperimentResult(rows, CSV_SCHEMAS["ipc_by_degree"], seeds, failures)


def snr_rows(cfg, combos) -> ExperimentResult:
    """SNR-curve rows; combos are (n_modes, reflectivity, m_pulses, d_range)."""
    rows, seeds, failures = [], [], []
    for n_modes, reflectivity, m_pulses, d_range in combos:
        params = draw_stable_reservoir(
            make_rng(cfg.master_seed, "snr-proto", n_modes, reflectivity),
            n_modes, reflectivity, m_pulses,
            squeeze_db_limit=cfg.squeeze_db_limit if cfg.enforce_squeeze_limit else None,
        )
        curve = snr_curve(
            params, m_pulses, cfg.realizations, d_range,
            seed=derive_seed(cfg.master_seed, "snr", n_modes, reflectivity),
            window=cfg.snr_window,
            floor_db=cfg.snr_floor_db,
            enc=_encoding(cfg),
            squeeze_db_limit=cfg.squeeze_db_limit if cfg.enforce_squeeze_limit else None,
        )
        seeds.append(derive_seed(cfg.master_seed, "snr", n_modes, reflectivity))
        for i, delay in enumerate(curve.delays):
            rows.append({
                "n_modes": n_modes,
                "reflectivity": reflectivity,
                "m_pulses": m_pulses,
                "delay": int(delay),
                "snr_db_mean": curve.snr_db[i],
                "snr_db_stderr": curve.snr_db_stderr[i],
                "fitted_slope_db": curve.fitted_slope_db,
                "fitted_height_db": curve.fitted_height_db,
                "realizations": cfg.realizations,
            })
    return ExperimentResult(rows, CSV_SCHEMAS["snr_by_delay"], seeds, failures)


def scaling_scenarios(cfg) -> list[tuple[str, int, float, int]]:
    """The four Fig-4 resource schedules over the configured mode grid."""
    n_grid = cfg.n_grid or [6, 8, 10]
    base_n = n_grid[0]
    sched = ScalingSchedule.renormalized(
        base_n, cfg.scaling_base_m, cfg.c_const, cfg.m_exponent
    ) if cfg.scaling_base_m else ScalingSchedule(cfg.c_const, cfg.m_coeff, cfg.m_exponent)
    r_base, m_base = scaling_schedule(sched, base_n)
    combos = []
    for n_modes in n_grid:
        r_n, m_n = scaling_schedule(sched, n_modes)
        combos.append(("const", n_modes, r_base, m_base))
        combos.append(("r_only", n_modes, r_n, m_base))
        combos.append(("m_only", n_modes, r_base, m_n))
        combos.append(("both", n_modes, r_n, m_n))
    return combos


def run_experiment(cfg) -> ExperimentResult:
    """Dispatch one figure/task id to its driver."""
    task = cfg.task
    if task == "fig2a":
        combos = [(n, r, None) for n in (cfg.n_grid or [8, 10])
                  for r in (cfg.r_grid or [0.75, 0.9])]
        return capacity_by_delay_rows(cfg, combos)
    if task == "fig3a":
        m_grid = cfg.m_grid or [300, 3000, 30000]
        combos = [(cfg.n_modes, cfg.reflectivity, m) for m in m_grid]
        combos.append((cfg.n_modes, cfg.reflectivity, None))
        return capacity_by_delay_rows(cfg, combos)
    if task == "fig2b":
        combos = [(f"ideal-r{r:g}", n, r, None)
                  for r in (cfg.r_grid or [0.9, 0.75])
                  for n in (cfg.n_grid or [4, 6, 8])]
        return ipc_rows(cfg, combos)
    if task in ("fig4a", "fig4b"):
        combos = scaling_scenarios(cfg)
        if task == "fig4a":
            combos = [c for c in combos if c[0] in ("const", "both")]
        return ipc_rows(cfg, combos)
    if task == "ipc":
        m_pulses = None if cfg.ideal_mode else cfg.m_pulses
        return ipc_rows(cfg, [("custom", cfg.n_modes, cfg.reflectivity, m_pulses)])
    if task == "fig3b":
        m_grid = cfg.m_grid or [1000, 10000]
        combos = [(cfg.n_modes, cfg.reflectivity, m, range(1, cfg.snr_d_max + 1))
                  for m in m_grid]
        return snr_rows(cfg, combos)
    if task == "fig3c":
        combos = [(cfg.n_modes, r, cfg.m_pulses, range(1, cfg.snr_d_max + 1))
                  for r in (cfg.r_grid or [0.75, 0.9])]
        return snr_rows(cfg, combos)
    if task == "fig5":
        combos = [(n, r, cfg.m_pulses, range(1, cfg.snr_d_max + 1))
                  for r in (cfg.r_grid or [0.75, 0.9])
                  for n in (cfg.n_grid or [6, 8, 10])]
        return snr_rows(cfg, combos)
    if task == "snr":
        return snr_rows(cfg, [(cfg.n_modes, cfg.reflectivity, cfg.m_pulses,
                               range(1, cfg.snr_d_max + 1))])
    raise ConfigError(f"unknown task {task!r}")
