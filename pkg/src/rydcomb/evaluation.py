"""Spectral efficiency and Monte-Carlo experiment orchestration.

The achievable rate uses the pseudoinverse form of the combined receive
filter, which accounts for combiner-colored noise and is invariant to any
invertible right factor of W_RF @ W_BB.  Experiments evaluate every curve
on identical per-trial channels (paired comparison) and aggregate with a
fixed trial order so results do not depend on scheduling.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .architecture import ReuseArchitecture, compose_wrf
from .arrays import ArrayGeometry
from .channel import ChannelParams, channel_matrix, draw_paths
from .errors import ArchitectureError, ConfigError, NumericError
from .optimizer import (CombinerSolution, DigitalReference, OptimizerConfig,
                        alternating_minimize, optimal_digital_combiner,
                        solve_combiner)

_EIG_FLOOR = -1e-9
_KIND_CODES = {"rydberg": 0, "pc_upa": 1, "pc_nonupa": 2, "ideal_digital": 3}


def combined_gain_eigenvalues(h: np.ndarray, w_rf: np.ndarray,
                              w_bb: np.ndarray, f_opt: np.ndarray) -> np.ndarray:
    """Eigenvalues of the noise-whitened effective channel Gram matrix.

    With W = W_RF @ W_BB and T = W^H H F_opt, these are the eigenvalues of
    (W^H W)^{-1/2} T T^H (W^H W)^{-1/2}; the rate at a given SNR is
    sum(log2(1 + snr/N_s * ev)).  Computed via a Cholesky factor of W^H W
    for stability; raises on rank deficiency or significantly negative
    eigenvalues.
    """
    w = w_rf @ w_bb
    t = w.conj().T @ h @ f_opt
    gram = w.conj().T @ w
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            "combined combiner W_RF @ W_BB is rank deficient") from exc
    x = np.linalg.solve(chol, t)
    ev = np.linalg.eigvalsh(x @ x.conj().T)
    if ev.min() < _EIG_FLOOR:
        raise NumericError(
            f"indefinite effective channel (min eigenvalue {ev.min():.3e})")
    return np.maximum(ev, 0.0)


def spectral_efficiency(h: np.ndarray, w_rf: np.ndarray, w_bb: np.ndarray,
                        f_opt: np.ndarray, n_streams: int,
                        snr_linear: float) -> float:
    """Achievable rate in bits/s/Hz for one channel, combiner, and SNR."""
    if w_bb.shape[1] != n_streams or f_opt.shape[1] != n_streams:
        raise ValueError("stream count mismatch between w_bb/f_opt and n_streams")
    if snr_linear < 0:
        raise ValueError("snr_linear must be >= 0")
    ev = combined_gain_eigenvalues(h, w_rf, w_bb, f_opt)
    return float(np.sum(np.log2(1.0 + snr_linear * ev / n_streams)))


def fully_digital_se(singular_values: np.ndarray, n_streams: int,
                     snr_linear: float) -> float:
    """Rate of the unconstrained digital combiner: the first n_streams
    squared singular values enter the water-free log-det directly."""
    sv = np.asarray(singular_values)[:n_streams]
    return float(np.sum(np.log2(1.0 + snr_linear * sv ** 2 / n_streams)))


def evaluate_architecture(h: np.ndarray, arch: ReuseArchitecture,
                          n_streams: int, snr_linear_grid,
                          solver: str = "auto",
                          config: Optional[OptimizerConfig] = None,
                          rng: Optional[np.random.Generator] = None,
                          reference: Optional[DigitalReference] = None,
                          ) -> tuple[np.ndarray, CombinerSolution]:
    """Design the combiner for one channel and evaluate it on an SNR grid.

    Returns the per-SNR rates and the combiner solution.  The SVD reference
    may be passed in to share it across architectures on the same channel.
    """
    ref = reference if reference is not None else optimal_digital_combiner(h, n_streams)
    sol = solve_combiner(arch, ref.w_opt, config=config, rng=rng, method=solver)
    w_rf = compose_wrf(arch, sol.phases)
    ev = combined_gain_eigenvalues(h, w_rf, sol.w_bb, ref.f_opt)
    snr = np.asarray(snr_linear_grid, dtype=float)
    rates = np.log2(1.0 + snr[:, None] * ev[None, :] / n_streams).sum(axis=1)
    return rates, sol


def pc_architecture(n_r: int, n_rf_chains: int) -> ReuseArchitecture:
    """Partially-connected conventional mapping: one free phase shifter per
    antenna feeding adders of depth n_r / n_rf_chains."""
    if n_rf_chains <= 0 or n_r % n_rf_chains != 0:
        raise ArchitectureError(
            f"n_rf_chains={n_rf_chains} does not divide n_r={n_r}")
    return ReuseArchitecture(n_blocks=n_r, lo_depth=1,
                             apd_depth=n_r // n_rf_chains)


def conventional_pc_baseline(geometry: ArrayGeometry, n_rf_chains: int,
                             w_opt: np.ndarray,
                             config: Optional[OptimizerConfig] = None,
                             rng: Optional[np.random.Generator] = None,
                             ) -> CombinerSolution:
    """Solve the conventional partially-connected array with the same
    alternating minimization used for the reuse architectures."""
    n_r = geometry.n_elements
    if w_opt.shape[0] != n_r:
        raise ValueError(
            f"w_opt has {w_opt.shape[0]} rows, geometry has {n_r} elements")
    arch = pc_architecture(n_r, n_rf_chains)
    return alternating_minimize(arch, w_opt, config=config, rng=rng)


@dataclass(frozen=True)
class EvalUnit:
    """One curve to evaluate: a labeled architecture (or pure digital
    reference) on a concrete receive geometry."""

    label: str
    kind: str
    geometry: ArrayGeometry
    arch: Optional[ReuseArchitecture] = None
    solver: str = "auto"
    sweep_value: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in _KIND_CODES:
            raise ConfigError(f"unknown unit kind {self.kind!r}")
        if (self.arch is None) != (self.kind == "ideal_digital"):
            raise ConfigError(
                "arch must be set exactly when kind != 'ideal_digital'")
        if self.arch is not None and self.arch.n_r != self.geometry.n_elements:
            raise ConfigError(
                f"architecture size {self.arch.n_r} != geometry element "
                f"count {self.geometry.n_elements}")


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully resolved experiment: channel statistics, curves, SNR grid,
    trial count, and master seed."""

    channel: ChannelParams
    units: tuple[EvalUnit, ...]
    n_streams: int
    snr_db: tuple[float, ...]
    trials: int
    seed: int
    solver: OptimizerConfig = OptimizerConfig()
    sweep_param: str = "snr_db"
    name: str = "experiment"

    def __post_init__(self) -> None:
        if not self.units:
            raise ConfigError("experiment has no curves to evaluate")
        if not self.snr_db:
            raise ConfigError("snr_db grid is empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.n_streams < 1:
            raise ConfigError("n_streams must be >= 1")
        if not (0 <= self.seed < 2 ** 64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        for unit in self.units:
            if self.n_streams > min(unit.geometry.n_elements, self.channel.n_tx):
                raise ConfigError(
                    f"{unit.label}: n_streams exceeds min(N_r, N_t)")
            if unit.arch is not None and self.n_streams > unit.arch.n_chains:
                raise ConfigError(
                    f"{unit.label}: n_streams={self.n_streams} > chain count "
                    f"{unit.arch.n_chains} (need N_s <= chains <= N_r)")
        if self.sweep_param == "snr_db":
            labels = [u.label for u in self.units]
            if len(set(labels)) != len(labels):
                raise ConfigError("duplicate curve labels")
        else:
            if len(self.snr_db) != 1:
                raise ConfigError(
                    f"sweep over {self.sweep_param} requires a single SNR point")
            keys = [(u.label, u.sweep_value) for u in self.units]
            if any(v is None for _, v in keys):
                raise ConfigError("every unit needs a sweep_value")
            if len(set(keys)) != len(keys):
                raise ConfigError("duplicate (label, sweep_value) pairs")


@dataclass(frozen=True)
class ResultRow:
    label: str
    sweep_param: str
    sweep_value: float
    mean_se: float
    stderr: float
    trials: int

    def __post_init__(self) -> None:
        if self.mean_se < 0:
            raise NumericError(f"negative mean value in row {self.label!r}")


@dataclass
class ResultTable:
    rows: list[ResultRow]
    sweep_param: str
    seed: int
    failures: int = 0
    name: str = "experiment"


def _solver_rng(seed: int, trial: int, unit: EvalUnit) -> np.random.Generator:
    """Independent init stream per (trial, structural identity).  Resolution
    variants of one structure share a stream, pairing their initial phases."""
    arch = unit.arch
    key = (1, trial, _KIND_CODES[unit.kind],
           arch.n_blocks, arch.lo_depth, arch.apd_depth)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _channel_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, trial)))


def _run_trial(spec: ExperimentSpec, trial: int, snr_linear: np.ndarray) -> np.ndarray:
    paths = draw_paths(spec.channel, _channel_rng(spec.seed, trial))
    h_cache: dict[ArrayGeometry, np.ndarray] = {}
    ref_cache: dict[ArrayGeometry, DigitalReference] = {}
    out = np.empty((len(spec.units), snr_linear.size))
    for i, unit in enumerate(spec.units):
        geom = unit.geometry
        if geom not in h_cache:
            h_cache[geom] = channel_matrix(paths, spec.channel.n_tx, geom)
            ref_cache[geom] = optimal_digital_combiner(h_cache[geom], spec.n_streams)
        h, ref = h_cache[geom], ref_cache[geom]
        if unit.arch is None:
            out[i] = [fully_digital_se(ref.singular_values, spec.n_streams, s)
                      for s in snr_linear]
        else:
            rates, _ = evaluate_architecture(
                h, unit.arch, spec.n_streams, snr_linear, solver=unit.solver,
                config=spec.solver, rng=_solver_rng(spec.seed, trial, unit),
                reference=ref)
            out[i] = rates
    return out


def _map_trials(spec: ExperimentSpec, threads: int, worker):
    """Run one callable per trial, preserving trial order in the output.

    Failed trials yield None and are reported once at the end.
    """
    results: list = [None] * spec.trials
    errors: list[str] = []

    def safe(t: int):
        try:
            return t, worker(t), None
        except (NumericError, np.linalg.LinAlgError) as exc:
            return t, None, f"trial {t}: {exc}"

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            done = list(pool.map(safe, range(spec.trials)))
    else:
        done = [safe(t) for t in range(spec.trials)]
    for t, value, err in done:
        results[t] = value
        if err is not None:
            errors.append(err)
    if errors:
        warnings.warn(
            f"{len(errors)} of {spec.trials} trials failed and were excluded "
            f"(first: {errors[0]})", RuntimeWarning)
    return results, len(errors)


def _mean_stderr(values: np.ndarray) -> tuple[float, float, int]:
    ok = values[np.isfinite(values)]
    n = ok.size
    if n == 0:
        raise NumericError("no successful trials")
    mean = float(np.mean(ok))
    stderr = float(np.std(ok, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return mean, stderr, n


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> ResultTable:
    """Evaluate all curves over the SNR grid, averaged over paired trials.

    Every trial draws one set of propagation paths shared by all curves;
    per-curve channels differ only through the receive geometry.  Results
    are aggregated in fixed trial order, so they are independent of the
    thread count.
    """
    snr_linear = 10.0 ** (np.asarray(spec.snr_db) / 10.0)
    per_trial, failures = _map_trials(
        spec, threads, lambda t: _run_trial(spec, t, snr_linear))
    stacked = np.full((spec.trials, len(spec.units), snr_linear.size), np.nan)
    for t, value in enumerate(per_trial):
        if value is not None:
            stacked[t] = value

    rows: list[ResultRow] = []
    for i, unit in enumerate(spec.units):
        for k, snr_db in enumerate(spec.snr_db):
            mean, stderr, n = _mean_stderr(stacked[:, i, k])
            sweep_value = snr_db if spec.sweep_param == "snr_db" else unit.sweep_value
            rows.append(ResultRow(label=unit.label, sweep_param=spec.sweep_param,
                                  sweep_value=float(sweep_value), mean_se=mean,
                                  stderr=stderr, trials=n))
    return ResultTable(rows=rows, sweep_param=spec.sweep_param, seed=spec.seed,
                       failures=failures, name=spec.name)


def run_convergence(spec: ExperimentSpec, threads: int = 1) -> ResultTable:
    """Record solver residual trajectories instead of rates.

    Rows carry the mean residual (in the value column) per iteration index;
    runs that converge early are padded with their final residual.
    """
    for unit in spec.units:
        if unit.arch is None:
            raise ConfigError(
                f"{unit.label}: convergence traces need an architecture")
    max_iter = spec.solver.max_iterations

    def worker(t: int) -> np.ndarray:
        paths = draw_paths(spec.channel, _channel_rng(spec.seed, t))
        ref_cache: dict[ArrayGeometry, DigitalReference] = {}
        out = np.empty((len(spec.units), max_iter))
        for i, unit in enumerate(spec.units):
            geom = unit.geometry
            if geom not in ref_cache:
                h = channel_matrix(paths, spec.channel.n_tx, geom)
                ref_cache[geom] = optimal_digital_combiner(h, spec.n_streams)
            sol = alternating_minimize(unit.arch, ref_cache[geom].w_opt,
                                       config=spec.solver,
                                       rng=_solver_rng(spec.seed, t, unit))
            hist = sol.residual_history
            out[i, :hist.size] = hist
            out[i, hist.size:] = hist[-1]
        return out

    per_trial, failures = _map_trials(spec, threads, worker)
    stacked = np.full((spec.trials, len(spec.units), max_iter), np.nan)
    for t, value in enumerate(per_trial):
        if value is not None:
            stacked[t] = value

    rows: list[ResultRow] = []
    for i, unit in enumerate(spec.units):
        for p in range(max_iter):
            mean, stderr, n = _mean_stderr(stacked[:, i, p])
            rows.append(ResultRow(label=unit.label, sweep_param="iteration",
                                  sweep_value=float(p + 1), mean_se=mean,
                                  stderr=stderr, trials=n))
    return ResultTable(rows=rows, sweep_param="iteration", seed=spec.seed,
                       failures=failures, name=spec.name)
