"""Experiment orchestration: seeded BER sweeps, scaling fits, CSV reporting.

A run is a pure function of its plan (which embeds the master seed), so
repeated runs produce byte-identical CSVs regardless of worker count.
Channels are the parallel unit; every random draw inside a channel worker
comes from a seed derived from (master, role, channel, message, point), so
results do not depend on scheduling.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from .baselines import ml_exact, mmse_detect, zf_detect
from .channel import (
    ROLE_CHANNEL,
    ROLE_MESSAGE,
    ROLE_NOISE,
    ROLE_SOLVER,
    derive_rng,
    derive_seed,
    generate_channel,
    noise_sigma_sq,
    realify,
    transmit,
)
from .constellation import Constellation, build_constellation, demodulate_symbols, modulate_bits
from .ising_map import (
    build_binary_model,
    build_pdit_model,
    build_transform,
    spins_to_symbols,
)
from .solvers import (
    AnnealSchedule,
    SolverConfig,
    bpim_solve,
    bpim_solve_many,
    default_parameters,
    dpim_solve,
    dpim_solve_many,
    oim_solve,
    oim_solve_many,
)

__all__ = [
    "ExperimentPlan",
    "BerPoint",
    "BetaSweepResult",
    "ScalingFit",
    "KNOWN_DETECTORS",
    "plan_experiment",
    "run_ber_sweep",
    "ber_upper_bound",
    "binomial_interval",
    "beta_sweep",
    "fit_scaling_law",
    "report",
    "format_summary",
    "write_manifest",
    "plan_from_manifest",
]

logger = logging.getLogger(__name__)

KNOWN_DETECTORS = ("zf", "mmse", "ml", "bpim", "dpim", "oim")
HEURISTIC_DETECTORS = ("bpim", "dpim", "oim")

# Extra role tags for harness-owned streams (continuing the channel module's).
ROLE_RANDOM_CONFIG = 4

CSV_COLUMNS = (
    "detector",
    "n",
    "order",
    "ebn0_db",
    "bits",
    "errors",
    "ber",
    "ber_upper_95",
    "replicas",
    "iterations",
    "seed",
)


@dataclass(frozen=True)
class ExperimentPlan:
    """Fully seeded description of one BER experiment."""

    n: int
    order: int
    ebn0_list: tuple
    n_channels: int
    messages_per_channel: int
    bits_per_message: int
    total_bits: int
    detectors: tuple
    replicas: int | None
    iterations: int | None
    master_seed: int


@dataclass(frozen=True)
class BerPoint:
    detector: str
    ebn0_db: float
    bits: int
    errors: int
    ber: float
    ber_upper_95: float
    replicas: int | None
    iterations: int | None


def plan_experiment(
    n: int,
    order: int,
    ebn0_list,
    total_bits: int,
    seed: int,
    detectors=("mmse",),
    messages_per_channel: int = 14,
    replicas: int | None = None,
    iterations: int | None = None,
) -> ExperimentPlan:
    """Derive channel/message counts from a fixed total bit budget.

    Each channel carries ``messages_per_channel`` messages of
    n * log2(order) bits, so total_bits must be a multiple of that block;
    otherwise the error suggests the nearest valid budget.
    """
    build_constellation(order)  # validates the order
    bits_per_message = n * int(round(math.log2(order)))
    block = bits_per_message * messages_per_channel
    if total_bits <= 0 or total_bits % block != 0:
        nearest = max(block, round(total_bits / block) * block)
        raise ValueError(
            f"total_bits={total_bits} does not split into {messages_per_channel} "
            f"messages of {bits_per_message} bits per channel; nearest valid value "
            f"is {nearest}"
        )
    detectors = tuple(detectors)
    for det in detectors:
        if det not in KNOWN_DETECTORS:
            raise ValueError(f"unknown detector {det!r}; known: {KNOWN_DETECTORS}")
    if "oim" in detectors and order != 2:
        raise ValueError("oim detector is only validated for BPSK (order 2)")
    if "dpim" in detectors and order < 4:
        raise ValueError("dpim detector needs a QAM order >= 4")
    ebn0_list = tuple(float(v) for v in ebn0_list)
    if not ebn0_list:
        raise ValueError("need at least one Eb/N0 point")
    return ExperimentPlan(
        n=n,
        order=order,
        ebn0_list=ebn0_list,
        n_channels=total_bits // block,
        messages_per_channel=messages_per_channel,
        bits_per_message=bits_per_message,
        total_bits=total_bits,
        detectors=detectors,
        replicas=replicas,
        iterations=iterations,
        master_seed=int(seed),
    )


def _heuristic_config(detector: str, plan: ExperimentPlan) -> SolverConfig:
    cfg = default_parameters(detector, plan.n, plan.order)
    if plan.replicas is not None:
        cfg = replace(cfg, replicas=plan.replicas)
    if plan.iterations is not None:
        cfg = replace(
            cfg, schedule=replace(cfg.schedule, n_iterations=plan.iterations)
        )
    return cfg


def _detect_bits(
    detector: str,
    H: np.ndarray,
    y: np.ndarray,
    sigma_sq: float,
    c: Constellation,
    plan: ExperimentPlan,
    solver_seed,
) -> np.ndarray:
    """Recovered bit vector for one instance under one detector."""
    if detector == "zf":
        return zf_detect(H, y, c).bits
    if detector == "mmse":
        return mmse_detect(H, y, sigma_sq, c.symbol_energy, c).bits
    if detector == "ml":
        return ml_exact(H, y, c).bits
    if detector in ("bpim", "oim"):
        rc = realify(H, y, c.order)
        transform = None if c.order == 2 else build_transform(plan.n, c.order)
        model = build_binary_model(rc, transform)
        cfg = replace(_heuristic_config(detector, plan), seed=solver_seed)
        solve = bpim_solve if detector == "bpim" else oim_solve
        outcome = solve(model, cfg)
        symbols = spins_to_symbols(outcome.best_state, plan.n, c.order)
        return demodulate_symbols(symbols, c)
    if detector == "dpim":
        model = build_pdit_model(H, y, c.order)
        cfg = replace(_heuristic_config(detector, plan), seed=solver_seed)
        outcome = dpim_solve(model, c, cfg)
        symbols = outcome.best_state[:, 0] + 1j * outcome.best_state[:, 1]
        return demodulate_symbols(symbols, c)
    raise ValueError(f"unknown detector {detector!r}")


def _heuristic_batch_bits(
    detector: str,
    H: np.ndarray,
    cells: list,
    c: Constellation,
    plan: ExperimentPlan,
    channel_index: int,
    d_idx: int,
) -> list:
    """Recovered bits for all of a channel's cells under one heuristic.

    The coupling matrix depends on the channel only, so the whole channel
    (messages x noise points) is solved in one batched kernel call; replica
    streams per cell match a standalone solve of that cell.
    """
    seeds = [
        derive_seed(plan.master_seed, ROLE_SOLVER, d_idx, channel_index, msg, e_idx)
        for msg, e_idx, _, _, _ in cells
    ]
    cfg = _heuristic_config(detector, plan)
    if detector in ("bpim", "oim"):
        transform = None if c.order == 2 else build_transform(plan.n, c.order)
        models = [
            build_binary_model(realify(H, y, c.order), transform)
            for _, _, _, y, _ in cells
        ]
        solve_many = bpim_solve_many if detector == "bpim" else oim_solve_many
        outcomes = solve_many(models, cfg, seeds)
        symbol_vectors = [
            spins_to_symbols(o.best_state, plan.n, c.order) for o in outcomes
        ]
    else:
        models = [build_pdit_model(H, y, c.order) for _, _, _, y, _ in cells]
        outcomes = dpim_solve_many(models, c, cfg, seeds)
        symbol_vectors = [o.best_state[:, 0] + 1j * o.best_state[:, 1] for o in outcomes]
    return [demodulate_symbols(sym, c) for sym in symbol_vectors]


def _channel_errors(plan: ExperimentPlan, channel_index: int) -> np.ndarray:
    """Bit-error counts for one channel: shape (detectors, ebn0 points)."""
    c = build_constellation(plan.order)
    seed = plan.master_seed
    H = generate_channel(plan.n, plan.n, derive_seed(seed, ROLE_CHANNEL, channel_index))
    errors = np.zeros((len(plan.detectors), len(plan.ebn0_list)), dtype=np.int64)
    cells = []  # (message index, point index, tx bits, received vector, sigma^2)
    for msg in range(plan.messages_per_channel):
        bits = derive_rng(seed, ROLE_MESSAGE, channel_index, msg).integers(
            0, 2, plan.bits_per_message
        )
        x0 = modulate_bits(bits, c)
        for e_idx, ebn0 in enumerate(plan.ebn0_list):
            sigma_sq = noise_sigma_sq(plan.n, c.symbol_energy, plan.order, ebn0)
            y = transmit(
                H, x0, sigma_sq, derive_seed(seed, ROLE_NOISE, channel_index, msg, e_idx)
            )
            cells.append((msg, e_idx, bits, y, sigma_sq))
    for d_idx, detector in enumerate(plan.detectors):
        if detector in HEURISTIC_DETECTORS:
            try:
                recovered = _heuristic_batch_bits(
                    detector, H, cells, c, plan, channel_index, d_idx
                )
            except Exception:
                # Conservative accounting keeps denominators fixed.
                logger.exception(
                    "detector %s failed on channel %d; counting all its bits as errors",
                    detector,
                    channel_index,
                )
                for _, e_idx, _, _, _ in cells:
                    errors[d_idx, e_idx] += plan.bits_per_message
                continue
            for (m, e_idx, bits, _, _), det_bits in zip(cells, recovered):
                errors[d_idx, e_idx] += int(np.count_nonzero(det_bits != bits))
        else:
            for msg, e_idx, bits, y, sigma_sq in cells:
                try:
                    det_bits = _detect_bits(detector, H, y, sigma_sq, c, plan, None)
                    errors[d_idx, e_idx] += int(np.count_nonzero(det_bits != bits))
                except Exception:
                    logger.exception(
                        "detector %s failed on channel %d message %d point %g dB; "
                        "counting all %d bits as errors",
                        detector,
                        channel_index,
                        msg,
                        plan.ebn0_list[e_idx],
                        plan.bits_per_message,
                    )
                    errors[d_idx, e_idx] += plan.bits_per_message
    return errors


def run_ber_sweep(plan: ExperimentPlan, threads: int = 1) -> list[BerPoint]:
    """Run every (channel, message, point, detector) cell and aggregate BER."""
    if "ml" in plan.detectors and float(plan.order) ** plan.n > 2.0**48:
        raise ValueError(
            f"exact-ml detector refused: {plan.order}**{plan.n} exceeds the search budget"
        )
    if threads > 1 and plan.n_channels > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            per_channel = list(
                pool.map(_channel_errors, [plan] * plan.n_channels, range(plan.n_channels))
            )
    else:
        per_channel = [_channel_errors(plan, ch) for ch in range(plan.n_channels)]
    errors = np.sum(per_channel, axis=0)
    bits_per_point = plan.n_channels * plan.messages_per_channel * plan.bits_per_message
    points = []
    for d_idx, detector in enumerate(plan.detectors):
        heuristic = detector in HEURISTIC_DETECTORS
        cfg = _heuristic_config(detector, plan) if heuristic else None
        for e_idx, ebn0 in enumerate(plan.ebn0_list):
            err = int(errors[d_idx, e_idx])
            points.append(
                BerPoint(
                    detector=detector,
                    ebn0_db=float(ebn0),
                    bits=bits_per_point,
                    errors=err,
                    ber=err / bits_per_point,
                    ber_upper_95=ber_upper_bound(bits_per_point),
                    replicas=cfg.replicas if heuristic else None,
                    iterations=cfg.schedule.n_iterations if heuristic else None,
                )
            )
    return points


def ber_upper_bound(n_bits: int, confidence: float = 0.95) -> float:
    """Upper BER bound consistent with observing zero errors in n_bits."""
    if n_bits < 1:
        raise ValueError("n_bits must be at least 1")
    return -math.log(1.0 - confidence) / n_bits


def binomial_interval(errors: int, n_bits: int, confidence: float = 0.95) -> tuple:
    """Clopper-Pearson confidence interval for an error proportion."""
    if not 0 <= errors <= n_bits:
        raise ValueError("need 0 <= errors <= n_bits")
    alpha = 1.0 - confidence
    lo = 0.0 if errors == 0 else float(stats.beta.ppf(alpha / 2, errors, n_bits - errors + 1))
    hi = (
        1.0
        if errors == n_bits
        else float(stats.beta.ppf(1 - alpha / 2, errors + 1, n_bits - errors))
    )
    return lo, hi


# ---------------------------------------------------------------------------
# annealing-peak calibration


@dataclass(frozen=True, eq=False)
class BetaSweepResult:
    """Normalized mean final energy across an annealing-peak grid."""

    beta_grid: np.ndarray
    mean_final_energy: np.ndarray
    stderr: np.ndarray
    beta_opt: float
    random_reference: float
    random_reference_stderr: float


def beta_sweep(
    n: int,
    order: int,
    paradigm: str,
    beta_grid,
    n_instances: int = 20,
    n_trials: int = 100,
    n_iterations: int = 100,
    ebn0_list=(3.0, 6.0, 9.0),
    seed: int = 0,
) -> BetaSweepResult:
    """Mean final solver energy as a function of the annealing peak.

    The instance pool mixes ``n_instances`` fresh instances per Eb/N0 value;
    each (peak, instance) cell runs ``n_trials`` independent replicas and
    averages their final energies. Energies are normalized per instance by
    the mean |energy| of 1000 uniformly random configurations, which leaves
    the minimizing peak unchanged. For the oscillator paradigm the grid is
    interpreted as peak noise levels.
    """
    beta_grid = np.asarray(sorted(float(b) for b in beta_grid))
    if beta_grid.size == 0 or beta_grid[0] <= 0:
        raise ValueError("grid values must be positive")
    if paradigm not in ("bpim", "dpim", "oim"):
        raise ValueError(f"unknown paradigm {paradigm!r}")
    from .channel import build_instance  # local import avoids a cycle at module load

    c = build_constellation(order)
    base_cfg = default_parameters(paradigm, n, order)
    models = []
    scales = []
    random_refs = []
    pool_index = 0
    for e_idx, ebn0 in enumerate(ebn0_list):
        for k in range(n_instances):
            inst, _ = build_instance(
                c, n, ebn0, seed, channel_index=pool_index, ebn0_index=e_idx
            )
            pool_index += 1
            rng = derive_rng(seed, ROLE_RANDOM_CONFIG, pool_index)
            if paradigm == "dpim":
                model = build_pdit_model(inst.channel, inst.rx_vector, order)
                samples = model.pam_levels[
                    rng.integers(0, model.pam_levels.size, (1000, n, 2))
                ]
                energies = _pdit_energies(samples, model)
            else:
                rc = realify(inst.channel, inst.rx_vector, order)
                transform = None if order == 2 else build_transform(n, order)
                model = build_binary_model(rc, transform)
                spins = rng.integers(0, 2, (1000, model.n)) * 2.0 - 1.0
                energies = _binary_energies(spins, model)
            models.append(model)
            scales.append(np.mean(np.abs(energies)))
            random_refs.append(np.mean(energies))
    scales = np.array(scales)
    random_refs = np.array(random_refs) / scales

    means = np.empty(beta_grid.size)
    stderrs = np.empty(beta_grid.size)
    for b_idx, peak in enumerate(beta_grid):
        finals = []
        for m_idx, model in enumerate(models):
            cfg = replace(
                base_cfg,
                replicas=n_trials,
                schedule=replace(
                    base_cfg.schedule, peak=float(peak), n_iterations=n_iterations
                ),
                seed=derive_seed(seed, ROLE_SOLVER, b_idx, m_idx),
            )
            if paradigm == "dpim":
                outcome = dpim_solve(model, c, cfg)
            elif paradigm == "bpim":
                outcome = bpim_solve(model, cfg)
            else:
                outcome = oim_solve(model, cfg)
            finals.append(outcome.final_energies / scales[m_idx])
        finals = np.concatenate(finals)
        means[b_idx] = finals.mean()
        stderrs[b_idx] = finals.std(ddof=1) / np.sqrt(finals.size)
    return BetaSweepResult(
        beta_grid=beta_grid,
        mean_final_energy=means,
        stderr=stderrs,
        beta_opt=float(beta_grid[int(np.argmin(means))]),
        random_reference=float(random_refs.mean()),
        random_reference_stderr=float(
            random_refs.std(ddof=1) / np.sqrt(random_refs.size)
        ),
    )


def _binary_energies(states: np.ndarray, model) -> np.ndarray:
    quad = np.einsum("ri,ri->r", states @ model.j_matrix, states)
    return -0.5 * quad - states @ model.h_vector


def _pdit_energies(states: np.ndarray, model) -> np.ndarray:
    d1, d2 = states[:, :, 0], states[:, :, 1]
    lin = d1 @ model.h_vector[:, 0] + d2 @ model.h_vector[:, 1]
    quad = (
        np.einsum("ri,ri->r", d1 @ model.j11, d1)
        + np.einsum("ri,ri->r", d2 @ model.j11, d2)
        + 2.0 * np.einsum("ri,ri->r", d1 @ model.j12, d2)
    )
    return -(lin + 0.5 * quad)


@dataclass(frozen=True, eq=False)
class ScalingFit:
    """Power-law fit of optimal annealing peaks against problem size."""

    coefficient: float
    exponent: float
    residuals: np.ndarray
    family: str


def fit_scaling_law(points) -> ScalingFit:
    """Least-squares power law through (n, order, beta_opt) triples.

    BPSK points (order 2) are fitted as c * n**p; QAM points as
    c * (n * sqrt(order))**p. Mixing families or giving fewer than three
    points is rejected.
    """
    points = [(int(n), int(order), float(b)) for n, order, b in points]
    if len(points) < 3:
        raise ValueError("need at least three points to fit a scaling law")
    orders = {order for _, order, _ in points}
    if orders == {2}:
        family = "bpsk"
        x = np.array([math.log(n) for n, _, _ in points])
    elif 2 not in orders:
        family = "qam"
        x = np.array([math.log(n * math.sqrt(order)) for n, order, _ in points])
    else:
        raise ValueError("cannot mix BPSK and QAM points in one fit")
    betas = np.array([b for _, _, b in points])
    if (betas <= 0).any():
        raise ValueError("beta values must be positive")
    design = np.stack([np.ones_like(x), x], axis=1)
    if np.linalg.matrix_rank(design) < 2:
        raise ValueError("degenerate fit: all points share one size")
    coef, *_ = np.linalg.lstsq(design, np.log(betas), rcond=None)
    fitted = design @ coef
    return ScalingFit(
        coefficient=float(math.exp(coef[0])),
        exponent=float(coef[1]),
        residuals=np.log(betas) - fitted,
        family=family,
    )


# ---------------------------------------------------------------------------
# reporting


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report(points: list, plan: ExperimentPlan, out_dir, csv_name: str = "results.csv"):
    """Write the results CSV and the reproduction manifest; return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / csv_name
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for p in points:
            writer.writerow(
                [
                    p.detector,
                    plan.n,
                    plan.order,
                    _csv_value(p.ebn0_db),
                    p.bits,
                    p.errors,
                    _csv_value(p.ber),
                    _csv_value(p.ber_upper_95),
                    _csv_value(p.replicas),
                    _csv_value(p.iterations),
                    plan.master_seed,
                ]
            )
    manifest_path = write_manifest(plan, out, csv_name)
    return csv_path, manifest_path


def write_manifest(plan: ExperimentPlan, out_dir, csv_name: str) -> Path:
    manifest = {
        "format": "isingmimo-manifest v1",
        "version": __version__,
        "csv": csv_name,
        "plan": {
            "n": plan.n,
            "order": plan.order,
            "ebn0_list": list(plan.ebn0_list),
            "total_bits": plan.total_bits,
            "seed": plan.master_seed,
            "detectors": list(plan.detectors),
            "messages_per_channel": plan.messages_per_channel,
            "replicas": plan.replicas,
            "iterations": plan.iterations,
        },
    }
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def plan_from_manifest(path) -> tuple:
    """Rebuild (plan, csv_name) from a manifest written by :func:`report`."""
    manifest = json.loads(Path(path).read_text())
    if manifest.get("format") != "isingmimo-manifest v1":
        raise ValueError(f"{path}: not an isingmimo manifest")
    p = manifest["plan"]
    plan = plan_experiment(
        n=p["n"],
        order=p["order"],
        ebn0_list=p["ebn0_list"],
        total_bits=p["total_bits"],
        seed=p["seed"],
        detectors=p["detectors"],
        messages_per_channel=p["messages_per_channel"],
        replicas=p["replicas"],
        iterations=p["iterations"],
    )
    return plan, manifest.get("csv", "results.csv")


def format_summary(points: list) -> str:
    lines = []
    for p in points:
        lines.append(
            f"{p.detector:>6s}  Eb/N0={p.ebn0_db:6.2f} dB  bits={p.bits}  "
            f"errors={p.errors}  ber={p.ber:.3e}"
        )
    return "\n".join(lines)
