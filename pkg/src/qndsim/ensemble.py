"""Seeded Monte Carlo ensembles of homodyne-feedforward trajectories.

Validates the deterministic covariance propagation against sampled shots.
Per-trajectory randomness comes from counter-based substreams keyed on
``(master_seed, trajectory_index)``, so the ensemble is bit-reproducible and
independent of scheduling; aggregates use a fixed pairwise-tree reduction by
index so the summation order is part of the contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import Circuit, compile_trajectory
from .gaussian import GaussianState


def trajectory_generator(master_seed: int, index: int) -> np.random.Generator:
    """The substream assigned to one trajectory of one ensemble."""
    return np.random.Generator(np.random.Philox(key=[master_seed, index]))


def pairwise_tree_sum(values: np.ndarray) -> np.ndarray:
    """Sum along axis 0 by pairing neighbours ``(0,1), (2,3), ...`` repeatedly.

    The reduction order is a pure function of the length, so the result is
    bit-identical no matter how the rows were produced or scheduled.
    """
    values = np.asarray(values)
    while values.shape[0] > 1:
        n = values.shape[0]
        half = n // 2
        paired = values[0 : 2 * half : 2] + values[1 : 2 * half : 2]
        if n % 2:
            paired = np.concatenate([paired, values[-1:]], axis=0)
        values = paired
    return values[0]


@dataclass
class EnsembleResult:
    """Empirical ensemble statistics with standard errors.

    ``cov`` estimates the ensemble-average state's covariance: the common
    conditional covariance of the shots plus the scatter of the conditional
    means.  Standard errors come from the mean scatter, which is the only
    stochastic ingredient.
    """

    n_trajectories: int
    master_seed: int
    mean: np.ndarray
    cov: np.ndarray
    mean_scatter: np.ndarray     # sample covariance of the per-shot means
    conditional_cov: np.ndarray  # outcome-independent final covariance
    se_mean: np.ndarray
    se_cov: np.ndarray
    outcomes: np.ndarray | None = None


def run_ensemble(
    circuit: Circuit,
    state: GaussianState,
    n: int,
    master_seed: int,
    keep_outcomes: bool = False,
) -> EnsembleResult:
    """Run ``n`` independent trajectories and aggregate their statistics."""
    if n < 2:
        raise ValueError("an ensemble needs at least two trajectories")
    program = compile_trajectory(circuit, state)

    draws = np.empty((n, program.draws_per_shot))
    for i in range(n):
        draws[i] = trajectory_generator(master_seed, i).standard_normal(
            program.draws_per_shot
        )
    means, outcomes = program.run_means(draws)

    dim = means.shape[1]
    mean = pairwise_tree_sum(means) / n
    centered = means - mean
    outer = centered[:, :, np.newaxis] * centered[:, np.newaxis, :]
    scatter = pairwise_tree_sum(outer) / (n - 1)

    cov = program.final_cov + scatter
    se_mean = np.sqrt(np.diag(scatter) / n)
    diag = np.diag(scatter)
    se_cov = np.sqrt((np.outer(diag, diag) + scatter**2) / (n - 1))
    return EnsembleResult(
        n_trajectories=n,
        master_seed=master_seed,
        mean=mean,
        cov=cov,
        mean_scatter=scatter,
        conditional_cov=program.final_cov.copy(),
        se_mean=se_mean,
        se_cov=se_cov,
        outcomes=outcomes if keep_outcomes else None,
    )


@dataclass
class ZScoreReport:
    max_z: float
    worst_entry: str
    z_mean: np.ndarray
    z_cov: np.ndarray

    def __str__(self):
        return f"max |z| = {self.max_z:.3f} at {self.worst_entry}"


def z_score_report(
    result: EnsembleResult,
    analytic_mean: np.ndarray,
    analytic_cov: np.ndarray,
) -> ZScoreReport:
    """Worst-case standardized deviation of empirical vs analytic moments.

    Entries whose standard error vanishes (no stochastic scatter) count as
    zero when the deviation is at numerical noise level, and as infinite
    otherwise.
    """
    analytic_mean = np.asarray(analytic_mean, dtype=float)
    analytic_cov = np.asarray(analytic_cov, dtype=float)

    def z_of(delta, se):
        if se < 1e-15:
            return 0.0 if abs(delta) < 1e-12 else np.inf
        return abs(delta) / se

    dim = result.mean.shape[0]
    z_mean = np.array(
        [z_of(result.mean[i] - analytic_mean[i], result.se_mean[i]) for i in range(dim)]
    )
    z_cov = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(dim):
            z_cov[i, j] = z_of(
                result.cov[i, j] - analytic_cov[i, j], result.se_cov[i, j]
            )

    labels = [f"{q}{k + 1}" for k in range(dim // 2) for q in ("x", "p")]
    max_z = 0.0
    worst = "none"
    for i in range(dim):
        if z_mean[i] > max_z:
            max_z = float(z_mean[i])
            worst = f"mean[{labels[i]}]"
    for i in range(dim):
        for j in range(i, dim):
            if z_cov[i, j] > max_z:
                max_z = float(z_cov[i, j])
                worst = f"cov[{labels[i]},{labels[j]}]"
    return ZScoreReport(max_z=max_z, worst_entry=worst, z_mean=z_mean, z_cov=z_cov)


def outcome_log_csv(result: EnsembleResult) -> str:
    """CSV dump of the per-trajectory homodyne readouts (debugging aid)."""
    if result.outcomes is None:
        raise ValueError("ensemble was run without keep_outcomes")
    n_events = result.outcomes.shape[1]
    header = "trajectory," + ",".join(f"readout{k}" for k in range(n_events))
    lines = [header]
    for i, row in enumerate(result.outcomes):
        lines.append(f"{i}," + ",".join(f"{v:.12g}" for v in row))
    return "\n".join(lines)
