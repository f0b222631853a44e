"""Command-line front end.

Subcommands mirror the three measurement series used to characterize the
gate plus the reference-table comparison and the oracle self-check:

* ``vacuum-spectra``   output quadrature variances for vacuum inputs
* ``transfer``         coherent-excitation routing and transfer coefficients
* ``conditional``      conditional-variance sweeps and the witness verdict
* ``reproduce-table``  simulated vs published values for G = 1.0 and 1.5
* ``oracle-check``     compiled-circuit vs analytic-relation equivalence

Covariance-mode output is deterministic and byte-identical across runs.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import gaussian, metrics
from .circuit import (
    GateParams,
    ImperfectionModel,
    build_qnd_gate,
    circuit_quadrature_map,
)
from .ensemble import run_ensemble
from .quadexpr import finite_squeezing_map, max_coefficient_difference
from .scenario import ScenarioConfig, load_scenario

ORACLE_R_GRID = (0.1, 0.25, 0.381966011250105, 0.5, 0.75, 1.0)
ORACLE_DB_GRID = (0.0, -3.0, -5.0, -10.0, -60.0)


def _write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _output_moments(config: ScenarioConfig, circuit, state):
    """Output mean/cov in covariance or trajectory mode per the scenario."""
    if config.run.mode == "trajectories":
        result = run_ensemble(circuit, state, config.run.n, config.run.master_seed)
        return result.mean, result.cov
    from .circuit import run_covariance

    out = run_covariance(circuit, state)
    return out.mean, out.cov


def cmd_vacuum_spectra(config: ScenarioConfig, csv_path: str | None = None) -> str:
    params = config.gate_params()
    circuit = build_qnd_gate(params, config.imperfections)
    rows = metrics.vacuum_noise_report(circuit, params)
    quads = ("x1", "p1", "x2", "p2")
    lines = [
        f"vacuum-input output spectra, G={params.gain:.4f} (R={params.R:.6f}), "
        f"squeezing {config.squeezing_dB_A:g}/{config.squeezing_dB_B:g} dB",
        f"{'family':>26} " + " ".join(f"{q + ' [dB]':>12}" for q in quads),
    ]
    csv_rows = []
    for family, row in rows.items():
        lines.append(
            f"{family:>26} " + " ".join(f"{row[q]['dB']:>12.4f}" for q in quads)
        )
        for q in quads:
            csv_rows.append(
                [family, q, f"{row[q]['variance']:.9f}", f"{row[q]['dB']:.9f}"]
            )
    if csv_path:
        _write_csv(csv_path, ["family", "quadrature", "variance", "dB"], csv_rows)
    return "\n".join(lines)


_EXCITATION_CASES = (
    ("a", 0, "x", "x1"),
    ("b", 1, "x", "x2"),
    ("c", 0, "p", "p1"),
    ("d", 1, "p", "p2"),
)


def cmd_transfer(config: ScenarioConfig, csv_path: str | None = None) -> str:
    params = config.gate_params()
    circuit = build_qnd_gate(params, config.imperfections)
    amplitude = metrics.DEFAULT_PROBE_AMPLITUDE
    quads = ("x1", "p1", "x2", "p2")
    lines = [
        f"coherent-excitation routing, G={params.gain:.4f}, "
        f"input amplitude {amplitude:g} (mean^2 = {amplitude**2:g} x shot)"
    ]
    csv_rows = []
    for case, mode, quad, label in _EXCITATION_CASES:
        state = gaussian.vacuum_state(2)
        dx = amplitude if quad == "x" else 0.0
        dp = amplitude if quad == "p" else 0.0
        state = gaussian.displace(state, mode, dx, dp)
        mean, _ = _output_moments(config, circuit, state)
        # snap float noise to zero so reports are stable across R/G round trips
        mean = np.where(np.abs(mean) < 1e-12, 0.0, mean)
        # covariance mode is exact; trajectory mode carries Monte Carlo noise
        floor = 1e-6 if config.run.mode == "covariance" else 0.1
        carried = [q for q, m in zip(quads, mean) if abs(m) > floor * amplitude]
        lines.append(
            f"({case}) excite {label}: output means "
            + " ".join(f"{q}={m:+.4f}" for q, m in zip(quads, mean))
            + f"  -> carried by {', '.join(carried) if carried else 'none'}"
        )
        csv_rows.append([case, label] + [f"{m:.9f}" for m in mean])
    for sector in ("x", "p"):
        t_s, t_p = metrics.transfer_coefficients(circuit, sector, amplitude)
        lines.append(
            f"sector {sector}: T_S={t_s:.5f} T_P={t_p:.5f} T_sum={t_s + t_p:.5f}"
        )
        csv_rows.append([f"T_{sector}", "", f"{t_s:.9f}", f"{t_p:.9f}", f"{t_s + t_p:.9f}", ""])
    if csv_path:
        _write_csv(
            csv_path,
            ["case", "excited", "mean_x1", "mean_p1", "mean_x2", "mean_p2"],
            csv_rows,
        )
    return "\n".join(lines)


def cmd_conditional(config: ScenarioConfig, csv_path: str | None = None) -> str:
    params = config.gate_params()
    circuit = build_qnd_gate(params, config.imperfections)
    state = config.input_state()
    _, cov = _output_moments(config, circuit, state)
    grid = config.run.g_grid()

    lines = [f"conditional-variance sweep, G={params.gain:.4f}"]
    csv_rows = []
    for sector in ("x", "p"):
        refs = metrics.reference_sweeps(params, sector, grid)
        measured = metrics.cv_sweep(cov, sector, grid)
        v, g_opt = metrics.conditional_variance(cov, sector)
        lines.append(f"sector {sector}: V_SP={v:.5f} at g_opt={g_opt:.5f}")
        for g, m, ci, cii, ciii, bound in zip(
            grid, measured, refs.ideal, refs.finite_squeezing, refs.vacuum_ancilla,
            refs.witness_bound,
        ):
            csv_rows.append(
                [
                    sector,
                    f"{g:.4f}",
                    f"{m:.9f}",
                    f"{gaussian.variance_to_db(m):.9f}",
                    f"{ci:.9f}",
                    f"{cii:.9f}",
                    f"{ciii:.9f}",
                    f"{bound:.9f}",
                ]
            )
    g_witness = metrics.conditional_variance(cov, "x")[1]
    duan = metrics.duan_simon(cov, g_witness, grid)
    lines.append(
        f"witness at g={duan.g:.5f}: sum={duan.combined_sum:.5f} vs bound={duan.bound:.5f}"
        f" -> {'entangled' if duan.entangled else 'not certified'}"
    )
    lines.append(
        f"scan over g: best margin {duan.scan_best_margin:+.5f} at g={duan.scan_best_g:.4f}"
        f" -> {'entangled' if duan.scan_entangled else 'not certified'}"
    )
    if csv_path:
        _write_csv(
            csv_path,
            ["sector", "g", "simulated", "simulated_dB", "ideal", "finite_squeezing",
             "vacuum_ancilla", "witness_bound_per_sector"],
            csv_rows,
        )
    return "\n".join(lines)


def cmd_reproduce_table(
    config: ScenarioConfig,
    fit: bool = True,
    csv_path: str | None = None,
) -> str:
    base = config.imperfections
    if fit:
        comparison = metrics.fit_extra_in_loop_loss(base, squeezing_db=config.squeezing_dB_A)
    else:
        comparison = metrics.compare_to_reference(base, squeezing_db=config.squeezing_dB_A)

    lines = ["simulated vs published gate characterization"]
    if comparison.fitted:
        lines.append(
            f"fitted extra in-loop loss: {comparison.extra_in_loop_loss:.4f} "
            f"(single calibration knob, grid search)"
        )
    else:
        lines.append("no calibration fit applied")
    lines.append(
        f"objective (sum of squared deviations in bar units): {comparison.objective:.3f}"
    )

    header = f"{'G':>4} {'metric':>6} {'sector':>6} {'simulated':>10} {'published':>12} {'band(2x)':>16} {'verdict':>8} {'resid/bar':>10}"
    lines.append(header)
    csv_rows = []
    for check in comparison.checks:
        low = check.reference - metrics.BAND_WIDTH_FACTOR * check.bar
        high = check.reference + metrics.BAND_WIDTH_FACTOR * check.bar
        verdict = "PASS" if check.within else "FAIL"
        lines.append(
            f"{check.gain:>4.1f} {check.metric:>6} {check.sector:>6} "
            f"{check.simulated:>10.5f} {check.reference:>7.2f}±{check.bar:<4.2f}"
            f" [{low:>6.3f},{high:>6.3f}] {verdict:>8} {check.residual_bars:>10.2f}"
        )
        csv_rows.append(
            [
                f"{check.gain:.1f}",
                check.metric,
                check.sector,
                f"{check.simulated:.9f}",
                f"{check.reference:.2f}",
                f"{check.bar:.2f}",
                verdict,
                f"{check.residual_bars:.4f}",
            ]
        )
    # full per-sector metric listing, including the non-banded T_S and T_P
    for gain, report in comparison.reports.items():
        targets = metrics.REFERENCE_TABLE[gain]
        for sector in ("x", "p"):
            m = report.sectors[sector]
            lines.append(
                f"G={gain:.1f} {sector}: T_S={m.t_signal:.5f} (pub {targets['T_S'][sector][0]:.2f}) "
                f"T_P={m.t_probe:.5f} (pub {targets['T_P'][sector][0]:.2f}) "
                f"T_sum={m.t_sum:.5f} V_SP={m.v_conditional:.5f}"
            )
    if not comparison.all_within_band:
        misses = comparison.out_of_band()
        lines.append(
            f"{len(misses)}/{len(comparison.checks)} banded values outside 2x bars; "
            "residuals are reported above (a symmetric model cannot reproduce the "
            "published x/p asymmetry)"
        )
    # lossless comparison row demonstrating that losses are required
    lossless = metrics.compare_to_reference(
        ImperfectionModel.ideal(), squeezing_db=config.squeezing_dB_A
    )
    t_lossless = lossless.reports[1.0].sectors["x"].t_sum
    lines.append(
        f"lossless reference: T_sum(G=1.0)={t_lossless:.5f} "
        f"({'out-of-band high' if t_lossless > 1.20 + 2 * 0.05 else 'in band'}; "
        "imperfections are required to match)"
    )
    if csv_path:
        _write_csv(
            csv_path,
            ["G", "metric", "sector", "simulated", "published", "bar", "verdict",
             "residual_bars"],
            csv_rows,
        )
    return "\n".join(lines)


def cmd_oracle_check(config: ScenarioConfig) -> str:
    """Equivalence of the compiled lossless circuit and the analytic relations."""
    worst = 0.0
    worst_case = None
    for R in ORACLE_R_GRID:
        for db in ORACLE_DB_GRID:
            params = GateParams(R, squeezing_db_a=db, squeezing_db_b=db)
            circuit = build_qnd_gate(params, ImperfectionModel.ideal())
            got = circuit_quadrature_map(circuit)
            want = finite_squeezing_map(params.R, params.r_a, params.r_b)
            err = max_coefficient_difference(got, want)
            if err > worst:
                worst, worst_case = err, (R, db)
    lines = [
        f"oracle equivalence over {len(ORACLE_R_GRID)} x {len(ORACLE_DB_GRID)} grid points",
        f"max coefficient error: {worst:.3e}"
        + (f" at R={worst_case[0]:g}, {worst_case[1]:g} dB" if worst_case else ""),
        "PASS" if worst <= 1e-9 else "FAIL",
    ]
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qndsim",
        description="Simulate and characterize the offline-squeezed QND sum gate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("vacuum-spectra", "transfer", "conditional", "reproduce-table", "oracle-check"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="scenario JSON file")
        group = p.add_mutually_exclusive_group()
        group.add_argument("--gain", type=float, help="interaction gain G")
        group.add_argument("--reflectivity", type=float, help="beam-splitter parameter R")
        p.add_argument(
            "--squeezing-db", type=float, help="ancilla squeezing in dB (both ancillas)"
        )
        p.add_argument(
            "--no-imperfections", action="store_true", help="disable every imperfection"
        )
        p.add_argument(
            "--trajectories", type=int, metavar="N",
            help="run N stochastic trajectories instead of covariance propagation",
        )
        p.add_argument("--seed", type=int, help="master seed for trajectory mode")
        p.add_argument("--csv", metavar="PATH", help="also write CSV output to PATH")
        if name == "reproduce-table":
            p.add_argument(
                "--no-fit", action="store_true",
                help="skip the single-knob in-loop loss calibration",
            )
    return parser


def _config_from_args(args) -> ScenarioConfig:
    if args.config:
        config = load_scenario(args.config)
    else:
        config = ScenarioConfig()
    if args.reflectivity is not None:
        config = ScenarioConfig(
            gate_R=args.reflectivity,
            gate_G=None,
            squeezing_dB_A=config.squeezing_dB_A,
            squeezing_dB_B=config.squeezing_dB_B,
            imperfections=config.imperfections,
            inputs=config.inputs,
            run=config.run,
            output=config.output,
        )
    elif args.gain is not None:
        config = ScenarioConfig(
            gate_R=None,
            gate_G=args.gain,
            squeezing_dB_A=config.squeezing_dB_A,
            squeezing_dB_B=config.squeezing_dB_B,
            imperfections=config.imperfections,
            inputs=config.inputs,
            run=config.run,
            output=config.output,
        )
    if args.squeezing_db is not None:
        config.squeezing_dB_A = args.squeezing_db
        config.squeezing_dB_B = args.squeezing_db
    if args.no_imperfections:
        config.imperfections = ImperfectionModel.ideal()
    if args.trajectories is not None:
        config.run.mode = "trajectories"
        config.run.n = args.trajectories
    if args.seed is not None:
        config.run.master_seed = args.seed
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _config_from_args(args)
    csv_path = args.csv
    if csv_path is None and config.output.format == "csv" and config.output.path:
        csv_path = config.output.path
    if args.command == "vacuum-spectra":
        print(cmd_vacuum_spectra(config, csv_path))
    elif args.command == "transfer":
        print(cmd_transfer(config, csv_path))
    elif args.command == "conditional":
        print(cmd_conditional(config, csv_path))
    elif args.command == "reproduce-table":
        print(cmd_reproduce_table(config, fit=not args.no_fit, csv_path=csv_path))
    elif args.command == "oracle-check":
        text = cmd_oracle_check(config)
        print(text)
        return 0 if text.endswith("PASS") else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
