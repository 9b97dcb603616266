"""Command-line driver for the simulate / estimate / analyze pipeline.

Subcommands:
  simulate   generate ambient trajectories of a grid model, one file per seed
  estimate   reconstruct the dynamic state matrix from a trajectory file
  sweep      error tables over an observation-time or sampling-step axis
  eigen      eigenvalue tables and matched spectral distance
  bound      Monte Carlo evaluation of the reconstruction error envelopes
  kron       standalone network reduction to the generator buses

Values come from an INI experiment config (--config) with command-line
flags taking precedence.  Every command is deterministic given its seeds;
manifests record the model hash and parameters for byte-identical reruns.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analysis, io_config, sim
from .estimators import (CML, LASSO, SPARSE_LOW_RANK, TIKHONOV, UML,
                         ConvergenceError, SingularCovarianceError,
                         covariances, estimate_b, estimate_cml, estimate_lasso,
                         estimate_sparse_low_rank, estimate_tikhonov,
                         estimate_uml, threshold_structure)
from .model import (KronReductionError, ValidationError, build_continuous,
                    build_discrete, build_laplacian, kron_reduce)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _config_from_args(args) -> io_config.ExperimentConfig:
    if getattr(args, "config", None):
        cfg = io_config.load_config(args.config)
    else:
        cfg = io_config.ExperimentConfig(model_path=getattr(args, "model", "") or "")
    overrides = {}
    for flag, key in [("model", "model_path"), ("t_obs", "t_obs"),
                      ("dt_base", "dt_base"), ("stride", "stride"),
                      ("nu", "nu"), ("lam", "lam"), ("eta", "eta"),
                      ("out", "outputs"), ("threshold", "threshold")]:
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "seed", None):
        overrides["seeds"] = tuple(args.seed)
    if getattr(args, "estimator", None):
        overrides["estimators"] = tuple(args.estimator)
    if getattr(args, "burn_in", None) is not None:
        overrides["burn_in"] = None if args.burn_in == "auto" else int(args.burn_in)
    if getattr(args, "axis", None) is not None:
        overrides["sweep_variable"] = args.axis
    if getattr(args, "values", None):
        overrides["sweep_values"] = tuple(float(v) for v in args.values)
    return replace(cfg, **overrides) if overrides else cfg


def _build_systems(model_path: str, dt: float):
    grid = io_config.load_model(model_path)
    reduced = kron_reduce(build_laplacian(grid), grid.generator_ids)
    cont = build_continuous(grid, reduced)
    return grid, cont, build_discrete(cont, dt)


def _model_sha256(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _resolve_burn_in(cfg: io_config.ExperimentConfig, cont) -> int:
    if cfg.burn_in is not None:
        return cfg.burn_in
    return sim.default_burn_in(cont, cfg.dt_base)


def _simulate_seed(disc, n_samples: int, burn_in: int, seed: int) -> sim.Trajectory:
    # distinct child streams keep burn-in noise out of the estimation data
    burn_seed, run_seed = sim.spawn_seeds(seed, 2)
    x0 = sim.steady_start(disc, burn_in, burn_seed)
    return sim.simulate(disc, n_samples - 1, x0, run_seed)


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    if not cfg.model_path:
        raise ValidationError("a model is required (--config or --model)",
                              field="model_path")
    grid, cont, disc = _build_systems(cfg.model_path, cfg.dt_base)
    n_samples = round(cfg.t_obs / cfg.dt_base)
    if n_samples < 2:
        raise ValidationError(
            f"t_obs={cfg.t_obs} s yields {n_samples} samples at "
            f"dt_base={cfg.dt_base}; need at least 2", field="t_obs")
    burn_in = _resolve_burn_in(cfg, cont)
    outdir = Path(cfg.outputs)
    outdir.mkdir(parents=True, exist_ok=True)
    files = []
    for seed in cfg.seeds:
        traj = _simulate_seed(disc, n_samples, burn_in, seed)
        name = f"traj_seed{seed}.csv"
        io_config.save_trajectory(outdir / name, traj)
        files.append(name)
    io_config.save_records(outdir / "manifest.csv", {
        "command": "simulate",
        "model": cfg.model_path,
        "model_sha256": _model_sha256(cfg.model_path),
        "dt_base": cfg.dt_base,
        "t_obs": cfg.t_obs,
        "burn_in": burn_in,
        "n_samples": n_samples,
        "seeds": " ".join(str(s) for s in cfg.seeds),
        "files": " ".join(files),
    })
    print(f"wrote {len(files)} trajectories ({n_samples} samples each) to {outdir}")
    return EXIT_OK


def _run_estimator(tag: str, traj: sim.Trajectory,
                   cfg: io_config.ExperimentConfig, a_prev: np.ndarray):
    if tag == UML:
        return estimate_uml(covariances(traj), cond_threshold=cfg.cond_threshold)
    if tag == CML:
        return estimate_cml(traj, cond_threshold=cfg.cond_threshold)
    if tag == TIKHONOV:
        return estimate_tikhonov(covariances(traj), a_prev, cfg.nu)
    if tag == LASSO:
        return estimate_lasso(traj, cfg.lam, tol=cfg.solver_tol,
                              max_iter=cfg.solver_max_iter)
    if tag == SPARSE_LOW_RANK:
        return estimate_sparse_low_rank(traj, cfg.lam, cfg.eta,
                                        tol=cfg.solver_tol,
                                        max_iter=cfg.solver_max_iter)
    raise ValidationError(f"unknown estimator {tag!r}", field="estimators")


def _check_sample_count(traj: sim.Trajectory) -> None:
    n2 = 2 * traj.n_gen
    if traj.n_samples <= n2 + 2:
        raise ValidationError(
            f"sample deficit: {traj.n_samples} samples after striding, but "
            f"the covariance is only invertible for T > 2N+2 = {n2 + 2}",
            field="stride")


def _truth_continuous(cfg: io_config.ExperimentConfig, n_gen: int) -> np.ndarray | None:
    if not cfg.model_path:
        return None
    grid = io_config.load_model(cfg.model_path)
    if grid.n_gen != n_gen:
        raise ValidationError(
            f"truth model has {grid.n_gen} generators, trajectory has {n_gen}",
            field="model_path")
    reduced = kron_reduce(build_laplacian(grid), grid.generator_ids)
    return build_continuous(grid, reduced).a_d


def cmd_estimate(args) -> int:
    cfg = _config_from_args(args)
    traj = io_config.load_trajectory(args.trajectory)
    strided = sim.subsample(traj, cfg.stride)
    _check_sample_count(strided)
    a_d_true = _truth_continuous(cfg, strided.n_gen)
    a_prev = (io_config.load_matrix(args.a_prev) if getattr(args, "a_prev", None)
              else np.zeros((2 * strided.n_gen,) * 2))
    outdir = Path(cfg.outputs)
    outdir.mkdir(parents=True, exist_ok=True)
    for tag in cfg.estimators:
        result = _run_estimator(tag, strided, cfg, a_prev)
        a_hat = (threshold_structure(result.a_hat, strided.n_gen)
                 if cfg.threshold else result.a_hat)
        a_hat_d = analysis.to_continuous(a_hat, strided.dt)
        b_hat = estimate_b(strided, a_hat)
        stem = f"ahat_d_{tag.lower()}"
        io_config.save_matrix(outdir / f"{stem}.csv", a_hat_d,
                              comment=f"continuous dynamic matrix, {tag}")
        io_config.save_matrix(outdir / f"bhat_{tag.lower()}.csv", b_hat,
                              comment=f"noise scale estimate, {tag}")
        meta: dict[str, object] = {
            "estimator": tag,
            "stride": cfg.stride,
            "dt": strided.dt,
            "n_samples": strided.n_samples,
            "objective": result.objective,
            "threshold": "true" if cfg.threshold else "false",
            "trajectory": str(args.trajectory),
        }
        for key, value in result.hyperparams.items():
            meta[f"hp_{key}"] = value
        line = f"{tag}: objective={result.objective:.6e}"
        if a_d_true is not None:
            eps = analysis.relative_error(a_hat_d, a_d_true)
            meta["eps"] = eps
            line += f" eps={eps:.6f}"
        io_config.save_records(outdir / f"{stem}.meta", meta)
        print(line)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    if cfg.sweep_variable is None:
        raise ValidationError("sweep axis not defined (--axis or [sweep] section)",
                              field="sweep_variable")
    if not cfg.model_path:
        raise ValidationError("a model is required (--config or --model)",
                              field="model_path")
    grid, cont, disc = _build_systems(cfg.model_path, cfg.dt_base)
    a_d_true = cont.a_d
    burn_in = _resolve_burn_in(cfg, cont)
    values = sorted(cfg.sweep_values)
    if cfg.sweep_variable == "t_obs":
        base_t_obs = max(values)
        strides = [cfg.stride] * len(values)
    else:
        base_t_obs = cfg.t_obs
        strides = [int(v) for v in values]
        if any(s < 1 for s in strides):
            raise ValidationError("stride values must be >= 1",
                                  field="sweep_values")
    base_samples = round(base_t_obs / cfg.dt_base)
    rows: list[tuple[float, str, int, float]] = []
    failures = 0
    for seed in cfg.seeds:
        base = _simulate_seed(disc, base_samples, burn_in, seed)
        for value, stride in zip(values, strides):
            if cfg.sweep_variable == "t_obs":
                n_keep = round(value / cfg.dt_base)
                window = sim.Trajectory(dt=base.dt,
                                        states=base.states[:n_keep],
                                        n_gen=base.n_gen, seed=base.seed)
            else:
                window = base
            strided = sim.subsample(window, stride)
            for tag in cfg.estimators:
                try:
                    _check_sample_count(strided)
                    result = _run_estimator(tag, strided, cfg,
                                            np.zeros_like(a_d_true))
                    a_hat = (threshold_structure(result.a_hat, strided.n_gen)
                             if cfg.threshold else result.a_hat)
                    eps = analysis.relative_error(
                        analysis.to_continuous(a_hat, strided.dt), a_d_true)
                except (ValidationError, SingularCovarianceError,
                        ConvergenceError) as exc:
                    print(f"cell failed (value={value}, {tag}, seed={seed}): {exc}",
                          file=sys.stderr)
                    eps = float("nan")
                    failures += 1
                rows.append((float(value), tag, seed, eps))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    outdir = Path(cfg.outputs)
    outdir.mkdir(parents=True, exist_ok=True)
    table = ["axis_value,estimator,seed,eps"]
    table += [f"{repr(v)},{tag},{seed},{repr(eps)}"
              for v, tag, seed, eps in rows]
    (outdir / "sweep.csv").write_text("\n".join(table) + "\n")
    mean_table = ["axis_value,estimator,mean_eps,n_seeds"]
    for value in values:
        for tag in sorted(cfg.estimators):
            cell = [eps for v, t, _, eps in rows
                    if v == float(value) and t == tag and not math.isnan(eps)]
            if cell:
                mean_table.append(
                    f"{repr(float(value))},{tag},"
                    f"{repr(math.fsum(cell) / len(cell))},{len(cell)}")
    (outdir / "sweep_mean.csv").write_text("\n".join(mean_table) + "\n")
    io_config.save_records(outdir / "manifest.csv", {
        "command": "sweep",
        "model": cfg.model_path,
        "model_sha256": _model_sha256(cfg.model_path),
        "axis": cfg.sweep_variable,
        "values": " ".join(repr(float(v)) for v in values),
        "dt_base": cfg.dt_base,
        "burn_in": burn_in,
        "stride": cfg.stride,
        "estimators": " ".join(cfg.estimators),
        "seeds": " ".join(str(s) for s in cfg.seeds),
        "failed_cells": failures,
    })
    print(f"sweep over {cfg.sweep_variable}: {len(rows)} cells "
          f"({failures} failed) -> {outdir / 'sweep.csv'}")
    return EXIT_OK


def cmd_eigen(args) -> int:
    a_hat_d = io_config.load_matrix(args.matrix)
    if a_hat_d.ndim != 2 or a_hat_d.shape[0] != a_hat_d.shape[1] \
            or a_hat_d.shape[0] % 2 != 0:
        raise ValidationError("matrix must be square with even dimension",
                              field="matrix")
    report = analysis.spectrum(a_hat_d, args.zero_mode_tol)
    lines = ["re,im,source"]
    lines += [f"{repr(ev.real)},{repr(ev.imag)},estimate"
              for ev in report.eigenvalues]
    distance = None
    if args.model:
        grid = io_config.load_model(args.model)
        if 2 * grid.n_gen != a_hat_d.shape[0]:
            raise ValidationError(
                f"truth model has {grid.n_gen} generators, matrix is "
                f"{a_hat_d.shape[0]}x{a_hat_d.shape[0]}", field="model")
        reduced = kron_reduce(build_laplacian(grid), grid.generator_ids)
        truth = analysis.spectrum(build_continuous(grid, reduced).a_d,
                                  args.zero_mode_tol)
    elif args.against:
        other = io_config.load_matrix(args.against)
        if other.shape != a_hat_d.shape:
            raise ValidationError("matrices must have equal shape",
                                  field="against")
        truth = analysis.spectrum(other, args.zero_mode_tol)
    else:
        truth = None
    if truth is not None:
        lines += [f"{repr(ev.real)},{repr(ev.imag)},truth"
                  for ev in truth.eigenvalues]
        distance = analysis.spectral_distance(report.eigenvalues,
                                              truth.eigenvalues)
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    crit = " ".join(f"{ev.real:+.6f}{ev.imag:+.6f}j" for ev in report.critical)
    print(f"critical: {crit}")
    if distance is not None:
        print(f"spectral_distance,{repr(distance)}")
    return EXIT_OK


def cmd_bound(args) -> int:
    cfg = _config_from_args(args)
    if not cfg.model_path:
        raise ValidationError("a model is required (--config or --model)",
                              field="model_path")
    dt = cfg.dt_base * cfg.stride
    grid, cont, _ = _build_systems(cfg.model_path, cfg.dt_base)
    disc = build_discrete(cont, dt)
    n_samples = args.n_samples if args.n_samples else round(cfg.t_obs / dt)
    seed = cfg.seeds[0]
    discrete = analysis.theorem1_bound(disc, n_samples, args.epsilon,
                                       args.trials, seed)
    continuous = analysis.corollary2_bound(grid.gen_noise_sigma(),
                                           grid.gen_inertia(), dt, n_samples,
                                           args.epsilon, discrete)
    records = {
        "model": cfg.model_path,
        "dt": dt,
        "n_samples": n_samples,
        "epsilon": args.epsilon,
        "n_trials": args.trials,
        "n_discarded": discrete.n_discarded,
        "seed": seed,
        "trace_sigma0_mean": discrete.trace_sigma0_mean,
        "inv_norm_mean": discrete.inv_norm_mean,
        "rhs_discrete": discrete.rhs,
        "rhs_continuous": continuous.rhs,
    }
    if args.out:
        io_config.save_records(args.out, records)
    for key in ("rhs_discrete", "rhs_continuous"):
        print(f"{key},{repr(records[key])}")
    return EXIT_OK


def cmd_kron(args) -> int:
    grid = io_config.load_model(args.model)
    reduced = kron_reduce(build_laplacian(grid), grid.generator_ids)
    comment = ("reduced susceptance Laplacian over generators "
               + " ".join(str(g) for g in grid.generator_ids))
    if args.out:
        io_config.save_matrix(args.out, reduced, comment=comment)
        print(f"wrote {reduced.shape[0]}x{reduced.shape[1]} reduced Laplacian "
              f"to {args.out}")
    else:
        for row in reduced:
            print(",".join(repr(v) for v in row))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swingid",
        description="Simulate ambient swing dynamics and reconstruct the "
                    "dynamic state matrix from sampled trajectories.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, *, seeds=True):
        sp.add_argument("--config", help="experiment config (INI)")
        sp.add_argument("--model", help="grid model file")
        sp.add_argument("--out", help="output directory or file")
        if seeds:
            sp.add_argument("--seed", type=int, nargs="+",
                            help="override config seeds")

    p_sim = sub.add_parser("simulate", help="generate trajectories per seed")
    add_common(p_sim)
    p_sim.add_argument("--t-obs", dest="t_obs", type=float,
                       help="observation window in seconds")
    p_sim.add_argument("--dt-base", dest="dt_base", type=float,
                       help="generation step in seconds (default 1/60)")
    p_sim.add_argument("--burn-in", dest="burn_in",
                       help="burn-in steps or 'auto'")
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", help="reconstruct dynamics from a file")
    add_common(p_est, seeds=False)
    p_est.add_argument("trajectory", help="trajectory file")
    p_est.add_argument("--stride", type=int, help="subsampling stride in cycles")
    p_est.add_argument("--estimator", nargs="+",
                       choices=list(io_config.VALID_ESTIMATORS),
                       help="estimators to run")
    p_est.add_argument("--threshold", action=argparse.BooleanOptionalAction,
                       default=None,
                       help="zero the known-zero damping-block entries")
    p_est.add_argument("--nu", type=float, help="quadratic-prior weight")
    p_est.add_argument("--lambda", dest="lam", type=float,
                       help="l1 penalty weight")
    p_est.add_argument("--eta", type=float, help="nuclear-norm penalty weight")
    p_est.add_argument("--a-prev", dest="a_prev",
                       help="matrix file with the quadratic-prior center")
    p_est.set_defaults(func=cmd_estimate)

    p_sweep = sub.add_parser("sweep", help="error tables over an axis")
    add_common(p_sweep)
    p_sweep.add_argument("--axis", choices=list(io_config.VALID_SWEEP_VARIABLES),
                         help="sweep variable")
    p_sweep.add_argument("--values", nargs="+", type=float,
                         help="axis values (seconds or cycles)")
    p_sweep.add_argument("--stride", type=int,
                         help="fixed stride for t_obs sweeps")
    p_sweep.add_argument("--t-obs", dest="t_obs", type=float,
                         help="fixed window for stride sweeps")
    p_sweep.add_argument("--estimator", nargs="+",
                         choices=list(io_config.VALID_ESTIMATORS))
    p_sweep.add_argument("--threshold", action=argparse.BooleanOptionalAction,
                         default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_eig = sub.add_parser("eigen", help="eigenvalue table and spectral distance")
    p_eig.add_argument("matrix", help="continuous dynamic matrix file")
    p_eig.add_argument("--model", help="truth model for paired comparison")
    p_eig.add_argument("--against", help="second matrix file for comparison")
    p_eig.add_argument("--zero-mode-tol", dest="zero_mode_tol", type=float,
                       help="modulus below which eigenvalues count as the "
                            "structural zero mode")
    p_eig.add_argument("--out", help="output table file (default: stdout)")
    p_eig.set_defaults(func=cmd_eigen)

    p_bound = sub.add_parser("bound", help="error envelopes by Monte Carlo")
    add_common(p_bound)
    p_bound.add_argument("--stride", type=int, help="sampling stride in cycles")
    p_bound.add_argument("--t-obs", dest="t_obs", type=float)
    p_bound.add_argument("--n-samples", dest="n_samples", type=int,
                         help="window length in samples (overrides t_obs)")
    p_bound.add_argument("--epsilon", type=float, default=0.1,
                         help="confidence parameter in (0,1)")
    p_bound.add_argument("--trials", type=int, default=100,
                         help="Monte Carlo replications")
    p_bound.set_defaults(func=cmd_bound)

    p_kron = sub.add_parser("kron", help="reduce a model to its generator buses")
    p_kron.add_argument("model", help="grid model file")
    p_kron.add_argument("--out", help="output matrix file (default: stdout)")
    p_kron.set_defaults(func=cmd_kron)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SingularCovarianceError, ConvergenceError, KronReductionError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FileNotFoundError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ValidationError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
