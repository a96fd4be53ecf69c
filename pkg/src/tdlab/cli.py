"""Command-line entry point.

Subcommands: oracle (analytic report), verify (instance-level checks),
run (seeded experiment producing CSV + metadata), fit (log-log rate fit
of a run CSV), export-builtin (write the built-in instance as editable
JSON).  Exit codes: 0 success, 1 verify found failures, 2 configuration
or input errors, 3 violated model assumptions, 4 divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .errors import (
    ConfigError,
    EmptyWindow,
    InconsistentSystem,
    InvalidLambda,
    NonFiniteUpdate,
    NotAperiodic,
    NotIrreducible,
    ZeroFeatureMatrix,
)
from .experiments import (
    build_instance,
    empirical_mean_update,
    rate_fit,
    read_csv,
    run_experiment,
    write_csv,
    write_metadata,
)
from .mdp import differential_value, discounted_value, induce_chain
from .oracle import (
    combined_subspace_basis,
    feature_decomposition,
    lambda_operators,
    neg_def_margin,
    ones_in_col_space,
    oracle_report,
    solution_set,
    td_matrices,
    ar_matrices,
    tilde_system,
)
from .sa import MeanField, SaProblem, TdTraceDriver, drift_probe, mixing_time

ASSUMPTION_ERRORS = (NotIrreducible, NotAperiodic, InconsistentSystem,
                     ZeroFeatureMatrix, InvalidLambda)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", type=Path, default=None, help="JSON config file")
    sub.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="override a dotted config path")
    sub.add_argument("--out", type=Path, default=None, help="output directory")
    sub.add_argument("--seeds", type=int, default=None,
                     help="number of seeded runs (seed_base..seed_base+N-1)")
    sub.add_argument("--horizon", type=int, default=None, help="steps per run")
    sub.add_argument("--quiet", action="store_true", help="suppress progress output")


def _resolve(args) -> dict:
    cfg = cfgmod.merged_config(args.config, args.overrides)
    if args.seeds is not None:
        cfg["num_runs"] = args.seeds
        cfg.pop("seeds", None)
    if args.horizon is not None:
        cfg["horizon"] = args.horizon
    return cfg


def _out_dir(args) -> Path:
    out = args.out if args.out is not None else cfgmod.default_output_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _say(args, *message) -> None:
    if not args.quiet:
        print(*message)


def cmd_oracle(args) -> int:
    cfg = _resolve(args)
    mdp, policy, features = build_instance(cfgmod.resolve_mdp_spec(cfg["mdp"]))
    chain = induce_chain(mdp, policy)
    report = oracle_report(chain, features, cfg["setting"], float(cfg["gamma"]),
                           float(cfg["lambda"]),
                           float(cfg.get("schedule", {}).get("c_beta", 1.0)))
    out = _out_dir(args)
    name = cfg.get("name", "experiment")
    json_path = out / f"{name}_oracle.json"
    with open(json_path, "w", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    lines = [
        f"setting            {report['setting']} (gamma={report['gamma']}, lambda={report['lambda']})",
        f"states x features  {report['num_states']} x {report['num_features']}",
        f"rank(X)            {report['rank_X']}",
        f"rank(X1)           {report['rank_X1']}",
        f"1 in col(X)        {report['one_in_col_X']}",
        f"average reward     {report['J_pi']!r}",
        f"dim ker(A)         {report['dim_ker_A']}",
        f"solution residual  {report['solution_residual']:.3e}",
        f"margin on ker(A)+  {report['neg_def_margin_kerperp']:.6e}",
    ]
    if "neg_def_margin_combined" in report:
        lines.append(f"combined margin    {report['neg_def_margin_combined']:.6e} (c_beta={report['c_beta']})")
        sweep = ", ".join(f"{row['c_beta']}: {row['margin']:.2e}"
                          for row in report["c_beta_sweep"])
        lines.append(f"c_beta sweep       {sweep}")
    lines.append(f"value estimate     {np.array2string(np.asarray(report['value_estimate']), precision=6)}")
    text = "\n".join(lines) + "\n"
    with open(out / f"{name}_oracle.txt", "w", newline="\n") as fh:
        fh.write(text)
    _say(args, text.rstrip())
    _say(args, f"wrote {json_path}")
    return 0


def _verify_checks(cfg: dict) -> list[tuple[str, bool, str]]:
    checks: list[tuple[str, bool, str]] = []
    mdp, policy, features = build_instance(cfgmod.resolve_mdp_spec(cfg["mdp"]))
    chain = induce_chain(mdp, policy)
    setting = cfg["setting"]
    gamma = float(cfg["gamma"])
    lam = float(cfg["lambda"])
    c_beta = float(cfg.get("schedule", {}).get("c_beta", 1.0))
    X = features.matrix
    n = chain.num_states

    decomp = feature_decomposition(features)
    recon = np.abs(decomp.reconstruction() - X).max()
    checks.append(("feature-split-reconstruction", recon <= 1e-10, f"max err {recon:.2e}"))
    expected = decomp.rank_X - int(decomp.one_in_col_X)
    checks.append(("feature-split-rank", decomp.rank_X1 == expected,
                   f"rank(X1) {decomp.rank_X1}, expected {expected}"))
    checks.append(("ones-excluded-from-split", not ones_in_col_space(decomp.X1),
                   "all-ones direction removed from the split's column space"))

    if setting == "discounted":
        ops = lambda_operators(chain, gamma, lam)
        sys = td_matrices(ops, chain, features, gamma)
        v = discounted_value(chain, gamma)
        fp = np.abs(ops.r_lambda + gamma * ops.P_lambda @ v - v).max()
    else:
        ops = lambda_operators(chain, 1.0, lam)
        sys = ar_matrices(ops, chain, features, lam)
        v = differential_value(chain)
        fp = np.abs(ops.r_lambda - chain.J_pi / (1 - lam) + ops.P_lambda @ v - v).max()
    checks.append(("value-fixed-point", fp <= 1e-9, f"residual {fp:.2e}"))

    target = solution_set(sys)
    res = float(np.linalg.norm(sys.A @ target.particular + sys.b))
    checks.append(("solution-consistency", res <= 1e-8, f"residual {res:.2e}"))

    margin = neg_def_margin(sys.A, sys.row_space())
    checks.append(("negative-definite-margin", margin > 0, f"margin {margin:.3e}"))

    # mean-field (noise-free) problem: enough for the drift diagnostic
    mf = MeanField(M=sys.A, c=sys.b)
    problem = SaProblem(update_map=lambda w, y: mf(w),
                        chain_driver=TdTraceDriver(mdp, policy, features,
                                                   (gamma * lam) if setting == "discounted" else lam,
                                                   start_dist=chain.d_pi),
                        target_set=target,
                        w0=np.zeros(features.num_features),
                        mean_field=mf)
    drift, _ = drift_probe(problem, num_points=100, seed=1)
    ok_drift = drift >= 2 * margin - 1e-8
    checks.append(("drift-vs-margin", ok_drift, f"drift {drift:.3e} vs 2*margin {2*margin:.3e}"))

    if setting == "average_reward":
        kerX1 = decomp.kernel_basis_X1()
        if kerX1.shape[1] > 0:
            spans = X @ kerX1
            const_dev = (spans.max(axis=0) - spans.min(axis=0)).max()
        else:
            const_dev = 0.0
        checks.append(("kernel-characterization", const_dev < 1e-8,
                       f"value spread over kernel directions {const_dev:.2e}"))
        ts = tilde_system(sys, decomp, chain, features, lam, c_beta)
        comb_margin = neg_def_margin(ts.A_tilde, combined_subspace_basis(decomp))
        checks.append(("combined-margin", comb_margin > 0,
                       f"margin {comb_margin:.3e} at c_beta {c_beta}"))

    mc_steps = int(cfg.get("verify", {}).get("mc_steps", 200_000))
    rng = np.random.default_rng(7)
    w_probe = rng.normal(size=features.num_features)
    if setting == "discounted":
        mean, stderr = empirical_mean_update(
            mdp, policy, chain, features, "discounted", w_probe, gamma=gamma,
            lam=lam, num_steps=mc_steps, seed=11)
        expected_vec = sys.A @ w_probe + sys.b
    else:
        J_probe = float(rng.normal())
        Pi = ts.Pi

        def stack_projected(samples):
            return np.column_stack([c_beta * samples[:, 0], samples[:, 1:] @ Pi.T])

        mean, stderr = empirical_mean_update(
            mdp, policy, chain, features, "average_reward", w_probe, lam=lam,
            J_hat=J_probe, num_steps=mc_steps, seed=11, post=stack_projected)
        w_tilde = np.concatenate([[J_probe], Pi @ w_probe])
        expected_vec = ts.A_tilde @ w_tilde + ts.b_tilde
    dev = np.abs(mean - expected_vec)
    ok_mc = bool((dev <= 3 * stderr + 1e-12).all())
    checks.append(("mean-update-equivalence", ok_mc,
                   f"max deviation {dev.max():.2e} vs 3*stderr {3*stderr.max():.2e} "
                   f"({mc_steps} steps)"))

    tau = mixing_time(chain.P_pi, accuracy=0.01)
    checks.append(("mixing-time", True, f"{tau} steps to 0.01 total variation (diagnostic)"))
    return checks


def cmd_verify(args) -> int:
    cfg = _resolve(args)
    checks = _verify_checks(cfg)
    failed = [name for name, ok, _ in checks if not ok]
    for name, ok, detail in checks:
        _say(args, f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    _say(args, f"all {len(checks)} checks passed")
    return 0


def cmd_run(args) -> int:
    cfg = _resolve(args)
    exp = cfgmod.experiment_from_config(cfg)
    record = run_experiment(exp)
    out = _out_dir(args)
    csv_path = out / f"{exp.name}.csv"
    write_csv(record, csv_path)
    write_metadata(record, out / f"{exp.name}.meta.json")
    _say(args, f"wrote {csv_path} ({len(record.t)} checkpoints, "
               f"{exp.num_runs} runs, hash {record.metadata['config_hash']})")
    return 0


def cmd_fit(args) -> int:
    try:
        data = read_csv(args.csv)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read run CSV: {exc}") from exc
    lo, hi = args.window
    fit = rate_fit(data["t"], data["mean_d2"], (lo, hi))
    print(f"slope {fit.slope:+.4f}  (intercept {fit.intercept:+.4f}, "
          f"rms residual {fit.residual:.4f}, {fit.n_points} checkpoints)")
    return 0


def cmd_export_builtin(args) -> int:
    out = _out_dir(args)
    path = out / "boyan15.json"
    cfgmod.export_builtin(path)
    _say(args, f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdlab",
        description="Linear TD(lambda) policy-evaluation laboratory")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("oracle", help="write the analytic report for an instance")
    _add_common(p)
    p.set_defaults(func=cmd_oracle)

    p = subs.add_parser("verify", help="run instance-level diagnostic checks")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = subs.add_parser("run", help="run a seeded experiment, write CSV + metadata")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = subs.add_parser("fit", help="log-log rate fit over a window of a run CSV")
    p.add_argument("csv", type=Path, help="run CSV file")
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"),
                   required=True, help="fit window in steps")
    p.set_defaults(func=cmd_fit)

    p = subs.add_parser("export-builtin", help="write the built-in instance as JSON")
    _add_common(p)
    p.set_defaults(func=cmd_export_builtin)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except EmptyWindow as exc:
        print(f"window error: {exc}", file=sys.stderr)
        return 2
    except ASSUMPTION_ERRORS as exc:
        print(f"assumption violated ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    except NonFiniteUpdate as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:  # invalid inputs surfaced by validators
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
