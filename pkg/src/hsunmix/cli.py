"""Batch command line interface.

Exit codes: 0 success, 2 invalid inputs or unreadable files,
3 numerical failure inside a solver.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .bench import load_config, run_benchmark
from .csr import CsrParams, csr_solve
from .danser import DanserParams, solve
from .errors import InputDataError, NumericalError
from .metrics import sre_db
from .mio import (
    read_dictionary,
    read_matrix,
    save_scene,
    write_dictionary,
    write_json,
    write_matrix,
)
from .pruning import RobustnessBudget, music_residue, prune
from .simulate import SceneSpec, dmer_of, generate, snr_of
from .subspace import estimate_order, estimate_subspace

_DEFAULT_ALPHA = 0.85


def _budget(args, dictionary):
    if args.epsilon is not None:
        return RobustnessBudget(args.epsilon)
    alpha = args.alpha if args.alpha is not None else _DEFAULT_ALPHA
    return RobustnessBudget.from_alpha(alpha, dictionary)


def cmd_prune(args):
    Y = read_matrix(args.observations)
    library = read_dictionary(args.dictionary)
    if args.order is not None:
        order = args.order
    else:
        order = estimate_order(Y, args.energy_fraction)
    subspace = estimate_subspace(Y, order)
    budget = _budget(args, library)
    result = prune(
        library, subspace, budget, keep=args.keep, threshold=args.threshold
    )
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    music = [music_residue(library.column(k), subspace) for k in range(library.size)]
    with open(out / "residues.csv", "w", encoding="utf-8") as fh:
        fh.write("index,label,music_residue,rmusic_residue\n")
        for k in range(library.size):
            fh.write(
                f"{k},{library.labels[k]},"
                f"{music[k]:.17g},{result.residues[k]:.17g}\n"
            )
    write_dictionary(out / "pruned_dictionary.csv", result.pruned)
    write_json(
        out / "selection.json",
        {
            "order": int(order),
            "epsilon": budget.epsilon,
            "alpha": budget.alpha,
            "keep": args.keep,
            "threshold": args.threshold,
            "selected": result.selected.tolist(),
            "labels": result.pruned.labels,
        },
    )
    print(
        f"kept {result.selected.size}/{library.size} columns "
        f"(order {order}, epsilon {budget.epsilon:.6g}) -> {out}"
    )
    return 0


def cmd_unmix(args):
    Y = read_matrix(args.observations)
    library = read_dictionary(args.dictionary)
    if args.epsilon is None and args.alpha is None:
        epsilon = 0.0
        alpha = None
    else:
        budget = _budget(args, library)
        epsilon = budget.epsilon
        alpha = budget.alpha
    init = None
    if args.init == "none":
        C0 = np.zeros((library.size, Y.shape[1]))
    else:
        csr_params = CsrParams(
            lam=args.csr_lam, rho=args.csr_rho,
            tol=args.csr_tol, max_iter=args.csr_max_iter,
        )
        init = csr_solve(Y, library, csr_params)
        C0 = init.C
    params = DanserParams(
        lam=args.lam, p=args.p, mu=args.mu, tau=args.tau,
        epsilon=epsilon, tol=args.tol, max_iter=args.max_iter,
    )
    result = solve(Y, library, C0, params)

    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(out / "coefficients.csv", result.C)
    write_matrix(out / "adjusted_dictionary.csv", result.Dprime)
    write_matrix(out / "objective_trace.csv", result.objective_trace[:, None])
    report = {
        "iterations": result.iterations,
        "objective": float(result.objective_trace[-1]),
        "active_rows": result.active_rows.tolist(),
        "active_labels": [library.labels[k] for k in result.active_rows],
        "epsilon": epsilon,
        "alpha": alpha,
        "init": args.init,
    }
    if init is not None:
        report["init_iterations"] = init.iterations
        report["init_converged"] = init.converged
    if args.truth is not None:
        C_true = read_matrix(args.truth)
        report["sre_db"] = sre_db(C_true, result.C)
        if init is not None:
            report["init_sre_db"] = sre_db(C_true, init.C)
    write_json(out / "unmix.json", report)
    line = (
        f"{result.iterations} cycles, "
        f"{result.active_rows.size} active rows -> {out}"
    )
    if "sre_db" in report:
        line += f" (SRE {report['sre_db']:.2f} dB)"
    print(line)
    return 0


def cmd_simulate(args):
    library = read_dictionary(args.dictionary)
    spec = SceneSpec(
        materials=args.materials,
        pixels=args.pixels,
        dmer_db=args.dmer_db,
        snr_db=args.snr_db,
        seed=args.seed,
    )
    scene = generate(library, spec)
    save_scene(args.output_dir, scene)
    names = [library.labels[k] for k in scene.truth_indices]
    print(
        f"scene with materials {names} "
        f"(DMER {dmer_of(scene):.4g} dB, SNR {snr_of(scene):.4g} dB) "
        f"-> {args.output_dir}"
    )
    return 0


def cmd_benchmark(args):
    config = load_config(args.config, overrides=args.set)
    rows = run_benchmark(config, args.output_dir, workers=args.workers)
    print(f"wrote {Path(args.output_dir) / 'summary.csv'} ({len(rows)} rows)")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hsunmix",
        description=(
            "Semiblind hyperspectral unmixing with mismatch-robust "
            "library pruning"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pr = sub.add_parser(
        "prune", help="rank library columns against the signal subspace"
    )
    pr.add_argument("--observations", required=True)
    pr.add_argument("--dictionary", required=True)
    pr.add_argument("--output-dir", required=True)
    g = pr.add_mutually_exclusive_group()
    g.add_argument("--order", type=int, help="signal-subspace dimension")
    g.add_argument(
        "--energy-fraction", type=float, default=0.9999,
        help="singular-value energy fraction for automatic order",
    )
    g = pr.add_mutually_exclusive_group()
    g.add_argument("--epsilon", type=float, help="mismatch budget (2-norm)")
    g.add_argument(
        "--alpha", type=float,
        help=f"mismatch level for the budget (default {_DEFAULT_ALPHA})",
    )
    g = pr.add_mutually_exclusive_group(required=True)
    g.add_argument("--keep", type=int, help="number of columns to keep")
    g.add_argument(
        "--threshold", type=float, help="keep columns with residue <= this"
    )
    pr.set_defaults(func=cmd_prune)

    um = sub.add_parser(
        "unmix", help="estimate nonnegative coefficients for a library"
    )
    um.add_argument("--observations", required=True)
    um.add_argument("--dictionary", required=True)
    um.add_argument("--output-dir", required=True)
    um.add_argument("--truth", help="reference coefficients CSV for SRE")
    um.add_argument(
        "--init", choices=("csr", "none"), default="csr",
        help="coefficient start: consensus sparse solve or all zeros",
    )
    g = um.add_mutually_exclusive_group()
    g.add_argument("--epsilon", type=float, help="library drift budget")
    g.add_argument("--alpha", type=float, help="mismatch level for the budget")
    um.add_argument("--lam", type=float, default=0.5)
    um.add_argument("--p", type=float, default=0.5)
    um.add_argument("--mu", type=float, default=1e5)
    um.add_argument("--tau", type=float, default=1e-6)
    um.add_argument("--tol", type=float, default=1e-5)
    um.add_argument("--max-iter", type=int, default=5000)
    um.add_argument("--csr-lam", type=float, default=0.1)
    um.add_argument("--csr-rho", type=float, default=1.0)
    um.add_argument("--csr-tol", type=float, default=1e-5)
    um.add_argument("--csr-max-iter", type=int, default=2000)
    um.set_defaults(func=cmd_unmix)

    sim = sub.add_parser("simulate", help="generate a synthetic scene")
    sim.add_argument("--dictionary", required=True, help="clean library CSV")
    sim.add_argument("--materials", type=int, required=True)
    sim.add_argument("--pixels", type=int, required=True)
    sim.add_argument(
        "--dmer-db", type=float, default=float("inf"),
        help="library mismatch level (inf for none)",
    )
    sim.add_argument(
        "--snr-db", type=float, default=float("inf"),
        help="observation noise level (inf for none)",
    )
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--output-dir", required=True)
    sim.set_defaults(func=cmd_simulate)

    bm = sub.add_parser("benchmark", help="run a Monte Carlo sweep")
    bm.add_argument("--config", required=True, help="flat key=value file")
    bm.add_argument("--output-dir", required=True)
    bm.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override a config entry (repeatable)",
    )
    bm.add_argument(
        "--workers", type=int, default=None,
        help="parallel trial processes (default HSUNMIX_WORKERS or 1)",
    )
    bm.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (InputDataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
