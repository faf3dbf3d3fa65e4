"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical divergence.
"""

import argparse
import json
import logging
import sys

from . import dataset as ds_mod
from .dataset import DatasetError, SynthSpec
from .gradcheck import gradcheck
from .gridsearch import GridConfig, escalate, grid_search
from .head import DEFAULT_BETAS, RidgeError
from .memory import benchmark_table, memory_counts
from .reservoir import LINEAR, DivergenceError, NonlinearityKind
from .trainer import ReservoirConfig, TrainConfig, TrainedModel, evaluate, train

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_DIVERGED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _betas(text):
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid beta list {text!r}") from None
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError("betas must be a non-empty list of positive numbers")
    return values


def _kind(args):
    return NonlinearityKind(args.kind, args.p)


def _add_reservoir_args(p):
    p.add_argument("--nx", type=int, default=30, help="reservoir node count")
    p.add_argument("--mask-seed", type=int, default=0)
    p.add_argument("--kind", choices=["linear", "mackey-glass"], default="linear")
    p.add_argument("--p", type=int, default=2, help="Mackey-Glass exponent (even)")
    p.add_argument("--betas", type=_betas, default=DEFAULT_BETAS, help="comma-separated ridge penalties")


def _load(path, normalize=True):
    data = ds_mod.load_dataset(path)
    stats = None
    if normalize:
        data, stats = ds_mod.normalize(data)
    return data, stats


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, allow_nan=False)
        fh.write("\n")


def cmd_synth(args):
    spec = SynthSpec(args.task, args.per_class, args.T, args.features, args.noise, args.seed)
    data = ds_mod.generate_synthetic(spec)
    ds_mod.write_dataset(data, args.out)
    print(f"wrote {data.name}: {len(data.train)} train / {len(data.test)} test samples to {args.out}")


def _train_config(args):
    return TrainConfig(
        epochs=args.epochs,
        betas=args.betas,
        bp_mode=args.bp,
        shuffle_seed=args.shuffle_seed,
        beta_holdout=args.beta_holdout,
    )


def cmd_train(args):
    data, stats = _load(args.data, not args.no_normalize)
    model = train(data, ReservoirConfig(args.nx, args.mask_seed, _kind(args)), _train_config(args))
    model.norm = stats
    acc, loss = evaluate(model, data.test)
    print(f"A={model.params.A:.6g} B={model.params.B:.6g} beta={model.beta:g}")
    print(f"test accuracy {acc:.4f}  mean loss {loss:.4f}")
    if args.out:
        model.save(args.out)


def cmd_eval(args):
    model = TrainedModel.load(args.model)
    data = ds_mod.load_dataset(args.data)
    split = data.test if args.split == "test" else data.train
    if model.norm is not None:
        split = ds_mod.apply_stats(split, model.norm)
    acc, loss = evaluate(model, split)
    print(f"{args.split} accuracy {acc:.4f}  mean loss {loss:.4f}")
    if args.json:
        _write_json(args.json, {"split": args.split, "accuracy": acc, "loss": loss})


def _print_table(result):
    table = result.accuracy_table()
    print(f"D={result.divisions}  rows: A, cols: B  (test accuracy)")
    for row in table:
        print("  " + " ".join(f"{v:5.3f}" for v in row))
    b = result.best
    print(f"best A={b.A:.5g} B={b.B:.5g} beta={b.beta} accuracy={b.test_accuracy:.4f}")


def cmd_gridsearch(args):
    data, _ = _load(args.data, not args.no_normalize)
    config = GridConfig(
        divisions=args.divisions or 1, betas=args.betas, n_nodes=args.nx, mask_seed=args.mask_seed, kind=_kind(args)
    )
    if args.escalate:
        if args.target is None:
            raise UsageError("--escalate requires --target")
        esc = escalate(data, args.target, args.max_div, config)
        result = esc.result
        status = "reached" if esc.reached else "not reached"
        print(f"target {args.target:.4f} {status} at D={esc.divisions} after {esc.seconds:.2f}s, "
              f"{esc.cells_evaluated} cells")
    else:
        if args.divisions is None:
            raise UsageError("give --divisions D or --escalate")
        result = grid_search(data, config)
        print(f"{len(result.cells)} cells in {result.seconds:.2f}s")
    _print_table(result)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(result.to_csv())
    if args.json:
        payload = {
            "divisions": result.divisions,
            "seconds": result.seconds,
            "best": result.best.__dict__,
            "accuracy_table": result.accuracy_table().tolist(),
        }
        if args.escalate:
            payload.update(reached=esc.reached, total_seconds=esc.seconds, cells_evaluated=esc.cells_evaluated)
        _write_json(args.json, payload)


def cmd_gradcheck(args):
    kinds = (LINEAR, NonlinearityKind("mackey-glass", args.p)) if args.kind == "both" else (_kind(args),)
    result = gradcheck(args.trials, args.seed, kinds, max_T=args.T, max_nx=args.nx, max_ny=args.ny)
    print(f"{args.trials} trials: max relative error {result.worst_relative:.3e}, "
          f"max absolute error (small references) {result.worst_absolute:.3e}")
    for line in result.failures[:10]:
        print("  FAIL " + line)
    if args.json:
        _write_json(args.json, {
            "trials": args.trials,
            "worst_relative": result.worst_relative,
            "worst_absolute": result.worst_absolute,
            "failures": result.failures,
        })
    return 0 if result.passed else EXIT_DIVERGED


def cmd_memreport(args):
    if args.table:
        print(f"{'dataset':8s} {'naive':>8s} {'simplified':>11s} {'reduction':>9s}")
        for name, r in benchmark_table(args.nx).items():
            print(f"{name:8s} {r.naive:8d} {r.simplified:11d} {100 * r.reduction:8.0f}%")
        return
    if args.T is None or args.ny is None:
        raise UsageError("memreport needs --T and --ny (or --table)")
    r = memory_counts(args.T, args.nx, args.ny)
    print(f"T={r.T} N_x={r.n_nodes} N_y={r.n_classes}: naive {r.naive}, simplified {r.simplified}, "
          f"reduction {100 * r.reduction:.1f}%")
    if args.json:
        _write_json(args.json, r.to_dict())


def cmd_experiment(args):
    from .experiment import ExperimentConfig, run_experiment

    if args.data:
        data, _ = _load(args.data, not args.no_normalize)
    else:
        data, _ = ds_mod.normalize(ds_mod.generate_synthetic(SynthSpec(noise=args.noise, seed=args.seed)))
    config = ExperimentConfig(ReservoirConfig(args.nx, args.mask_seed, _kind(args)), _train_config(args), args.max_div)
    report, _, esc = run_experiment(data, config)
    print(f"dataset {report.dataset}")
    print(f"bp   accuracy {report.bp_accuracy:.4f} in {report.bp_seconds:.2f}s  (A={report.A:.4g}, B={report.B:.4g})")
    status = "" if report.grid_reached else " (target not reached)"
    print(f"grid D*={report.grid_divisions}{status} accuracy {report.grid_accuracy:.4f} in "
          f"{report.grid_seconds:.2f}s over {report.grid_cells} cells")
    print(f"grid/bp time ratio {report.speedup:.2f}")
    m = report.memory
    print(f"memory: naive {m['naive']}, simplified {m['simplified']}, reduction {100 * m['reduction']:.1f}%")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json() + "\n")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(esc.result.to_csv())


def build_parser():
    parser = _Parser(prog="dfrgrad", description="Delayed-feedback reservoir training by backpropagation.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--task", choices=["frequency-pair", "amplitude-pair"], default="frequency-pair")
    p.add_argument("--per-class", type=int, default=50)
    p.add_argument("--T", type=int, default=64)
    p.add_argument("--features", type=int, default=1)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train by backpropagation and refit the readout")
    p.add_argument("--data", required=True)
    _add_reservoir_args(p)
    p.add_argument("--shuffle-seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--bp", choices=["truncated", "full"], default="truncated")
    p.add_argument("--beta-holdout", type=float, default=0.0, help="train fraction held out to score betas")
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--out", help="model JSON path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--split", choices=["train", "test"], default="test")
    p.add_argument("--json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gridsearch", help="grid-search baseline")
    p.add_argument("--data", required=True)
    _add_reservoir_args(p)
    p.add_argument("--divisions", type=int)
    p.add_argument("--escalate", action="store_true")
    p.add_argument("--target", type=float)
    p.add_argument("--max-div", type=int, default=16)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--csv")
    p.add_argument("--json")
    p.set_defaults(func=cmd_gridsearch)

    p = sub.add_parser("gradcheck", help="backpropagation versus finite differences")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--nx", type=int, default=5)
    p.add_argument("--ny", type=int, default=4)
    p.add_argument("--kind", choices=["linear", "mackey-glass", "both"], default="both")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json")
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("memreport", help="stored-value counts, naive versus truncated")
    p.add_argument("--T", type=int)
    p.add_argument("--nx", type=int, default=30)
    p.add_argument("--ny", type=int)
    p.add_argument("--table", action="store_true", help="print the twelve benchmark rows")
    p.add_argument("--json")
    p.set_defaults(func=cmd_memreport)

    p = sub.add_parser("experiment", help="bp training versus escalated grid search")
    p.add_argument("--data", help="dataset JSON; defaults to the synthetic frequency-pair task")
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    _add_reservoir_args(p)
    p.add_argument("--shuffle-seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--bp", choices=["truncated", "full"], default="truncated")
    p.add_argument("--beta-holdout", type=float, default=0.0, help="train fraction held out to score betas")
    p.add_argument("--max-div", type=int, default=16)
    p.add_argument("--no-normalize", action="store_true")
    p.add_argument("--json")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args) or 0
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DatasetError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DivergenceError, RidgeError) as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
