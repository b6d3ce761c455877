"""Command-line benchmark harness.

Subcommands:
  tune           run the optimizer on a built-in objective (or custom space)
  sample-report  dump raw samples per parameter for external histogramming
  compare        paired-seed comparison: two-phase vs. pure random search
  serve          start the HTTP ask/tell service

Exit codes: 0 success, 2 usage/validation error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .engine import Search, history_to_csv
from .errors import HoptError, ParseError, SpaceError
from .objectives import OBJECTIVE_NAMES, get_objective
from .persist import encode_values
from .pruning import QuantilePruner
from .sampling import Rng, sample
from .space import space_from_json

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

_DIRECTIONS = {"max": "maximize", "maximize": "maximize", "min": "minimize", "minimize": "minimize"}


class CliError(Exception):
    """Usage or validation problem; maps to exit code 2."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    tune = sub.add_parser("tune", help="run the optimizer on an objective")
    tune.add_argument("--objective", choices=OBJECTIVE_NAMES, help="built-in objective name")
    tune.add_argument("--dims", type=int, default=2, help="dimensionality of the objective")
    tune.add_argument("--space", help="JSON space file overriding the built-in space")
    tune.add_argument("--direction", choices=sorted(_DIRECTIONS), help="optimization direction")
    tune.add_argument("--runtime", help="wall-clock budget, e.g. '30min'")
    tune.add_argument("--steps", type=int, help="evaluation-count budget")
    tune.add_argument("--workers", default="1", help="worker count: int, 'auto', 'per-gpu', 'Nx per-gpu'")
    tune.add_argument("--seed", type=int, default=0)
    tune.add_argument("--checkpoint", help="checkpoint file or directory")
    tune.add_argument("--eval-repeats", type=int, default=1)
    tune.add_argument("--prune-quantile", type=float)
    tune.add_argument("--random-fraction", type=float, default=0.25)
    tune.add_argument("--noise-sigma", type=float, default=0.1, help="noisy_sphere only")
    tune.add_argument("--history-out", help="write the evaluation history CSV here")
    tune.add_argument("--result-out", help="write the result JSON here")

    rep = sub.add_parser("sample-report", help="dump raw samples per parameter")
    rep.add_argument("--space", required=True, help="JSON space file")
    rep.add_argument("--n", type=int, required=True, help="samples per parameter")
    rep.add_argument("--out", required=True, help="output CSV path")
    rep.add_argument("--seed", type=int, default=0)

    cmp_ = sub.add_parser("compare", help="two-phase vs. pure random search, paired seeds")
    cmp_.add_argument("--objective", choices=OBJECTIVE_NAMES, required=True)
    cmp_.add_argument("--dims", type=int, default=2)
    cmp_.add_argument("--steps", type=int, required=True)
    cmp_.add_argument("--trials", type=int, default=10)
    cmp_.add_argument("--seeds", type=int, default=0, help="base seed; trial i uses base + i")
    cmp_.add_argument("--out", help="optional summary CSV path")

    serve = sub.add_parser("serve", help="start the HTTP ask/tell service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    return parser


def _load_space_file(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read space file {path!r}: {e}") from e
    return space_from_json(text)


def _cmd_tune(args: argparse.Namespace) -> int:
    if args.runtime is not None and args.steps is not None:
        raise CliError("--runtime and --steps are mutually exclusive")
    if args.runtime is None and args.steps is None:
        raise CliError("one of --runtime or --steps is required")
    if args.objective is None and args.space is None:
        raise CliError("one of --objective or --space is required")
    if args.objective is None:
        raise CliError("--space needs --objective to supply the function to evaluate")

    builtin = get_objective(
        args.objective, dims=args.dims, noise_sigma=args.noise_sigma, seed=args.seed
    )
    space = _load_space_file(args.space) if args.space else builtin.space
    direction = _DIRECTIONS[args.direction] if args.direction else builtin.direction
    pruner = QuantilePruner(q=args.prune_quantile) if args.prune_quantile is not None else None
    if args.eval_repeats < 1:
        raise CliError(f"--eval-repeats must be >= 1, got {args.eval_repeats}")

    search = Search(
        space,
        direction=direction,
        seed=args.seed,
        random_fraction=args.random_fraction,
        checkpoint=args.checkpoint,
    )
    result = search.run(
        builtin.fn,
        steps=args.steps,
        runtime=args.runtime,
        workers=args.workers,
        pruner=pruner,
        eval_repeats=args.eval_repeats,
    )

    if args.history_out:
        Path(args.history_out).write_text(history_to_csv(result.history, space), encoding="utf-8")
    if args.result_out:
        Path(args.result_out).write_text(
            json.dumps(result.to_json_dict(), indent=2) + "\n", encoding="utf-8"
        )
    if result.succeeded:
        print(f"best value: {result.best_value!r}")
        print(f"best candidate: {json.dumps(encode_values(result.best_candidate.values))}")
    else:
        print("no successful evaluation")
    return EXIT_OK


def _cmd_sample_report(args: argparse.Namespace) -> int:
    if args.n < 0:
        raise CliError(f"--n must be >= 0, got {args.n}")
    space = _load_space_file(args.space)
    rng = Rng(args.seed)
    names = space.names()
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for _ in range(args.n):
            row = []
            for name in names:
                v = sample(space[name], rng)
                row.append(json.dumps(v.tolist()) if isinstance(v, np.ndarray) else v)
            writer.writerow(row)
    print(f"wrote {args.n} samples x {len(names)} parameters to {args.out}")
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    if args.trials < 1:
        raise CliError(f"--trials must be >= 1, got {args.trials}")
    builtin = get_objective(args.objective, dims=args.dims)
    rows = []
    for i in range(args.trials):
        seed = args.seeds + i
        two_phase = Search(builtin.space, builtin.direction, seed=seed).run(
            builtin.fn, steps=args.steps
        )
        random_only = Search(
            builtin.space, builtin.direction, seed=seed, random_fraction=1.0
        ).run(builtin.fn, steps=args.steps)
        a, b = two_phase.best_value, random_only.best_value
        if a == b:
            win = 0.5
        elif builtin.direction == "maximize":
            win = 1.0 if a > b else 0.0
        else:
            win = 1.0 if a < b else 0.0
        rows.append((seed, a, b, win))

    two = np.array([r[1] for r in rows], dtype=float)
    rnd = np.array([r[2] for r in rows], dtype=float)
    win_rate = float(np.mean([r[3] for r in rows]))

    header = ["seed", "two_phase_best", "random_best", "two_phase_win"]
    print(",".join(header))
    for row in rows:
        print(f"{row[0]},{row[1]!r},{row[2]!r},{row[3]}")
    print(
        f"# win_rate={win_rate} two_phase_mean={two.mean()!r} two_phase_std={two.std()!r} "
        f"random_mean={rnd.mean()!r} random_std={rnd.std()!r}"
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
            writer.writerow([])
            writer.writerow(["win_rate", win_rate, "", ""])
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_USAGE
    handlers = {
        "tune": _cmd_tune,
        "sample-report": _cmd_sample_report,
        "compare": _cmd_compare,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (CliError, ParseError, SpaceError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except HoptError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
