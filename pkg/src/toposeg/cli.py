"""Batch command line front end.

Standard output carries data (JSON or CSV); diagnostics go to standard
error. Exit codes: 0 success, 1 verification failure, 2 file or format
problems, 3 shape or category mismatches, 4 gradient check beyond
tolerance. Identical inputs and flags produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CategoryError, CorpusError, FormatError, ShapeError
from .io import read_map, read_mask, write_tensor
from .losses import FdProbe, LossParams, finite_difference_check, total_loss
from .metrics import corpus_csv, evaluate_corpus
from .persistence import superlevel_barcode
from .verify import run_verify, summary_lines

FD_TOLERANCE = 1e-3
COUNTEREXAMPLE_FILE = "toposeg-verify-counterexample.json"


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def cmd_barcode(args) -> int:
    likelihood = read_map(args.map)
    barcode = superlevel_barcode(likelihood.channel(args.category))
    _emit(barcode.to_obj())
    return 0


def _sample_fd(pred, mask, params, count: int):
    """Draw tie-free probes until ``count`` accepted (bounded retries)."""
    rng = np.random.default_rng(0)
    accepted: list[FdProbe] = []
    rejected = 0
    for _ in range(20):
        if len(accepted) >= count:
            break
        want = count - len(accepted)
        candidates = [
            (
                int(rng.integers(1, pred.categories + 1)),
                int(rng.integers(0, pred.height)),
                int(rng.integers(0, pred.width)),
            )
            for _ in range(want)
        ]
        report = finite_difference_check(pred, mask, params, candidates, h=1e-4)
        accepted.extend(report.probes)
        rejected += len(report.rejected)
    max_err = max((p.rel_err for p in accepted), default=0.0)
    return {
        "requested": count,
        "accepted": len(accepted),
        "rejected": rejected,
        "max_rel_err": max_err,
        "tolerance": FD_TOLERANCE,
    }


def cmd_loss(args) -> int:
    pred = read_map(args.pred)
    mask = read_mask(args.gt, categories=pred.categories)
    params = LossParams(
        lambda_d=args.lambda_d,
        lambda_cl=args.lambda_cl,
        lambda_per=args.lambda_per,
        epoch=args.epoch,
        warmup_epochs=args.warmup,
        skel_iters=args.skel_iters,
    )
    report, grad = total_loss(pred, mask, params)
    obj = report.to_obj()
    if args.grad is not None:
        write_tensor(args.grad, grad)
    exit_code = 0
    if args.check_fd:
        fd = _sample_fd(pred, mask, params, args.check_fd)
        obj["fd"] = fd
        if fd["max_rel_err"] >= FD_TOLERANCE:
            print(
                f"gradient check failed: max relative error {fd['max_rel_err']:.3e}"
                f" >= {FD_TOLERANCE}",
                file=sys.stderr,
            )
            exit_code = 4
    _emit(obj)
    return exit_code


def cmd_eval(args) -> int:
    report = evaluate_corpus(args.pred_dir, args.gt_dir)
    if args.format == "csv":
        sys.stdout.write(corpus_csv(report))
    else:
        _emit(report.to_obj())
    return 0


def cmd_verify(args) -> int:
    results = run_verify(args.seed, args.cases)
    for line in summary_lines(results, args.cases):
        print(line)
    failed = [r for r in results if not r.passed]
    if failed:
        first = next((r.counterexample for r in failed if r.counterexample), None)
        if first is not None:
            path = Path(COUNTEREXAMPLE_FILE)
            path.write_text(json.dumps(first, indent=2) + "\n")
            print(f"first counterexample written to {path}", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toposeg",
        description="Barcodes, topology losses, and segmentation metrics for likelihood maps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_bar = sub.add_parser("barcode", help="persistence barcode of one category as JSON")
    p_bar.add_argument("map", help="likelihood map (.tlm)")
    p_bar.add_argument("--category", type=_positive_int, default=1)
    p_bar.set_defaults(func=cmd_barcode)

    p_loss = sub.add_parser("loss", help="loss report (and optional gradient) as JSON")
    p_loss.add_argument("pred", help="prediction likelihood map (.tlm)")
    p_loss.add_argument("gt", help="ground-truth label mask (.pgm)")
    p_loss.add_argument("--lambda-d", type=_nonneg_float, default=0.4)
    p_loss.add_argument("--lambda-cl", type=_nonneg_float, default=0.4)
    p_loss.add_argument("--lambda-per", type=_nonneg_float, default=0.2)
    p_loss.add_argument("--epoch", type=_nonneg_int, default=None)
    p_loss.add_argument("--warmup", type=_positive_int, default=10)
    p_loss.add_argument("--skel-iters", type=_positive_int, default=10)
    p_loss.add_argument("--grad", metavar="OUT_TLM", default=None, help="write gradient tensor here")
    p_loss.add_argument(
        "--check-fd",
        metavar="N",
        type=_nonneg_int,
        default=0,
        help="verify the gradient at N random tie-free pixels",
    )
    p_loss.set_defaults(func=cmd_loss)

    p_eval = sub.add_parser("eval", help="evaluate a directory of predicted masks")
    p_eval.add_argument("pred_dir")
    p_eval.add_argument("gt_dir")
    p_eval.add_argument("--format", choices=("csv", "json"), default="csv")
    p_eval.set_defaults(func=cmd_eval)

    p_verify = sub.add_parser("verify", help="run the self-verification suites")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--cases", type=_nonneg_int, default=100)
    p_verify.set_defaults(func=cmd_verify)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, CorpusError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ShapeError, CategoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
