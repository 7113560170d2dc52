"""Command-line harness: validate, eval, scale, winloss, synth, oracle.

Flags mirror environment variables prefixed ``QUANTARB_`` (flag wins, then
env, then default). Exit codes: 0 success, 2 input or validation failure,
3 unexpected runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Callable, Sequence, TypeVar

from .arbitration import ArbitratorConfig
from .errors import ArbitrationError
from .oracle import oracle_select, switching_stats
from .panelio import load_panels, save_panels
from .reporting import (
    METHODS,
    emit_report,
    emit_scaling,
    run_evaluation,
    run_pool_scaling,
    run_win_loss,
    selection_accuracy_table,
)
from .synthetic import build_benchmark_suite

ENV_PREFIX = "QUANTARB_"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3

T = TypeVar("T")


def _env_default(name: str, cast: Callable[[str], T], fallback: T) -> T:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise ValueError(f"environment variable {ENV_PREFIX + name}={raw!r} is invalid")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=_env_default("SEED", int, 0),
        help="master random seed (default 0)",
    )
    parser.add_argument(
        "--window",
        type=int,
        default=_env_default("WINDOW", int, None),
        help="performance window capacity; default min(horizon, 16)",
    )
    parser.add_argument(
        "--n-total",
        type=int,
        default=_env_default("N_TOTAL", int, 1500),
        help="pooled sample budget per timestep (default 1500)",
    )
    parser.add_argument(
        "--temperature",
        type=float,
        default=_env_default("TEMPERATURE", float, 1.0),
        help="softmax temperature for the near-zero-score fallback (default 1.0)",
    )
    parser.add_argument(
        "--mode",
        choices=("dynamic", "static-uniform"),
        default=_env_default("MODE", str, "dynamic"),
        help="weighting mode (default dynamic)",
    )


def _add_output_flags(parser: argparse.ArgumentParser, formats: Sequence[str]) -> None:
    parser.add_argument(
        "--format",
        choices=tuple(formats),
        default=_env_default("FORMAT", str, "table"),
        help="output format (default table)",
    )
    parser.add_argument("--out", default=None, help="write output to this file")


def _config_from(args: argparse.Namespace) -> ArbitratorConfig:
    return ArbitratorConfig(
        n_total=args.n_total,
        window_capacity=args.window,
        softmax_temperature=args.temperature,
        mode=args.mode,
    )


def _parse_methods(raw: str) -> tuple[str, ...]:
    methods = tuple(m.strip() for m in raw.split(",") if m.strip())
    if not methods:
        raise ValueError("method list is empty")
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ValueError(f"unknown methods {unknown}; choose from {', '.join(METHODS)}")
    return methods


def _emit(text: str, args: argparse.Namespace) -> None:
    if args.out is None:
        sys.stdout.write(text)


def _cmd_validate(args: argparse.Namespace) -> int:
    panels = load_panels(args.path, strict=not args.lenient)
    for tagged in panels:
        p = tagged.panel
        print(
            f"{p.series_id}: {p.n_models} models, horizon {p.horizon}, "
            f"context {len(p.context)}, domain {tagged.metadata.domain}"
        )
    print(f"{len(panels)} panel(s) valid")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    panels = load_panels(args.path)
    rows = run_evaluation(
        panels,
        methods=_parse_methods(args.methods),
        config=_config_from(args),
        seed=args.seed,
        workers=args.workers,
        include_series=args.per_series,
    )
    _emit(emit_report(rows, args.format, args.out), args)
    return EXIT_OK


def _cmd_scale(args: argparse.Namespace) -> int:
    panels = load_panels(args.path)
    order = tuple(m.strip() for m in args.order.split(",") if m.strip())
    rows = run_pool_scaling(panels, order, config=_config_from(args), seed=args.seed)
    _emit(emit_scaling(rows, args.format, args.out), args)
    return EXIT_OK


def _cmd_winloss(args: argparse.Namespace) -> int:
    panels = load_panels(args.path)
    result = run_win_loss(
        panels, args.a, args.b, config=_config_from(args), seed=args.seed
    )
    for metric in ("crps", "mase"):
        wins, losses, ties = result[metric]
        print(f"{metric}: {args.a} vs {args.b} -> wins {wins}, losses {losses}, ties {ties}")
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    suite = build_benchmark_suite(args.n, seed=args.seed, n_experts=args.experts)
    count = save_panels(args.out, suite)
    print(f"wrote {count} panel(s) to {args.out}")
    return EXIT_OK


def _cmd_oracle(args: argparse.Namespace) -> int:
    panels = load_panels(args.path)
    tagged_traces = [
        (t.metadata.domain, t.metadata.horizon_class, oracle_select(t.panel))
        for t in panels
    ]
    print("mean oracle switch percentage by (domain, horizon class):")
    for (domain, horizon_class), pct in switching_stats(tagged_traces).items():
        print(f"  {domain:<14} {horizon_class:<8} {100.0 * pct:6.1f}%")
    if not args.no_topk:
        table = selection_accuracy_table(
            panels, config=_config_from(args), seed=args.seed
        )
        ks = range(1, len(table["synapse"]) + 1)
        print("top-k oracle agreement (pooled over timesteps):")
        print("  k        " + "  ".join(f"{k:>6d}" for k in ks))
        for method in ("synapse", "median"):
            cells = "  ".join(f"{v:6.4f}" for v in table[method])
            print(f"  {method:<8} {cells}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantarb",
        description=(
            "Arbitrate quantile forecasts from a model pool and score the "
            "result against ensemble and oracle baselines."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_validate = sub.add_parser("validate", help="validate a panel file or directory")
    p_validate.add_argument("path", help="panel file (.jsonl) or directory")
    p_validate.add_argument(
        "--lenient", action="store_true", help="ignore unknown record fields"
    )
    p_validate.set_defaults(func=_cmd_validate)

    p_eval = sub.add_parser("eval", help="score methods over a panel suite")
    p_eval.add_argument("path", help="panel file (.jsonl) or directory")
    p_eval.add_argument(
        "--methods",
        default=_env_default("METHODS", str, "synapse,synapse-static,median,mean,per-model,oracle"),
        help="comma-separated method list (default: all)",
    )
    p_eval.add_argument(
        "--workers",
        type=int,
        default=_env_default("WORKERS", int, None),
        help="panel-parallel worker threads (default serial)",
    )
    p_eval.add_argument(
        "--per-series", action="store_true", help="also emit one row per series"
    )
    _add_config_flags(p_eval)
    _add_output_flags(p_eval, ("table", "csv", "csv-long", "json"))
    p_eval.set_defaults(func=_cmd_eval)

    p_scale = sub.add_parser("scale", help="pool-scaling sweep over model prefixes")
    p_scale.add_argument("path", help="panel file (.jsonl) or directory")
    p_scale.add_argument(
        "--order", required=True, help="comma-separated model names, prefix order"
    )
    _add_config_flags(p_scale)
    _add_output_flags(p_scale, ("table", "csv", "json"))
    p_scale.set_defaults(func=_cmd_scale)

    p_winloss = sub.add_parser("winloss", help="pairwise per-panel comparison")
    p_winloss.add_argument("path", help="panel file (.jsonl) or directory")
    p_winloss.add_argument("--a", required=True, help="first method (or model:<name>)")
    p_winloss.add_argument("--b", required=True, help="second method (or model:<name>)")
    _add_config_flags(p_winloss)
    p_winloss.set_defaults(func=_cmd_winloss)

    p_synth = sub.add_parser("synth", help="generate the synthetic benchmark suite")
    p_synth.add_argument("--n", type=int, required=True, help="number of panels")
    p_synth.add_argument("--out", required=True, help="output panel file")
    p_synth.add_argument(
        "--experts",
        type=int,
        default=None,
        help="fixed pool size (default: cycle 2..6)",
    )
    p_synth.add_argument(
        "--seed", type=int, default=_env_default("SEED", int, 0), help="suite seed"
    )
    p_synth.set_defaults(func=_cmd_synth)

    p_oracle = sub.add_parser("oracle", help="oracle switching and top-k agreement")
    p_oracle.add_argument("path", help="panel file (.jsonl) or directory")
    p_oracle.add_argument(
        "--no-topk", action="store_true", help="skip the top-k agreement table"
    )
    _add_config_flags(p_oracle)
    p_oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except (ArbitrationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
