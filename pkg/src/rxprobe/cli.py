"""Command-line driver: ``rxprobe {train,search,grid,validate,report,cost-model}``.

Exit codes: 0 success, 2 configuration/usage error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import campaigns
from .baseline import CostModelInput, cost_model
from .config import ConfigError, apply_overrides, load_config, parse_config
from .records import CampaignFileError, read_campaign
from .report import render_text, write_report

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("rxprobe")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser, model: bool = True) -> None:
    p.add_argument("--config", help="YAML/JSON config file")
    p.add_argument("--seed", type=int, help="root seed")
    if model:
        p.add_argument("--model", help="trained model file (.npz)")
    p.add_argument("--out", required=True, help="output file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rxprobe", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a neural receiver preset")
    _common(p, model=False)
    p.add_argument("--preset", choices=["PTLC", "FTLC", "FTHC", "FTHC-desk"])
    p.add_argument("--steps", type=int)
    p.add_argument("--batch", type=int)

    p = sub.add_parser("search", help="gradient-based failure search campaign")
    _common(p)
    p.add_argument("--threshold", type=float)
    p.add_argument("--episodes", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--replay", help="re-run a campaign from its stored config snapshot")
    for axis in ("speed", "delay-spread", "snr"):
        p.add_argument(f"--{axis}-min", type=float)
        p.add_argument(f"--{axis}-max", type=float)

    p = sub.add_parser("grid", help="exhaustive grid baseline")
    _common(p)
    p.add_argument("--threshold", type=float)
    p.add_argument("--batch", type=int)
    p.add_argument("--counts", type=int, nargs=3, metavar=("SPEED", "DELAY", "SNR"),
                   help="lattice points per axis")

    p = sub.add_parser("validate", help="large-sample validation of a search or grid campaign")
    _common(p)
    p.add_argument("--campaign", required=True, help="search or grid campaign file")
    p.add_argument("--realizations", type=int)

    p = sub.add_parser("report", help="tables and plot exports from campaign files")
    p.add_argument("campaigns", nargs="+")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("cost-model", help="analytic test-count model")
    p.add_argument("--k", type=int, nargs="+", required=True, help="points per axis (one value: k**d)")
    p.add_argument("--d", type=int)
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--factor", type=float, default=1.0)
    return parser


def _overrides(args) -> dict:
    ov = {}
    if getattr(args, "seed", None) is not None:
        ov["seed"] = args.seed
    cmd = args.command
    if cmd == "train":
        for key, val in (("preset", args.preset), ("train.steps", args.steps), ("train.batch", args.batch)):
            if val is not None:
                ov[key] = val
    elif cmd == "search":
        for key, val in (("search.threshold", args.threshold), ("search.episodes", args.episodes),
                         ("search.max_iters", args.max_iters), ("search.batch", args.batch)):
            if val is not None:
                ov[key] = val
        for axis in ("speed", "delay_spread", "snr"):
            for end in ("min", "max"):
                val = getattr(args, f"{axis}_{end}")
                if val is not None:
                    ov[f"search.{axis}.{end}"] = val
    elif cmd == "grid":
        for key, val in (("grid.threshold", args.threshold), ("grid.batch", args.batch)):
            if val is not None:
                ov[key] = val
        if args.counts:
            for axis, n in zip(("speed", "delay_spread", "snr"), args.counts):
                ov[f"grid.{axis}.count"] = n
    elif cmd == "validate" and args.realizations is not None:
        ov["validation.n_realizations"] = args.realizations
    return ov


def _config(args):
    if getattr(args, "replay", None):
        try:
            camp = read_campaign(args.replay)
        except CampaignFileError as err:
            raise ConfigError(str(err)) from None
        if camp.kind != "search":
            raise ConfigError(f"--replay needs a search campaign, got {camp.kind!r}")
        cfg = parse_config(camp.config, args.replay)
    else:
        cfg = load_config(args.config)
    return apply_overrides(cfg, _overrides(args))


def _model(cfg, args) -> Path:
    try:
        return campaigns.model_path(cfg, args.model)
    except FileNotFoundError as err:
        raise ConfigError(str(err)) from None


def run(args) -> int:
    cmd = args.command
    if cmd == "cost-model":
        try:
            res = cost_model(CostModelInput(tuple(args.k), args.episodes, args.max_iters, args.factor, args.d))
        except ValueError as err:
            raise ConfigError(str(err)) from None
        print(json.dumps(res, sort_keys=True))
        return EXIT_OK
    if cmd == "report":
        try:
            camps = [read_campaign(p) for p in args.campaigns]
        except CampaignFileError as err:
            raise ConfigError(str(err)) from None
        report = write_report(camps, args.out)
        sys.stdout.write(render_text(report))
        return EXIT_OK

    cfg = _config(args)
    if cmd == "train":
        path = campaigns.train_model(cfg, args.out)
        print(f"model written to {path}")
    elif cmd == "search":
        result = campaigns.run_search(cfg, _model(cfg, args), args.out)
        print(json.dumps(result.summary, sort_keys=True))
    elif cmd == "grid":
        records = campaigns.run_grid_campaign(cfg, _model(cfg, args), args.out)
        print(json.dumps({"total_tests": len(records), "flagged": sum(r.failed for r in records)}))
    elif cmd == "validate":
        try:
            read_campaign(args.campaign)
        except CampaignFileError as err:
            raise ConfigError(str(err)) from None
        result = campaigns.run_validation(cfg, _model(cfg, args), args.campaign, args.out)
        print(json.dumps({str(t): result.counts(t).to_dict() for t in result.thresholds}, sort_keys=True))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(args)
    except ConfigError as err:
        print(f"rxprobe: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:  # noqa: BLE001 - surfaced as exit status
        log.debug("runtime failure", exc_info=True)
        print(f"rxprobe: {args.command} failed: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
