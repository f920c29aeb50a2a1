"""Command-line front end: ``swapqkd {verify,run,attack,sweep}``.

Exit codes: 0 success, 1 internal or verification failure, 2 every session
aborted by the check step, 3 invalid arguments.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from swapqkd import verify
from swapqkd.adversary import ATTACK_NAMES
from swapqkd.campaign import CampaignSpec, campaign_records, format_records, run_campaign

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_ALL_ABORTED = 2
EXIT_USAGE = 3

log = logging.getLogger("swapqkd")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _k_list(text: str) -> tuple[int, ...]:
    try:
        ks = tuple(int(k) for k in text.split(",") if k.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not ks or any(k < 0 for k in ks):
        raise argparse.ArgumentTypeError("k values must be non-negative integers")
    return ks


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swapqkd", description="Entanglement-swapping QKD simulator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("verify", help="exhaustive algebra-vs-oracle checks")

    for name, default_attack, help_text in (
        ("run", "none", "run key-distribution sessions"),
        ("attack", "entangle", "run sessions under an eavesdropper"),
        ("sweep", "entangle", "detection probability versus number of checks"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--sessions", type=int, default=100)
        p.add_argument("--rounds", type=int, default=100)
        p.add_argument("--check-fraction", type=float, default=0.1)
        p.add_argument("--attack", choices=ATTACK_NAMES, default=default_attack)
        p.add_argument("--overlap", type=float, default=0.0, help="<alpha|beta> for --attack entangle")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--parallel", type=int, default=1)
        p.add_argument("--dump-transcript", type=Path, default=None)
        p.add_argument("--k", type=_k_list, default=(0, 1, 2, 4, 8) if name == "sweep" else (1, 2, 4, 8))
    return parser


def cmd_verify(out=None) -> int:
    out = out or sys.stdout
    results = verify.run_all()
    width = max(len(name) for name, _, _ in results)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}", file=out)
    failed = [name for name, ok, _ in results if not ok]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=out)
    return EXIT_FAILURE if failed else EXIT_OK


def _spec_from_args(args) -> CampaignSpec:
    try:
        return CampaignSpec(
            subcommand=args.command,
            sessions=args.sessions,
            rounds=args.rounds,
            check_fraction=args.check_fraction,
            attack=args.attack,
            overlap=args.overlap,
            seed=args.seed,
            output_format=args.format,
            out=str(args.out) if args.out else None,
            parallel=args.parallel,
            ks=args.k,
            dump_transcript=str(args.dump_transcript) if args.dump_transcript else None,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_campaign(spec: CampaignSpec, out=None) -> int:
    out = out or sys.stdout
    stats, transcripts = run_campaign(spec)
    text = format_records(campaign_records(stats), spec.output_format)
    if spec.out:
        Path(spec.out).write_text(text)
    else:
        out.write(text)
    if spec.dump_transcript:
        Path(spec.dump_transcript).write_text("".join(transcripts))
    if stats.all_aborted:
        log.warning("every session aborted on check mismatches")
        return EXIT_ALL_ABORTED
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify()
        return cmd_campaign(_spec_from_args(args))
    except UsageError as exc:
        print(f"swapqkd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception:
        log.exception("internal failure")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
