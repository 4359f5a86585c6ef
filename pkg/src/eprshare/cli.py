"""Command-line interface: run, verify-table, replay, sweep.

Exit codes: 0 on success, 1 when the protocol run aborted (or a verification
failed), 2 for configuration and usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .campaign import run_campaign, run_protocol
from .channel import ConfigError
from .config import ProtocolConfig
from .metrics import compute_efficiency
from .sharing import verify_reconstruction_table
from .transcript import ReplayError, Transcript, replay_decode

SWEEP_COLUMNS = (
    "param",
    "abort_rate",
    "mean_error",
    "recovery_rate",
    "mean_fidelity",
    "eta_q",
    "eta_t",
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eprshare",
        description=(
            "Simulate and verify multiparty splitting and sharing of secrets "
            "over relayed singlet pairs."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one configuration, once or as a campaign")
    run_p.add_argument("--config", required=True, help="path to a JSON run configuration")
    run_p.add_argument("--seed", type=int, default=None, help="override the config seed")
    run_p.add_argument("--trials", type=int, default=1, help="number of seeded trials")
    run_p.add_argument("--out", default=None, help="write the report here (default stdout)")
    run_p.add_argument("--format", choices=("json", "csv"), default="json")
    run_p.add_argument(
        "--transcript", default=None,
        help="write the run transcript JSON here (single trial only)",
    )
    run_p.add_argument(
        "--no-figures", action="store_true",
        help="skip rendering figures next to the report file",
    )

    table_p = sub.add_parser(
        "verify-table",
        help="replay all 16 two-qubit outcome rows and print PASS/FAIL lines",
    )
    table_p.add_argument("--tolerance", type=float, default=1e-9)

    replay_p = sub.add_parser(
        "replay", help="recompute the recovered bits from a transcript"
    )
    replay_p.add_argument("transcript", help="path to a transcript JSON file")

    sweep_p = sub.add_parser(
        "sweep", help="run campaigns across a range of one config parameter"
    )
    sweep_p.add_argument("--config", required=True)
    sweep_p.add_argument(
        "--param", required=True,
        help="config field to sweep; dotted paths reach channel fields, "
             "e.g. channels.default.depolarize_prob",
    )
    sweep_p.add_argument(
        "--values", required=True, help="comma-separated numeric values"
    )
    sweep_p.add_argument("--trials", type=int, default=20, help="trials per value")
    sweep_p.add_argument("--out", required=True, help="write the sweep table here")
    sweep_p.add_argument("--format", choices=("csv", "json"), default="csv")
    sweep_p.add_argument("--no-figures", action="store_true")
    return parser


def _load_config(path: str) -> ProtocolConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from None
    return ProtocolConfig.from_json(text)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)


def _flat_report(report: dict) -> dict:
    out: dict = {}

    def walk(node, prefix):
        if isinstance(node, dict):
            for key, item in node.items():
                walk(item, f"{prefix}{key}" if not prefix else f"{prefix}.{key}")
        elif isinstance(node, list):
            return  # lists are dropped from the flat CSV view
        else:
            out[prefix] = node

    walk(report, "")
    return out


def _figure_path(out: str, suffix: str) -> str:
    stem, _ = os.path.splitext(out)
    return f"{stem}{suffix}.png"


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    if args.trials < 1:
        raise ConfigError("--trials must be at least 1")
    if args.transcript and args.trials != 1:
        raise ConfigError("--transcript needs a single trial")

    figures: list[str] = []
    if args.trials == 1:
        result = run_protocol(config)
        outcome = result.outcome
        efficiency = (
            compute_efficiency(outcome).to_dict() if result.completed else None
        )
        report = {
            "command": "run",
            "trials": 1,
            "config": config.to_dict(),
            "outcome": outcome.to_dict(),
            "efficiency": efficiency,
            "adversary": {
                "captured_slots": result.adversary.captured_slots,
                "intercepts": result.adversary.intercept_count,
                "learned_slots": len(result.adversary.learned),
            },
        }
        if args.transcript:
            _write_text(args.transcript, result.transcript.to_json(indent=2))
        if args.out and not args.no_figures:
            from .figures import run_figure

            figures.append(
                run_figure(outcome, config.threshold, _figure_path(args.out, "_errors"))
            )
        exit_code = 0 if result.completed else 1
        summary = f"verdict={outcome.verdict}"
        if outcome.abort_stage:
            summary += f" abort_stage={outcome.abort_stage} rate={outcome.abort_rate:.4f}"
    else:
        campaign = run_campaign(config, args.trials)
        report = {
            "command": "run",
            "trials": args.trials,
            "config": config.to_dict(),
            "campaign": campaign.to_dict(),
        }
        if args.out and not args.no_figures:
            from .figures import campaign_figure

            figures.append(
                campaign_figure(
                    campaign, config.threshold, _figure_path(args.out, "_campaign")
                )
            )
        exit_code = 0
        summary = (
            f"trials={campaign.trials} abort_rate={campaign.abort_rate:.3f} "
            f"recovery_rate={campaign.recovery_rate:.3f}"
        )
    report["figures"] = figures

    if args.format == "json":
        _write_text(args.out, json.dumps(report, indent=2))
    else:
        flat = _flat_report(report)
        import io

        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(flat.keys())
        writer.writerow(flat.values())
        _write_text(args.out, buffer.getvalue().rstrip("\n"))
    if args.out:
        print(summary)
    return exit_code


def _cmd_verify_table(args) -> int:
    rows = verify_reconstruction_table(tol=args.tolerance)
    for row in rows:
        print(row.line())
    failed = sum(1 for row in rows if not row.passed)
    print(f"{len(rows) - failed}/{len(rows)} rows verified")
    return 0 if failed == 0 else 1


def _cmd_replay(args) -> int:
    try:
        with open(args.transcript, "r", encoding="utf-8") as handle:
            transcript = Transcript.from_json(handle.read())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot load transcript: {exc}") from None
    recorded = transcript.header.get("recovered")
    try:
        recomputed = replay_decode(transcript)
    except ReplayError:
        recomputed = None
    if recorded is None and recomputed is None:
        print("nothing to replay: transcript has no decodable payload "
              "(aborted run or state sharing)")
        return 0
    if recorded == recomputed:
        print(f"REPLAY OK: {len(recomputed or '')} bits reproduced")
        return 0
    print("REPLAY MISMATCH: transcript decode differs from recorded outcome")
    return 1


def _set_by_path(raw: dict, path: str, value) -> None:
    parts = path.split(".")
    node = raw
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"cannot descend into {part!r} of {path!r}")
    node[parts[-1]] = value


def _parse_value(token: str):
    token = token.strip()
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"sweep values must be numeric, got {token!r}") from None


def _cmd_sweep(args) -> int:
    base = _load_config(args.config).to_dict()
    values = [_parse_value(tok) for tok in args.values.split(",") if tok.strip()]
    if not values:
        raise ConfigError("--values must list at least one number")
    if args.trials < 1:
        raise ConfigError("--trials must be at least 1")
    rows: list[dict] = []
    for value in values:
        raw = json.loads(json.dumps(base))  # deep copy
        _set_by_path(raw, args.param, value)
        config = ProtocolConfig.from_dict(raw)
        campaign = run_campaign(config, args.trials)
        rows.append(
            {
                "param": value,
                "abort_rate": campaign.abort_rate,
                "mean_error": campaign.mean_error,
                "recovery_rate": campaign.recovery_rate,
                "mean_fidelity": campaign.mean_fidelity,
                "eta_q": campaign.mean_eta_q,
                "eta_t": campaign.mean_eta_t,
            }
        )

    if args.format == "csv":
        import io

        buffer = io.StringIO()
        writer = csv.writer(buffer)
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            writer.writerow(
                ["" if row[col] is None else row[col] for col in SWEEP_COLUMNS]
            )
        _write_text(args.out, buffer.getvalue().rstrip("\n"))
    else:
        _write_text(args.out, json.dumps({"param": args.param, "rows": rows}, indent=2))
    if not args.no_figures:
        from .figures import sweep_figure

        sweep_figure(args.param, rows, _figure_path(args.out, "_sweep"))
    print(f"swept {args.param} over {len(values)} values x {args.trials} trials")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify-table":
            return _cmd_verify_table(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
