"""Command-line entry points.

Subcommands: audit (multi-seed run + report file), explain (one row,
Table-style text or JSON), metrics (summarize a report), propose (relabel
proposal for one row), serve (HTTP review API).

Exit codes: 0 success, 1 data/runtime errors, 2 usage or configuration
errors. The default config path can also come from the FAIRAUDIT_CONFIG
environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import replace

from ._version import __version__
from .audit import AuditConfig, AuditReport, parse_seed_list, run_audit
from .errors import ConfigError, FairauditError, InvalidArgumentError, NotFoundError
from .explain import FLAG_MODES, Explainer, render_explanation_text
from .mitigation import propose_relabel
from .model import train_logistic
from .neighbors import METRICS, DistanceSpec
from .pipeline import encode, load_csv, split
from .schema import load_schema

CONFIG_ENV = "FAIRAUDIT_CONFIG"

METRIC_LABELS = (
    ("dp_diff", "demographic parity"),
    ("eq_opp_diff", "equal opportunity"),
    ("eq_acc_diff", "equal accuracy"),
    ("eq_odds_diff", "equalized odds"),
    ("selection_rate_diff", "selection rate"),
)


def _seed_spec(text: str) -> list[int]:
    try:
        seeds = parse_seed_list(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse seed list {text!r}") from None
    if not seeds:
        raise argparse.ArgumentTypeError("seed list is empty")
    return seeds


def _config_path(args) -> str:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    if not path:
        raise ConfigError(f"no config file given (use --config or ${CONFIG_ENV})")
    return path


def _load_config(args) -> AuditConfig:
    config = AuditConfig.from_json(_config_path(args))
    overrides = {}
    if getattr(args, "seeds", None) is not None:
        overrides["seeds"] = tuple(args.seeds)
    if getattr(args, "k", None) is not None:
        overrides["k"] = args.k
    if getattr(args, "bins", None) is not None:
        overrides["bins"] = args.bins
    if getattr(args, "flag_mode", None) is not None:
        overrides["flag_mode"] = args.flag_mode
    if getattr(args, "distance", None) is not None:
        overrides["distance"] = replace(config.distance, metric=args.distance)
    return replace(config, **overrides) if overrides else config


def _progress(msg: str) -> None:
    print(f"[fairaudit] {msg}", file=sys.stderr, flush=True)


def _fmt(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


def _attr_means(report: AuditReport) -> dict:
    """Mean per-attribute metric values across seeds, pre and post."""
    out: dict = {}
    for which in ("metrics_pre", "metrics_post"):
        for rec in report.seeds:
            for attr, vals in rec[which].get("per_attribute", {}).items():
                slot = out.setdefault(attr, {}).setdefault(which, {})
                for key, _ in METRIC_LABELS:
                    slot.setdefault(key, []).append(vals[key])
    means: dict = {}
    for attr, sides in out.items():
        means[attr] = {}
        for which, vals in sides.items():
            means[attr][which] = {k: math.fsum(v) / len(v) for k, v in vals.items()}
    return means


def render_summary_text(report: AuditReport) -> str:
    agg = report.aggregate
    ds = report.dataset
    lines = [
        f"audit of {ds['csv_path']}: {ds['n_rows']} rows "
        f"({ds['n_dropped_missing']} dropped for missing values), "
        f"{len(report.seeds)} seeds",
        "",
        f"flagged fraction   mean {_fmt(agg['flagged_fraction']['mean'])}   "
        f"min {_fmt(agg['flagged_fraction']['min'])}   max {_fmt(agg['flagged_fraction']['max'])}",
        f"flip rate          mean {_fmt(agg['flip_rate']['mean'])}   "
        f"min {_fmt(agg['flip_rate']['min'])}   max {_fmt(agg['flip_rate']['max'])}",
        f"  (set-to-privileged only: mean {_fmt(agg['flip_rate_to_privileged']['mean'])})",
        f"test accuracy      mean {_fmt(agg['test_accuracy_mean'])}",
        f"consistency        pre {_fmt(agg['consistency_pre_mean'])}   "
        f"post {_fmt(agg['consistency_post_mean'])}",
        "",
        "group metric differences, mean over seeds (pre -> post mitigation):",
    ]
    for attr, sides in sorted(_attr_means(report).items()):
        lines.append(f"  {attr}:")
        pre = sides.get("metrics_pre", {})
        post = sides.get("metrics_post", {})
        for key, label in METRIC_LABELS:
            lines.append(
                f"    {label:<20} {_fmt(pre.get(key))} -> {_fmt(post.get(key))}"
            )
    errors = {}
    for rec in report.seeds:
        for attr, msg in rec["metrics_pre"].get("errors", {}).items():
            errors.setdefault(attr, msg)
    for attr, msg in sorted(errors.items()):
        lines.append(f"  note: {attr}: {msg}")
    return "\n".join(lines) + "\n"


SUMMARY_CSV_FIELDS = (
    "seed", "n_train", "test_size", "n_negative_predictions", "flagged_count",
    "flagged_fraction", "flip_changed_count", "flip_rate", "flip_rate_to_privileged",
    "proposal_change_count", "train_accuracy", "test_accuracy",
)


def render_summary_csv(report: AuditReport) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SUMMARY_CSV_FIELDS, extrasaction="ignore",
                       lineterminator="\n")
    w.writeheader()
    for rec in report.seeds:
        w.writerow(rec)
    return buf.getvalue()


def cmd_audit(args) -> int:
    config = _load_config(args)
    progress = None if args.quiet else _progress
    report = run_audit(config, progress=progress)
    timestamp = args.timestamp if args.timestamp else None
    report.save(args.output, timestamp=timestamp)
    if not args.quiet:
        _progress(f"report written to {args.output}")
    if args.csv_summary:
        with open(args.csv_summary, "w", encoding="utf-8") as f:
            f.write(render_summary_csv(report))
    if args.format == "json":
        print(json.dumps({"aggregate": report.aggregate, "dataset": report.dataset},
                         indent=2, sort_keys=True))
    elif args.format == "csv":
        print(render_summary_csv(report), end="")
    else:
        print(render_summary_text(report), end="")
    return 0


def _build_seed_model(config: AuditConfig, seed: int):
    schema = load_schema(config.schema_path)
    table = load_csv(config.csv_path, schema)
    dataset = encode(table, bins=config.bins)
    sp = split(dataset, seed)
    from .audit import build_model

    model = build_model(config, dataset, sp.train)
    return table, dataset, sp, model


def cmd_explain(args) -> int:
    config = _load_config(args)
    if args.report:
        # reuse the audited model so output matches the report's records
        from .service import build_session

        session = build_session(args.report)
        table, dataset = session.table, session.dataset
        explainer = session.explainer
    else:
        seed = args.seed if args.seed is not None else config.seeds[0]
        table, dataset, sp, model = _build_seed_model(config, seed)
        explainer = Explainer(dataset, sp.train, model, config.explain_config(), table=table)

    if not 0 <= args.row < dataset.n:
        raise NotFoundError(f"no row with index {args.row} (dataset has {dataset.n} rows)")
    expl = explainer.explain(dataset.matrix[args.row], query_index=args.row)
    if args.format == "json":
        print(json.dumps(expl.to_dict(), indent=2, sort_keys=True))
    else:
        print(render_explanation_text(expl), end="")
    return 0


def cmd_metrics(args) -> int:
    report = AuditReport.load(args.report)
    if args.format == "json":
        doc = {
            "aggregate": report.aggregate,
            "per_seed": [
                {"seed": r["seed"], "metrics_pre": r["metrics_pre"],
                 "metrics_post": r["metrics_post"]}
                for r in report.seeds
            ],
        }
        print(json.dumps(doc, indent=2, sort_keys=True))
    elif args.format == "csv":
        print(render_summary_csv(report), end="")
    else:
        print(render_summary_text(report), end="")
    return 0


def cmd_propose(args) -> int:
    config = _load_config(args)
    seed = args.seed if args.seed is not None else config.seeds[0]
    table, dataset, sp, model = _build_seed_model(config, seed)
    if not 0 <= args.row < dataset.n:
        raise NotFoundError(f"no row with index {args.row} (dataset has {dataset.n} rows)")
    query = dataset.matrix[args.row]
    current = int(model.predict(query[None, :])[0])
    proposal = propose_relabel(
        query, dataset.matrix[sp.train], dataset.labels[sp.train], config.k,
        config.distance, current_prediction=current, query_index=args.row,
        positives_only=args.positives_only,
    )
    if args.format == "json":
        print(json.dumps(proposal.to_dict(), indent=2, sort_keys=True))
    else:
        tally = proposal.vote_tally
        print(f"row {args.row}: current prediction {proposal.current_prediction}, "
              f"proposed {proposal.proposed_prediction} "
              f"(votes {tally['positive']} positive / {tally['negative']} negative, "
              f"k={proposal.source_k})")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.report, args.ledger)
    if args.static:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=args.static, html=True), name="console")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except OSError as e:
        print(f"fairaudit: cannot bind {args.host}:{args.port}: {e}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairaudit",
        description="Fairness auditing for binary classifiers: explanations, "
                    "protected-attribute flip tests, group metrics, relabel review.",
    )
    parser.add_argument("--version", action="version", version=f"fairaudit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help=f"audit config JSON (default: ${CONFIG_ENV})")

    def add_overrides(p):
        p.add_argument("--seeds", type=_seed_spec, default=None,
                       help="seed list, e.g. 0..9 or 0,3,7")
        p.add_argument("--k", type=int, default=None, help="neighbor count override")
        p.add_argument("--bins", type=int, default=None, help="numeric bin count override")
        p.add_argument("--flag-mode", choices=FLAG_MODES, default=None)
        p.add_argument("--distance", choices=METRICS, default=None)

    p = sub.add_parser("audit", help="run the multi-seed audit and write a report")
    add_config(p)
    add_overrides(p)
    p.add_argument("--output", "-o", default="report.json", help="report file path")
    p.add_argument("--csv-summary", default=None, help="also write per-seed CSV rows here")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--timestamp", default=None,
                   help="embed this creation timestamp in the report (omitted by default "
                        "so identical configs produce identical bytes)")
    p.add_argument("--quiet", "-q", action="store_true", help="suppress progress output")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("explain", help="explain one row against a seed's trained model")
    add_config(p)
    add_overrides(p)
    p.add_argument("--row", type=int, required=True, help="global row index")
    p.add_argument("--seed", type=int, default=None, help="split seed (default: first in config)")
    p.add_argument("--report", default=None,
                   help="reuse the model stored in this report instead of retraining")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("metrics", help="summarize a written report")
    p.add_argument("--report", required=True, help="report JSON path")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("propose", help="relabel proposal for one row")
    add_config(p)
    add_overrides(p)
    p.add_argument("--row", type=int, required=True, help="global row index")
    p.add_argument("--seed", type=int, default=None, help="split seed (default: first in config)")
    p.add_argument("--positives-only", action="store_true",
                   help="vote over positively labelled neighbors only")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_propose)

    p = sub.add_parser("serve", help="serve the HTTP review API over a report")
    p.add_argument("--report", required=True, help="report JSON path")
    p.add_argument("--ledger", default="decisions.jsonl", help="decision ledger path")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--static", default=None, help="also serve this directory at / (console build)")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidArgumentError) as e:
        print(f"fairaudit: {e}", file=sys.stderr)
        return 2
    except FairauditError as e:
        print(f"fairaudit: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
