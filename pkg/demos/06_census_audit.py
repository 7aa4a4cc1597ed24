"""Audit the bundled census income table with the shipped configurations.

By default this runs a single seed (about 20 seconds) so the output can be
inspected quickly. Pass --full for the shipped ten-seed run behind the
headline numbers; expect a few minutes. The same thing is available from
the command line:

    fairaudit audit --config configs/adult_fliponly.json --report report.json
"""

import argparse
import tempfile
from dataclasses import replace
from pathlib import Path

from fairaudit.audit import AuditConfig, run_audit

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="adult_fliponly",
                    choices=["adult_fliponly", "adult_default", "adult_neighbor"])
    ap.add_argument("--full", action="store_true",
                    help="run all ten shipped seeds instead of just seed 0")
    args = ap.parse_args()

    config = AuditConfig.from_json(CONFIG_DIR / f"{args.config}.json")
    if not args.full:
        config = replace(config, seeds=(0,))
    print(f"{args.config}: seeds {list(config.seeds)}, k={config.k}, "
          f"flag mode {config.flag_mode}")

    report = run_audit(config, progress=print)

    print(f"\nrows: {report.dataset['n_rows']} "
          f"({report.dataset['n_dropped_missing']} dropped for missing values)")
    print(f"encoded dimension: {report.dataset['encoded_dimension']}")
    agg = report.aggregate
    print(f"test accuracy:    mean {agg['test_accuracy_mean']:.4f}")
    print(f"flip rate:        mean {agg['flip_rate']['mean']:.4f}")
    print(f"flagged fraction: mean {agg['flagged_fraction']['mean']:.4f} "
          f"[{agg['flagged_fraction']['min']:.4f}, {agg['flagged_fraction']['max']:.4f}]")
    for rec in report.seeds:
        race = rec["metrics_pre"]["per_attribute"].get("race", {})
        sex = rec["metrics_pre"]["per_attribute"].get("sex", {})
        print(f"  seed {rec['seed']}: flagged {rec['flagged_fraction']:.4f}, "
              f"dp_diff race {race.get('dp_diff', float('nan')):.3f} "
              f"sex {sex.get('dp_diff', float('nan')):.3f}")

    out = Path(tempfile.mkdtemp(prefix="demo06_")) / "report.json"
    report.save(out)
    print(f"\nfull report written to {out}")


if __name__ == "__main__":
    main()
