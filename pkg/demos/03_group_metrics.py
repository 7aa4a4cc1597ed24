"""Group fairness metrics on a worked 8-row example.

Every number here can be checked by hand: four rows per group, confusion
counts small enough to eyeball. The report object shows how several
protected attributes are scored at once and how undefined rates are
surfaced instead of raised.
"""

from fairaudit.metrics import (
    compute_metric_report,
    demographic_parity_diff,
    equal_accuracy_diff,
    equal_odds_diff,
    equal_opportunity_diff,
    group_confusions,
    selection_rate_diff,
)

PRED = [1, 0, 1, 0, 1, 1, 1, 0]
TRUE = [1, 1, 0, 0, 1, 1, 0, 0]
SEX = [True, True, True, True, False, False, False, False]   # True = privileged


def main():
    priv, unpriv = group_confusions(PRED, TRUE, SEX)
    for c in (priv, unpriv):
        print(f"{c.group:>12}: tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn} "
              f"tpr={c.tpr:.2f} fpr={c.fpr:.2f} acc={c.accuracy:.2f} "
              f"sel={c.selection_rate:.2f}")

    print(f"\ndemographic parity diff: {demographic_parity_diff(priv, unpriv):.2f}")
    print(f"equal opportunity diff:  {equal_opportunity_diff(priv, unpriv):.2f}")
    print(f"equal accuracy diff:     {equal_accuracy_diff(priv, unpriv):.2f}")
    print(f"equalized odds diff:     {equal_odds_diff(priv, unpriv):.2f}")
    print(f"selection rate diff:     {selection_rate_diff(priv, unpriv):.2f}")

    # several attributes at once; the second one has no true positives in
    # its privileged group, so its TPR is undefined and lands in errors
    degenerate = [False, False, True, True, False, False, True, True]
    report = compute_metric_report(PRED, TRUE, {"sex": SEX, "odd_split": degenerate})
    print("\nattributes scored:", sorted(report.per_attribute))
    for attr, msg in report.errors.items():
        print(f"skipped {attr}: {msg}")


if __name__ == "__main__":
    main()
