"""Walk through a few identities: exact agreement, simulation, and impostors.

Run with ``python3 demos/identity_tour.py``.
"""

from __future__ import annotations

import math

from logipareto import distributions as D
from logipareto.identities import MCSettings, get_identity, verify_identity


def show(rep, label: str) -> None:
    mc = "" if rep.mc_two_sample_distance is None else (
        f", simulated distance {rep.mc_two_sample_distance:.4f} (bound {rep.mc_threshold:.4f})"
    )
    print(f"  {label:<42} sup |F_lhs - F_rhs| = {rep.sup_cdf_distance:.2e}{mc} -> {rep.verdict}")


def main() -> None:
    print("Adding a scaled exponential to a logistic order statistic lowers its index:")
    rec = get_identity("L8i")
    print(f"  {rec.formula}  ({rec.constraint_text})")
    for params in [(1, None, 2), (2, None, 4), (3, None, 5)]:
        rep = verify_identity(rec, params, mc=MCSettings(50_000, seed=1))
        show(rep, f"logistic, (k, n) = ({params[0]}, {params[2]})")

    print("\nThe same check under look-alike laws with the logistic variance:")
    sigma = math.pi / math.sqrt(3)
    for base in [D.Normal(0.0, sigma), D.Logistic(2.0, 1.0)]:
        rep = verify_identity(rec, (1, None, 2), base)
        show(rep, base.label())

    print("\nMultiplicative analogue for the Pareto II law:")
    rec = get_identity("L7ii")
    print(f"  {rec.formula}")
    for base in [D.ParetoII(1.0, 1.0), D.ParetoII(3.0, 1.0), D.ParetoII(1.0, 2.0), D.Exponential(1.0)]:
        show(verify_identity(rec, (1, None, 3), base), base.label())

    print("\nBeta-scaling forms:")
    for rid in ("PBmax", "PBmin"):
        rec = get_identity(rid)
        worst = max(verify_identity(rec, p).sup_cdf_distance for p in rec.instances(5))
        print(f"  {rid:<6} {rec.formula:<45} worst over n <= 5: {worst:.2e}")


if __name__ == "__main__":
    main()
