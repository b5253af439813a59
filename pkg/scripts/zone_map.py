"""Map the rate-excluding barrier family over the (p, tau) plane.

For each grid point the zone (1-5) is classified and one family member
t*V_tau + mu*V_0 is verified with the zone's sign of mu; boundary lines are
reported as such.  Equivalent to `fraclap sweep` but convenient for notebook
use and custom grids.
"""

import argparse
from pathlib import Path

import numpy as np

from fraclap.barriers import classify_zone6, make_nonexistence_family
from fraclap.errors import AmbiguousRegimeError, DomainError, VerificationError
from fraclap.exponents import ProblemParams, find_tau0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--p-min", type=float, default=1.2)
    ap.add_argument("--p-max", type=float, default=4.0)
    ap.add_argument("--p-step", type=float, default=0.1)
    ap.add_argument("--tau-min", type=float, default=-0.9)
    ap.add_argument("--tau-max", type=float, default=-0.1)
    ap.add_argument("--tau-step", type=float, default=0.1)
    ap.add_argument("--t", type=float, default=1.0)
    ap.add_argument("--out", default="zone-map.csv")
    args = ap.parse_args()

    kc = find_tau0(args.alpha)
    ps = np.round(np.arange(args.p_min, args.p_max + 1e-12, args.p_step), 12)
    taus = np.round(np.arange(args.tau_min, args.tau_max + 1e-12, args.tau_step), 12)
    print(f"alpha={args.alpha}: tau0={kc.tau0:.6f}, p*={kc.p_star:.6f}")

    lines = ["p,tau,zone,role,mu,passed,note"]
    for p in map(float, ps):
        for tau in map(float, taus):
            try:
                zone, role = classify_zone6(float(p), float(tau), kc)
            except (DomainError, AmbiguousRegimeError) as exc:
                lines.append(f"{p!r},{tau!r},boundary,,nan,False,\"{exc}\"")
                continue
            try:
                fam, rep = make_nonexistence_family(
                    ProblemParams(args.alpha, float(p)), kc, args.t, float(tau)
                )
                lines.append(
                    f"{p!r},{tau!r},zone{zone},{role},{fam.terms[1][0]!r},{rep.passed},"
                )
            except VerificationError as exc:
                lines.append(f"{p!r},{tau!r},zone{zone},{role},nan,False,\"{exc}\"")
    Path(args.out).write_text("\n".join(lines) + "\n")
    n_ok = sum("True" in ln for ln in lines)
    print(f"{len(lines) - 1} points ({n_ok} verified) -> {args.out}")


if __name__ == "__main__":
    main()
