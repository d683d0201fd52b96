"""Ratio-convergence sweep for one builtin family; writes a CSV report."""
import argparse
import csv
from dataclasses import dataclass, field

from biortho import asymptotics as asy
from biortho import coefficients as co


@dataclass
class RatioConfig:
    family: str = "paper_example_2"
    z: complex = 30.0
    n_list: list[int] = field(default_factory=lambda: [50, 100, 200, 400, 800])
    use_own_limit: bool = False  # compare against the probed limit of the scaled coefficients
    probe_n: int = 10**6
    out: str = "ratio.csv"


def run(cfg: RatioConfig) -> asy.ConvergenceReport:
    fam, seq = co.builtin_families()[cfg.family]
    lim = None
    if cfg.use_own_limit:
        lim = co.LimitTriple.from_matrices(*co.scaled_coeffs(fam, seq, cfg.probe_n, cfg.probe_n))
    rep = asy.report(fam, seq, cfg.z, cfg.n_list, lim)
    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "L_error", "R_error", "LR_gap", "eq_residual"])
        for r in rep.rows:
            w.writerow([r.n, repr(r.L_error), repr(r.R_error), repr(r.LR_gap), repr(r.eq_residual)])
    return rep


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--family", default=RatioConfig.family, choices=sorted(co.builtin_families()))
    p.add_argument("--z", type=complex, default=RatioConfig.z)
    p.add_argument("--n", type=int, nargs="+", default=None)
    p.add_argument("--own-limit", action="store_true")
    p.add_argument("--out", default=RatioConfig.out)
    a = p.parse_args()
    cfg = RatioConfig(a.family, a.z, a.n or RatioConfig().n_list, a.own_limit, out=a.out)
    rep = run(cfg)
    L = rep.column("L_error")
    print(f"{cfg.family} z={cfg.z} L_error {L[0]:.3e} -> {L[-1]:.3e} (factor {L[0] / L[-1]:.2f}); wrote {cfg.out}")
