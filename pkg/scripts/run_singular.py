"""Singular-limit (Laguerre) sweep: equation residual and candidate-limit distances per n."""
import argparse
import csv
from dataclasses import dataclass, field

from biortho import asymptotics as asy
from biortho import coefficients as co
from biortho.linalg import fro


@dataclass
class SingularConfig:
    alpha: float = 0.0
    z: complex = 5.0
    n_list: list[int] = field(default_factory=lambda: [250, 500, 1000, 2000, 4000])
    out: str = "singular.csv"


def run(cfg: SingularConfig) -> list[dict]:
    fam = co.laguerre_christoffel(cfg.alpha)
    seq = co.default_scaling(fam)
    lim = co.limits(fam, seq)
    rows = []
    for n in cfg.n_list:
        L = asy.left_ratio(fam, seq, n, cfg.z)
        row = {"n": n, "eq_residual": asy.singular_residual(lim, L, cfg.z)}
        for name, c in asy.candidate_limits(cfg.z, fam.dim).items():
            row[f"dist_{name}"] = fro(L - c)
        rows.append(row)
    with open(cfg.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows({k: repr(v) if isinstance(v, float) else v for k, v in r.items()} for r in rows)
    return rows


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--alpha", type=float, default=SingularConfig.alpha)
    p.add_argument("--z", type=complex, default=SingularConfig.z)
    p.add_argument("--n", type=int, nargs="+", default=None)
    p.add_argument("--out", default=SingularConfig.out)
    a = p.parse_args()
    cfg = SingularConfig(a.alpha, a.z, a.n or SingularConfig().n_list, a.out)
    for r in run(cfg):
        print("  ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}" for k, v in r.items()))
