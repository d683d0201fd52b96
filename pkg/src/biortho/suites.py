"""Invariant suites behind ``biortho verify``.

Each check yields a :class:`Check` with status PASS, FAIL or INFO.  INFO
lines carry diagnostics that are reported but never asserted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_genlaguerre

from . import asymptotics as asy
from . import markov as mk
from . import quadrature as qd
from . import spectral as sp
from .coefficients import CoefficientFamily, LimitTriple, ScalingSequence, builtin_families, limits, scaled_coeffs
from .errors import BiorthoError
from .linalg import eye, fro
from .recurrence import EvalRequest, evaluate

SEED = 0xC0FFEE
SUITES = ("lo", "quad", "ratio")

LO_TOL = 1e-8
LO_N_MAX = 10
LO_Z_COUNT = 5
EXACT_TOL = 1e-8
EXACT_N_MAX = 10
ZEROS_TOL = 1e-8
ZEROS_N_MAX = 12
# split double eigenvalues are averaged; nodes of the builtins are >= 0.6 apart
ZEROS_CLUSTER_TOL = 1e-3
GERSH_N_MAX = 50
RATIO_DECAY = 5.0
ROUNDING_FLOOR = 1e-12
SINGULAR_TOL = 1e-4
DMOM_N = (20, 40, 60, 80)
DMOM_L_MAX = 3


@dataclass(frozen=True)
class Check:
    status: str
    name: str
    family: str
    values: dict = field(default_factory=dict)

    def line(self) -> str:
        parts = [f"{self.status:<4}", self.name, f"family={self.family}"]
        parts += [f"{k}={_fmt(v)}" for k, v in self.values.items()]
        return " ".join(parts)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}i"
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    return str(v)


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


@dataclass(frozen=True)
class Target:
    """A family under test plus the parameters its suites use."""

    name: str
    family: CoefficientFamily
    scaling: ScalingSequence
    z: complex | None = None
    n_list: tuple | None = None

    @property
    def limit(self) -> LimitTriple:
        return limits(self.family, self.scaling)

    @property
    def ratio_z(self) -> complex:
        if self.z is not None:
            return self.z
        return 5.0 if self.family.kind == "laguerre_christoffel" else 30.0

    @property
    def ratio_n(self) -> tuple:
        if self.n_list is not None:
            return tuple(self.n_list)
        return (500, 1000, 2000) if self.limit.singular else (50, 100, 200, 400)


def builtin_targets() -> list[Target]:
    return [Target(name, fam, seq) for name, (fam, seq) in builtin_families().items()]


def lo_points(count: int = LO_Z_COUNT, seed: int = SEED) -> list[complex]:
    rng = np.random.default_rng(seed)
    re = rng.uniform(-10, 10, count)
    im = rng.uniform(-10, 10, count)
    return [complex(a, b) for a, b in zip(re, im)]


# -- lo ------------------------------------------------------------------------


def lo_suite(t: Target) -> list[Check]:
    return _guarded(t, [_lo_checks])


def _lo_checks(t: Target) -> list[Check]:
    zs = lo_points()
    worst = {"r0": 0.0, "r1": 0.0, "r2": 0.0}
    for n in range(LO_N_MAX + 1):
        for z in zs:
            r = asy.lo_verify(t.family, n, z)
            for key in worst:
                worst[key] = max(worst[key], getattr(r, key))
    common = {"n_max": LO_N_MAX, "z_count": len(zs), "seed": SEED}
    return [
        Check(_status(worst["r0"] <= LO_TOL), "lo.r0", t.name, {"max": worst["r0"], "tol": LO_TOL, **common}),
        Check(_status(worst["r2"] <= LO_TOL), "lo.r2", t.name, {"max": worst["r2"], "tol": LO_TOL, **common}),
        Check("INFO", "lo.r1", t.name, {"max": worst["r1"], "asserted": False}),
    ]


# -- quad ----------------------------------------------------------------------


def zeros_check(t: Target) -> Check:
    """J_n and J_n^T share their zeros (cluster means) with total multiplicity nN."""
    worst_mean = worst_raw = 0.0
    totals_ok = True
    for n in range(1, ZEROS_N_MAX + 1):
        a = sp.eigenvalues(t.family, n)
        b = sp.eigenvalues(t.family, n, transpose=True)
        za = sp.cluster(a, ZEROS_CLUSTER_TOL)
        zb = sp.cluster(b, ZEROS_CLUSTER_TOL)
        totals_ok &= za.total == zb.total == n * t.family.dim
        totals_ok &= za.multiplicities == zb.multiplicities
        # nearest node of equal multiplicity; sort order can swap near-equal real parts
        for x, m in zip(za.nodes, za.multiplicities):
            d = min((abs(x - y) for y, k in zip(zb.nodes, zb.multiplicities) if k == m), default=np.inf)
            worst_mean = max(worst_mean, d / max(1.0, abs(x)))
        raw = np.min(np.abs(a[:, None] - b[None, :]), axis=1) / np.maximum(1.0, np.abs(a))
        worst_raw = max(worst_raw, float(raw.max()))
    ok = totals_ok and worst_mean <= ZEROS_TOL
    vals = {"max_rel_gap": worst_mean, "tol": ZEROS_TOL, "multiplicity_ok": totals_ok, "raw_eig_gap": worst_raw}
    return Check(_status(ok), "quad.common_zeros", t.name, {"n_max": ZEROS_N_MAX, **vals})


def catalan_check() -> Check:
    fam = builtin_families()["chebyshev_scalar"][0]
    got = [m[0, 0] for m in sp.moments(fam, 8)]
    want = [1, 0, 1, 0, 2, 0, 5, 0, 14]
    err = max(abs(g - w) for g, w in zip(got, want))
    return Check(_status(err <= 1e-10), "quad.scalar_moments", "chebyshev_scalar", {"max_abs_err": err, "tol": 1e-10})


def exactness_check(t: Target) -> Check:
    worst = 0.0
    first_bad = None
    for n in range(1, EXACT_N_MAX + 1):
        oracle = sp.moments(t.family, 2 * n - 1)
        rq = qd.rule(t.family, n)
        for l, el, er in qd.exactness_errors(rq, oracle):
            e = max(el, er)
            worst = max(worst, e)
            if e > EXACT_TOL and first_bad is None:
                first_bad = (n, l)
    vals = {"max_rel_err": worst, "tol": EXACT_TOL, "n_max": EXACT_N_MAX}
    if first_bad is not None:
        vals["first_failure_n_l"] = first_bad
    return Check(_status(first_bad is None), "quad.exactness", t.name, vals)


def gershgorin_check(t: Target) -> Check | None:
    seq = t.scaling
    if seq.kind == "identity" or not seq.increasing:
        return None
    radius = sp.gershgorin_bound(t.family, seq, GERSH_N_MAX)
    worst = 0.0
    for n in range(1, GERSH_N_MAX + 1):
        ev = sp.eigenvalues(t.family, n, seq, k=n)
        worst = max(worst, float(np.abs(ev).max()))
    return Check(_status(worst <= radius), "quad.gershgorin", t.name, {"max_abs_zero": worst, "radius": radius, "n_max": GERSH_N_MAX})


def _monic_laguerre(n: int, alpha: float, x: float) -> float:
    if n < 0:
        return 0.0
    return (-1) ** n * math.factorial(n) * float(eval_genlaguerre(n, alpha, x))


def laguerre_closed_form_check(t: Target) -> Check | None:
    """Distance of V_1, V_2 from the stated Laguerre closed forms (reported only).

    Both printed forms of the (1,2) entry are compared.  G_n is skipped: its
    closed form is not monic, unlike the recurrence output.
    """
    if t.family.kind != "laguerre_christoffel":
        return None
    a = t.family.alpha
    xs = (0.7, 2.3, 5.1)
    vals = {}
    for n in (1, 2):
        d_quot = d_sum = 0.0
        for x in xs:
            V = evaluate(EvalRequest(t.family, x, n))[0].value()
            p = _monic_laguerre(n, a + 1, x)
            quot = (p - (a + n + 1) / (a + 1) * _monic_laguerre(n, a, x)) / x
            alt = -n / (a + 1) * _monic_laguerre(n - 1, a + 2, x)
            for off, which in ((quot, "quot"), (alt, "sum")):
                ref = np.array([[p, off], [0.0, p]])
                d = fro(V - ref) / max(1.0, fro(ref))
                if which == "quot":
                    d_quot = max(d_quot, d)
                else:
                    d_sum = max(d_sum, d)
        vals[f"V{n}_rel_dist"] = [d_quot, d_sum]
    return Check("INFO", "quad.laguerre_closed_form", t.name, {**vals, "x": list(xs), "asserted": False})


def quad_suite(t: Target) -> list[Check]:
    return _guarded(t, [zeros_check, exactness_check, gershgorin_check, laguerre_closed_form_check])


# -- ratio ---------------------------------------------------------------------


def markov_check() -> list[Check]:
    one = np.ones((1, 1))
    fp = mk.markov_fixed_point(one, 0 * one, one, 3.0)
    exact = 0.3819660113
    err = abs(fp.F[0, 0] - exact)
    gap = abs(fp.F[0, 0] - mk.markov_ratio(one, 0 * one, one, 3.0, 300)[0, 0])
    return [
        Check(_status(err <= 1e-10), "ratio.markov_closed_form", "chebyshev_scalar", {"abs_err": err, "tol": 1e-10}),
        Check(_status(gap <= 1e-6), "ratio.markov_vs_ratio", "chebyshev_scalar", {"abs_gap": gap, "n": 300, "tol": 1e-6}),
    ]


def _decays(errs: list[float]) -> tuple[bool, float]:
    first, last = errs[0], errs[-1]
    factor = first / last if last > 0 else float("inf")
    return (factor >= RATIO_DECAY or last <= ROUNDING_FLOOR), factor


def regular_ratio_check(t: Target, lim: LimitTriple | None = None, label: str = "ratio.limit") -> Check:
    rep = asy.report(t.family, t.scaling, t.ratio_z, t.ratio_n, lim)
    L, R = rep.column("L_error"), rep.column("R_error")
    okL, fL = _decays(L)
    okR, fR = _decays(R)
    gap = rep.rows[-1].LR_gap
    ok_gap = gap <= max(L[-1], R[-1], ROUNDING_FLOOR)
    vals = {
        "z": t.ratio_z,
        "n": list(t.ratio_n),
        "L_error": L,
        "R_error": R,
        "L_factor": fL,
        "R_factor": fR,
        "LR_gap_last": gap,
        "min_factor": RATIO_DECAY,
    }
    return Check(_status(okL and okR and ok_gap), label, t.name, vals)


def singular_ratio_checks(t: Target) -> list[Check]:
    rep = asy.report(t.family, t.scaling, t.ratio_z, t.ratio_n)
    res = rep.column("eq_residual")
    decreasing = all(b < a for a, b in zip(res, res[1:]))
    ok = decreasing and res[-1] <= SINGULAR_TOL
    out = [
        Check(
            _status(ok),
            "ratio.singular_residual",
            t.name,
            {"z": t.ratio_z, "n": list(t.ratio_n), "residual": res, "decreasing": decreasing, "tol": SINGULAR_TOL},
        )
    ]
    for name, dist in rep.candidates.items():
        out.append(Check("INFO", f"ratio.candidate.{name}", t.name, {"n": t.ratio_n[-1], "distance": dist}))
    return out


def probed_limit(family: CoefficientFamily, seq: ScalingSequence, n: int = 10**6) -> LimitTriple:
    """Limit triple read off the scaled coefficients at a large index (error O(1/n))."""
    return LimitTriple.from_matrices(*scaled_coeffs(family, seq, n, n))


def ex2_diagnostics(t: Target) -> list[Check]:
    """Where the literal example-2 family actually converges, plus the C22 = n^2 variant."""
    from .coefficients import paper_example_2

    out = []
    lim = probed_limit(t.family, t.scaling)
    c = regular_ratio_check(t, lim, "ratio.limit_of_own_coefficients")
    out.append(Check("INFO", c.name, c.family, {**c.values, "C_limit": [lim.C[0, 0].real, lim.C[1, 1].real], "would_pass": c.status == "PASS"}))
    if getattr(t.family, "c22_exponent", 1) == 1:
        alt = Target(t.name + "[c22=n^2]", paper_example_2(2), t.scaling, t.z, t.n_list)
        c = regular_ratio_check(alt)
        out.append(Check("INFO", "ratio.limit", alt.name, {**c.values, "would_pass": c.status == "PASS"}))
    return out


def dmoments_check(t: Target) -> Check | None:
    if t.scaling.kind == "identity":
        return None
    lim = t.limit
    l_max = 0 if lim.singular_A else DMOM_L_MAX
    N = t.family.dim
    table = {}
    for n in DMOM_N:
        mus = qd.discrete_moments(t.family, t.scaling, n, l_max)
        table[n] = [fro(m - (eye(N) if l == 0 else 0)) for l, m in enumerate(mus)]
    lo, hi = table[DMOM_N[0]], table[DMOM_N[-1]]
    l0_ok = all(row[0] <= 1e-8 for row in table.values())
    dec_ok = all(hi[l] < lo[l] for l in range(1, l_max + 1))
    vals = {"l_max": l_max, f"dev_n{DMOM_N[0]}": lo, f"dev_n{DMOM_N[-1]}": hi, "l0_max_dev": max(r[0] for r in table.values())}
    return Check(_status(l0_ok and dec_ok), "ratio.discrete_moments", t.name, vals)


def ratio_suite(t: Target) -> list[Check]:
    if t.limit.singular:
        checks = [singular_ratio_checks]
    else:
        checks = [regular_ratio_check]
        if t.family.kind == "paper_example_2":
            checks.append(ex2_diagnostics)
    return _guarded(t, checks + [dmoments_check])


def _guarded(t: Target, checks) -> list[Check]:
    """Run each check; a library error becomes a FAIL line for that check only."""
    out: list[Check] = []
    for fn in checks:
        try:
            res = fn(t)
        except BiorthoError as exc:
            res = Check("FAIL", fn.__name__, t.name, {"error": type(exc).__name__, "message": str(exc)})
        if isinstance(res, Check):
            out.append(res)
        elif res:
            out += res
    return out


# -- driver --------------------------------------------------------------------


_RUNNERS = {"lo": lo_suite, "quad": quad_suite, "ratio": ratio_suite}


def run(suite: str, targets: list[Target]) -> list[Check]:
    """Run one suite (or "all") over the targets, in a fixed order."""
    names = SUITES if suite == "all" else (suite,)
    out: list[Check] = []
    for s in names:
        if s == "quad":
            out.append(catalan_check())
        if s == "ratio":
            out += markov_check()
        for t in targets:
            try:
                out += _RUNNERS[s](t)
            except BiorthoError as exc:
                out.append(Check("FAIL", f"{s}.error", t.name, {"error": type(exc).__name__, "message": str(exc)}))
    return out


def render(checks: list[Check]) -> str:
    n_fail = sum(c.status == "FAIL" for c in checks)
    n_pass = sum(c.status == "PASS" for c in checks)
    lines = [c.line() for c in checks]
    lines.append(f"SUMMARY pass={n_pass} fail={n_fail}")
    return "\n".join(lines) + "\n"
