"""Command-line front end.

Every subcommand reads a JSON config (``--config``); flags given on the
command line override the matching config keys.  A config is either a bare
family descriptor such as ``{"N": 2, "kind": "paper_example_2"}`` or an
object with a ``family`` descriptor and optional keys ``scaling``, ``k``,
``n``, ``z``, ``tol``, ``n_list``, ``lmax``, ``check_moments``, ``limits``.

Floats are written in shortest round-trip form; complex numbers use paired
``_re``/``_im`` columns in CSV and ``[re, im]`` pairs in JSON.  Exit codes:
0 success, 1 numerical failure, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics as asy
from . import markov as mk
from . import quadrature as qd
from . import spectral as sp
from . import suites
from .coefficients import (
    CoefficientFamily,
    LimitTriple,
    ScalingSequence,
    family_from_descriptor,
    limits,
    matrix_from_json,
    matrix_to_json,
    scaling_from_descriptor,
)
from .errors import BiorthoError, ConfigError
from .linalg import fro

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2
RATIO_CHECK_N = 300


def parse_complex(text) -> complex:
    """Parse "a+bi", "a", "bi" or a JSON number / [re, im] pair; both parts finite."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        z = complex(text)
    elif isinstance(text, (list, tuple)) and len(text) == 2:
        try:
            z = complex(float(text[0]), float(text[1]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad complex pair {text!r}") from exc
    elif isinstance(text, str):
        s = text.strip().replace(" ", "")
        if s.endswith("i"):
            s = s[:-1] + "j"
            if s in ("j", "+j", "-j"):
                s = s.replace("j", "1j")
        try:
            z = complex(s)
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex number {text!r}; expected a+bi") from exc
    else:
        raise ConfigError(f"cannot parse complex number {text!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ConfigError(f"complex number {text!r} is not finite")
    return z


def fmt(v: float) -> str:
    return repr(float(v))


def _pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


# -- config --------------------------------------------------------------------


@dataclass
class RunConfig:
    family: CoefficientFamily
    scaling: ScalingSequence | None
    params: dict = field(default_factory=dict)
    scaling_explicit: bool = False

    def resolved(self, command: str) -> dict:
        """JSON-ready description of everything the run depended on."""
        out = {"command": command, "family": self.family.describe()}
        out["scaling"] = self.scaling.describe() if self.scaling is not None else None
        for key in sorted(self.params):
            v = self.params[key]
            if isinstance(v, complex):
                v = _pair(v)
            elif isinstance(v, LimitTriple):
                v = {name: matrix_to_json(getattr(v, name)) for name in "ABC"}
            out[key] = v
        return out


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if "kind" in raw:
        raw = {"family": raw}
    return raw


def _positive(name: str, v, kind=float):
    try:
        v = kind(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number, got {v!r}") from exc
    if not v > 0 or (kind is float and not math.isfinite(v)):
        raise ConfigError(f"{name} must be > 0, got {v!r}")
    return v


def _nonneg_int(name: str, v) -> int:
    try:
        iv = int(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be an integer, got {v!r}") from exc
    if iv < 0:
        raise ConfigError(f"{name} must be a non-negative integer, got {v!r}")
    return iv


def _n_list(v) -> list[int]:
    if isinstance(v, str):
        v = [s for s in v.split(",") if s.strip()]
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError("n_list must be a non-empty list")
    out = [_positive("n_list entry", x, int) for x in v]
    return sorted(set(out))


def resolve(raw: dict, overrides: dict) -> RunConfig:
    """Merge flags over the config file and validate."""
    merged = dict(raw)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if "family" not in merged:
        raise ConfigError("config has no family descriptor")
    if not isinstance(merged["family"], dict):
        raise ConfigError("family must be a JSON object")
    family = family_from_descriptor(merged["family"])
    if merged.get("scaling") is None and "D" in merged["family"]:
        merged["scaling"] = {"kind": "custom_table", "D": merged["family"]["D"]}
    explicit = merged.get("scaling") is not None
    seq = scaling_from_descriptor(merged.get("scaling"), family)
    params: dict = {}
    if "n" in merged:
        params["n"] = _positive("n", merged["n"], int)
    if "k" in merged and merged["k"] is not None:
        params["k"] = _positive("k", merged["k"], int)
    if "z" in merged:
        params["z"] = parse_complex(merged["z"])
    if "tol" in merged:
        params["tol"] = _positive("tol", merged["tol"])
    if "n_list" in merged:
        params["n_list"] = _n_list(merged["n_list"])
    if "lmax" in merged:
        params["lmax"] = _nonneg_int("lmax", merged["lmax"])
    if "check_moments" in merged:
        params["check_moments"] = _nonneg_int("check_moments", merged["check_moments"])
    if "limits" in merged:
        lim = merged["limits"]
        try:
            params["limits"] = LimitTriple.from_matrices(*(matrix_from_json(lim[x], family.dim) for x in "ABC"))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"limits needs A, B, C: {exc}") from exc
    return RunConfig(family, seq, params, explicit)


def _require(cfg: RunConfig, key: str):
    if key not in cfg.params:
        raise ConfigError(f"missing required parameter {key!r}")
    return cfg.params[key]


def _scaled(cfg: RunConfig, n: int):
    """(scaling, k) for zeros/quad/moments: only an explicit config scaling applies."""
    if not cfg.scaling_explicit or cfg.scaling.kind == "identity":
        return None, None
    return cfg.scaling, cfg.params.get("k", n)


# -- output helpers ------------------------------------------------------------


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _matrix_cols(prefix: str, dim: int) -> list[str]:
    return [f"{prefix}_{i}{j}_{part}" for i in range(dim) for j in range(dim) for part in ("re", "im")]


def _matrix_vals(m: np.ndarray) -> list[str]:
    return [fmt(p) for v in np.asarray(m).ravel() for p in (v.real, v.imag)]


def _csv(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(r) + "\n")
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


# -- subcommands ---------------------------------------------------------------


def cmd_zeros(cfg: RunConfig, args) -> int:
    n = _require(cfg, "n")
    seq, k = _scaled(cfg, n)
    zs = sp.zeros(cfg.family, n, seq, k)
    rows = [[fmt(x.real), fmt(x.imag), str(m)] for x, m in zip(zs.nodes, zs.multiplicities)]
    _emit(_csv(["node_re", "node_im", "multiplicity"], rows), args.out)
    return EXIT_OK


def cmd_quad(cfg: RunConfig, args) -> int:
    n = _require(cfg, "n")
    seq, k = _scaled(cfg, n)
    l_max = cfg.params.get("check_moments", 2 * n - 1)
    rq = qd.rule(cfg.family, n, seq, k)
    if args.out is not None:
        Path(args.out).write_text(qd.rule_csv(rq))
    oracle = sp.moments(cfg.family, l_max, seq, k)
    table = qd.exactness_errors(rq, oracle)
    rows, bad = [], []
    for l, el, er in table:
        claimed = l <= 2 * n - 1
        ok = not claimed or max(el, er) <= suites.EXACT_TOL
        if not ok:
            bad.append(l)
        rows.append([str(l), fmt(el), fmt(er), str(claimed).lower(), str(ok).lower()])
    sys.stdout.write(_csv(["l", "left_rel_error", "right_rel_error", "claimed_exact", "pass"], rows))
    if bad:
        print(f"error: exactness fails above {suites.EXACT_TOL:g} at l = {bad}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_moments(cfg: RunConfig, args) -> int:
    l_max = _require(cfg, "lmax")
    seq, k = _scaled(cfg, cfg.params.get("n", 1))
    ms = sp.moments(cfg.family, l_max, seq, k)
    rows = [[str(l)] + _matrix_vals(m) for l, m in enumerate(ms)]
    _emit(_csv(["l"] + _matrix_cols("m", cfg.family.dim), rows), args.out)
    return EXIT_OK


def _limit(cfg: RunConfig) -> LimitTriple:
    if "limits" in cfg.params:
        return cfg.params["limits"]
    return limits(cfg.family, cfg.scaling)


def cmd_markov(cfg: RunConfig, args) -> int:
    z = _require(cfg, "z")
    tol = cfg.params.get("tol", 1e-12)
    lim = _limit(cfg)
    res = mk.markov_fixed_point(lim.A, lim.B, lim.C, z, tol=tol)
    out = cfg.resolved("markov")
    out["limits_used"] = {name: matrix_to_json(getattr(lim, name)) for name in "ABC"}
    out["result"] = {
        "z": _pair(z),
        "F": matrix_to_json(res.F),
        "residual": res.residual,
        "iterations": res.iterations,
    }
    if lim.singular_A:
        out["result"]["ratio_check"] = None
    else:
        Fr = mk.markov_ratio(lim.A, lim.B, lim.C, z, RATIO_CHECK_N)
        out["result"]["ratio_check"] = {"n": RATIO_CHECK_N, "F": matrix_to_json(Fr), "gap": fro(Fr - res.F)}
    _emit(_json(out), args.out)
    return EXIT_OK


def cmd_ratio(cfg: RunConfig, args) -> int:
    z = _require(cfg, "z")
    ns = cfg.params.get("n_list", [50, 100, 200, 400])
    rep = asy.report(cfg.family, cfg.scaling, z, ns, cfg.params.get("limits"))
    cols = ["n", "L_error", "R_error", "LR_gap", "eq_residual"]
    rows = [[str(r.n)] + [fmt(getattr(r, c)) for c in cols[1:]] for r in rep.rows]
    _emit(_csv(cols, rows), args.out)
    print(f"info: errors measured against {rep.reference_kind}", file=sys.stderr)
    for name, dist in rep.candidates.items():
        print(f"info: distance of L_{rep.rows[-1].n} to {name} = {fmt(dist)}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg: RunConfig | None, args) -> int:
    if cfg is None:
        targets = suites.builtin_targets()
    else:
        n_list = cfg.params.get("n_list")
        targets = [suites.Target(cfg.family.kind, cfg.family, cfg.scaling, cfg.params.get("z"), n_list and tuple(n_list))]
    checks = suites.run(args.suite, targets)
    text = suites.render(checks)
    _emit(text, args.out)
    if args.out is not None:
        sys.stdout.write(text)
    return EXIT_NUMERIC if any(c.status == "FAIL" for c in checks) else EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="biortho", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, config_required=True):
        sp_ = sub.add_parser(name, help=help_, description=help_)
        sp_.add_argument("--config", required=config_required, help="JSON config file")
        sp_.add_argument("--out", help="output path (default: standard output)")
        return sp_

    z = add("zeros", "Distinct zeros of the degree-n polynomial. CSV: node_re,node_im,multiplicity.")
    z.add_argument("--n", type=int)

    q = add(
        "quad",
        "Quadrature rule (to --out; CSV node_re,node_im,multiplicity,gamma_ij_re/im,gamma_tilde_ij_re/im) "
        "and exactness table on stdout (CSV l,left_rel_error,right_rel_error,claimed_exact,pass).",
    )
    q.add_argument("--n", type=int)
    q.add_argument("--check-moments", dest="check_moments", type=int, help="highest moment degree to check (default 2n-1)")

    m = add("moments", "Moments from the operator. CSV: l,m_ij_re,m_ij_im.")
    m.add_argument("--lmax", type=int)

    mk_ = add("markov", "Markov function of the limit triple by fixed point, cross-checked by a ratio. JSON.")
    mk_.add_argument("--z")
    mk_.add_argument("--tol", type=float)

    r = add("ratio", "Ratio convergence report. CSV: n,L_error,R_error,LR_gap,eq_residual.")
    r.add_argument("--z")
    r.add_argument("--n-list", dest="n_list")

    v = add("verify", "Run invariant suites; one PASS/FAIL/INFO line per item. Default: all builtin families.", False)
    v.add_argument("--suite", choices=("lo", "quad", "ratio", "all"), default="all")
    return p


_COMMANDS = {
    "zeros": cmd_zeros,
    "quad": cmd_quad,
    "moments": cmd_moments,
    "markov": cmd_markov,
    "ratio": cmd_ratio,
    "verify": cmd_verify,
}
_OVERRIDES = ("n", "check_moments", "lmax", "z", "tol", "n_list")


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify" and args.config is None:
            cfg = None
        else:
            overrides = {k: getattr(args, k) for k in _OVERRIDES if hasattr(args, k)}
            cfg = resolve(load_config(args.config), overrides)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BiorthoError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())
