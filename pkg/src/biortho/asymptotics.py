"""Finite-n ratio asymptotics, Liouville-Ostrogradski checks, singular-case residuals.

Ratios are formed in the normalized frame at scale index k = n, where the
blocks are D_n^{-1/2} X D_n^{-1/2}.  There

    L_n = P_{n-1} P_n^{-1} A~_{n-1}^{-1} = D^{1/2} V_{n-1} V_n^{-1} A_{n-1}^{-1} D^{1/2}
    R_n = C~_n^{-1} S_n^{-1} S_{n-1}     = D^{1/2} C_n^{-1} G_n^{-1} G_{n-1} D^{1/2}

with P_m = D^{1/2} V_m D^{-1/2} and S_m = D^{-1/2} G_m D^{1/2}, and both are
obtained from the ratio recursion without forming the polynomials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientFamily, LimitTriple, ScalingSequence, limits
from .linalg import eye, fro, mat_inv, solve, solve_right
from .markov import closed_form_scalar, equation_residual, markov_fixed_point
from .recurrence import make_frame, ratio_iterate, sweep


def _k(scaling: ScalingSequence | None, n: int) -> int | None:
    return None if scaling is None or scaling.kind == "identity" else n


def left_ratio(family: CoefficientFamily, scaling: ScalingSequence | None, n: int, z: complex) -> np.ndarray:
    """L_n(z) at scale index k = n (a fresh O(n) ratio sweep)."""
    if n < 1:
        raise ValueError("ratio needs n >= 1")
    k = _k(scaling, n)
    K = ratio_iterate(family, scaling, "left", k, n, z, normalized=True)[-1]
    a = make_frame(family, scaling, k, normalized=True).blocks(n - 1)[0]
    return solve_right(a, K)


def right_ratio(family: CoefficientFamily, scaling: ScalingSequence | None, n: int, z: complex) -> np.ndarray:
    """R_n(z) at scale index k = n, mirror of ``left_ratio``."""
    if n < 1:
        raise ValueError("ratio needs n >= 1")
    k = _k(scaling, n)
    K = ratio_iterate(family, scaling, "right", k, n, z, normalized=True)[-1]
    c = make_frame(family, scaling, k, normalized=True).blocks(n)[2]
    return solve(c, K)


# -- Liouville-Ostrogradski ---------------------------------------------------


def _relative(terms: list[tuple[np.ndarray, float]]) -> float:
    """||sum m_i exp(e_i)|| relative to the largest ||m_i exp(e_i)||, without overflow."""
    logs = [math.log(max(fro(m), 1e-300)) + e for m, e in terms]
    top = max(logs)
    e_ref = max(e for (m, e), lg in zip(terms, logs) if lg == top)
    total = sum(m * math.exp(e - e_ref) for m, e in terms)
    scale = max(fro(m) * math.exp(e - e_ref) for m, e in terms)
    return fro(total) / scale if scale > 0 else 0.0


def _pair(frame, z, deg, side):
    """(P_deg, associate of degree deg-1, exponent) on one side."""
    f = frame.transposed() if side == "right" else frame
    st = sweep(f, z, deg, associate=True)
    N = frame.dim
    x = st.cur[0]
    p, q = x[:, :N], x[:, N:]
    if side == "right":
        p, q = p.T, q.T
    return p, q, st.e


@dataclass(frozen=True)
class LOResiduals:
    r0: float
    r1: float
    r2: float


def lo_verify(family: CoefficientFamily, n: int, z: complex) -> LOResiduals:
    """Relative residuals of the associate identities at degree n (unscaled family).

    r0: V_n G^{(1)}_{n-1} - V^{(1)}_{n-1} G_n
    r2: V_n G^{(1)}_n - V^{(1)}_{n-1} G_{n+1} - C_{n+1}^{-1}
    r1: V_n G^{(1)}_n - V^{(1)}_{n+1} G_{n+1} - A_n^{-1}   (reported only)
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    frame = make_frame(family)
    V, Q, eV = _pair(frame, z, n, "left")
    G, Qt, eG = _pair(frame, z, n, "right")
    G1, Qt1, eG1 = _pair(frame, z, n + 1, "right")
    _, Q2, eV2 = _pair(frame, z, n + 2, "left")
    a_n = family.coeffs(n)[0]
    c_n1 = family.coeffs(n + 1)[2]
    r0 = _relative([(V @ Qt, eV + eG), (-(Q @ G), eV + eG)])
    r2 = _relative([(V @ Qt1, eV + eG1), (-(Q @ G1), eV + eG1), (-mat_inv(c_n1), 0.0)])
    r1 = _relative([(V @ Qt1, eV + eG1), (-(Q2 @ G1), eV2 + eG1), (-mat_inv(a_n), 0.0)])
    return LOResiduals(r0, r1, r2)


# -- singular case ------------------------------------------------------------


def singular_residual(lim: LimitTriple, F, z: complex) -> float:
    """||C F A F + (B - zI) F + I||_F."""
    return equation_residual(lim.A, lim.B, lim.C, F, z)


# -- reports -------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    n: int
    L_error: float
    R_error: float
    LR_gap: float
    eq_residual: float


@dataclass(frozen=True)
class ConvergenceReport:
    z: complex
    rows: tuple
    limit_used: LimitTriple
    F_reference: np.ndarray
    reference_kind: str  # "fixed_point" or "last_L"
    candidates: dict = field(default_factory=dict)  # name -> distance of the last L_n

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]


def candidate_limits(z: complex, dim: int) -> dict[str, np.ndarray]:
    """The two limits proposed for the singular Laguerre case."""
    return {
        "inv_z": eye(dim) / complex(z),
        "chebyshev_closed_form": closed_form_scalar(z) * eye(dim),
    }


def report(
    family: CoefficientFamily,
    scaling: ScalingSequence | None,
    z: complex,
    n_list,
    lim: LimitTriple | None = None,
) -> ConvergenceReport:
    """Errors of L_n, R_n against the limit Markov function for each n in n_list."""
    z = complex(z)
    ns = sorted(int(n) for n in n_list)
    lim = lim or limits(family, scaling)
    pairs = [(n, left_ratio(family, scaling, n, z), right_ratio(family, scaling, n, z)) for n in ns]
    if lim.singular:
        F = pairs[-1][1]
        kind = "last_L"
    else:
        F = markov_fixed_point(lim.A, lim.B, lim.C, z).F
        kind = "fixed_point"
    rows = tuple(
        ReportRow(n, fro(L - F), fro(R - F), fro(L - R), singular_residual(lim, L, z)) for n, L, R in pairs
    )
    cands = {}
    if lim.singular:
        last = pairs[-1][1]
        cands = {name: fro(last - c) for name, c in candidate_limits(z, family.dim).items()}
    return ConvergenceReport(z, rows, lim, F, kind, cands)
