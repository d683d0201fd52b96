"""Evaluation of V_n, G_n, their first-kind associates and derivatives.

All sweeps are forward three-term recursions.  Values are carried as a
mantissa matrix and a shared power-of-two exponent; rescaling by powers of
two is exact, so quotients of quantities from the same sweep carry no
rescaling error.

Right-sided families are handled by transposition: G_n^T satisfies a left
recurrence with blocks (C_{m+1}^T, B_m^T, A_{m-1}^T).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coefficients import CoefficientFamily, ScalingSequence
from .errors import (
    IllConditionedError,
    ScaleOverflowError,
    SingularCoefficientError,
    SingularIterateError,
    SingularMatrixError,
)
from .linalg import eye, solve

LN2 = math.log(2.0)
RENORM_HI = math.exp(10.0)
OVERFLOW_PER_DIM = 700.0

Blocks = Callable[[int], tuple]


@dataclass(frozen=True)
class ScaledValue:
    """The matrix ``m * exp(e)``."""

    m: np.ndarray
    e: float = 0.0

    def value(self) -> np.ndarray:
        return self.m * math.exp(self.e)

    def __matmul__(self, other: "ScaledValue") -> "ScaledValue":
        return ScaledValue(self.m @ other.m, self.e + other.e)


@dataclass(frozen=True)
class Frame:
    """Coefficient source for one sweep: blocks(m) and the matrix multiplying z."""

    blocks: Blocks
    H: np.ndarray
    dim: int

    def transposed(self) -> "Frame":
        dim = self.dim
        zero = np.zeros((dim, dim), dtype=np.complex128)

        def blocks(m):
            _, b, _ = self.blocks(m)
            c_next = self.blocks(m + 1)[2]
            a_prev = self.blocks(m - 1)[0] if m >= 1 else zero
            return c_next.T, b.T, a_prev.T

        return Frame(blocks, self.H.T, dim)


def make_frame(
    family: CoefficientFamily,
    scaling: ScalingSequence | None = None,
    k: int | None = None,
    normalized: bool = False,
) -> Frame:
    """Build the recurrence frame.

    Without scaling this is the plain family.  With ``scaling`` and scale
    index ``k``:

    * ``normalized=False`` gives the scaled polynomials V_n^{D_k} through
      ``z D_k V_n = A_n V_{n+1} + B_n V_n + C_n V_{n-1}``;
    * ``normalized=True`` uses the blocks ``D_k^{-1/2} X_n D_k^{-1/2}`` with
      z multiplying the identity.  Its polynomials are
      ``D_k^{1/2} V_n^{D_k} D_k^{-1/2}`` (same zeros, I at degree 0).
    """
    dim = family.dim
    if scaling is None or scaling.kind == "identity":
        return Frame(family.coeffs, eye(dim), dim)
    if k is None:
        raise ValueError("scale index k is required with a scaling sequence")
    if normalized:
        s = scaling.triple(k)[2]

        def blocks(m):
            a, b, c = family.coeffs(m)
            return s @ a @ s, s @ b @ s, s @ c @ s

        return Frame(blocks, eye(dim), dim)
    return Frame(family.coeffs, scaling.matrix(k), dim)


def _solve_block(a, rhs, what: str, exc=SingularCoefficientError):
    try:
        return solve(a, rhs)
    except (SingularMatrixError, IllConditionedError) as err:
        raise exc(f"{what}: {err}") from err


@dataclass
class SweepState:
    """X_n and X_{n-1} (lists over derivative order) with a shared exponent."""

    cur: list
    prev: list
    p2: int  # exponent in powers of two
    n: int

    @property
    def e(self) -> float:
        return self.p2 * LN2


def _renormalize(state: SweepState, guard: float) -> None:
    fro_s = max(float(np.linalg.norm(x)) for x in state.cur)
    if not np.isfinite(fro_s):
        raise ScaleOverflowError("non-finite value in recurrence sweep")
    if fro_s == 0.0 or 1.0 <= fro_s < RENORM_HI:
        return
    _, ex = math.frexp(fro_s)
    shift = ex - 1  # brings the norm into [1, 2)
    f = 2.0**-shift  # power of two: exact
    state.cur = [x * f for x in state.cur]
    state.prev = [x * f for x in state.prev]
    state.p2 += shift
    if abs(state.p2 * LN2) > guard:
        raise ScaleOverflowError(f"scale exponent {state.p2 * LN2:.1f} beyond guard {guard:.0f}")


def sweep(frame: Frame, z: complex, n: int, order: int = 0, associate: bool = False) -> SweepState:
    """Left sweep to degree ``n``.

    Each X is ``V`` (N x N) or, with ``associate``, ``[V | Q]`` (N x 2N)
    where ``Q_n = V^{(1)}_{n-1}`` is the second solution with ``Q_0 = 0``,
    ``Q_1 = A_0^{-1}``.  Derivatives in z up to ``order`` are propagated
    by differentiating the recursion:

        A_m X'_{m+1} = H X_m + (zH - B_m) X'_m - C_m X'_{m-1}
    """
    dim = frame.dim
    z = complex(z)
    width = 2 * dim if associate else dim
    zeros = np.zeros((dim, width), dtype=np.complex128)
    guard = OVERFLOW_PER_DIM * dim
    H = frame.H

    x0 = zeros.copy()
    x0[:, :dim] = eye(dim)
    if n == 0:
        return SweepState([x0] + [zeros] * order, [zeros] * (order + 1), 0, 0)

    a0, b0, _ = frame.blocks(0)
    inv_a0 = _solve_block(a0, eye(dim), "A_0")
    x1 = zeros.copy()
    x1[:, :dim] = inv_a0 @ (z * H - b0)
    if associate:
        x1[:, dim:] = inv_a0
    cur = [x1]
    if order >= 1:
        d1 = zeros.copy()
        d1[:, :dim] = inv_a0 @ H
        cur.append(d1)
    cur.extend(zeros for _ in range(order - 1))
    state = SweepState(cur, [x0] + [zeros] * order, 0, 1)

    for m in range(1, n):
        a, b, c = frame.blocks(m)
        zb = z * H - b
        rhs = []
        for d in range(order + 1):
            r = zb @ state.cur[d] - c @ state.prev[d]
            if d:
                r = r + d * (H @ state.cur[d - 1])
            rhs.append(r)
        out = _solve_block(a, np.hstack(rhs), f"A_{m}")
        state.prev = state.cur
        state.cur = [out[:, d * width:(d + 1) * width] for d in range(order + 1)]
        state.n = m + 1
        _renormalize(state, guard)
    _renormalize(state, guard)
    return state


def _split(x: np.ndarray, dim: int, side: str, part: int) -> np.ndarray:
    blk = x[:, part * dim:(part + 1) * dim]
    return blk.T if side == "right" else blk


@dataclass(frozen=True)
class EvalRequest:
    family: CoefficientFamily
    z: complex
    n: int
    side: str = "left"
    associate: bool = False
    derivative_order: int = 0
    scaling: ScalingSequence | None = None
    k: int | None = None
    normalized: bool = False

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise ValueError(f"side must be 'left' or 'right', got {self.side!r}")
        if not 0 <= self.derivative_order <= 2:
            raise ValueError("derivative_order must be 0, 1 or 2")
        if self.n < 0:
            raise ValueError("degree n must be >= 0")


def evaluate(req: EvalRequest) -> list[ScaledValue]:
    """Values of the requested polynomial for derivative orders 0..d.

    ``associate=True`` returns the first-kind associate of degree ``n``
    (``V^{(1)}_n`` or ``G^{(1)}_n``).  All orders share one exponent.
    """
    frame = make_frame(req.family, req.scaling, req.k, req.normalized)
    if req.side == "right":
        frame = frame.transposed()
    deg = req.n + 1 if req.associate else req.n
    st = sweep(frame, req.z, deg, req.derivative_order, associate=req.associate)
    part = 1 if req.associate else 0
    return [ScaledValue(_split(x, frame.dim, req.side, part), st.e) for x in st.cur]


@dataclass(frozen=True)
class NodeValues:
    """Everything the quadrature formulas need at one point, shared exponent."""

    P: np.ndarray  # degree-n polynomial
    dP: np.ndarray
    ddP: np.ndarray
    Q: np.ndarray  # associate of degree n-1
    P_prev: np.ndarray  # degree n-1 polynomial
    e: float


def node_values(frame: Frame, side: str, z: complex, n: int) -> NodeValues:
    f = frame.transposed() if side == "right" else frame
    st = sweep(f, z, n, order=2, associate=True)
    dim = frame.dim
    sp = lambda x, part: _split(x, dim, side, part)  # noqa: E731
    return NodeValues(
        sp(st.cur[0], 0), sp(st.cur[1], 0), sp(st.cur[2], 0), sp(st.cur[0], 1), sp(st.prev[0], 0), st.e
    )


def ratio_iterate(
    family: CoefficientFamily,
    scaling: ScalingSequence | None,
    side: str,
    k: int | None,
    n_max: int,
    z: complex,
    normalized: bool = False,
) -> list[np.ndarray]:
    """K_1..K_{n_max} without forming the polynomials.

    Left: K_m = V_{m-1} V_m^{-1}, by K_{m+1} = (zH - B_m - C_m K_m)^{-1} A_m.
    Right: K_m = G_m^{-1} G_{m-1}, by the transposed recursion.
    """
    frame = make_frame(family, scaling, k, normalized)
    return _ratio_sweep(frame, side, n_max, z)


def _ratio_sweep(frame: Frame, side: str, n_max: int, z: complex) -> list[np.ndarray]:
    if side == "right":
        frame = frame.transposed()
    z = complex(z)
    K = np.zeros((frame.dim, frame.dim), dtype=np.complex128)
    out = []
    for m in range(n_max):
        a, b, c = frame.blocks(m)
        lhs = z * frame.H - b - c @ K
        try:
            K = solve(lhs, a)
        except (SingularMatrixError, IllConditionedError) as err:
            raise SingularIterateError(f"ratio step {m + 1} at z={z}: {err}") from err
        out.append(K.T if side == "right" else K)
    return out


def last_ratio(frame: Frame, side: str, n: int, z: complex) -> np.ndarray:
    return _ratio_sweep(frame, side, n, z)[-1]



def trajectory(frame: Frame, z: complex, n: int) -> list[ScaledValue]:
    """V_0 .. V_n at one point, each with its own exponent."""
    out = [ScaledValue(eye(frame.dim), 0.0)]
    if n == 0:
        return out
    st = sweep(frame, z, 1)
    out.append(ScaledValue(st.cur[0], st.e))
    prev, cur, p2 = st.prev[0], st.cur[0], st.p2
    guard = OVERFLOW_PER_DIM * frame.dim
    z = complex(z)
    for m in range(1, n):
        a, b, c = frame.blocks(m)
        nxt = _solve_block(a, (z * frame.H - b) @ cur - c @ prev, f"A_{m}")
        state = SweepState([nxt], [cur], p2, m + 1)
        _renormalize(state, guard)
        prev, cur, p2 = state.prev[0], state.cur[0], state.p2
        out.append(ScaledValue(cur, state.e))
    return out
