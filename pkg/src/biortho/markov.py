"""Generalized Chebyshev matrix polynomials and the limit Markov function.

For a limit triple (A, B, C) the ratio limit F(z) solves

    C F A F + (B - zI) F + I = 0,

computed here by the fixed-point (continued fraction) iteration
F <- (zI - B - C F A)^{-1}, and independently by running the ratio
recursion of the constant family (A, B, C) to large n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .coefficients import constant
from .errors import IllConditionedError, NoConvergenceError, SingularMatrixError, SingularStepError
from .linalg import as_cmatrix, eye, fro
from .recurrence import Frame, ScaledValue, last_ratio, make_frame, sweep


@dataclass(frozen=True)
class MarkovValue:
    z: complex
    F: np.ndarray
    residual: float
    iterations: int


def _const_frame(upper, diag, lower) -> Frame:
    upper, diag, lower = as_cmatrix(upper), as_cmatrix(diag), as_cmatrix(lower)
    return Frame(lambda m: (upper, diag, lower), eye(upper.shape[0]), upper.shape[0])


def chebyshev_left(C, B, A, n: int, z: complex) -> ScaledValue:
    """U_n^{C,B,A}(z):  z U_n = C U_{n+1} + B U_n + A U_{n-1},  U_0 = I."""
    st = sweep(_const_frame(C, B, A), z, n)
    return ScaledValue(st.cur[0], st.e)


def chebyshev_right(A, B, C, n: int, z: complex) -> ScaledValue:
    """T_n^{A,B,C}(z):  z T_n = T_{n+1} A + T_n B + T_{n-1} C,  T_0 = I."""
    frame = _const_frame(C, B, A).transposed()
    st = sweep(frame, z, n)
    return ScaledValue(st.cur[0].T, st.e)


def chebyshev_right_all(A, B, C, l_max: int, z: complex) -> list[np.ndarray]:
    """[T_0(z), ..., T_{l_max}(z)] as plain matrices (small l only)."""
    A, B, C = as_cmatrix(A), as_cmatrix(B), as_cmatrix(C)
    N = A.shape[0]
    prev, cur = np.zeros((N, N), dtype=np.complex128), eye(N)
    out = [cur]
    for _ in range(l_max):
        nxt = linalg.solve_right(A, cur @ (z * eye(N) - B) - prev @ C)
        prev, cur = cur, nxt
        out.append(cur)
    return out


def chebyshev_right_coeffs(A, B, C, l_max: int) -> list[list[np.ndarray]]:
    """Right matrix coefficients: T_l(x) = sum_i x^i tau[l][i], l = 0..l_max."""
    A, B, C = as_cmatrix(A), as_cmatrix(B), as_cmatrix(C)
    N = A.shape[0]
    zero = np.zeros((N, N), dtype=np.complex128)
    out = [[eye(N)]]
    prev: list = []
    for l in range(l_max):
        cur = out[-1]
        nxt = [zero.copy() for _ in range(l + 2)]
        for i, t in enumerate(cur):
            nxt[i + 1] += t
            nxt[i] -= t @ B
        for i, t in enumerate(prev):
            nxt[i] -= t @ C
        nxt = [linalg.solve_right(A, t) for t in nxt]
        prev = cur
        out.append(nxt)
    return out


def equation_residual(A, B, C, F, z: complex) -> float:
    A, B, C, F = (as_cmatrix(x) for x in (A, B, C, F))
    N = A.shape[0]
    return fro(C @ F @ A @ F + (B - z * eye(N)) @ F + eye(N))


def markov_fixed_point(A, B, C, z: complex, tol: float = 1e-12, max_iter: int = 10_000) -> MarkovValue:
    """Iterate F <- (zI - B - C F A)^{-1} from F = I/z until the equation residual is <= tol.

    Singular A or C is accepted.
    """
    A, B, C = as_cmatrix(A), as_cmatrix(B), as_cmatrix(C)
    z = complex(z)
    N = A.shape[0]
    ident = eye(N)
    F = ident / z
    best = (np.inf, F, 0)
    for it in range(1, max_iter + 1):
        try:
            F = linalg.mat_inv(z * ident - B - C @ F @ A)
        except (SingularMatrixError, IllConditionedError) as exc:
            raise SingularStepError(f"fixed point step {it} at z={z}: {exc}") from exc
        res = equation_residual(A, B, C, F, z)
        if res < best[0]:
            best = (res, F, it)
        if res <= tol:
            return MarkovValue(z, F, res, it)
    raise NoConvergenceError(
        f"fixed point did not reach {tol:g} in {max_iter} steps (best residual {best[0]:.3e})",
        best=MarkovValue(z, best[1], best[0], best[2]),
    )


def markov_ratio(A, B, C, z: complex, n: int) -> np.ndarray:
    """V_{n-1} V_n^{-1} A^{-1} for the constant family (A, B, C)."""
    fam = constant(A, B, C)
    K = last_ratio(make_frame(fam), "left", n, z)
    return linalg.solve_right(fam.A, K)


def closed_form_scalar(z: complex) -> complex:
    """(z - sqrt(z^2 - 4)) / 2 on the branch vanishing at infinity."""
    z = complex(z)
    r = np.sqrt(z * z - 4)
    f1, f2 = (z - r) / 2, (z + r) / 2
    return f1 if abs(f1) <= abs(f2) else f2


def laurent_moments(A, B, C, l_max: int, radius: float, samples: int = 128) -> list[np.ndarray]:
    """Coefficients M_l of F(z) = sum_l M_l z^{-l-1}, read off a circle |z| = radius."""
    thetas = 2 * np.pi * np.arange(samples) / samples
    zs = radius * np.exp(1j * thetas)
    Fs = [markov_fixed_point(A, B, C, z).F for z in zs]
    out = []
    for l in range(l_max + 1):
        acc = sum(F * z ** (l + 1) for F, z in zip(Fs, zs))
        out.append(acc / samples)
    return out
