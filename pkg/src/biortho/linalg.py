"""Dense complex matrix primitives.

Everything is complex128 even for real input, since evaluation points live
off the real axis.  Factorizations and eigenvalues are LAPACK (through
numpy/scipy); the adjugate is Faddeev-LeVerrier so it stays defined at
singular arguments.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    DimensionError,
    IllConditionedError,
    NoConvergenceError,
    NotSPDError,
    SingularMatrixError,
)

COND_CEILING = 1e12
PIVOT_RTOL = 1e-14
EIG_MAX_DIM = 2048

_gecon = sla.get_lapack_funcs("gecon", dtype=np.complex128)


def as_cmatrix(a) -> np.ndarray:
    """Coerce to a square complex128 array; scalars become 1x1."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def mat_mul(a, b) -> np.ndarray:
    a, b = np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128)
    if a.shape[-1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def _lu(a: np.ndarray, cond_ceiling: float):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    scale = pivots.max() if pivots.size else 0.0
    if scale == 0.0 or pivots.min() < PIVOT_RTOL * scale:
        raise SingularMatrixError(f"pivot {pivots.min():.3e} below {PIVOT_RTOL:g} * {scale:.3e}")
    if cond_ceiling is not None and a.shape[0] > 1:
        anorm = np.abs(a).sum(axis=0).max()
        rcond, info = _gecon(lu, anorm, norm="1")
        if info != 0 or rcond * cond_ceiling < 1.0:
            raise IllConditionedError(f"condition estimate {1.0 / max(rcond, 1e-300):.3e} exceeds {cond_ceiling:g}")
    return lu, piv


def solve(a, rhs, cond_ceiling: float | None = COND_CEILING) -> np.ndarray:
    """Return X with a @ X = rhs."""
    a = as_cmatrix(a)
    rhs = np.asarray(rhs, dtype=np.complex128)
    if rhs.shape[0] != a.shape[0]:
        raise DimensionError(f"rhs has {rhs.shape[0]} rows, matrix is {a.shape}")
    lu, piv = _lu(a, cond_ceiling)
    return sla.lu_solve((lu, piv), rhs, check_finite=False)


def solve_right(a, lhs, cond_ceiling: float | None = COND_CEILING) -> np.ndarray:
    """Return X with X @ a = lhs."""
    a = as_cmatrix(a)
    lhs = np.asarray(lhs, dtype=np.complex128)
    return solve(a.T, lhs.T, cond_ceiling).T


def mat_inv(a, cond_ceiling: float | None = COND_CEILING) -> np.ndarray:
    a = as_cmatrix(a)
    return solve(a, eye(a.shape[0]), cond_ceiling)


def adjugate_det(a) -> tuple[np.ndarray, complex]:
    """Adjugate and determinant by the Faddeev-LeVerrier recursion.

    >>> adj, det = adjugate_det([[2.0, 1.0], [0.0, 2.0]])
    >>> adj.real.tolist(), det.real
    ([[2.0, -1.0], [0.0, 2.0]], 4.0)
    """
    adj, _, det, _, _ = adjugate_det_derivs(a)
    return adj, det


def adjugate_det_derivs(a, da=None, dda=None):
    """Adjugate, its first derivative and det with two derivatives.

    ``a`` is a matrix function sampled at a point together with its first
    and second derivatives ``da``, ``dda``.  The Faddeev-LeVerrier
    recursion is differentiated term by term (product rule), giving
    ``Adj``, ``Adj'``; the determinant derivatives then follow from
    Jacobi's formula::

        det'  = tr(Adj A')
        det'' = tr(Adj' A') + tr(Adj A'')

    Returns ``(adj, dadj, det, ddet, dddet)``.
    """
    a = as_cmatrix(a)
    n = a.shape[0]
    da = np.zeros_like(a) if da is None else as_cmatrix(da)
    dda = np.zeros_like(a) if dda is None else as_cmatrix(dda)
    ident = eye(n)
    m = np.zeros_like(a)
    dm = np.zeros_like(a)
    c, dc = 1.0 + 0j, 0j
    for k in range(1, n + 1):
        m, dm = a @ m + c * ident, da @ m + a @ dm + dc * ident
        am = a @ m
        c = -np.trace(am) / k
        dc = -np.trace(da @ m + a @ dm) / k
    sign = -1.0 if n % 2 == 0 else 1.0  # (-1)**(n-1)
    adj, dadj = sign * m, sign * dm
    det = complex(-c if n % 2 else c)
    ddet = complex(np.trace(adj @ da))
    dddet = complex(np.trace(dadj @ da) + np.trace(adj @ dda))
    return adj, dadj, det, ddet, dddet


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    tolerance: float

    def sorted(self) -> np.ndarray:
        return sort_complex(self.eigenvalues)


def sort_complex(values) -> np.ndarray:
    """Sort by real part, then imaginary part."""
    v = np.asarray(values, dtype=np.complex128)
    order = np.lexsort((v.imag, v.real))
    return v[order]


def eig_general(a, max_dim: int = EIG_MAX_DIM) -> Spectrum:
    """All eigenvalues of a general square matrix (LAPACK geev: Hessenberg + shifted QR)."""
    a = as_cmatrix(a)
    if a.shape[0] > max_dim:
        raise DimensionError(f"dimension {a.shape[0]} exceeds eigen solver limit {max_dim}")
    try:
        ev = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    return Spectrum(ev.astype(np.complex128), 1e-9 * max(norms(a)[0], 1.0))


def sqrtm_spd(a, herm_tol: float = 1e-12) -> np.ndarray:
    """Principal square root of a Hermitian positive definite matrix."""
    w, v = _spd_eigh(as_cmatrix(a), herm_tol)
    return (v * np.sqrt(w)) @ v.conj().T


def _spd_eigh(a, herm_tol):
    scale = max(np.abs(a).max(), 1e-300)
    if np.abs(a - a.conj().T).max() > herm_tol * scale:
        raise NotSPDError("matrix is not Hermitian")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    if w.min() <= 0:
        raise NotSPDError(f"smallest eigenvalue {w.min():.3e} is not positive")
    return w, v


def sqrtm_pair_spd(a, herm_tol: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """(a^{1/2}, a^{-1/2}) from one eigendecomposition."""
    a = as_cmatrix(a)
    w, v = _spd_eigh(a, herm_tol)
    root = np.sqrt(w)
    return (v * root) @ v.conj().T, (v / root) @ v.conj().T


def norms(a) -> tuple[float, float]:
    """(Frobenius norm, infinity norm = max absolute row sum)."""
    a = np.asarray(a, dtype=np.complex128)
    if a.size == 0:
        return 0.0, 0.0
    return float(np.linalg.norm(a, "fro")), float(np.abs(a).sum(axis=1).max())


def fro(a) -> float:
    return float(np.linalg.norm(np.asarray(a), "fro"))


def rank(a, tol: float = 1e-10) -> int:
    a = as_cmatrix(a)
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int((s > tol * max(s[0], 1.0)).sum())
