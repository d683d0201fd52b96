"""Matrix quadrature rules built from the zeros of V_n and G_n.

At a zero x of multiplicity l (l <= 2):

    Gamma   = l / det^{(l)}(V_n)(x) * Adj^{(l-1)}(V_n)(x) V^{(1)}_{n-1}(x)
    Gamma~  = l / det^{(l)}(G_n)(x) * G^{(1)}_{n-1}(x) Adj^{(l-1)}(G_n)(x)

All quantities come from one recurrence sweep with a shared power-of-two
exponent ``e``.  Adj carries ``e`` to the power N-1, the associate one
power, det N powers, so the exponents cancel and only mantissas are used.

At a simple zero both expressions equal the residue of the truncated
resolvent (zI - J_n)^{-1}_{00}, i.e. rho_0 lambda_0^T / (lambda^T rho) for
the right and left eigenvectors of J_n.  The product Adj(V_n) V^{(1)}_{n-1}
can cancel by many orders of magnitude when V_n or G_n grows unevenly, so
simple zeros use this residue form by default.  Each eigenvector is taken
either from the forward recurrence (blocks V_j c, d^T G_j) or from LAPACK,
whichever has the smaller first-order error estimate: forward recurrence
keeps small head components accurate at extreme nodes, LAPACK resolves
recessive solutions at interior nodes.  ``method="adjugate"`` forces the
adjugate expressions everywhere.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .coefficients import CoefficientFamily, ScalingSequence, limits
from .errors import DegenerateZerosError, SingularWeightError
from .linalg import adjugate_det_derivs, eye, fro, solve, solve_right
from .markov import chebyshev_right, chebyshev_right_coeffs
from .recurrence import Frame, make_frame, node_values, sweep, trajectory
from .spectral import ZeroSet, build_from_frame, zeros_from_frame

WEIGHT_RTOL = 1e-12


@dataclass(frozen=True)
class QuadratureRule:
    zero_set: ZeroSet
    gamma_left: tuple
    gamma_right: tuple
    order: int

    @property
    def nodes(self) -> np.ndarray:
        return self.zero_set.nodes


@dataclass(frozen=True)
class Integral:
    value: np.ndarray
    exact: bool  # degree <= 2n-1, where the rule is claimed exact


def _frame(family, scaling, k) -> Frame:
    if scaling is not None and scaling.kind != "identity" and k is None:
        raise ValueError("scale index k is required with a scaling sequence")
    return make_frame(family, scaling, k, normalized=True)


def _weight(P, dP, ddP, mult: int):
    """(Adj^{(l-1)}, det^{(l)}) at a zero of multiplicity l."""
    adj, dadj, _, ddet, dddet = adjugate_det_derivs(P, dP, ddP)
    if mult == 1:
        num, den = adj, ddet
    elif mult == 2:
        num, den = dadj, dddet
    else:
        raise DegenerateZerosError(f"multiplicity {mult} not supported")
    # det' = tr(Adj P'), det'' = tr(Adj' P') + tr(Adj P'')
    scale = fro(adj) * fro(dP) if mult == 1 else fro(dadj) * fro(dP) + fro(adj) * fro(ddP)
    if abs(den) < WEIGHT_RTOL * scale:
        raise SingularWeightError(f"det derivative {abs(den):.3e} below {WEIGHT_RTOL:g} * {scale:.3e}")
    return num, den


EPS = np.finfo(float).eps


def _null_vector(m: np.ndarray) -> np.ndarray:
    return np.linalg.svd(m)[2][-1].conj()


def _forward_vector(traj, n: int):
    """Eigenvector blocks from a recurrence trajectory, with an absolute error scale.

    ``traj`` holds X_0..X_n; the null vector of X_n fixes the combination.
    Returns (vector of n blocks of length N, first-order absolute error).
    """
    v = _null_vector(traj[n].m)
    e_max = max(t.e for t in traj[:n])
    blocks = [(t.m @ v) * np.exp(t.e - e_max) for t in traj[:n]]
    size = max(float(np.linalg.norm(t.m)) * np.exp(t.e - e_max) for t in traj[:n])
    return np.concatenate(blocks), EPS * n * size


def _pick(fwd, fwd_err, lap, lap_err, j: int, N: int):
    """The source whose block j (and hence lam @ rho) has the smaller relative error.

    A forward vector starts from its head, so at j = 0 only the pairing sum
    lam @ rho is at risk, with error relative to the largest block.
    """
    sl = slice(j * N, (j + 1) * N)
    ref = max(float(np.abs(fwd).max()), 1e-300) if j == 0 else max(float(np.linalg.norm(fwd[sl])), 1e-300)
    fwd_rel = fwd_err / ref
    lap_rel = lap_err / max(float(np.linalg.norm(lap[sl])), 1e-300)
    return fwd if fwd_rel <= lap_rel else lap


@dataclass(frozen=True)
class EigenPair:
    """Right/left eigenvectors of J_n at one node, lam @ rho = den."""

    rho: np.ndarray
    lam: np.ndarray
    den: complex

    def block(self, j: int, N: int) -> np.ndarray:
        """rho_j lam_j^T / den: the residue of the (j, j) block of the resolvent."""
        return np.outer(self.rho[j * N:(j + 1) * N], self.lam[j * N:(j + 1) * N]) / self.den


def eigen_pairs(frame: Frame, n: int, nodes, block: int = 0) -> list[EigenPair]:
    """Eigenvector pairs of J_n at simple zeros.

    Each vector comes from the source that is more accurate on ``block``,
    the block the caller reads.
    """
    N = frame.dim
    J = build_from_frame(frame, n).dense()
    w, vl, vr = sla.eig(J, left=True, right=True)
    jnorm = float(np.linalg.norm(J))
    out = []
    for x in nodes:
        i = int(np.argmin(np.abs(w - x)))
        lam_l, rho_l = vl[:, i].conj(), vr[:, i]
        cond = 1.0 / max(abs(lam_l @ rho_l), 1e-300)  # both unit norm
        gap = float(np.min(np.abs(np.delete(w, i) - w[i]))) if len(w) > 1 else 1.0
        lap_est = EPS * n * N * cond * jnorm / max(gap, 1e-300)
        rho_f, rho_est = _forward_vector(trajectory(frame, x, n), n)
        # right family through the transposed frame: G_j^T d = (d^T G_j)^T
        lam_f, lam_est = _forward_vector(trajectory(frame.transposed(), x, n), n)
        rho = _pick(rho_f, rho_est, rho_l, lap_est, block, N)
        lam = _pick(lam_f, lam_est, lam_l, lap_est, block, N)
        den = complex(lam @ rho)
        if abs(den) < EPS * float(np.linalg.norm(lam) * np.linalg.norm(rho)):
            # a swamped forward vector pairs to noise; LAPACK vectors are unit norm
            rho, lam = rho_l, lam_l
            den = complex(lam @ rho)
        if abs(den) < EPS:
            raise SingularWeightError(f"left and right eigenvectors nearly orthogonal at x={x}")
        out.append(EigenPair(rho, lam, den))
    return out


def rule_from_frame(
    frame: Frame, n: int, cluster_tol: float | None = None, method: str = "residue"
) -> QuadratureRule:
    if method not in ("residue", "adjugate"):
        raise ValueError(f"method must be 'residue' or 'adjugate', got {method!r}")
    zs = zeros_from_frame(frame, n, cluster_tol)
    simple = [x for x, m in zip(zs.nodes, zs.multiplicities) if m == 1]
    res = iter(eigen_pairs(frame, n, simple) if method == "residue" and simple else [])
    left, right = [], []
    for x, mult in zip(zs.nodes, zs.multiplicities):
        if mult == 1 and method == "residue":
            w = next(res).block(0, frame.dim)
            left.append(w)
            right.append(w)
            continue
        lv = node_values(frame, "left", x, n)
        num, den = _weight(lv.P, lv.dP, lv.ddP, mult)
        left.append(mult * (num @ lv.Q) / den)
        rv = node_values(frame, "right", x, n)
        num, den = _weight(rv.P, rv.dP, rv.ddP, mult)
        right.append(mult * (rv.Q @ num) / den)
    return QuadratureRule(zs, tuple(left), tuple(right), n)


def rule(
    family: CoefficientFamily,
    n: int,
    scaling: ScalingSequence | None = None,
    k: int | None = None,
    cluster_tol: float | None = None,
    method: str = "residue",
) -> QuadratureRule:
    """Left and right weights at the distinct zeros of the degree-n polynomial."""
    if n < 1:
        raise ValueError("quadrature order must be >= 1")
    return rule_from_frame(_frame(family, scaling, k), n, cluster_tol, method)


def _poly_at(coeffs, x: complex, dim: int) -> np.ndarray:
    """Horner evaluation of sum_j coeffs[j] x^j (scalars mean multiples of I)."""
    acc = np.zeros((dim, dim), dtype=np.complex128)
    for c in reversed(list(coeffs)):
        c = np.asarray(c, dtype=np.complex128)
        acc = acc * x + (c * eye(dim) if c.ndim == 0 else c)
    return acc


def _degree(coeffs) -> int:
    return len(list(coeffs)) - 1


def integrate_left(rq: QuadratureRule, P) -> Integral:
    """sum_k P(x_k) Gamma_k, approximating the integral of P dW."""
    dim = rq.gamma_left[0].shape[0]
    val = sum(_poly_at(P, x, dim) @ g for x, g in zip(rq.nodes, rq.gamma_left))
    return Integral(val, _degree(P) <= 2 * rq.order - 1)


def integrate_right(rq: QuadratureRule, P) -> Integral:
    """sum_k Gamma~_k P(x_k), approximating the integral of dW P."""
    dim = rq.gamma_right[0].shape[0]
    val = sum(g @ _poly_at(P, x, dim) for x, g in zip(rq.nodes, rq.gamma_right))
    return Integral(val, _degree(P) <= 2 * rq.order - 1)


def monomial(l: int) -> list:
    return [0.0] * l + [1.0]


def exactness_errors(rq: QuadratureRule, oracle: list) -> list[tuple[int, float, float]]:
    """(l, left relative error, right relative error) against oracle moments."""
    out = []
    for l, m in enumerate(oracle):
        P = monomial(l)
        terms_l = sum(fro(g) * abs(x) ** l for x, g in zip(rq.nodes, rq.gamma_left))
        terms_r = sum(fro(g) * abs(x) ** l for x, g in zip(rq.nodes, rq.gamma_right))
        el = fro(integrate_left(rq, P).value - m) / max(fro(m), terms_l, 1e-300)
        er = fro(integrate_right(rq, P).value - m) / max(fro(m), terms_r, 1e-300)
        out.append((l, el, er))
    return out


def partial_fractions(
    family: CoefficientFamily,
    n: int,
    R,
    side: str = "left",
    z_test: complex = 0j,
    scaling: ScalingSequence | None = None,
    k: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Pole expansion of R V_n^{-1} (left) or G_n^{-1} R (right) against direct evaluation.

    The coefficient at a zero of multiplicity l is
    l R(x) Adj^{(l-1)}(V_n)(x) / det^{(l)}(V_n)(x), mirrored on the right.
    This is the full principal part only when the poles of V_n^{-1} are
    simple; at a non-semisimple double zero the expansion misses the
    second-order term and the two returned values differ.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    frame = _frame(family, scaling, k)
    dim = frame.dim
    zs = zeros_from_frame(frame, n)
    recon = np.zeros((dim, dim), dtype=np.complex128)
    z_test = complex(z_test)
    for x, mult in zip(zs.nodes, zs.multiplicities):
        nv = node_values(frame, side, x, n)
        num, den = _weight(nv.P, nv.dP, nv.ddP, mult)
        coef = mult * num / den * np.exp(-nv.e)  # Adj^{(l-1)}/det^{(l)} scales as 1/V
        Rx = _poly_at(R, x, dim)
        recon += (Rx @ coef if side == "left" else coef @ Rx) / (z_test - x)
    f = frame.transposed() if side == "right" else frame
    st = sweep(f, z_test, n)
    Pz = st.cur[0].T if side == "right" else st.cur[0]
    Rz = _poly_at(R, z_test, dim)
    ref = (solve_right(Pz, Rz) if side == "left" else solve(Pz, Rz)) * np.exp(-st.e)
    return recon, ref


def reversed_frame(frame: Frame, n: int) -> Frame:
    """Frame of J_n with the block order reversed (same eigenvalues).

    The head weight of the reversed operator is the residue of the last
    diagonal block of (z - J_n)^{-1}.
    """
    zero = np.zeros((frame.dim, frame.dim), dtype=np.complex128)
    ident = eye(frame.dim)

    def blocks(m):
        # A'_m = C_{n-1-m}, B'_m = B_{n-1-m}, C'_m = A_{n-1-m}; A'_{n-1} only
        # normalizes the degree-n polynomial, so I stands in for it
        if not 0 <= m < n:
            return ident, zero, ident
        a_src, b, c_src = frame.blocks(n - 1 - m)
        return (c_src if m < n - 1 else ident), b, (a_src if m >= 1 else zero)

    return Frame(blocks, frame.H, frame.dim)


def discrete_moments(
    family: CoefficientFamily,
    scaling: ScalingSequence | None,
    n: int,
    l_max: int,
    k: int | None = None,
    method: str = "operator",
) -> list[np.ndarray]:
    """Integrals of T_l (l = 0..l_max) against the discrete measure of order n.

    The measure puts mass P_{n-1}(x_j) Gamma~_j S_{n-1}(x_j) at each node,
    with P, S the left and right polynomials of the normalized frame at
    scale index k (default n), and T_l the right Chebyshev polynomials of
    the limit triple.  At a simple zero the mass is the residue of the last
    diagonal block of (z - J_n)^{-1}, so the measure is the spectral
    measure of that block and its power moments are (J_n^i)_{n-1,n-1}.

    ``method="operator"`` (default) integrates through those moments and
    the coefficients of T_l.  ``method="nodes"`` forms each mass and sums
    over the zeros; it loses accuracy once the eigenvalues of J_n become
    ill-conditioned.
    """
    if method not in ("operator", "nodes"):
        raise ValueError(f"method must be 'operator' or 'nodes', got {method!r}")
    if k is None and scaling is not None and scaling.kind != "identity":
        k = n
    frame = _frame(family, scaling, k)
    lim = limits(family, scaling)
    if method == "operator":
        return _discrete_moments_operator(frame, n, l_max, lim)
    return _discrete_moments_nodes(frame, n, l_max, lim)


def _discrete_moments_operator(frame: Frame, n: int, l_max: int, lim) -> list[np.ndarray]:
    N = frame.dim
    J = build_from_frame(frame, n).dense()
    v = np.zeros((n * N, N), dtype=np.complex128)
    v[-N:] = eye(N)
    mu = [eye(N)]
    for _ in range(l_max):
        v = J @ v
        mu.append(v[-N:].copy())
    if l_max == 0:
        return [mu[0]]
    taus = chebyshev_right_coeffs(lim.A, lim.B, lim.C, l_max)
    return [sum(mu[i] @ t for i, t in enumerate(tau)) for tau in taus]


def _discrete_moments_nodes(frame: Frame, n: int, l_max: int, lim) -> list[np.ndarray]:
    N = frame.dim
    zs = zeros_from_frame(frame, n)
    simple = [x for x, m in zip(zs.nodes, zs.multiplicities) if m == 1]
    pairs = iter(eigen_pairs(reversed_frame(frame, n), n, simple) if simple else [])
    rq = None
    out = [np.zeros((N, N), dtype=np.complex128) for _ in range(l_max + 1)]
    for idx, (x, mult) in enumerate(zip(zs.nodes, zs.multiplicities)):
        if mult == 1:
            mass = next(pairs).block(0, N)
        else:
            rq = rq or rule_from_frame(frame, n, method="adjugate")
            lv = node_values(frame, "left", x, n)
            rv = node_values(frame, "right", x, n)
            mass = (lv.P_prev @ rq.gamma_right[idx] @ rv.P_prev) * np.exp(lv.e + rv.e)
        for l in range(l_max + 1):
            out[l] += mass @ chebyshev_right(lim.A, lim.B, lim.C, l, x).value()
    return out


def discrete_moment(family, scaling, n: int, l: int, k: int | None = None) -> np.ndarray:
    return discrete_moments(family, scaling, n, l, k)[l]


def _fmt(v: float) -> str:
    return repr(float(v))


def rule_csv(rq: QuadratureRule) -> str:
    """node_re, node_im, multiplicity, then Gamma and Gamma~ entries (row-major, re/im)."""
    dim = rq.gamma_left[0].shape[0]
    cols = ["node_re", "node_im", "multiplicity"]
    for name in ("gamma", "gamma_tilde"):
        for i in range(dim):
            for j in range(dim):
                cols += [f"{name}_{i}{j}_re", f"{name}_{i}{j}_im"]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for x, m, gl, gr in zip(rq.nodes, rq.zero_set.multiplicities, rq.gamma_left, rq.gamma_right):
        row = [_fmt(x.real), _fmt(x.imag), str(m)]
        for g in (gl, gr):
            for v in g.ravel():
                row += [_fmt(v.real), _fmt(v.imag)]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
