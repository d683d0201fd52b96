"""Block Jacobi operators, zeros as eigenvalues, disk bounds and moments."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientFamily, ScalingSequence
from .errors import DegenerateZerosError
from .linalg import eig_general, sort_complex
from .recurrence import Frame, make_frame

MAX_MULTIPLICITY = 2


@dataclass(frozen=True)
class BlockJacobi:
    """Truncated operator with B_m on the diagonal, A_m above, C_{m+1} below."""

    diagonal: tuple
    upper: tuple  # A_0 .. A_{n-2}
    lower: tuple  # C_1 .. C_{n-1}
    dim: int

    @property
    def n_blocks(self) -> int:
        return len(self.diagonal)

    def dense(self) -> np.ndarray:
        N, n = self.dim, self.n_blocks
        J = np.zeros((n * N, n * N), dtype=np.complex128)
        for i, b in enumerate(self.diagonal):
            J[i * N:(i + 1) * N, i * N:(i + 1) * N] = b
        for i, a in enumerate(self.upper):
            J[i * N:(i + 1) * N, (i + 1) * N:(i + 2) * N] = a
        for i, c in enumerate(self.lower):
            J[(i + 1) * N:(i + 2) * N, i * N:(i + 1) * N] = c
        return J

    def row_sum_bound(self) -> float:
        """max over block rows of the summed block infinity norms."""
        inf = lambda m: float(np.abs(m).sum(axis=1).max())  # noqa: E731
        n = self.n_blocks
        best = 0.0
        for i in range(n):
            s = inf(self.diagonal[i])
            if i + 1 < n:
                s += inf(self.upper[i])
            if i >= 1:
                s += inf(self.lower[i - 1])
            best = max(best, s)
        return best


def build_from_frame(frame: Frame, n: int) -> BlockJacobi:
    if n < 1:
        raise ValueError("need at least one block")
    blocks = [frame.blocks(m) for m in range(n)]
    return BlockJacobi(
        diagonal=tuple(b for _, b, _ in blocks),
        upper=tuple(a for a, _, _ in blocks[:-1]),
        lower=tuple(c for _, _, c in blocks[1:]),
        dim=frame.dim,
    )


def build(family: CoefficientFamily, n: int, scaling: ScalingSequence | None = None, k: int | None = None) -> BlockJacobi:
    """Truncated block Jacobi matrix J_n; with a scaling, the blocks are D_k^{-1/2} X D_k^{-1/2}."""
    return build_from_frame(make_frame(family, scaling, k, normalized=True), n)


@dataclass(frozen=True)
class ZeroSet:
    nodes: np.ndarray
    multiplicities: tuple
    cluster_tol: float

    @property
    def total(self) -> int:
        return int(sum(self.multiplicities))


def default_cluster_tol(x: complex) -> float:
    return 1e-6 * max(1.0, abs(x))


def cluster(eigs, cluster_tol: float | None = None, max_multiplicity: int = MAX_MULTIPLICITY) -> ZeroSet:
    """Group eigenvalues closer than the tolerance; each node is its cluster mean.

    The mean of a split multiple eigenvalue is far more accurate than its
    members, so it is used as the node.
    """
    ev = list(sort_complex(eigs))
    groups: list[list[complex]] = []
    for x in ev:
        tol = default_cluster_tol(x) if cluster_tol is None else cluster_tol
        for g in groups:
            if min(abs(x - y) for y in g) <= tol:
                g.append(x)
                break
        else:
            groups.append([x])
    if any(len(g) > max_multiplicity for g in groups):
        worst = max(len(g) for g in groups)
        raise DegenerateZerosError(f"zero cluster of size {worst} exceeds cap {max_multiplicity}")
    pairs = sorted(((complex(np.mean(g)), len(g)) for g in groups), key=lambda t: (t[0].real, t[0].imag))
    nodes = np.array([p[0] for p in pairs], dtype=np.complex128)
    mult = tuple(p[1] for p in pairs)
    tol = cluster_tol if cluster_tol is not None else 1e-6
    return ZeroSet(nodes, mult, tol)


def eigenvalues(family: CoefficientFamily, n: int, scaling=None, k=None, transpose: bool = False) -> np.ndarray:
    J = build(family, n, scaling, k).dense()
    return eig_general(J.T if transpose else J).sorted()


def zeros(
    family: CoefficientFamily,
    n: int,
    scaling: ScalingSequence | None = None,
    k: int | None = None,
    cluster_tol: float | None = None,
) -> ZeroSet:
    """Distinct zeros of det V_n (or of the scaled polynomial) with multiplicities."""
    return zeros_from_frame(make_frame(family, scaling, k, normalized=True), n, cluster_tol)


def zeros_from_frame(frame: Frame, n: int, cluster_tol: float | None = None) -> ZeroSet:
    J = build_from_frame(frame, n).dense()
    return cluster(eig_general(J).eigenvalues, cluster_tol)


def gershgorin_bound(family: CoefficientFamily, scaling: ScalingSequence | None, n: int) -> float:
    """Disk radius containing every zero of the m-th scaled polynomial (k = m), m <= n."""
    best = 0.0
    for m in range(1, n + 1):
        k = m if scaling is not None and scaling.kind != "identity" else None
        best = max(best, build(family, m, scaling, k).row_sum_bound())
    return best


def moments(family: CoefficientFamily, l_max: int, scaling=None, k=None) -> list[np.ndarray]:
    """M_l = upper-left block of J^l, l = 0..l_max.

    A path of length l from block 0 back to block 0 never passes block
    floor(l/2), so truncating at ceil(l/2)+2 blocks is exact.
    """
    frame = make_frame(family, scaling, k, normalized=True)
    depth = math.ceil(l_max / 2) + 2
    out = _moments(frame, l_max, depth)
    check = _moments(frame, l_max, depth + 1)
    for a, b in zip(out, check):
        if np.abs(a - b).max() > 1e-12 * max(1.0, np.abs(a).max()):
            raise AssertionError("moment oracle depends on truncation depth")
    return out


def _moments(frame: Frame, l_max: int, depth: int) -> list[np.ndarray]:
    J = build_from_frame(frame, depth).dense()
    N = frame.dim
    v = np.zeros((depth * N, N), dtype=np.complex128)
    v[:N] = np.eye(N)
    out = [v[:N].copy()]
    for _ in range(l_max):
        v = J @ v
        out.append(v[:N].copy())
    return out
