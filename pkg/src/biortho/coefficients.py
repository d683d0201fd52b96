"""Recurrence coefficient families, scaling sequences and their limits.

A family supplies the blocks of the left recurrence

    z V_n = A_n V_{n+1} + B_n V_n + C_n V_{n-1}

(the right family ``G_n`` uses the same triples, multiplied from the right).
A scaling sequence supplies Hermitian positive definite ``D_n``; the scaled
coefficients ``D_k^{-1/2} X_n D_k^{-1/2}`` converge to a limit triple under
the divergence conditions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    ConfigError,
    NotConvergedError,
    NotSPDError,
    OutOfRangeError,
    SingularCoefficientError,
)
from .linalg import as_cmatrix, eye, fro, rank, sqrtm_pair_spd

RANK_TOL = 1e-10
SINGULAR_RTOL = 1e-14


def _check_nonsingular(m: np.ndarray, name: str, n: int) -> None:
    # Hadamard bound makes the test scale invariant
    bound = np.prod(np.linalg.norm(m, axis=1))
    if bound == 0.0 or abs(np.linalg.det(m)) <= SINGULAR_RTOL * bound:
        raise SingularCoefficientError(f"{name}_{n} is singular")


@dataclass(frozen=True, eq=False)
class CoefficientFamily:
    """Base class.  Subclasses implement :meth:`raw`."""

    dim: int
    kind: str = field(init=False, default="abstract")
    n_max: int | None = field(init=False, default=None)

    def raw(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def coeffs(self, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(A_n, B_n, C_n); C_0 is never consumed and may be zero."""
        if n < 0 or (self.n_max is not None and n > self.n_max):
            raise OutOfRangeError(f"{self.kind}: index {n} outside 0..{self.n_max}")
        a, b, c = self.raw(n)
        _check_nonsingular(a, "A", n)
        if n >= 1:
            _check_nonsingular(c, "C", n)
        return a, b, c

    def describe(self) -> dict:
        return {"N": self.dim, "kind": self.kind}


@dataclass(frozen=True, eq=False)
class ConstantFamily(CoefficientFamily):
    A: np.ndarray = None
    B: np.ndarray = None
    C: np.ndarray = None

    def __post_init__(self):
        object.__setattr__(self, "kind", "constant")
        for name in "ABC":
            m = as_cmatrix(getattr(self, name))
            if m.shape != (self.dim, self.dim):
                raise ConfigError(f"constant family: {name} has shape {m.shape}, expected N={self.dim}")
            object.__setattr__(self, name, m)

    def raw(self, n):
        return self.A, self.B, self.C

    def describe(self):
        d = super().describe()
        d.update(A=matrix_to_json(self.A), B=matrix_to_json(self.B), C=matrix_to_json(self.C))
        return d


@dataclass(frozen=True, eq=False)
class LaguerreChristoffelFamily(CoefficientFamily):
    """Laguerre weight times [[x, -1], [0, x]]: A_n = I, B_n, C_n = n(n+a+1) I."""

    alpha: float = 0.0
    dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "kind", "laguerre_christoffel")
        if not self.alpha > -1:
            raise ConfigError(f"laguerre_christoffel needs alpha > -1, got {self.alpha}")
        if self.dim != 2:
            raise ConfigError("laguerre_christoffel is 2x2")

    def raw(self, n):
        a = self.alpha
        d = 2 * n + a + 2
        b = np.array([[d, -2 / (a + 1)], [0, d]], dtype=np.complex128)
        return eye(2), b, n * (a + n + 1) * eye(2)

    def describe(self):
        d = super().describe()
        d["alpha"] = self.alpha
        return d


@dataclass(frozen=True, eq=False)
class PaperExample2Family(CoefficientFamily):
    """A_n = [[2n^2, 0], [7n^2+1, 5n^2]], B_n = [[3/n, 4/n], [n, 8n^2]], C_n = [[2n^2, 2n], [0, n^p]].

    ``c22_exponent`` p is 1 by default.  With p = 1 the scaled C_n tends to
    diag(2, 0); p = 2 makes it tend to diag(2, 1), the declared limit.
    B_0 is undefined and A_0 singular, so index 0 reuses the n = 1 blocks.
    """

    dim: int = 2
    c22_exponent: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", "paper_example_2")
        if self.dim != 2:
            raise ConfigError("paper_example_2 is 2x2")
        if self.c22_exponent not in (1, 2):
            raise ConfigError("c22_exponent must be 1 or 2")

    def formula(self, n: int):
        n2 = n * n
        a = np.array([[2 * n2, 0], [7 * n2 + 1, 5 * n2]], dtype=np.complex128)
        b = np.array([[3 / n, 4 / n], [n, 8 * n2]], dtype=np.complex128)
        c = np.array([[2 * n2, 2 * n], [0, n**self.c22_exponent]], dtype=np.complex128)
        return a, b, c

    def raw(self, n):
        if n == 0:
            a, b, _ = self.formula(1)
            return a, b, np.zeros((2, 2), dtype=np.complex128)
        return self.formula(n)

    def describe(self):
        d = super().describe()
        if self.c22_exponent != 1:
            d["c22_exponent"] = self.c22_exponent
        return d


@dataclass(frozen=True, eq=False)
class CustomTableFamily(CoefficientFamily):
    A: tuple = ()
    B: tuple = ()
    C: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", "custom_table")
        mats = {}
        for name in "ABC":
            seq = tuple(as_cmatrix(m) for m in getattr(self, name))
            if any(m.shape != (self.dim, self.dim) for m in seq):
                raise ConfigError(f"custom_table: {name} entries must be {self.dim}x{self.dim}")
            mats[name] = seq
        lengths = {len(v) for v in mats.values()}
        if len(lengths) != 1 or 0 in lengths:
            raise ConfigError("custom_table: A, B, C must be non-empty and of equal length")
        for name, seq in mats.items():
            object.__setattr__(self, name, seq)
        object.__setattr__(self, "n_max", lengths.pop() - 1)

    def raw(self, n):
        return self.A[n], self.B[n], self.C[n]

    def describe(self):
        d = super().describe()
        for name in "ABC":
            d[name] = [matrix_to_json(m) for m in getattr(self, name)]
        return d


def constant(A, B, C) -> ConstantFamily:
    A = as_cmatrix(A)
    return ConstantFamily(dim=A.shape[0], A=A, B=B, C=C)


def laguerre_christoffel(alpha: float = 0.0) -> LaguerreChristoffelFamily:
    return LaguerreChristoffelFamily(alpha=float(alpha))


def paper_example_2(c22_exponent: int = 1) -> PaperExample2Family:
    return PaperExample2Family(c22_exponent=c22_exponent)


def custom_table(A: Sequence, B: Sequence, C: Sequence) -> CustomTableFamily:
    dim = as_cmatrix(A[0]).shape[0]
    return CustomTableFamily(dim=dim, A=tuple(A), B=tuple(B), C=tuple(C))


def coeffs(family: CoefficientFamily, n: int):
    return family.coeffs(n)


# -- scaling sequences -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalingSequence:
    """D_n for n >= start_index; D_n = I below it."""

    kind: str
    dim: int
    start_index: int = 0
    power: float = 0.0
    table: tuple = ()

    def __post_init__(self):
        if self.kind not in SCALING_KINDS:
            raise ConfigError(f"unknown scaling kind {self.kind!r}")
        if self.kind == "custom_table":
            object.__setattr__(self, "table", tuple(as_cmatrix(m) for m in self.table))

    @property
    def increasing(self) -> bool:
        if self.kind == "scalar_power":
            return self.power >= 0
        return self.kind in ("identity", "paper_laguerre", "paper_example_2")

    def matrix(self, n: int) -> np.ndarray:
        if n < 0:
            raise OutOfRangeError(f"scaling index {n} < 0")
        if n < self.start_index or self.kind == "identity":
            return eye(self.dim)
        if self.kind == "scalar_power":
            return float(n) ** self.power * eye(self.dim)
        if self.kind == "paper_laguerre":
            return float(n * n) * eye(self.dim)
        if self.kind == "paper_example_2":
            n = float(n)
            s = n**8 / (n * n - 1) ** 2
            diag, off = 1 / n**2 + 1 / n**4, -2 / n**3
            return s * np.array([[diag, off], [off, diag]], dtype=np.complex128)
        if n >= len(self.table):
            raise OutOfRangeError(f"custom scaling has no D_{n}")
        return self.table[n]

    def triple(self, n: int):
        """(D_n, D_n^{1/2}, D_n^{-1/2})."""
        d = self.matrix(n)
        if self.kind == "identity" or n < self.start_index:
            return d, d, d
        root, inv_root = sqrtm_pair_spd(d)
        return d, root, inv_root

    def describe(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "scalar_power":
            d["p"] = self.power
        if self.kind == "custom_table":
            d["D"] = [matrix_to_json(m) for m in self.table]
        return d


SCALING_KINDS = ("identity", "scalar_power", "paper_laguerre", "paper_example_2", "custom_table")


def identity_scaling(dim: int) -> ScalingSequence:
    return ScalingSequence("identity", dim)


def scalar_power(dim: int, p: float) -> ScalingSequence:
    return ScalingSequence("scalar_power", dim, start_index=1, power=float(p))


def paper_laguerre_scaling() -> ScalingSequence:
    return ScalingSequence("paper_laguerre", 2, start_index=1)


def paper_example_2_scaling() -> ScalingSequence:
    return ScalingSequence("paper_example_2", 2, start_index=2)


def custom_scaling(table: Sequence) -> ScalingSequence:
    mats = tuple(as_cmatrix(m) for m in table)
    for i, m in enumerate(mats):
        try:
            sqrtm_pair_spd(m)
        except NotSPDError as exc:
            raise ConfigError(f"custom scaling D_{i}: {exc}") from exc
    return ScalingSequence("custom_table", mats[0].shape[0], table=mats)


def scaling(seq: ScalingSequence, n: int):
    return seq.triple(n)


def default_scaling(family: CoefficientFamily) -> ScalingSequence:
    if family.kind == "laguerre_christoffel":
        return paper_laguerre_scaling()
    if family.kind == "paper_example_2":
        return paper_example_2_scaling()
    return identity_scaling(family.dim)


def scaled_coeffs(family: CoefficientFamily, seq: ScalingSequence | None, n: int, k: int):
    """(D_k^{-1/2} A_n D_k^{-1/2}, same for B_n, C_n)."""
    a, b, c = family.coeffs(n)
    if seq is None or seq.kind == "identity":
        return a, b, c
    s = seq.triple(k)[2]
    return s @ a @ s, s @ b @ s, s @ c @ s


def is_increasing(seq: ScalingSequence, n_hi: int, tol: float = 1e-10) -> bool:
    """Check D_{n+1} - D_n >= 0 (Loewner order) for n < n_hi."""
    prev = seq.matrix(0)
    for n in range(1, n_hi + 1):
        cur = seq.matrix(n)
        diff = cur - prev
        if np.linalg.eigvalsh((diff + diff.conj().T) / 2).min() < -tol * max(1.0, fro(cur)):
            return False
        prev = cur
    return True


# -- limits ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LimitTriple:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    singular_A: bool
    singular_C: bool

    @classmethod
    def from_matrices(cls, A, B, C) -> "LimitTriple":
        A, B, C = as_cmatrix(A), as_cmatrix(B), as_cmatrix(C)
        n = A.shape[0]
        return cls(A, B, C, rank(A, RANK_TOL) < n, rank(C, RANK_TOL) < n)

    @property
    def singular(self) -> bool:
        return self.singular_A or self.singular_C


def limits(family: CoefficientFamily, seq: ScalingSequence | None = None, n_probe: int | None = None) -> LimitTriple:
    """Declared limits for builtin (family, scaling) pairs, else a probe estimate."""
    seq = seq or identity_scaling(family.dim)
    pair = (family.kind, seq.kind)
    if pair == ("constant", "identity"):
        return LimitTriple.from_matrices(family.A, family.B, family.C)
    if pair == ("laguerre_christoffel", "paper_laguerre"):
        zero = np.zeros((2, 2))
        return LimitTriple.from_matrices(zero, zero, np.eye(2))
    if pair == ("paper_example_2", "paper_example_2"):
        return LimitTriple.from_matrices([[2, 0], [7, 5]], [[0, 0], [0, 8]], [[2, 0], [0, 1]])
    if n_probe is None:
        n_probe = family.n_max // 2 if family.n_max is not None else 1000
    if n_probe < 1:
        raise NotConvergedError("table too short to probe a limit")
    lo = scaled_coeffs(family, seq, n_probe, n_probe)
    hi = scaled_coeffs(family, seq, 2 * n_probe, 2 * n_probe)
    gap = max(fro(x - y) for x, y in zip(lo, hi))
    if not np.isfinite(gap) or gap >= 1e-3:
        raise NotConvergedError(f"scaled coefficients at n={n_probe} and {2 * n_probe} differ by {gap:.3e}")
    return LimitTriple.from_matrices(*hi)


# -- JSON descriptors --------------------------------------------------------


def matrix_to_json(m) -> list:
    m = as_cmatrix(m)
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def matrix_from_json(obj, dim: int) -> np.ndarray:
    """Read an N x N matrix written row-major.

    Accepted layouts: nested rows of ``[re, im]`` pairs, nested rows of
    reals, or a flat list of N^2 pairs or reals.
    """
    try:
        arr = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"matrix entries must be numbers or [re, im] pairs: {exc}") from exc
    shape = arr.shape
    if shape == (dim, dim, 2):
        return as_cmatrix(arr[..., 0] + 1j * arr[..., 1])
    if shape == (dim, dim):
        return as_cmatrix(arr)
    if shape == (dim * dim, 2):
        return as_cmatrix((arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim))
    if shape == (dim * dim,) or (dim == 1 and arr.ndim == 0):
        return as_cmatrix(arr.reshape(dim, dim))
    raise ConfigError(f"cannot read a {dim}x{dim} matrix from array of shape {shape}")


def family_from_descriptor(desc: dict) -> CoefficientFamily:
    try:
        kind = desc["kind"]
        dim = int(desc.get("N", 2))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad family descriptor: {exc}") from exc
    try:
        if kind == "constant":
            mats = [matrix_from_json(desc[k], dim) for k in "ABC"]
            return ConstantFamily(dim=dim, A=mats[0], B=mats[1], C=mats[2])
        if kind == "laguerre_christoffel":
            return LaguerreChristoffelFamily(alpha=float(desc.get("alpha", 0.0)), dim=dim)
        if kind == "paper_example_2":
            return PaperExample2Family(dim=dim, c22_exponent=int(desc.get("c22_exponent", 1)))
        if kind == "custom_table":
            seqs = [[matrix_from_json(m, dim) for m in desc[k]] for k in "ABC"]
            return CustomTableFamily(dim=dim, A=tuple(seqs[0]), B=tuple(seqs[1]), C=tuple(seqs[2]))
    except KeyError as exc:
        raise ConfigError(f"family descriptor missing {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad family descriptor: {exc}") from exc
    raise ConfigError(f"unknown family kind {kind!r}")


def scaling_from_descriptor(desc: dict | None, family: CoefficientFamily) -> ScalingSequence:
    """Explicit ``scaling`` object, a custom_table ``D`` list, or the family default."""
    if desc is None:
        return default_scaling(family)
    kind = desc.get("kind")
    if kind == "identity":
        return identity_scaling(family.dim)
    if kind == "scalar_power":
        return scalar_power(family.dim, float(desc.get("p", 1.0)))
    if kind == "paper_laguerre":
        return paper_laguerre_scaling()
    if kind == "paper_example_2":
        return paper_example_2_scaling()
    if kind == "custom_table":
        try:
            return custom_scaling([matrix_from_json(m, family.dim) for m in desc["D"]])
        except KeyError as exc:
            raise ConfigError("custom_table scaling needs a D list") from exc
    raise ConfigError(f"unknown scaling kind {kind!r}")


# -- builtin registry ----------------------------------------------------------


def builtin_families() -> dict[str, tuple[CoefficientFamily, ScalingSequence]]:
    """Named (family, default scaling) pairs exercised by the verify suites."""
    fams = {
        "chebyshev_scalar": constant([[1]], [[0]], [[1]]),
        "constant_limit_triple": constant([[2, 0], [7, 5]], [[0, 0], [0, 8]], [[2, 0], [0, 1]]),
        "laguerre_christoffel": laguerre_christoffel(0.0),
        "paper_example_2": paper_example_2(),
    }
    return {name: (fam, default_scaling(fam)) for name, fam in fams.items()}
