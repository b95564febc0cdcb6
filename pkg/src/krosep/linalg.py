"""Dense symmetric-matrix and Kronecker-structure kernels.

Conventions fixed here and relied on by every other module:

* A matrix over modes ``(d_1, ..., d_K)`` is indexed row-major with mode 1
  slowest, i.e. row ``(i_1, ..., i_K)`` maps to ``i_1*d_2*...*d_K + ... + i_K``.
  This matches ``numpy.kron`` ordering, so ``kron_all``, ``partial_transpose``
  and ``partial_contract`` are mutually consistent.
* Everything is real and symmetric.  Constructors symmetrize via
  ``(A + A^T) / 2`` and reject matrices whose asymmetry exceeds
  floating-point noise.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .errors import DegenerateInput, InvalidArgument, UnsupportedModeCount

_ASYMMETRY_RTOL = 1e-8
_ATOM_NORM_ATOL = 1e-12
_SIGN_FIX_ATOL = 1e-12


class SymMatrix:
    """Dense real symmetric matrix of order n.

    The wrapped array is read-only; treat instances as immutable values.
    """

    __slots__ = ("a",)

    def __init__(self, entries) -> None:
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidArgument(f"expected a square matrix, got shape {a.shape}")
        if a.shape[0] < 1:
            raise InvalidArgument("matrix order must be at least 1")
        if not np.all(np.isfinite(a)):
            raise InvalidArgument("matrix entries must be finite")
        scale = np.linalg.norm(a)
        if np.linalg.norm(a - a.T) > _ASYMMETRY_RTOL * max(scale, 1e-300):
            raise InvalidArgument("matrix is asymmetric beyond tolerance")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self.a = a

    @property
    def order(self) -> int:
        return self.a.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.a))

    def __repr__(self) -> str:
        return f"SymMatrix(order={self.order})"


@dataclass(frozen=True)
class ModeDims:
    """Ordered mode dimensions (d_1, ..., d_K) of a tensor-product space."""

    dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1 or any(d < 1 for d in dims):
            raise InvalidArgument(f"mode dimensions must be positive, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def num_modes(self) -> int:
        return len(self.dims)

    @property
    def order(self) -> int:
        out = 1
        for d in self.dims:
            out *= d
        return out


@dataclass(frozen=True)
class Atom:
    """K-tuple of unit vectors; one extreme point of the separable cone."""

    vectors: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        vecs = []
        for v in self.vectors:
            arr = np.array(v, dtype=float)
            if arr.ndim != 1 or arr.size < 1:
                raise InvalidArgument("atom vectors must be non-empty 1-d arrays")
            if not np.all(np.isfinite(arr)):
                raise InvalidArgument("atom vectors must be finite")
            if abs(np.linalg.norm(arr) - 1.0) > _ATOM_NORM_ATOL:
                raise InvalidArgument("atom vectors must have unit Euclidean norm")
            arr.setflags(write=False)
            vecs.append(arr)
        object.__setattr__(self, "vectors", tuple(vecs))

    def kron_vector(self) -> np.ndarray:
        """The unit vector v_1 (x) ... (x) v_K."""
        return reduce(np.kron, self.vectors)


@dataclass(frozen=True)
class Spectrum:
    """Full eigendecomposition; column k of ``eigenvectors`` pairs ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class SeparableApprox:
    """Convex weights over atoms plus a nonnegative scale.

    Materializes to ``scale * sum_i weights[i] * atom_matrix(atoms[i])``,
    which is Kronecker-separable and PSD by construction.
    """

    atoms: tuple[Atom, ...]
    weights: np.ndarray
    scale: float
    dims: ModeDims

    def __post_init__(self) -> None:
        if len(self.atoms) == 0:
            raise InvalidArgument("a separable approximation needs at least one atom")
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or w.size != len(self.atoms):
            raise InvalidArgument("one weight per atom required")
        if np.any(w < -1e-12) or abs(float(w.sum()) - 1.0) > 1e-10:
            raise InvalidArgument("weights must lie on the probability simplex")
        if self.scale < 0:
            raise InvalidArgument("scale must be nonnegative")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def materialize(self) -> SymMatrix:
        n = self.dims.order
        acc = np.zeros((n, n))
        for atom, w in zip(self.atoms, self.weights):
            v = atom.kron_vector()
            acc += w * np.outer(v, v)
        return SymMatrix(self.scale * acc)


def require_pairing(a: SymMatrix, dims: ModeDims) -> None:
    """Raise unless ``dims`` multiplies out to the order of ``a``."""
    if dims.order != a.order:
        raise InvalidArgument(
            f"mode dimensions {dims.dims} imply order {dims.order}, matrix has order {a.order}"
        )


def require_bipartite(dims: ModeDims) -> None:
    if dims.num_modes != 2:
        raise UnsupportedModeCount(f"operation requires exactly 2 modes, got {dims.num_modes}")


def kron_all(factors: Sequence[SymMatrix]) -> SymMatrix:
    """Kronecker product of the factors in the given order (mode 1 slowest)."""
    if len(factors) == 0:
        raise InvalidArgument("kron_all requires at least one factor")
    return SymMatrix(reduce(np.kron, (f.a for f in factors)))


def hs_inner(a: SymMatrix, b: SymMatrix) -> float:
    """Hilbert-Schmidt (Frobenius) inner product sum_ij A_ij B_ij."""
    if a.order != b.order:
        raise InvalidArgument(f"order mismatch: {a.order} vs {b.order}")
    return float(np.sum(a.a * b.a))


def hs_norm(a: SymMatrix) -> float:
    """Hilbert-Schmidt norm, sqrt(hs_inner(A, A))."""
    return float(np.linalg.norm(a.a))


def trace_normalize(a: SymMatrix) -> SymMatrix:
    """Return A / trace(A); requires a safely positive trace."""
    tr = a.trace()
    scale = hs_norm(a)
    if scale == 0.0 or tr <= 1e-12 * scale:
        raise DegenerateInput("matrix trace is not safely positive")
    return SymMatrix(a.a / tr)


def sym_eigen(a: SymMatrix) -> Spectrum:
    """Full spectrum with eigenvalues in non-increasing order.

    Eigenvector signs are canonicalized (first non-tiny component positive)
    so repeated runs and downstream tie-breaking are deterministic.
    """
    vals, vecs = np.linalg.eigh(a.a)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        nz = np.flatnonzero(np.abs(col) > _SIGN_FIX_ATOL)
        if nz.size and col[nz[0]] < 0:
            vecs[:, k] = -col
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return Spectrum(vals, vecs)


def partial_transpose(a: SymMatrix, dims: ModeDims) -> SymMatrix:
    """Transpose the second tensor factor of a bipartite operator.

    With the 4-index view A[(a, a'), (b, b')], returns the matrix whose
    [(a, a'), (b, b')] entry is A[(a, b'), (b, a')].
    """
    require_bipartite(dims)
    require_pairing(a, dims)
    d1, d2 = dims.dims
    t = a.a.reshape(d1, d2, d1, d2)
    return SymMatrix(t.transpose(0, 3, 2, 1).reshape(a.order, a.order))


_SUBSCRIPTS: dict[tuple[int, int], str] = {}


def _contract_subscripts(k: int, mode: int) -> str:
    try:
        return _SUBSCRIPTS[(k, mode)]
    except KeyError:
        row = string.ascii_lowercase[:k]
        col = string.ascii_lowercase[k : 2 * k]
        operands = [row + col]
        for j in range(k):
            if j != mode:
                operands.append(row[j])
                operands.append(col[j])
        subs = ",".join(operands) + "->" + row[mode] + col[mode]
        _SUBSCRIPTS[(k, mode)] = subs
        return subs


def _contract_all_but(tensor: np.ndarray, dims: tuple[int, ...], mode: int,
                      vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Contract every mode j != mode of the 2K-index view against v_j v_j^T.

    ``tensor`` must already be reshaped to ``dims + dims`` (row modes first).
    """
    k = len(dims)
    if k == 2:
        other = vectors[1 - mode]
        if mode == 0:
            return np.einsum("acbd,c,d->ab", tensor, other, other)
        return np.einsum("acbd,a,b->cd", tensor, other, other)
    args = []
    for j in range(k):
        if j != mode:
            args.append(vectors[j])
            args.append(vectors[j])
    return np.einsum(_contract_subscripts(k, mode), tensor, *args, optimize=True)


def partial_contract(a: SymMatrix, atom: Atom, mode: int, dims: ModeDims) -> SymMatrix:
    """Contract all modes except ``mode`` (0-based) against the atom's vectors.

    For K = 2 and mode 0: result[a][b] = sum_{a', b'} A[(a,a'),(b,b')] v2[a'] v2[b'].
    The mode-``mode`` atom vector is ignored.
    """
    require_pairing(a, dims)
    if not 0 <= mode < dims.num_modes:
        raise InvalidArgument(f"mode must be in [0, {dims.num_modes}), got {mode}")
    if len(atom.vectors) != dims.num_modes:
        raise InvalidArgument("atom has a vector count different from the mode count")
    for v, d in zip(atom.vectors, dims.dims):
        if v.size != d:
            raise InvalidArgument("atom vector lengths must match the mode dimensions")
    tensor = a.a.reshape(dims.dims + dims.dims)
    out = _contract_all_but(tensor, dims.dims, mode, atom.vectors)
    return SymMatrix(0.5 * (out + out.T))


def atom_matrix(atom: Atom, dims: ModeDims) -> SymMatrix:
    """The rank-1 matrix (kron of vectors)(kron of vectors)^T; PSD, trace 1."""
    if len(atom.vectors) != dims.num_modes:
        raise InvalidArgument("atom has a vector count different from the mode count")
    for v, d in zip(atom.vectors, dims.dims):
        if v.size != d:
            raise InvalidArgument("atom vector lengths must match the mode dimensions")
        if abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise InvalidArgument("atom vectors must be unit norm")
    w = atom.kron_vector()
    return SymMatrix(np.outer(w, w))
