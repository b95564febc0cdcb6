"""Covariance generators: random separable, Bell family, Wishart, Toeplitz.

All random generators are deterministic functions of a 64-bit seed; see
:mod:`krosep.rng` for the substream scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import InvalidArgument
from .linalg import Atom, ModeDims, SeparableApprox, SymMatrix
from .rng import PURPOSE_MODEL, gaussians, substream

BELL_DIMS = ModeDims((2, 2))

_BELL_BASE = np.array(
    [
        [1.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 1.0],
    ]
)

MODEL_KINDS = ("separable", "bell", "wishart", "toeplitz")


def random_unit_vector(gen: np.random.Generator, d: int) -> np.ndarray:
    """Uniform draw from the unit sphere (normalized Gaussian, resampled if tiny)."""
    while True:
        v = gaussians(gen, d)
        norm = float(np.linalg.norm(v))
        if norm >= 1e-12:
            return v / norm


def random_unit_atom(dims: ModeDims, gen: np.random.Generator) -> Atom:
    """One uniformly random atom: independent unit vectors, one per mode."""
    return Atom(tuple(random_unit_vector(gen, d) for d in dims.dims))


def gen_separable(dims: ModeDims, rank: int, seed: int) -> tuple[SymMatrix, SeparableApprox]:
    """Random separable covariance: sum of ``rank`` self outer products of
    Kronecker products of raw (unnormalized) standard Gaussian mode vectors.

    Returns the matrix together with the generating decomposition (atoms are
    the normalized vectors; the squared norms become weights and scale), so
    the ground truth is recoverable exactly.
    """
    if rank < 1:
        raise InvalidArgument("rank must be at least 1")
    if dims.num_modes < 2:
        raise InvalidArgument("separable model needs at least 2 modes")
    gen = substream(seed, purpose=PURPOSE_MODEL)
    n = dims.order
    total = np.zeros((n, n))
    atoms: list[Atom] = []
    scales: list[float] = []
    for _ in range(rank):
        vecs = []
        for d in dims.dims:
            v = gaussians(gen, d)
            while float(np.linalg.norm(v)) < 1e-12:
                v = gaussians(gen, d)
            vecs.append(v)
        w = reduce(np.kron, vecs)
        total += np.outer(w, w)
        scale = 1.0
        for v in vecs:
            scale *= float(v @ v)
        scales.append(scale)
        atoms.append(Atom(tuple(v / np.linalg.norm(v) for v in vecs)))
    scale_total = float(sum(scales))
    weights = np.array(scales) / scale_total
    return SymMatrix(total), SeparableApprox(tuple(atoms), weights, scale_total, dims)


def bell(lam: float) -> SymMatrix:
    """The 4x4 maximally-correlated rank-1 covariance plus ``lam`` times identity.

    Eigenvalues are ``2 + lam`` and ``lam`` (multiplicity 3); dims are (2, 2).
    """
    if lam < 0:
        raise InvalidArgument("lam must be nonnegative")
    return SymMatrix(_BELL_BASE + lam * np.eye(4))


def gen_wishart(d1: int, d2: int, samples: int, seed: int) -> SymMatrix:
    """Unnormalized Wishart draw: sum of ``samples`` Gaussian outer products in R^{d1 d2}."""
    if samples < 1:
        raise InvalidArgument("samples must be at least 1")
    if d1 < 1 or d2 < 1:
        raise InvalidArgument("mode dimensions must be positive")
    g = gaussians(substream(seed, purpose=PURPOSE_MODEL), (samples, d1 * d2))
    return SymMatrix(g.T @ g)


def gen_toeplitz(d1: int, d2: int, rho: float) -> SymMatrix:
    """AR(1) correlation matrix of order d1*d2 with entries rho^|i-j|."""
    if not abs(rho) < 1:
        raise InvalidArgument("|rho| must be strictly less than 1")
    if d1 < 1 or d2 < 1:
        raise InvalidArgument("mode dimensions must be positive")
    idx = np.arange(d1 * d2)
    return SymMatrix(float(rho) ** np.abs(idx[:, None] - idx[None, :]))


@dataclass(frozen=True)
class ModelSpec:
    """A fully parameterized covariance model; parameters present iff the kind needs them."""

    kind: str
    dims: ModeDims
    rank: int | None = None
    lam: float | None = None
    samples: int | None = None
    rho: float | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise InvalidArgument(f"unknown model kind {self.kind!r}")
        required = {
            "separable": "rank",
            "bell": "lam",
            "wishart": "samples",
            "toeplitz": "rho",
        }[self.kind]
        for name in ("rank", "lam", "samples", "rho"):
            value = getattr(self, name)
            if name == required and value is None:
                raise InvalidArgument(f"model {self.kind!r} requires parameter {name!r}")
            if name != required and value is not None:
                raise InvalidArgument(f"model {self.kind!r} does not take parameter {name!r}")
        if self.kind == "bell" and self.dims.dims != (2, 2):
            raise InvalidArgument("bell model is defined on dims (2, 2)")
        if self.kind in ("wishart", "toeplitz") and self.dims.num_modes != 2:
            raise InvalidArgument(f"model {self.kind!r} is bipartite; dims must have 2 modes")
        if self.rho is not None and not abs(self.rho) < 1:
            raise InvalidArgument("|rho| must be strictly less than 1")
        if self.lam is not None and self.lam < 0:
            raise InvalidArgument("lam must be nonnegative")
        if self.rank is not None and self.rank < 1:
            raise InvalidArgument("rank must be at least 1")
        if self.samples is not None and self.samples < 1:
            raise InvalidArgument("samples must be at least 1")

    @property
    def is_random(self) -> bool:
        return self.kind in ("separable", "wishart")

    def params_label(self) -> str:
        """Canonical parameter string used in CSV metadata columns."""
        parts = ["x".join(str(d) for d in self.dims.dims)]
        if self.rank is not None:
            parts.append(f"r={self.rank}")
        if self.lam is not None:
            parts.append(f"lam={self.lam:g}")
        if self.samples is not None:
            parts.append(f"n={self.samples}")
        if self.rho is not None:
            parts.append(f"rho={self.rho:g}")
        return ";".join(parts)


def instantiate(spec: ModelSpec, trial: int = 0) -> SymMatrix:
    """Draw the covariance for one trial; deterministic kinds ignore ``trial``."""
    if spec.kind == "separable":
        matrix, _ = gen_separable(spec.dims, spec.rank, spec.seed ^ trial)
        return matrix
    if spec.kind == "bell":
        return bell(spec.lam)
    if spec.kind == "wishart":
        d1, d2 = spec.dims.dims
        return gen_wishart(d1, d2, spec.samples, spec.seed ^ trial)
    d1, d2 = spec.dims.dims
    return gen_toeplitz(d1, d2, spec.rho)
