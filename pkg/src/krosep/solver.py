"""Frank-Wolfe engine for nearest-separable covariance approximation.

The driver normalizes the target to unit trace, walks the unit-trace
separable body by repeatedly asking a linear minimization oracle (LMO) for
the best rank-1 separable atom against the current residual, mixes it in
with one of three stepsize rules, and finally projects the target onto the
nonnegative ray through the last iterate.

The LMO maximizes ``<atom_matrix(V), G>`` by alternating maximization: each
mode vector is replaced in turn by the leading eigenvector of the matrix
obtained by contracting all other modes of ``G`` against the current
vectors.  That objective is non-decreasing across sweeps; with random
restarts the best run wins.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateInput, InvalidArgument, NotPositiveSemidefinite
from .linalg import (
    Atom,
    ModeDims,
    SeparableApprox,
    SymMatrix,
    _contract_all_but,
    hs_inner,
    require_pairing,
)
from .models import random_unit_vector
from .rng import PURPOSE_SOLVER, substream

log = logging.getLogger(__name__)

_DEDUP_HS_DIST = 1e-10
_SIGN_FIX_ATOL = 1e-12


class StepsizeRule(str, Enum):
    FIXED = "fixed"
    LINE_SEARCH = "linesearch"
    FULLY_CORRECTIVE = "fully-corrective"


@dataclass
class SolverConfig:
    """Knobs for :func:`solve`; defaults match the desk-scale experiments."""

    max_iters: int = 200
    rule: StepsizeRule = StepsizeRule.FULLY_CORRECTIVE
    lmo_sweeps: int = 50
    lmo_restarts: int = 1
    lmo_tol: float = 1e-12
    fc_qp_iters: int = 10000
    fc_qp_tol: float = 1e-10
    seed: int = 0
    record_trajectory: bool = True
    early_stop_tol: float | None = None  # off by default: run exactly max_iters

    def validate(self) -> None:
        if self.max_iters < 1:
            raise InvalidArgument("max_iters must be at least 1")
        if self.lmo_sweeps < 1 or self.lmo_restarts < 1:
            raise InvalidArgument("lmo_sweeps and lmo_restarts must be at least 1")
        if self.lmo_tol <= 0 or self.fc_qp_tol <= 0:
            raise InvalidArgument("tolerances must be positive")
        if self.fc_qp_iters < 1:
            raise InvalidArgument("fc_qp_iters must be at least 1")
        self.rule = StepsizeRule(self.rule)


@dataclass
class SolveReport:
    """Result of one solve: decomposition, distances, per-iteration records."""

    approx: SeparableApprox
    final_matrix: SymMatrix
    normalized_sq_distance: float
    final_f: float
    iterations_run: int
    lmo_calls: int
    wall_ms: float
    objective_trajectory: list[float] | None = None
    gammas: list[float] | None = None
    lmo_objectives: list[float] | None = None
    cone_sq_distances: list[float] | None = None


IterationCallback = Callable[[int, np.ndarray, np.ndarray, np.ndarray, Atom, float, float], None]


def fixed_gamma(t: int) -> float:
    """The open-loop stepsize 2 / (t + 2)."""
    return 2.0 / (t + 2.0)


def line_search_gamma(current: SymMatrix, atom_mat: SymMatrix, target: SymMatrix) -> float:
    """Exact minimizer over [0, 1] of ||(1-g) current + g atom_mat - target||^2."""
    if not current.order == atom_mat.order == target.order:
        raise InvalidArgument("line search requires matrices of equal order")
    return _line_search_gamma(current.a, atom_mat.a, target.a)


def _line_search_gamma(current: np.ndarray, atom_mat: np.ndarray, target: np.ndarray) -> float:
    direction = atom_mat - current
    denom = float(np.sum(direction * direction))
    if denom <= 1e-28:  # ||atom - current|| <= 1e-14
        return 0.0
    numer = float(np.sum((target - current) * direction))
    return min(1.0, max(0.0, numer / denom))


def _proj_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, v.size + 1) > (css - 1.0))[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _pg_simplex(gram: np.ndarray, lin: np.ndarray, w0: np.ndarray, step: float,
                tol: float, max_iters: int) -> np.ndarray:
    """Projected gradient for min ||sum w_i A_i - T||^2 over the simplex.

    ``gram`` and ``lin`` hold <A_i, A_j> and <A_i, T>; ``step`` must be at
    most 1/lambda_max(gram), which keeps every iteration a descent step.
    Stops when the projected-gradient norm drops below ``tol``.
    """
    w = w0
    for _ in range(max_iters):
        g = gram @ w - lin
        w_next = _proj_simplex(w - step * g)
        moved = float(np.linalg.norm(w - w_next))
        w = w_next
        if moved <= tol * step:
            break
    return w


def fully_corrective_weights(atom_mats: Sequence[SymMatrix], target: SymMatrix,
                             config: SolverConfig | None = None,
                             warm_start: np.ndarray | None = None) -> np.ndarray:
    """Simplex weights minimizing ||sum_i w_i atom_mats[i] - target||^2.

    Solved by projected gradient with the exact Lipschitz step
    1/lambda_max(Gram).  With ``warm_start`` the returned objective never
    exceeds the objective at the starting weights.
    """
    if len(atom_mats) == 0:
        raise InvalidArgument("fully_corrective_weights requires at least one atom")
    config = config or SolverConfig()
    for m in atom_mats:
        if m.order != target.order:
            raise InvalidArgument("atom matrices must match the target order")
    flat = np.stack([m.a.ravel() for m in atom_mats])
    gram = flat @ flat.T
    lin = flat @ target.a.ravel()
    lam_max = float(np.linalg.eigvalsh(gram)[-1])
    step = 1.0 / max(lam_max, 1e-300)
    if warm_start is None:
        w0 = np.full(len(atom_mats), 1.0 / len(atom_mats))
    else:
        w0 = _proj_simplex(np.asarray(warm_start, dtype=float))
    return _pg_simplex(gram, lin, w0, step, config.fc_qp_tol, config.fc_qp_iters)


def rescale_to_cone(sigma: SymMatrix, unit_trace_approx: SeparableApprox) -> SeparableApprox:
    """Scale a unit-trace decomposition to the HS-nearest point to ``sigma``
    on the nonnegative ray it spans."""
    if abs(unit_trace_approx.scale - 1.0) > 1e-9:
        raise InvalidArgument("rescale_to_cone expects a unit-scale decomposition")
    materialized = unit_trace_approx.materialize()
    denom = hs_inner(materialized, materialized)
    if denom <= 1e-300:
        raise DegenerateInput("decomposition materializes to the zero matrix")
    scale = max(0.0, hs_inner(sigma, materialized) / denom)
    return SeparableApprox(unit_trace_approx.atoms, unit_trace_approx.weights, scale,
                           unit_trace_approx.dims)


def _top_eigvec(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Leading eigenvector (canonical sign) and eigenvalue of a small symmetric matrix."""
    d = m.shape[0]
    if d == 1:
        return np.ones(1), float(m[0, 0])
    if d == 2:
        a = float(m[0, 0])
        b = 0.5 * (float(m[0, 1]) + float(m[1, 0]))
        c = float(m[1, 1])
        disc = math.hypot(a - c, 2.0 * b)
        lam = 0.5 * ((a + c) + disc)
        x1, y1 = lam - c, b
        x2, y2 = b, lam - a
        if x1 * x1 + y1 * y1 >= x2 * x2 + y2 * y2:
            x, y = x1, y1
        else:
            x, y = x2, y2
        norm = math.hypot(x, y)
        if norm < 1e-300:  # multiple of the identity: any unit vector is optimal
            v = np.array([1.0, 0.0])
        else:
            v = np.array([x / norm, y / norm])
        lam = float(v @ (0.5 * (m + m.T)) @ v)
    else:
        sym = 0.5 * (m + m.T)
        vals, vecs = np.linalg.eigh(sym)
        v = vecs[:, -1].copy()
        lam = float(vals[-1])
    nz = np.flatnonzero(np.abs(v) > _SIGN_FIX_ATOL)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v, lam


def _alternating_max(tensor: np.ndarray, dims: tuple[int, ...],
                     init_vectors: Sequence[np.ndarray], sweeps: int,
                     tol: float) -> tuple[list[np.ndarray], float, list[float]]:
    """Coordinate-ascent maximization of <atom(V), G> over unit mode vectors.

    ``tensor`` is G reshaped to ``dims + dims``.  Returns the vectors, the
    final objective, and the per-sweep objective values (non-decreasing).
    """
    vectors = [np.asarray(v, dtype=float) for v in init_vectors]
    k = len(dims)
    best = -math.inf
    sweep_objectives: list[float] = []
    for _ in range(sweeps):
        obj = -math.inf
        for i in range(k):
            contracted = _contract_all_but(tensor, dims, i, vectors)
            vectors[i], obj = _top_eigvec(contracted)
        sweep_objectives.append(obj)
        if obj - best < tol:
            best = max(best, obj)
            break
        best = obj
    return vectors, best, sweep_objectives


def _lmo_vectors(tensor: np.ndarray, dims: tuple[int, ...], config: SolverConfig,
                 gen: np.random.Generator) -> tuple[list[np.ndarray], float]:
    """Best atom vectors over ``lmo_restarts`` independently initialized runs."""
    best_obj = -math.inf
    best_vectors: list[np.ndarray] | None = None
    for _ in range(config.lmo_restarts):
        init = [random_unit_vector(gen, d) for d in dims]
        vectors, obj, _ = _alternating_max(tensor, dims, init, config.lmo_sweeps, config.lmo_tol)
        if obj > best_obj:
            best_obj = obj
            best_vectors = vectors
    assert best_vectors is not None
    return best_vectors, best_obj


def lmo(g: SymMatrix, dims: ModeDims, config: SolverConfig,
        rng_substream: np.random.Generator) -> Atom:
    """Atom approximately maximizing ``<atom_matrix(V), G>``.

    In the solve loop ``G`` is the negated gradient direction (unit-trace
    target minus current iterate), so the returned atom minimizes the
    linearized objective.  If the contracted matrices are negative definite
    the sweep still takes the top eigenvector: the atom objective equals the
    largest eigenvalue regardless of its sign.
    """
    require_pairing(g, dims)
    config.validate()
    tensor = g.a.reshape(dims.dims + dims.dims)
    vectors, _ = _lmo_vectors(tensor, dims.dims, config, rng_substream)
    return Atom(tuple(vectors))


class _AtomBook:
    """Active atoms, their flattened matrices and weights.

    The Gram matrix, linear term and Lipschitz constant are maintained only
    when ``with_gram`` is set (the fully corrective rule); the other rules
    need the book just for deduplication and the final decomposition.
    """

    def __init__(self, n: int, target_flat: np.ndarray, with_gram: bool) -> None:
        self.n = n
        self.target_flat = target_flat
        self.with_gram = with_gram
        self.atoms: list[Atom] = []
        self.flat = np.empty((0, n * n))
        self.gram = np.empty((0, 0))
        self.lin = np.empty(0)
        self.weights = np.empty(0)
        self.lipschitz = 1.0

    def find(self, z_flat: np.ndarray) -> int | None:
        if not self.atoms:
            return None
        sq = np.sum((self.flat - z_flat) ** 2, axis=1)
        j = int(np.argmin(sq))
        return j if sq[j] < _DEDUP_HS_DIST ** 2 else None

    def append(self, atom: Atom, z_flat: np.ndarray, weight: float) -> int:
        m = len(self.atoms)
        if self.with_gram:
            overlaps = self.flat @ z_flat
            gram = np.empty((m + 1, m + 1))
            gram[:m, :m] = self.gram
            gram[m, :m] = overlaps
            gram[:m, m] = overlaps
            gram[m, m] = float(z_flat @ z_flat)
            self.gram = gram
            self.lin = np.append(self.lin, float(z_flat @ self.target_flat))
        self.flat = np.vstack([self.flat, z_flat])
        self.atoms.append(atom)
        self.weights = np.append(self.weights, weight)
        if self.with_gram:
            self._refresh_lipschitz()
        return m

    def prune(self, keep: np.ndarray) -> None:
        if keep.all():
            return
        idx = np.flatnonzero(keep)
        self.atoms = [self.atoms[i] for i in idx]
        self.flat = self.flat[idx]
        self.weights = self.weights[idx]
        if self.with_gram:
            self.gram = self.gram[np.ix_(idx, idx)]
            self.lin = self.lin[idx]
            self._refresh_lipschitz()

    def _refresh_lipschitz(self) -> None:
        self.lipschitz = max(float(np.linalg.eigvalsh(self.gram)[-1]), 1e-300)

    def mixture(self) -> np.ndarray:
        return (self.weights @ self.flat).reshape(self.n, self.n)


def _clip_psd(a: np.ndarray) -> np.ndarray:
    """Reject genuinely indefinite input; clip negative eigenvalue dust to zero."""
    vals, vecs = np.linalg.eigh(a)
    lam_min, lam_max = float(vals[0]), float(vals[-1])
    if lam_min < -1e-9 * max(1.0, lam_max):
        raise NotPositiveSemidefinite("input is not PSD within tolerance")
    if lam_min < 0.0:
        log.debug("clipping negative eigenvalue dust (min eigenvalue %.3e)", lam_min)
        clipped = (vecs * np.clip(vals, 0.0, None)) @ vecs.T
        return 0.5 * (clipped + clipped.T)
    return a


def solve(sigma: SymMatrix, dims: ModeDims, config: SolverConfig | None = None,
          iteration_callback: IterationCallback | None = None) -> SolveReport:
    """Run the Frank-Wolfe separable approximation for ``config.max_iters`` steps.

    The iterate starts at a single random atom, stays a convex combination
    of atoms throughout, and is finally rescaled onto the nonnegative cone
    ray nearest to ``sigma``.  The optional callback receives
    ``(t, shat_before, shat_after, weights, atom, gamma, lmo_objective)``
    with ndarray views of the unit-trace iterates.
    """
    config = config or SolverConfig()
    config.validate()
    require_pairing(sigma, dims)

    a = sigma.a
    hs = float(np.linalg.norm(a))
    if hs == 0.0:
        raise DegenerateInput("cannot approximate the zero matrix")
    a = _clip_psd(a)
    tr = float(np.trace(a))
    if tr <= 1e-12 * hs:
        raise DegenerateInput("matrix trace is not safely positive")

    start = time.perf_counter()
    n = sigma.order
    mode_dims = dims.dims
    sbar = a / tr
    sbar_flat = sbar.ravel()
    tensor_shape = mode_dims + mode_dims
    gen = substream(config.seed, purpose=PURPOSE_SOLVER)
    rule = config.rule

    book = _AtomBook(n, sbar_flat, with_gram=rule == StepsizeRule.FULLY_CORRECTIVE)
    init_atom = Atom(tuple(random_unit_vector(gen, d) for d in mode_dims))
    v0 = init_atom.kron_vector()
    book.append(init_atom, np.outer(v0, v0).ravel(), 1.0)
    shat = book.mixture()

    record = config.record_trajectory
    sigma_flat = a.ravel()
    sigma_sq = float(sigma_flat @ sigma_flat)

    def f_value(mat: np.ndarray) -> float:
        diff = mat.ravel() - sbar_flat
        return float(diff @ diff)

    def cone_sq_distance(mat_flat: np.ndarray) -> float:
        s1 = float(sigma_flat @ mat_flat)
        s2 = float(mat_flat @ mat_flat)
        scale = max(0.0, s1 / s2)
        return scale * scale * s2 - 2.0 * scale * s1 + sigma_sq

    final_f = f_value(shat)
    trajectory = [final_f] if record else None
    cone_traj = [cone_sq_distance(shat.ravel())] if record else None
    gammas: list[float] | None = [] if record else None
    lmo_objs: list[float] | None = [] if record else None

    iterations = 0
    for t in range(config.max_iters):
        g = sbar - shat
        vectors, _ = _lmo_vectors(g.reshape(tensor_shape), mode_dims, config, gen)
        atom = Atom(tuple(vectors))
        z_vec = atom.kron_vector()
        z = np.outer(z_vec, z_vec)
        z_flat = z.ravel()
        lmo_objective = float(z_flat @ g.ravel())
        shat_before = shat

        if rule == StepsizeRule.FULLY_CORRECTIVE:
            j = book.find(z_flat)
            if j is None:
                j = book.append(atom, z_flat, 0.0)
            step = 1.0 / book.lipschitz
            book.weights = _pg_simplex(book.gram, book.lin, book.weights, step,
                                       config.fc_qp_tol, config.fc_qp_iters)
            gamma = float(book.weights[j])
            keep = book.weights > 1e-14
            keep[j] = True  # keep the fresh atom even at zero weight
            book.prune(keep)
            book.weights = book.weights / float(book.weights.sum())
            shat = book.mixture()
        else:
            gamma = fixed_gamma(t) if rule == StepsizeRule.FIXED else \
                _line_search_gamma(shat, z, sbar)
            book.weights = book.weights * (1.0 - gamma)
            j = book.find(z_flat)
            if j is None:
                book.append(atom, z_flat, gamma)
            else:
                book.weights[j] += gamma
            shat = (1.0 - gamma) * shat + gamma * z

        iterations = t + 1
        f_t = f_value(shat)
        if record:
            trajectory.append(f_t)
            cone_traj.append(cone_sq_distance(shat.ravel()))
            gammas.append(gamma)
            lmo_objs.append(lmo_objective)
        if iteration_callback is not None:
            iteration_callback(t, shat_before, shat, book.weights, atom, gamma, lmo_objective)
        stop = config.early_stop_tol is not None and final_f - f_t < config.early_stop_tol
        final_f = f_t
        if stop:
            break

    weight_sum = float(book.weights.sum())
    shat_flat = shat.ravel()
    s1 = float(sigma_flat @ shat_flat)
    s2 = float(shat_flat @ shat_flat)
    scale = max(0.0, s1 / s2)
    approx = SeparableApprox(tuple(book.atoms), book.weights / weight_sum, scale, dims)
    final = SymMatrix(scale * shat)
    normalized = cone_sq_distance(shat_flat) / sigma_sq
    wall_ms = (time.perf_counter() - start) * 1000.0

    return SolveReport(
        approx=approx,
        final_matrix=final,
        normalized_sq_distance=max(0.0, normalized),
        final_f=final_f,
        iterations_run=iterations,
        lmo_calls=iterations,
        wall_ms=wall_ms,
        objective_trajectory=trajectory,
        gammas=gammas,
        lmo_objectives=lmo_objs,
        cone_sq_distances=cone_traj,
    )
