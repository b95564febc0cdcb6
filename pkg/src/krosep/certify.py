"""Decidable separability certificates for bipartite covariances.

Three checks are combined into a single verdict:

* the positive-partial-transpose (Peres-Horodecki) criterion, necessary in
  general and decisive (necessary and sufficient) when the product dimension
  is at most 6 or the matrix rank is at most max(d1, d2);
* the Hilbert-Schmidt ball condition around the normalized identity
  (Gurvits-Barnum), sufficient;
* the minimum-eigenvalue floor condition, sufficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateInput, NotPositiveSemidefinite
from .linalg import (
    ModeDims,
    SymMatrix,
    hs_norm,
    partial_transpose,
    require_bipartite,
    require_pairing,
    trace_normalize,
)

PSD_RTOL = 1e-9
RANK_RTOL = 1e-8


class VerdictStatus(str, Enum):
    SEPARABLE = "Separable"
    NOT_SEPARABLE = "NotSeparable"
    UNKNOWN = "Unknown"


class VerdictReason(str, Enum):
    BALL_CONDITION = "BallCondition"
    MIN_EIG_CONDITION = "MinEigCondition"
    PPT_VIOLATED = "PptViolated"
    PPT_LOW_DIM = "PptLowDim"
    PPT_LOW_RANK = "PptLowRank"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Verdict:
    """Outcome of :func:`classify` with the margin of the deciding inequality."""

    status: VerdictStatus
    reason: VerdictReason
    witness: float | None


def cert_ball(s: SymMatrix, dims: ModeDims) -> tuple[bool, float]:
    """Ball condition: ||S/tr S - I/n||^2 <= 1/(n(n-1)) with n = d1*d2.

    Returns (holds, margin) where margin = rhs - lhs.
    """
    require_bipartite(dims)
    require_pairing(s, dims)
    n = s.order
    normalized = trace_normalize(s)
    if n == 1:
        return True, math.inf
    lhs = float(np.sum((normalized.a - np.eye(n) / n) ** 2))
    rhs = 1.0 / (n * (n - 1))
    return lhs <= rhs, rhs - lhs


def cert_min_eig(s: SymMatrix, dims: ModeDims) -> tuple[bool, float]:
    """Eigenvalue floor condition: lambda_min(S/tr S) >= 1/(n + 2).

    Returns (holds, margin) where margin = lambda_min - 1/(n + 2).
    """
    require_bipartite(dims)
    require_pairing(s, dims)
    n = s.order
    normalized = trace_normalize(s)
    lam_min = float(np.linalg.eigvalsh(normalized.a)[0])
    threshold = 1.0 / (n + 2)
    return lam_min >= threshold, lam_min - threshold


def ppt_test(s: SymMatrix, dims: ModeDims) -> tuple[bool, float]:
    """Positive-partial-transpose check.

    Returns (holds, min_pt_eig); the test passes when the smallest eigenvalue
    of the partial transpose is above ``-PSD_RTOL * max(1, lambda_max)``.
    """
    pt = partial_transpose(s, dims)
    vals = np.linalg.eigvalsh(pt.a)
    lam_min, lam_max = float(vals[0]), float(vals[-1])
    return lam_min >= -PSD_RTOL * max(1.0, lam_max), lam_min


def numerical_rank(s: SymMatrix) -> int:
    """Count of eigenvalues above ``RANK_RTOL`` times the largest eigenvalue."""
    vals = np.linalg.eigvalsh(s.a)
    lam_max = float(vals[-1])
    if lam_max <= 0:
        return 0
    return int(np.count_nonzero(vals > RANK_RTOL * lam_max))


def classify(s: SymMatrix, dims: ModeDims) -> Verdict:
    """Combined separability verdict for a PSD bipartite covariance.

    Branch order: a PPT violation settles non-separability outright.  When
    PPT holds it is checked first in the regimes where it is decisive
    (product dimension <= 6, or rank <= max mode dimension); the conservative
    ball and eigenvalue-floor sufficient conditions only matter beyond those
    regimes.  Anything else is Unknown.
    """
    require_bipartite(dims)
    require_pairing(s, dims)
    vals = np.linalg.eigvalsh(s.a)
    lam_min, lam_max = float(vals[0]), float(vals[-1])
    if lam_min < -PSD_RTOL * max(1.0, lam_max):
        raise NotPositiveSemidefinite("certificates apply to PSD covariances only")
    if s.trace() <= 1e-12 * max(hs_norm(s), 1e-300):
        raise DegenerateInput("matrix trace is not safely positive")

    ppt_holds, min_pt_eig = ppt_test(s, dims)
    if not ppt_holds:
        return Verdict(VerdictStatus.NOT_SEPARABLE, VerdictReason.PPT_VIOLATED, min_pt_eig)

    d1, d2 = dims.dims
    if d1 * d2 <= 6:
        return Verdict(VerdictStatus.SEPARABLE, VerdictReason.PPT_LOW_DIM, min_pt_eig)
    if numerical_rank(s) <= max(d1, d2):
        return Verdict(VerdictStatus.SEPARABLE, VerdictReason.PPT_LOW_RANK, min_pt_eig)

    holds, margin = cert_ball(s, dims)
    if holds:
        return Verdict(VerdictStatus.SEPARABLE, VerdictReason.BALL_CONDITION, margin)
    holds, margin = cert_min_eig(s, dims)
    if holds:
        return Verdict(VerdictStatus.SEPARABLE, VerdictReason.MIN_EIG_CONDITION, margin)
    return Verdict(VerdictStatus.UNKNOWN, VerdictReason.INCONCLUSIVE, None)
