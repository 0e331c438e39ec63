"""Numerical rank with an explicit singular-value gap certificate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankAmbiguous

REL_TOL = 1e-6
GAP = 1e3


@dataclass(frozen=True)
class RankResult:
    rank: int
    singular_values: tuple
    gap: float  # sigma_r / sigma_{r+1}; inf when nothing follows or sigma_{r+1} = 0
    certified: bool

    def candidates(self) -> tuple:
        if self.certified:
            return (self.rank,)
        sv = np.asarray(self.singular_values)
        ratios = sv[:-1] / np.maximum(sv[1:], np.finfo(float).tiny)
        best = int(np.argmax(ratios)) + 1 if len(ratios) else self.rank
        return tuple(sorted({self.rank, best if best != self.rank else self.rank + 1}))


def numerical_rank(A, rel_tol: float = REL_TOL, gap: float = GAP, abs_tol: float = 0.0) -> RankResult:
    """Count singular values above ``max(rel_tol * sigma_1, abs_tol)`` and certify the gap.

    ``abs_tol`` is a noise floor: when everything sits below it the rank is 0,
    certified if ``sigma_1`` is ``gap`` times smaller than the floor.
    """
    A = np.asarray(A)
    if A.size == 0:
        return RankResult(0, (), np.inf, True)
    sv = np.linalg.svd(A, compute_uv=False)
    s1 = sv[0]
    if s1 == 0:
        return RankResult(0, tuple(sv), np.inf, True)
    r = int(np.sum(sv > max(rel_tol * s1, abs_tol)))
    if r == 0:
        ratio = abs_tol / s1
    elif r == len(sv):
        ratio = np.inf
    else:
        ratio = np.inf if sv[r] == 0 else sv[r - 1] / sv[r]
    return RankResult(r, tuple(float(x) for x in sv), float(ratio), bool(ratio > gap))


def certified_rank(A, rel_tol: float = REL_TOL, gap: float = GAP, abs_tol: float = 0.0) -> RankResult:
    res = numerical_rank(A, rel_tol, gap, abs_tol)
    if not res.certified:
        raise RankAmbiguous(
            f"no singular-value gap above {gap:.0e} (ratio {res.gap:.3e} at rank {res.rank})",
            candidates=res.candidates(),
            singular_values=res.singular_values,
        )
    return res
