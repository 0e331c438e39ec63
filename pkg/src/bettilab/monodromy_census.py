"""Census of minuscule symplectic cases for a simple factor of the monodromy.

For each classical series and rank ``l``, a symplectic minuscule
representation of dimension ``2d`` taken with ``m`` (odd) tensor factors acts
on ``2g = (2d)^m``; the case is feasible when the real dimension of the
Hermitian domain is at least ``2g``.  Only ``C_l`` with ``m = 1`` survives.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import asdict, dataclass
from math import comb

from .errors import CensusViolation, InvalidParam


class Series(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D_REAL = "D_real"
    D_QUATERNION = "D_quaternion"


# smallest rank allowed by the congruences (C has no congruence)
FLOORS = {Series.A: 5, Series.B: 5, Series.C: 1, Series.D_REAL: 6, Series.D_QUATERNION: 6}


def rep_dim(series: Series, ell: int) -> int:
    """``2d`` for the symplectic minuscule representation."""
    if series is Series.A:
        if (ell + 1) % 2:
            raise InvalidParam("A-series needs l odd")
        return comb(ell + 1, (ell + 1) // 2)
    if series is Series.B:
        return 2**ell
    if series is Series.C:
        return 2 * ell
    return 2 ** (ell - 1)


def domain_dim(series: Series, ell: int, r: int | None = None) -> int:
    """Real dimension of the Hermitian symmetric domain."""
    if series is Series.A:
        if r is None or not 1 <= r <= ell:
            raise InvalidParam("A-series needs 1 <= r <= l")
        return 2 * r * (ell + 1 - r)
    if series is Series.B:
        return 2 * (2 * ell - 1)
    if series is Series.C:
        return ell * (ell + 1)
    if series is Series.D_REAL:
        return 4 * (ell - 1)
    return ell * (ell - 1)


def congruence_ok(series: Series, ell: int) -> bool:
    if series is Series.A:
        return ell % 4 == 1
    if series is Series.B:
        return ell % 8 in (1, 2, 5, 6)
    if series is Series.C:
        return True
    return ell % 4 == 2


@dataclass(frozen=True)
class CensusCase:
    series: Series
    ell: int
    m: int
    r: int | None
    rep_dim_2d: int
    g: int
    domain_dim: int
    feasible: bool
    congruence_ok: bool


def census_case(series: Series, ell: int, m: int, r: int | None = None) -> CensusCase:
    series = Series(series)
    if m < 1 or m % 2 == 0:
        raise InvalidParam(f"the number of factors m must be odd and positive, got {m}")
    two_d = rep_dim(series, ell)
    two_g = two_d**m
    dim = domain_dim(series, ell, r)
    return CensusCase(series, ell, m, r, two_d, two_g // 2, dim, dim >= two_g, congruence_ok(series, ell))


def enumerate_cases(ell_max: int, m_max: int) -> list[CensusCase]:
    """All congruence-admissible ``(series, l, m, r)`` with ``l <= ell_max`` and odd ``m <= m_max``."""
    if m_max < 1 or m_max % 2 == 0:
        raise InvalidParam(f"m_max must be odd, got {m_max}")
    if ell_max < 1:
        raise InvalidParam("ell_max must be positive")
    out = []
    for series in Series:
        for ell in range(FLOORS[series], ell_max + 1):
            if not congruence_ok(series, ell):
                continue
            rs = range(1, ell + 1) if series is Series.A else [None]
            for m in range(1, m_max + 1, 2):
                for r in rs:
                    out.append(census_case(series, ell, m, r))
    return out


@dataclass(frozen=True)
class CensusReport:
    cases: tuple
    feasible: tuple

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["series", "ell", "m", "r", "2d", "g", "domain_dim", "feasible"])
        for c in self.cases:
            w.writerow([c.series.value, c.ell, c.m, "" if c.r is None else c.r, c.rep_dim_2d, c.g, c.domain_dim, int(c.feasible)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "n_cases": len(self.cases),
            "feasible": [[c.series.value, c.ell, c.m] for c in self.feasible],
        }


def census_report(ell_max: int, m_max: int) -> CensusReport:
    """Full table; raises :class:`CensusViolation` if anything but ``C_l, m = 1`` is feasible."""
    cases = enumerate_cases(ell_max, m_max)
    feasible = tuple(c for c in cases if c.feasible)
    bad = [c for c in feasible if not (c.series is Series.C and c.m == 1)]
    if bad:
        raise CensusViolation(f"unexpected feasible cases: {[asdict(c) for c in bad[:5]]}")
    missing = set(range(1, ell_max + 1)) - {c.ell for c in feasible}
    if missing:
        raise CensusViolation(f"C-series cases with m = 1 not feasible for l in {sorted(missing)}")
    return CensusReport(tuple(cases), feasible)
