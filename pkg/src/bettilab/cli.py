"""``betti-lab`` command line: job parsing, dispatch and serialisation.

A job is a JSON object with a ``subcommand`` and its parameters, either
flat or nested under ``params``.  Results are written as deterministic
JSON (and CSV for tables) and echoed to stdout.

Exit codes: 0 ok, 1 invariant failure or module error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import polynomials as P
from .betti_map import (
    LinearSlice,
    SectionSpec,
    TranslationSlice,
    UniversalFamily,
    betti_coords,
    abelian_log,
    betti_jacobian,
    nearest_target,
    rank_scan,
    section_at,
    torsion_target_solve,
)
from .cache import PeriodCache
from .curve_family import FamilyModel, ModelKind, curve_data, make_point, point_from_json, point_to_json
from .errors import BettiLabError, InvalidParam, InvalidSection, RankAmbiguous, SchemaError
from .jsonio import SCHEMA, dumps, encode_matrix, period_data_to_json
from .kodaira_spencer import ks_tensor, max_contracted_rank, vandermonde_witness
from .monodromy_census import census_report
from .periods import periods_at
from .quadrature import QuadratureConfig
from .quadric_webs import IdenticallySingular, QuadricWeb, find_regular_vector, has_nondegenerate_member
from .torsion_pell import pell_family, pell_solve

SUBCOMMANDS = (
    "periods",
    "betti",
    "jacobian",
    "rank-scan",
    "pell",
    "pell-family",
    "ks",
    "webs",
    "census",
    "torsion-solve",
    "verify",
)
JOB_KEYS = {"subcommand", "params", "seed", "precision", "output_path", "threads"}
USAGE_ERRORS = (SchemaError, InvalidParam, InvalidSection)


class InvariantFailure(Exception):
    code = "invariant_failure"


# ---------------------------------------------------------------- inputs


def parse_polynomial(value) -> list:
    """``"x^4-1"`` or a dense coefficient array, constant term first."""
    if isinstance(value, str):
        try:
            return P.parse(value)
        except Exception as exc:
            raise SchemaError(f"cannot parse polynomial {value!r}: {exc}") from exc
    if isinstance(value, list):
        try:
            return [P.to_fraction(v) for v in value]
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise SchemaError(f"bad coefficient array: {exc}") from exc
    raise SchemaError("polynomial must be a string or a coefficient array")


def parse_point(params: dict):
    """A point from ``point``, ``model/genus/params`` or a monic even-degree ``f``."""
    if "point" in params:
        return parse_point(params["point"])
    if "f" in params:
        f = P.trim(parse_polynomial(params["f"]))
        deg = len(f) - 1
        if deg < 3 or f[-1] != 1:
            raise InvalidParam("f must be monic of degree at least 3")
        if deg % 2:
            raise InvalidParam("'f' is for the even-degree model; give odd-degree points by 'params'")
        return make_point(FamilyModel(ModelKind.EVEN, deg // 2 - 1), f[:-1])
    for key in ("model", "genus", "params"):
        if key not in params:
            raise SchemaError(f"point needs '{key}' (or pass 'point' or 'f')")
    return point_from_json(params)


def parse_family(params: dict, point):
    spec = params.get("family", "universal")
    if spec == "universal":
        return UniversalFamily(point.model), point.as_array()
    if not isinstance(spec, dict):
        raise SchemaError("family must be 'universal' or an object with 'kind'")
    kind = spec.get("kind")
    base = tuple(complex(v) for v in point.as_array())
    if kind == "linear":
        dirs = spec.get("directions")
        if not dirs:
            raise SchemaError("linear family needs 'directions'")
        directions = tuple(tuple(_complex(v) for v in d) for d in dirs)
        t0 = [_complex(v) for v in spec.get("t0", [0] * len(directions))]
        return LinearSlice(point.model, base, directions), np.array(t0, dtype=complex)
    if kind == "translation":
        return TranslationSlice(point.model, base), np.array([_complex(spec.get("t0", 0))])
    raise SchemaError(f"unknown family kind {kind!r}")


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(float(Fraction(v)))
    return complex(v)


def parse_section(params: dict) -> SectionSpec:
    try:
        return SectionSpec.from_json(params.get("section", {}))
    except ValueError as exc:
        raise SchemaError(f"bad section: {exc}") from exc


# -------------------------------------------------------------- commands


def cmd_periods(params, ctx):
    p = parse_point(params)
    pd = ctx.periods(p)
    return period_data_to_json(pd), None


def cmd_betti(params, ctx):
    p = parse_point(params)
    sec = parse_section(params)
    pd = ctx.periods(p)
    c = curve_data(p)
    lam = abelian_log(c, section_at(sec, c), pd.basis, ctx.cfg)
    ev = betti_coords(lam, pd)
    out = ev.to_json()
    out.update({"s": point_to_json(p), "section": sec.to_json(), "Z": encode_matrix(pd.Z)})
    return out, None


def cmd_jacobian(params, ctx):
    p = parse_point(params)
    family, t0 = parse_family(params, p)
    jac = betti_jacobian(None, parse_section(params), params.get("h"), family, t0, ctx.cfg)
    out = jac.to_json()
    out["s"] = point_to_json(p)
    if jac.rank % 2:
        raise InvariantFailure(f"odd rank {jac.rank}")
    return out, None


def cmd_rank_scan(params, ctx):
    model = FamilyModel(ModelKind(params.get("model", "even")), int(params.get("genus", 1)))
    n = model.arity
    lower = [_complex(v) for v in params.get("lower", [[-2, -2]] * n)]
    upper = [_complex(v) for v in params.get("upper", [[2, 2]] * n)]
    if len(lower) != n or len(upper) != n:
        raise SchemaError(f"lower/upper need {n} entries")
    rep = rank_scan(
        UniversalFamily(model),
        lower,
        upper,
        int(params.get("n_samples", 20)),
        parse_section(params),
        seed=ctx.seed,
        threads=ctx.threads,
        cfg=ctx.cfg,
    )
    rows = ["sample,rank,status,singular_values," + ",".join(f"re_t{k},im_t{k}" for k in range(n))]
    for k, s in enumerate(rep.samples):
        sv = ";".join(format(v, ".17g") for v in s.singular_values)
        ts = ",".join(f"{format(complex(z).real, '.17g')},{format(complex(z).imag, '.17g')}" for z in s.t)
        rows.append(f"{k},{'' if s.rank is None else s.rank},{s.status},{sv},{ts}")
    out = rep.to_json()
    out["model"] = model.kind.value
    out["genus"] = model.genus
    odd = [r for r in rep.histogram if r % 2]
    if odd:
        raise InvariantFailure(f"odd ranks {odd} in scan")
    return out, "\n".join(rows) + "\n"


def cmd_pell(params, ctx):
    if "f" not in params:
        raise SchemaError("pell needs 'f'")
    f = parse_polynomial(params["f"])
    n_max = params.get("n_max")
    sol = pell_solve(f, None if n_max is None else int(n_max))
    if sol is None:
        g = (len(P.trim(f)) - 1) // 2 - 1
        return {"found": False, "n_max": n_max if n_max is not None else 4 * g + 4}, None
    if any(sol.residual(f)):
        raise InvariantFailure("certificate identity fails")
    return sol.to_json(), None


def cmd_pell_family(params, ctx):
    if "P" not in params or "p" not in params:
        raise SchemaError("pell-family needs 'P' and 'p'")
    res = pell_family(parse_polynomial(params["P"]), P.to_fraction(params["p"]), bool(params.get("validate", False)))
    out = res.solution.to_json()
    out["point"] = point_to_json(res.point)
    if res.betti_distance is not None:
        out["betti_distance"] = res.betti_distance
        if res.betti_distance > 1e-6:
            raise InvariantFailure(f"Betti vector {res.betti_distance:.2e} away from (1/n)Z")
    return out, None


def cmd_ks(params, ctx):
    p = parse_point(params)
    T = ks_tensor(p)
    rng = np.random.default_rng(ctx.seed)
    mx = max_contracted_rank(T.forms(), int(params.get("n_trials", 20)), rng, vandermonde_witness(p.genus))
    out = T.to_json()
    out["max_contracted_rank"] = mx.max_rank
    out["witness"] = [[complex(w).real, complex(w).imag] for w in mx.witness]
    if mx.max_rank != p.genus:
        raise InvariantFailure(f"max contracted rank {mx.max_rank} != g = {p.genus}")
    return out, None


def _web_entry(v):
    if isinstance(v, (int, str)):
        return Fraction(v)
    return v


def cmd_webs(params, ctx):
    basis = params.get("basis")
    if not isinstance(basis, list) or not basis:
        raise SchemaError("webs needs a non-empty 'basis' of symmetric matrices")
    try:
        forms = tuple([[_web_entry(v) for v in row] for row in Q] for Q in basis)
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"bad web entry: {exc}") from exc
    W = QuadricWeb(len(forms[0]), forms)
    rng = np.random.default_rng(ctx.seed)
    res = find_regular_vector(W, int(params.get("n_trials", 20)), rng)
    nd = has_nondegenerate_member(W, rng=rng)
    out = {"g": W.g, "nondegenerate_member": nd.found}
    if isinstance(res, IdenticallySingular):
        out.update({"regular": False, "certificate": {"grid_points": res.grid_points, "random_points": res.random_points}})
    else:
        out.update({"regular": True, "vector": [_scalar_json(v) for v in res.vector], "samples": res.samples})
    return out, None


def _scalar_json(v):
    if isinstance(v, (int, Fraction)):
        return P.format_coeff(Fraction(v))
    return [complex(v).real, complex(v).imag]


def cmd_census(params, ctx):
    rep = census_report(int(params.get("ell_max", 40)), int(params.get("m_max", 9)))
    return rep.to_json(), rep.to_csv()


def cmd_torsion_solve(params, ctx):
    p = parse_point(params)
    sec = parse_section(params)
    if "target" in params:
        target = [Fraction(str(v)) for v in params["target"]]
    else:
        den = int(params.get("denominator", 8))
        pd = ctx.periods(p)
        c = curve_data(p)
        beta = betti_coords(abelian_log(c, section_at(sec, c), pd.basis, ctx.cfg), pd).beta
        target = list(nearest_target(beta, den))
    res = torsion_target_solve(
        p, sec, target, float(params.get("tol", 1e-10)), int(params.get("max_iter", 50)), cfg=ctx.cfg
    )
    return res.to_json(), None


def cmd_verify(params, ctx):
    from .invariants import run_checks

    results = run_checks(ctx.seed, params.get("checks"))
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}", file=sys.stderr)
    out = {"checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]}
    out["all_passed"] = all(r.passed for r in results)
    if not out["all_passed"]:
        ctx.failed = True
    return out, None


COMMANDS = {
    "periods": cmd_periods,
    "betti": cmd_betti,
    "jacobian": cmd_jacobian,
    "rank-scan": cmd_rank_scan,
    "pell": cmd_pell,
    "pell-family": cmd_pell_family,
    "ks": cmd_ks,
    "webs": cmd_webs,
    "census": cmd_census,
    "torsion-solve": cmd_torsion_solve,
    "verify": cmd_verify,
}


# ------------------------------------------------------------------ run


class Context:
    def __init__(self, seed: int, cfg: QuadratureConfig, threads: int, cache_dir):
        self.seed = seed
        self.cfg = cfg
        self.threads = threads
        self.cache = None if cache_dir is None else PeriodCache(cache_dir)
        self.failed = False

    def periods(self, p):
        if self.cache is None:
            return periods_at(p, self.cfg)
        return self.cache.periods(p, self.cfg)


def load_job(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read job file: {exc}") from exc
    try:
        job = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed job JSON: {exc}") from exc
    if not isinstance(job, dict):
        raise SchemaError("job must be a JSON object")
    return job


def job_params(job: dict) -> dict:
    nested = job.get("params", {})
    if not isinstance(nested, dict):
        raise SchemaError("'params' must be an object")
    out = {k: v for k, v in job.items() if k not in JOB_KEYS}
    out.update(nested)
    return out


def run(job: dict, seed=None, precision=None, threads=None, out_dir=None, cache_dir=None, stream=None) -> int:
    """Execute one job; return the exit status."""
    stream = sys.stdout if stream is None else stream
    sub = job.get("subcommand")
    record = {"schema": SCHEMA, "subcommand": sub}
    status = 0
    try:
        if sub not in COMMANDS:
            raise SchemaError(f"unknown subcommand {sub!r}; expected one of {', '.join(SUBCOMMANDS)}")
        seed = int(job.get("seed", 0) if seed is None else seed)
        if not 0 <= seed < 2**64:
            raise SchemaError("seed must be an unsigned 64-bit integer")
        precision = str(job.get("precision", "double") if precision is None else precision)
        threads = int(job.get("threads", 1) if threads is None else threads)
        if threads < 1:
            raise SchemaError("threads must be positive")
        params = job_params(job)
        cfg = QuadratureConfig(
            nodes=int(params.pop("nodes", 64)), refine_tol=float(params.pop("refine_tol", 1e-13)), precision=precision
        )
        record.update({"seed": seed, "precision": precision})
        ctx = Context(seed, cfg, threads, cache_dir)
        result, csv_text = COMMANDS[sub](params, ctx)
        record["result"] = result
        if ctx.failed:
            status = 1
    except USAGE_ERRORS as exc:
        record["error"] = {"code": exc.code, "message": str(exc)}
        csv_text, status = None, 2
    except (BettiLabError, InvariantFailure) as exc:
        record["error"] = {"code": exc.code, "message": str(exc)}
        if isinstance(exc, RankAmbiguous):
            record["error"]["candidates"] = list(exc.candidates)
        csv_text, status = None, 1
    except (ValueError, TypeError, KeyError) as exc:
        record["error"] = {"code": "schema_error", "message": f"{type(exc).__name__}: {exc}"}
        csv_text, status = None, 2
    record["exit_status"] = status
    text = dumps(record) + "\n"
    stream.write(text)
    out_dir = out_dir or job.get("output_path")
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        name = str(sub) if sub in COMMANDS else "error"
        (out / f"{name}.json").write_text(text)
        if csv_text is not None:
            (out / f"{name}.csv").write_text(csv_text)
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="betti-lab", description="Betti maps of hyperelliptic families.")
    ap.add_argument("subcommand", nargs="?", choices=SUBCOMMANDS, help="overrides the job's subcommand")
    ap.add_argument("--job", help="job file (JSON)")
    ap.add_argument("--params", help="inline JSON parameters, merged over the job file")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--precision", choices=("double", "dd"))
    ap.add_argument("--threads", type=int)
    ap.add_argument("--out", help="output directory for JSON/CSV")
    ap.add_argument("--cache", help="period cache directory")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        job = load_job(args.job) if args.job else {}
        if args.params:
            try:
                extra = json.loads(args.params)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"malformed --params JSON: {exc}") from exc
            if not isinstance(extra, dict):
                raise SchemaError("--params must be a JSON object")
            job.setdefault("params", {})
            job["params"] = {**job["params"], **extra}
    except SchemaError as exc:
        sys.stdout.write(dumps({"schema": SCHEMA, "error": {"code": exc.code, "message": str(exc)}, "exit_status": 2}) + "\n")
        return 2
    if args.subcommand:
        job["subcommand"] = args.subcommand
    return run(job, args.seed, args.precision, args.threads, args.out, args.cache)


if __name__ == "__main__":
    sys.exit(main())
