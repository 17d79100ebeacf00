"""
Command-line front end.

    corrbc info "I(S1;S2)" --scenario sc.json
    corrbc prove "I(U1;U0,S2|S1) - I(U1;S2|S1)" --ground U0,U1,S1,S2
    corrbc fm [--no-s3] [--order R2,R1,R0]
    corrbc region thm2 --scenario sc.json
    corrbc simulate cover --scenario sc.json --rates 2.4,0,0 --n 8 --trials 200
    corrbc search --scenario sc.json --cards 2,2,1

Exit codes: 0 success or satisfied, 1 unsatisfied / not proven / mismatch,
2 bad input or budget exceeded. ``--format records`` prints JSON lines that
:meth:`RunReport.from_records` reads back.

Scenario files are JSON with keys ``alphabets`` (sizes of S1, S2, X, Y1, Y2
and optionally U0, U1, U2), ``source`` indexed [s1][s2], ``channel`` indexed
[x][y1][y2], and optionally ``aux`` and ``x_map`` indexed [s1][s2][u0][u1][u2].
Without ``aux`` the auxiliaries are constant and x is fixed to 0.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import regions, simcode, systems
from .itp import ITPError, GroundSet, expand_v_definitions, linear_equality, parse_expression, prove
from .measures import MeasureError, eval_expression
from .polytope import PolytopeError, equivalent, format_row

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# files

def load_scenario(path: str | Path) -> tuple[regions.ScenarioSpec, regions.AuxiliarySpec, dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read scenario {path}: {exc}") from exc
    return scenario_from_dict(doc) + (doc,)


def scenario_from_dict(doc: dict) -> tuple[regions.ScenarioSpec, regions.AuxiliarySpec]:
    for key in ("alphabets", "source", "channel"):
        if key not in doc:
            raise InputError(f"scenario is missing {key!r}")
    al = doc["alphabets"]
    src = np.asarray(doc["source"], dtype=float)
    ch = np.asarray(doc["channel"], dtype=float)
    want = {"source": (al.get("S1"), al.get("S2")),
            "channel": (al.get("X"), al.get("Y1"), al.get("Y2"))}
    for key, arr in (("source", src), ("channel", ch)):
        if arr.shape != want[key]:
            raise InputError(f"{key} has shape {arr.shape}, alphabets say {want[key]}")
    n1, n2 = src.shape
    if "aux" in doc:
        aux = np.asarray(doc["aux"], dtype=float)
        xm = np.asarray(doc.get("x_map", np.zeros(aux.shape)))
        cards = tuple(al.get(k, aux.shape[2 + i]) for i, k in enumerate(("U0", "U1", "U2")))
        if aux.shape != (n1, n2) + cards:
            raise InputError(f"aux has shape {aux.shape}, alphabets say {(n1, n2) + cards}")
    else:
        aux = np.ones((n1, n2, 1, 1, 1))
        xm = np.zeros(aux.shape, dtype=int)
    xm_arr = np.asarray(xm)
    if xm_arr.size and (xm_arr.min() < 0 or xm_arr.max() >= ch.shape[0]):
        raise InputError("x_map entry outside the X alphabet")
    try:
        scen = regions.ScenarioSpec.from_arrays(src, ch)
        spec = regions.AuxiliarySpec(aux, xm)
        regions.compose(scen, spec)
    except (MeasureError, regions.RegionError) as exc:
        raise InputError(str(exc)) from exc
    return scen, spec


def scenario_to_dict(scen: regions.ScenarioSpec, aux: regions.AuxiliarySpec) -> dict:
    n1, n2 = scen.source.shape
    nx, ny1, ny2 = scen.channel.shape
    c0, c1, c2 = aux.cardinalities
    return {"alphabets": {"S1": n1, "S2": n2, "X": nx, "Y1": ny1, "Y2": ny2,
                          "U0": c0, "U1": c1, "U2": c2},
            "source": scen.source.mass.tolist(), "channel": scen.channel.tolist(),
            "aux": aux.aux.tolist(), "x_map": aux.x_map.tolist()}


@dataclass
class RunReport:
    command: list[str]
    config: dict
    rows: list[dict] = field(default_factory=list)
    verdict: str = ""
    seeds: list[int] = field(default_factory=list)
    seconds: float = 0.0
    config_hash: str = ""

    def __post_init__(self):
        if not self.config_hash:
            self.config_hash = config_hash(self.config)

    def to_records(self) -> list[dict]:
        head = {k: v for k, v in asdict(self).items() if k != "rows"}
        return [{"record": "row", **r} for r in self.rows] + [{"record": "report", **head}]

    @classmethod
    def from_records(cls, records: Sequence[dict]) -> "RunReport":
        rows = [{k: v for k, v in r.items() if k != "record"} for r in records if r["record"] == "row"]
        (head,) = [r for r in records if r["record"] == "report"]
        head = {k: v for k, v in head.items() if k != "record"}
        return cls(rows=rows, **head)

    def dumps(self) -> str:
        return "\n".join(json.dumps(r, sort_keys=True) for r in self.to_records())

    @classmethod
    def loads(cls, text: str) -> "RunReport":
        return cls.from_records([json.loads(line) for line in text.splitlines() if line.strip()])


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6f}"
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt_cell(x) for x in v)
    return str(v)


def render_table(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(dict.fromkeys(k for r in rows for k in r))
    cells = [[_fmt_cell(r.get(c, "")) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in cells]
    return "\n".join(line.rstrip() for line in lines)


def emit(report: RunReport, fmt: str, out=None, extra: str = "") -> None:
    out = out or sys.stdout
    if fmt == "records":
        print(report.dumps(), file=out)
        return
    if extra:
        print(extra, file=out)
    table = render_table(report.rows)
    if table:
        print(table, file=out)
    print(f"verdict: {report.verdict}  config: {report.config_hash}  "
          f"time: {report.seconds:.2f}s", file=out)


# ---------------------------------------------------------------------------
# commands

def _floats(text: str, k: int, what: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bad {what} {text!r}") from exc
    if len(vals) != k:
        raise InputError(f"{what} needs {k} comma-separated values")
    return vals


def _ints(text: str, k: int, what: str) -> list[int]:
    vals = _floats(text, k, what)
    if any(v != int(v) or v < 1 for v in vals):
        raise InputError(f"{what} must be positive integers")
    return [int(v) for v in vals]


def _rates(text: str | None) -> regions.RateTriple:
    if text is None:
        raise InputError("--rates r0,r1,r2 is required here")
    try:
        return regions.RateTriple(*_floats(text, 3, "rates"))
    except regions.RegionError as exc:
        raise InputError(str(exc)) from exc


def _scenario(args):
    if not args.scenario:
        raise InputError("--scenario FILE is required here")
    return load_scenario(args.scenario)


def _region_rows(rep: regions.RegionReport, tol: float) -> list[dict]:
    return [{"family": rep.family, "row": r.name, "lhs": r.lhs, "rhs": r.rhs,
             "margin": r.margin, "satisfied": r.margin > tol} for r in rep.rows]


def cmd_info(args) -> tuple[RunReport, int]:
    scen, aux, doc = _scenario(args)
    pmf = regions.compose(scen, aux)
    if re.search(r"[<>=]", args.expr):
        raise InputError("info takes a bare expression, not a relation")
    expr, _ = parse_expression(args.expr, expand_v_definitions())
    missing = expr.variables - set(pmf.names)
    if missing:
        raise InputError(f"unknown variables {sorted(missing)}")
    val = eval_expression(expr, pmf)
    if abs(val) < 1e-12:
        val = 0.0
    rep = RunReport(args.argv, {"cmd": "info", "expr": args.expr, "scenario": doc},
                    [{"expr": args.expr, "bits": val}], f"{val:.12f}")
    return rep, EXIT_OK


def _load_constraints(path: str | None, macros) -> list:
    if not path:
        return []
    out = []
    for k, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        expr, rel = parse_expression(line, macros)
        if rel != "=":
            raise InputError(f"constraint line {k} must be an equality")
        out.append(linear_equality(expr))
    return out


def cmd_prove(args) -> tuple[RunReport, int]:
    t0 = time.perf_counter()
    ground = args.ground.split(",") if args.ground else None
    macros = expand_v_definitions()
    expr, rel = parse_expression(args.expr, macros)
    cons = _load_constraints(args.constraints, macros)
    if ground is None:
        names = set(expr.variables)
        for c in cons:
            names |= c.expr.variables
        ground = sorted(names)
    targets = [expr] if rel == ">=" else [expr, -expr]
    rows, ok = [], True
    for t in targets:
        res = prove(t, cons, GroundSet(tuple(ground)), method=args.method)
        checked = res.verify()
        ok &= res.proven and checked
        cert = {str(k): str(v) for k, v in sorted(res.elemental_weights.items())}
        if res.counterexample is not None:
            cert = {"".join(sorted(s)) or "{}": str(v) for s, v in
                    sorted(res.counterexample.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))}
        rows.append({"target": f"{t} >= 0", "verdict": res.verdict, "certificate_checked": checked,
                     "certificate": json.dumps(cert, sort_keys=True)})
    rep = RunReport(args.argv, {"cmd": "prove", "expr": args.expr, "ground": ground,
                                   "constraints": [c.label for c in cons], "method": args.method},
                    rows, "Proven" if ok else "NotProvable", seconds=time.perf_counter() - t0)
    return rep, EXIT_OK if ok else EXIT_FAIL


def fm_text(row) -> str:
    """``H1 + H2 < v9 + v11 - v7 - v1``: positive terms first, as usually written."""
    rhs = {n: -c for n, c in row.coeffs if n not in ("H1", "H2")}
    idx = {n: i for i, n in enumerate(systems.VARIABLES)}
    order = (sorted((n for n in rhs if rhs[n] > 0), key=idx.get)
             + sorted((n for n in rhs if rhs[n] < 0), key=idx.get, reverse=True))
    return format_row(row, ("H1", "H2"), ["H1", "H2"] + order)


def cmd_fm(args) -> tuple[RunReport, int]:
    order = tuple(args.order.split(",")) if args.order else systems.RATES
    if sorted(order) != sorted(systems.RATES):
        raise InputError(f"--order must be a permutation of {','.join(systems.RATES)}")
    res = systems.run_pipeline(order, with_relations=not args.no_s3)
    rel = systems.v_relations().rows
    equiv = equivalent(res.raw.rows, res.expected.rows, rel)
    rows = [{"row": fm_text(r), "status": "ok"} for r in res.reduced.rows
            if r in set(res.expected.rows)]
    rows += [{"row": fm_text(r), "status": "missing"} for r in res.missing()]
    rows += [{"row": fm_text(r), "status": "extra"} for r in res.extra()]
    head = (f"raw rows after elimination: {len(res.raw)}"
            f" ({sum(1 for r in res.raw.rows if {'H1', 'H2'} & set(r.variables))} involve H1 or H2)\n"
            f"reduced rows: {len(res.reduced)}\n"
            f"raw system equivalent to the expected rows given the v-relations: {equiv}")
    rep = RunReport(args.argv, {"cmd": "fm", "order": list(order), "no_s3": args.no_s3},
                    rows, "match" if res.matches else "mismatch", seconds=res.seconds)
    rep.config["raw_count"] = len(res.raw)
    return rep, (EXIT_OK if res.matches else EXIT_FAIL), head


def cmd_region(args) -> tuple[RunReport, int]:
    t0 = time.perf_counter()
    scen, aux, doc = _scenario(args)
    tol = args.tol
    kind = args.kind
    config = {"cmd": "region", "kind": kind, "scenario": doc, "rates": args.rates, "tol": tol}
    if kind == "thm2":
        rows = _region_rows(regions.eval_theorem2(scen, aux), tol)
    elif kind == "hc":
        rows = _region_rows(regions.eval_theorem1_hc(scen, aux), tol)
    elif kind == "compare":
        rows = [{"row": d.name, "thm2_rhs": d.thm2_rhs, "hc_rhs": d.hc_rhs,
                 "difference": d.hc_rhs - d.thm2_rhs, "satisfied": d.hc_rhs >= d.thm2_rhs - tol}
                for d in regions.compare_thm2_hc(scen, aux)]
    elif kind == "marton":
        a = aux.aux
        if not (np.allclose(a, a[:1, :1]) and np.all(aux.x_map == aux.x_map[:1, :1])):
            raise InputError("marton needs auxiliaries and x_map that ignore the sources")
        rows = _region_rows(regions.specialize_marton(scen.channel, a[0, 0], aux.x_map[0, 0],
                                                      _rates(args.rates)), tol)
    elif kind == "gw":
        v_cond = aux.aux.sum(axis=(3, 4))
        four, three = regions.specialize_gray_wyner(scen.source, v_cond, _rates(args.rates))
        rows = _region_rows(four, tol) + _region_rows(three, tol)
    elif kind == "degraded":
        ux = np.asarray(doc.get("ux", np.full((1, scen.channel.shape[0]), 1 / scen.channel.shape[0])))
        if ux.ndim != 2 or ux.shape[1] != scen.channel.shape[0] or abs(ux.sum() - 1) > 1e-9:
            raise InputError("ux must be a pmf indexed [u][x]")
        rows = _region_rows(regions.specialize_degraded(scen.source, scen.channel, ux), tol)
    elif kind in ("cover", "decode", "superpos"):
        rates = _rates(args.rates)
        pmf = regions.compose(scen, aux)
        from .measures import entropy
        h1, h2 = entropy(pmf, "S1"), entropy(pmf, "S2")
        if kind == "cover":
            bounds = regions.eval_covering_rates(scen, aux)
        elif kind == "decode":
            bounds = regions.eval_decoding_rates(scen, aux)
        else:
            cov, dec = regions.eval_superposition_rates(scen, aux)
            bounds = cov + dec
        rows = _region_rows(regions.check_rates(bounds, rates, h1, h2, kind), tol)
    else:                                      # argparse restricts the choices
        raise InputError(f"unknown region kind {kind!r}")
    ok = all(r["satisfied"] for r in rows)
    rep = RunReport(args.argv, config, rows, "satisfied" if ok else "unsatisfied",
                    seconds=time.perf_counter() - t0)
    return rep, EXIT_OK if ok else EXIT_FAIL


def cmd_simulate(args) -> tuple[RunReport, int]:
    scen, aux, doc = _scenario(args)
    rates = _rates(args.rates)
    try:
        params = simcode.TypicalityParams(args.n, args.eps, args.eps_prime)
    except simcode.SimulationError as exc:
        raise InputError(str(exc)) from exc
    config = {"cmd": "simulate", "kind": args.kind, "scenario": doc, "rates": args.rates,
              "n": args.n, "trials": args.trials, "seed": args.seed, "scheme": args.scheme,
              "eps": args.eps, "eps_prime": args.eps_prime, "budget": args.budget}
    kw = dict(scheme=args.scheme, budget=args.budget, workers=args.workers)
    if args.kind == "cover":
        res = simcode.run_covering_experiment(scen, aux, rates, params, args.trials, args.seed, **kw)
        summary = (f"P(covering failure) = {res.p_fail:.4f}  95% CI [{res.ci[0]:.4f}, {res.ci[1]:.4f}]"
                   f"  atypical sources: {res.atypical_sources}")
        ok = True
    else:
        res = simcode.run_end_to_end(scen, aux, rates, params, args.trials, args.seed, **kw)
        summary = (f"P(error) = {res.p_error:.4f}  95% CI [{res.ci[0]:.4f}, {res.ci[1]:.4f}]"
                   f"  covering failures: {res.covering_failures}\n"
                   f"decoder 1: {res.decoder1}\ndecoder 2: {res.decoder2}")
        ok = True
    rows = [o.record(args.n, rates) for o in res.outcomes]
    rep = RunReport(args.argv, config, rows, summary.splitlines()[0],
                    [o.seed for o in res.outcomes], res.seconds)
    return rep, (EXIT_OK if ok else EXIT_FAIL), summary


def cmd_search(args) -> tuple[RunReport, int]:
    t0 = time.perf_counter()
    scen, _, doc = _scenario(args)
    cards = _ints(args.cards, 3, "cardinalities")
    res = regions.search_feasible_aux(scen, cards, budget=args.budget, seed=args.seed,
                                      restarts=args.restarts)
    rows = _region_rows(res.report, args.tol)
    ok = all(r["satisfied"] for r in rows)
    if args.out:
        Path(args.out).write_text(json.dumps(scenario_to_dict(scen, res.aux)))
    rep = RunReport(args.argv, {"cmd": "search", "scenario": doc, "cards": cards,
                                   "budget": args.budget, "seed": args.seed, "restarts": args.restarts},
                    rows, "satisfied" if ok else "unsatisfied", [args.seed], time.perf_counter() - t0)
    return rep, EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    def globals_(suppress: bool) -> argparse.ArgumentParser:
        # flags are accepted before or after the subcommand; the copy on the
        # subcommands must not overwrite a value given earlier
        g = argparse.ArgumentParser(add_help=False)
        dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g.add_argument("--format", choices=("table", "records"), default=dflt("table"))
        g.add_argument("--tol", type=float, default=dflt(regions.STRICT_TOL),
                       help="a row counts as satisfied when its margin exceeds this")
        g.add_argument("--seed", type=int, default=dflt(0))
        return g

    common = globals_(True)
    p = argparse.ArgumentParser(prog="corrbc", parents=[globals_(False)],
                                description="Correlated sources over broadcast channels: "
                                            "region evaluation, proofs and simulation.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("info", parents=[common], help="evaluate an information expression")
    s.add_argument("expr")
    s.add_argument("--scenario", required=True)
    s.set_defaults(func=cmd_info)

    s = sub.add_parser("prove", parents=[common], help="Shannon-type proof with a certificate")
    s.add_argument("expr")
    s.add_argument("--constraints", help="file of equalities, one per line")
    s.add_argument("--ground", help="comma-separated ground set")
    s.add_argument("--method", choices=("auto", "exact"), default="auto")
    s.set_defaults(func=cmd_prove)

    s = sub.add_parser("fm", parents=[common], help="eliminate the rates from the rate system")
    s.add_argument("--no-s3", action="store_true", help="leave out the v-relations")
    s.add_argument("--order", help="elimination order, e.g. R2,R1,R0")
    s.set_defaults(func=cmd_fm)

    s = sub.add_parser("region", parents=[common], help="evaluate a rate region on a scenario")
    s.add_argument("kind", choices=("thm2", "hc", "compare", "marton", "gw", "degraded",
                                    "cover", "decode", "superpos"))
    s.add_argument("--scenario", required=True)
    s.add_argument("--rates", help="r0,r1,r2")
    s.set_defaults(func=cmd_region)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo of the coding scheme")
    s.add_argument("kind", choices=("cover", "e2e"))
    s.add_argument("--scenario", required=True)
    s.add_argument("--rates", required=True, help="r0,r1,r2")
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--trials", type=int, default=200)
    s.add_argument("--scheme", choices=("plain", "superposition"), default="plain")
    s.add_argument("--eps", type=float, default=0.2)
    s.add_argument("--eps-prime", type=float, default=0.1)
    s.add_argument("--budget", type=int, default=simcode.DEFAULT_BUDGET)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("search", parents=[common], help="search auxiliaries for Theorem 2")
    s.add_argument("--scenario", required=True)
    s.add_argument("--cards", default="2,2,2", help="|U0|,|U1|,|U2|")
    s.add_argument("--budget", type=int, default=2000)
    s.add_argument("--restarts", type=int, default=4)
    s.add_argument("--out", help="write the best scenario with its auxiliaries here")
    s.set_defaults(func=cmd_search)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.argv = argv
    try:
        out = args.func(args)
    except (InputError, ITPError, PolytopeError, MeasureError, regions.RegionError,
            simcode.SimulationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    rep, code = out[0], out[1]
    extra = out[2] if len(out) > 2 else ""
    emit(rep, args.format, extra=extra)
    return code


if __name__ == "__main__":
    sys.exit(main())
