"""Command line: ddesolve {expand,solve,diagnose,bounds,guess} FILE.

Exit codes: 0 success, 2 unreadable or malformed input, 3 a hypothesis of
the requested strategy fails, 4 the budget ran out.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .expr import ParseError
from .groebner import Budget, BudgetExhausted, DegeneracyError
from .guess import GuessSpec, InsufficientOrder, guess_annihilator, provenance
from .model import deformed_det_identity, parse_dde
from .series import fixed_point_expand
from .strategies import (HypothesisFailure, StrategyFailure, check_hypotheses, degree_bound_duplication,
                         degree_bound_thm2, input_digest, reduce_to_single_equation, solve_auto,
                         solve_by_duplication, solve_by_guessing, solve_by_reduction)

SCHEMA = "ddesolve-result/1"
EXIT_OK, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_BUDGET = 0, 2, 3, 4

log = logging.getLogger("ddesolve")


def _read_input(name: str) -> str:
    path = Path(name)
    if path.exists():
        return path.read_text(encoding="utf-8")
    fixture = resources.files("ddesolve") / "fixtures" / path.name
    if fixture.is_file():
        return fixture.read_text(encoding="utf-8")
    raise FileNotFoundError(name)


def _rat(x) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _spec_label(sys, name: str) -> str:
    j = int(name[1:])
    i, ell = divmod(j, sys.k)
    a = _rat(sys.a)
    if ell == 0:
        return f"F{i + 1}(t,{a})"
    return f"d^{ell}F{i + 1}/du^{ell}(t,{a})"


class Output:
    def __init__(self, fmt: str, command: str, digest: str | None):
        self.fmt = fmt
        self.doc = {"schema": SCHEMA, "version": __version__, "command": command}
        if digest:
            self.doc["input_digest"] = digest
        self.lines = []

    def text(self, line: str):
        self.lines.append(line)

    def emit(self):
        if self.fmt == "json":
            print(json.dumps(self.doc, indent=2, sort_keys=True))
        else:
            print("\n".join(self.lines))


def cmd_expand(args, sys_, out: Output) -> int:
    exp = fixed_point_expand(sys_, args.N)
    out.doc["order"] = args.N
    out.doc["series"] = {f"F{i + 1}": F.to_arrays() for i, F in enumerate(exp.F)}
    out.doc["specializations"] = {}
    for i, F in enumerate(exp.F):
        out.text(f"F{i + 1}(t,u) = {F.to_text()}")
    for name in sorted(exp.specializations, key=lambda s: int(s[1:])):
        S = exp.specializations[name]
        label = _spec_label(sys_, name)
        out.doc["specializations"][label] = [_rat(c) for c in S.t_coeffs()]
        out.text(f"{label} = {S.to_text()}")
    return EXIT_OK


def _result_doc(res, timings: bool) -> dict:
    d = res.as_dict()
    if not timings:
        d.pop("timings", None)
    return d


def cmd_solve(args, sys_, out: Output) -> int:
    budget = Budget(max_pairs=args.max_pairs, max_basis=args.max_basis, seconds=args.budget_seconds)
    strategy = "deform" if args.deform else args.strategy
    out.doc["strategy_requested"] = strategy
    try:
        if strategy == "dup":
            res = solve_by_duplication(sys_, budget, args.N)
        elif strategy == "reduce":
            res = solve_by_reduction(sys_, budget, args.N)
        elif strategy == "guess":
            res = solve_by_guessing(sys_, args.N)
        elif strategy == "deform":
            res = solve_by_duplication(sys_, budget, args.N)
            res.details["deformation"] = _deformation_doc(sys_)
        else:
            res = solve_auto(sys_, budget, args.N)
    except HypothesisFailure as exc:
        out.doc["status"] = "hypothesis-failure"
        out.doc["message"] = str(exc)
        out.doc["hypotheses"] = exc.report.as_dict() if exc.report else None
        out.text(f"hypothesis failure: {exc}")
        if exc.report is not None:
            for key, tri in exc.report.as_dict().items():
                if key != "notes" and tri["state"] != "inconclusive":
                    out.text(f"  {key}: {tri['state']}; " + "; ".join(tri["evidence"][:2]))
        return EXIT_HYPOTHESIS
    except (StrategyFailure, BudgetExhausted, DegeneracyError) as exc:
        out.doc["status"] = "budget-exhausted"
        out.doc["message"] = str(exc)
        out.text(f"failure: {exc}")
        return EXIT_BUDGET
    out.doc["status"] = "ok"
    out.doc["result"] = _result_doc(res, args.timings)
    out.text(f"strategy: {res.strategy} ({res.method})")
    out.text(f"R = {res.R.to_text()}")
    out.text(f"deg_t R = {res.R.degree('t')}, deg_z0 R = {res.R.degree('z0')}")
    if res.minimal_factor is not None:
        out.text(f"minimal factor ({res.minimal_provenance}) = {res.minimal_factor.to_text()}")
    out.text(f"verified: R(t, F1(t,{_rat(sys_.a)})) = O(t^{res.verified_to_order})")
    return EXIT_OK


def _deformation_doc(sys_) -> dict:
    det, expected, params = deformed_det_identity(sys_)
    d = params.as_dict()
    d["det_identity_mod_t^(n+1)"] = det == expected
    d["note"] = "experimental: the deformed system is built and checked, not solved"
    return d


def cmd_diagnose(args, sys_, out: Output) -> int:
    rep = check_hypotheses(sys_, min(args.N, 24))
    E = None
    if sys_.n >= 2:
        try:
            red = reduce_to_single_equation(sys_, Budget(seconds=min(args.budget_seconds or 60, 60)))
            if red.principal:
                E = red.E
                rep = check_hypotheses(sys_, min(args.N, 24), E=E, slice_check=False) if E is not None else rep
                out.text(f"E = {E.to_text()}")
            else:
                out.text("saturated elimination ideal is not principal")
        except (BudgetExhausted, DegeneracyError) as exc:
            out.text(f"reduction skipped: {exc}")
    d = rep.as_dict()
    out.doc["hypotheses"] = d
    if E is not None:
        out.doc["E"] = E.to_text()
    if args.deform:
        out.doc["deformation"] = _deformation_doc(sys_)
        out.text("deformation: " + json.dumps(out.doc["deformation"], sort_keys=True))
    for key, tri in d.items():
        if key == "notes":
            continue
        ev = "; ".join(tri["evidence"][:2])
        out.text(f"{key}: {tri['state']}" + (f" ({ev})" if ev else ""))
    for note in d["notes"]:
        out.text(f"note: {note}")
    return EXIT_OK


def cmd_bounds(args, sys_, out: Output) -> int:
    n, k, delta = sys_.n, sys_.k, max(sys_.delta, 1)
    full, special = degree_bound_thm2(n, k, delta)
    dup = degree_bound_duplication(n, k, delta)
    out.doc.update({"n": n, "k": k, "delta": delta, "general_bound_full": str(full),
                    "general_bound_specialized": str(special), "duplication": str(dup)})
    out.text(f"n = {n}, k = {k}, delta = {delta}")
    out.text(f"general bound (full system) = {full}")
    out.text(f"general bound (specialized series) = {special}")
    out.text(f"duplication bound = {dup}")
    return EXIT_OK


def cmd_guess(args, sys_, out: Output) -> int:
    exp = fixed_point_expand(sys_, args.N)
    G = exp.z(0)
    try:
        R = guess_annihilator(GuessSpec(G, args.dt, args.dz))
    except InsufficientOrder as exc:
        out.doc["status"] = "insufficient-order"
        out.text(str(exc))
        return EXIT_INPUT
    if R is None:
        out.doc["status"] = "none"
        out.text("no annihilator within the bounds")
        return EXIT_BUDGET
    prov = provenance(R.degree("t"), R.degree("z0"), args.N,
                      degree_bound_duplication(sys_.n, sys_.k, max(sys_.delta, 1)))
    out.doc.update({"status": "ok", "R": R.to_text(), "order": args.N, "provenance": prov})
    out.text(f"R = {R.to_text()}")
    out.text(f"checked to O(t^{args.N}), {prov}")
    return EXIT_OK


COMMANDS = {"expand": cmd_expand, "solve": cmd_solve, "diagnose": cmd_diagnose,
            "bounds": cmd_bounds, "guess": cmd_guess}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ddesolve", description="Algebraic solutions of discrete differential equations.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("input", help="system file (packaged fixture names also work)")
        p.add_argument("-N", type=int, default=None, help="series order")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--strategy", choices=("auto", "dup", "reduce", "guess", "deform"), default="auto")
        p.add_argument("--budget-seconds", type=float, default=1800.0)
        p.add_argument("--max-pairs", type=int, default=None)
        p.add_argument("--max-basis", type=int, default=None)
        p.add_argument("--deform", action="store_true", help="experimental symbolic deformation")
        p.add_argument("--timings", action="store_true", help="include wall-clock timings in the output")
        p.add_argument("-v", "--verbose", action="count", default=0)
        if name == "guess":
            p.add_argument("--dt", type=int, default=3)
            p.add_argument("--dz", type=int, default=3)
    return ap


DEFAULT_N = {"expand": 10, "solve": 60, "diagnose": 24, "bounds": 4, "guess": 60}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.N is None:
        args.N = DEFAULT_N[args.command]
    if args.N < 4 and args.command != "bounds":
        print("error: -N must be at least 4", file=sys.stderr)
        return EXIT_INPUT
    for name in ("budget_seconds", "max_pairs", "max_basis"):
        v = getattr(args, name)
        if v is not None and v <= 0:
            print(f"error: --{name.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_INPUT
    try:
        text = _read_input(args.input)
        sys_ = parse_dde(text)
    except FileNotFoundError:
        print(f"error: cannot read {args.input}", file=sys.stderr)
        return EXIT_INPUT
    except ParseError as exc:
        print(f"error: {args.input}:{exc.line}:{exc.col}: {exc.message}", file=sys.stderr)
        return EXIT_INPUT
    out = Output(args.format, args.command, input_digest(sys_))
    code = COMMANDS[args.command](args, sys_, out)
    out.emit()
    return code


if __name__ == "__main__":
    raise SystemExit(main())
