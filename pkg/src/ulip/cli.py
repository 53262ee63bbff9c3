"""Command-line front end.

Exit codes: 0 for success or a true verdict, 1 for a checked false verdict
(a formula that is not valid, an amalgam check that fails), 2 for bad input.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from typing import Iterable, Iterator, Sequence, TextIO

from . import amalgam, decide, heyting, interp
from .formula import Formula, ParseError, PolaritySet, depth, parse, parse_int, polarities, render, render_int
from .kripke import LogicId, ModelFormatError, canonical_models, model_from_json, model_to_data


class InputError(Exception):
    """Bad command-line input; reported with exit code 2."""


def _logic_help() -> str:
    return "; ".join(f"{L.tag} = {L.description}" for L in LogicId)


def _int_logic_help() -> str:
    return "; ".join(f"{IL.tag} = {IL.description}" for IL in heyting.IntLogicId)


def _csv(text: str | None) -> list[str]:
    if not text:
        return []
    return [t.strip() for t in text.split(",") if t.strip()]


def _read_formula_text(text: str, stdin: TextIO) -> str:
    return stdin.read().strip() if text == "-" else text


def _formula(text: str, stdin: TextIO, intuitionistic: bool = False) -> Formula:
    text = _read_formula_text(text, stdin)
    try:
        return parse_int(text) if intuitionistic else parse(text)
    except ParseError as exc:
        raise InputError(f"parse error: {exc}") from exc


def _logic(tag: str) -> LogicId:
    try:
        return LogicId.from_tag(tag)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc


def _int_logic(tag: str) -> heyting.IntLogicId:
    try:
        return heyting.IntLogicId.from_tag(tag)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from exc


def _model_file(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return model_from_json(fh.read())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except ModelFormatError as exc:
        raise InputError(f"{path}: {exc}") from exc


def _pointed_data(pm) -> dict:
    return {"model": model_to_data(pm.model), "point": pm.point}


def emit_models(L: LogicId, vars_: Iterable[str], limit: int | None = None) -> Iterator[str]:
    """Canonical models of ``L`` over ``vars_``, one JSON object per line.

    Raises ResourceWarning when there are more than ``limit`` models.
    """
    kwargs = {} if limit is None else {"limit": limit}
    for m in canonical_models(L, sorted(set(vars_)), **kwargs):
        yield json.dumps(model_to_data(m), sort_keys=True)


# ---------------------------------------------------------------- commands


class _Out:
    def __init__(self, stream: TextIO, as_json: bool):
        self.stream = stream
        self.as_json = as_json

    def emit(self, text: str, data: dict) -> None:
        if self.as_json:
            self.stream.write(json.dumps(data, sort_keys=True) + "\n")
        else:
            self.stream.write(text.rstrip("\n") + "\n")


def _cmd_parse(args, out: _Out, stdin) -> int:
    f = _formula(args.formula, stdin, args.int)
    ps = polarities(f)
    shown = render_int(f) if args.int else render(f)
    data = {"formula": shown, "positive": sorted(ps.positive), "negative": sorted(ps.negative), "depth": depth(f)}
    out.emit(f"{shown}\npositive: {', '.join(data['positive'])}\nnegative: {', '.join(data['negative'])}\ndepth: {depth(f)}", data)
    return 0


def _cmd_prove(args, out: _Out, stdin) -> int:
    L = _logic(args.logic)
    f = _formula(args.formula, stdin)
    cm = decide.countermodel(L, f)
    if cm is None:
        out.emit("valid", {"logic": L.tag, "formula": render(f), "valid": True})
        return 0
    data = {"logic": L.tag, "formula": render(f), "valid": False, "countermodel": _pointed_data(cm)}
    out.emit("not valid\n" + json.dumps(data["countermodel"], sort_keys=True), data)
    return 1


def _cmd_equiv(args, out: _Out, stdin) -> int:
    L = _logic(args.logic)
    a, b = _formula(args.left, stdin), _formula(args.right, stdin)
    eq = decide.equivalent(L, a, b)
    out.emit("equivalent" if eq else "not equivalent", {"logic": L.tag, "equivalent": eq})
    return 0 if eq else 1


def _removal(args) -> PolaritySet:
    return PolaritySet.of(_csv(args.remove_pos), _csv(args.remove_neg))


def _cmd_interp(args, out: _Out, stdin) -> int:
    L = _logic(args.logic)
    f = _formula(args.formula, stdin)
    removal = _removal(args)
    try:
        theta = interp.uniform_interpolant(L, f, removal, limit=args.max_family)
    except interp.UnsupportedLogic as exc:
        raise InputError(str(exc)) from exc
    except (ResourceWarning, interp.FamilyTooLarge) as exc:
        raise InputError(f"resource cap reached: {exc}") from exc
    data = {"logic": L.tag, "formula": render(f), "remove_pos": sorted(removal.positive),
            "remove_neg": sorted(removal.negative), "interpolant": render(theta)}
    out.emit(render(theta), data)
    return 0


def _cmd_lyndon(args, out: _Out, stdin) -> int:
    L = _logic(args.logic)
    a, b = _formula(args.left, stdin), _formula(args.right, stdin)
    try:
        theta = interp.lyndon_interpolant(L, a, b)
    except interp.NotAnImplication:
        out.emit("implication not valid", {"logic": L.tag, "valid": False})
        return 1
    except interp.UnsupportedLogic as exc:
        raise InputError(str(exc)) from exc
    out.emit(render(theta), {"logic": L.tag, "valid": True, "interpolant": render(theta)})
    return 0


def _cmd_nip_check(args, out: _Out, stdin) -> int:
    L = _logic(args.logic)
    m0, m1 = _model_file(args.model0), _model_file(args.model1)
    for m, w, name in ((m0, args.point0, "point0"), (m1, args.point1, "point1")):
        if not 0 <= w < m.world_count:
            raise InputError(f"{name} {w} is outside the model")
    universe = sorted(m0.variables() | m1.variables())
    pos = _csv(args.pos) if args.pos is not None else universe
    neg = _csv(args.neg) if args.neg is not None else universe
    ps = PolaritySet.of(pos, neg)
    try:
        a = amalgam.build_amalgam(L, m0.at(args.point0), m1.at(args.point1), ps)
    except amalgam.PremiseError as exc:
        raise InputError(str(exc)) from exc
    report = amalgam.verify_nip(a, L, m0.at(args.point0), m1.at(args.point1), ps)
    data = {"logic": L.tag, "amalgam": a.to_data(), "clauses": report.clauses, "ok": bool(report),
            "diagnostic": report.diagnostic}
    lines = [f"case: {a.case}", f"worlds: {a.frame.world_count}"]
    lines += [f"  {i}: label {pair}" for i, pair in enumerate(a.labels())]
    lines += [f"{name}: {'pass' if ok else 'fail'}" for name, ok in report.clauses.items()]
    if report.diagnostic:
        lines.append(f"diagnostic: {report.diagnostic}")
    out.emit("\n".join(lines), data)
    return 0 if report else 1


def _cmd_lemma_check(args, out: _Out, stdin) -> int:
    lemma = args.lemma
    if lemma == "4.5":
        names = [(a, b) for a in ("a0", "a1") for b in ("b0", "b1")]
        checked = passed = 0
        for mask in range(16):
            rel = {names[i] for i in range(4) if mask >> i & 1}
            try:
                result = amalgam.check_matching_lemma("4.5", rel)
            except amalgam.LemmaPremiseError:
                continue
            checked += 1
            passed += bool(result)
    elif lemma in amalgam.LEMMA_LOGICS:
        rng = random.Random(args.seed)
        checked = passed = 0
        for _, result in amalgam.random_lemma_instances(lemma, rng, args.count):
            checked += 1
            passed += bool(result)
    else:
        raise InputError(f"unknown lemma {lemma!r}; choose from {', '.join(amalgam.LEMMAS)}")
    ok = checked > 0 and checked == passed
    out.emit(f"lemma {lemma}: {passed}/{checked} instances satisfy the conclusion",
             {"lemma": lemma, "checked": checked, "passed": passed, "ok": ok})
    return 0 if ok else 1


def _cmd_counterexample(args, out: _Out, stdin) -> int:
    report = amalgam.lip_failure_report()
    out.emit(report.to_text(), report.to_data())
    return 0 if report else 1


def _cmd_classify(args, out: _Out, stdin) -> int:
    f = _formula(args.formula, stdin)
    try:
        cls = decide.classify_ls12(f)
    except decide.PolarityError as exc:
        raise InputError(str(exc)) from exc
    out.emit(cls.value, {"formula": render(f), "class": cls.value})
    return 0


def _cmd_iprove(args, out: _Out, stdin) -> int:
    IL = _int_logic(args.logic)
    f = _formula(args.formula, stdin, intuitionistic=True)
    ok = heyting.int_provable(IL, f)
    out.emit("valid" if ok else "not valid", {"logic": IL.tag, "formula": render_int(f), "valid": ok})
    return 0 if ok else 1


def _cmd_iinterp(args, out: _Out, stdin) -> int:
    IL = _int_logic(args.logic)
    f = _formula(args.formula, stdin, intuitionistic=True)
    removal = _removal(args)
    theta = heyting.int_uniform_interpolant(IL, f, removal)
    out.emit(render_int(theta), {"logic": IL.tag, "formula": render_int(f), "interpolant": render_int(theta)})
    return 0


def _cmd_models(args, out: _Out, stdin) -> int:
    L = _logic(args.logic)
    vars_ = _csv(args.vars) or ["p"]
    try:
        lines = list(emit_models(L, vars_, args.max_family))
    except ResourceWarning as exc:
        raise InputError(str(exc)) from exc
    if out.as_json:
        out.stream.write("[" + ",\n".join(lines) + "]\n")
    else:
        for line in lines:
            out.stream.write(line + "\n")
    return 0


# ---------------------------------------------------------------- parser


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--max-family", type=int, default=200000, help="resource cap on enumerated types")
    common.add_argument("--vars", help="comma-separated variables")

    p = argparse.ArgumentParser(prog="ulip", description="Provability, interpolation and amalgam checks for finite-height modal logics.")
    sub = p.add_subparsers(dest="command", required=True)

    def logic_arg(sp, intermediate=False):
        sp.add_argument("--logic", required=True, help=_int_logic_help() if intermediate else _logic_help())

    def removal_args(sp):
        sp.add_argument("--remove-pos", help="variables whose positive occurrences are forgotten")
        sp.add_argument("--remove-neg", help="variables whose negative occurrences are forgotten")

    sp = sub.add_parser("parse", parents=[common], help="parse and print a formula")
    sp.add_argument("formula", help="formula text, or - for stdin")
    sp.add_argument("--int", action="store_true", help="use the intuitionistic grammar")

    sp = sub.add_parser("prove", parents=[common], help="decide validity")
    logic_arg(sp)
    sp.add_argument("formula")

    sp = sub.add_parser("equiv", parents=[common], help="decide equivalence")
    logic_arg(sp)
    sp.add_argument("left")
    sp.add_argument("right")

    sp = sub.add_parser("interp", parents=[common], help="uniform Lyndon interpolant")
    logic_arg(sp)
    removal_args(sp)
    sp.add_argument("formula")

    sp = sub.add_parser("lyndon", parents=[common], help="Lyndon interpolant of LEFT -> RIGHT")
    logic_arg(sp)
    sp.add_argument("left")
    sp.add_argument("right")

    sp = sub.add_parser("nip-check", parents=[common], help="build and verify a labeled amalgam")
    logic_arg(sp)
    sp.add_argument("model0")
    sp.add_argument("model1")
    sp.add_argument("point0", type=int)
    sp.add_argument("point1", type=int)
    sp.add_argument("--pos", help="positive polarity set (default: all variables)")
    sp.add_argument("--neg", help="negative polarity set (default: all variables)")

    sp = sub.add_parser("lemma-check", parents=[common], help="check a cluster-matching lemma on random instances")
    sp.add_argument("lemma", help="one of " + ", ".join(amalgam.LEMMAS))
    sp.add_argument("--count", type=int, default=200)

    sub.add_parser("counterexample", parents=[common], help="the Lyndon interpolation failure report")

    sp = sub.add_parser("classify", parents=[common], help="class of a positive-in-p formula over ls12")
    sp.add_argument("formula")

    sp = sub.add_parser("iprove", parents=[common], help="intuitionistic validity via the companion")
    logic_arg(sp, intermediate=True)
    sp.add_argument("formula")

    sp = sub.add_parser("iinterp", parents=[common], help="intuitionistic uniform Lyndon interpolant")
    logic_arg(sp, intermediate=True)
    removal_args(sp)
    sp.add_argument("formula")

    sp = sub.add_parser("models", parents=[common], help="canonical models as JSON")
    logic_arg(sp)
    return p


_COMMANDS = {
    "parse": _cmd_parse,
    "prove": _cmd_prove,
    "equiv": _cmd_equiv,
    "interp": _cmd_interp,
    "lyndon": _cmd_lyndon,
    "nip-check": _cmd_nip_check,
    "lemma-check": _cmd_lemma_check,
    "counterexample": _cmd_counterexample,
    "classify": _cmd_classify,
    "iprove": _cmd_iprove,
    "iinterp": _cmd_iinterp,
    "models": _cmd_models,
}


def run(argv: Sequence[str], stdout: TextIO | None = None, stdin: TextIO | None = None, stderr: TextIO | None = None) -> int:
    """Run one command and return its exit code."""
    stdout = stdout or sys.stdout
    stdin = stdin or sys.stdin
    stderr = stderr or sys.stderr
    parser = _parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    out = _Out(stdout, args.json)
    try:
        return _COMMANDS[args.command](args, out, stdin)
    except InputError as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    except heyting.NotIntuitionistic as exc:
        stderr.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
