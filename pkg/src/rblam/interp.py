"""Big-step call-by-value evaluator with explicit cost accounting.

Values evaluate to themselves at cost bottom; application substitutes the
argument value into the lambda body. Each rule charges the corresponding
delta: application, conditionals, projections, and unboxing. Evaluation is
deterministic and total on well-typed closed terms; the fuel guard turns
ill-typed or runaway inputs into clean errors instead of divergence.
"""

from __future__ import annotations

from dataclasses import dataclass

from rblam.lattice import LatticeElement, LatticeInstance
from rblam.syntax import (
    App,
    BoxT,
    Fst,
    If,
    Pair,
    Snd,
    Term,
    Unbox,
    VBox,
    VFF,
    VLam,
    VPair,
    VTT,
    Value,
    Var,
    embed,
    pretty,
    substitute,
    to_value,
)
from rblam.typecheck import DeltaProfile


DEFAULT_FUEL = 10**6


class EvalError(Exception):
    pass


class Stuck(EvalError):
    """No evaluation rule applies; only reachable on ill-typed input."""


class FuelExhausted(EvalError):
    """Derivation exceeded the fuel limit."""


@dataclass(frozen=True)
class CostedResult:
    value: Value
    cost: LatticeElement


@dataclass(frozen=True)
class EvalTrace:
    """Derivation-shaped log: one node per rule application, carrying the
    delta that node contributed. Folding contributions with combine yields
    the root cost."""

    rule: str
    term: Term
    contribution: LatticeElement
    children: tuple["EvalTrace", ...] = ()


def evaluate(term: Term, deltas: DeltaProfile, fuel: int = DEFAULT_FUEL) -> CostedResult:
    """Evaluate a closed term, returning its value and accumulated cost."""
    inst = deltas.instance
    counter = [fuel]
    value, cost = _eval(term, deltas, inst, counter)
    return CostedResult(value, cost)


def _spend(counter: list[int]):
    counter[0] -= 1
    if counter[0] < 0:
        raise FuelExhausted("evaluation fuel exhausted")


def _eval(
    t: Term, d: DeltaProfile, inst: LatticeInstance, counter: list[int]
) -> tuple[Value, LatticeElement]:
    _spend(counter)
    v = to_value(t)
    if v is not None:
        return v, inst.bottom()
    match t:
        case Pair(a, b):
            va, ka = _eval(a, d, inst, counter)
            vb, kb = _eval(b, d, inst, counter)
            return VPair(va, vb), inst.combine(ka, kb)
        case Fst(arg):
            va, k = _eval(arg, d, inst, counter)
            if not isinstance(va, VPair):
                raise Stuck(f"fst of non-pair value {pretty(embed(va))}")
            return va.fst, inst.combine(k, d.proj)
        case Snd(arg):
            va, k = _eval(arg, d, inst, counter)
            if not isinstance(va, VPair):
                raise Stuck(f"snd of non-pair value {pretty(embed(va))}")
            return va.snd, inst.combine(k, d.proj)
        case If(cond, then, other):
            vc, kc = _eval(cond, d, inst, counter)
            if isinstance(vc, VTT):
                vb, kb = _eval(then, d, inst, counter)
            elif isinstance(vc, VFF):
                vb, kb = _eval(other, d, inst, counter)
            else:
                raise Stuck(f"if on non-boolean value {pretty(embed(vc))}")
            return vb, inst.combine(inst.combine(kc, kb), d.iff)
        case App(fn, arg):
            vf, kf = _eval(fn, d, inst, counter)
            if not isinstance(vf, VLam):
                raise Stuck(f"application of non-function value {pretty(embed(vf))}")
            va, ka = _eval(arg, d, inst, counter)
            body = substitute(vf.body, vf.name, va)
            vb, kb = _eval(body, d, inst, counter)
            return vb, inst.combine(inst.combine(inst.combine(kf, ka), d.app), kb)
        case BoxT(grade, body):
            vb, k = _eval(body, d, inst, counter)
            return VBox(grade, vb), k
        case Unbox(arg):
            va, k = _eval(arg, d, inst, counter)
            if not isinstance(va, VBox):
                raise Stuck(f"unbox of non-box value {pretty(embed(va))}")
            return va.value, inst.combine(k, d.unbox)
        case Var(name):
            raise Stuck(f"unbound variable {name!r}: term is not closed")
    raise Stuck(f"no rule applies to {pretty(t)}")


def evaluate_trace(
    term: Term, deltas: DeltaProfile, fuel: int = DEFAULT_FUEL
) -> tuple[CostedResult, EvalTrace]:
    """As evaluate, but also return the derivation tree."""
    inst = deltas.instance
    counter = [fuel]
    value, cost, trace = _eval_trace(term, deltas, inst, counter)
    return CostedResult(value, cost), trace


def _eval_trace(
    t: Term, d: DeltaProfile, inst: LatticeInstance, counter: list[int]
) -> tuple[Value, LatticeElement, EvalTrace]:
    _spend(counter)
    bot = inst.bottom()
    v = to_value(t)
    if v is not None:
        return v, bot, EvalTrace("Val", t, bot)
    match t:
        case Pair(a, b):
            va, ka, ta = _eval_trace(a, d, inst, counter)
            vb, kb, tb = _eval_trace(b, d, inst, counter)
            return VPair(va, vb), inst.combine(ka, kb), EvalTrace("Pair", t, bot, (ta, tb))
        case Fst(arg):
            va, k, tr = _eval_trace(arg, d, inst, counter)
            if not isinstance(va, VPair):
                raise Stuck(f"fst of non-pair value {pretty(embed(va))}")
            return va.fst, inst.combine(k, d.proj), EvalTrace("Fst", t, d.proj, (tr,))
        case Snd(arg):
            va, k, tr = _eval_trace(arg, d, inst, counter)
            if not isinstance(va, VPair):
                raise Stuck(f"snd of non-pair value {pretty(embed(va))}")
            return va.snd, inst.combine(k, d.proj), EvalTrace("Snd", t, d.proj, (tr,))
        case If(cond, then, other):
            vc, kc, tc = _eval_trace(cond, d, inst, counter)
            if isinstance(vc, VTT):
                rule = "IfT"
                vb, kb, tb = _eval_trace(then, d, inst, counter)
            elif isinstance(vc, VFF):
                rule = "IfF"
                vb, kb, tb = _eval_trace(other, d, inst, counter)
            else:
                raise Stuck(f"if on non-boolean value {pretty(embed(vc))}")
            cost = inst.combine(inst.combine(kc, kb), d.iff)
            return vb, cost, EvalTrace(rule, t, d.iff, (tc, tb))
        case App(fn, arg):
            vf, kf, tf = _eval_trace(fn, d, inst, counter)
            if not isinstance(vf, VLam):
                raise Stuck(f"application of non-function value {pretty(embed(vf))}")
            va, ka, ta = _eval_trace(arg, d, inst, counter)
            body = substitute(vf.body, vf.name, va)
            vb, kb, tb = _eval_trace(body, d, inst, counter)
            cost = inst.combine(inst.combine(inst.combine(kf, ka), d.app), kb)
            return vb, cost, EvalTrace("App", t, d.app, (tf, ta, tb))
        case BoxT(grade, body):
            vb, k, tb = _eval_trace(body, d, inst, counter)
            return VBox(grade, vb), k, EvalTrace("Box", t, bot, (tb,))
        case Unbox(arg):
            va, k, tr = _eval_trace(arg, d, inst, counter)
            if not isinstance(va, VBox):
                raise Stuck(f"unbox of non-box value {pretty(embed(va))}")
            return va.value, inst.combine(k, d.unbox), EvalTrace("Unbox", t, d.unbox, (tr,))
        case Var(name):
            raise Stuck(f"unbound variable {name!r}: term is not closed")
    raise Stuck(f"no rule applies to {pretty(t)}")


def trace_cost(trace: EvalTrace, inst: LatticeInstance) -> LatticeElement:
    """Fold per-node contributions with combine; equals the reported cost."""
    total = trace.contribution
    for child in trace.children:
        total = inst.combine(total, trace_cost(child, inst))
    return total


def format_trace(trace: EvalTrace, inst: LatticeInstance, indent: int = 0) -> str:
    pad = "  " * indent
    line = f"{pad}{trace.rule} +{inst.format(trace.contribution)}  {pretty(trace.term)}"
    lines = [line]
    for child in trace.children:
        lines.append(format_trace(child, inst, indent + 1))
    return "\n".join(lines)
