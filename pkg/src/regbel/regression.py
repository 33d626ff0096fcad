"""Backward reduction of belief and projection queries over an action history
to expressions about the initial state only."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .simplify import fold, normalize_fluent_atoms, one_point_elim, _conjuncts, _defines
from .syntax import (
    ActionTerm, And, App, Atom, Cond, Exists, Fluent, Formula, Lit, Not, Num,
    Or, S0, Situation, TRUE, Term, Var, conj, fluent_names, free_vars,
    fresh_name, implies, mentions_do, pretty, substitute, substitute_fluents,
)
from .theory import ActionTheory, TheoryError


class RegressionError(Exception):
    pass


@dataclass(frozen=True)
class BeliefVar:
    """A value variable standing for one fluent's initial value."""

    fluent: str
    name: str
    discrete: bool


@dataclass(frozen=True)
class InitialBeliefExpr:
    """The regressed form of a belief query: likelihood factors times the prior
    over initial fluent values, restricted to the regressed condition, with the
    normalization condition built the same way from ``true``."""

    vars: tuple[BeliefVar, ...]
    factors: tuple[Term, ...]
    prior: Term
    condition: Formula
    gamma_condition: Formula

    def __str__(self) -> str:
        factors = " * ".join(pretty(f) for f in self.factors) or "1"
        return (f"vars: {', '.join(v.name for v in self.vars)}\n"
                f"likelihood: {factors}\n"
                f"prior: {pretty(self.prior)}\n"
                f"condition: {pretty(self.condition)}\n"
                f"gamma condition: {pretty(self.gamma_condition)}")


@dataclass(frozen=True)
class TraceStep:
    rule: str
    action: ActionTerm | None
    before: str
    after: str
    factor: str | None = None


@dataclass
class RegressionTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def render(self) -> str:
        lines = []
        for i, s in enumerate(self.steps, start=1):
            roman = f"({_roman(i)})"
            what = f" [{s.action}]" if s.action else ""
            lines.append(f"{roman} {s.rule}{what}: {s.before}")
            if s.factor:
                lines.append(f"      factor {s.factor}")
            lines.append(f"      => {s.after}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"steps": [{"rule": s.rule,
                           "action": str(s.action) if s.action else None,
                           "before": s.before, "after": s.after,
                           "factor": s.factor} for s in self.steps]}


def _roman(n: int) -> str:
    pairs = [(10, "x"), (9, "ix"), (5, "v"), (4, "iv"), (1, "i")]
    out = ""
    for v, sym in pairs:
        while n >= v:
            out += sym
            n -= v
    return out


# ---------------------------------------------------------------------------
# term and formula regression

def regress_term(theory: ActionTheory, t: Term) -> Term:
    """Eliminate do-symbols from a term by repeatedly substituting the matching
    successor-state right-hand side."""
    match t:
        case Num() | Var():
            return t
        case Fluent(name, sit):
            if sit is None or sit.is_initial:
                return t
            action = sit.actions[-1]
            rest = Situation(sit.actions[:-1])
            rhs = theory.ssa_rhs(name, action)
            rhs = _reattach(rhs, rest)
            return regress_term(theory, rhs)
        case App(op, args):
            return App(op, tuple(regress_term(theory, a) for a in args))
        case Cond(g, t1, t2):
            return Cond(regress_formula(theory, g),
                        regress_term(theory, t1), regress_term(theory, t2))
        case _:
            raise RegressionError(f"cannot regress term {t!r}")


def _reattach(e, sit: Situation):
    """Move an effect expression (over ``now``) to a concrete situation."""
    from .syntax import attach_situation
    return attach_situation(e, sit)


def regress_formula(theory: ActionTheory, phi: Formula) -> Formula:
    match phi:
        case Lit():
            return phi
        case Atom(rel, l, r):
            return Atom(rel, regress_term(theory, l), regress_term(theory, r))
        case And(items):
            return And(tuple(regress_formula(theory, f) for f in items))
        case Or(items):
            return Or(tuple(regress_formula(theory, f) for f in items))
        case Not(b):
            return Not(regress_formula(theory, b))
        case Exists(v, b):
            return Exists(v, regress_formula(theory, b))
    raise TypeError(f"not a formula: {phi!r}")


def regress_projection(theory: ActionTheory, phi: Formula, sit: Situation) -> Formula:
    """Reduce a situation-suppressed formula after the action sequence to a
    do-free formula about the initial situation."""
    _check_query(phi)
    from .syntax import attach_situation
    grounded = attach_situation(phi, sit)
    out = fold(regress_formula(theory, grounded))
    assert not mentions_do(out)
    return out


# ---------------------------------------------------------------------------
# belief regression

@dataclass(frozen=True)
class DensityPseudoTerm:
    """Unnormalized weight/density of the successor of the initial world with
    the given fluent values, restricted by the condition."""

    value_vars: tuple[tuple[str, str], ...]  # (fluent, variable) pairs
    condition: Formula
    sit: Situation


def step_density(theory: ActionTheory, d: DensityPseudoTerm,
                 sensed_var: str | None = None):
    """Peel the last action off the density pseudo-term.  Returns
    ``(factor, defining_conjunct_var, next_term)``; the factor is ``None`` for
    physical actions."""
    if d.sit.is_initial:
        raise RegressionError("density term already at the initial situation")
    action = d.sit.actions[-1]
    rest = Situation(d.sit.actions[:-1])
    poss = theory.precondition_of(action)
    if theory.is_sensor(action.name):
        sensor = theory.sensors[action.name]
        u = sensed_var or "v"
        factor = substitute(
            substitute_fluents(sensor.error, {sensor.target: Var(u)}),
            sensor.param.name, action.args[0])
        body = conj([d.condition, Atom("=", Fluent(sensor.target, None), Var(u))])
        cond = implies(poss, body)
        return factor, u, DensityPseudoTerm(d.value_vars, cond, rest)
    # physical: rewrite the condition through the successor-state axioms
    effects = {f.name: theory.ssa_rhs(f.name, action) for f in theory.fluents}
    cond = implies(poss, substitute_fluents(d.condition, effects))
    return None, None, DensityPseudoTerm(d.value_vars, cond, rest)


def regress_belief(theory: ActionTheory, phi: Formula,
                   situation: Situation | None = None):
    """Reduce a belief query over the action history to an expression about
    initial fluent values only.  Returns ``(InitialBeliefExpr, trace)``."""
    sit = situation if situation is not None else S0
    _check_query(phi)
    bad = fluent_names(phi) - set(theory.fluent_names)
    if bad:
        raise TheoryError(f"query mentions undeclared fluents {sorted(bad)}")

    avoid = free_vars(phi) | _theory_names(theory)
    value_vars = theory.value_vars(frozenset(avoid))
    taken = set(avoid) | set(value_vars.values())

    trace = RegressionTrace()
    cond = normalize_fluent_atoms(phi)
    if cond != phi:
        trace.steps.append(TraceStep("normalize", None, pretty(phi), pretty(cond)))
    gcond: Formula = TRUE
    factors: list[Term] = []
    sensed: list[str] = []

    d = DensityPseudoTerm(tuple(value_vars.items()), cond, sit)
    g = DensityPseudoTerm(tuple(value_vars.items()), gcond, sit)
    while not d.sit.is_initial:
        action = d.sit.actions[-1]
        u = None
        if theory.is_sensor(action.name):
            u = fresh_name("v", taken)
            taken.add(u)
            sensed.append(u)
        before = pretty(d.condition)
        factor, _, d2 = step_density(theory, d, sensed_var=u)
        _, _, g2 = step_density(theory, g, sensed_var=u)
        rule = "sensing" if factor is not None else "physical"
        trace.steps.append(TraceStep(rule, action, before, pretty(d2.condition),
                                     pretty(factor) if factor is not None else None))
        if factor is not None:
            factors.append(factor)
        d, g = d2, g2

    # replace initial fluent references by their value variables
    to_vars = {f: Var(v) for f, v in value_vars.items()}
    cond = substitute_fluents(d.condition, to_vars, only_now=False)
    gcond = substitute_fluents(g.condition, to_vars, only_now=False)
    prior = substitute_fluents(theory.prior, to_vars, only_now=False)
    trace.steps.append(TraceStep("initial-values", None,
                                 pretty(d.condition), pretty(cond)))

    cond = fold(one_point_elim(fold(cond)))
    gcond = fold(one_point_elim(fold(gcond)))
    cond, gcond, factors = _eliminate_sensed(cond, gcond, factors, sensed)
    cond, gcond = fold(cond), fold(gcond)
    factors = tuple(fold(f) for f in factors)
    trace.steps.append(TraceStep("simplify", None, "", pretty(cond)))

    expr = InitialBeliefExpr(
        vars=tuple(BeliefVar(f, v, theory.fluent(f).domain.is_finite)
                   for f, v in value_vars.items()),
        factors=factors, prior=fold(prior),
        condition=cond, gamma_condition=gcond)
    assert not mentions_do(expr.condition) and not mentions_do(expr.gamma_condition)
    for f in expr.factors:
        assert not mentions_do(f)
    return expr, trace


def _eliminate_sensed(cond: Formula, gcond: Formula, factors: list[Term],
                      sensed: list[str]):
    """Substitute each sensed-value variable by its defining conjunct (the
    regressed fluent value at sensing time) into the factors and conditions."""
    for u in sensed:
        definition = None
        for c in _conjuncts(gcond):
            definition = _defines(c, u)
            if definition is not None:
                break
        if definition is None:
            for c in _conjuncts(cond):
                definition = _defines(c, u)
                if definition is not None:
                    break
        if definition is None:
            raise RegressionError(
                f"cannot eliminate sensed value {u}; nontrivial preconditions "
                "leave it under a disjunction")
        cond = _drop_and_subst(cond, u, definition)
        gcond = _drop_and_subst(gcond, u, definition)
        factors = [substitute(f, u, definition) for f in factors]
    return cond, gcond, list(factors)


def _drop_and_subst(phi: Formula, u: str, t: Term) -> Formula:
    parts = [c for c in _conjuncts(phi) if _defines(c, u) is None]
    return fold(conj([substitute(c, u, t) for c in parts]))


def _check_query(phi: Formula):
    if mentions_do(phi):
        raise RegressionError("query must be situation-suppressed")


def _theory_names(theory: ActionTheory) -> frozenset[str]:
    out = set(theory.fluent_names)
    out |= free_vars(theory.prior)
    for s in theory.sensors.values():
        out |= free_vars(s.error)
    return frozenset(out)
