"""Model checking by subformula labeling.

The driver expands abbreviations, then labels ground subformula instances
bottom-up (operands before their operator, i.e. in ascending operator
count).  Quantifiers are handled by environment extension: a label key is
the subformula plus its environment restricted to the subformula's free
variables, which is observationally the same as textual substitution but
avoids building new syntax trees.  Until operators are least fixpoints
computed by backward propagation on the graph, which is what makes the
results correct on non-total action relations: a deadlock state's only path
is the one-state path.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .errors import BindingError, ValidationError
from .logic import (
    AU,
    AX,
    EU,
    DomainElem,
    Eq,
    Exists,
    Formula,
    Implies,
    Not,
    PlayerAtom,
    Pred,
    Top,
    Var,
    expand_abbreviations,
    free_variables,
    pretty,
    well_formed,
)
from .structure import GalStructure, Valuation, eval_term

LabelKey = tuple  # (subformula, ((var, elem), ...) sorted by variable name)


def label_key(f: Formula, env: Valuation) -> LabelKey:
    fv = free_variables(f)
    return (f, tuple(sorted(((v, env[v]) for v in fv), key=lambda p: p[0].name)))


class LabelStore:
    """Marks per (ground subformula instance) as sets of state indices.

    Labeling is monotone: an entry is written exactly once, when its
    subformula's processing step completes, and never retracted.
    """

    def __init__(self) -> None:
        self._marks: dict[LabelKey, frozenset[int]] = {}

    def get(self, key: LabelKey) -> frozenset[int] | None:
        return self._marks.get(key)

    def require(self, key: LabelKey) -> frozenset[int]:
        marks = self._marks.get(key)
        if marks is None:
            raise KeyError(f"operand not labeled yet: {key[0]}")
        return marks

    def put(self, key: LabelKey, states: frozenset[int]) -> frozenset[int]:
        old = self._marks.get(key)
        if old is not None:
            assert old == states, "labeling must be monotone"
            return old
        self._marks[key] = states
        return states

    def __len__(self) -> int:
        return len(self._marks)

    def __contains__(self, key: LabelKey) -> bool:
        return key in self._marks


@dataclass(frozen=True)
class CheckStats:
    states: int
    actions: int
    subformulas: int
    millis: float


@dataclass(frozen=True)
class SatSet:
    """The answer set of a check: which states satisfy the formula."""

    states: frozenset[str]
    formula: Formula
    valuation: tuple[tuple[Var, DomainElem], ...]
    stats: CheckStats


# --------------------------------------------------------------------------- #
# Labeling steps.  Each marks exactly the states satisfying one (ground)
# subformula instance, assuming its operands are already in the store.


def verify_player(g: GalStructure, i: str, store: LabelStore) -> frozenset[int]:
    """Mark the states whose player set contains `i`."""
    if i not in g.sig.players:
        raise BindingError(f"unknown player {i!r}")
    marks = frozenset(
        k for k, e in enumerate(g.states) if i in g.players_at.get(e, frozenset())
    )
    return store.put(label_key(PlayerAtom(i), {}), marks)


def verify_predicate(g: GalStructure, f: Pred, env: Valuation, store: LabelStore) -> frozenset[int]:
    """Mark the states where the evaluated argument tuple is in the relation."""
    marks = set()
    for k, e in enumerate(g.states):
        args = tuple(eval_term(g, e, t, env) for t in f.args)
        if g.interp.pred(f.name, e, args):
            marks.add(k)
    return store.put(label_key(f, env), frozenset(marks))


def verify_equality(g: GalStructure, f: Eq, env: Valuation, store: LabelStore) -> frozenset[int]:
    """Mark the states where both terms evaluate to the same element."""
    marks = set()
    for k, e in enumerate(g.states):
        if eval_term(g, e, f.left, env) == eval_term(g, e, f.right, env):
            marks.add(k)
    return store.put(label_key(f, env), frozenset(marks))


def verify_not(g: GalStructure, f: Not, env: Valuation, store: LabelStore) -> frozenset[int]:
    body = store.require(label_key(f.body, env))
    universe = frozenset(range(len(g.states)))
    return store.put(label_key(f, env), universe - body)


def verify_implies(g: GalStructure, f: Implies, env: Valuation, store: LabelStore) -> frozenset[int]:
    left = store.require(label_key(f.left, env))
    right = store.require(label_key(f.right, env))
    universe = frozenset(range(len(g.states)))
    return store.put(label_key(f, env), (universe - left) | right)


def verify_ax(g: GalStructure, f: AX, env: Valuation, store: LabelStore) -> frozenset[int]:
    """Mark states all of whose successors satisfy the body; deadlock states
    are marked vacuously."""
    body = store.require(label_key(f.body, env))
    succ = g.successor_indices()
    marks = frozenset(k for k in range(len(g.states)) if all(s in body for s in succ[k]))
    return store.put(label_key(f, env), marks)


def verify_eu(g: GalStructure, f: EU, env: Valuation, store: LabelStore) -> frozenset[int]:
    """Least fixpoint Z = right or (left and some successor in Z), by
    backward breadth-first propagation from the right-marked states."""
    left = store.require(label_key(f.left, env))
    right = store.require(label_key(f.right, env))
    pred = g.predecessor_indices()
    marked = set(right)
    queue = deque(right)
    while queue:
        s = queue.popleft()
        for p in pred[s]:
            if p not in marked and p in left:
                marked.add(p)
                queue.append(p)
    return store.put(label_key(f, env), frozenset(marked))


def verify_au(g: GalStructure, f: AU, env: Valuation, store: LabelStore) -> frozenset[int]:
    """Least fixpoint Z = right or (left and >=1 successor and all
    successors in Z), by backward counting propagation.  States never
    reached — deadlocks without `right`, and cycles where only `left`
    holds — stay unmarked."""
    left = store.require(label_key(f.left, env))
    right = store.require(label_key(f.right, env))
    pred = g.predecessor_indices()
    succ = g.successor_indices()
    remaining = [len(s) for s in succ]
    marked = set(right)
    queue = deque(right)
    while queue:
        s = queue.popleft()
        for p in pred[s]:
            remaining[p] -= 1
            if remaining[p] == 0 and p not in marked and p in left:
                marked.add(p)
                queue.append(p)
    return store.put(label_key(f, env), frozenset(marked))


def verify_exists(g: GalStructure, f: Exists, env: Valuation, store: LabelStore) -> frozenset[int]:
    """Mark states where the body holds for at least one element of the
    bound variable's domain; every instance must already be labeled."""
    marks: set[int] = set()
    for d in g.domains[f.var.sort]:
        inner = dict(env)
        inner[f.var] = d
        marks |= store.require(label_key(f.body, inner))
    return store.put(label_key(f, env), frozenset(marks))


# --------------------------------------------------------------------------- #
# Driver


def _label(g: GalStructure, f: Formula, env: Valuation, store: LabelStore) -> frozenset[int]:
    key = label_key(f, env)
    hit = store.get(key)
    if hit is not None:
        return hit
    if isinstance(f, Top):
        return store.put(key, frozenset(range(len(g.states))))
    if isinstance(f, PlayerAtom):
        return verify_player(g, f.player, store)
    if isinstance(f, Pred):
        return verify_predicate(g, f, env, store)
    if isinstance(f, Eq):
        return verify_equality(g, f, env, store)
    if isinstance(f, Not):
        _label(g, f.body, env, store)
        return verify_not(g, f, env, store)
    if isinstance(f, Implies):
        _label(g, f.left, env, store)
        _label(g, f.right, env, store)
        return verify_implies(g, f, env, store)
    if isinstance(f, AX):
        _label(g, f.body, env, store)
        return verify_ax(g, f, env, store)
    if isinstance(f, EU):
        _label(g, f.left, env, store)
        _label(g, f.right, env, store)
        return verify_eu(g, f, env, store)
    if isinstance(f, AU):
        _label(g, f.left, env, store)
        _label(g, f.right, env, store)
        return verify_au(g, f, env, store)
    if isinstance(f, Exists):
        for d in g.domains[f.var.sort]:
            inner = dict(env)
            inner[f.var] = d
            _label(g, f.body, inner, store)
        return verify_exists(g, f, env, store)
    raise TypeError(f"not a core formula: {f!r}")


def _checked_valuation(g: GalStructure, f: Formula, v: Valuation | None) -> dict[Var, DomainElem]:
    v = dict(v or {})
    fv = free_variables(f)
    missing = sorted(var.name for var in fv if var not in v)
    if missing:
        raise BindingError(f"free variables not assigned: {', '.join(missing)}")
    env: dict[Var, DomainElem] = {}
    for var in fv:
        elem = v[var]
        dom = g.domains.get(var.sort, ())
        if elem.sort != var.sort or not (0 <= elem.index < len(dom)) or dom[elem.index] != elem:
            raise BindingError(
                f"binding for {var.name}:{var.sort} is not an element of that sort's domain"
            )
        env[var] = elem
    return env


def check(g: GalStructure, f: Formula, v: Valuation | None = None) -> SatSet:
    """The set of states satisfying `f` under valuation `v`.

    The structure must validate; free variables of `f` (for instance the
    starred profile variables of equilibrium formulas) must be assigned to
    elements of their sorts' domains.
    """
    violations = g.validate()
    if violations:
        raise ValidationError(violations)
    well_formed(f, g.sig)
    env = _checked_valuation(g, f, v)
    t0 = time.perf_counter()
    store = LabelStore()
    marks = _label(g, expand_abbreviations(f), env, store)
    millis = (time.perf_counter() - t0) * 1000.0
    stats = CheckStats(len(g.states), len(g.actions), len(store), millis)
    return SatSet(
        states=frozenset(g.states[k] for k in marks),
        formula=f,
        valuation=tuple(sorted(env.items(), key=lambda p: p[0].name)),
        stats=stats,
    )


def holds_at(g: GalStructure, e: str, f: Formula, v: Valuation | None = None) -> bool:
    """True iff state `e` is in check(g, f, v)."""
    g.state_index(e)
    return e in check(g, f, v).states


def result_json(sat: SatSet, initial: tuple[str, ...]) -> dict:
    """The machine-readable result object printed by the CLI."""
    return {
        "formula": pretty(sat.formula),
        "sat": sorted(sat.states),
        "initial_sat": sorted(e for e in initial if e in sat.states),
        "stats": {
            "states": sat.stats.states,
            "actions": sat.stats.actions,
            "subformulas": sat.stats.subformulas,
            "millis": round(sat.stats.millis, 3),
        },
    }
