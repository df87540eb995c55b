"""Bounded model checking of PLTL over lasso traces, by reduction to SAT.

A bound k fixes a trace skeleton with k positions and a loop-start selector
j < k: positions 0..j-1 form the prefix and positions j..k-1 repeat forever.
For each loop start, the formula's truth at position 0 is compiled into a
Boolean circuit by symbolically executing the same threshold-normalized
semantics the concrete evaluator uses, so past operators are unrolled
exactly (including re-entries into the loop) and future operators are cut
off one period past their operands' stabilization threshold.

Reported counterexamples are always re-checked with the concrete evaluator
before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass

from .pltl import (
    FALSE, TRUE, Always, And, Eventually, FalseF, Formula, Historically,
    Implies, LassoTrace, Next, Not, Once, Or, Prev, PrevW, Prop, Release,
    Since, Trigger, TrueF, Until, collect_props, conjuncts, eval_formula,
    neg, nnf,
)
from .sat import Cnf, SolverConfig, solve

_FALSE_LIT = 0
_TRUE_LIT = 1


class _Circuit:
    """Hash-consed and-inverter circuit; literals are 2*node + sign."""

    def __init__(self):
        self.nodes: list[tuple] = [("const",)]
        self.cons: dict[tuple, int] = {}

    def mk_var(self, key) -> int:
        desc = ("v", key)
        nid = self.cons.get(desc)
        if nid is None:
            nid = len(self.nodes)
            self.nodes.append(desc)
            self.cons[desc] = nid
        return 2 * nid

    def mk_and(self, lits) -> int:
        seen: set[int] = set()
        out: list[int] = []
        for l in lits:
            if l == _TRUE_LIT or l in seen:
                continue
            if l == _FALSE_LIT or l ^ 1 in seen:
                return _FALSE_LIT
            seen.add(l)
            out.append(l)
        if not out:
            return _TRUE_LIT
        if len(out) == 1:
            return out[0]
        out.sort()
        desc = ("a", tuple(out))
        nid = self.cons.get(desc)
        if nid is None:
            nid = len(self.nodes)
            self.nodes.append(desc)
            self.cons[desc] = nid
        return 2 * nid

    def mk_or(self, lits) -> int:
        return self.mk_and([l ^ 1 for l in lits]) ^ 1

    def mk_not(self, lit: int) -> int:
        return lit ^ 1

    def mk_implies(self, a: int, b: int) -> int:
        return self.mk_or([a ^ 1, b])


def _circuit_to_cnf(circ: _Circuit, root_lit: int,
                    ) -> tuple[list[list[int]], dict[int, int], int]:
    """Plaisted-Greenbaum conversion asserting ``root_lit``.

    Returns (clauses, node->cnf-var map, num_vars).  Every var node gets a
    CNF variable (in creation order, before any auxiliary variable), so
    callers can rely on a stable atom numbering.
    """
    nodes = circ.nodes
    var_of: dict[int, int] = {}
    next_var = 1
    for nid, desc in enumerate(nodes):
        if desc[0] == "v":
            var_of[nid] = next_var
            next_var += 1

    # polarity marking: 1 = positive occurrence, 2 = negative
    pol = bytearray(len(nodes))
    stack = [(root_lit, True)]
    while stack:
        lit, occ_pos = stack.pop()
        nid = lit >> 1
        node_pos = occ_pos == (lit & 1 == 0)
        bit = 1 if node_pos else 2
        if pol[nid] & bit:
            continue
        pol[nid] |= bit
        desc = nodes[nid]
        if desc[0] == "a":
            for child in desc[1]:
                child_node_pos = node_pos == (child & 1 == 0)
                stack.append((child, child_node_pos))

    for nid, desc in enumerate(nodes):
        if desc[0] == "a" and pol[nid]:
            var_of[nid] = next_var
            next_var += 1

    def lit_of(circuit_lit: int) -> int:
        v = var_of[circuit_lit >> 1]
        return -v if circuit_lit & 1 else v

    clauses: list[list[int]] = []
    for nid, desc in enumerate(nodes):
        if desc[0] != "a" or not pol[nid]:
            continue
        v = var_of[nid]
        children = desc[1]
        if pol[nid] & 1:
            for child in children:
                clauses.append([-v, lit_of(child)])
        if pol[nid] & 2:
            clauses.append([v] + [-lit_of(child) for child in children])
    clauses.append([lit_of(root_lit)])
    return clauses, var_of, next_var - 1


class _Thresholds:
    """Stabilization thresholds for one (prefix length, period) skeleton."""

    def __init__(self, u: int, p: int):
        self.u = u
        self.p = p
        self._cache: dict[int, int] = {}

    def get(self, f: Formula) -> int:
        key = id(f)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if isinstance(f, (TrueF, FalseF)):
            t = 0
        elif isinstance(f, Prop):
            t = self.u
        elif isinstance(f, Not):
            t = self.get(f.arg)
        elif isinstance(f, (And, Or)):
            t = max((self.get(a) for a in f.args), default=0)
        elif isinstance(f, Implies):
            t = max(self.get(f.left), self.get(f.right))
        elif isinstance(f, (Next, Eventually, Always)):
            t = self.get(f.arg)
        elif isinstance(f, (Until, Release)):
            t = max(self.get(f.left), self.get(f.right))
        elif isinstance(f, (Prev, PrevW)):
            t = self.get(f.arg) + 1
        elif isinstance(f, (Once, Historically)):
            t = self.get(f.arg) + self.p
        elif isinstance(f, (Since, Trigger)):
            t = max(self.get(f.left), self.get(f.right)) + self.p
        else:
            raise TypeError(f"unknown formula node {f!r}")
        self._cache[key] = t
        return t


class _SymbolicLasso:
    """Compiles formula truth at trace positions into circuit literals,
    for the k-position skeleton with loop start j."""

    def __init__(self, circ: _Circuit, k: int, j: int):
        self.circ = circ
        self.k = k
        self.j = j
        self.L = k - j
        self.thr = _Thresholds(j, self.L)
        self.memo: dict[tuple[int, int], int] = {}

    def _norm(self, f: Formula, i: int) -> int:
        t = self.thr.get(f)
        if i > t:
            i = t + (i - t) % self.L
        return i

    def sem(self, f: Formula, i: int) -> int:
        i = self._norm(f, i)
        key = (id(f), i)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        lit = self._compute(f, i)
        self.memo[key] = lit
        return lit

    def _atom(self, name: str, i: int) -> int:
        slot = i if i < self.k else self.j + (i - self.j) % self.L
        return self.circ.mk_var(("atom", name, slot))

    def _compute(self, f: Formula, i: int) -> int:
        circ = self.circ
        if isinstance(f, Prop):
            return self._atom(f.name, i)
        if isinstance(f, TrueF):
            return _TRUE_LIT
        if isinstance(f, FalseF):
            return _FALSE_LIT
        if isinstance(f, Not):
            return self.sem(f.arg, i) ^ 1
        if isinstance(f, And):
            return circ.mk_and([self.sem(a, i) for a in f.args])
        if isinstance(f, Or):
            return circ.mk_or([self.sem(a, i) for a in f.args])
        if isinstance(f, Implies):
            return circ.mk_implies(self.sem(f.left, i), self.sem(f.right, i))
        if isinstance(f, Next):
            return self.sem(f.arg, i + 1)
        if isinstance(f, Prev):
            return _FALSE_LIT if i == 0 else self.sem(f.arg, i - 1)
        if isinstance(f, PrevW):
            return _TRUE_LIT if i == 0 else self.sem(f.arg, i - 1)
        if isinstance(f, Since):
            acc = _FALSE_LIT
            for m in range(0, i + 1):
                acc = circ.mk_or(
                    [self.sem(f.right, m), circ.mk_and([self.sem(f.left, m), acc])])
            return acc
        if isinstance(f, Trigger):
            acc = _TRUE_LIT
            for m in range(0, i + 1):
                acc = circ.mk_and(
                    [self.sem(f.right, m), circ.mk_or([self.sem(f.left, m), acc])])
            return acc
        if isinstance(f, Once):
            acc = _FALSE_LIT
            for m in range(0, i + 1):
                acc = circ.mk_or([self.sem(f.arg, m), acc])
            return acc
        if isinstance(f, Historically):
            acc = _TRUE_LIT
            for m in range(0, i + 1):
                acc = circ.mk_and([self.sem(f.arg, m), acc])
            return acc
        if isinstance(f, Until):
            end = max(i, self.thr.get(f)) + self.L
            acc = _FALSE_LIT
            for m in range(end - 1, i - 1, -1):
                acc = circ.mk_or(
                    [self.sem(f.right, m), circ.mk_and([self.sem(f.left, m), acc])])
            return acc
        if isinstance(f, Release):
            end = max(i, self.thr.get(f)) + self.L
            acc = _TRUE_LIT
            for m in range(end - 1, i - 1, -1):
                acc = circ.mk_and(
                    [self.sem(f.right, m), circ.mk_or([self.sem(f.left, m), acc])])
            return acc
        if isinstance(f, Eventually):
            end = max(i, self.thr.get(f)) + self.L
            acc = _FALSE_LIT
            for m in range(end - 1, i - 1, -1):
                acc = circ.mk_or([self.sem(f.arg, m), acc])
            return acc
        if isinstance(f, Always):
            end = max(i, self.thr.get(f)) + self.L
            acc = _TRUE_LIT
            for m in range(end - 1, i - 1, -1):
                acc = circ.mk_and([self.sem(f.arg, m), acc])
            return acc
        raise TypeError(f"unknown formula node {f!r}")


@dataclass
class BmcVarMap:
    """Decoding data for a monolithic BMC encoding."""

    k: int
    props: tuple[str, ...]
    atom_vars: dict[tuple[str, int], int]
    sel_vars: dict[int, int]

    def decode(self, assignment: dict[int, bool]) -> LassoTrace:
        chosen = None
        for j in sorted(self.sel_vars):
            if assignment.get(self.sel_vars[j], False):
                chosen = j
                break
        if chosen is None:
            raise ValueError("no loop selector is true in the assignment")
        return _decode_slots(assignment, self.atom_vars, self.props, self.k, chosen)


def _decode_slots(assignment: dict[int, bool],
                  atom_vars: dict[tuple[str, int], int],
                  props, k: int, j: int) -> LassoTrace:
    slots = []
    for slot in range(k):
        here = set()
        for name in props:
            var = atom_vars.get((name, slot))
            if var is not None and assignment.get(var, False):
                here.add(name)
        slots.append(frozenset(here))
    return LassoTrace(tuple(slots[:j]), tuple(slots[j:]))


def encode_bmc(f: Formula, k: int) -> tuple[Cnf, BmcVarMap]:
    """Encode "some lasso with at most k positions satisfies f at position 0".

    The CNF is satisfiable iff such a lasso exists; any satisfying
    assignment decodes (via the returned map) to a witness trace.
    """
    if k < 1:
        raise ValueError("bound must be at least 1")
    circ = _Circuit()
    props = tuple(sorted(collect_props(f)))
    atom_vars_keys = [("atom", name, slot) for slot in range(k) for name in props]
    for key in atom_vars_keys:
        circ.mk_var(key)
    sel_lits = {j: circ.mk_var(("sel", j)) for j in range(k)}
    guarded = []
    for j in range(k):
        root_j = _SymbolicLasso(circ, k, j).sem(f, 0)
        guarded.append(circ.mk_and([sel_lits[j], root_j]))
    top = circ.mk_or(guarded)

    if top == _FALSE_LIT:
        cnf = Cnf.from_lists(1, [[1], [-1]])
        return cnf, BmcVarMap(k, props, {}, {})
    clauses, var_of, num_vars = _circuit_to_cnf(circ, top)
    # exactly-one loop selector
    sel_vars = {j: var_of[sel_lits[j] >> 1] for j in range(k)}
    clauses.append([sel_vars[j] for j in range(k)])
    for a in range(k):
        for b in range(a + 1, k):
            clauses.append([-sel_vars[a], -sel_vars[b]])
    atom_vars = {
        (name, slot): var_of[circ.mk_var(("atom", name, slot)) >> 1]
        for slot in range(k) for name in props}
    return Cnf.from_lists(num_vars, clauses), BmcVarMap(k, props, atom_vars, sel_vars)


@dataclass(frozen=True)
class ValidUpTo:
    """No counterexample lasso with at most ``bound`` positions exists.

    This is an explicitly bounded claim, not full validity.
    """

    bound: int


@dataclass(frozen=True)
class Counterexample:
    trace: LassoTrace


CheckOutcome = ValidUpTo | Counterexample


def has_lasso_model(f: Formula, k: int,
                    config: SolverConfig | None = None) -> LassoTrace | None:
    """Search for a lasso with at most k positions satisfying f at 0.

    Solves one SAT instance per loop start (equisatisfiable with the
    monolithic encode_bmc CNF, but the instances are smaller).
    """
    if k < 1:
        raise ValueError("bound must be at least 1")
    props = tuple(sorted(collect_props(f)))
    for j in range(k):
        circ = _Circuit()
        root = _SymbolicLasso(circ, k, j).sem(f, 0)
        if root == _FALSE_LIT:
            continue
        if root == _TRUE_LIT:
            slots = [frozenset()] * k
            return LassoTrace(tuple(slots[:j]), tuple(slots[j:]))
        clauses, var_of, num_vars = _circuit_to_cnf(circ, root)
        result = solve(Cnf.from_lists(num_vars, clauses), config)
        if result.satisfiable:
            atom_vars = {}
            for slot in range(k):
                for name in props:
                    nid = circ.cons.get(("v", ("atom", name, slot)))
                    if nid is not None:
                        atom_vars[(name, slot)] = var_of[nid]
            return _decode_slots(result.assignment, atom_vars, props, k, j)
    return None


def check_validity(f: Formula, k: int,
                   config: SolverConfig | None = None) -> CheckOutcome:
    """Bounded validity: f is valid up to k iff !f has no lasso model of
    size at most k.  Counterexamples are confirmed by the evaluator."""
    negated = nnf(neg(f))
    trace = has_lasso_model(negated, k, config)
    if trace is None:
        return ValidUpTo(k)
    if not eval_formula(trace, 0, negated):
        raise AssertionError(
            "encoder produced a trace the evaluator rejects; "
            f"formula={negated!r} trace={trace!r}")
    return Counterexample(trace)


def check_refinement_ltl(premise: Formula, conclusion: Formula, k: int,
                         config: SolverConfig | None = None) -> CheckOutcome:
    """Bounded validity of premise => conclusion.

    The conclusion is split into conjuncts (the implication is valid up to k
    iff each conjunct implication is); conjuncts that literally occur in the
    premise are discharged syntactically.
    """
    premise_parts = set(conjuncts(premise))
    for part in conjuncts(conclusion):
        if part in premise_parts or isinstance(part, TrueF):
            continue
        outcome = check_validity(Implies(premise, part), k, config)
        if isinstance(outcome, Counterexample):
            return outcome
    return ValidUpTo(k)
