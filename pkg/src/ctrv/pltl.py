"""Past-time linear temporal logic: AST, lasso-trace semantics, negation
normal form, and a SAT-reducing bounded model checker for lasso traces.

Traces are ultimately periodic words prefix.loop^omega over sets of
proposition names.  The evaluator is exact on such traces, including for
formulas that mix past and future modalities: every subformula's truth value
along an ultimately periodic trace is itself ultimately periodic, and the
evaluator computes a sound stabilization threshold per subformula to
normalize positions before memoizing.
"""

from __future__ import annotations

from dataclasses import dataclass

from .sat import Cnf, SatResult, SolverConfig, solve


# ---------------------------------------------------------------------------
# Formula AST


class Formula:
    """Base class for PLTL formulas; subclasses are immutable and hashable."""

    __slots__ = ()


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    arg: Formula


@dataclass(frozen=True)
class Always(Formula):
    arg: Formula


@dataclass(frozen=True)
class Prev(Formula):
    """Strong previous: false at the first position."""

    arg: Formula


@dataclass(frozen=True)
class PrevW(Formula):
    """Weak previous, the dual of Prev: true at the first position.

    Needed so that negation normal form exists: !X~ f and X~ !f differ at
    the trace origin.
    """

    arg: Formula


@dataclass(frozen=True)
class Since(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Trigger(Formula):
    """Dual of Since."""

    left: Formula
    right: Formula


@dataclass(frozen=True)
class Once(Formula):
    arg: Formula


@dataclass(frozen=True)
class Historically(Formula):
    arg: Formula


TRUE = TrueF()
FALSE = FalseF()


def conj(*args: Formula) -> Formula:
    """N-ary conjunction, flattening nested conjunctions."""
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, And):
            flat.extend(a.args)
        elif isinstance(a, TrueF):
            continue
        else:
            flat.append(a)
    if any(isinstance(a, FalseF) for a in flat):
        return FALSE
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*args: Formula) -> Formula:
    """N-ary disjunction, flattening nested disjunctions."""
    flat: list[Formula] = []
    for a in args:
        if isinstance(a, Or):
            flat.extend(a.args)
        elif isinstance(a, FalseF):
            continue
        else:
            flat.append(a)
    if any(isinstance(a, TrueF) for a in flat):
        return TRUE
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def neg(f: Formula) -> Formula:
    if isinstance(f, TrueF):
        return FALSE
    if isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def conjuncts(f: Formula) -> tuple[Formula, ...]:
    return f.args if isinstance(f, And) else (f,)


def collect_props(f: Formula) -> set[str]:
    out: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Prop):
            out.add(g.name)
        elif isinstance(g, (Not, Next, Eventually, Always, Prev, PrevW, Once,
                            Historically)):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)
        elif isinstance(g, (Implies, Until, Release, Since, Trigger)):
            stack.append(g.left)
            stack.append(g.right)
    return out


def rename_props(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename atoms; names missing from the map are kept."""
    if isinstance(f, Prop):
        return Prop(mapping.get(f.name, f.name))
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return Not(rename_props(f.arg, mapping))
    if isinstance(f, And):
        return And(tuple(rename_props(a, mapping) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(rename_props(a, mapping) for a in f.args))
    if isinstance(f, Implies):
        return Implies(rename_props(f.left, mapping), rename_props(f.right, mapping))
    if isinstance(f, Next):
        return Next(rename_props(f.arg, mapping))
    if isinstance(f, Until):
        return Until(rename_props(f.left, mapping), rename_props(f.right, mapping))
    if isinstance(f, Release):
        return Release(rename_props(f.left, mapping), rename_props(f.right, mapping))
    if isinstance(f, Eventually):
        return Eventually(rename_props(f.arg, mapping))
    if isinstance(f, Always):
        return Always(rename_props(f.arg, mapping))
    if isinstance(f, Prev):
        return Prev(rename_props(f.arg, mapping))
    if isinstance(f, PrevW):
        return PrevW(rename_props(f.arg, mapping))
    if isinstance(f, Since):
        return Since(rename_props(f.left, mapping), rename_props(f.right, mapping))
    if isinstance(f, Trigger):
        return Trigger(rename_props(f.left, mapping), rename_props(f.right, mapping))
    if isinstance(f, Once):
        return Once(rename_props(f.arg, mapping))
    if isinstance(f, Historically):
        return Historically(rename_props(f.arg, mapping))
    raise TypeError(f"unknown formula node {f!r}")


_UNARY_SPELLING = {
    Next: "X", Eventually: "F", Always: "G",
    Prev: "X~", PrevW: "Z", Once: "F~", Historically: "G~",
}
_BINARY_SPELLING = {Until: "U", Release: "R", Since: "S", Trigger: "T"}


def to_str(f: Formula) -> str:
    """Canonical ASCII rendering (G, F, X, U, S, R, T, X~, F~, G~, Z)."""
    return _to_str(f, 0)


# precedence: -> (1), | (2), & (3), U/S/R/T (4), unary (5)
def _to_str(f: Formula, parent_prec: int) -> str:
    if isinstance(f, Prop):
        return f.name
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Not):
        return "!" + _to_str(f.arg, 5)
    if isinstance(f, And):
        s = " & ".join(_to_str(a, 3) for a in f.args)
        return f"({s})" if parent_prec > 3 else s
    if isinstance(f, Or):
        s = " | ".join(_to_str(a, 2) for a in f.args)
        return f"({s})" if parent_prec > 2 else s
    if isinstance(f, Implies):
        s = f"{_to_str(f.left, 2)} -> {_to_str(f.right, 1)}"
        return f"({s})" if parent_prec > 1 else s
    for cls, spelling in _UNARY_SPELLING.items():
        if isinstance(f, cls):
            return f"{spelling} {_to_str(f.arg, 5)}"
    for cls, spelling in _BINARY_SPELLING.items():
        if isinstance(f, cls):
            s = f"{_to_str(f.left, 5)} {spelling} {_to_str(f.right, 5)}"
            return f"({s})" if parent_prec > 4 else s
    raise TypeError(f"unknown formula node {f!r}")


# ---------------------------------------------------------------------------
# Lasso traces


@dataclass(frozen=True)
class LassoTrace:
    """The infinite trace prefix . loop^omega; loop must be nonempty."""

    prefix: tuple[frozenset[str], ...]
    loop: tuple[frozenset[str], ...]

    def __post_init__(self):
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    @staticmethod
    def make(prefix, loop) -> "LassoTrace":
        return LassoTrace(tuple(frozenset(s) for s in prefix),
                          tuple(frozenset(s) for s in loop))

    def at(self, i: int) -> frozenset[str]:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.loop[(i - len(self.prefix)) % len(self.loop)]

    def to_json_obj(self) -> dict:
        return {
            "prefix": [sorted(s) for s in self.prefix],
            "loop": [sorted(s) for s in self.loop],
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "LassoTrace":
        return LassoTrace.make(obj["prefix"], obj["loop"])


# ---------------------------------------------------------------------------
# Trace semantics


class _Evaluator:
    """Memoizing evaluator over one lasso trace.

    Positions are normalized with per-subformula stabilization thresholds:
    for i >= thr(f), the truth of f at i equals its truth at i + period.
    Atoms stabilize at the prefix length; past operators add one period
    (Since/Trigger/Once/Historically) or one step (previous); future
    operators inherit their operands' threshold, and their unbounded scans
    are cut off one period past the threshold.
    """

    def __init__(self, trace: LassoTrace):
        self.trace = trace
        self.u = len(trace.prefix)
        self.p = len(trace.loop)
        self._thr: dict[int, int] = {}
        self._memo: dict[tuple[int, int], bool] = {}

    def thr(self, f: Formula) -> int:
        key = id(f)
        cached = self._thr.get(key)
        if cached is not None:
            return cached
        if isinstance(f, (TrueF, FalseF)):
            t = 0
        elif isinstance(f, Prop):
            t = self.u
        elif isinstance(f, Not):
            t = self.thr(f.arg)
        elif isinstance(f, (And, Or)):
            t = max((self.thr(a) for a in f.args), default=0)
        elif isinstance(f, Implies):
            t = max(self.thr(f.left), self.thr(f.right))
        elif isinstance(f, Next):
            t = self.thr(f.arg)
        elif isinstance(f, (Eventually, Always)):
            t = self.thr(f.arg)
        elif isinstance(f, (Until, Release)):
            t = max(self.thr(f.left), self.thr(f.right))
        elif isinstance(f, (Prev, PrevW)):
            t = self.thr(f.arg) + 1
        elif isinstance(f, (Once, Historically)):
            t = self.thr(f.arg) + self.p
        elif isinstance(f, (Since, Trigger)):
            t = max(self.thr(f.left), self.thr(f.right)) + self.p
        else:
            raise TypeError(f"unknown formula node {f!r}")
        self._thr[key] = t
        return t

    def eval(self, f: Formula, i: int) -> bool:
        t = self.thr(f)
        if i > t:
            i = t + (i - t) % self.p
        key = (id(f), i)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        value = self._compute(f, i)
        self._memo[key] = value
        return value

    def _compute(self, f: Formula, i: int) -> bool:
        if isinstance(f, Prop):
            return f.name in self.trace.at(i)
        if isinstance(f, TrueF):
            return True
        if isinstance(f, FalseF):
            return False
        if isinstance(f, Not):
            return not self.eval(f.arg, i)
        if isinstance(f, And):
            return all(self.eval(a, i) for a in f.args)
        if isinstance(f, Or):
            return any(self.eval(a, i) for a in f.args)
        if isinstance(f, Implies):
            return not self.eval(f.left, i) or self.eval(f.right, i)
        if isinstance(f, Next):
            return self.eval(f.arg, i + 1)
        if isinstance(f, Prev):
            return i > 0 and self.eval(f.arg, i - 1)
        if isinstance(f, PrevW):
            return i == 0 or self.eval(f.arg, i - 1)
        if isinstance(f, Since):
            j = i
            while j >= 0:
                if self.eval(f.right, j):
                    return True
                if not self.eval(f.left, j):
                    return False
                j -= 1
            return False
        if isinstance(f, Trigger):
            j = i
            while j >= 0:
                if not self.eval(f.right, j):
                    return False
                if self.eval(f.left, j):
                    return True
                j -= 1
            return True
        if isinstance(f, Once):
            return any(self.eval(f.arg, j) for j in range(i, -1, -1))
        if isinstance(f, Historically):
            return all(self.eval(f.arg, j) for j in range(i, -1, -1))
        if isinstance(f, Until):
            end = max(i, max(self.thr(f.left), self.thr(f.right))) + self.p
            for k in range(i, end):
                if self.eval(f.right, k):
                    return True
                if not self.eval(f.left, k):
                    return False
            return False
        if isinstance(f, Release):
            end = max(i, max(self.thr(f.left), self.thr(f.right))) + self.p
            for k in range(i, end):
                if not self.eval(f.right, k):
                    return False
                if self.eval(f.left, k):
                    return True
            return True
        if isinstance(f, Eventually):
            end = max(i, self.thr(f.arg)) + self.p
            return any(self.eval(f.arg, k) for k in range(i, end))
        if isinstance(f, Always):
            end = max(i, self.thr(f.arg)) + self.p
            return all(self.eval(f.arg, k) for k in range(i, end))
        raise TypeError(f"unknown formula node {f!r}")


def eval_formula(trace: LassoTrace, i: int, f: Formula) -> bool:
    """Decide trace, i |= f.  Total; i must be nonnegative."""
    if i < 0:
        raise ValueError("position must be nonnegative")
    return _Evaluator(trace).eval(f, i)


# ---------------------------------------------------------------------------
# Negation normal form


def nnf(f: Formula) -> Formula:
    """Push negations to the atoms; the result is eval-equivalent.

    Standard dualities are used (U/R, S/T, F/G, F~/G~, X self-dual); the
    strong previous dualizes to the weak previous at the trace origin.
    """
    if isinstance(f, (Prop, TrueF, FalseF)):
        return f
    if isinstance(f, Not):
        return _nnf_neg(f.arg)
    if isinstance(f, And):
        return And(tuple(nnf(a) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(nnf(a) for a in f.args))
    if isinstance(f, Implies):
        return Or((_nnf_neg(f.left), nnf(f.right)))
    if isinstance(f, Next):
        return Next(nnf(f.arg))
    if isinstance(f, Until):
        return Until(nnf(f.left), nnf(f.right))
    if isinstance(f, Release):
        return Release(nnf(f.left), nnf(f.right))
    if isinstance(f, Eventually):
        return Eventually(nnf(f.arg))
    if isinstance(f, Always):
        return Always(nnf(f.arg))
    if isinstance(f, Prev):
        return Prev(nnf(f.arg))
    if isinstance(f, PrevW):
        return PrevW(nnf(f.arg))
    if isinstance(f, Since):
        return Since(nnf(f.left), nnf(f.right))
    if isinstance(f, Trigger):
        return Trigger(nnf(f.left), nnf(f.right))
    if isinstance(f, Once):
        return Once(nnf(f.arg))
    if isinstance(f, Historically):
        return Historically(nnf(f.arg))
    raise TypeError(f"unknown formula node {f!r}")


def _nnf_neg(f: Formula) -> Formula:
    if isinstance(f, Prop):
        return Not(f)
    if isinstance(f, TrueF):
        return FALSE
    if isinstance(f, FalseF):
        return TRUE
    if isinstance(f, Not):
        return nnf(f.arg)
    if isinstance(f, And):
        return Or(tuple(_nnf_neg(a) for a in f.args))
    if isinstance(f, Or):
        return And(tuple(_nnf_neg(a) for a in f.args))
    if isinstance(f, Implies):
        return And((nnf(f.left), _nnf_neg(f.right)))
    if isinstance(f, Next):
        return Next(_nnf_neg(f.arg))
    if isinstance(f, Until):
        return Release(_nnf_neg(f.left), _nnf_neg(f.right))
    if isinstance(f, Release):
        return Until(_nnf_neg(f.left), _nnf_neg(f.right))
    if isinstance(f, Eventually):
        return Always(_nnf_neg(f.arg))
    if isinstance(f, Always):
        return Eventually(_nnf_neg(f.arg))
    if isinstance(f, Prev):
        return PrevW(_nnf_neg(f.arg))
    if isinstance(f, PrevW):
        return Prev(_nnf_neg(f.arg))
    if isinstance(f, Since):
        return Trigger(_nnf_neg(f.left), _nnf_neg(f.right))
    if isinstance(f, Trigger):
        return Since(_nnf_neg(f.left), _nnf_neg(f.right))
    if isinstance(f, Once):
        return Historically(_nnf_neg(f.arg))
    if isinstance(f, Historically):
        return Once(_nnf_neg(f.arg))
    raise TypeError(f"unknown formula node {f!r}")
