"""CDCL SAT solver with watched literals, first-UIP learning, VSIDS decisions,
Luby restarts and phase saving, plus DIMACS CNF reading/writing.

Used as the backend for the temporal bounded-model-checking encoder and for
the ground first-order checker, and usable standalone for debugging.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ParseError(Exception):
    """Raised on malformed DIMACS input; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Cnf:
    """A CNF formula: clauses are lists of nonzero signed literals.

    An empty clause is legal and makes the formula trivially unsatisfiable.
    """

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("negative variable count")
        for clause in self.clauses:
            for lit in clause:
                if lit == 0:
                    raise ValueError("zero literal in clause")
                if abs(lit) > self.num_vars:
                    raise ValueError(
                        f"literal {lit} exceeds variable count {self.num_vars}")

    @staticmethod
    def from_lists(num_vars: int, clauses) -> "Cnf":
        return Cnf(num_vars, tuple(tuple(c) for c in clauses))


@dataclass(frozen=True)
class SatResult:
    """Either Sat with a total assignment (var -> bool) or Unsat.

    Sat assignments are verified against every clause before being returned.
    ``learned`` is the number of learned clauses, exposed for determinism
    checks.
    """

    satisfiable: bool
    assignment: dict[int, bool] | None = None
    learned: int = 0
    conflicts: int = 0

    def __bool__(self) -> bool:
        return self.satisfiable


@dataclass
class SolverConfig:
    """All solver heuristics parameters in one place."""

    var_decay: float = 0.95
    clause_decay: float = 0.999
    luby_unit: int = 100          # conflicts per Luby restart unit
    phase_saving: bool = True
    learned_cap_base: int = 4000  # start reducing the learned DB above this
    learned_cap_growth: float = 1.1
    seed: int = 0                 # reserved; solving is deterministic


def luby(i: int) -> int:
    """The i-th element (1-based) of the Luby restart sequence."""
    k = 1
    while (1 << (k + 1)) - 1 <= i:
        k += 1
    while (1 << k) - 1 != i:
        i = i - (1 << (k - 1)) + 1
        k = 1
        while (1 << (k + 1)) - 1 <= i:
            k += 1
    return 1 << (k - 1)


_UNASSIGNED, _TRUE, _FALSE = 0, 1, 2


class _VarHeap:
    """Indexed max-heap over variables keyed by an external activity list."""

    def __init__(self, activity: list[float], nvars: int):
        self.activity = activity
        self.heap = list(range(1, nvars + 1))
        self.pos = [0] * (nvars + 1)
        for i, v in enumerate(self.heap):
            self.pos[v] = i + 1  # 1-based; 0 means absent
        for i in range(len(self.heap) // 2 - 1, -1, -1):
            self._sift_down(i)

    def __bool__(self) -> bool:
        return bool(self.heap)

    def _less(self, a: int, b: int) -> bool:
        return self.activity[a] < self.activity[b]

    def _sift_up(self, i: int) -> None:
        heap, pos = self.heap, self.pos
        v = heap[i]
        while i > 0:
            parent = (i - 1) >> 1
            p = heap[parent]
            if not self._less(p, v):
                break
            heap[i] = p
            pos[p] = i + 1
            i = parent
        heap[i] = v
        pos[v] = i + 1

    def _sift_down(self, i: int) -> None:
        heap, pos = self.heap, self.pos
        n = len(heap)
        v = heap[i]
        while True:
            left = 2 * i + 1
            if left >= n:
                break
            child = left
            right = left + 1
            if right < n and self._less(heap[left], heap[right]):
                child = right
            c = heap[child]
            if not self._less(v, c):
                break
            heap[i] = c
            pos[c] = i + 1
            i = child
        heap[i] = v
        pos[v] = i + 1

    def insert(self, v: int) -> None:
        if self.pos[v]:
            return
        self.heap.append(v)
        self._sift_up(len(self.heap) - 1)

    def bumped(self, v: int) -> None:
        if self.pos[v]:
            self._sift_up(self.pos[v] - 1)

    def pop_max(self) -> int:
        heap, pos = self.heap, self.pos
        top = heap[0]
        pos[top] = 0
        last = heap.pop()
        if heap:
            heap[0] = last
            pos[last] = 1
            self._sift_down(0)
        return top


class _Solver:
    """One CDCL search instance; not reusable across solve() calls."""

    def __init__(self, cnf: Cnf, config: SolverConfig):
        self.cfg = config
        self.nvars = cnf.num_vars
        n = cnf.num_vars + 1
        self.assign = bytearray(n)            # var -> _UNASSIGNED/_TRUE/_FALSE
        self.level = [0] * n
        self.reason: list[int] = [-1] * n     # clause index or -1
        self.saved_phase = bytearray(n)       # 0 = false, 1 = true
        self.activity = [0.0] * n
        self.var_inc = 1.0
        self.cla_inc = 1.0
        # clause storage: list of lists of literal codes (2v for +v, 2v+1 for -v)
        self.clauses: list[list[int]] = []
        self.cla_activity: list[float] = []
        self.is_learned: list[bool] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * n)]
        self.trail: list[int] = []            # literal codes in assignment order
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.conflicts = 0
        self.learned_count = 0
        self.ok = True

        self.order = _VarHeap(self.activity, self.nvars)
        self._units: list[int] = []
        for clause in cnf.clauses:
            if not self._add_clause([self._code(l) for l in clause], learned=False):
                self.ok = False
                break

    @staticmethod
    def _code(lit: int) -> int:
        return 2 * lit if lit > 0 else 2 * (-lit) + 1

    def _lit_value(self, code: int) -> int:
        v = self.assign[code >> 1]
        if v == _UNASSIGNED:
            return _UNASSIGNED
        # positive literal true iff var true; negative literal flips
        if code & 1:
            return _FALSE if v == _TRUE else _TRUE
        return v

    def _add_clause(self, codes: list[int], learned: bool) -> bool:
        # dedupe and tautology check for original clauses
        if not learned:
            seen = set()
            out = []
            for c in codes:
                if c ^ 1 in seen:
                    return True  # tautology: always satisfied
                if c not in seen:
                    seen.add(c)
                    out.append(c)
            codes = out
        if len(codes) == 0:
            return False
        if len(codes) == 1:
            self._units.append(codes[0])
            return True
        idx = len(self.clauses)
        self.clauses.append(codes)
        self.cla_activity.append(0.0)
        self.is_learned.append(learned)
        self.watches[codes[0]].append(idx)
        self.watches[codes[1]].append(idx)
        return True

    def _enqueue(self, code: int, reason: int) -> bool:
        var = code >> 1
        val = _FALSE if code & 1 else _TRUE
        cur = self.assign[var]
        if cur != _UNASSIGNED:
            return cur == val
        self.assign[var] = val
        self.level[var] = len(self.trail_lim)
        self.reason[var] = reason
        self.trail.append(code)
        return True

    def _propagate(self) -> int:
        """Unit propagation; returns a conflicting clause index or -1."""
        watches = self.watches
        clauses = self.clauses
        assign = self.assign
        while self.qhead < len(self.trail):
            code = self.trail[self.qhead]
            self.qhead += 1
            falsified = code ^ 1
            watch_list = watches[falsified]
            i = j = 0
            n_watch = len(watch_list)
            while i < n_watch:
                ci = watch_list[i]
                i += 1
                clause = clauses[ci]
                # normalize: watched literals are clause[0], clause[1]
                if clause[0] == falsified:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                v = assign[first >> 1]
                if v != _UNASSIGNED and (
                        (v == _TRUE and not first & 1) or (v == _FALSE and first & 1)):
                    watch_list[j] = ci
                    j += 1
                    continue
                moved = False
                for k in range(2, len(clause)):
                    lk = clause[k]
                    vk = assign[lk >> 1]
                    if vk == _UNASSIGNED or (
                            (vk == _TRUE and not lk & 1) or (vk == _FALSE and lk & 1)):
                        clause[1], clause[k] = clause[k], clause[1]
                        watches[lk].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                # clause is unit or conflicting on clause[0]
                watch_list[j] = ci
                j += 1
                if not self._enqueue(first, ci):
                    # conflict: keep remaining watches in place
                    while i < n_watch:
                        watch_list[j] = watch_list[i]
                        j += 1
                        i += 1
                    del watch_list[j:]
                    return ci
            del watch_list[j:]
        return -1

    def _bump_var(self, var: int) -> None:
        self.activity[var] += self.var_inc
        if self.activity[var] > 1e100:
            inv = 1e-100
            for v in range(1, self.nvars + 1):
                self.activity[v] *= inv
            self.var_inc *= inv
        self.order.bumped(var)

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        """First-UIP conflict analysis; returns (learned codes, backjump level)."""
        seen = bytearray(self.nvars + 1)
        learned = [0]  # placeholder for the asserting literal
        path = 0
        p = -1
        idx = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        while True:
            clause = self.clauses[confl]
            if self.is_learned[confl]:
                self._bump_clause(confl)
            start = 1 if p != -1 else 0
            for k in range(start, len(clause)):
                q = clause[k]
                var = q >> 1
                if not seen[var] and self.level[var] > 0:
                    seen[var] = 1
                    self._bump_var(var)
                    if self.level[var] >= cur_level:
                        path += 1
                    else:
                        learned.append(q)
            # pick next trail literal to resolve on
            while not seen[self.trail[idx] >> 1]:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            var = p >> 1
            seen[var] = 0
            path -= 1
            if path == 0:
                learned[0] = p ^ 1
                break
            confl = self.reason[var]
        # clause minimization: drop literals implied by the rest
        marked = set(q >> 1 for q in learned[1:])
        out = [learned[0]]
        for q in learned[1:]:
            if not self._redundant(q, marked):
                out.append(q)
        learned = out
        if len(learned) == 1:
            return learned, 0
        # backjump to the second-highest level in the clause
        max_i = 1
        for k in range(2, len(learned)):
            if self.level[learned[k] >> 1] > self.level[learned[max_i] >> 1]:
                max_i = k
        learned[1], learned[max_i] = learned[max_i], learned[1]
        return learned, self.level[learned[1] >> 1]

    def _redundant(self, code: int, marked: set[int]) -> bool:
        reason = self.reason[code >> 1]
        if reason < 0:
            return False
        for q in self.clauses[reason]:
            var = q >> 1
            if var == code >> 1:
                continue
            if var not in marked and self.level[var] > 0:
                return False
        return True

    def _bump_clause(self, ci: int) -> None:
        self.cla_activity[ci] += self.cla_inc
        if self.cla_activity[ci] > 1e20:
            for i in range(len(self.cla_activity)):
                self.cla_activity[i] *= 1e-20
            self.cla_inc *= 1e-20

    def _backtrack(self, target_level: int) -> None:
        if len(self.trail_lim) <= target_level:
            return
        bound = self.trail_lim[target_level]
        for i in range(len(self.trail) - 1, bound - 1, -1):
            code = self.trail[i]
            var = code >> 1
            if self.cfg.phase_saving:
                self.saved_phase[var] = 0 if code & 1 else 1
            self.assign[var] = _UNASSIGNED
            self.reason[var] = -1
            self.order.insert(var)
        del self.trail[bound:]
        del self.trail_lim[target_level:]
        self.qhead = bound

    def _decide(self) -> int:
        """Pick the unassigned variable with the highest activity."""
        best = 0
        while self.order:
            v = self.order.pop_max()
            if self.assign[v] == _UNASSIGNED:
                best = v
                break
        if best == 0:
            return 0
        phase = self.saved_phase[best]
        return 2 * best if phase else 2 * best + 1

    def _reduce_learned(self) -> None:
        """Drop the less active half of long learned clauses."""
        candidates = [
            i for i in range(len(self.clauses))
            if self.is_learned[i] and len(self.clauses[i]) > 2
            and not self._is_reason(i)
        ]
        candidates.sort(key=lambda i: self.cla_activity[i])
        drop = set(candidates[: len(candidates) // 2])
        if not drop:
            return
        self._rebuild_without(drop)

    def _is_reason(self, ci: int) -> bool:
        clause = self.clauses[ci]
        var = clause[0] >> 1
        return self.reason[var] == ci and self.assign[var] != _UNASSIGNED

    def _rebuild_without(self, drop: set[int]) -> None:
        remap: dict[int, int] = {}
        new_clauses, new_act, new_learned = [], [], []
        for i, clause in enumerate(self.clauses):
            if i in drop:
                continue
            remap[i] = len(new_clauses)
            new_clauses.append(clause)
            new_act.append(self.cla_activity[i])
            new_learned.append(self.is_learned[i])
        self.clauses, self.cla_activity, self.is_learned = (
            new_clauses, new_act, new_learned)
        for v in range(1, self.nvars + 1):
            r = self.reason[v]
            if r >= 0:
                self.reason[v] = remap.get(r, -1)
        n = 2 * (self.nvars + 1)
        self.watches = [[] for _ in range(n)]
        for i, clause in enumerate(self.clauses):
            self.watches[clause[0]].append(i)
            self.watches[clause[1]].append(i)

    def solve(self) -> SatResult:
        if not self.ok:
            return SatResult(False, None, 0, 0)
        for u in self._units:
            if not self._enqueue(u, -1):
                return SatResult(False, None, 0, 0)
        if self._propagate() != -1:
            return SatResult(False, None, 0, self.conflicts)
        restart_idx = 1
        conflict_budget = luby(restart_idx) * self.cfg.luby_unit
        conflicts_here = 0
        learned_cap = self.cfg.learned_cap_base
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                conflicts_here += 1
                if not self.trail_lim:
                    return SatResult(False, None, self.learned_count, self.conflicts)
                learned, back_level = self._analyze(confl)
                self._backtrack(back_level)
                if len(learned) == 1:
                    self._enqueue(learned[0], -1)
                else:
                    idx = len(self.clauses)
                    self.clauses.append(learned)
                    self.cla_activity.append(self.cla_inc)
                    self.is_learned.append(True)
                    self.watches[learned[0]].append(idx)
                    self.watches[learned[1]].append(idx)
                    self._enqueue(learned[0], idx)
                self.learned_count += 1
                self.var_inc /= self.cfg.var_decay
                self.cla_inc /= self.cfg.clause_decay
                continue
            if conflicts_here >= conflict_budget:
                restart_idx += 1
                conflict_budget = luby(restart_idx) * self.cfg.luby_unit
                conflicts_here = 0
                self._backtrack(0)
                continue
            live_learned = sum(1 for x in self.is_learned if x)
            if live_learned > learned_cap:
                self._reduce_learned()
                learned_cap = int(learned_cap * self.cfg.learned_cap_growth)
            code = self._decide()
            if code == 0:
                assignment = {
                    v: self.assign[v] == _TRUE for v in range(1, self.nvars + 1)}
                return SatResult(True, assignment, self.learned_count, self.conflicts)
            self.trail_lim.append(len(self.trail))
            self._enqueue(code, -1)


def solve(cnf: Cnf, config: SolverConfig | None = None) -> SatResult:
    """Decide satisfiability of ``cnf``; Sat models are verified before return."""
    result = _Solver(cnf, config or SolverConfig()).solve()
    if result.satisfiable:
        assert result.assignment is not None
        _verify_model(cnf, result.assignment)
    return result


def _verify_model(cnf: Cnf, assignment: dict[int, bool]) -> None:
    for clause in cnf.clauses:
        if not any(assignment[abs(l)] == (l > 0) for l in clause):
            raise AssertionError(f"model does not satisfy clause {clause}")


def to_dimacs(cnf: Cnf) -> str:
    """Serialize to DIMACS: 'p cnf V C' header, zero-terminated clauses."""
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    for clause in cnf.clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"


def from_dimacs(text: str) -> Cnf:
    """Parse DIMACS text; raises ParseError with the offending line number."""
    num_vars: int | None = None
    num_clauses: int | None = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise ParseError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if num_vars < 0 or num_clauses < 0:
                raise ParseError("negative header counts", lineno)
            continue
        if num_vars is None:
            raise ParseError("clause before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"malformed literal {tok!r}", lineno) from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                if abs(lit) > num_vars:
                    raise ParseError(
                        f"literal {lit} exceeds declared variable count", lineno)
                current.append(lit)
    last_line = len(text.splitlines())
    if current:
        raise ParseError("unterminated clause at end of input", last_line)
    if num_vars is None:
        raise ParseError("missing 'p cnf' header", max(last_line, 1))
    if num_clauses is not None and num_clauses != len(clauses):
        raise ParseError(
            f"header declares {num_clauses} clauses, found {len(clauses)}",
            last_line)
    return Cnf.from_lists(num_vars, clauses)
