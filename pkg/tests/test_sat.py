import itertools
import random

import pytest

from ctrv.sat import Cnf, ParseError, SatResult, from_dimacs, solve, to_dimacs


def brute_force_sat(cnf: Cnf) -> bool:
    for bits in itertools.product([False, True], repeat=cnf.num_vars):
        assignment = {v: bits[v - 1] for v in range(1, cnf.num_vars + 1)}
        if all(any(assignment[abs(l)] == (l > 0) for l in c) for c in cnf.clauses):
            return True
    return not cnf.clauses and True


def test_tautology_clause_is_sat():
    assert solve(Cnf.from_lists(1, [[1, -1]])).satisfiable


def test_unit_contradiction_is_unsat():
    assert not solve(Cnf.from_lists(1, [[1], [-1]])).satisfiable


def test_empty_clause_is_trivially_unsat():
    assert not solve(Cnf.from_lists(2, [[1], []])).satisfiable


def test_empty_cnf_is_sat():
    result = solve(Cnf.from_lists(0, []))
    assert result.satisfiable
    assert result.assignment == {}


def test_model_is_total():
    result = solve(Cnf.from_lists(3, [[1, 2], [-2, 3]]))
    assert result.satisfiable
    assert set(result.assignment) == {1, 2, 3}


def random_3cnf(rng: random.Random, num_vars: int, num_clauses: int) -> Cnf:
    clauses = []
    for _ in range(num_clauses):
        vs = rng.sample(range(1, num_vars + 1), 3)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return Cnf.from_lists(num_vars, clauses)


def test_random_3cnf_agrees_with_brute_force():
    rng = random.Random(20240817)
    for _ in range(200):
        nv = rng.randint(3, 12)
        nc = rng.randint(1, int(4.5 * nv))
        cnf = random_3cnf(rng, nv, nc)
        expected = brute_force_sat(cnf)
        result = solve(cnf)
        assert result.satisfiable == expected, to_dimacs(cnf)
        # solve() verifies models internally; double-check here anyway
        if result.satisfiable:
            for clause in cnf.clauses:
                assert any(result.assignment[abs(l)] == (l > 0) for l in clause)


def test_deterministic_verdict_and_learned_count():
    rng = random.Random(7)
    for _ in range(20):
        cnf = random_3cnf(rng, 10, 42)
        r1 = solve(cnf)
        r2 = solve(cnf)
        assert r1.satisfiable == r2.satisfiable
        assert r1.learned == r2.learned
        assert r1.conflicts == r2.conflicts


def test_pigeonhole_unsat():
    # 4 pigeons, 3 holes: var(p, h) = 3 * p + h + 1
    clauses = []
    for p in range(4):
        clauses.append([3 * p + h + 1 for h in range(3)])
    for h in range(3):
        for p1 in range(4):
            for p2 in range(p1 + 1, 4):
                clauses.append([-(3 * p1 + h + 1), -(3 * p2 + h + 1)])
    assert not solve(Cnf.from_lists(12, clauses)).satisfiable


def test_dimacs_round_trip():
    rng = random.Random(99)
    for _ in range(50):
        cnf = random_3cnf(rng, rng.randint(3, 9), rng.randint(1, 20))
        assert from_dimacs(to_dimacs(cnf)) == cnf


def test_dimacs_header_example():
    cnf = from_dimacs("p cnf 2 1\n1 -2 0\n")
    assert cnf.num_vars == 2
    assert cnf.clauses == ((1, -2),)


def test_dimacs_accepts_comments_and_blank_lines():
    cnf = from_dimacs("c hello\n\np cnf 2 2\nc mid\n1 0\n-1 2 0\n")
    assert cnf.clauses == ((1,), (-1, 2))


def test_dimacs_malformed_literal_reports_line():
    with pytest.raises(ParseError) as exc:
        from_dimacs("p cnf 2 1\n1 x 0\n")
    assert exc.value.line == 2


def test_dimacs_literal_out_of_range():
    with pytest.raises(ParseError):
        from_dimacs("p cnf 2 1\n3 0\n")


def test_dimacs_missing_header():
    with pytest.raises(ParseError):
        from_dimacs("1 -2 0\n")


def test_dimacs_clause_count_mismatch():
    with pytest.raises(ParseError):
        from_dimacs("p cnf 2 2\n1 0\n")


def test_dimacs_unterminated_clause():
    with pytest.raises(ParseError):
        from_dimacs("p cnf 2 1\n1 -2\n")


def test_cnf_rejects_zero_literal():
    with pytest.raises(ValueError):
        Cnf.from_lists(2, [[1, 0]])


def test_cnf_rejects_out_of_range_literal():
    with pytest.raises(ValueError):
        Cnf.from_lists(2, [[3]])


def test_satresult_truthiness():
    assert SatResult(True, {})
    assert not SatResult(False)
