"""Exact solver for binary programs of the region form.

Solves: minimise an integer objective over the binary variables
(m, x, y) subject to the region inequality rows, the trace-emptiness
equality rows, the minimum-arc row, binary bounds and variable fixings.

The algorithm is branch-and-bound with bounding by the continuous
relaxation. The relaxation is solved by a dense two-phase simplex using
fraction-free integer pivoting, which is exact rational arithmetic with
the denominators cleared, so no tolerance enters anywhere. Large
constraint bodies are handled by row generation: the simplex runs on an
active subset and violated rows are added until the relaxed optimum
satisfies everything, at which point it is the optimum of the full body.

Determinism: among equal-objective optima the solver returns the
lexicographically smallest assignment in (m, x, y) order. The objective
is minimised in a lexicographic product with the assignment itself, which
makes the optimum unique, so results cannot depend on exploration order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import SolverError
from .regions import ILPInstance

_ROW_GENERATION_THRESHOLD = 48
_ROW_BATCH = 24

Rows = list[tuple[tuple[int, ...], int]]


@dataclass(frozen=True)
class Solution:
    status: str  # "optimal" | "infeasible"
    assignment: tuple[int, ...] | None
    objective: int | None


@dataclass(frozen=True)
class LPRelaxation:
    status: str  # "optimal" | "infeasible"
    value: Fraction | None
    point: tuple[Fraction, ...] | None


def _instance_rows(inst: ILPInstance) -> tuple[Rows, Rows]:
    """All constraint rows over the full variable vector.

    Returns (inequalities, equalities); an inequality (coefs, rhs) means
    coefs . v >= rhs, an equality means coefs . v == rhs.
    """
    cs = inst.system
    n = cs.n_vars
    for row in cs.inequality_rows:
        if len(row.vector) != n:
            raise SolverError("inequality row dimension does not match the alphabet")
    for row in cs.equality_rows:
        if len(row.vector) != n:
            raise SolverError("equality row dimension does not match the alphabet")
    if len(cs.objective) != n:
        raise SolverError("objective dimension does not match the alphabet")
    for index, value in inst.fixings.items():
        if not 0 <= index < n:
            raise SolverError(f"fixing index {index} out of range")
        if value not in (0, 1):
            raise SolverError(f"fixing value must be binary, got {value}")
    inequalities: Rows = [(row.vector, 0) for row in cs.inequality_rows]
    inequalities.append((cs.min_arc_row(), 1))
    equalities: Rows = [(row.vector, 0) for row in cs.equality_rows]
    return inequalities, equalities


def _substitute(rows: Rows, free: Sequence[int], assigned: dict[int, int]) -> Rows:
    out: Rows = []
    for coefs, rhs in rows:
        shifted = rhs - sum(coefs[i] * v for i, v in assigned.items() if coefs[i])
        out.append((tuple(coefs[i] for i in free), shifted))
    return out


class _Simplex:
    """Two-phase dense simplex over the rationals, fraction-free.

    Constraints are ``coefs . v >= rhs`` with v >= 0. The tableau holds
    integers with one shared positive denominator (the previous pivot).
    Pivots chosen by the ratio test are positive; the only negative pivots
    occur when driving a degenerate artificial out of the basis, and the
    tableau is renormalised afterwards so the denominator stays positive.
    """

    def __init__(self, rows: Rows, costs: Sequence[int]):
        self.n = len(costs)
        self.den = 1
        self.tableau: list[list[int]] = []
        self.basis: list[int] = []
        self.dropped: set[int] = set()
        n = self.n
        m = len(rows)
        art_rows = [i for i, (_, rhs) in enumerate(rows) if rhs > 0]
        art_index = {row: k for k, row in enumerate(art_rows)}
        self.width = n + m + len(art_rows) + 1
        self.art_cols = frozenset(n + m + k for k in range(len(art_rows)))
        for i, (coefs, rhs) in enumerate(rows):
            line = [0] * self.width
            if rhs > 0:
                line[: n] = list(coefs)
                line[n + i] = -1
                line[n + m + art_index[i]] = 1
                line[-1] = rhs
                self.basis.append(n + m + art_index[i])
            else:
                line[: n] = [-c for c in coefs]
                line[n + i] = 1
                line[-1] = -rhs
                self.basis.append(n + i)
            self.tableau.append(line)
        # phase 2 reduced costs (initial basics all cost zero)
        self.cost2 = list(costs) + [0] * (self.width - n)
        # phase 1 reduced costs: unit cost on artificials, basics eliminated
        cost1 = [0] * self.width
        for col in self.art_cols:
            cost1[col] = 1
        for i in art_rows:
            row = self.tableau[i]
            for j in range(self.width):
                cost1[j] -= row[j]
        self.cost1 = cost1

    def _pivot(self, row: int, col: int) -> None:
        piv = self.tableau[row][col]
        den = self.den
        pivot_row = self.tableau[row]
        for i, current in enumerate(self.tableau):
            if i == row or i in self.dropped:
                continue
            factor = current[col]
            if factor:
                self.tableau[i] = [
                    (piv * a - factor * b) // den for a, b in zip(current, pivot_row)
                ]
            elif piv != den:
                self.tableau[i] = [(piv * a) // den for a in current]
        for cost in (self.cost1, self.cost2):
            factor = cost[col]
            if factor:
                cost[:] = [
                    (piv * a - factor * b) // den for a, b in zip(cost, pivot_row)
                ]
            elif piv != den:
                cost[:] = [(piv * a) // den for a in cost]
        self.den = piv
        self.basis[row] = col
        if self.den < 0:
            # global sign flip keeps the shared denominator positive
            self.den = -self.den
            for i in range(len(self.tableau)):
                if i not in self.dropped:
                    self.tableau[i] = [-a for a in self.tableau[i]]
            self.cost1 = [-a for a in self.cost1]
            self.cost2 = [-a for a in self.cost2]

    def _ratio_row(self, col: int) -> int | None:
        best: int | None = None
        best_rhs = best_coef = 0
        for i, row in enumerate(self.tableau):
            if i in self.dropped:
                continue
            coef = row[col]
            if coef <= 0:
                continue
            rhs = row[-1]
            if best is None:
                best, best_rhs, best_coef = i, rhs, coef
                continue
            left = rhs * best_coef
            right = best_rhs * coef
            if left < right or (left == right and self.basis[i] < self.basis[best]):
                best, best_rhs, best_coef = i, rhs, coef
        return best

    def _run_phase(self, cost: list[int], allowed: list[int]) -> None:
        pivots = 0
        bland_after = 200 + 40 * len(self.tableau)
        while True:
            entering = None
            if pivots <= bland_after:
                best_val = 0
                for j in allowed:
                    val = cost[j]
                    if val < best_val:
                        best_val = val
                        entering = j
            else:  # Bland's rule, guarantees termination under degeneracy
                for j in allowed:
                    if cost[j] < 0:
                        entering = j
                        break
            if entering is None:
                return
            row = self._ratio_row(entering)
            if row is None:
                raise SolverError("relaxation unbounded; box rows missing")
            self._pivot(row, entering)
            pivots += 1
            if pivots > 100000:
                raise SolverError("simplex failed to terminate")

    def _drive_out_artificials(self, non_art: list[int]) -> None:
        for i in range(len(self.tableau)):
            if i in self.dropped or self.basis[i] not in self.art_cols:
                continue
            row = self.tableau[i]
            col = next((j for j in non_art if row[j] > 0), None)
            if col is None:
                col = next((j for j in non_art if row[j] != 0), None)
            if col is None:
                self.dropped.add(i)  # 0 = 0 after substitution, redundant
                continue
            self._pivot(i, col)

    def solve(self) -> tuple[str, list[Fraction]]:
        non_art = [j for j in range(self.width - 1) if j not in self.art_cols]
        if self.art_cols:
            self._run_phase(self.cost1, non_art)
            infeasibility = sum(
                row[-1]
                for i, row in enumerate(self.tableau)
                if i not in self.dropped and self.basis[i] in self.art_cols
            )
            if infeasibility > 0:
                return "infeasible", []
            self._drive_out_artificials(non_art)
        self._run_phase(self.cost2, non_art)
        values = [Fraction(0)] * self.n
        for i, var in enumerate(self.basis):
            if i in self.dropped:
                continue
            if var < self.n:
                values[var] = Fraction(self.tableau[i][-1], self.den)
        return "optimal", values


def _solve_lp(rows: Rows, costs: Sequence[int]) -> tuple[str, list[Fraction]]:
    cleaned: dict[tuple[int, ...], int] = {}
    for coefs, rhs in rows:
        if any(coefs):
            prior = cleaned.get(coefs)
            if prior is None or rhs > prior:
                cleaned[coefs] = rhs
        elif rhs > 0:
            return "infeasible", []
    return _Simplex(sorted(cleaned.items()), costs).solve()


def _solve_lp_generated(
    mandatory: Rows, optional: Rows, costs: Sequence[int]
) -> tuple[str, list[Fraction]]:
    """Exact LP optimum over mandatory + optional rows.

    Runs on an active subset and adds the most violated optional rows
    until the relaxed optimum satisfies every row; a subset optimum that
    is feasible for the full set is optimal for the full set.
    """
    if len(mandatory) + len(optional) <= _ROW_GENERATION_THRESHOLD:
        return _solve_lp(mandatory + optional, costs)
    active = list(mandatory)
    pending = list(optional)
    while True:
        status, point = _solve_lp(active, costs)
        if status != "optimal":
            return status, point
        common = math.lcm(*(f.denominator for f in point)) if point else 1
        scaled = [int(f * common) for f in point]
        violated = []
        for coefs, rhs in pending:
            slack = sum(c * s for c, s in zip(coefs, scaled) if c) - rhs * common
            if slack < 0:
                violated.append((slack, coefs, rhs))
        if not violated:
            return status, point
        violated.sort(key=lambda item: (item[0], item[1]))
        chosen = {(coefs, rhs) for _, coefs, rhs in violated[:_ROW_BATCH]}
        active.extend(sorted(chosen))
        pending = [row for row in pending if row not in chosen]


def _expand_equalities(equalities: Rows) -> Rows:
    out: Rows = []
    for coefs, rhs in equalities:
        out.append((coefs, rhs))
        out.append((tuple(-c for c in coefs), -rhs))
    return out


def _box_rows(count: int) -> Rows:
    return [
        (tuple(-1 if k == j else 0 for k in range(count)), -1) for j in range(count)
    ]


def lp_relax(inst: ILPInstance) -> LPRelaxation:
    """Continuous relaxation: variables in [0, 1], fixings substituted.

    The value is an exact rational lower bound on the binary optimum; it
    cannot be unbounded because every variable is boxed.
    """
    inequalities, equalities = _instance_rows(inst)
    n = inst.system.n_vars
    fixed = dict(inst.fixings)
    free = [i for i in range(n) if i not in fixed]
    mandatory = _box_rows(len(free)) + _substitute(
        _expand_equalities(equalities), free, fixed
    )
    optional = _substitute(inequalities, free, fixed)
    costs = [inst.system.objective[i] for i in free]
    status, point = _solve_lp_generated(mandatory, optional, costs)
    if status != "optimal":
        return LPRelaxation(status="infeasible", value=None, point=None)
    constant = sum(inst.system.objective[i] * v for i, v in fixed.items())
    value = constant + sum(c * p for c, p in zip(costs, point))
    full = [Fraction(0)] * n
    for i, v in fixed.items():
        full[i] = Fraction(v)
    for j, i in enumerate(free):
        full[i] = point[j]
    return LPRelaxation(status="optimal", value=Fraction(value), point=tuple(full))


def _verify(inst: ILPInstance, assignment: Sequence[int]) -> bool:
    inequalities, equalities = _instance_rows(inst)
    if any(assignment[i] != v for i, v in inst.fixings.items()):
        return False
    if any(v not in (0, 1) for v in assignment):
        return False
    for coefs, rhs in inequalities:
        if sum(c * v for c, v in zip(coefs, assignment) if c) < rhs:
            return False
    for coefs, rhs in equalities:
        if sum(c * v for c, v in zip(coefs, assignment) if c) != rhs:
            return False
    return True


def _objective_of(inst: ILPInstance, assignment: Sequence[int]) -> int:
    return sum(c * v for c, v in zip(inst.system.objective, assignment))


def solve(inst: ILPInstance) -> Solution:
    """Globally optimal binary assignment, or infeasible.

    Branch-and-bound, depth-first on the most fractional relaxation
    variable, children explored zero-branch first; every returned
    assignment is re-verified by integer row evaluation.
    """
    cs = inst.system
    n = cs.n_vars
    inequalities, equalities = _instance_rows(inst)
    eq_pairs = _expand_equalities(equalities)
    base_fixed = dict(inst.fixings)
    free = [i for i in range(n) if i not in base_fixed]
    depth = len(free)

    # lexicographic product objective; see module docstring
    shift = 1 << depth
    combined = {
        i: cs.objective[i] * shift + (1 << (depth - 1 - j))
        for j, i in enumerate(free)
    }

    def combined_value(assignment: Sequence[int]) -> int:
        return sum(combined[i] * assignment[i] for i in free)

    best_assignment: list[int] | None = None
    best_combined: int | None = None
    for seed in inst.seeds:
        if len(seed) == n and _verify(inst, seed):
            value = combined_value(seed)
            if best_combined is None or value < best_combined:
                best_combined = value
                best_assignment = list(seed)

    stack: list[dict[int, int]] = [{}]
    while stack:
        extra = stack.pop()
        assigned = dict(base_fixed)
        assigned.update(extra)
        node_free = [i for i in free if i not in extra]
        if not node_free:
            candidate = [assigned[i] for i in range(n)]
            if _verify(inst, candidate):
                value = combined_value(candidate)
                if best_combined is None or value < best_combined:
                    best_combined = value
                    best_assignment = candidate
            continue
        mandatory = _box_rows(len(node_free)) + _substitute(
            eq_pairs, node_free, assigned
        )
        optional = _substitute(inequalities, node_free, assigned)
        costs = [combined[i] for i in node_free]
        status, point = _solve_lp_generated(mandatory, optional, costs)
        if status != "optimal":
            continue
        bound = sum(c * p for c, p in zip(costs, point)) + sum(
            combined[i] * v for i, v in extra.items()
        )
        if best_combined is not None and math.ceil(bound) >= best_combined:
            continue
        fractional = [(j, p) for j, p in enumerate(point) if p.denominator != 1]
        if not fractional:
            candidate = [0] * n
            for i, v in assigned.items():
                candidate[i] = v
            for j, i in enumerate(node_free):
                candidate[i] = int(point[j])
            if _verify(inst, candidate):
                value = combined_value(candidate)
                if best_combined is None or value < best_combined:
                    best_combined = value
                    best_assignment = candidate
            continue
        half = Fraction(1, 2)
        branch_pos = min(fractional, key=lambda item: (abs(item[1] - half), item[0]))[0]
        branch_var = node_free[branch_pos]
        stack.append({**extra, branch_var: 1})
        stack.append({**extra, branch_var: 0})

    if best_assignment is None:
        return Solution(status="infeasible", assignment=None, objective=None)
    if not _verify(inst, best_assignment):
        raise SolverError("internal error: optimum failed re-verification")
    return Solution(
        status="optimal",
        assignment=tuple(best_assignment),
        objective=_objective_of(inst, best_assignment),
    )


def brute_force(inst: ILPInstance) -> Solution:
    """Exhaustive oracle over all binary assignments honouring the fixings.

    Same tie-break as solve: objective first, then lexicographically
    smallest assignment. Guarded by the enumeration budget.
    """
    cs = inst.system
    n = cs.n_vars
    if n > 25:
        raise SolverError(f"enumeration budget exceeded: {n} variables > 25")
    inequalities, equalities = _instance_rows(inst)
    fixed = dict(inst.fixings)
    free = [i for i in range(n) if i not in fixed]
    depth = len(free)

    ineq_matrix = np.array([coefs for coefs, _ in inequalities], dtype=np.int64)
    ineq_rhs = np.array([rhs for _, rhs in inequalities], dtype=np.int64)
    eq_matrix = (
        np.array([coefs for coefs, _ in equalities], dtype=np.int64)
        if equalities
        else np.zeros((0, n), dtype=np.int64)
    )
    eq_rhs = np.array([rhs for _, rhs in equalities], dtype=np.int64)
    objective = np.array(cs.objective, dtype=np.int64)

    template = np.zeros(n, dtype=np.int64)
    for i, v in fixed.items():
        template[i] = v

    best_index: int | None = None
    best_value: int | None = None
    total = 1 << depth
    chunk = 1 << 18
    shifts = np.array([depth - 1 - j for j in range(depth)], dtype=np.int64)
    free_idx = np.array(free, dtype=np.int64)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        codes = np.arange(start, stop, dtype=np.int64)
        X = np.tile(template, (stop - start, 1))
        if depth:
            X[:, free_idx] = (codes[:, None] >> shifts[None, :]) & 1
        feasible = np.all(X @ ineq_matrix.T >= ineq_rhs, axis=1)
        if eq_matrix.shape[0]:
            feasible &= np.all(X @ eq_matrix.T == eq_rhs, axis=1)
        if not feasible.any():
            continue
        values = np.where(feasible, X @ objective, np.iinfo(np.int64).max)
        pos = int(values.argmin())
        value = int(values[pos])
        if best_value is None or value < best_value:
            best_value = value
            best_index = start + pos
    if best_index is None:
        return Solution(status="infeasible", assignment=None, objective=None)
    assignment = list(int(v) for v in template)
    for j, i in enumerate(free):
        assignment[i] = (best_index >> (depth - 1 - j)) & 1
    return Solution(
        status="optimal", assignment=tuple(assignment), objective=best_value
    )
